//! Full-scale training probe: default dataset, default hyperparameters,
//! report held-out RMSE and wall time.  Temporary diagnostic.

use std::time::Instant;

use thermnoc_core::ann::dataset::TrainingDataset;
use thermnoc_core::ann::train::{train, Hyper};
use thermnoc_core::thermal::{RcThermalModel, ThermalConstants};
use thermnoc_core::topology::Topology;

fn main() {
    let topo = Topology::default_8x8();
    let model = RcThermalModel::for_topology(&topo, &ThermalConstants::default()).unwrap();
    let t0 = Instant::now();
    let data = TrainingDataset::generate(&model, 250, 3000, 7).unwrap();
    println!("dataset: {:.1}s", t0.elapsed().as_secs_f64());
    // label range scan
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in 0..250 {
        for h in [1usize, 100, 1000, 3000] {
            for &v in data.label(s, h) {
                lo = lo.min(v as f64);
                hi = hi.max(v as f64);
            }
        }
    }
    println!("label range: [{lo:.2}, {hi:.2}] degC");
    let t1 = Instant::now();
    let out = train(&data, &Hyper::default()).unwrap();
    println!("train: {:.1}s", t1.elapsed().as_secs_f64());
    for e in &out.history {
        println!(
            "epoch {} train_mse {:.4} val_rmse {:?}",
            e.epoch, e.train_mse, e.validation_rmse
        );
    }
    println!("best held-out RMSE: {:?}", out.best_validation_rmse);
}
