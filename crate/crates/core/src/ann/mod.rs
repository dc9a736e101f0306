//! Three-stream feedforward temperature predictor.
//!
//! One network per component class — cores, switches, links — each a single
//! hidden layer with sigmoid activation and a linear output layer.  All
//! three streams read the same input vector: the 240 component utilizations
//! plus one normalized prediction-horizon input, plus a constant bias line.
//! Stream outputs are the predicted temperature *changes* (ΔT in °C) of that
//! stream's components over the horizon; the caller adds the starting
//! temperatures.
//!
//! The float path here is the training/reference implementation.  The
//! hardware-shaped fixed-point path lives in [`quant`]; dataset synthesis
//! and backpropagation live in [`dataset`] and [`train`].

pub mod dataset;
pub mod io;
pub mod quant;
pub mod train;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::seed::subsystem_rng;
use crate::thermal::{ThermalState, UtilizationVector};
use rand::Rng;

/// Utilization inputs shared by every stream.
pub const UTIL_INPUTS: usize = 240;
/// Utilizations plus the normalized horizon input.
pub const INPUT_FEATURES: usize = UTIL_INPUTS + 1;
/// Horizon steps the dataset covers; predictions beyond this are refused.
pub const MAX_HORIZON_STEPS: u32 = 3000;

/// Hidden widths per stream.
pub const CORE_HIDDEN: usize = 250;
pub const SWITCH_HIDDEN: usize = 50;
pub const LINK_HIDDEN: usize = 100;
/// Output widths per stream (component counts of the default fabric).
pub const CORE_OUTPUTS: usize = 64;
pub const SWITCH_OUTPUTS: usize = 64;
pub const LINK_OUTPUTS: usize = 112;

/// Trainable weights across all streams, biases included.
pub const TOTAL_WEIGHTS: usize = CORE_HIDDEN * (INPUT_FEATURES + 1)
    + CORE_OUTPUTS * (CORE_HIDDEN + 1)
    + SWITCH_HIDDEN * (INPUT_FEATURES + 1)
    + SWITCH_OUTPUTS * (SWITCH_HIDDEN + 1)
    + LINK_HIDDEN * (INPUT_FEATURES + 1)
    + LINK_OUTPUTS * (LINK_HIDDEN + 1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    /// Pass-through, for closed-form gradient cross-checks.
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed in terms of the activation value `a`.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

/// One stream: `inputs -> hidden -> outputs` with bias terms folded into the
/// weight matrices as an extra column.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamNet {
    /// `hidden x (inputs + 1)`; last column is the hidden bias.
    pub w1: DMatrix<f64>,
    /// `outputs x (hidden + 1)`; last column is the output bias.
    pub w2: DMatrix<f64>,
    pub activation: Activation,
}

impl StreamNet {
    pub fn new_seeded(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        init_scale: f64,
        seed: u64,
        label: &str,
    ) -> StreamNet {
        let mut rng = subsystem_rng(seed, label);
        let mut draw = |r: usize, c: usize| {
            DMatrix::from_fn(r, c, |_, _| rng.gen_range(-init_scale..=init_scale))
        };
        StreamNet {
            w1: draw(hidden, inputs + 1),
            w2: draw(outputs, hidden + 1),
            activation: Activation::Sigmoid,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols() - 1
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.w2.nrows()
    }

    /// Weight count including biases.
    pub fn weight_count(&self) -> usize {
        self.w1.len() + self.w2.len()
    }

    /// Forward pass for one sample; input excludes the bias term.
    pub fn forward(&self, input: &[f64]) -> DVector<f64> {
        assert_eq!(input.len(), self.inputs(), "input width must match the stream");
        let hidden = self.hidden();
        let mut a1 = DVector::zeros(hidden + 1);
        for i in 0..hidden {
            let row = self.w1.row(i);
            let mut z = row[self.inputs()]; // bias column
            for (j, &x) in input.iter().enumerate() {
                z += row[j] * x;
            }
            a1[i] = self.activation.apply(z);
        }
        a1[hidden] = 1.0; // bias line into the output layer
        &self.w2 * a1
    }
}

/// The full predictor: one stream per component class.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnModel {
    pub cores: StreamNet,
    pub switches: StreamNet,
    pub links: StreamNet,
}

impl AnnModel {
    /// Fresh model with seeded uniform init in `±init_scale`.
    pub fn new_seeded(init_scale: f64, seed: u64) -> AnnModel {
        AnnModel {
            cores: StreamNet::new_seeded(
                INPUT_FEATURES,
                CORE_HIDDEN,
                CORE_OUTPUTS,
                init_scale,
                seed,
                "ann-core-stream",
            ),
            switches: StreamNet::new_seeded(
                INPUT_FEATURES,
                SWITCH_HIDDEN,
                SWITCH_OUTPUTS,
                init_scale,
                seed,
                "ann-switch-stream",
            ),
            links: StreamNet::new_seeded(
                INPUT_FEATURES,
                LINK_HIDDEN,
                LINK_OUTPUTS,
                init_scale,
                seed,
                "ann-link-stream",
            ),
        }
    }

    pub fn streams(&self) -> [&StreamNet; 3] {
        [&self.cores, &self.switches, &self.links]
    }

    pub fn total_outputs(&self) -> usize {
        self.cores.outputs() + self.switches.outputs() + self.links.outputs()
    }

    pub fn total_weights(&self) -> usize {
        self.streams().iter().map(|s| s.weight_count()).sum()
    }

    /// Assemble the shared input vector for a horizon in steps.
    pub fn input_vector(u: &[f64], horizon_steps: u32) -> Vec<f64> {
        assert_eq!(u.len(), UTIL_INPUTS, "one utilization per component");
        let mut x = Vec::with_capacity(INPUT_FEATURES);
        x.extend_from_slice(u);
        x.push(horizon_steps as f64 / MAX_HORIZON_STEPS as f64);
        x
    }

    /// Predicted ΔT per component (flattened order: cores, switches, links).
    pub fn predict_delta(&self, u: &[f64], horizon_steps: u32) -> Result<Vec<f64>, Error> {
        if horizon_steps > MAX_HORIZON_STEPS {
            return Err(Error::HorizonRange {
                requested: horizon_steps,
                max: MAX_HORIZON_STEPS,
            });
        }
        let x = Self::input_vector(u, horizon_steps);
        let mut out = Vec::with_capacity(self.total_outputs());
        for stream in self.streams() {
            out.extend(stream.forward(&x).iter());
        }
        Ok(out)
    }

    /// Predicted absolute temperatures: `t0 + ΔT̂(u, horizon)`.
    pub fn predict(
        &self,
        u: &UtilizationVector,
        horizon_steps: u32,
        t0: &ThermalState,
    ) -> Result<ThermalState, Error> {
        let delta = self.predict_delta(&u.0, horizon_steps)?;
        if t0.0.len() != delta.len() {
            return Err(Error::Dimension {
                context: "predict starting state",
                expected: delta.len(),
                got: t0.0.len(),
            });
        }
        Ok(ThermalState(t0.0.iter().zip(&delta).map(|(t, d)| t + d).collect()))
    }
}

/// Per-component hot flags produced by a prediction, in flattened component
/// order (cores, then switches, then links).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusBits {
    pub bits: Vec<bool>,
    /// Cycle the prediction was made at.
    pub timestamp: u64,
}

impl StatusBits {
    pub fn from_temps(temps: &[f64], threshold_c: f64, timestamp: u64) -> StatusBits {
        StatusBits { bits: temps.iter().map(|&t| t > threshold_c).collect(), timestamp }
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}
