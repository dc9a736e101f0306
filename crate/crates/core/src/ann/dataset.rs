//! Training-data synthesis from the lumped-RC reference model.
//!
//! Each scenario draws one utilization vector uniformly in [0,1]^240, holds
//! it constant, and integrates the RC model forward from the leakage-only
//! steady state, recording the per-component temperature change at every
//! thermal step.  Trajectories are stored as `f32` — 250 scenarios of 3000
//! steps over 240 components is ~690 MB, well inside a training host's RAM,
//! and the quantization floor of the downstream consumers is far coarser.

use rand::Rng;

use crate::error::Error;
use crate::seed::subsystem_rng;
use crate::thermal::{RcThermalModel, UtilizationVector};

use super::UTIL_INPUTS;

/// One labeled scenario: constant input, ΔT trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// The held-constant utilization draw (length 240).
    pub u: Vec<f64>,
    /// Row-major `steps x components`: ΔT(h)[c] = t(h)[c] − t(0)[c].
    pub delta: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    pub components: usize,
    pub steps: usize,
    pub scenarios: Vec<Scenario>,
}

impl TrainingDataset {
    /// Synthesize `n_scenarios x steps` labeled samples; deterministic for a
    /// given seed.
    pub fn generate(
        model: &RcThermalModel,
        n_scenarios: usize,
        steps: usize,
        seed: u64,
    ) -> Result<TrainingDataset, Error> {
        if n_scenarios == 0 {
            return Err(Error::config("ann.scenarios", n_scenarios, ">= 1"));
        }
        if steps == 0 {
            return Err(Error::config("ann.steps", steps, ">= 1"));
        }
        let components = model.node_count();
        if components != UTIL_INPUTS {
            return Err(Error::Dimension {
                context: "training data generation",
                expected: UTIL_INPUTS,
                got: components,
            });
        }
        let mut rng = subsystem_rng(seed, "dataset-utilization-draws");
        let baseline = model.steady_state(
            &model.power_from_utilization(&UtilizationVector::zeros(components)),
        )?;

        let mut scenarios = Vec::with_capacity(n_scenarios);
        for _ in 0..n_scenarios {
            let u: Vec<f64> = (0..components).map(|_| rng.gen_range(0.0..=1.0)).collect();
            scenarios.push(synthesize_scenario(model, u, steps, &baseline)?);
        }
        Ok(TrainingDataset { components, steps, scenarios })
    }

    /// ΔT label vector of one (scenario, horizon) pair; `h` is 1-based in
    /// steps, matching the recorded trajectory (h = 1 is the first step).
    pub fn label(&self, scenario: usize, h: usize) -> &[f32] {
        assert!((1..=self.steps).contains(&h), "horizon {h} outside 1..={}", self.steps);
        let s = &self.scenarios[scenario];
        &s.delta[(h - 1) * self.components..h * self.components]
    }

    pub fn sample_count(&self) -> usize {
        self.scenarios.len() * self.steps
    }

    /// Deterministic 80/20 split by scenario.  Returns (train, validation)
    /// index lists; every scenario lands in exactly one side.  A single
    /// scenario trains without validation.
    pub fn split_indices(&self, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let n = self.scenarios.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = subsystem_rng(seed, "dataset-split");
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let n_val = if n >= 5 { n / 5 } else { usize::from(n >= 2) };
        let (val, train) = order.split_at(n_val);
        let mut train = train.to_vec();
        let mut val = val.to_vec();
        train.sort_unstable();
        val.sort_unstable();
        (train, val)
    }
}

/// Integrate one constant-utilization trajectory and record ΔT per step.
pub fn synthesize_scenario(
    model: &RcThermalModel,
    u: Vec<f64>,
    steps: usize,
    baseline: &crate::thermal::ThermalState,
) -> Result<Scenario, Error> {
    let components = model.node_count();
    let power = model.power_from_utilization(&UtilizationVector::new(u.clone())?);
    let mut delta = Vec::with_capacity(steps * components);
    let mut state = baseline.clone();
    for _ in 0..steps {
        state = model.run_steps(&state, &power, 1);
        for (t, t0) in state.0.iter().zip(&baseline.0) {
            delta.push((t - t0) as f32);
        }
    }
    Ok(Scenario { u, delta })
}
