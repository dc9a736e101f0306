//! Lumped-RC thermal network over the fabric components plus the
//! utilization -> power map that drives it.
//!
//! Every component (core, switch, link) is one thermal node with a heat
//! capacitance `c` [J/degC] and a vertical resistance `r_v` [degC/W] to the
//! ambient heat sink.  Lateral resistances couple each core to its switch
//! and each link to its two endpoint switches.  The update rule is a plain
//! explicit Euler step:
//!
//! ```text
//! t'[i] = t[i] + dt/c[i] * (p[i] - (t[i]-t_amb)/r_v[i] - sum_j (t[i]-t[j])/r_lat[i,j])
//! ```
//!
//! which is stable iff `dt < min_i c[i] / G[i]` where `G[i]` is node i's
//! total conductance; the constructor rejects models that violate the
//! bound.  Steady states solve the same balance directly as a symmetric
//! positive-definite linear system.
//!
//! The default class constants encode a tiled-die picture: cores sit on
//! dedicated vertical paths to the heat spreader (low `r_v`), while switch
//! and link metal has a much poorer vertical escape and sheds most of its
//! heat laterally, so the interconnect layer acts as a regional heat
//! integrator.  A block of busy neighboring cores therefore reinforces
//! itself through the pooled interconnect and climbs several degrees above
//! what the same cores produce when scattered.  Core time constants sit
//! near 130 us and fabric-scale modes in the millisecond range, so a warm
//! fabric drifts to a new equilibrium over a few million 2.5 GHz cycles —
//! the window the experiment engine and the management scheme operate in.

use crate::error::Error;
use crate::topology::{ComponentKind, Topology};

/// Per-class RC constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRc {
    /// Heat capacitance in J/degC.
    pub capacitance: f64,
    /// Vertical resistance to ambient in degC/W.
    pub r_vertical: f64,
}

/// Per-class affine power model: `p = leak + u * dynamic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPower {
    pub leak_w: f64,
    pub dynamic_w: f64,
}

/// All tunable thermal/power constants for one fabric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConstants {
    pub t_ambient_c: f64,
    /// Euler step width in seconds.
    pub dt_s: f64,
    /// Simulated clock cycles per thermal step (25_000 cycles at 2.5 GHz
    /// is one 10 us step).
    pub cycles_per_step: u64,
    pub core: ClassRc,
    pub switch: ClassRc,
    pub link: ClassRc,
    /// Lateral coupling resistance used for core-switch and link-switch
    /// pairs, in degC/W.
    pub r_lateral: f64,
    pub core_power: ClassPower,
    pub switch_power: ClassPower,
    pub link_power: ClassPower,
}

impl Default for ThermalConstants {
    fn default() -> Self {
        ThermalConstants {
            t_ambient_c: 45.0,
            dt_s: 1.0e-5,
            cycles_per_step: 25_000,
            core: ClassRc { capacitance: 2.2e-5, r_vertical: 24.0 },
            switch: ClassRc { capacitance: 2.8e-5, r_vertical: 65.0 },
            link: ClassRc { capacitance: 1.2e-5, r_vertical: 65.0 },
            r_lateral: 8.0,
            core_power: ClassPower { leak_w: 0.3, dynamic_w: 1.2 },
            switch_power: ClassPower { leak_w: 0.15, dynamic_w: 2.0 },
            link_power: ClassPower { leak_w: 0.05, dynamic_w: 1.2 },
        }
    }
}

/// Per-component utilization in [0,1], flattened component order.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilizationVector(pub Vec<f64>);

impl UtilizationVector {
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        for (i, &u) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::config(
                    "utilization",
                    format!("component {i} = {u}"),
                    "in [0, 1]",
                ));
            }
        }
        Ok(UtilizationVector(values))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self, Error> {
        UtilizationVector::new(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        UtilizationVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-component power in W, flattened component order.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile(pub Vec<f64>);

/// Per-component temperature in degC, flattened component order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState(pub Vec<f64>);

impl ThermalState {
    /// Peak temperature and the flattened index where it occurs (lowest
    /// index on exact ties).
    pub fn peak(&self) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &t) in self.0.iter().enumerate() {
            if t > best.0 {
                best = (t, i);
            }
        }
        best
    }
}

/// The RC network: per-node constants plus the lateral coupling edges.
#[derive(Debug, Clone)]
pub struct RcThermalModel {
    pub t_ambient_c: f64,
    pub dt_s: f64,
    pub cycles_per_step: u64,
    capacitance: Vec<f64>,
    r_vertical: Vec<f64>,
    leak_w: Vec<f64>,
    dynamic_w: Vec<f64>,
    /// CSR-style adjacency: for node i, `adj[adj_off[i]..adj_off[i+1]]`
    /// lists `(neighbor, conductance)` pairs.
    adj_off: Vec<usize>,
    adj: Vec<(u32, f64)>,
}

impl RcThermalModel {
    /// Build the network for a fabric: one node per component, lateral
    /// edges core<->switch and link<->endpoint switches.
    pub fn for_topology(topo: &Topology, k: &ThermalConstants) -> Result<RcThermalModel, Error> {
        let n = topo.component_count();
        let ns = topo.switch_count();
        let mut capacitance = Vec::with_capacity(n);
        let mut r_vertical = Vec::with_capacity(n);
        let mut leak = Vec::with_capacity(n);
        let mut dynamic = Vec::with_capacity(n);
        for flat in 0..n {
            let (rc, pw) = match topo.unflatten(flat).kind {
                ComponentKind::Core => (k.core, k.core_power),
                ComponentKind::Switch => (k.switch, k.switch_power),
                ComponentKind::Link => (k.link, k.link_power),
            };
            capacitance.push(rc.capacitance);
            r_vertical.push(rc.r_vertical);
            leak.push(pw.leak_w);
            dynamic.push(pw.dynamic_w);
        }

        let g_lat = 1.0 / k.r_lateral;
        let mut edges = Vec::with_capacity(ns + 2 * topo.link_count());
        for c in 0..ns {
            let core = topo.flatten(crate::topology::ComponentId::core(c));
            let sw = topo.flatten(crate::topology::ComponentId::switch(c));
            edges.push((core, sw, g_lat));
        }
        for (l, link) in topo.links().iter().enumerate() {
            let node = topo.flatten(crate::topology::ComponentId::link(l));
            let sa = topo.flatten(crate::topology::ComponentId::switch(link.a));
            let sb = topo.flatten(crate::topology::ComponentId::switch(link.b));
            edges.push((node, sa, g_lat));
            edges.push((node, sb, g_lat));
        }

        RcThermalModel::from_parts(
            k.t_ambient_c,
            k.dt_s,
            k.cycles_per_step,
            capacitance,
            r_vertical,
            leak,
            dynamic,
            &edges,
        )
    }

    /// Assemble an arbitrary RC network (used directly by tests on tiny
    /// hand-built node sets).  `edges` are undirected `(i, j, conductance)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        t_ambient_c: f64,
        dt_s: f64,
        cycles_per_step: u64,
        capacitance: Vec<f64>,
        r_vertical: Vec<f64>,
        leak_w: Vec<f64>,
        dynamic_w: Vec<f64>,
        edges: &[(usize, usize, f64)],
    ) -> Result<RcThermalModel, Error> {
        let n = capacitance.len();
        assert_eq!(r_vertical.len(), n);
        assert_eq!(leak_w.len(), n);
        assert_eq!(dynamic_w.len(), n);

        let mut per_node: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(a, b, g) in edges {
            assert!(a < n && b < n && a != b, "edge ({a},{b}) out of range");
            per_node[a].push((b as u32, g));
            per_node[b].push((a as u32, g));
        }
        let mut adj_off = Vec::with_capacity(n + 1);
        let mut adj = Vec::with_capacity(2 * edges.len());
        adj_off.push(0);
        for list in &per_node {
            adj.extend_from_slice(list);
            adj_off.push(adj.len());
        }

        let model = RcThermalModel {
            t_ambient_c,
            dt_s,
            cycles_per_step,
            capacitance,
            r_vertical,
            leak_w,
            dynamic_w,
            adj_off,
            adj,
        };

        // Explicit Euler stability: dt must undercut the stiffest node.
        let max_dt = (0..n)
            .map(|i| model.capacitance[i] / model.total_conductance(i))
            .fold(f64::INFINITY, f64::min);
        if !(dt_s > 0.0) || dt_s >= max_dt {
            return Err(Error::ThermalUnstable { dt: dt_s, max_dt });
        }
        Ok(model)
    }

    pub fn node_count(&self) -> usize {
        self.capacitance.len()
    }

    fn total_conductance(&self, i: usize) -> f64 {
        let lateral: f64 = self.adj[self.adj_off[i]..self.adj_off[i + 1]]
            .iter()
            .map(|&(_, g)| g)
            .sum();
        1.0 / self.r_vertical[i] + lateral
    }

    /// Affine utilization -> power map: `p = leak + u * dynamic` per node.
    pub fn power_from_utilization(&self, u: &UtilizationVector) -> PowerProfile {
        assert_eq!(u.len(), self.node_count(), "utilization vector length");
        PowerProfile(
            u.0.iter()
                .zip(self.leak_w.iter().zip(&self.dynamic_w))
                .map(|(&u, (&l, &d))| l + u * d)
                .collect(),
        )
    }

    /// Uniform ambient state.
    pub fn ambient_state(&self) -> ThermalState {
        ThermalState(vec![self.t_ambient_c; self.node_count()])
    }

    /// One explicit Euler step of width `dt_s`.
    pub fn thermal_step(&self, state: &ThermalState, power: &PowerProfile) -> ThermalState {
        let n = self.node_count();
        assert_eq!(state.0.len(), n);
        assert_eq!(power.0.len(), n);
        let t = &state.0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut flow = power.0[i] - (t[i] - self.t_ambient_c) / self.r_vertical[i];
            for &(j, g) in &self.adj[self.adj_off[i]..self.adj_off[i + 1]] {
                flow -= (t[i] - t[j as usize]) * g;
            }
            out.push(t[i] + self.dt_s / self.capacitance[i] * flow);
        }
        ThermalState(out)
    }

    /// Advance `steps` Euler steps under constant power.
    pub fn run_steps(&self, state: &ThermalState, power: &PowerProfile, steps: usize) -> ThermalState {
        let mut s = state.clone();
        for _ in 0..steps {
            s = self.thermal_step(&s, power);
        }
        s
    }

    /// Equilibrium temperatures under constant power: solves the node heat
    /// balance `G x = p` (x = rise above ambient) with a Cholesky
    /// factorization plus one refinement pass; the worst-node residual is
    /// required to be below 1e-9 W.
    pub fn steady_state(&self, power: &PowerProfile) -> Result<ThermalState, Error> {
        let n = self.node_count();
        assert_eq!(power.0.len(), n);
        let mut g = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            g[(i, i)] = self.total_conductance(i);
            for &(j, cond) in &self.adj[self.adj_off[i]..self.adj_off[i + 1]] {
                g[(i, j as usize)] -= cond;
            }
        }
        let p = nalgebra::DVector::from_column_slice(&power.0);
        let chol = g.clone().cholesky().ok_or(Error::SteadySolve)?;
        let mut x = chol.solve(&p);
        // One iterative refinement pass keeps the residual near machine
        // precision even for stiff conductance spreads.
        let r = &p - &g * &x;
        x += chol.solve(&r);
        let residual = (&p - &g * &x).amax();
        if residual > 1e-9 {
            return Err(Error::SteadySolve);
        }
        Ok(ThermalState(x.iter().map(|&v| self.t_ambient_c + v).collect()))
    }

    /// Warm start for experiments: scales the uniform full-utilization
    /// steady-state temperature rise so the hottest node lands exactly on
    /// `target_peak_c`.  The result is itself a steady state (of the
    /// correspondingly scaled power), so a run that reproduces the same
    /// uniform load holds its temperature.  `target == ambient` gives the
    /// all-ambient state.
    pub fn warmup(&self, target_peak_c: f64) -> Result<ThermalState, Error> {
        if target_peak_c < self.t_ambient_c {
            return Err(Error::config(
                "experiment.warmup_peak_c",
                target_peak_c,
                format!(">= ambient ({})", self.t_ambient_c).as_str(),
            ));
        }
        let ones = UtilizationVector(vec![1.0; self.node_count()]);
        let full = self.steady_state(&self.power_from_utilization(&ones))?;
        let max_rise = full
            .0
            .iter()
            .map(|t| t - self.t_ambient_c)
            .fold(f64::NEG_INFINITY, f64::max);
        let scale = (target_peak_c - self.t_ambient_c) / max_rise;
        Ok(ThermalState(
            full.0
                .iter()
                .map(|t| self.t_ambient_c + scale * (t - self.t_ambient_c))
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Topology;
    use rand::Rng;

    fn single_node(p_leak: f64) -> RcThermalModel {
        RcThermalModel::from_parts(
            45.0,
            1.0e-5,
            25_000,
            vec![1.0e-4],
            vec![8.0],
            vec![p_leak],
            vec![1.2],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn power_map_is_affine_per_class() {
        let topo = Topology::default_8x8();
        let model = RcThermalModel::for_topology(&topo, &ThermalConstants::default()).unwrap();
        let n = topo.component_count();
        let half = model.power_from_utilization(&UtilizationVector::uniform(n, 0.5).unwrap());
        // Core node 0 with defaults: 0.3 + 0.5 * 1.2 = 0.9 W.
        assert!((half.0[0] - 0.9).abs() < 1e-12, "core at u=0.5 gives {}", half.0[0]);
        let idle = model.power_from_utilization(&UtilizationVector::zeros(n));
        assert!((idle.0[0] - 0.3).abs() < 1e-12);
        assert!((idle.0[64] - 0.15).abs() < 1e-12, "switch leakage");
        assert!((idle.0[128] - 0.05).abs() < 1e-12, "link leakage");
        let flat = model.power_from_utilization(&UtilizationVector::uniform(n, 1.0).unwrap());
        assert!((flat.0[0] - 1.5).abs() < 1e-12);
        assert!((flat.0[64] - 2.15).abs() < 1e-12, "switch at full load");
        assert!((flat.0[128] - 1.25).abs() < 1e-12, "link at full load");
    }

    #[test]
    fn utilization_out_of_range_is_rejected() {
        assert!(UtilizationVector::new(vec![0.5, 1.2]).is_err());
        assert!(UtilizationVector::new(vec![-0.1]).is_err());
    }

    #[test]
    fn isolated_node_matches_closed_form_rc_response() {
        let model = single_node(0.0);
        let p = PowerProfile(vec![1.0]);
        // Closed form: t(k) = amb + p*r_v * (1 - (1 - dt/(r_v c))^k).
        let tau_steps = (8.0 * 1.0e-4 / 1.0e-5) as usize; // 80 steps
        let state = model.run_steps(&model.ambient_state(), &p, 5 * tau_steps);
        let target = 45.0 + 8.0;
        assert!(
            (state.0[0] - target).abs() / (target - 45.0) < 0.01,
            "after 5 tau the node should sit within 1% of {target}, got {}",
            state.0[0]
        );
        let decay = 1.0f64 - 1.0e-5 / (8.0 * 1.0e-4);
        let exact: f64 = 45.0 + 8.0 * (1.0 - decay.powi(5 * tau_steps as i32));
        assert!((state.0[0] - exact).abs() < 1e-9, "Euler recurrence must match its closed form");
        let steady = model.steady_state(&p).unwrap();
        assert!((steady.0[0] - target).abs() < 1e-9);
    }

    #[test]
    fn zero_power_decays_to_ambient_and_respects_envelope() {
        let model = RcThermalModel::from_parts(
            45.0,
            1.0e-5,
            25_000,
            vec![1.0e-4, 3.3333e-5],
            vec![8.0, 20.0],
            vec![0.0; 2],
            vec![0.0; 2],
            &[(0, 1, 1.0 / 30.0)],
        )
        .unwrap();
        let p = PowerProfile(vec![0.0, 0.0]);
        let mut s = ThermalState(vec![90.0, 50.0]);
        let (hi, lo) = (90.0, 45.0);
        for _ in 0..2000 {
            s = model.thermal_step(&s, &p);
            for &t in &s.0 {
                assert!(t <= hi + 1e-9 && t >= lo - 1e-9, "maximum principle violated: {t}");
            }
        }
        let steady = model.steady_state(&p).unwrap();
        for &t in &steady.0 {
            assert!((t - 45.0).abs() < 1e-9, "zero power settles at ambient, got {t}");
        }
    }

    #[test]
    fn symmetric_pair_heats_identically() {
        let model = RcThermalModel::from_parts(
            45.0,
            1.0e-5,
            25_000,
            vec![1e-4, 1e-4],
            vec![10.0, 10.0],
            vec![0.0; 2],
            vec![0.0; 2],
            &[(0, 1, 0.05)],
        )
        .unwrap();
        let p = PowerProfile(vec![0.7, 0.7]);
        let s = model.run_steps(&model.ambient_state(), &p, 500);
        assert!((s.0[0] - s.0[1]).abs() < 1e-12);
        let steady = model.steady_state(&p).unwrap();
        assert!((steady.0[0] - steady.0[1]).abs() < 1e-12);
        assert!((steady.0[0] - (45.0 + 7.0)).abs() < 1e-9, "coupling carries no net heat");
    }

    #[test]
    fn steady_state_is_linear_in_power() {
        // Superposition on a 3-node chain: rise(p1 + p2) = rise(p1) + rise(p2).
        let model = RcThermalModel::from_parts(
            45.0,
            1.0e-6,
            25_000,
            vec![1e-4, 5e-5, 2e-5],
            vec![8.0, 20.0, 40.0],
            vec![0.0; 3],
            vec![0.0; 3],
            &[(0, 1, 1.0 / 30.0), (1, 2, 1.0 / 30.0)],
        )
        .unwrap();
        let p1 = PowerProfile(vec![1.0, 0.0, 0.2]);
        let p2 = PowerProfile(vec![0.1, 0.8, 0.0]);
        let sum = PowerProfile(vec![1.1, 0.8, 0.2]);
        let s1 = model.steady_state(&p1).unwrap();
        let s2 = model.steady_state(&p2).unwrap();
        let s12 = model.steady_state(&sum).unwrap();
        for i in 0..3 {
            let lhs = s12.0[i] - 45.0;
            let rhs = (s1.0[i] - 45.0) + (s2.0[i] - 45.0);
            assert!((lhs - rhs).abs() < 1e-9, "superposition at node {i}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn steady_state_is_monotone_in_power() {
        let mut rng = crate::seed::subsystem_rng(11, "thermal-monotone-test");
        for _ in 0..20 {
            let n = 6;
            let mut edges = Vec::new();
            for i in 0..n - 1 {
                edges.push((i, i + 1, 1.0 / 30.0));
                if rng.gen_bool(0.5) && i + 2 < n {
                    edges.push((i, i + 2, 1.0 / 50.0));
                }
            }
            let model = RcThermalModel::from_parts(
                45.0,
                1.0e-6,
                25_000,
                vec![1e-4; n],
                (0..n).map(|i| 8.0 + i as f64).collect(),
                vec![0.0; n],
                vec![0.0; n],
                &edges,
            )
            .unwrap();
            let p_lo: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let p_hi: Vec<f64> = p_lo.iter().map(|&p| p + rng.gen_range(0.0..0.5)).collect();
            let lo = model.steady_state(&PowerProfile(p_lo)).unwrap();
            let hi = model.steady_state(&PowerProfile(p_hi)).unwrap();
            for i in 0..n {
                assert!(
                    lo.0[i] <= hi.0[i] + 1e-9,
                    "raising power must not cool node {i}: {} vs {}",
                    lo.0[i],
                    hi.0[i]
                );
            }
        }
    }

    #[test]
    fn steady_state_conserves_heat() {
        let topo = Topology::default_8x8();
        let model = RcThermalModel::for_topology(&topo, &ThermalConstants::default()).unwrap();
        let u = UtilizationVector::uniform(topo.component_count(), 0.7).unwrap();
        let p = model.power_from_utilization(&u);
        let s = model.steady_state(&p).unwrap();
        let injected: f64 = p.0.iter().sum();
        let drained: f64 = s
            .0
            .iter()
            .zip(&model.r_vertical)
            .map(|(&t, &rv)| (t - model.t_ambient_c) / rv)
            .sum();
        assert!(
            ((injected - drained) / injected).abs() < 1e-6,
            "ambient drain {drained} must match injected power {injected}"
        );
    }

    #[test]
    fn default_fabric_steady_state_matches_long_euler_run() {
        let topo = Topology::default_8x8();
        let model = RcThermalModel::for_topology(&topo, &ThermalConstants::default()).unwrap();
        let u = UtilizationVector::uniform(topo.component_count(), 0.6).unwrap();
        let p = model.power_from_utilization(&u);
        let direct = model.steady_state(&p).unwrap();
        // Independent oracle: iterate the Euler recurrence until movement
        // stalls, then compare. 8000 steps covers the slowest fabric mode
        // many times over.
        let iterated = model.run_steps(&model.ambient_state(), &p, 8000);
        for i in 0..direct.0.len() {
            assert!(
                (direct.0[i] - iterated.0[i]).abs() < 0.01,
                "node {i}: solver {} vs iterated {}",
                direct.0[i],
                iterated.0[i]
            );
        }
    }

    #[test]
    fn warmup_hits_requested_peak() {
        let topo = Topology::default_8x8();
        let model = RcThermalModel::for_topology(&topo, &ThermalConstants::default()).unwrap();
        for target in [50.0, 60.0, 68.0] {
            let state = model.warmup(target).unwrap();
            let (peak, _) = state.peak();
            assert!(
                (peak - target).abs() < 0.1,
                "warmup peak {peak} should land on {target}"
            );
        }
        let ambient = model.warmup(45.0).unwrap();
        for &t in &ambient.0 {
            assert!((t - 45.0).abs() < 1e-9);
        }
        assert!(model.warmup(44.0).is_err(), "targets below ambient are invalid");
    }

    #[test]
    fn warmup_state_is_self_consistent_under_its_own_load() {
        // The warm state equals the steady state of the scaled uniform
        // power, so stepping with that power must not move it.
        let topo = Topology::default_8x8();
        let model = RcThermalModel::for_topology(&topo, &ThermalConstants::default()).unwrap();
        let state = model.warmup(60.0).unwrap();
        let n = topo.component_count();
        let ones = UtilizationVector::uniform(n, 1.0).unwrap();
        let full = model.steady_state(&model.power_from_utilization(&ones)).unwrap();
        let max_rise = full.0.iter().map(|t| t - 45.0).fold(f64::NEG_INFINITY, f64::max);
        let scale = 15.0 / max_rise;
        let scaled_power = PowerProfile(
            model
                .power_from_utilization(&ones)
                .0
                .iter()
                .zip(full.0.iter())
                .map(|(&p, &t)| {
                    // Scale only the rise-producing part of the power so the
                    // scaled state stays an equilibrium.
                    let _ = t;
                    p * scale
                })
                .collect(),
        );
        let stepped = model.thermal_step(&state, &scaled_power);
        for i in 0..n {
            assert!(
                (stepped.0[i] - state.0[i]).abs() < 1e-9,
                "warm state must be stationary at node {i}"
            );
        }
    }

    #[test]
    fn unstable_dt_is_rejected_at_build() {
        let err = RcThermalModel::from_parts(
            45.0,
            1.0, // far beyond the stability bound
            25_000,
            vec![1.0e-4],
            vec![8.0],
            vec![0.0],
            vec![0.0],
            &[],
        );
        match err {
            Err(Error::ThermalUnstable { dt, max_dt }) => {
                assert!(dt >= max_dt, "reported bound must explain the rejection");
            }
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn default_constants_respect_stability_with_margin() {
        let topo = Topology::default_8x8();
        let k = ThermalConstants::default();
        let model = RcThermalModel::for_topology(&topo, &k).unwrap();
        let max_dt = (0..model.node_count())
            .map(|i| model.capacitance[i] / model.total_conductance(i))
            .fold(f64::INFINITY, f64::min);
        assert!(
            k.dt_s * 4.0 < max_dt,
            "default dt {} should sit at least 4x under the bound {max_dt}",
            k.dt_s
        );
    }
}
