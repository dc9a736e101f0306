//! Calibration sweep: record real per-window NoC utilizations for the
//! hot-block and spread task placements, then evaluate candidate thermal
//! constants against the recorded traces, with exact per-class steady-state
//! decompositions at the peak node.  Temporary diagnostic.

use thermnoc_core::noc::traffic::TrafficConfig;
use thermnoc_core::noc::{NocConfig, NocSim};
use thermnoc_core::thermal::{
    ClassPower, ClassRc, PowerProfile, RcThermalModel, ThermalConstants, UtilizationVector,
};
use thermnoc_core::topology::Topology;

const SPREAD: [usize; 6] = [9, 12, 25, 30, 49, 54]; // well-separated interior cores
const BLOCK: [usize; 6] = [26, 27, 28, 34, 35, 36];

fn record(spread: bool, windows: usize) -> Vec<UtilizationVector> {
    let topo = Topology::default_8x8();
    let cfg =
        NocConfig { traffic: TrafficConfig::hotspot_default(), seed: 11, ..NocConfig::default() };
    let mut sim = NocSim::new(topo, cfg).unwrap();
    if spread {
        for (&t, &c) in BLOCK.iter().zip(SPREAD.iter()) {
            let displaced = sim.core_task(c);
            let old_core = sim.task_core(t);
            sim.set_task_core(t, c);
            sim.set_task_core(displaced, old_core);
        }
    }
    let mut out = Vec::with_capacity(windows);
    for _ in 0..windows {
        sim.run(25_000);
        out.push(sim.take_window().utilization);
    }
    out
}

fn tail_mean(trace: &[UtilizationVector]) -> UtilizationVector {
    let n = trace[0].0.len();
    let tail = &trace[trace.len().saturating_sub(20)..];
    let mut m = vec![0.0; n];
    for u in tail {
        for (a, b) in m.iter_mut().zip(&u.0) {
            *a += b / tail.len() as f64;
        }
    }
    UtilizationVector::new(m).unwrap()
}

fn regional_stats(name: &str, u: &UtilizationVector, cores: &[usize]) {
    let topo = Topology::default_8x8();
    let sw_mean: f64 = cores.iter().map(|&c| u.0[64 + c]).sum::<f64>() / cores.len() as f64;
    // links incident to the hot switches
    let mut ls = Vec::new();
    for &c in cores {
        for &(_, l) in topo.wired_neighbors(c) {
            if !ls.contains(&l) {
                ls.push(l);
            }
        }
    }
    let ln_mean: f64 = ls.iter().map(|&l| u.0[128 + l]).sum::<f64>() / ls.len() as f64;
    let glob_sw: f64 = u.0[64..128].iter().sum::<f64>() / 64.0;
    let glob_ln: f64 = u.0[128..240].iter().sum::<f64>() / 112.0;
    println!(
        "{name}: hot-sw {sw_mean:.3} hot-ln({}) {ln_mean:.3} | glob sw {glob_sw:.3} ln {glob_ln:.3}",
        ls.len()
    );
}

struct Eval {
    block_ss: f64,
    node: usize,
    parts: [f64; 3], // core/switch/link contribution at the peak node
    spread_ss: f64,
    snode: usize,
    idle: f64,
    uni: f64,
    cross: Option<usize>,
    at2m: f64,
}

fn eval(k: &ThermalConstants, block: &[UtilizationVector], spread: &[UtilizationVector]) -> Eval {
    let topo = Topology::default_8x8();
    let model = RcThermalModel::for_topology(&topo, k).unwrap();
    let mut state = model.warmup(60.0).unwrap();
    let mut cross = None;
    let mut at2m = 0.0;
    for (i, u) in block.iter().enumerate() {
        let p = model.power_from_utilization(u);
        state = model.run_steps(&state, &p, 1);
        let (pk, _) = state.peak();
        at2m = pk;
        if cross.is_none() && pk >= 68.0 {
            cross = Some(i + 1);
        }
    }
    let pb = model.power_from_utilization(&tail_mean(block));
    let (block_ss, node) = model.steady_state(&pb).unwrap().peak();
    // exact linear decomposition: steady(P) - ambient splits by power class
    let mut parts = [0.0; 3];
    for (ci, range) in [(0, 0..64), (1, 64..128), (2, 128..240)] {
        let mut pc = vec![0.0; 240];
        pc[range].copy_from_slice(&pb.0[if ci == 0 {
            0..64
        } else if ci == 1 {
            64..128
        } else {
            128..240
        }]);
        let st = model.steady_state(&PowerProfile(pc)).unwrap();
        parts[ci] = st.0[node] - k.t_ambient_c;
    }
    let ps = model.power_from_utilization(&tail_mean(spread));
    let (spread_ss, snode) = model.steady_state(&ps).unwrap().peak();
    let zeros = UtilizationVector::uniform(topo.component_count(), 0.0).unwrap();
    let idle = model.steady_state(&model.power_from_utilization(&zeros)).unwrap().peak().0;
    let ones = UtilizationVector::uniform(topo.component_count(), 1.0).unwrap();
    let uni = model.steady_state(&model.power_from_utilization(&ones)).unwrap().peak().0;
    Eval { block_ss, node, parts, spread_ss, snode, idle, uni, cross, at2m }
}

fn class_of(n: usize) -> &'static str {
    if n < 64 {
        "C"
    } else if n < 128 {
        "S"
    } else {
        "L"
    }
}

fn main() {
    println!("recording block trace...");
    let block = record(false, 80);
    println!("recording spread trace...");
    let spread = record(true, 40);
    regional_stats("block ", &tail_mean(&block), &BLOCK);
    regional_stats("spread", &tail_mean(&spread), &SPREAD);

    let base = ThermalConstants::default();
    let mut run = |name: &str, k: &ThermalConstants| {
        let e = eval(k, &block, &spread);
        println!(
            "{name:32} blk {:6.2}({}{}) [C{:.1} S{:.1} L{:.1}] spr {:5.2}({}{}) idle {:.1} uni {:5.1} cross {:?} @2M {:.2}",
            e.block_ss,
            class_of(e.node),
            e.node,
            e.parts[0],
            e.parts[1],
            e.parts[2],
            e.spread_ss,
            class_of(e.snode),
            e.snode,
            e.idle,
            e.uni,
            e.cross,
            e.at2m
        );
    };
    run("current", &base);

    // finalists: pool + shrunk capacitances for transient speed (steady
    // state is C-independent); envelope = dataset-realistic max draw
    for (rvc, rvp, rl, swd, lnd, cc, cs, cl) in
        [(24.0, 65.0, 8.0, 2.0, 1.2, 2.2e-5, 2.0e-5, 1.2e-5)]
    {
        let mut k = base;
        k.core = ClassRc { capacitance: cc, r_vertical: rvc };
        k.switch = ClassRc { capacitance: cs, r_vertical: rvp };
        k.link = ClassRc { capacitance: cl, r_vertical: rvp };
        k.r_lateral = rl;
        k.switch_power = ClassPower { leak_w: 0.15, dynamic_w: swd };
        k.link_power = ClassPower { leak_w: 0.05, dynamic_w: lnd };
        let m_sw = cs / (1.0 / rvp + 5.0 / rl) / k.dt_s;
        let m_ln = cl / (1.0 / rvp + 2.0 / rl) / k.dt_s;
        // dataset envelope: cores to 1.0, switches to 0.5, links to 0.9
        let topo = Topology::default_8x8();
        let mut env = vec![1.0; 64];
        env.extend(vec![0.5; 64]);
        env.extend(vec![0.9; 112]);
        let model = RcThermalModel::for_topology(&topo, &k).unwrap();
        let envp = model.power_from_utilization(&UtilizationVector::new(env).unwrap());
        let env_pk = model.steady_state(&envp).unwrap().peak().0;
        let name =
            format!("rvc{rvc} rvp{rvp} sw{swd} ln{lnd} m{m_sw:.1}/{m_ln:.1} env{env_pk:.0}");
        run(&name, &k);
    }
}
