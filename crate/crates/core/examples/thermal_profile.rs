//! Calibration probe for the lumped-RC fabric model.
//!
//! Prints steady-state temperatures for a handful of utilization shapes so the
//! default constants can be sanity-checked: a co-located hot region must clear
//! the management threshold with margin, while scattered placements heat more
//! slowly and settle a couple of degrees cooler — the headroom that task
//! reallocation (and the thermal capacitance of freshly chosen tiles) trades
//! on.  The utilization magnitudes below mirror what the cycle-accurate
//! fabric actually produces under the hotspot workload: switch occupancy
//! stays low in absolute terms (wormhole switching holds few flits per
//! router), link duty concentrates inside the hot region, and the light
//! background keeps the rest of the die near its baseline.

use thermnoc_core::thermal::RcThermalModel;
use thermnoc_core::{Topology, UtilizationVector};

/// Background activity for everything not named by the scenario.
fn background(topo: &Topology) -> Vec<f64> {
    let mut u = vec![0.0; topo.component_count()];
    for i in 0..topo.core_count() {
        u[topo.flatten(thermnoc_core::ComponentId::core(i))] = 0.25;
    }
    for s in 0..topo.switch_count() {
        u[topo.flatten(thermnoc_core::ComponentId::switch(s))] = 0.04;
    }
    for l in 0..topo.link_count() {
        u[topo.flatten(thermnoc_core::ComponentId::link(l))] = 0.15;
    }
    u
}

/// Mark one tile hot. `sw_u`/`ln_u` let the caller model how much of the
/// surrounding switch/link capacity the tile's traffic occupies: co-located
/// tasks pile mutual flows onto the same few regional links, a lone task
/// only loads its own inject/eject paths.
fn heat_tile(topo: &Topology, u: &mut [f64], core: usize, sw_u: f64, ln_u: f64) {
    u[topo.flatten(thermnoc_core::ComponentId::core(core))] = 0.95;
    let sw = core; // core i sits on switch i
    let idx = topo.flatten(thermnoc_core::ComponentId::switch(sw));
    u[idx] = u[idx].max(sw_u);
    for (l, link) in topo.links().iter().enumerate() {
        if link.a == sw || link.b == sw {
            let idx = topo.flatten(thermnoc_core::ComponentId::link(l));
            u[idx] = u[idx].max(ln_u);
        }
    }
}

fn report(label: &str, topo: &Topology, model: &RcThermalModel, u: &[f64]) {
    let uv = UtilizationVector::new(u.to_vec()).expect("probe utilization in range");
    let state = model.steady_state(&model.power_from_utilization(&uv)).expect("steady solve");
    let (peak, at) = state.peak();
    let id = topo.unflatten(at);
    let mean = state.0.iter().sum::<f64>() / state.0.len() as f64;
    let class_max = |kind: thermnoc_core::ComponentKind| {
        state
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| topo.unflatten(*i).kind == kind)
            .map(|(_, t)| *t)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    println!(
        "{label:<28} peak {peak:6.2} C at {:?} {:<2} | mean {mean:5.2} | core {:5.2} switch {:5.2} link {:5.2}",
        id.kind,
        id.index,
        class_max(thermnoc_core::ComponentKind::Core),
        class_max(thermnoc_core::ComponentKind::Switch),
        class_max(thermnoc_core::ComponentKind::Link),
    );
}

fn main() {
    let topo = Topology::default_8x8();
    let model = RcThermalModel::for_topology(&topo, &Default::default()).expect("default constants");

    let mut idle = vec![0.0; topo.component_count()];
    report("uniform idle (leakage)", &topo, &model, &idle);
    for v in idle.iter_mut() {
        *v = 0.6;
    }
    report("uniform 0.6", &topo, &model, &idle);
    for v in idle.iter_mut() {
        *v = 1.0;
    }
    report("uniform 1.0", &topo, &model, &idle);

    // Co-located hot 2x3 block at the die center: mutual traffic rides the
    // handful of links inside the region, and the pooled interconnect feeds
    // the heat back into the block's cores.
    let block = [26usize, 27, 28, 34, 35, 36];
    let mut u = background(&topo);
    for &c in &block {
        heat_tile(&topo, &mut u, c, 0.12, 0.40);
    }
    report("hot 2x3 block (center)", &topo, &model, &u);

    // Same six tasks spread over well-separated interior tiles: their mutual
    // traffic diffuses over many disjoint paths (and the wireless overlay),
    // so no single link or switch concentrates it.
    let mut u = background(&topo);
    for &c in &[9usize, 12, 25, 30, 49, 54] {
        heat_tile(&topo, &mut u, c, 0.08, 0.25);
    }
    report("hot tasks spread out", &topo, &model, &u);

    // One hot task on an interior tile (reallocation may land here).
    let mut u = background(&topo);
    heat_tile(&topo, &mut u, 27, 0.08, 0.25);
    report("lone interior tile", &topo, &model, &u);

    // Time for the block scenario to cross 68 C starting from a 60 C warm
    // state, in thermal steps (one step = cycles_per_step cycles).
    let warm = model.warmup(60.0).expect("warmup");
    let mut u = background(&topo);
    for &c in &block {
        heat_tile(&topo, &mut u, c, 0.12, 0.40);
    }
    let uv = UtilizationVector::new(u).expect("probe utilization in range");
    let power = model.power_from_utilization(&uv);
    let mut state = warm;
    let mut crossed = None;
    for step in 1..=400 {
        state = model.run_steps(&state, &power, 1);
        if state.peak().0 >= 68.0 {
            crossed = Some(step);
            break;
        }
    }
    match crossed {
        Some(step) => println!("block crosses 68 C after {step} steps from 60 C warm start"),
        None => println!(
            "block never crosses 68 C within 400 steps (peak {:.2})",
            state.peak().0
        ),
    }
}
