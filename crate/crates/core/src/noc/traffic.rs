//! Traffic generation: per-task packet arrival processes, destination
//! patterns, and trace replay.
//!
//! Traffic is defined over *tasks*, not cores: each task carries its own
//! seeded RNG stream and a current core binding, so reallocating a task
//! moves its traffic (and compute intensity) without perturbing any other
//! task's schedule.  Arrivals are geometric inter-gap draws, equivalent to
//! a per-cycle Bernoulli trial at the task's rate but sampled in O(packets).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::seed::subsystem_rng;

/// One replayed packet injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub cycle: u64,
    /// Source task (bound to its initial core unless reallocated).
    pub src_task: usize,
    pub dst_task: usize,
    pub packet_flits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrafficPattern {
    /// Every packet picks a uniform random destination task.
    UniformRandom,
    /// `hot_tasks` generate at `rate_boost` × the base rate and address
    /// other hot tasks with probability `mutual_prob` (else uniform).
    Hotspot { hot_tasks: Vec<usize>, mutual_prob: f64, rate_boost: f64 },
    /// Task (r, c) on a √n × √n grid addresses task (c, r).
    Transpose,
    /// Replay of an explicit schedule; rates and patterns are ignored.
    Trace(Vec<TraceRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub pattern: TrafficPattern,
    /// Base packet arrival probability per cycle per task.
    pub injection_rate: f64,
    pub packet_flits: usize,
    /// Compute-intensity (busy fraction) of hot tasks and of everyone else;
    /// these feed the core utilization entries directly.
    pub hot_intensity: f64,
    pub base_intensity: f64,
}

impl Default for TrafficConfig {
    fn default() -> TrafficConfig {
        TrafficConfig {
            pattern: TrafficPattern::UniformRandom,
            injection_rate: 0.001,
            packet_flits: 64,
            hot_intensity: 0.95,
            base_intensity: 0.25,
        }
    }
}

impl TrafficConfig {
    /// The six-task hotspot workload the thermal experiments use: hot tasks
    /// sit (initially) on a 2×3 block of center tiles, talk mostly to each
    /// other at a boosted rate, and run near-saturated compute intensity.
    /// Background injection is kept light so the hot region's network load
    /// stands out against the fabric baseline.
    pub fn hotspot_default() -> TrafficConfig {
        TrafficConfig {
            pattern: TrafficPattern::Hotspot {
                hot_tasks: vec![26, 27, 28, 34, 35, 36],
                mutual_prob: 0.8,
                rate_boost: 16.0,
            },
            injection_rate: 0.001,
            ..TrafficConfig::default()
        }
    }
}

/// A packet waiting in a task's source queue.
#[derive(Debug, Clone, Copy)]
pub struct PendingPacket {
    pub dst_core: usize,
    pub flits: usize,
}

struct TaskState {
    rng: ChaCha8Rng,
    core: usize,
    next_arrival: u64,
    paused_until: u64,
    hot: bool,
}

/// Source-side state for every task: arrival schedules, destination draws,
/// task→core binding, and migration pauses.
pub struct TrafficSource {
    cfg: TrafficConfig,
    tasks: Vec<TaskState>,
    /// Which core currently hosts each task (index = task id).
    task_core: Vec<usize>,
    /// Inverse map; consistent again once a swap completes both sides.
    core_task: Vec<usize>,
    trace_pos: usize,
    pub skipped_packets: u64,
}

impl TrafficSource {
    pub fn new(cfg: TrafficConfig, n_tasks: usize, seed: u64) -> Result<TrafficSource, Error> {
        if cfg.packet_flits == 0 {
            return Err(Error::config("traffic.packet_flits", cfg.packet_flits, ">= 1"));
        }
        if !(0.0..=1.0).contains(&cfg.injection_rate) {
            return Err(Error::config("traffic.injection_rate", cfg.injection_rate, "in [0, 1]"));
        }
        let hot: Vec<usize> = match &cfg.pattern {
            TrafficPattern::Hotspot { hot_tasks, mutual_prob, rate_boost } => {
                if hot_tasks.iter().any(|&t| t >= n_tasks) {
                    return Err(Error::config("traffic.hot_tasks", "task id", "< task count"));
                }
                if !(0.0..=1.0).contains(mutual_prob) {
                    return Err(Error::config("traffic.mutual_prob", mutual_prob, "in [0, 1]"));
                }
                if *rate_boost <= 0.0 {
                    return Err(Error::config("traffic.rate_boost", rate_boost, "> 0"));
                }
                hot_tasks.clone()
            }
            TrafficPattern::Trace(rows) => {
                validate_trace(rows, n_tasks)?;
                Vec::new()
            }
            _ => Vec::new(),
        };
        let mut tasks = Vec::with_capacity(n_tasks);
        for t in 0..n_tasks {
            let mut state = TaskState {
                rng: subsystem_rng(seed, &format!("traffic-task-{t}")),
                core: t,
                next_arrival: 0,
                paused_until: 0,
                hot: hot.contains(&t),
            };
            let rate = effective_rate(&cfg, state.hot);
            state.next_arrival = next_gap(&mut state.rng, rate);
            tasks.push(state);
        }
        Ok(TrafficSource {
            cfg,
            task_core: (0..n_tasks).collect(),
            core_task: (0..n_tasks).collect(),
            tasks,
            trace_pos: 0,
            skipped_packets: 0,
        })
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn task_core(&self, task: usize) -> usize {
        self.task_core[task]
    }

    pub fn core_task(&self, core: usize) -> usize {
        self.core_task[core]
    }

    /// Rebind a task to a core (reallocation).  The caller keeps the map
    /// bijective by swapping; this records one side of the swap.
    pub fn set_task_core(&mut self, task: usize, core: usize) {
        self.task_core[task] = core;
        self.core_task[core] = task;
        self.tasks[task].core = core;
    }

    /// Pause a task (migration): no arrivals and zero intensity until
    /// `until_cycle`.
    pub fn pause_task(&mut self, task: usize, until_cycle: u64) {
        self.tasks[task].paused_until = self.tasks[task].paused_until.max(until_cycle);
    }

    /// Compute intensity of the task currently on `core` at `cycle` — the
    /// core's utilization entry.
    pub fn core_intensity(&self, core: usize, cycle: u64) -> f64 {
        let task = self.core_task(core);
        let t = &self.tasks[task];
        if cycle < t.paused_until {
            0.0
        } else if t.hot {
            self.cfg.hot_intensity
        } else {
            self.cfg.base_intensity
        }
    }

    /// Draw this cycle's packet arrivals: `(src_core, packet)` pairs in
    /// task-id order.
    pub fn generate(&mut self, cycle: u64, out: &mut Vec<(usize, PendingPacket)>) {
        let n = self.tasks.len();
        if let TrafficPattern::Trace(rows) = &self.cfg.pattern {
            while self.trace_pos < rows.len() && rows[self.trace_pos].cycle <= cycle {
                let row = rows[self.trace_pos];
                self.trace_pos += 1;
                let src = self.task_core[row.src_task];
                let dst = self.task_core[row.dst_task];
                if src != dst {
                    out.push((src, PendingPacket { dst_core: dst, flits: row.packet_flits }));
                }
            }
            return;
        }
        for t in 0..n {
            if self.tasks[t].paused_until > cycle {
                continue;
            }
            if self.tasks[t].next_arrival > cycle {
                continue;
            }
            let dst_task = self.draw_destination(t, n);
            let rate = effective_rate(&self.cfg, self.tasks[t].hot);
            let task = &mut self.tasks[t];
            task.next_arrival = cycle + 1 + next_gap(&mut task.rng, rate);
            let src = task.core;
            let dst = self.task_core[dst_task];
            debug_assert_ne!(src, dst, "destination draws exclude the source task");
            out.push((src, PendingPacket { dst_core: dst, flits: self.cfg.packet_flits }));
        }
    }

    fn draw_destination(&mut self, t: usize, n: usize) -> usize {
        match &self.cfg.pattern {
            TrafficPattern::UniformRandom => draw_other(&mut self.tasks[t].rng, t, n),
            TrafficPattern::Hotspot { hot_tasks, mutual_prob, .. } => {
                if self.tasks[t].hot && hot_tasks.len() > 1 {
                    // borrow dance: the rng lives inside self.tasks
                    let peers: Vec<usize> =
                        hot_tasks.iter().copied().filter(|&h| h != t).collect();
                    let rng = &mut self.tasks[t].rng;
                    if rng.gen::<f64>() < *mutual_prob {
                        peers[rng.gen_range(0..peers.len())]
                    } else {
                        draw_other(rng, t, n)
                    }
                } else {
                    draw_other(&mut self.tasks[t].rng, t, n)
                }
            }
            TrafficPattern::Transpose => {
                let side = (n as f64).sqrt() as usize;
                debug_assert_eq!(side * side, n, "transpose needs a square task grid");
                let (r, c) = (t / side, t % side);
                let dst = c * side + r;
                if dst == t {
                    // diagonal tasks fall back to uniform
                    draw_other(&mut self.tasks[t].rng, t, n)
                } else {
                    dst
                }
            }
            TrafficPattern::Trace(_) => unreachable!("trace handled in generate"),
        }
    }
}

fn effective_rate(cfg: &TrafficConfig, hot: bool) -> f64 {
    match (&cfg.pattern, hot) {
        (TrafficPattern::Hotspot { rate_boost, .. }, true) => {
            (cfg.injection_rate * rate_boost).min(1.0)
        }
        _ => cfg.injection_rate,
    }
}

/// Geometric gap: cycles to skip before the next arrival under a per-cycle
/// Bernoulli(p) process.  p = 0 pushes the arrival past any simulation end.
fn next_gap(rng: &mut ChaCha8Rng, p: f64) -> u64 {
    if p <= 0.0 {
        return u64::MAX / 2;
    }
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = rng.gen();
    ((1.0 - u).ln() / (1.0 - p).ln()).floor() as u64
}

fn draw_other(rng: &mut ChaCha8Rng, me: usize, n: usize) -> usize {
    let d = rng.gen_range(0..n - 1);
    if d >= me {
        d + 1
    } else {
        d
    }
}

fn validate_trace(rows: &[TraceRow], n_tasks: usize) -> Result<(), Error> {
    let mut prev = 0u64;
    for (i, row) in rows.iter().enumerate() {
        let line = i + 1;
        if row.cycle < prev {
            return Err(Error::Trace {
                line,
                detail: format!("cycles must be non-decreasing ({} after {prev})", row.cycle),
            });
        }
        prev = row.cycle;
        if row.src_task >= n_tasks || row.dst_task >= n_tasks {
            return Err(Error::Trace {
                line,
                detail: format!(
                    "task out of range: {} -> {} with {} tasks",
                    row.src_task, row.dst_task, n_tasks
                ),
            });
        }
        if row.src_task == row.dst_task {
            return Err(Error::Trace { line, detail: "source equals destination".into() });
        }
        if row.packet_flits == 0 {
            return Err(Error::Trace { line, detail: "packet_flits must be >= 1".into() });
        }
    }
    Ok(())
}

/// Parse a trace CSV: `cycle,src_core,dst_core,packet_flits` per line;
/// blank lines and `#` comments are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, Error> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Trace {
                line,
                detail: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse = |f: &str, name: &str| -> Result<u64, Error> {
            f.parse::<u64>().map_err(|_| Error::Trace {
                line,
                detail: format!("{name} is not a non-negative integer: {f:?}"),
            })
        };
        rows.push(TraceRow {
            cycle: parse(fields[0], "cycle")?,
            src_task: parse(fields[1], "src_core")? as usize,
            dst_task: parse(fields[2], "dst_core")? as usize,
            packet_flits: parse(fields[3], "packet_flits")? as usize,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect_arrivals(src: &mut TrafficSource, cycles: u64) -> Vec<(u64, usize, PendingPacket)> {
        let mut all = Vec::new();
        let mut buf = Vec::new();
        for c in 0..cycles {
            buf.clear();
            src.generate(c, &mut buf);
            for &(core, p) in buf.iter() {
                all.push((c, core, p));
            }
        }
        all
    }

    #[test]
    fn arrivals_are_deterministic_and_seed_sensitive() {
        let cfg = TrafficConfig { injection_rate: 0.05, ..TrafficConfig::default() };
        let mut a = TrafficSource::new(cfg.clone(), 16, 7).unwrap();
        let mut b = TrafficSource::new(cfg.clone(), 16, 7).unwrap();
        let mut c = TrafficSource::new(cfg, 16, 8).unwrap();
        let ea: Vec<_> = collect_arrivals(&mut a, 500).iter().map(|x| (x.0, x.1, x.2.dst_core)).collect();
        let eb: Vec<_> = collect_arrivals(&mut b, 500).iter().map(|x| (x.0, x.1, x.2.dst_core)).collect();
        let ec: Vec<_> = collect_arrivals(&mut c, 500).iter().map(|x| (x.0, x.1, x.2.dst_core)).collect();
        assert_eq!(ea, eb, "same seed must generate the same schedule");
        assert_ne!(ea, ec, "different seeds must diverge");
    }

    #[test]
    fn geometric_arrivals_match_the_nominal_rate() {
        let cfg = TrafficConfig { injection_rate: 0.02, ..TrafficConfig::default() };
        let mut src = TrafficSource::new(cfg, 4, 3).unwrap();
        let n = collect_arrivals(&mut src, 100_000).len() as f64;
        let expected = 4.0 * 0.02 * 100_000.0;
        assert!(
            (n - expected).abs() < expected * 0.05,
            "got {n} arrivals, expected about {expected}"
        );
    }

    #[test]
    fn hot_tasks_prefer_each_other_at_the_configured_bias() {
        let cfg = TrafficConfig {
            pattern: TrafficPattern::Hotspot {
                hot_tasks: vec![0, 1, 2],
                mutual_prob: 0.8,
                rate_boost: 4.0,
            },
            injection_rate: 0.02,
            ..TrafficConfig::default()
        };
        let mut src = TrafficSource::new(cfg, 16, 5).unwrap();
        let arrivals = collect_arrivals(&mut src, 50_000);
        let hot_src: Vec<_> = arrivals.iter().filter(|(_, core, _)| *core < 3).collect();
        let to_hot = hot_src.iter().filter(|(_, _, p)| p.dst_core < 3).count() as f64;
        let frac = to_hot / hot_src.len() as f64;
        // mutual draws always land hot; uniform draws land hot 2/15 of the time
        let expected = 0.8 + 0.2 * 2.0 / 15.0;
        assert!((frac - expected).abs() < 0.05, "hot->hot fraction {frac}, expected ~{expected}");
        // boosted rate: hot tasks fire ~4x as often per task
        let cold_src = arrivals.len() - hot_src.len();
        let per_hot = hot_src.len() as f64 / 3.0;
        let per_cold = cold_src as f64 / 13.0;
        assert!((per_hot / per_cold - 4.0).abs() < 0.5, "rate boost ratio {}", per_hot / per_cold);
    }

    #[test]
    fn transpose_addresses_the_mirrored_task() {
        let cfg = TrafficConfig {
            pattern: TrafficPattern::Transpose,
            injection_rate: 0.05,
            ..TrafficConfig::default()
        };
        let mut src = TrafficSource::new(cfg, 16, 2).unwrap();
        for (_, core, p) in collect_arrivals(&mut src, 2_000) {
            let (r, c) = (core / 4, core % 4);
            if r != c {
                assert_eq!(p.dst_core, c * 4 + r, "task ({r},{c}) must address ({c},{r})");
            }
        }
    }

    #[test]
    fn reallocation_moves_the_arrival_stream_with_the_task() {
        let cfg = TrafficConfig { injection_rate: 0.05, ..TrafficConfig::default() };
        let mut src = TrafficSource::new(cfg, 8, 11).unwrap();
        // swap tasks 0 and 5
        src.set_task_core(0, 5);
        src.set_task_core(5, 0);
        let arrivals = collect_arrivals(&mut src, 2_000);
        assert!(!arrivals.is_empty());
        // no arrival may name a source core outside the remapped binding
        for (_, core, _) in &arrivals {
            let task = src.core_task(*core);
            assert_eq!(src.task_core(task), *core);
        }
    }

    #[test]
    fn paused_tasks_stay_silent_and_idle() {
        let cfg = TrafficConfig { injection_rate: 0.5, ..TrafficConfig::default() };
        let mut src = TrafficSource::new(cfg, 2, 1).unwrap();
        src.pause_task(0, 100);
        let arrivals = collect_arrivals(&mut src, 100);
        assert!(
            arrivals.iter().all(|(_, core, _)| *core != 0),
            "paused task must not generate"
        );
        assert_eq!(src.core_intensity(0, 50), 0.0, "paused task is idle");
        assert!(src.core_intensity(0, 100) > 0.0, "intensity returns after the pause");
    }

    #[test]
    fn trace_parsing_validates_shape_and_order() {
        let good = "# demo\n0,1,2,64\n5,0,3,1\n\n9,2,0,64\n";
        let rows = parse_trace(good).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1], TraceRow { cycle: 5, src_task: 0, dst_task: 3, packet_flits: 1 });
        TrafficSource::new(
            TrafficConfig {
                pattern: TrafficPattern::Trace(rows),
                ..TrafficConfig::default()
            },
            4,
            1,
        )
        .unwrap();

        for (text, want) in [
            ("0,1,2", "expected 4"),
            ("0,1,x,64", "not a non-negative integer"),
        ] {
            match parse_trace(text) {
                Err(Error::Trace { line: 1, detail }) => {
                    assert!(detail.contains(want), "detail: {detail}")
                }
                other => panic!("expected trace error, got {other:?}"),
            }
        }
        // semantic validation happens at source construction
        let unsorted = parse_trace("5,1,2,64\n0,1,2,64").unwrap();
        match TrafficSource::new(
            TrafficConfig { pattern: TrafficPattern::Trace(unsorted), ..TrafficConfig::default() },
            4,
            1,
        ) {
            Err(Error::Trace { line: 2, .. }) => {}
            other => panic!("expected order error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn trace_replay_injects_exactly_the_listed_packets() {
        let rows = parse_trace("0,0,1,4\n0,2,3,4\n7,1,0,2\n").unwrap();
        let cfg = TrafficConfig { pattern: TrafficPattern::Trace(rows), ..TrafficConfig::default() };
        let mut src = TrafficSource::new(cfg, 4, 1).unwrap();
        let arrivals = collect_arrivals(&mut src, 20);
        assert_eq!(
            arrivals.iter().map(|(c, s, p)| (*c, *s, p.dst_core, p.flits)).collect::<Vec<_>>(),
            vec![(0, 0, 1, 4), (0, 2, 3, 4), (7, 1, 0, 2)]
        );
    }
}
