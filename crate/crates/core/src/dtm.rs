//! Combined proactive thermal management: a sliding-window policy that picks
//! between task reallocation and temperature-aware rerouting, the
//! rank-pairing reallocation heuristic, and the 32-bit control-message
//! encoding used to ship decisions over the wireless control plane.
//!
//! The policy runs on the scheduler tile (core 0) once per prediction
//! interval, at a simulator-timeline barrier: it asks the temperature
//! predictor for component temperatures one window ahead and acts on the
//! answer.  A core predicted over threshold is handled by moving work
//! (reallocation); fabric-only heat (switches/links) is first double-checked
//! one further window out — if cores stay cool it is handled in the network
//! (rerouting), otherwise reallocation wins.  Exactly one action is emitted
//! per decision instant, and nothing happens between instants, which bounds
//! how fast the two mechanisms can oscillate.

use crate::ann::StatusBits;
use crate::error::Error;
use crate::noc::NocSim;
use crate::thermal::{ThermalState, UtilizationVector};

/// Decision cadence and thresholds.  The window doubles as the prediction
/// interval: decisions are made every `window_cycles` and look exactly one
/// window (and, for rule 2, two windows) ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtmConfig {
    /// Trigger threshold in °C.
    pub t_th_c: f64,
    /// Prediction interval in NoC cycles.
    pub window_cycles: u64,
    /// Cycles a migrating task stays paused before resuming on its new core.
    pub migration_pause_cycles: u64,
}

impl Default for DtmConfig {
    fn default() -> DtmConfig {
        DtmConfig { t_th_c: 68.0, window_cycles: 100_000, migration_pause_cycles: 5_000 }
    }
}

impl DtmConfig {
    /// Window length in thermal steps, for a model advancing
    /// `cycles_per_step` cycles per step.
    pub fn window_steps(&self, cycles_per_step: u64) -> u32 {
        self.window_cycles.div_ceil(cycles_per_step) as u32
    }
}

/// Task-to-core assignment plus the per-task power estimate the
/// reallocation heuristic ranks by.  The assignment is a bijection at all
/// times; migrations are applied as a batch so intermediate states are never
/// observable.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskMap {
    task_core: Vec<usize>,
    core_task: Vec<usize>,
    /// Estimated power per task, watts.
    pub task_power_w: Vec<f64>,
}

impl TaskMap {
    /// Identity placement: task i on core i, powers zero.
    pub fn identity(n: usize) -> TaskMap {
        TaskMap {
            task_core: (0..n).collect(),
            core_task: (0..n).collect(),
            task_power_w: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.task_core.len()
    }

    pub fn is_empty(&self) -> bool {
        self.task_core.is_empty()
    }

    pub fn task_core(&self, task: usize) -> usize {
        self.task_core[task]
    }

    pub fn core_task(&self, core: usize) -> usize {
        self.core_task[core]
    }

    /// Refresh the power estimates from the last window's per-core
    /// utilization: a task's power is the dynamic power its core burned.
    pub fn estimate_powers(&mut self, core_utilization: &[f64], dynamic_w: f64) {
        assert_eq!(core_utilization.len(), self.len(), "one utilization entry per core");
        for t in 0..self.len() {
            self.task_power_w[t] = core_utilization[self.task_core[t]] * dynamic_w;
        }
    }

    /// Apply a migration batch.  The batch must relocate tasks onto distinct
    /// cores whose union matches the vacated set, i.e. the result must still
    /// be a bijection — rank pairing produces exactly that shape.
    pub fn apply(&mut self, migrations: &[Migration]) {
        for m in migrations {
            assert!(m.task < self.len(), "migration names task {} beyond map", m.task);
            assert!(m.to_core < self.len(), "migration names core {} beyond map", m.to_core);
            self.task_core[m.task] = m.to_core;
        }
        // rebuild the inverse; any collision means the batch was not a permutation
        let mut seen = vec![false; self.len()];
        for (task, &core) in self.task_core.iter().enumerate() {
            assert!(!seen[core], "task map lost bijectivity: core {core} assigned twice");
            seen[core] = true;
            self.core_task[core] = task;
        }
    }
}

/// One task move emitted by the reallocation heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Migration {
    pub task: usize,
    pub to_core: usize,
}

/// What the policy decided at one instant.  The enum shape itself enforces
/// mutual exclusion: a decision is never both a reallocation and a reroute.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionKind {
    None,
    Reallocate(Vec<Migration>),
    Reroute(StatusBits),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtmDecision {
    pub kind: DecisionKind,
    pub decision_cycle: u64,
}

impl DtmDecision {
    pub fn none(cycle: u64) -> DtmDecision {
        DtmDecision { kind: DecisionKind::None, decision_cycle: cycle }
    }
}

/// Sliding-window decision rule.
///
/// `predict` maps (utilization, horizon in thermal steps, current state) to
/// predicted absolute temperatures; the trained predictor slots in directly,
/// and tests substitute closures.  Rule order:
///
/// 1. predict one window ahead; any core over `t_th` → Reallocate.
/// 2. else any switch/link over `t_th` → predict a second window ahead; a
///    core crossing there → Reallocate, otherwise Reroute carrying the hot
///    flags of the first-window prediction.
/// 3. else None.
///
/// Predictions are evaluated at the window end only: the predictor's
/// temperature deltas grow monotonically with horizon under fixed
/// utilization, so the end of the window is where a crossing shows first.
pub fn sliding_window_decide<F>(
    predict: F,
    u: &UtilizationVector,
    t0: &ThermalState,
    map: &TaskMap,
    cfg: &DtmConfig,
    window_steps: u32,
    now: u64,
) -> Result<DtmDecision, Error>
where
    F: Fn(&UtilizationVector, u32, &ThermalState) -> Result<ThermalState, Error>,
{
    let n_cores = map.len();
    let ahead = predict(u, window_steps, t0)?;
    assert!(ahead.0.len() >= n_cores, "prediction must cover every core");

    let core_dt: Vec<f64> =
        (0..n_cores).map(|c| ahead.0[c] - t0.0[c]).collect();

    if ahead.0[..n_cores].iter().any(|&t| t > cfg.t_th_c) {
        let migrations = ftt_reallocate(map, &core_dt, &map.task_power_w);
        return Ok(DtmDecision { kind: DecisionKind::Reallocate(migrations), decision_cycle: now });
    }

    if ahead.0[n_cores..].iter().any(|&t| t > cfg.t_th_c) {
        let further = predict(u, 2 * window_steps, t0)?;
        if further.0[..n_cores].iter().any(|&t| t > cfg.t_th_c) {
            let migrations = ftt_reallocate(map, &core_dt, &map.task_power_w);
            return Ok(DtmDecision {
                kind: DecisionKind::Reallocate(migrations),
                decision_cycle: now,
            });
        }
        // cores stay cool through the second window: handle the heat in the network
        let status = StatusBits::from_temps(&ahead.0, cfg.t_th_c, now);
        return Ok(DtmDecision { kind: DecisionKind::Reroute(status), decision_cycle: now });
    }

    Ok(DtmDecision::none(now))
}

/// Rank-pairing reallocation: tasks by power descending meet cores by
/// predicted temperature change ascending (fastest cooling first), rank i
/// with rank i.  Ties break toward the lowest index, so the result is a
/// deterministic permutation; only changed assignments are emitted.
pub fn ftt_reallocate(
    map: &TaskMap,
    predicted_core_dt: &[f64],
    task_power_w: &[f64],
) -> Vec<Migration> {
    let n = map.len();
    assert_eq!(predicted_core_dt.len(), n, "one predicted delta per core");
    assert_eq!(task_power_w.len(), n, "one power estimate per task");

    let mut tasks: Vec<usize> = (0..n).collect();
    tasks.sort_by(|&a, &b| {
        task_power_w[b].total_cmp(&task_power_w[a]).then(a.cmp(&b))
    });
    let mut cores: Vec<usize> = (0..n).collect();
    cores.sort_by(|&a, &b| {
        predicted_core_dt[a].total_cmp(&predicted_core_dt[b]).then(a.cmp(&b))
    });

    tasks
        .iter()
        .zip(&cores)
        .filter(|&(&t, &c)| map.task_core(t) != c)
        .map(|(&t, &c)| Migration { task: t, to_core: c })
        .collect()
}

/// Control-message type tag, two bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    RerouteTrigger = 0,
    ReallocTrigger = 1,
    StatusSegment = 2,
    Timestamp = 3,
}

impl MsgType {
    fn from_bits(b: u32) -> MsgType {
        match b & 0x3 {
            0 => MsgType::RerouteTrigger,
            1 => MsgType::ReallocTrigger,
            2 => MsgType::StatusSegment,
            _ => MsgType::Timestamp,
        }
    }
}

/// One 32-bit control flit.  Layout, high to low:
/// `msg_type:2 | seq:4 | payload:16 | timestamp_low:10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThermalControlMessage {
    pub msg_type: MsgType,
    /// Sequence tag within a burst (segment index, migration index mod 16).
    pub seq: u8,
    /// Status-bit segment, migration pair, or timestamp extension.
    pub payload: u16,
    /// Low ten bits of the decision cycle, stamped on every flit.
    pub timestamp_low: u16,
}

impl ThermalControlMessage {
    pub fn encode(&self) -> u32 {
        assert!(self.seq < 16, "seq field is four bits, got {}", self.seq);
        assert!(self.timestamp_low < 1024, "timestamp_low is ten bits");
        ((self.msg_type as u32) << 30)
            | ((self.seq as u32) << 26)
            | ((self.payload as u32) << 10)
            | self.timestamp_low as u32
    }

    /// Total: every 32-bit word decodes to some message.
    pub fn decode(word: u32) -> ThermalControlMessage {
        ThermalControlMessage {
            msg_type: MsgType::from_bits(word >> 30),
            seq: ((word >> 26) & 0xF) as u8,
            payload: ((word >> 10) & 0xFFFF) as u16,
            timestamp_low: (word & 0x3FF) as u16,
        }
    }
}

/// Flits in a full status broadcast: 240 bits in 16-bit segments.
pub const STATUS_SEGMENT_FLITS: usize = 15;
/// A reroute broadcast: status segments, a timestamp extension, the trigger.
pub const REROUTE_BROADCAST_FLITS: usize = STATUS_SEGMENT_FLITS + 2;
/// Published transmission deadline for the status bits.  Decisions happen
/// every window, so the enforced deadline is ten times tighter; the engine
/// logs the slack against this figure.
pub const STATUS_DEADLINE_CYCLES: u64 = 1_000_000;

// timestamps travel as 10 low bits per flit + a 16-bit extension flit
const TS_ENCODED_BITS: u32 = 26;

/// Serialize a decision for the control plane.
///
/// Reroute → `STATUS_SEGMENT_FLITS` segment flits (bit k of segment i is
/// flat component 16·i+k), one TIMESTAMP flit carrying the next sixteen
/// timestamp bits, then the REROUTE_TRIGGER.  Reallocate → one
/// REALLOC_TRIGGER flit per migration, payload `task << 8 | core`.  None →
/// no flits, which makes an empty migration list indistinguishable from no
/// decision on the wire — both are no-ops at every receiver.
pub fn encode_control(decision: &DtmDecision) -> Vec<u32> {
    let ts = decision.decision_cycle;
    let ts_low = (ts & 0x3FF) as u16;
    match &decision.kind {
        DecisionKind::None => Vec::new(),
        DecisionKind::Reallocate(migrations) => migrations
            .iter()
            .enumerate()
            .map(|(i, m)| {
                assert!(m.task < 256 && m.to_core < 256, "migration ids must fit eight bits");
                ThermalControlMessage {
                    msg_type: MsgType::ReallocTrigger,
                    seq: (i % 16) as u8,
                    payload: ((m.task as u16) << 8) | m.to_core as u16,
                    timestamp_low: ts_low,
                }
                .encode()
            })
            .collect(),
        DecisionKind::Reroute(status) => {
            assert_eq!(
                status.bits.len(),
                16 * STATUS_SEGMENT_FLITS,
                "status broadcast is sized for the full component vector"
            );
            let mut flits = Vec::with_capacity(REROUTE_BROADCAST_FLITS);
            for seg in 0..STATUS_SEGMENT_FLITS {
                let mut payload = 0u16;
                for k in 0..16 {
                    if status.bits[16 * seg + k] {
                        payload |= 1 << k;
                    }
                }
                flits.push(
                    ThermalControlMessage {
                        msg_type: MsgType::StatusSegment,
                        seq: seg as u8,
                        payload,
                        timestamp_low: ts_low,
                    }
                    .encode(),
                );
            }
            flits.push(
                ThermalControlMessage {
                    msg_type: MsgType::Timestamp,
                    seq: 15,
                    payload: ((ts >> 10) & 0xFFFF) as u16,
                    timestamp_low: ts_low,
                }
                .encode(),
            );
            flits.push(
                ThermalControlMessage {
                    msg_type: MsgType::RerouteTrigger,
                    seq: 0,
                    payload: 0,
                    timestamp_low: ts_low,
                }
                .encode(),
            );
            flits
        }
    }
}

/// Reconstruct a decision from its flits.  Inverse of [`encode_control`] up
/// to the encoded timestamp width: reroutes recover 26 timestamp bits,
/// reallocations only the low 10 (their flits carry no extension).
pub fn decode_control(flits: &[u32]) -> Result<DtmDecision, Error> {
    if flits.is_empty() {
        return Ok(DtmDecision::none(0));
    }
    let msgs: Vec<ThermalControlMessage> =
        flits.iter().map(|&w| ThermalControlMessage::decode(w)).collect();

    if msgs.iter().any(|m| m.msg_type == MsgType::RerouteTrigger) {
        if msgs.len() != REROUTE_BROADCAST_FLITS {
            return Err(Error::Format {
                kind: "control message",
                detail: format!(
                    "reroute broadcast needs {REROUTE_BROADCAST_FLITS} flits, got {}",
                    msgs.len()
                ),
            });
        }
        let mut bits = vec![false; 16 * STATUS_SEGMENT_FLITS];
        for (i, m) in msgs[..STATUS_SEGMENT_FLITS].iter().enumerate() {
            if m.msg_type != MsgType::StatusSegment || m.seq as usize != i {
                return Err(Error::Format {
                    kind: "control message",
                    detail: format!("flit {i} is not status segment {i}"),
                });
            }
            for k in 0..16 {
                bits[16 * i + k] = m.payload & (1 << k) != 0;
            }
        }
        let ts_msg = &msgs[STATUS_SEGMENT_FLITS];
        if ts_msg.msg_type != MsgType::Timestamp {
            return Err(Error::Format {
                kind: "control message",
                detail: "timestamp flit missing from reroute broadcast".into(),
            });
        }
        let ts = ((ts_msg.payload as u64) << 10) | ts_msg.timestamp_low as u64;
        return Ok(DtmDecision {
            kind: DecisionKind::Reroute(StatusBits { bits, timestamp: ts }),
            decision_cycle: ts,
        });
    }

    if msgs.iter().all(|m| m.msg_type == MsgType::ReallocTrigger) {
        let migrations = msgs
            .iter()
            .map(|m| Migration {
                task: (m.payload >> 8) as usize,
                to_core: (m.payload & 0xFF) as usize,
            })
            .collect();
        let ts = msgs[0].timestamp_low as u64;
        return Ok(DtmDecision { kind: DecisionKind::Reallocate(migrations), decision_cycle: ts });
    }

    Err(Error::Format {
        kind: "control message",
        detail: "mixed or incomplete flit burst".into(),
    })
}

/// Carry a decision into the simulated machine.  Reallocation pauses every
/// migrating task for the configured migration cost and remaps its traffic
/// endpoint; rerouting hands the hot flags to the distance-vector layer,
/// which switches tables exactly 600 cycles later.  Returns the count of
/// migrations applied (0 for None/Reroute).
pub fn apply_decision(
    sim: &mut NocSim,
    map: &mut TaskMap,
    decision: &DtmDecision,
    cfg: &DtmConfig,
) -> usize {
    match &decision.kind {
        DecisionKind::None => 0,
        DecisionKind::Reallocate(migrations) => {
            let resume = sim.cycle() + cfg.migration_pause_cycles;
            for m in migrations {
                sim.pause_task(m.task, resume);
            }
            map.apply(migrations);
            for m in migrations {
                sim.set_task_core(m.task, m.to_core);
            }
            migrations.len()
        }
        DecisionKind::Reroute(status) => {
            let n_cores = map.len();
            let n_switches = sim.topology().switch_count();
            let hot_switches: Vec<bool> =
                status.bits[n_cores..n_cores + n_switches].to_vec();
            let hot_links: Vec<bool> = status.bits[n_cores + n_switches..].to_vec();
            sim.trigger_reroute(&hot_switches, &hot_links);
            0
        }
    }
}

/// One row of the decision event log.
#[derive(Debug, Clone, PartialEq)]
pub struct DtmEvent {
    pub cycle: u64,
    /// "none", "reallocate", or "reroute".
    pub kind: &'static str,
    /// Components flagged hot by the decision's prediction.
    pub flagged_components: usize,
    /// Migrations emitted (reallocation only).
    pub migrations: usize,
    /// Peak component temperature when the decision was taken.
    pub peak_temp_before_c: f64,
}

impl DtmEvent {
    pub fn from_decision(decision: &DtmDecision, peak_temp_before_c: f64) -> DtmEvent {
        let (kind, flagged, migrations) = match &decision.kind {
            DecisionKind::None => ("none", 0, 0),
            DecisionKind::Reallocate(m) => ("reallocate", 0, m.len()),
            DecisionKind::Reroute(status) => ("reroute", status.count(), 0),
        };
        DtmEvent {
            cycle: decision.decision_cycle,
            kind,
            flagged_components: flagged,
            migrations,
            peak_temp_before_c,
        }
    }
}
