//! Cycle-accurate wormhole NoC simulator.
//!
//! Switch model: three pipeline stages per hop — input arbitration (IA),
//! switch traversal (ST), output arbitration (OA) — over per-port input
//! virtual channels.  A head flit claims one downstream VC for its packet
//! at IA time (so no other packet ever targets that buffer) and body flits
//! follow on the held route, which keeps every packet's flits in order.
//! Buffer space is checked at OA time: a full downstream VC stalls the
//! output register, which backpressures ST and IA in turn — flits stall,
//! they are never dropped.  Checking space at the deposit point keeps the
//! buffer-occupancy loop at two cycles, so the depth-2 wired VCs sustain
//! one flit per cycle.
//!
//! Deadlock discipline: data heads allocate among the three adaptive VCs
//! on their table route; when none is free they fall back to the escape
//! VC, which is routed strictly dimension-order (XY, wired only) and is
//! reserved for escape-mode packets — an acyclic subnetwork that waiting
//! packets can always eventually enter.  A flit's VC index identifies its
//! mode at the next hop, so escape packets stay XY to the destination.
//! Control flits ride their own VC and also route XY.  Crossbar and output
//! registers are per-VC, never shared: a downstream VC has exactly one
//! claim holder, so each register carries flits of at most one packet and a
//! stalled stream can only ever queue behind itself.  Packets couple only
//! through VC claims (released tail-by-tail) and through physical-channel
//! bandwidth (round-robin, so transient) — the escape subnetwork keeps the
//! acyclic dependency structure of dimension-order routing and blocked
//! heads always retain the option to take it, because a head that cannot
//! allocate never leaves its buffer slot.  Absence of deadlock is still
//! checked empirically (soak tests plus a drain watchdog), not claimed by
//! proof.
//!
//! The wireless overlay is a single shared channel arbitrated by a
//! round-robin token over the interfaces.  The holder's output register
//! feeds a serializer (one 32-bit flit per [`WIRELESS_CYCLES_PER_FLIT`]
//! channel cycles); the token passes on the first idle cycle or when the
//! hold budget cannot cover another flit.  Transmission by a non-holder is
//! a protocol violation and is counted (and asserted in tests) rather than
//! silently tolerated.
//!
//! Phase order within one cycle (the source of the pinned timings: a head
//! flit injected at cycle k is ejected at k + 3·hops; a full packet of F
//! flits finishes at k + 3·hops + F − 1):
//!
//!   routing tick → wireless → ejection → OA → ST → injection → IA →
//!   traffic generation → statistics
//!
//! OA deposits become IA-eligible the next cycle; injected flits are
//! IA-eligible the same cycle.  All arbitration is round-robin and every
//! iteration order is fixed, so runs are bit-deterministic per seed.

pub mod traffic;

use std::collections::VecDeque;

use crate::error::Error;
use crate::routing::{DistanceVectorRouting, RoutingNetwork};
use crate::thermal::UtilizationVector;
use crate::topology::{ComponentId, Topology};
use traffic::{PendingPacket, TrafficConfig, TrafficSource};

pub const DATA_VCS: usize = 4;
pub const VCS: usize = 5;
/// Data VCs heads may allocate on their table route; the remaining data VC
/// is the escape lane.
pub const ADAPTIVE_VCS: usize = 3;
/// Escape VC: strictly XY-routed, entered when no adaptive VC is free.
pub const ESCAPE_VC: usize = 3;
/// Dedicated VC for thermal-management traffic; data packets never use it.
pub const CONTROL_VC: usize = 4;
pub const WIRED_VC_DEPTH: usize = 2;
pub const WIRELESS_VC_DEPTH: usize = 8;
/// 32-bit flit over a 16 Gbps channel at a 2.5 GHz fabric clock.
pub const WIRELESS_CYCLES_PER_FLIT: u64 = 5;
pub const DEFAULT_MAX_TOKEN_HOLD: u64 = 1000;
pub const DEFAULT_SOURCE_QUEUE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlitKind {
    Head,
    Body,
    Tail,
    /// Single-flit packet (all control messages).
    HeadTail,
}

impl FlitKind {
    fn opens(self) -> bool {
        matches!(self, FlitKind::Head | FlitKind::HeadTail)
    }
    fn closes(self) -> bool {
        matches!(self, FlitKind::Tail | FlitKind::HeadTail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Flit {
    pub kind: FlitKind,
    pub packet_id: u32,
    pub seq: u16,
    pub src: u8,
    pub dst: u8,
    pub payload: u32,
    pub control: bool,
    /// Routing-table epoch stamped at head injection; in-flight packets
    /// keep their paths across one table switchover.
    pub epoch: u64,
}

/// Resolved per-packet output: which port to leave by and exactly which
/// downstream buffer slot class the credit was reserved in.
#[derive(Debug, Clone, Copy)]
struct OutRoute {
    out_port: usize,
    dst_switch: usize,
    dst_port: usize,
    dst_vc: usize,
}

struct InVc {
    fifo: VecDeque<(Flit, u64)>, // (flit, ready cycle)
    /// Packet this VC is allocated to, set by its head at upstream IA and
    /// cleared when its tail leaves this VC.
    claim: Option<u32>,
    /// Route held by the packet currently streaming OUT of this VC.
    route: Option<OutRoute>,
}

impl InVc {
    fn new() -> InVc {
        InVc { fifo: VecDeque::new(), claim: None, route: None }
    }
}

enum PortKind {
    /// Core-side injection port.
    Local,
    Wired { link: usize },
    Wireless,
}

struct Port {
    kind: PortKind,
    depth: usize,
    vcs: Vec<InVc>,
    /// IA scan start over this input port's VCs.
    rr: usize,
    /// Per-input-VC crossbar registers.  A VC's flits belong to one packet
    /// at a time, so each register is packet-exclusive: a stalled stream
    /// never blocks another packet's path through the switch.
    xbar: [Option<(Flit, OutRoute)>; VCS],
    /// Output registers of this port in its *output* role, indexed by the
    /// downstream VC — exclusive to that VC's claim holder for the same
    /// reason.
    outreg: [Option<(Flit, OutRoute)>; VCS],
    /// OA rotation over this output's VC registers sharing the channel.
    out_rr: usize,
    /// Downstream adaptive-VC pick rotation for heads leaving this output.
    vc_rr: usize,
}

impl Port {
    fn new(kind: PortKind, depth: usize) -> Port {
        Port {
            kind,
            depth,
            vcs: (0..VCS).map(|_| InVc::new()).collect(),
            rr: 0,
            xbar: [None; VCS],
            outreg: [None; VCS],
            out_rr: 0,
            vc_rr: 0,
        }
    }
}

struct SwitchState {
    ports: Vec<Port>,
    /// Buffered flits across all input VCs (maintained incrementally).
    occupied: usize,
    /// Total buffer slots, the occupancy-ratio denominator.
    slots: usize,
}

/// Packet bookkeeping for conservation, ordering and latency checks.
#[derive(Debug, Clone, Copy)]
struct PacketMeta {
    flits: u16,
    delivered: u16,
    injected_cycle: u64,
}

struct SourceNi {
    queue: VecDeque<QueuedPacket>,
    /// Local VC held by the packet currently streaming in.
    vc: Option<usize>,
    sent: usize,
    pid: u32,
    epoch: u64,
    rr: usize,
}

#[derive(Debug, Clone, Copy)]
struct QueuedPacket {
    dst: usize,
    flits: usize,
    control: bool,
    payload: u32,
}

enum WirelessItem {
    Data(Flit, OutRoute),
    Broadcast(Flit),
}

impl WirelessItem {
    fn control(&self) -> bool {
        match self {
            WirelessItem::Data(f, _) => f.control,
            WirelessItem::Broadcast(_) => true,
        }
    }
}

struct WirelessTx {
    item: Option<WirelessItem>,
    remaining: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NocStats {
    pub injected_flits: u64,
    pub delivered_flits: u64,
    pub injected_packets: u64,
    pub delivered_packets: u64,
    /// Packets shed at a full source queue (offered load, never flit loss).
    pub skipped_packets: u64,
    pub order_violations: u64,
    pub token_violations: u64,
    pub latency_sum: u64,
    pub latency_count: u64,
    pub max_latency: u64,
}

impl NocStats {
    pub fn mean_latency(&self) -> f64 {
        if self.latency_count == 0 {
            0.0
        } else {
            self.latency_sum as f64 / self.latency_count as f64
        }
    }
}

/// Per-window accumulators behind [`NocSim::take_window`].
struct WindowAcc {
    cycles: u64,
    core_busy: Vec<f64>,
    switch_occ: Vec<u64>,
    link_flits: Vec<[u64; 2]>,
    wireless_busy_cycles: u64,
    control_busy_cycles: u64,
    control_wireless_flits: u64,
}

impl WindowAcc {
    fn new(switches: usize, links: usize) -> WindowAcc {
        WindowAcc {
            cycles: 0,
            core_busy: vec![0.0; switches],
            switch_occ: vec![0; switches],
            link_flits: vec![[0, 0]; links],
            wireless_busy_cycles: 0,
            control_busy_cycles: 0,
            control_wireless_flits: 0,
        }
    }

    fn reset(&mut self) {
        self.cycles = 0;
        self.core_busy.fill(0.0);
        self.switch_occ.fill(0);
        self.link_flits.fill([0, 0]);
        self.wireless_busy_cycles = 0;
        self.control_busy_cycles = 0;
        self.control_wireless_flits = 0;
    }
}

/// Utilization and wireless-occupancy summary of one measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub utilization: UtilizationVector,
    pub cycles: u64,
    pub wireless_busy_cycles: u64,
    /// Channel cycles spent on thermal-management flits.
    pub control_busy_cycles: u64,
    pub control_wireless_flits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NocConfig {
    pub traffic: TrafficConfig,
    pub max_token_hold: u64,
    pub source_queue_cap: usize,
    pub seed: u64,
}

impl Default for NocConfig {
    fn default() -> NocConfig {
        NocConfig {
            traffic: TrafficConfig::default(),
            max_token_hold: DEFAULT_MAX_TOKEN_HOLD,
            source_queue_cap: DEFAULT_SOURCE_QUEUE_CAP,
            seed: 0,
        }
    }
}

pub struct NocSim {
    topo: Topology,
    dvr: DistanceVectorRouting,
    cfg: NocConfig,
    cycle: u64,
    switches: Vec<SwitchState>,
    nis: Vec<SourceNi>,
    traffic: TrafficSource,
    /// Port index of a channel at (channel.a, channel.b).
    chan_port: Vec<(usize, usize)>,
    wireless_port: Vec<Option<usize>>,
    wis: Vec<usize>,
    token_idx: usize,
    token_hold_used: u64,
    wireless_tx: Vec<WirelessTx>,
    broadcast_q: Vec<VecDeque<Flit>>,
    packets: Vec<PacketMeta>,
    stats: NocStats,
    win: WindowAcc,
    latencies: Vec<u32>,
    control_rx: Vec<(u64, usize, u32)>,
    broadcast_log: Vec<(u64, u32)>,
    gen_buf: Vec<(usize, PendingPacket)>,
    halted: bool,
    next_broadcast_seq: u16,
}

impl NocSim {
    pub fn new(topo: Topology, cfg: NocConfig) -> Result<NocSim, Error> {
        let n = topo.switch_count();
        if n > 256 {
            // flits address cores with a u8
            return Err(Error::config("topology.switches", n, "<= 256 for 8-bit flit addressing"));
        }
        let dvr = DistanceVectorRouting::new(RoutingNetwork::from_topology(&topo))?;
        let traffic = TrafficSource::new(cfg.traffic.clone(), topo.core_count(), cfg.seed)?;

        let mut switches = Vec::with_capacity(n);
        let mut wireless_port = vec![None; n];
        for s in 0..n {
            let mut ports = vec![Port::new(PortKind::Local, WIRED_VC_DEPTH)];
            for &(_, link) in topo.wired_neighbors(s) {
                ports.push(Port::new(PortKind::Wired { link }, WIRED_VC_DEPTH));
            }
            if topo.is_wireless_interface(s) {
                wireless_port[s] = Some(ports.len());
                ports.push(Port::new(PortKind::Wireless, WIRELESS_VC_DEPTH));
            }
            let slots = ports.iter().map(|p| p.depth * VCS).sum();
            switches.push(SwitchState { ports, occupied: 0, slots });
        }

        let chan_port = dvr
            .network()
            .channels()
            .iter()
            .map(|ch| match ch.link {
                Some(l) => {
                    let link = topo.link(l);
                    let at = |s: usize| {
                        1 + topo
                            .wired_neighbors(s)
                            .iter()
                            .position(|&(_, id)| id == l)
                            .expect("link appears in both endpoint adjacencies")
                    };
                    let _ = link;
                    (at(ch.a), at(ch.b))
                }
                None => (
                    wireless_port[ch.a].expect("wireless channel endpoint is a WI"),
                    wireless_port[ch.b].expect("wireless channel endpoint is a WI"),
                ),
            })
            .collect();

        let wis = topo.wireless_interfaces().to_vec();
        let links = topo.link_count();
        Ok(NocSim {
            nis: (0..n)
                .map(|_| SourceNi {
                    queue: VecDeque::new(),
                    vc: None,
                    sent: 0,
                    pid: 0,
                    epoch: 0,
                    rr: 0,
                })
                .collect(),
            wireless_tx: wis.iter().map(|_| WirelessTx { item: None, remaining: 0 }).collect(),
            broadcast_q: wis.iter().map(|_| VecDeque::new()).collect(),
            win: WindowAcc::new(n, links),
            topo,
            dvr,
            cfg,
            cycle: 0,
            switches,
            traffic,
            chan_port,
            wireless_port,
            wis,
            token_idx: 0,
            token_hold_used: 0,
            packets: Vec::new(),
            stats: NocStats::default(),
            latencies: Vec::new(),
            control_rx: Vec::new(),
            broadcast_log: Vec::new(),
            gen_buf: Vec::new(),
            halted: false,
            next_broadcast_seq: 0,
        })
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn routing(&self) -> &DistanceVectorRouting {
        &self.dvr
    }

    pub fn stats(&self) -> &NocStats {
        &self.stats
    }

    pub fn latencies(&self) -> &[u32] {
        &self.latencies
    }

    pub fn control_rx(&self) -> &[(u64, usize, u32)] {
        &self.control_rx
    }

    pub fn broadcast_log(&self) -> &[(u64, u32)] {
        &self.broadcast_log
    }

    pub fn token_holder(&self) -> Option<usize> {
        self.wis.get(self.token_idx).copied()
    }

    pub fn task_core(&self, task: usize) -> usize {
        self.traffic.task_core(task)
    }

    pub fn core_task(&self, core: usize) -> usize {
        self.traffic.core_task(core)
    }

    pub fn set_task_core(&mut self, task: usize, core: usize) {
        self.traffic.set_task_core(task, core);
    }

    pub fn pause_task(&mut self, task: usize, until_cycle: u64) {
        self.traffic.pause_task(task, until_cycle);
    }

    /// Stop drawing new traffic; already queued packets keep streaming.
    pub fn halt_generation(&mut self) {
        self.halted = true;
    }

    /// Flits injected but not yet ejected.
    pub fn in_network_flits(&self) -> u64 {
        self.stats.injected_flits - self.stats.delivered_flits
    }

    /// Flits still owed by source queues (queued minus already streamed).
    pub fn pending_source_flits(&self) -> u64 {
        let mut total = 0u64;
        for ni in &self.nis {
            for (i, p) in ni.queue.iter().enumerate() {
                let sent = if i == 0 && ni.vc.is_some() { ni.sent } else { 0 };
                total += (p.flits - sent) as u64;
            }
        }
        total
    }

    fn wireless_idle(&self) -> bool {
        self.wireless_tx.iter().all(|t| t.item.is_none())
            && self.broadcast_q.iter().all(|q| q.is_empty())
    }

    pub fn is_drained(&self) -> bool {
        self.in_network_flits() == 0 && self.pending_source_flits() == 0 && self.wireless_idle()
    }

    /// Hand the scheduler a thermal-status broadcast: one 32-bit flit per
    /// payload word, serialized over the wireless channel from `wi_switch`.
    pub fn enqueue_broadcast(&mut self, wi_switch: usize, payloads: &[u32]) -> Result<(), Error> {
        let Some(idx) = self.wis.iter().position(|&w| w == wi_switch) else {
            return Err(Error::config("noc.broadcast_wi", wi_switch, "a wireless interface switch"));
        };
        for &payload in payloads {
            let seq = self.next_broadcast_seq;
            self.next_broadcast_seq = self.next_broadcast_seq.wrapping_add(1);
            self.broadcast_q[idx].push_back(Flit {
                kind: FlitKind::HeadTail,
                packet_id: u32::MAX,
                seq,
                src: wi_switch as u8,
                dst: wi_switch as u8,
                payload,
                control: true,
                epoch: 0,
            });
        }
        Ok(())
    }

    /// Queue a single-flit control packet (wired, control VC).  A message
    /// to the sender's own tile is delivered without network transit.
    pub fn enqueue_control(&mut self, src_core: usize, dst_core: usize, payload: u32) {
        if src_core == dst_core {
            self.control_rx.push((self.cycle, dst_core, payload));
            return;
        }
        // control traffic is never shed: it bypasses the source-queue cap
        self.nis[src_core].queue.push_back(QueuedPacket {
            dst: dst_core,
            flits: 1,
            control: true,
            payload,
        });
    }

    /// Flag hot components and start a reroute episode (tables switch over
    /// after the fixed convergence window).
    pub fn trigger_reroute(&mut self, hot_switches: &[bool], hot_links: &[bool]) -> bool {
        self.dvr.trigger_reroute(hot_switches, hot_links, self.cycle)
    }

    pub fn run(&mut self, cycles: u64) {
        for _ in 0..cycles {
            self.step();
        }
    }

    /// Run until every injected flit is delivered, up to `watchdog` cycles.
    /// Returns the cycle count used, or `None` on watchdog expiry.
    pub fn drain(&mut self, watchdog: u64) -> Option<u64> {
        self.halt_generation();
        for used in 0..=watchdog {
            if self.is_drained() {
                return Some(used);
            }
            self.step();
        }
        None
    }

    pub fn step(&mut self) {
        let now = self.cycle;
        self.dvr.on_cycle(now);
        self.wireless_phase(now);
        self.ejection_phase(now);
        self.oa_phase(now);
        self.st_phase();
        self.injection_phase(now);
        self.ia_phase(now);
        if !self.halted {
            let mut buf = std::mem::take(&mut self.gen_buf);
            buf.clear();
            self.traffic.generate(now, &mut buf);
            for &(src, p) in &buf {
                if self.nis[src].queue.len() < self.cfg.source_queue_cap {
                    self.nis[src].queue.push_back(QueuedPacket {
                        dst: p.dst_core,
                        flits: p.flits,
                        control: false,
                        payload: 0,
                    });
                } else {
                    self.stats.skipped_packets += 1;
                }
            }
            self.gen_buf = buf;
        }
        self.stats_phase(now);
        self.cycle = now + 1;
    }

    // --- pipeline phases -------------------------------------------------

    fn wireless_phase(&mut self, now: u64) {
        if self.wis.is_empty() {
            return;
        }
        // token mutual exclusion: only the holder's serializer may be active
        for (i, tx) in self.wireless_tx.iter().enumerate() {
            if tx.item.is_some() && i != self.token_idx {
                self.stats.token_violations += 1;
            }
        }
        let h = self.token_idx;
        let sw = self.wis[h];
        if self.wireless_tx[h].item.is_none() {
            let wport = self.wireless_port[sw].expect("WIs carry a wireless port");
            let have_broadcast = !self.broadcast_q[h].is_empty();
            // escape/control flits never route wireless, so only adaptive
            // VC registers feed the serializer.  A data flit is sendable
            // only when its claimed target VC has space; only this packet
            // deposits there, and it serializes one flit at a time, so
            // space at start persists to completion.
            debug_assert!(self.switches[sw].ports[wport].outreg[ESCAPE_VC].is_none());
            debug_assert!(self.switches[sw].ports[wport].outreg[CONTROL_VC].is_none());
            let start = self.switches[sw].ports[wport].out_rr;
            let mut data_vc = None;
            for k in 0..ADAPTIVE_VCS {
                let v = (start + k) % ADAPTIVE_VCS;
                if let Some((_, route)) = &self.switches[sw].ports[wport].outreg[v] {
                    if self.vc_has_space(*route) {
                        data_vc = Some(v);
                        break;
                    }
                }
            }
            if !have_broadcast && data_vc.is_none() {
                self.pass_token();
                return;
            }
            if self.token_hold_used + WIRELESS_CYCLES_PER_FLIT > self.cfg.max_token_hold {
                self.pass_token();
                return;
            }
            let item = if have_broadcast {
                WirelessItem::Broadcast(self.broadcast_q[h].pop_front().expect("checked"))
            } else {
                let v = data_vc.expect("checked");
                self.switches[sw].ports[wport].out_rr = (v + 1) % ADAPTIVE_VCS;
                let (f, r) = self.switches[sw].ports[wport].outreg[v].take().expect("checked");
                WirelessItem::Data(f, r)
            };
            self.token_hold_used += WIRELESS_CYCLES_PER_FLIT;
            self.wireless_tx[h] = WirelessTx { item: Some(item), remaining: WIRELESS_CYCLES_PER_FLIT };
        }
        // serialize one channel cycle
        let tx = &mut self.wireless_tx[h];
        let control = tx.item.as_ref().expect("loaded above").control();
        tx.remaining -= 1;
        self.win.wireless_busy_cycles += 1;
        if control {
            self.win.control_busy_cycles += 1;
        }
        if tx.remaining == 0 {
            match self.wireless_tx[h].item.take().expect("completing item") {
                WirelessItem::Data(flit, route) => {
                    if flit.control {
                        self.win.control_wireless_flits += 1;
                    }
                    self.deposit(flit, route, now + 1);
                }
                WirelessItem::Broadcast(flit) => {
                    self.win.control_wireless_flits += 1;
                    self.broadcast_log.push((now, flit.payload));
                }
            }
        }
    }

    fn pass_token(&mut self) {
        self.token_idx = (self.token_idx + 1) % self.wis.len();
        self.token_hold_used = 0;
    }

    fn vc_has_space(&self, r: OutRoute) -> bool {
        let port = &self.switches[r.dst_switch].ports[r.dst_port];
        port.vcs[r.dst_vc].fifo.len() < port.depth
    }

    /// Deliver a flit into its claimed downstream VC (caller checked space).
    fn deposit(&mut self, flit: Flit, route: OutRoute, ready: u64) {
        let depth = self.switches[route.dst_switch].ports[route.dst_port].depth;
        let vc = &mut self.switches[route.dst_switch].ports[route.dst_port].vcs[route.dst_vc];
        debug_assert_eq!(vc.claim, Some(flit.packet_id), "deposit into a foreign claim");
        debug_assert!(vc.fifo.len() < depth, "deposit overflowed a VC buffer");
        vc.fifo.push_back((flit, ready));
        self.switches[route.dst_switch].occupied += 1;
    }

    fn ejection_phase(&mut self, now: u64) {
        for s in 0..self.switches.len() {
            for p in 0..self.switches[s].ports.len() {
                for v in 0..VCS {
                    let vc = &mut self.switches[s].ports[p].vcs[v];
                    let Some(&(flit, ready)) = vc.fifo.front() else { continue };
                    if ready > now || flit.dst as usize != s {
                        continue;
                    }
                    vc.fifo.pop_front();
                    if flit.kind.closes() {
                        vc.claim = None;
                    }
                    self.switches[s].occupied -= 1;
                    self.finish_flit(flit, s, now);
                }
            }
        }
    }

    fn finish_flit(&mut self, flit: Flit, here: usize, now: u64) {
        self.stats.delivered_flits += 1;
        let meta = &mut self.packets[flit.packet_id as usize];
        if flit.seq as u16 != meta.delivered {
            self.stats.order_violations += 1;
        }
        meta.delivered += 1;
        if flit.kind.closes() {
            self.stats.delivered_packets += 1;
            if meta.delivered != meta.flits {
                self.stats.order_violations += 1;
            }
            if flit.control {
                self.control_rx.push((now, here, flit.payload));
            } else {
                let lat = now - meta.injected_cycle;
                self.stats.latency_sum += lat;
                self.stats.latency_count += 1;
                self.stats.max_latency = self.stats.max_latency.max(lat);
                self.latencies.push(lat as u32);
            }
        }
    }

    fn oa_phase(&mut self, now: u64) {
        for s in 0..self.switches.len() {
            for p in 0..self.switches[s].ports.len() {
                if matches!(self.switches[s].ports[p].kind, PortKind::Wireless | PortKind::Local) {
                    continue; // wireless drains via the serializer; local is input-only
                }
                // one flit crosses the physical channel per cycle, rotating
                // over the VC registers that are ready to deposit
                let start = self.switches[s].ports[p].out_rr;
                for k in 0..VCS {
                    let v = (start + k) % VCS;
                    let Some(&(_, route)) = self.switches[s].ports[p].outreg[v].as_ref() else {
                        continue;
                    };
                    if !self.vc_has_space(route) {
                        continue; // full downstream buffer stalls only this VC
                    }
                    let (flit, route) =
                        self.switches[s].ports[p].outreg[v].take().expect("checked");
                    self.switches[s].ports[p].out_rr = (v + 1) % VCS;
                    if let PortKind::Wired { link, .. } = self.switches[s].ports[p].kind {
                        let dir = if self.topo.link(link).a == s { 0 } else { 1 };
                        self.win.link_flits[link][dir] += 1;
                    }
                    self.deposit(flit, route, now + 1);
                    break;
                }
            }
        }
    }

    fn st_phase(&mut self) {
        for s in 0..self.switches.len() {
            for p in 0..self.switches[s].ports.len() {
                for v in 0..VCS {
                    let Some((_, route)) = &self.switches[s].ports[p].xbar[v] else {
                        continue;
                    };
                    // the output register for a downstream VC is exclusive
                    // to its claim holder, so this never contends
                    let (o, dv) = (route.out_port, route.dst_vc);
                    if self.switches[s].ports[o].outreg[dv].is_some() {
                        continue;
                    }
                    let e = self.switches[s].ports[p].xbar[v].take().expect("checked");
                    self.switches[s].ports[o].outreg[dv] = Some(e);
                }
            }
        }
    }

    fn injection_phase(&mut self, now: u64) {
        for c in 0..self.nis.len() {
            if self.nis[c].queue.is_empty() {
                continue;
            }
            if self.nis[c].vc.is_none() {
                let pkt = *self.nis[c].queue.front().expect("checked");
                let Some(v) = self.pick_local_vc(c, pkt.control) else { continue };
                let pid = self.packets.len() as u32;
                self.packets.push(PacketMeta {
                    flits: pkt.flits as u16,
                    delivered: 0,
                    injected_cycle: now,
                });
                self.stats.injected_packets += 1;
                let ni = &mut self.nis[c];
                ni.vc = Some(v);
                ni.sent = 0;
                ni.pid = pid;
                ni.epoch = self.dvr.epoch();
                self.switches[c].ports[0].vcs[v].claim = Some(pid);
            }
            let ni = &self.nis[c];
            let v = ni.vc.expect("held or just allocated");
            let pkt = *ni.queue.front().expect("checked");
            {
                let vc = &self.switches[c].ports[0].vcs[v];
                if vc.fifo.len() >= self.switches[c].ports[0].depth {
                    continue; // local buffer full; retry next cycle
                }
            }
            let seq = self.nis[c].sent;
            let kind = match (seq, seq + 1 == pkt.flits) {
                (0, true) => FlitKind::HeadTail,
                (0, false) => FlitKind::Head,
                (_, true) => FlitKind::Tail,
                _ => FlitKind::Body,
            };
            let flit = Flit {
                kind,
                packet_id: self.nis[c].pid,
                seq: seq as u16,
                src: c as u8,
                dst: pkt.dst as u8,
                payload: pkt.payload,
                control: pkt.control,
                epoch: self.nis[c].epoch,
            };
            // ready this cycle: IA runs after injection within the cycle
            self.switches[c].ports[0].vcs[v].fifo.push_back((flit, now));
            self.switches[c].occupied += 1;
            self.stats.injected_flits += 1;
            let ni = &mut self.nis[c];
            ni.sent += 1;
            if ni.sent == pkt.flits {
                ni.queue.pop_front();
                ni.vc = None;
            }
        }
    }

    fn pick_local_vc(&mut self, core: usize, control: bool) -> Option<usize> {
        let port = &self.switches[core].ports[0];
        if control {
            let vc = &port.vcs[CONTROL_VC];
            return (vc.claim.is_none() && vc.fifo.len() < port.depth).then_some(CONTROL_VC);
        }
        let start = self.nis[core].rr;
        for k in 0..ADAPTIVE_VCS {
            let v = (start + k) % ADAPTIVE_VCS;
            let vc = &port.vcs[v];
            if vc.claim.is_none() && vc.fifo.len() < port.depth {
                self.nis[core].rr = (v + 1) % ADAPTIVE_VCS;
                return Some(v);
            }
        }
        None
    }

    fn ia_phase(&mut self, now: u64) {
        for s in 0..self.switches.len() {
            for p in 0..self.switches[s].ports.len() {
                // one IA grant per input port per cycle; candidates whose
                // VC register is still occupied simply don't win
                let start = self.switches[s].ports[p].rr;
                for k in 0..VCS {
                    let v = (start + k) % VCS;
                    if self.try_ia(s, p, v, now) {
                        self.switches[s].ports[p].rr = (v + 1) % VCS;
                        break;
                    }
                }
            }
        }
    }

    /// Attempt to arbitrate the head-of-line flit of (switch, port, vc)
    /// into its crossbar register, claiming its downstream VC.
    fn try_ia(&mut self, s: usize, p: usize, v: usize, now: u64) -> bool {
        let vc = &self.switches[s].ports[p].vcs[v];
        let Some(&(flit, ready)) = vc.fifo.front() else { return false };
        if ready > now || flit.dst as usize == s {
            return false; // not arrived yet, or ejection's job
        }
        if self.switches[s].ports[p].xbar[v].is_some() {
            return false; // this VC's register still holds the previous flit
        }
        let route = match vc.route {
            Some(r) => {
                debug_assert!(!flit.kind.opens(), "held route implies a continuation flit");
                r
            }
            None => {
                debug_assert!(flit.kind.opens(), "first flit out of a VC must open a packet");
                // the VC a head sits in identifies its mode: escape and
                // control flits stay on the XY subnetwork, and a blocked
                // data head retries both lanes from its buffer every cycle
                let resolved = if v == ESCAPE_VC || v == CONTROL_VC {
                    self.xy_route(s, flit.dst as usize, v)
                } else {
                    self.table_route(s, &flit)
                        .or_else(|| self.xy_route(s, flit.dst as usize, ESCAPE_VC))
                };
                let Some(route) = resolved else { return false };
                route
            }
        };
        // commit: claim the downstream VC for heads, move to the crossbar
        if flit.kind.opens() {
            let tv = &mut self.switches[route.dst_switch].ports[route.dst_port].vcs[route.dst_vc];
            debug_assert!(tv.claim.is_none(), "head claimed an allocated VC");
            tv.claim = Some(flit.packet_id);
        }
        let port = &mut self.switches[s].ports[p];
        let (flit, _) = port.vcs[v].fifo.pop_front().expect("peeked above");
        if flit.kind.closes() {
            port.vcs[v].route = None;
            port.vcs[v].claim = None;
        } else if flit.kind.opens() {
            port.vcs[v].route = Some(route);
        }
        port.xbar[v] = Some((flit, route));
        self.switches[s].occupied -= 1;
        true
    }

    /// Table (distance-vector) route for a data head: next channel plus a
    /// free adaptive VC at its far end.
    fn table_route(&mut self, s: usize, flit: &Flit) -> Option<OutRoute> {
        let chan = self.dvr.lookup(flit.epoch, s, flit.dst as usize)?;
        let ch = self.dvr.network().channels()[chan];
        let dst_switch = ch.other(s);
        let (pa, pb) = self.chan_port[chan];
        let (out_port, dst_port) = if ch.a == s { (pa, pb) } else { (pb, pa) };
        let free = |vc: usize| self.switches[dst_switch].ports[dst_port].vcs[vc].claim.is_none();
        let start = self.switches[s].ports[out_port].vc_rr;
        for k in 0..ADAPTIVE_VCS {
            let v = (start + k) % ADAPTIVE_VCS;
            if free(v) {
                self.switches[s].ports[out_port].vc_rr = (v + 1) % ADAPTIVE_VCS;
                return Some(OutRoute { out_port, dst_switch, dst_port, dst_vc: v });
            }
        }
        None
    }

    /// Dimension-order route (X then Y, wired only) onto `lane` (escape or
    /// control VC) — the acyclic subnetwork behind the deadlock discipline.
    fn xy_route(&self, s: usize, dst: usize, lane: usize) -> Option<OutRoute> {
        let w = self.topo.width;
        let (sx, sy) = (s % w, s / w);
        let (dx, dy) = (dst % w, dst / w);
        let next = if sx < dx {
            s + 1
        } else if sx > dx {
            s - 1
        } else if sy < dy {
            s + w
        } else {
            debug_assert!(sy > dy, "XY route queried for the local switch");
            s - w
        };
        let link = self.topo.link_between(s, next).expect("mesh neighbors share a link");
        let out_port = 1 + self
            .topo
            .wired_neighbors(s)
            .iter()
            .position(|&(_, id)| id == link)
            .expect("adjacency lists every incident link");
        let dst_port = 1 + self
            .topo
            .wired_neighbors(next)
            .iter()
            .position(|&(_, id)| id == link)
            .expect("adjacency lists every incident link");
        let vc = &self.switches[next].ports[dst_port].vcs[lane];
        vc.claim
            .is_none()
            .then_some(OutRoute { out_port, dst_switch: next, dst_port, dst_vc: lane })
    }

    fn stats_phase(&mut self, now: u64) {
        self.win.cycles += 1;
        for s in 0..self.switches.len() {
            self.win.switch_occ[s] += self.switches[s].occupied as u64;
        }
        for c in 0..self.topo.core_count() {
            self.win.core_busy[c] += self.traffic.core_intensity(c, now);
        }
    }

    /// Close the current measurement window: per-component utilization in
    /// flattened order (cores, switches, links) plus wireless occupancy.
    pub fn take_window(&mut self) -> WindowReport {
        let cyc = self.win.cycles.max(1);
        let n = self.topo.switch_count();
        let mut u = vec![0.0; self.topo.component_count()];
        for c in 0..n {
            u[self.topo.flatten(ComponentId::core(c))] = self.win.core_busy[c] / cyc as f64;
        }
        for s in 0..n {
            u[self.topo.flatten(ComponentId::switch(s))] =
                self.win.switch_occ[s] as f64 / (cyc as f64 * self.switches[s].slots as f64);
        }
        for l in 0..self.topo.link_count() {
            let [a, b] = self.win.link_flits[l];
            u[self.topo.flatten(ComponentId::link(l))] =
                (a.max(b) as f64 / cyc as f64).min(1.0);
        }
        let report = WindowReport {
            utilization: UtilizationVector::new(u).expect("ratios are in [0, 1]"),
            cycles: self.win.cycles,
            wireless_busy_cycles: self.win.wireless_busy_cycles,
            control_busy_cycles: self.win.control_busy_cycles,
            control_wireless_flits: self.win.control_wireless_flits,
        };
        self.win.reset();
        report
    }
}
