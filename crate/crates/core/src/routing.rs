//! Temperature-adaptive distance-vector routing over the switch graph.
//!
//! Switches run a Bellman-Ford style distance-vector protocol.  In steady
//! operation the active forwarding table holds shortest paths at base cost 1
//! per hop (wired or wireless).  When thermal management flags components as
//! hot, the affected channels receive a large additive penalty and the
//! protocol recomputes routes from a cold start: distances begin at infinity
//! and relax monotonically toward the fixpoint, one synchronous round per
//! advertisement interval.  Data keeps flowing on the old table for a fixed
//! number of cycles after the trigger, then every switch cuts over at once.
//!
//! Packets remember the table epoch that routed their head flit, so a
//! cutover never splits an in-flight wormhole path; the previous epoch's
//! table is retained until the next cutover, by which time the fabric has
//! long drained (drain time is two orders of magnitude below the cutover
//! delay).

use crate::error::Error;
use crate::topology::Topology;

/// Additive cost applied to a channel whose link or endpoint switch is hot.
pub const DEFAULT_PENALTY: u32 = 100;
/// Cycles between synchronous advertisement rounds.
pub const EXCHANGE_CADENCE: u64 = 10;
/// Cycles from a reroute trigger until every switch adopts the new table.
pub const SWITCHOVER_DELAY: u64 = 600;

const INF: u32 = u32::MAX / 2;

/// An undirected routing channel between two switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub a: usize,
    pub b: usize,
    /// Wired link id, or `None` for a wireless hop.
    pub link: Option<usize>,
}

impl Channel {
    pub fn other(&self, s: usize) -> usize {
        if s == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Static graph view the protocol runs on: switches plus undirected channels.
#[derive(Debug, Clone)]
pub struct RoutingNetwork {
    n: usize,
    channels: Vec<Channel>,
    /// Per switch: (neighbor, channel id), sorted by neighbor index.
    adj: Vec<Vec<(usize, usize)>>,
}

impl RoutingNetwork {
    pub fn from_topology(topo: &Topology) -> RoutingNetwork {
        let n = topo.switch_count();
        let mut channels: Vec<Channel> = topo
            .links()
            .iter()
            .enumerate()
            .map(|(id, l)| Channel { a: l.a, b: l.b, link: Some(id) })
            .collect();
        let wi = topo.wireless_interfaces();
        for (i, &a) in wi.iter().enumerate() {
            for &b in &wi[i + 1..] {
                channels.push(Channel { a, b, link: None });
            }
        }
        RoutingNetwork::from_channels(n, channels)
    }

    /// Build from an explicit channel list (small hand-made test graphs).
    pub fn from_channels(n: usize, channels: Vec<Channel>) -> RoutingNetwork {
        let mut adj = vec![Vec::new(); n];
        for (id, ch) in channels.iter().enumerate() {
            assert!(ch.a < n && ch.b < n && ch.a != ch.b, "channel endpoints must be distinct switches");
            adj[ch.a].push((ch.b, id));
            adj[ch.b].push((ch.a, id));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        RoutingNetwork { n, channels, adj }
    }

    pub fn switch_count(&self) -> usize {
        self.n
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Per-channel cost under the given hot flags: base 1, plus `penalty`
    /// when the channel's link or either endpoint switch is flagged.
    /// Penalized, never removed — connectivity is preserved.
    pub fn channel_costs(&self, hot_switches: &[bool], hot_links: &[bool], penalty: u32) -> Vec<u32> {
        assert_eq!(hot_switches.len(), self.n, "one flag per switch");
        self.channels
            .iter()
            .map(|ch| {
                let link_hot = ch.link.map_or(false, |l| hot_links[l]);
                if link_hot || hot_switches[ch.a] || hot_switches[ch.b] {
                    1 + penalty
                } else {
                    1
                }
            })
            .collect()
    }
}

/// One forwarding table: per (switch, destination), the chosen next hop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardingTable {
    n: usize,
    /// Row-major `n x n`: channel id toward the destination, or `LOCAL`
    /// when switch == destination.
    next_channel: Vec<u16>,
    /// Converged distance estimates the table was derived from.
    dist: Vec<u32>,
}

const LOCAL: u16 = u16::MAX;

impl ForwardingTable {
    /// Channel id carrying traffic from `s` toward `d`; `None` at the
    /// destination itself.
    pub fn next_channel(&self, s: usize, d: usize) -> Option<usize> {
        let e = self.next_channel[s * self.n + d];
        (e != LOCAL).then_some(e as usize)
    }

    pub fn distance(&self, s: usize, d: usize) -> u32 {
        self.dist[s * self.n + d]
    }
}

/// Progress bookkeeping for one reroute episode.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRecord {
    pub trigger_cycle: u64,
    pub switchover_cycle: u64,
    /// Synchronous rounds until the working vectors stopped changing.
    pub rounds_to_fixpoint: u32,
    /// Cycles from trigger to the fixpoint round.
    pub cycles_to_fixpoint: u64,
    /// Whether the fixpoint was reached before the switchover took effect.
    pub converged_before_switchover: bool,
}

struct Reroute {
    trigger_cycle: u64,
    switchover_cycle: u64,
    rounds: u32,
    fixpoint_round: Option<u32>,
}

/// The distance-vector protocol state across all switches.
pub struct DistanceVectorRouting {
    net: RoutingNetwork,
    penalty: u32,
    /// Costs currently being converged over (set at trigger time).
    costs: Vec<u32>,
    /// Working distance vectors, row-major `n x n` (the "new" table in the
    /// making during a reroute).
    dist: Vec<u32>,
    /// Working next-hop choices paired with `dist`.
    next: Vec<u16>,
    /// Active table (current epoch) and the retired one (epoch - 1).
    active: ForwardingTable,
    retired: ForwardingTable,
    epoch: u64,
    reroute: Option<Reroute>,
    log: Vec<ConvergenceRecord>,
}

impl DistanceVectorRouting {
    /// Converge both tables at base costs.  Fails on a disconnected graph.
    pub fn new(net: RoutingNetwork) -> Result<DistanceVectorRouting, Error> {
        let n = net.switch_count();
        let costs = vec![1u32; net.channels().len()];
        let mut dvr = DistanceVectorRouting {
            penalty: DEFAULT_PENALTY,
            costs: costs.clone(),
            dist: Vec::new(),
            next: Vec::new(),
            active: ForwardingTable { n, next_channel: Vec::new(), dist: Vec::new() },
            retired: ForwardingTable { n, next_channel: Vec::new(), dist: Vec::new() },
            epoch: 0,
            reroute: None,
            log: Vec::new(),
            net,
        };
        dvr.cold_start();
        while dvr.exchange_round() {}
        if dvr.dist.iter().any(|&d| d >= INF) {
            return Err(Error::config("topology", "graph", "connected switch fabric"));
        }
        let table = dvr.working_table();
        dvr.active = table.clone();
        dvr.retired = table;
        Ok(dvr)
    }

    pub fn network(&self) -> &RoutingNetwork {
        &self.net
    }

    /// Table epoch stamped onto newly injected packets.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Next-hop lookup for a packet whose head was routed at `epoch`.
    /// Returns the channel to take from `s` toward `d`, or `None` to eject.
    pub fn lookup(&self, epoch: u64, s: usize, d: usize) -> Option<usize> {
        let table = if epoch == self.epoch {
            &self.active
        } else {
            debug_assert_eq!(epoch + 1, self.epoch, "packets never outlive two epochs");
            &self.retired
        };
        table.next_channel(s, d)
    }

    pub fn active_table(&self) -> &ForwardingTable {
        &self.active
    }

    pub fn reroute_in_progress(&self) -> bool {
        self.reroute.is_some()
    }

    pub fn records(&self) -> &[ConvergenceRecord] {
        &self.log
    }

    /// Begin a reroute episode: install penalized costs and restart the
    /// distance vectors from a cold start.  Returns false (and changes
    /// nothing) when no component is flagged.
    ///
    /// A trigger that lands while a previous episode is still converging
    /// restarts the episode at the merged view of the flags' costs; the old
    /// table keeps routing data either way.
    pub fn trigger_reroute(
        &mut self,
        hot_switches: &[bool],
        hot_links: &[bool],
        now_cycle: u64,
    ) -> bool {
        if !hot_switches.iter().any(|&h| h) && !hot_links.iter().any(|&h| h) {
            return false;
        }
        self.costs = self.net.channel_costs(hot_switches, hot_links, self.penalty);
        self.cold_start();
        self.reroute = Some(Reroute {
            trigger_cycle: now_cycle,
            switchover_cycle: now_cycle + SWITCHOVER_DELAY,
            rounds: 0,
            fixpoint_round: None,
        });
        true
    }

    /// Drive the protocol clock.  Call once per simulated cycle; performs an
    /// exchange round every `EXCHANGE_CADENCE` cycles of an active episode
    /// and the switchover once the delay elapses.
    pub fn on_cycle(&mut self, cycle: u64) {
        let Some(r) = &self.reroute else { return };
        let trigger = r.trigger_cycle;
        let switchover = r.switchover_cycle;
        if cycle > trigger && (cycle - trigger) % EXCHANGE_CADENCE == 0 && cycle < switchover {
            let changed = self.exchange_round();
            let r = self.reroute.as_mut().expect("episode checked above");
            r.rounds += 1;
            if !changed && r.fixpoint_round.is_none() {
                // the round that confirms the fixpoint is the first with no
                // change; the vectors stopped changing one round earlier
                r.fixpoint_round = Some(r.rounds.saturating_sub(1));
            }
        }
        if cycle >= switchover {
            self.switchover(cycle);
        }
    }

    /// Adopt the converged table: the new table becomes active for packets
    /// of the next epoch, and the previous active table is retained for
    /// in-flight lookups.
    pub fn switchover(&mut self, now_cycle: u64) {
        let Some(r) = self.reroute.take() else { return };
        debug_assert!(now_cycle >= r.switchover_cycle, "switchover before its scheduled cycle");
        // settle any remaining relaxation so the record reflects the truth;
        // in a healthy run the fixpoint long predates the switchover
        let mut extra_rounds = r.rounds;
        let mut fixpoint = r.fixpoint_round;
        if fixpoint.is_none() {
            while self.exchange_round() {
                extra_rounds += 1;
            }
            fixpoint = Some(extra_rounds);
        }
        let rounds_to_fixpoint = fixpoint.expect("fixpoint settled above");
        let converged_before = r.fixpoint_round.is_some();
        self.log.push(ConvergenceRecord {
            trigger_cycle: r.trigger_cycle,
            switchover_cycle: r.switchover_cycle,
            rounds_to_fixpoint,
            cycles_to_fixpoint: rounds_to_fixpoint as u64 * EXCHANGE_CADENCE,
            converged_before_switchover: converged_before,
        });
        let adopted = self.working_table();
        self.retired = std::mem::replace(&mut self.active, adopted);
        self.epoch += 1;
    }

    /// Reset working vectors to the cold-start state: each switch knows only
    /// itself; everything else is infinite.
    fn cold_start(&mut self) {
        let n = self.net.switch_count();
        self.dist = vec![INF; n * n];
        self.next = vec![LOCAL; n * n];
        for s in 0..n {
            self.dist[s * n + s] = 0;
        }
    }

    /// One synchronous advertisement round: every switch relaxes against the
    /// vectors its neighbors held at the start of the round.  Returns true
    /// if any estimate changed.  Estimates never increase.
    pub fn exchange_round(&mut self) -> bool {
        let n = self.net.switch_count();
        let prev = self.dist.clone();
        let mut changed = false;
        for s in 0..n {
            for &(nb, chan) in &self.net.adj[s] {
                let c = self.costs[chan];
                let nb_row = &prev[nb * n..(nb + 1) * n];
                for d in 0..n {
                    if nb_row[d] >= INF {
                        continue;
                    }
                    let cand = c + nb_row[d];
                    // strict improvement only: adjacency is sorted by
                    // neighbor index, so ties resolve to the lowest index
                    if cand < self.dist[s * n + d] {
                        self.dist[s * n + d] = cand;
                        self.next[s * n + d] = chan as u16;
                        changed = true;
                    }
                }
            }
        }
        changed
    }

    fn working_table(&self) -> ForwardingTable {
        ForwardingTable {
            n: self.net.switch_count(),
            next_channel: self.next.clone(),
            dist: self.dist.clone(),
        }
    }

    /// Converged working distance (for tests and diagnostics).
    pub fn working_distance(&self, s: usize, d: usize) -> u32 {
        self.dist[s * self.net.switch_count() + d]
    }

    /// Per-destination routes of the active table in structured text.
    pub fn dump_routes(&self, dest: usize) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let n = self.net.switch_count();
        writeln!(out, "routes to switch {dest} (epoch {})", self.epoch).unwrap();
        for s in 0..n {
            match self.active.next_channel(s, dest) {
                None => writeln!(out, "  {s:>3}: local").unwrap(),
                Some(ch) => {
                    let c = self.net.channels()[ch];
                    let via = if c.link.is_some() { "wired" } else { "wireless" };
                    writeln!(
                        out,
                        "  {s:>3}: -> {:>3} ({via}, dist {})",
                        c.other(s),
                        self.active.distance(s, dest)
                    )
                    .unwrap()
                }
            }
        }
        out
    }
}

/// Exact all-pairs shortest paths by Dijkstra, used as the reference the
/// protocol must agree with.  Parent choices are derived after the fact as
/// the lowest-index neighbor on an optimal path, so the result is
/// deterministic regardless of heap order.
pub struct DijkstraOracle {
    n: usize,
    pub dist: Vec<u32>,
    /// Row-major per destination: parent[d * n + s] = next switch from `s`
    /// toward `d` (s itself at the destination).
    pub next_toward: Vec<usize>,
}

impl DijkstraOracle {
    pub fn solve(net: &RoutingNetwork, costs: &[u32]) -> DijkstraOracle {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        assert_eq!(costs.len(), net.channels().len(), "one cost per channel");
        let n = net.switch_count();
        let mut dist = vec![INF; n * n];
        let mut next_toward = vec![usize::MAX; n * n];
        for d in 0..n {
            let row = &mut dist[d * n..(d + 1) * n];
            // costs are symmetric, so a backward tree from `d` gives the
            // forward distances to `d`
            let mut heap = BinaryHeap::new();
            row[d] = 0;
            heap.push((Reverse(0u32), d));
            while let Some((Reverse(c), s)) = heap.pop() {
                if c > row[s] {
                    continue;
                }
                for &(nb, chan) in &net.adj[s] {
                    let cand = c + costs[chan];
                    if cand < row[nb] {
                        row[nb] = cand;
                        heap.push((Reverse(cand), nb));
                    }
                }
            }
            for s in 0..n {
                if s == d {
                    next_toward[d * n + s] = s;
                    continue;
                }
                // lowest-index neighbor sitting on an optimal path
                for &(nb, chan) in &net.adj[s] {
                    if row[s] == costs[chan].saturating_add(row[nb]) {
                        next_toward[d * n + s] = nb;
                        break;
                    }
                }
            }
        }
        DijkstraOracle { n, dist, next_toward }
    }

    pub fn distance(&self, s: usize, d: usize) -> u32 {
        self.dist[d * self.n + s]
    }

    pub fn next_toward(&self, s: usize, d: usize) -> usize {
        self.next_toward[d * self.n + s]
    }

    /// Hop count along the oracle's chosen path from `s` to `d`.
    pub fn path_hops(&self, s: usize, d: usize) -> usize {
        let mut hops = 0;
        let mut at = s;
        while at != d {
            at = self.next_toward(at, d);
            hops += 1;
            assert!(hops <= self.n, "oracle path must terminate");
        }
        hops
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn base_dvr(topo: &Topology) -> DistanceVectorRouting {
        DistanceVectorRouting::new(RoutingNetwork::from_topology(topo)).unwrap()
    }

    /// Minimum cost over every simple path, by exhaustive DFS.  Only viable
    /// on small graphs; this is the oracle the Dijkstra oracle must match.
    fn brute_force_min_cost(net: &RoutingNetwork, costs: &[u32], s: usize, d: usize) -> u32 {
        fn dfs(
            net: &RoutingNetwork,
            costs: &[u32],
            at: usize,
            d: usize,
            seen: &mut Vec<bool>,
            acc: u32,
            best: &mut u32,
        ) {
            if at == d {
                *best = (*best).min(acc);
                return;
            }
            if acc >= *best {
                return; // cannot improve
            }
            seen[at] = true;
            for &(nb, chan) in &net.adj[at] {
                if !seen[nb] {
                    dfs(net, costs, nb, d, seen, acc + costs[chan], best);
                }
            }
            seen[at] = false;
        }
        let mut best = INF;
        let mut seen = vec![false; net.switch_count()];
        dfs(net, costs, s, d, &mut seen, 0, &mut best);
        best
    }

    #[test]
    fn base_routes_on_2x2_reach_the_diagonal_in_two_hops() {
        let topo = Topology::build(2, 2, 5.0, 5.0, 0).unwrap();
        let dvr = base_dvr(&topo);
        assert_eq!(dvr.active_table().distance(0, 3), 2);
        assert_eq!(dvr.active_table().distance(3, 0), 2);
    }

    #[test]
    fn corner_interfaces_make_opposite_corners_adjacent() {
        let topo = Topology::with_wireless_at(8, 8, 20.0, 20.0, &[0, 7, 56, 63]).unwrap();
        let dvr = base_dvr(&topo);
        assert_eq!(dvr.active_table().distance(0, 63), 1, "one wireless hop");
        let ch = dvr.active_table().next_channel(0, 63).unwrap();
        assert_eq!(dvr.network().channels()[ch].link, None, "route takes the wireless channel");
    }

    #[test]
    fn self_routes_are_local() {
        let topo = Topology::default_8x8();
        let dvr = base_dvr(&topo);
        for s in 0..topo.switch_count() {
            assert_eq!(dvr.active_table().distance(s, s), 0);
            assert_eq!(dvr.active_table().next_channel(s, s), None);
        }
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        // two switches, no channel between them
        let net = RoutingNetwork::from_channels(2, vec![]);
        assert!(DistanceVectorRouting::new(net).is_err());
    }

    #[test]
    fn all_zero_status_is_a_no_op() {
        let topo = Topology::default_8x8();
        let mut dvr = base_dvr(&topo);
        let before = dvr.active_table().clone();
        let fired = dvr.trigger_reroute(
            &vec![false; topo.switch_count()],
            &vec![false; topo.link_count()],
            1_000,
        );
        assert!(!fired);
        assert!(!dvr.reroute_in_progress());
        assert_eq!(*dvr.active_table(), before);
    }

    /// Drive a full episode to completion and return the converged table.
    fn run_episode(
        dvr: &mut DistanceVectorRouting,
        hot_sw: &[bool],
        hot_ln: &[bool],
        trigger: u64,
    ) {
        assert!(dvr.trigger_reroute(hot_sw, hot_ln, trigger));
        for cycle in trigger..=trigger + SWITCHOVER_DELAY {
            dvr.on_cycle(cycle);
        }
        assert!(!dvr.reroute_in_progress());
    }

    #[test]
    fn hot_link_with_an_alternative_is_avoided_everywhere() {
        let topo = Topology::default_8x8();
        let mut dvr = base_dvr(&topo);
        let hot_link = topo.link_between(27, 28).unwrap();
        let mut hot_ln = vec![false; topo.link_count()];
        hot_ln[hot_link] = true;
        let hot_sw = vec![false; topo.switch_count()];
        run_episode(&mut dvr, &hot_sw, &hot_ln, 0);

        let costs = dvr.network().channel_costs(&hot_sw, &hot_ln, DEFAULT_PENALTY);
        let oracle = DijkstraOracle::solve(dvr.network(), &costs);
        let n = topo.switch_count();
        for s in 0..n {
            for d in 0..n {
                assert_eq!(
                    dvr.active_table().distance(s, d),
                    oracle.distance(s, d),
                    "distance mismatch {s}->{d}"
                );
                // the mesh always offers a detour, so no route pays the
                // penalty and no pair forwards over the hot link
                assert!(dvr.active_table().distance(s, d) < 1 + DEFAULT_PENALTY);
                if let Some(ch) = dvr.active_table().next_channel(s, d) {
                    assert_ne!(
                        dvr.network().channels()[ch].link,
                        Some(hot_link),
                        "route {s}->{d} must avoid the hot link"
                    );
                }
            }
        }
    }

    #[test]
    fn hot_cut_channel_keeps_connectivity_at_penalized_cost() {
        // a bare 2-switch chain: the only channel is a cut element
        let net = RoutingNetwork::from_channels(2, vec![Channel { a: 0, b: 1, link: Some(0) }]);
        let mut dvr = DistanceVectorRouting::new(net).unwrap();
        run_episode(&mut dvr, &[false, false], &[true], 0);
        assert_eq!(dvr.active_table().distance(0, 1), 1 + DEFAULT_PENALTY);
        assert_eq!(dvr.active_table().next_channel(0, 1), Some(0), "path unchanged");
    }

    #[test]
    fn line_of_five_converges_within_diameter_rounds() {
        let channels = (0..4).map(|i| Channel { a: i, b: i + 1, link: Some(i) }).collect();
        let net = RoutingNetwork::from_channels(5, channels);
        let mut dvr = DistanceVectorRouting::new(net).unwrap();
        let mut hot_ln = vec![false; 4];
        hot_ln[0] = true; // cost change at one end
        assert!(dvr.trigger_reroute(&[false; 5], &hot_ln, 0));
        let mut rounds = 0;
        while dvr.exchange_round() {
            rounds += 1;
        }
        assert!(rounds <= 4, "line of 5 must converge within diameter rounds, took {rounds}");
    }

    #[test]
    fn converged_state_is_a_fixpoint() {
        let topo = Topology::default_8x8();
        let mut dvr = base_dvr(&topo);
        let mut hot_sw = vec![false; topo.switch_count()];
        hot_sw[27] = true;
        run_episode(&mut dvr, &hot_sw, &vec![false; topo.link_count()], 0);
        assert!(!dvr.exchange_round(), "another round after convergence must change nothing");
    }

    #[test]
    fn random_penalties_match_dijkstra_and_form_trees() {
        let topo = Topology::default_8x8();
        let n = topo.switch_count();
        let mut rng = crate::seed::subsystem_rng(0xD157, "routing-oracle-test");
        for trial in 0..25 {
            let mut dvr = base_dvr(&topo);
            let hot_sw: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.08)).collect();
            let mut hot_ln: Vec<bool> =
                (0..topo.link_count()).map(|_| rng.gen_bool(0.08)).collect();
            if !hot_sw.iter().chain(hot_ln.iter()).any(|&h| h) {
                hot_ln[trial] = true;
            }
            run_episode(&mut dvr, &hot_sw, &hot_ln, 0);

            let costs = dvr.network().channel_costs(&hot_sw, &hot_ln, DEFAULT_PENALTY);
            let oracle = DijkstraOracle::solve(dvr.network(), &costs);
            for s in 0..n {
                for d in 0..n {
                    assert_eq!(
                        dvr.active_table().distance(s, d),
                        oracle.distance(s, d),
                        "trial {trial}: distance mismatch {s}->{d}"
                    );
                    if let Some(ch) = dvr.active_table().next_channel(s, d) {
                        let nb = dvr.network().channels()[ch].other(s);
                        assert_eq!(
                            dvr.active_table().distance(s, d),
                            costs[ch] + oracle.distance(nb, d),
                            "trial {trial}: next hop of {s}->{d} must sit on a shortest path"
                        );
                    }
                }
            }
            // per-destination next-hop graph is a tree rooted at the
            // destination: following next hops must reach d without repeats
            for d in 0..n {
                for s in 0..n {
                    let mut at = s;
                    let mut hops = 0;
                    while at != d {
                        let ch = dvr.active_table().next_channel(at, d).expect("route exists");
                        at = dvr.network().channels()[ch].other(at);
                        hops += 1;
                        assert!(hops <= n, "trial {trial}: cycle in next-hop graph toward {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn relaxation_is_monotone_and_bounded_by_oracle_path_depth() {
        let topo = Topology::default_8x8();
        let n = topo.switch_count();
        let mut rng = crate::seed::subsystem_rng(0xD157, "routing-monotone-test");
        for _ in 0..5 {
            let mut dvr = base_dvr(&topo);
            let hot_sw: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.1)).collect();
            let hot_ln: Vec<bool> = (0..topo.link_count()).map(|_| rng.gen_bool(0.1)).collect();
            if !dvr.trigger_reroute(&hot_sw, &hot_ln, 0) {
                continue;
            }
            let costs = dvr.network().channel_costs(&hot_sw, &hot_ln, DEFAULT_PENALTY);
            let oracle = DijkstraOracle::solve(dvr.network(), &costs);
            let max_depth = (0..n)
                .flat_map(|s| (0..n).map(move |d| (s, d)))
                .map(|(s, d)| oracle.path_hops(s, d))
                .max()
                .unwrap();
            let mut prev: Vec<u32> = (0..n * n)
                .map(|i| dvr.working_distance(i / n, i % n))
                .collect();
            let mut rounds = 0;
            while dvr.exchange_round() {
                rounds += 1;
                for s in 0..n {
                    for d in 0..n {
                        let now = dvr.working_distance(s, d);
                        assert!(now <= prev[s * n + d], "estimates must never increase");
                        prev[s * n + d] = now;
                    }
                }
                assert!(rounds <= max_depth + 1, "fixpoint within oracle path depth");
            }
        }
    }

    #[test]
    fn dijkstra_oracle_matches_brute_force_on_4x4() {
        let topo = Topology::build(4, 4, 10.0, 10.0, 2).unwrap();
        let net = RoutingNetwork::from_topology(&topo);
        let mut rng = crate::seed::subsystem_rng(0xD157, "dijkstra-brute-force");
        for _ in 0..5 {
            let costs: Vec<u32> = net.channels().iter().map(|_| rng.gen_range(1..=5)).collect();
            let oracle = DijkstraOracle::solve(&net, &costs);
            for &(s, d) in &[(0usize, 15usize), (3, 12), (5, 10), (0, 1), (14, 2)] {
                assert_eq!(
                    oracle.distance(s, d),
                    brute_force_min_cost(&net, &costs, s, d),
                    "oracle must equal exhaustive path enumeration for {s}->{d}"
                );
            }
        }
    }

    #[test]
    fn scaling_costs_scales_distances_and_keeps_trees() {
        let topo = Topology::build(4, 4, 10.0, 10.0, 2).unwrap();
        let net = RoutingNetwork::from_topology(&topo);
        let mut rng = crate::seed::subsystem_rng(0xD157, "dijkstra-scaling");
        let costs: Vec<u32> = net.channels().iter().map(|_| rng.gen_range(1..=7)).collect();
        let scaled: Vec<u32> = costs.iter().map(|&c| c * 10).collect();
        let a = DijkstraOracle::solve(&net, &costs);
        let b = DijkstraOracle::solve(&net, &scaled);
        for s in 0..net.switch_count() {
            for d in 0..net.switch_count() {
                assert_eq!(a.distance(s, d) * 10, b.distance(s, d));
                assert_eq!(a.next_toward(s, d), b.next_toward(s, d), "same trees");
            }
        }
    }

    #[test]
    fn unit_cost_oracle_matches_precomputed_hop_matrix() {
        let topo = Topology::default_8x8();
        let net = RoutingNetwork::from_topology(&topo);
        let costs = vec![1u32; net.channels().len()];
        let oracle = DijkstraOracle::solve(&net, &costs);
        for s in 0..topo.switch_count() {
            for d in 0..topo.switch_count() {
                assert_eq!(oracle.distance(s, d), topo.hop_distance(s, d), "{s}->{d}");
            }
        }
    }

    #[test]
    fn old_table_routes_until_switchover_then_new_takes_over() {
        let topo = Topology::default_8x8();
        let mut dvr = base_dvr(&topo);
        let base_table = dvr.active_table().clone();
        let mut hot_sw = vec![false; topo.switch_count()];
        hot_sw[35] = true;
        assert!(dvr.trigger_reroute(&hot_sw, &vec![false; topo.link_count()], 100));
        let epoch_before = dvr.epoch();
        for cycle in 100..100 + SWITCHOVER_DELAY {
            dvr.on_cycle(cycle);
            assert_eq!(*dvr.active_table(), base_table, "old table active during convergence");
            assert_eq!(dvr.epoch(), epoch_before);
        }
        dvr.on_cycle(100 + SWITCHOVER_DELAY);
        assert_eq!(dvr.epoch(), epoch_before + 1);
        assert_ne!(*dvr.active_table(), base_table, "new table active after switchover");
        // retired table still serves the previous epoch
        let s = 34;
        assert_eq!(
            dvr.lookup(epoch_before, s, 36),
            base_table.next_channel(s, 36),
            "in-flight packets keep their head's table"
        );
        let rec = dvr.records().last().unwrap();
        assert!(rec.converged_before_switchover, "600 cycles must suffice on the default fabric");
        assert!(rec.cycles_to_fixpoint < SWITCHOVER_DELAY);
    }

    #[test]
    fn second_trigger_starts_from_the_first_converged_table() {
        let topo = Topology::default_8x8();
        let mut dvr = base_dvr(&topo);
        let mut hot_sw = vec![false; topo.switch_count()];
        hot_sw[27] = true;
        run_episode(&mut dvr, &hot_sw, &vec![false; topo.link_count()], 0);
        let first = dvr.active_table().clone();

        // second episode with no flags set anywhere near the first
        let mut hot_sw2 = vec![false; topo.switch_count()];
        hot_sw2[63] = true;
        assert!(dvr.trigger_reroute(&hot_sw2, &vec![false; topo.link_count()], 10_000));
        assert_eq!(*dvr.active_table(), first, "first table routes during the second episode");
        for cycle in 10_000..=10_000 + SWITCHOVER_DELAY {
            dvr.on_cycle(cycle);
        }
        assert_eq!(dvr.records().len(), 2);
        // the retired table is now the first episode's result
        assert_eq!(dvr.lookup(1, 5, 60), first.next_channel(5, 60));
    }

    #[test]
    fn every_single_component_penalty_converges_well_inside_the_budget() {
        // spot-check a representative sample here; the full sweep runs in
        // the acceptance suite
        let topo = Topology::default_8x8();
        let mut worst = 0;
        for flagged in [0usize, 7, 27, 35, 56, 63] {
            let mut dvr = base_dvr(&topo);
            let mut hot_sw = vec![false; topo.switch_count()];
            hot_sw[flagged] = true;
            run_episode(&mut dvr, &hot_sw, &vec![false; topo.link_count()], 0);
            let rec = dvr.records().last().unwrap();
            assert!(
                rec.converged_before_switchover && rec.cycles_to_fixpoint < SWITCHOVER_DELAY,
                "switch {flagged}: {} cycles",
                rec.cycles_to_fixpoint
            );
            worst = worst.max(rec.cycles_to_fixpoint);
        }
        assert!(worst > 0, "at least one episode must do real work");
    }
}
