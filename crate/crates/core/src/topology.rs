//! Fabric layout: a W x H switch mesh (one core per switch), the wired
//! links between adjacent switches, and a small set of wireless interface
//! (WI) switches that share a single broadcast channel.
//!
//! Everything downstream keys off the flattened component index space:
//! cores come first, then swithces, then links, so the default 8x8 fabric
//! has indices 0..64 (cores), 64..128 (switches), 128..240 (links).  That
//! ordering is also the layout of utilization vectors, thermal state and
//! the predictor's output streams, so it must never change silently.
//!
//! Wireless interfaces are placed greedily: one at a time, each step picks
//! the switch that minimizes the mean wired hop distance from every switch
//! to its nearest interface (ties -> lowest switch index).  For k = 1 this
//! reduces to the grid 1-median, i.e. a center switch.

use crate::error::Error;

/// What a flattened component index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Core,
    Switch,
    Link,
}

/// A component of the fabric, addressed by kind plus per-kind index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComponentId {
    pub kind: ComponentKind,
    pub index: usize,
}

impl ComponentId {
    pub fn core(index: usize) -> Self {
        ComponentId { kind: ComponentKind::Core, index }
    }
    pub fn switch(index: usize) -> Self {
        ComponentId { kind: ComponentKind::Switch, index }
    }
    pub fn link(index: usize) -> Self {
        ComponentId { kind: ComponentKind::Link, index }
    }
}

/// One bidirectional wired link between two adjacent switches (`a < b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub length_mm: f64,
}

/// How a routing neighbor is reached: over a wired mesh link or over the
/// shared wireless channel (WI to WI, counted as one hop).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Wired { link: usize },
    Wireless,
}

/// Adjacency entry used by routing: neighbor switch plus the channel type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteNeighbor {
    pub switch: usize,
    pub channel: ChannelKind,
}

/// Mesh directions in port order (the local core port is port 0, wireless
/// port comes after West).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

pub const DIRECTIONS: [Direction; 4] = [
    Direction::North,
    Direction::East,
    Direction::South,
    Direction::West,
];

#[derive(Debug, Clone)]
pub struct Topology {
    pub width: usize,
    pub height: usize,
    pub die_w_mm: f64,
    pub die_h_mm: f64,
    links: Vec<Link>,
    /// Sorted switch indices that carry a wireless interface.
    wi: Vec<usize>,
    is_wi: Vec<bool>,
    /// Wired neighbors per switch with their link index, sorted by
    /// neighbor switch index (ties cannot occur in a grid).
    wired: Vec<Vec<(usize, usize)>>,
    /// `route_neighbors` per switch: wired plus wireless peers, sorted by
    /// neighbor switch index.  Kept precomputed because routing relaxation
    /// walks it constantly.
    route_adj: Vec<Vec<RouteNeighbor>>,
    /// Augmented hop-distance matrix (wired mesh + WI clique), row-major
    /// `switch_count x switch_count`.
    hops: Vec<u16>,
}

impl Topology {
    /// Build a fabric and place `wireless_count` interfaces greedily.
    pub fn build(
        width: usize,
        height: usize,
        die_w_mm: f64,
        die_h_mm: f64,
        wireless_count: usize,
    ) -> Result<Topology, Error> {
        if width < 2 {
            return Err(Error::config("topology.grid_w", width, ">= 2"));
        }
        if height < 2 {
            return Err(Error::config("topology.grid_h", height, ">= 2"));
        }
        if !(die_w_mm > 0.0) || !(die_h_mm > 0.0) {
            return Err(Error::config("topology.die_w_mm", die_w_mm, "> 0"));
        }
        let n = width * height;
        if wireless_count > n {
            return Err(Error::config(
                "topology.wireless_interfaces",
                wireless_count,
                "<= switch count",
            ));
        }

        let pitch_x = die_w_mm / width as f64;
        let pitch_y = die_h_mm / height as f64;

        // Row-major link enumeration: for every switch, east link first,
        // then south link.  Gives the standard 2WH - W - H count.
        let mut links = Vec::with_capacity(2 * n - width - height);
        let mut wired = vec![Vec::with_capacity(4); n];
        for y in 0..height {
            for x in 0..width {
                let s = y * width + x;
                if x + 1 < width {
                    let id = links.len();
                    links.push(Link { a: s, b: s + 1, length_mm: pitch_x });
                    wired[s].push((s + 1, id));
                    wired[s + 1].push((s, id));
                }
                if y + 1 < height {
                    let id = links.len();
                    links.push(Link { a: s, b: s + width, length_mm: pitch_y });
                    wired[s].push((s + width, id));
                    wired[s + width].push((s, id));
                }
            }
        }
        for adj in &mut wired {
            adj.sort_unstable_by_key(|&(nb, _)| nb);
        }

        let mut topo = Topology {
            width,
            height,
            die_w_mm,
            die_h_mm,
            links,
            wi: Vec::new(),
            is_wi: vec![false; n],
            wired,
            route_adj: Vec::new(),
            hops: Vec::new(),
        };
        topo.place_wireless_overlay(wireless_count);
        Ok(topo)
    }

    /// Default fabric: 8x8 mesh on a 20mm x 20mm die with 4 interfaces.
    pub fn default_8x8() -> Topology {
        Topology::build(8, 8, 20.0, 20.0, 4).expect("default fabric parameters are valid")
    }

    /// Build a fabric with interfaces at explicit switch indices instead of
    /// the greedy placement.
    pub fn with_wireless_at(
        width: usize,
        height: usize,
        die_w_mm: f64,
        die_h_mm: f64,
        wireless: &[usize],
    ) -> Result<Topology, Error> {
        let mut topo = Topology::build(width, height, die_w_mm, die_h_mm, 0)?;
        let n = topo.switch_count();
        let mut chosen = wireless.to_vec();
        chosen.sort_unstable();
        chosen.dedup();
        if chosen.len() != wireless.len() {
            return Err(Error::config(
                "topology.wireless_interfaces",
                format!("{wireless:?}"),
                "unique switch indices",
            ));
        }
        if let Some(&bad) = chosen.iter().find(|&&w| w >= n) {
            return Err(Error::config("topology.wireless_interfaces", bad, "< switch count"));
        }
        topo.install_wireless(chosen);
        Ok(topo)
    }

    /// Greedy interface placement (see module docs).  Recomputes the
    /// routing adjacency and the augmented hop matrix.
    fn place_wireless_overlay(&mut self, count: usize) {
        let n = self.switch_count();
        let wired_dist = self.all_pairs_wired();

        let mut chosen: Vec<usize> = Vec::with_capacity(count);
        let mut nearest = vec![u32::MAX; n]; // distance to nearest chosen WI
        for _ in 0..count {
            let mut best: Option<(u64, usize)> = None;
            for cand in 0..n {
                if chosen.contains(&cand) {
                    continue;
                }
                let total: u64 = (0..n)
                    .map(|s| nearest[s].min(wired_dist[cand * n + s]) as u64)
                    .sum();
                // Strict less-than keeps the lowest candidate index on ties.
                if best.map_or(true, |(t, _)| total < t) {
                    best = Some((total, cand));
                }
            }
            let (_, pick) = best.expect("candidate set is never empty");
            chosen.push(pick);
            for s in 0..n {
                nearest[s] = nearest[s].min(wired_dist[pick * n + s]);
            }
        }
        chosen.sort_unstable();
        self.install_wireless(chosen);
    }

    /// Install a sorted interface set and rebuild the derived structures.
    fn install_wireless(&mut self, chosen: Vec<usize>) {
        self.is_wi = vec![false; self.switch_count()];
        for &w in &chosen {
            self.is_wi[w] = true;
        }
        self.wi = chosen;
        self.route_adj = self.build_route_adj();
        self.hops = self.all_pairs_augmented();
    }

    fn build_route_adj(&self) -> Vec<Vec<RouteNeighbor>> {
        (0..self.switch_count())
            .map(|s| {
                let mut adj: Vec<RouteNeighbor> = self.wired[s]
                    .iter()
                    .map(|&(nb, link)| RouteNeighbor { switch: nb, channel: ChannelKind::Wired { link } })
                    .collect();
                if self.is_wi[s] {
                    for &peer in &self.wi {
                        if peer != s {
                            adj.push(RouteNeighbor { switch: peer, channel: ChannelKind::Wireless });
                        }
                    }
                }
                adj.sort_unstable_by_key(|nb| nb.switch);
                adj
            })
            .collect()
    }

    /// All-pairs wired BFS distances (no wireless), row-major.
    fn all_pairs_wired(&self) -> Vec<u32> {
        let n = self.switch_count();
        let mut dist = vec![u32::MAX; n * n];
        let mut queue = std::collections::VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.clear();
            queue.push_back(src);
            while let Some(s) = queue.pop_front() {
                let d = row[s];
                for &(nb, _) in &self.wired[s] {
                    if row[nb] == u32::MAX {
                        row[nb] = d + 1;
                        queue.push_back(nb);
                    }
                }
            }
        }
        dist
    }

    /// All-pairs BFS over the augmented graph (wired + WI clique).
    fn all_pairs_augmented(&self) -> Vec<u16> {
        let n = self.switch_count();
        let mut dist = vec![u16::MAX; n * n];
        let mut queue = std::collections::VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.clear();
            queue.push_back(src);
            while let Some(s) = queue.pop_front() {
                let d = row[s];
                for nb in &self.route_adj[s] {
                    if row[nb.switch] == u16::MAX {
                        row[nb.switch] = d + 1;
                        queue.push_back(nb.switch);
                    }
                }
            }
        }
        dist
    }

    pub fn switch_count(&self) -> usize {
        self.width * self.height
    }

    pub fn core_count(&self) -> usize {
        self.switch_count()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Total thermally modelled components: cores + switches + links.
    pub fn component_count(&self) -> usize {
        2 * self.switch_count() + self.link_count()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: usize) -> Link {
        self.links[id]
    }

    /// Sorted switch indices carrying a wireless interface.
    pub fn wireless_interfaces(&self) -> &[usize] {
        &self.wi
    }

    pub fn is_wireless_interface(&self, switch: usize) -> bool {
        self.is_wi[switch]
    }

    /// Wired neighbors of `switch` as `(neighbor, link)`, sorted by
    /// neighbor index.
    pub fn wired_neighbors(&self, switch: usize) -> &[(usize, usize)] {
        &self.wired[switch]
    }

    /// Routing adjacency: wired neighbors plus (for a WI) every other WI,
    /// sorted by neighbor switch index.
    pub fn route_neighbors(&self, switch: usize) -> &[RouteNeighbor] {
        &self.route_adj[switch]
    }

    /// Neighbor switch in a mesh direction, if inside the grid.
    pub fn neighbor(&self, switch: usize, dir: Direction) -> Option<usize> {
        let (x, y) = (switch % self.width, switch / self.width);
        match dir {
            Direction::North => (y > 0).then(|| switch - self.width),
            Direction::East => (x + 1 < self.width).then(|| switch + 1),
            Direction::South => (y + 1 < self.height).then(|| switch + self.width),
            Direction::West => (x > 0).then(|| switch - 1),
        }
    }

    /// Wired link id between two adjacent switches.
    pub fn link_between(&self, a: usize, b: usize) -> Option<usize> {
        self.wired[a].iter().find(|&&(nb, _)| nb == b).map(|&(_, id)| id)
    }

    /// Hop distance in the augmented graph: wired mesh hops, with any
    /// WI-to-WI transfer counting as a single hop.
    pub fn hop_distance(&self, a: usize, b: usize) -> u32 {
        self.hops[a * self.switch_count() + b] as u32
    }

    /// Mean augmented hop distance over all ordered switch pairs (a != b).
    pub fn average_hop_distance(&self) -> f64 {
        let n = self.switch_count();
        let total: u64 = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| self.hop_distance(a, b) as u64)
            .sum();
        total as f64 / (n * (n - 1)) as f64
    }

    /// Physical center of a switch (and its core) on the die, in mm.
    pub fn switch_position_mm(&self, switch: usize) -> (f64, f64) {
        let (x, y) = (switch % self.width, switch / self.width);
        let pitch_x = self.die_w_mm / self.width as f64;
        let pitch_y = self.die_h_mm / self.height as f64;
        ((x as f64 + 0.5) * pitch_x, (y as f64 + 0.5) * pitch_y)
    }

    /// Flattened global component index: cores, then switches, then links.
    pub fn flatten(&self, id: ComponentId) -> usize {
        let n = self.switch_count();
        match id.kind {
            ComponentKind::Core => {
                debug_assert!(id.index < n);
                id.index
            }
            ComponentKind::Switch => {
                debug_assert!(id.index < n);
                n + id.index
            }
            ComponentKind::Link => {
                debug_assert!(id.index < self.link_count());
                2 * n + id.index
            }
        }
    }

    pub fn unflatten(&self, flat: usize) -> ComponentId {
        let n = self.switch_count();
        if flat < n {
            ComponentId::core(flat)
        } else if flat < 2 * n {
            ComponentId::switch(flat - n)
        } else {
            debug_assert!(flat < self.component_count());
            ComponentId::link(flat - 2 * n)
        }
    }
}
