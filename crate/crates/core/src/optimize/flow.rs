//! Integer flow with lower bounds.
//!
//! Layout per agent `i`: a supply node `a_i` that must ship `|Ω_i|` units,
//! split over an attractive tier `α_i` and a remaining tier `β_i`. Tier
//! nodes feed unit edges into the objects the agent may receive; every
//! object node demands exactly one unit. A feasible flow is a matching.
//!
//! Lower bounds are handled directly: flows start at their lower bound,
//! node imbalances are repaired with unit augmenting paths, and residual
//! backward capacity is `flow - lower`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use super::{AgentConstraint, WelfareConstraints};
use crate::model::{AgentId, Instance, Matching, ObjectId, ObjectSet};

#[derive(Clone, Debug)]
struct Edge {
    from: usize,
    to: usize,
    lower: i64,
    cap: i64,
    flow: i64,
}

/// One step of a residual path: edge id and whether it is used forward.
type Step = (usize, bool);

#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    num_agents: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    supply: Vec<i64>,
    /// Per agent: edge `a_i -> α_i` and edge `a_i -> β_i`.
    tiers: Vec<(usize, usize)>,
    /// Per agent: `(object, tier -> object edge)`.
    object_edges: Vec<Vec<(ObjectId, usize)>>,
    queries: usize,
}

impl FlowNetwork {
    pub(crate) fn new(instance: &Instance, constraints: &WelfareConstraints) -> Self {
        let n = instance.num_agents();
        let nodes = 3 * n + instance.num_objects();
        let mut net = FlowNetwork {
            num_agents: n,
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            supply: vec![0; nodes],
            tiers: Vec::with_capacity(n),
            object_edges: Vec::with_capacity(n),
            queries: 0,
        };
        for a in instance.agents() {
            let c: &AgentConstraint = constraints.agent(a);
            let size = instance.endowment_size(a) as i64;
            net.supply[3 * a.0] = size;
            let lo = c.exact_attractive.unwrap_or(c.min_attractive) as i64;
            let hi = c.exact_attractive.map_or(size, |k| k as i64);
            let alpha = net.add_edge(3 * a.0, 3 * a.0 + 1, lo, hi);
            let beta = net.add_edge(3 * a.0, 3 * a.0 + 2, 0, size);
            net.tiers.push((alpha, beta));
            let mut objs = Vec::with_capacity(c.allowed.len());
            for &o in &c.allowed {
                let tier = if c.attractive.contains(&o) { 3 * a.0 + 1 } else { 3 * a.0 + 2 };
                objs.push((o, net.add_edge(tier, 3 * n + o.0, 0, 1)));
            }
            net.object_edges.push(objs);
        }
        for o in instance.objects() {
            net.supply[3 * n + o.0] = -1;
        }
        net
    }

    fn add_edge(&mut self, from: usize, to: usize, lower: i64, cap: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge {
            from,
            to,
            lower,
            cap,
            flow: lower,
        });
        self.adj[from].push(id);
        self.adj[to].push(id);
        id
    }

    fn object_node(&self, o: ObjectId) -> usize {
        3 * self.num_agents + o.0
    }

    fn agent_node(&self, a: AgentId) -> usize {
        3 * a.0
    }

    fn alpha_node(&self, a: AgentId) -> usize {
        3 * a.0 + 1
    }

    pub(crate) fn queries(&self) -> usize {
        self.queries
    }

    fn excess(&self) -> Vec<i64> {
        let mut ex = self.supply.clone();
        for e in &self.edges {
            ex[e.from] -= e.flow;
            ex[e.to] += e.flow;
        }
        ex
    }

    fn residual(&self, id: usize, forward: bool) -> bool {
        let e = &self.edges[id];
        if forward {
            e.flow < e.cap
        } else {
            e.flow > e.lower
        }
    }

    /// Shortest residual path from `start` to any node accepted by `is_target`,
    /// never using edge `skip`.
    fn find_path(&self, start: usize, is_target: impl Fn(usize) -> bool, skip: Option<usize>) -> Option<Vec<Step>> {
        let mut parent: Vec<Option<Step>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &id in &self.adj[v] {
                if Some(id) == skip {
                    continue;
                }
                let e = &self.edges[id];
                let (forward, next) = if e.from == v { (true, e.to) } else { (false, e.from) };
                if seen[next] || !self.residual(id, forward) {
                    continue;
                }
                seen[next] = true;
                parent[next] = Some((id, forward));
                if is_target(next) {
                    let mut path = Vec::new();
                    let mut cur = next;
                    while cur != start {
                        let (id, forward) = parent[cur].expect("path recorded");
                        path.push((id, forward));
                        let e = &self.edges[id];
                        cur = if forward { e.from } else { e.to };
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(next);
            }
        }
        None
    }

    fn push(&mut self, path: &[Step]) {
        for &(id, forward) in path {
            self.edges[id].flow += if forward { 1 } else { -1 };
        }
    }

    /// Repairs node imbalances. Returns false when no feasible flow exists.
    pub(crate) fn make_feasible(&mut self) -> bool {
        if self.edges.iter().any(|e| e.lower > e.cap) {
            return false;
        }
        loop {
            let ex = self.excess();
            let Some(src) = ex.iter().position(|&x| x > 0) else {
                return ex.iter().all(|&x| x == 0);
            };
            match self.find_path(src, |v| ex[v] < 0, None) {
                Some(path) => self.push(&path),
                None => return false,
            }
        }
    }

    /// Loads `mu` as the current flow. Returns false when `mu` breaks a
    /// bound; the network is then left at its lower bounds.
    pub(crate) fn seed(&mut self, instance: &Instance, mu: &Matching) -> bool {
        for e in &mut self.edges {
            e.flow = 0;
        }
        for a in instance.agents() {
            let bundle = mu.bundle(a);
            let mut attractive = 0;
            let mut placed = 0;
            for &(o, id) in &self.object_edges[a.0] {
                if bundle.contains(&o) {
                    self.edges[id].flow = 1;
                    placed += 1;
                    if self.edges[id].from == self.alpha_node(a) {
                        attractive += 1;
                    }
                }
            }
            let (alpha, beta) = self.tiers[a.0];
            self.edges[alpha].flow = attractive;
            self.edges[beta].flow = placed - attractive;
            if placed as usize != bundle.len() {
                self.reset();
                return false;
            }
        }
        let ok = self.edges.iter().all(|e| e.lower <= e.flow && e.flow <= e.cap) && self.excess().iter().all(|&x| x == 0);
        if !ok {
            self.reset();
        }
        ok
    }

    fn reset(&mut self) {
        for e in &mut self.edges {
            e.flow = e.lower;
        }
    }

    /// Attractive objects currently routed to `a`.
    pub(crate) fn attractive_flow(&self, a: AgentId) -> usize {
        self.edges[self.tiers[a.0].0].flow as usize
    }

    /// Whether some feasible flow routes strictly more attractive objects to `a`.
    pub(crate) fn can_increase(&mut self, a: AgentId) -> bool {
        self.queries += 1;
        self.improving_path(a).is_some()
    }

    fn improving_path(&self, a: AgentId) -> Option<Vec<Step>> {
        let alpha = self.tiers[a.0].0;
        if !self.residual(alpha, true) {
            return None;
        }
        let home = self.agent_node(a);
        self.find_path(self.alpha_node(a), |v| v == home, Some(alpha))
    }

    /// Pushes `a`'s attractive flow to its maximum and returns it.
    pub(crate) fn maximize(&mut self, a: AgentId) -> usize {
        self.queries += 1;
        let alpha = self.tiers[a.0].0;
        while let Some(mut path) = self.improving_path(a) {
            path.push((alpha, true));
            self.push(&path);
        }
        self.attractive_flow(a)
    }

    /// Fixes `a`'s attractive count at its current value.
    pub(crate) fn lock_attractive(&mut self, a: AgentId) {
        let e = &mut self.edges[self.tiers[a.0].0];
        e.lower = e.flow;
        e.cap = e.flow;
    }

    /// Moves to the least feasible matching under the per-agent object order,
    /// agents taken in priority order. With an anchor, objects the agent
    /// holds in the anchor come first, then the rest by identifier;
    /// without one the order is by identifier.
    pub(crate) fn canonicalize(&mut self, anchor: Option<&Matching>) -> Matching {
        for i in 0..self.num_agents {
            let a = AgentId(i);
            let mut order = self.object_edges[i].clone();
            if let Some(anchor) = anchor {
                let held = anchor.bundle(a);
                order.sort_by_key(|&(o, _)| (!held.contains(&o), o));
            }
            let mut taken = 0usize;
            let size = self.supply[self.agent_node(a)] as usize;
            for (o, id) in order {
                if taken == size {
                    let e = &mut self.edges[id];
                    debug_assert_eq!(e.flow, 0);
                    e.cap = 0;
                    continue;
                }
                if self.edges[id].flow == 1 {
                    self.edges[id].lower = 1;
                    taken += 1;
                    continue;
                }
                // Route one unit through tier -> o: a residual path from o back to the tier.
                let tier = self.edges[id].from;
                match self.find_path(self.object_node(o), |v| v == tier, Some(id)) {
                    Some(mut path) => {
                        path.push((id, true));
                        self.push(&path);
                        self.edges[id].lower = 1;
                        taken += 1;
                    }
                    None => self.edges[id].cap = 0,
                }
            }
        }
        self.matching()
    }

    pub(crate) fn matching(&self) -> Matching {
        let bundles = self
            .object_edges
            .iter()
            .map(|objs| {
                objs.iter()
                    .filter(|&&(_, id)| self.edges[id].flow == 1)
                    .map(|&(o, _)| o)
                    .collect::<ObjectSet>()
            })
            .collect();
        Matching::from_bundles_unchecked(bundles)
    }

    /// Text dump: one line per edge, `from -> to [lower, cap] flow`.
    /// Nodes are `a<i>`, `A<i>` (attractive tier), `B<i>` (other tier) and `o<k>`.
    pub(crate) fn dump(&self) -> String {
        let name = |v: usize| {
            if v < 3 * self.num_agents {
                let kind = ["a", "A", "B"][v % 3];
                format!("{kind}{}", v / 3)
            } else {
                format!("o{}", v - 3 * self.num_agents)
            }
        };
        let mut out = String::new();
        for (v, s) in self.supply.iter().enumerate() {
            if *s != 0 {
                let _ = writeln!(out, "supply {} {}", name(v), s);
            }
        }
        for e in &self.edges {
            let _ = writeln!(out, "{} -> {} [{}, {}] {}", name(e.from), name(e.to), e.lower, e.cap, e.flow);
        }
        out
    }
}
