//! Exact maximum fractional matching value (OPT) and Hall-condition
//! witnesses via integral max-flow.
//!
//! Network shape: source -> left node i with capacity S_i, edge (i, j) with
//! capacity min(S_i, C_j), right node j -> sink with capacity C_j. Flows are
//! integral throughout; witnesses come from residual reachability.

use thiserror::Error;

use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("no perfect matching")]
    NoPerfectMatching,
    #[error("unknown edge ({left:?}, {right:?})")]
    UnknownEdge { left: String, right: String },
}

/// Result of a maximum-assignment computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    /// Maximum feasible integral assignment value (OPT).
    pub value: i64,
    /// Integral flow per instance edge, parallel to `Instance::edges`.
    pub edge_flows: Vec<i64>,
    /// Left ids X with C_{N(X)} < S_X; present iff value < total supply.
    pub deficiency_witness: Option<Vec<String>>,
}

/// Dinic max-flow over an arc list with paired reverse arcs.
struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    /// Adds arc u -> v with capacity c; returns the arc index.
    fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let idx = self.to.len();
        self.head[u].push(idx);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(idx + 1);
        self.to.push(u);
        self.cap.push(0);
        idx
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[source] = 0;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, pushed: i64) -> i64 {
        if u == sink {
            return pushed;
        }
        while self.iter[u] < self.head[u].len() {
            let a = self.head[u][self.iter[u]];
            let v = self.to[a];
            if self.cap[a] > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, sink, pushed.min(self.cap[a]));
                if d > 0 {
                    self.cap[a] -= d;
                    self.cap[a ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let mut flow = 0;
        while self.bfs(source, sink) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(source, sink, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }

    /// Nodes reachable from `source` in the residual network.
    fn residual_reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Internal solver shared by the public operations: supplies and capacities
/// may differ from the instance's own (used to force flow on an edge).
fn solve(
    supplies: &[i64],
    capacities: &[i64],
    endpoints: &[(usize, usize)],
) -> (i64, Vec<i64>, Vec<bool>) {
    let nl = supplies.len();
    let nr = capacities.len();
    let source = nl + nr;
    let sink = nl + nr + 1;
    let mut net = Dinic::new(nl + nr + 2);
    for (i, &s) in supplies.iter().enumerate() {
        net.add_edge(source, i, s);
    }
    let mut arc_of_edge = Vec::with_capacity(endpoints.len());
    for &(i, j) in endpoints {
        arc_of_edge.push(net.add_edge(i, nl + j, supplies[i].min(capacities[j])));
    }
    for (j, &c) in capacities.iter().enumerate() {
        net.add_edge(nl + j, sink, c);
    }
    let value = net.max_flow(source, sink);
    let edge_flows = arc_of_edge
        .iter()
        .map(|&a| net.cap[a ^ 1]) // flow pushed = reverse-arc capacity
        .collect();
    let reachable = net.residual_reachable(source);
    (value, edge_flows, reachable)
}

/// Maximum integral assignment of the supply, with per-edge flows and, when
/// the supply cannot be fully assigned, a deficient left set X with
/// C_{N(X)} < S_X (left nodes reachable from the source in the residual
/// network of a maximum flow).
pub fn max_matching_value(inst: &Instance) -> FlowResult {
    let supplies: Vec<i64> = inst.left().iter().map(|n| n.supply).collect();
    let capacities: Vec<i64> = inst.right().iter().map(|n| n.capacity).collect();
    let (value, edge_flows, reachable) = solve(&supplies, &capacities, inst.edge_endpoints());
    let deficiency_witness = if value < inst.total_supply() {
        Some(
            inst.left()
                .iter()
                .enumerate()
                .filter(|&(i, _)| reachable[i])
                .map(|(_, n)| n.id.clone())
                .collect(),
        )
    } else {
        None
    };
    FlowResult {
        value,
        edge_flows,
        deficiency_witness,
    }
}

/// True iff total supply equals total capacity and the maximum assignment
/// saturates it.
pub fn has_perfect_matching(inst: &Instance) -> bool {
    inst.total_supply() == inst.total_capacity()
        && max_matching_value(inst).value == inst.total_supply()
}

/// True iff some perfect integral assignment routes at least one unit over
/// the given edge. One unit is forced on the edge (supply and capacity at
/// its endpoints each drop by one) and the rest must still assign fully.
pub fn edge_in_some_perfect_assignment(
    inst: &Instance,
    left: &str,
    right: &str,
) -> Result<bool, FlowError> {
    if !has_perfect_matching(inst) {
        return Err(FlowError::NoPerfectMatching);
    }
    let e = inst
        .edge_index_of(left, right)
        .ok_or_else(|| FlowError::UnknownEdge {
            left: left.to_string(),
            right: right.to_string(),
        })?;
    let (li, ri) = inst.edge_endpoints()[e];
    let mut supplies: Vec<i64> = inst.left().iter().map(|n| n.supply).collect();
    let mut capacities: Vec<i64> = inst.right().iter().map(|n| n.capacity).collect();
    supplies[li] -= 1;
    capacities[ri] -= 1;
    let (value, _, _) = solve(&supplies, &capacities, inst.edge_endpoints());
    Ok(value == inst.total_supply() - 1)
}
