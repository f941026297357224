//! Connectivity, matching-covered decision with tight-set witness, and
//! Dulmage-Mendelsohn decomposition with topological part ordering.
//!
//! General supplies are handled by unit expansion: left node i becomes S_i
//! unit copies, right node j becomes C_j unit copies, and copies inherit all
//! adjacencies. A perfect matching on the expansion is bi-directed, all
//! other edges point left-to-right, and the strongly connected components of
//! that digraph are the parts. Components are emitted in Tarjan completion
//! order, which already satisfies the ordering guarantee: any inter-part arc
//! (x_p, y_q) has p > q.

use thiserror::Error;

use crate::flow;
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("no perfect matching")]
    NoPerfectMatching,
    #[error("instance is not connected")]
    Disconnected,
    #[error("unit copies of {id:?} split across parts (internal invariant)")]
    CopiesSplit { id: String },
}

/// One part of a decomposition: left ids X_k and right ids Y_k, both in
/// document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmPart {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

/// Ordered partition into matching-covered parts, indexed from 1 in the
/// reported order: every edge between parts goes from a higher-indexed left
/// side to a lower-indexed right side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmDecomposition {
    pub parts: Vec<DmPart>,
}

impl DmDecomposition {
    /// 1-based part index of each right node, keyed by right id.
    pub fn rank_of_right(&self, inst: &Instance) -> Vec<usize> {
        let mut rank = vec![0usize; inst.n_right()];
        for (k, part) in self.parts.iter().enumerate() {
            for id in &part.right {
                rank[inst.right_index_of(id).expect("part id from instance")] = k + 1;
            }
        }
        rank
    }

    /// The sub-instance induced on part `k` (0-based): its nodes plus every
    /// instance edge with both endpoints inside the part.
    pub fn induced_instance(&self, inst: &Instance, k: usize) -> Instance {
        let part = &self.parts[k];
        let in_left: Vec<bool> = {
            let mut v = vec![false; inst.n_left()];
            for id in &part.left {
                v[inst.left_index_of(id).expect("part id from instance")] = true;
            }
            v
        };
        let in_right: Vec<bool> = {
            let mut v = vec![false; inst.n_right()];
            for id in &part.right {
                v[inst.right_index_of(id).expect("part id from instance")] = true;
            }
            v
        };
        let left = inst
            .left()
            .iter()
            .filter(|n| in_left[inst.left_index_of(&n.id).unwrap()])
            .cloned()
            .collect();
        let right = inst
            .right()
            .iter()
            .filter(|n| in_right[inst.right_index_of(&n.id).unwrap()])
            .cloned()
            .collect();
        let edges = inst
            .edges()
            .iter()
            .zip(inst.edge_endpoints())
            .filter(|&(_, &(li, ri))| in_left[li] && in_right[ri])
            .map(|(e, _)| e.clone())
            .collect();
        Instance::from_parts(left, right, edges).expect("induced sub-instance is valid")
    }
}

/// Matching-covered verdict with witnesses for the negative cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McVerdict {
    pub covered: bool,
    /// Nonempty proper left subset X with C_{N(X)} = S_X, when one exists
    /// and the instance is connected.
    pub tight_set: Option<Vec<String>>,
    pub disconnected: bool,
}

/// True iff the underlying undirected graph is connected.
pub fn is_connected(inst: &Instance) -> bool {
    let n = inst.n_left() + inst.n_right();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        let neighbors: Vec<usize> = if u < inst.n_left() {
            inst.edges_of_left(u)
                .iter()
                .map(|&e| inst.n_left() + inst.edge_endpoints()[e].1)
                .collect()
        } else {
            inst.edges_of_right(u - inst.n_left())
                .iter()
                .map(|&e| inst.edge_endpoints()[e].0)
                .collect()
        };
        for v in neighbors {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Unit expansion of an instance: copy `a` of left node `i` is expansion
/// left index `left_base[i] + a`, and symmetrically on the right.
#[derive(Debug, Clone)]
pub struct UnitExpansion {
    /// Original left index of each expansion left node.
    pub left_of_copy: Vec<usize>,
    /// Original right index of each expansion right node.
    pub right_of_copy: Vec<usize>,
    /// First expansion index of each original left node.
    pub left_base: Vec<usize>,
    /// First expansion index of each original right node.
    pub right_base: Vec<usize>,
}

/// A node of the unit expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpNode {
    Left(usize),
    Right(usize),
}

/// Build the unit expansion index maps for an instance.
pub fn unit_expansion(inst: &Instance) -> UnitExpansion {
    let mut left_of_copy = Vec::new();
    let mut left_base = Vec::with_capacity(inst.n_left());
    for i in 0..inst.n_left() {
        left_base.push(left_of_copy.len());
        for _ in 0..inst.supply(i) {
            left_of_copy.push(i);
        }
    }
    let mut right_of_copy = Vec::new();
    let mut right_base = Vec::with_capacity(inst.n_right());
    for j in 0..inst.n_right() {
        right_base.push(right_of_copy.len());
        for _ in 0..inst.capacity(j) {
            right_of_copy.push(j);
        }
    }
    UnitExpansion {
        left_of_copy,
        right_of_copy,
        left_base,
        right_base,
    }
}

/// Verify that all unit copies of each original node share a part, then
/// contract the expansion partition back to original ids.
pub fn project_check(
    inst: &Instance,
    exp: &UnitExpansion,
    parts: &[Vec<ExpNode>],
) -> Result<DmDecomposition, StructureError> {
    let mut part_of_left = vec![usize::MAX; inst.n_left()];
    let mut part_of_right = vec![usize::MAX; inst.n_right()];
    for (k, part) in parts.iter().enumerate() {
        for &node in part {
            match node {
                ExpNode::Left(c) => {
                    let i = exp.left_of_copy[c];
                    if part_of_left[i] != usize::MAX && part_of_left[i] != k {
                        return Err(StructureError::CopiesSplit {
                            id: inst.left()[i].id.clone(),
                        });
                    }
                    part_of_left[i] = k;
                }
                ExpNode::Right(c) => {
                    let j = exp.right_of_copy[c];
                    if part_of_right[j] != usize::MAX && part_of_right[j] != k {
                        return Err(StructureError::CopiesSplit {
                            id: inst.right()[j].id.clone(),
                        });
                    }
                    part_of_right[j] = k;
                }
            }
        }
    }
    // A copy missing from its node's part would sit in another part and be
    // caught above, so every node has a well-defined part here.
    let mut out = vec![
        DmPart {
            left: Vec::new(),
            right: Vec::new()
        };
        parts.len()
    ];
    for (i, node) in inst.left().iter().enumerate() {
        out[part_of_left[i]].left.push(node.id.clone());
    }
    for (j, node) in inst.right().iter().enumerate() {
        out[part_of_right[j]].right.push(node.id.clone());
    }
    Ok(DmDecomposition { parts: out })
}

struct Tarjan<'a> {
    graph: &'a [Vec<usize>],
    index: usize,
    idx: Vec<Option<usize>>,
    low: Vec<usize>,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    comps: Vec<Vec<usize>>,
}

impl<'a> Tarjan<'a> {
    fn run(graph: &'a [Vec<usize>]) -> Vec<Vec<usize>> {
        let n = graph.len();
        let mut t = Tarjan {
            graph,
            index: 0,
            idx: vec![None; n],
            low: vec![0; n],
            stack: Vec::new(),
            on_stack: vec![false; n],
            comps: Vec::new(),
        };
        for v in 0..n {
            if t.idx[v].is_none() {
                t.strongconnect(v);
            }
        }
        t.comps
    }

    fn strongconnect(&mut self, v: usize) {
        self.idx[v] = Some(self.index);
        self.low[v] = self.index;
        self.index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;

        for &w in &self.graph[v] {
            if self.idx[w].is_none() {
                self.strongconnect(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.idx[w].unwrap());
            }
        }

        if self.low[v] == self.idx[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("stack underflow");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            self.comps.push(comp);
        }
    }
}

/// Dulmage-Mendelsohn decomposition of a connected instance with a perfect
/// matching. Deterministic: the matching comes from the flow module under
/// document iteration order, and parts are indexed in the completion order
/// of one Tarjan run over expansion nodes in document order.
pub fn dm_decomposition(inst: &Instance) -> Result<DmDecomposition, StructureError> {
    if !is_connected(inst) {
        return Err(StructureError::Disconnected);
    }
    let flow_res = flow::max_matching_value(inst);
    if inst.total_supply() != inst.total_capacity() || flow_res.value != inst.total_supply() {
        return Err(StructureError::NoPerfectMatching);
    }

    let exp = unit_expansion(inst);
    let nl = exp.left_of_copy.len();
    let nr = exp.right_of_copy.len();

    // Perfect matching on the expansion from the integral flow: walk edges
    // in document order, pairing the next unused copies on each side.
    let mut mate_of_left = vec![usize::MAX; nl];
    let mut next_left = exp.left_base.clone();
    let mut next_right = exp.right_base.clone();
    for (e, &(i, j)) in inst.edge_endpoints().iter().enumerate() {
        for _ in 0..flow_res.edge_flows[e] {
            let a = next_left[i];
            let b = next_right[j];
            next_left[i] += 1;
            next_right[j] += 1;
            mate_of_left[a] = b;
        }
    }

    // Digraph over expansion nodes: left copies 0..nl, right copies
    // nl..nl+nr. Every adjacency points left-to-right; matched pairs also
    // point back.
    let mut graph = vec![Vec::new(); nl + nr];
    for &(i, j) in inst.edge_endpoints() {
        for a in exp.left_base[i]..exp.left_base[i] + inst.supply(i) as usize {
            for b in exp.right_base[j]..exp.right_base[j] + inst.capacity(j) as usize {
                graph[a].push(nl + b);
                if mate_of_left[a] == b {
                    graph[nl + b].push(a);
                }
            }
        }
    }

    let comps = Tarjan::run(&graph);
    let parts: Vec<Vec<ExpNode>> = comps
        .iter()
        .map(|comp| {
            comp.iter()
                .map(|&v| {
                    if v < nl {
                        ExpNode::Left(v)
                    } else {
                        ExpNode::Right(v - nl)
                    }
                })
                .collect()
        })
        .collect();
    project_check(inst, &exp, &parts)
}

/// Matching-covered decision. The instance must have a perfect matching.
/// Covered means connected and free of nontrivial tight sets; when connected
/// but not covered, the left side of the first part is a tight-set witness.
pub fn is_matching_covered(inst: &Instance) -> Result<McVerdict, StructureError> {
    if inst.total_supply() != inst.total_capacity() || !flow::has_perfect_matching(inst) {
        return Err(StructureError::NoPerfectMatching);
    }
    if !is_connected(inst) {
        return Ok(McVerdict {
            covered: false,
            tight_set: None,
            disconnected: true,
        });
    }
    let dm = dm_decomposition(inst)?;
    if dm.parts.len() == 1 {
        Ok(McVerdict {
            covered: true,
            tight_set: None,
            disconnected: false,
        })
    } else {
        Ok(McVerdict {
            covered: false,
            tight_set: Some(dm.parts[0].left.clone()),
            disconnected: false,
        })
    }
}
