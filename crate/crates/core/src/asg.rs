//! Analogous structure graph: nodes for every projector, nilpotent, and the
//! zero matrix, edges for their multiplication relations.
//!
//! The graph encodes the family structure shared by all analogous matrices;
//! eigenvalue values appear only as node annotations, never as identity.

use thiserror::Error;

use crate::jordan::{self, SpectralFamily};
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Error)]
pub enum AsgError {
    #[error("family fails verification:\n{0}")]
    InvalidFamily(jordan::FamilyReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AsgNodeKind {
    Projector,
    Nilpotent,
    Zero,
}

/// Which Jordan block a node belongs to. `power` is 1 for the operator
/// itself and >= 2 for the implicit decay-chain powers N^q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsgBlockRef {
    pub group: usize,
    pub block: usize,
    pub size: usize,
    pub power: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsgNode {
    pub id: usize,
    pub kind: AsgNodeKind,
    pub block: Option<AsgBlockRef>,
    pub eigenvalue: Option<Scalar>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsgEdgeLabel {
    /// P * P = P
    SelfIdempotent,
    /// P * N = N * P = N (drawn undirected)
    ProjectorNilpotent,
    /// N^q * N = N^(q+1), absorbing into zero at the nilpotency degree
    NilpotentDecay,
}

impl AsgEdgeLabel {
    fn dot_label(self) -> &'static str {
        match self {
            AsgEdgeLabel::SelfIdempotent => "idempotent",
            AsgEdgeLabel::ProjectorNilpotent => "PN",
            AsgEdgeLabel::NilpotentDecay => "decay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsgEdge {
    pub from: usize,
    pub to: usize,
    pub label: AsgEdgeLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsgGraph {
    nodes: Vec<AsgNode>,
    edges: Vec<AsgEdge>,
}

impl AsgGraph {
    pub fn nodes(&self) -> &[AsgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[AsgEdge] {
        &self.edges
    }

    pub fn zero_node(&self) -> usize {
        self.nodes
            .iter()
            .find(|n| n.kind == AsgNodeKind::Zero)
            .map(|n| n.id)
            .expect("graph always has a zero node")
    }

    /// Projectors, degree-1 nilpotents, and the zero node: always
    /// 2 * (number of blocks) + 1. Decay-chain power nodes are excluded.
    pub fn primary_node_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.block.is_none_or(|b| b.power == 1))
            .count()
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.label == AsgEdgeLabel::SelfIdempotent)
            .count()
    }

    /// Recover the family signature from graph structure alone: node kinds,
    /// edge labels, and the grouping of blocks by eigenvalue index. Block
    /// sizes are read off the decay chains (a block of size m >= 2 has a
    /// projector-nilpotent edge and a decay path of m - 1 edges; a size-1
    /// block has a lone decay edge into zero), so two graphs are isomorphic
    /// as labeled graphs exactly when these forms agree.
    pub fn canonical_form(&self) -> Vec<Vec<usize>> {
        let mut decay_next = std::collections::HashMap::new();
        let mut has_incoming_decay = std::collections::HashSet::new();
        let mut has_pn = std::collections::HashSet::new();
        for e in &self.edges {
            match e.label {
                AsgEdgeLabel::NilpotentDecay => {
                    decay_next.insert(e.from, e.to);
                    has_incoming_decay.insert(e.to);
                }
                AsgEdgeLabel::ProjectorNilpotent => {
                    has_pn.insert(e.from);
                    has_pn.insert(e.to);
                }
                AsgEdgeLabel::SelfIdempotent => {}
            }
        }
        let zero = self.zero_node();
        let mut per_group: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for node in &self.nodes {
            if node.kind != AsgNodeKind::Nilpotent || has_incoming_decay.contains(&node.id) {
                continue;
            }
            // Primary nilpotent: walk the decay chain to zero.
            let mut steps = 0;
            let mut cur = node.id;
            while cur != zero {
                cur = *decay_next
                    .get(&cur)
                    .expect("every nilpotent chain reaches zero");
                steps += 1;
            }
            let size = if has_pn.contains(&node.id) { steps + 1 } else { 1 };
            let group = node.block.expect("nilpotent nodes carry a block").group;
            per_group.entry(group).or_default().push(size);
        }
        let mut form: Vec<Vec<usize>> = per_group
            .into_values()
            .map(|mut sizes| {
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                sizes
            })
            .collect();
        form.sort();
        form
    }

    /// Deterministic Graphviz DOT text: nodes sorted by (kind, group, block,
    /// power), LF line endings, eigenvalues as annotations only.
    pub fn export_dot(&self) -> String {
        let mut order: Vec<&AsgNode> = self.nodes.iter().collect();
        order.sort_by_key(|n| {
            let b = n.block;
            (
                n.kind,
                b.map_or(usize::MAX, |b| b.group),
                b.map_or(usize::MAX, |b| b.block),
                b.map_or(usize::MAX, |b| b.power),
            )
        });
        let mut out = String::from("digraph asg {\n");
        for node in &order {
            let (name, shape, label) = self.dot_node_parts(node);
            out.push_str(&format!("  {name} [shape={shape}, label=\"{label}\"];\n"));
        }
        let name_of = |id: usize| {
            let node = &self.nodes[id];
            self.dot_node_parts(node).0
        };
        let mut edges: Vec<&AsgEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| (name_of(e.from), name_of(e.to), e.label.dot_label()));
        for e in edges {
            let extra = if e.label == AsgEdgeLabel::ProjectorNilpotent {
                ", dir=none"
            } else {
                ""
            };
            out.push_str(&format!(
                "  {} -> {} [label=\"{}\"{extra}];\n",
                name_of(e.from),
                name_of(e.to),
                e.label.dot_label()
            ));
        }
        out.push_str("}\n");
        out
    }

    fn dot_node_parts(&self, node: &AsgNode) -> (String, &'static str, String) {
        match node.kind {
            AsgNodeKind::Zero => ("zero".to_string(), "doublecircle", "0".to_string()),
            AsgNodeKind::Projector => {
                let b = node.block.unwrap();
                let name = format!("P_{}_{}", b.group + 1, b.block + 1);
                let label = match &node.eigenvalue {
                    Some(ev) => format!("P[{},{}] λ={}", b.group + 1, b.block + 1, ev),
                    None => format!("P[{},{}]", b.group + 1, b.block + 1),
                };
                (name, "box", label)
            }
            AsgNodeKind::Nilpotent => {
                let b = node.block.unwrap();
                let name = if b.power == 1 {
                    format!("N_{}_{}", b.group + 1, b.block + 1)
                } else {
                    format!("N_{}_{}_pow{}", b.group + 1, b.block + 1, b.power)
                };
                let base = if b.power == 1 {
                    format!("N[{},{}]", b.group + 1, b.block + 1)
                } else {
                    format!("N[{},{}]^{}", b.group + 1, b.block + 1, b.power)
                };
                let label = match &node.eigenvalue {
                    Some(ev) if b.power == 1 => format!("{base} λ={ev}"),
                    _ => base,
                };
                (name, "ellipse", label)
            }
        }
    }
}

/// Build the graph of a verified family.
///
/// Per block: a projector node with a self-loop, a nilpotent node, a
/// projector-nilpotent edge when the nilpotent is nonzero (size >= 2), and a
/// decay chain into the shared zero node. For size 1 and 2 the nilpotent
/// links to zero directly; longer chains pass through implicit power nodes.
pub fn build_graph(family: &SpectralFamily, tol: &Tolerance) -> Result<AsgGraph, AsgError> {
    let report = jordan::verify_family(family, tol);
    if !report.is_valid() {
        return Err(AsgError::InvalidFamily(report));
    }

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for item in family.items() {
        let base = AsgBlockRef {
            group: item.group,
            block: item.block,
            size: item.block_size,
            power: 1,
        };
        let p_id = nodes.len();
        nodes.push(AsgNode {
            id: p_id,
            kind: AsgNodeKind::Projector,
            block: Some(base),
            eigenvalue: Some(item.eigenvalue.clone()),
        });
        edges.push(AsgEdge {
            from: p_id,
            to: p_id,
            label: AsgEdgeLabel::SelfIdempotent,
        });

        let n_id = nodes.len();
        nodes.push(AsgNode {
            id: n_id,
            kind: AsgNodeKind::Nilpotent,
            block: Some(base),
            eigenvalue: Some(item.eigenvalue.clone()),
        });
        if item.block_size >= 2 {
            edges.push(AsgEdge {
                from: p_id,
                to: n_id,
                label: AsgEdgeLabel::ProjectorNilpotent,
            });
        }
        // Decay chain: implicit power nodes only above size 2.
        let mut tail = n_id;
        for power in 2..item.block_size {
            let q_id = nodes.len();
            nodes.push(AsgNode {
                id: q_id,
                kind: AsgNodeKind::Nilpotent,
                block: Some(AsgBlockRef { power, ..base }),
                eigenvalue: None,
            });
            edges.push(AsgEdge {
                from: tail,
                to: q_id,
                label: AsgEdgeLabel::NilpotentDecay,
            });
            tail = q_id;
        }
        // The zero node is appended last; patch its id below.
        edges.push(AsgEdge {
            from: tail,
            to: usize::MAX,
            label: AsgEdgeLabel::NilpotentDecay,
        });
    }
    let zero_id = nodes.len();
    nodes.push(AsgNode {
        id: zero_id,
        kind: AsgNodeKind::Zero,
        block: None,
        eigenvalue: None,
    });
    for e in edges.iter_mut() {
        if e.to == usize::MAX {
            e.to = zero_id;
        }
    }
    Ok(AsgGraph { nodes, edges })
}

/// Isomorphism on kinds, edge labels, and the eigenvalue grouping (the
/// annotation values themselves are ignored).
pub fn labeled_isomorphic(a: &AsgGraph, b: &AsgGraph) -> bool {
    a.canonical_form() == b.canonical_form()
}
