//! Block-flip connectivity of configuration space.
//!
//! Two configurations are linked when one is obtained from the other by
//! creating or removing a contiguous block of exactly `k` excitations, and
//! both lie in `{vacuum} ∪ Uniform(k)`. With `resonant_only` the link also
//! requires equal diagonal energies, which is what makes a `k`-photon
//! process resonant. This is a structural reconstruction of which states
//! are dynamically connected; the dynamics themselves always use the full
//! Hamiltonian.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::constraints::SectorDecomposition;
use crate::error::{Error, Result};
use crate::evolution::StateVector;
use crate::model::{classify, diagonal_energy, BasisConfig, ChainSpec, SectorLabel};

pub const MAX_GRAPH_SITES: usize = 16;
/// Diagonal energies closer than this count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    SingleFlip,
    KBlockFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub a: BasisConfig,
    pub b: BasisConfig,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct TransitionGraph {
    pub n_sites: usize,
    pub k: usize,
    pub resonant_only: bool,
    pub nodes: Vec<BasisConfig>,
    /// Sorted by `(a, b)` with `a < b`.
    pub edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

fn in_block_sector(c: &BasisConfig, k: usize) -> bool {
    matches!(classify(c), SectorLabel::Vacuum) || classify(c) == SectorLabel::Uniform(k)
}

/// Builds the `k`-block-flip graph over all `2^N` configurations. For
/// `k = 1` a block flip is a single spin flip and edges are tagged
/// [`EdgeKind::SingleFlip`].
pub fn build_graph(spec: &ChainSpec, k: usize, resonant_only: bool) -> Result<TransitionGraph> {
    spec.check_structure()?;
    let n = spec.n_sites;
    if n > MAX_GRAPH_SITES {
        return Err(Error::Capacity {
            what: "graph chain length",
            requested: n,
            limit: MAX_GRAPH_SITES,
        });
    }
    if k == 0 || k > n {
        return Err(Error::input(format!("k={k} out of range 1..={n}")));
    }
    let kind = if k == 1 {
        EdgeKind::SingleFlip
    } else {
        EdgeKind::KBlockFlip
    };
    let block = (1u64 << k) - 1;
    let energies: Vec<f64> = BasisConfig::all(n)
        .map(|c| diagonal_energy(&c, spec))
        .collect::<Result<_>>()?;

    let mut edges = Vec::new();
    for a in BasisConfig::all(n) {
        if !in_block_sector(&a, k) {
            continue;
        }
        for start in 0..=(n - k) {
            let mask = block << start;
            // only creation of a block from an empty window; removal is the
            // same edge seen from the other end
            if a.bits() & mask != 0 {
                continue;
            }
            let b = BasisConfig::from_raw(n, a.bits() | mask);
            if !in_block_sector(&b, k) {
                continue;
            }
            if resonant_only && (energies[a.index()] - energies[b.index()]).abs() >= DEGENERACY_TOLERANCE {
                continue;
            }
            edges.push(Edge { a, b, kind });
        }
    }
    edges.sort();

    let mut adjacency = vec![Vec::new(); 1 << n];
    for e in &edges {
        adjacency[e.a.index()].push(e.b.index());
        adjacency[e.b.index()].push(e.a.index());
    }
    Ok(TransitionGraph {
        n_sites: n,
        k,
        resonant_only,
        nodes: BasisConfig::all(n).collect(),
        edges,
        adjacency,
    })
}

impl TransitionGraph {
    pub fn degree(&self, config: &BasisConfig) -> usize {
        self.adjacency[config.index()].len()
    }

    pub fn has_edge(&self, a: &BasisConfig, b: &BasisConfig) -> bool {
        self.adjacency[a.index()].contains(&b.index())
    }

    /// Component id of every node (ids in order of first appearance).
    pub fn components(&self) -> Vec<usize> {
        let mut id = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for start in 0..self.nodes.len() {
            if id[start] != usize::MAX {
                continue;
            }
            id[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if id[v] == usize::MAX {
                        id[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        id
    }
}

/// Every node reachable from `root`.
pub fn connected_component(graph: &TransitionGraph, root: &BasisConfig) -> Result<BTreeSet<BasisConfig>> {
    if root.n_sites() != graph.n_sites {
        return Err(Error::input(format!("{root} is not a node of a {}-site graph", graph.n_sites)));
    }
    let mut seen = vec![false; graph.nodes.len()];
    seen[root.index()] = true;
    let mut queue = VecDeque::from([root.index()]);
    let mut out = BTreeSet::new();
    while let Some(u) = queue.pop_front() {
        out.insert(graph.nodes[u]);
        for &v in &graph.adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    Ok(out)
}

/// Probability outside `{vacuum} ∪ Uniform(k)`.
pub fn leakage(state: &StateVector, k: usize, decomposition: &SectorDecomposition) -> Result<f64> {
    leakage_outside(state, &[SectorLabel::Vacuum, SectorLabel::Uniform(k)], decomposition)
}

/// Probability outside the union of `sectors`.
pub fn leakage_outside(
    state: &StateVector,
    sectors: &[SectorLabel],
    decomposition: &SectorDecomposition,
) -> Result<f64> {
    if state.dim() != decomposition.dim() {
        return Err(Error::input(format!(
            "state dimension {} does not match decomposition dimension {}",
            state.dim(),
            decomposition.dim()
        )));
    }
    let inside: f64 = state
        .amplitudes()
        .iter()
        .zip(decomposition.labels())
        .filter(|(_, l)| sectors.contains(l))
        .map(|(a, _)| a.norm_sqr())
        .sum();
    Ok((1.0 - inside).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub config: String,
    pub config_int: u64,
    pub label: SectorLabel,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: String,
    pub b: String,
    pub kind: EdgeKind,
}

/// JSON document emitted by the `graph` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub n_sites: usize,
    pub k: usize,
    pub resonant_only: bool,
    pub spec: ChainSpec,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub component_sizes: Vec<usize>,
    /// Members of the component containing the vacuum.
    pub vacuum_component: Vec<String>,
}

impl GraphReport {
    pub fn new(spec: &ChainSpec, graph: &TransitionGraph) -> Result<Self> {
        let ids = graph.components();
        let n_components = ids.iter().max().map_or(0, |m| m + 1);
        let mut component_sizes = vec![0; n_components];
        for &id in &ids {
            component_sizes[id] += 1;
        }
        let vacuum = connected_component(graph, &BasisConfig::vacuum(graph.n_sites))?;
        Ok(GraphReport {
            n_sites: graph.n_sites,
            k: graph.k,
            resonant_only: graph.resonant_only,
            spec: spec.clone(),
            nodes: graph
                .nodes
                .iter()
                .zip(&ids)
                .map(|(c, &component)| GraphNode {
                    config: c.to_string(),
                    config_int: c.bits(),
                    label: classify(c),
                    component,
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|e| GraphEdge {
                    a: e.a.to_string(),
                    b: e.b.to_string(),
                    kind: e.kind,
                })
                .collect(),
            component_sizes,
            vacuum_component: vacuum.iter().map(|c| c.to_string()).collect(),
        })
    }
}
