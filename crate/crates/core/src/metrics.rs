//! Ground-truth component metrics: sizes, exact diameter, mixing time.

use crate::mixing::{mixing_time, MixingResult};
use crate::percolation::PercolationOutcome;
use crate::rng::StreamKey;
use serde::Serialize;
use std::fmt;

/// Conventional total-variation threshold for the mixing time.
pub const DEFAULT_MIXING_EPS: f64 = 0.25;

/// Exact all-starts mixing is computed for components up to this size.
/// In the critical window the largest component is ≈ n^{2/3}, so exact
/// mixing stays affordable up to n ≈ 3·10^5.
pub const DEFAULT_EXACT_CAP: usize = 5000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricsError {
    DisconnectedInput,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::DisconnectedInput => write!(f, "input subgraph is not connected"),
        }
    }
}

impl std::error::Error for MetricsError {}

/// A component subgraph in CSR form over local indices 0..size−1.
#[derive(Clone, Debug)]
pub struct ComponentGraph {
    /// Original vertex ids, ascending; local index i names vertices[i].
    pub vertices: Vec<u32>,
    offsets: Vec<u32>,
    nbrs: Vec<u32>,
}

impl ComponentGraph {
    /// Builds from edges already expressed in local indices.
    pub fn from_local_edges(size: usize, edges: &[(u32, u32)]) -> ComponentGraph {
        let mut deg = vec![0u32; size];
        for &(u, v) in edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0u32; size + 1];
        for i in 0..size {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut nbrs = vec![0u32; edges.len() * 2];
        for &(u, v) in edges {
            nbrs[fill[u as usize] as usize] = v;
            fill[u as usize] += 1;
            nbrs[fill[v as usize] as usize] = u;
            fill[v as usize] += 1;
        }
        for i in 0..size {
            nbrs[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        ComponentGraph {
            vertices: (0..size as u32).collect(),
            offsets,
            nbrs,
        }
    }

    pub fn size(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.nbrs.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> u32 {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.nbrs[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

/// Extracts the component with the given id from a percolation outcome.
pub fn component_subgraph(outcome: &PercolationOutcome, comp: u32) -> ComponentGraph {
    let mut vertices: Vec<u32> = (0..outcome.n)
        .filter(|&v| outcome.component_id[v as usize] == comp)
        .collect();
    vertices.sort_unstable();
    let local = |v: u32| vertices.binary_search(&v).expect("vertex in component") as u32;
    let edges: Vec<(u32, u32)> = outcome
        .retained_edges
        .iter()
        .filter(|&&(u, _)| outcome.component_id[u as usize] == comp)
        .map(|&(u, v)| (local(u), local(v)))
        .collect();
    let mut cg = ComponentGraph::from_local_edges(vertices.len(), &edges);
    cg.vertices = vertices;
    cg
}

/// The component id holding the most vertices (ties to the lowest id).
pub fn largest_component_id(outcome: &PercolationOutcome) -> u32 {
    let mut sizes = vec![0u32; outcome.component_sizes.len()];
    for &c in &outcome.component_id {
        sizes[c as usize] += 1;
    }
    let mut best = 0u32;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[best as usize] {
            best = i as u32;
        }
    }
    best
}

/// Top-k component sizes, descending.
pub fn largest_components(outcome: &PercolationOutcome, k: usize) -> Vec<u32> {
    assert!(k >= 1);
    outcome.component_sizes.iter().take(k).copied().collect()
}

/// Exact diameter: maximum eccentricity over BFS from every vertex.
pub fn diameter(comp: &ComponentGraph) -> Result<u32, MetricsError> {
    let size = comp.size();
    if size == 0 {
        return Err(MetricsError::DisconnectedInput);
    }
    let mut dist = vec![u32::MAX; size];
    let mut queue = std::collections::VecDeque::new();
    let mut best = 0u32;
    for start in 0..size {
        dist.fill(u32::MAX);
        queue.clear();
        dist[start] = 0;
        queue.push_back(start as u32);
        let mut seen = 1usize;
        let mut ecc = 0u32;
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            ecc = ecc.max(dv);
            for &w in comp.neighbors(v as usize) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dv + 1;
                    seen += 1;
                    queue.push_back(w);
                }
            }
        }
        if seen != size {
            return Err(MetricsError::DisconnectedInput);
        }
        best = best.max(ecc);
    }
    Ok(best)
}

/// Per-component metric record.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentSummary {
    pub size: u32,
    pub edge_count: u32,
    pub diameter: u32,
    pub t_mix: Option<u64>,
    pub is_exact_mixing: bool,
    pub mixing_capped: bool,
}

/// Computes size, diameter and (optionally) mixing time of one component.
/// `mixing` controls whether the walk is run at all; components larger
/// than `exact_cap` use the 32-start estimate only when `estimate_large`
/// is set, otherwise their `t_mix` is None.
pub fn summarize_component(
    comp: &ComponentGraph,
    eps: f64,
    exact_cap: usize,
    mixing: bool,
    estimate_large: bool,
    stream: StreamKey,
) -> Result<ComponentSummary, MetricsError> {
    let diam = diameter(comp)?;
    let mut t_mix = None;
    let mut is_exact = false;
    let mut capped = false;
    if mixing && (comp.size() <= exact_cap || estimate_large) {
        let MixingResult {
            t_mix: t,
            exact,
            capped: c,
        } = mixing_time(comp, eps, exact_cap, stream);
        t_mix = Some(t);
        is_exact = exact;
        capped = c;
    }
    Ok(ComponentSummary {
        size: comp.size() as u32,
        edge_count: comp.edge_count() as u32,
        diameter: diam,
        t_mix,
        is_exact_mixing: is_exact,
        mixing_capped: capped,
    })
}
