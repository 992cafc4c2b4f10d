//! Bond percolation G_p and ground-truth component structure.

use crate::dsu::DisjointSet;
use crate::graph::RegularGraph;
use crate::rng::{edge_key, StreamKey};
use serde::Serialize;
use std::fmt;

/// Result of retaining each edge of a base graph independently with
/// probability p. Components are the transitive closure of retained edges.
#[derive(Clone, Debug)]
pub struct PercolationOutcome {
    pub n: u32,
    pub p: f64,
    /// Retained edges in canonical order; edges of the base graph not
    /// listed here failed to percolate.
    pub retained_edges: Vec<(u32, u32)>,
    /// Component index per vertex, numbered by first occurrence.
    pub component_id: Vec<u32>,
    /// Component sizes, descending.
    pub component_sizes: Vec<u32>,
}

impl PercolationOutcome {
    pub fn retained_count(&self) -> usize {
        self.retained_edges.len()
    }

    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn largest(&self) -> u32 {
        self.component_sizes.first().copied().unwrap_or(0)
    }

    /// Histogram of component sizes as (size, count), ascending by size.
    pub fn size_histogram(&self) -> Vec<(u32, u32)> {
        let mut hist: Vec<(u32, u32)> = Vec::new();
        let mut sorted = self.component_sizes.clone();
        sorted.sort_unstable();
        for s in sorted {
            match hist.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => hist.push((s, 1)),
            }
        }
        hist
    }

    /// One JSON-lines row: retained edge list plus component-size histogram.
    pub fn to_json_row(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            n: u32,
            p: f64,
            retained: usize,
            retained_edges: &'a [(u32, u32)],
            component_histogram: Vec<(u32, u32)>,
        }
        serde_json::to_string(&Row {
            n: self.n,
            p: self.p,
            retained: self.retained_edges.len(),
            retained_edges: &self.retained_edges,
            component_histogram: self.size_histogram(),
        })
        .expect("outcome serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PercolationError {
    NegativeCriticalP { d: u32, lambda: f64, n: u32 },
    InvalidProbability(f64),
}

impl fmt::Display for PercolationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PercolationError::NegativeCriticalP { d, lambda, n } => write!(
                f,
                "(1 + {lambda} * {n}^(-1/3)) / ({d} - 1) is negative"
            ),
            PercolationError::InvalidProbability(p) => write!(f, "p = {p} not in [0, 1]"),
        }
    }
}

impl std::error::Error for PercolationError {}

/// The critical-window retention probability p = (1 + λ n^{−1/3})/(d − 1),
/// clamped above at 1. Negative raw values are an error.
pub fn critical_p(d: u32, lambda: f64, n: u32) -> Result<f64, PercolationError> {
    assert!(d >= 2, "critical_p needs d >= 2");
    let raw = (1.0 + lambda * (n as f64).powf(-1.0 / 3.0)) / (d as f64 - 1.0);
    if raw < 0.0 {
        return Err(PercolationError::NegativeCriticalP { d, lambda, n });
    }
    Ok(raw.min(1.0))
}

/// Retains each edge independently with probability p and computes the
/// component decomposition by disjoint-set union.
///
/// For sparse graphs the indicator of edge {u,v} is the keyed Bernoulli
/// draw `stream.bernoulli(edge_key(u,v), p)` — a pure function of
/// (stream, edge), so lazily exposing indicators one edge at a time (as
/// the exploration process does) reproduces this outcome bit for bit.
/// The implicit complete graph instead samples retained pairs directly
/// with geometric skipping, which is O(retained) instead of Θ(n²); it is
/// deterministic given the stream but not edge-keyed.
pub fn percolate(
    g: &RegularGraph,
    p: f64,
    stream: StreamKey,
) -> Result<PercolationOutcome, PercolationError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PercolationError::InvalidProbability(p));
    }
    let retained_edges = if g.is_complete_repr() {
        skip_sample_complete(g.n(), p, stream)
    } else {
        g.edges()
            .filter(|&(u, v)| stream.bernoulli(edge_key(u, v), p))
            .collect()
    };
    let (component_id, component_sizes) = components_from_edges(g.n(), &retained_edges);
    Ok(PercolationOutcome {
        n: g.n(),
        p,
        retained_edges,
        component_id,
        component_sizes,
    })
}

/// Skip-sampling over the lexicographic pair index of K_n: jump ahead by
/// Geometric(p) between retained pairs (Batagelj–Brandes).
fn skip_sample_complete(n: u32, p: f64, stream: StreamKey) -> Vec<(u32, u32)> {
    let total = n as u64 * (n as u64 - 1) / 2;
    let mut out = Vec::new();
    if p <= 0.0 {
        return out;
    }
    let mut rng = stream.child(0x4b5f_5045_5243).rng();
    if p >= 1.0 {
        for u in 0..n {
            for v in (u + 1)..n {
                out.push((u, v));
            }
        }
        return out;
    }
    let ln_q = (1.0 - p).ln();
    let mut idx: u64 = 0;
    loop {
        // Number of failures before the next success.
        let u = rng.next_f64();
        let skip = ((1.0 - u).ln() / ln_q).floor() as u64;
        idx = idx.saturating_add(skip);
        if idx >= total {
            break;
        }
        out.push(pair_from_index(n, idx));
        idx += 1;
    }
    out
}

/// Inverse of the lexicographic pair enumeration (u, v), u < v.
fn pair_from_index(n: u32, idx: u64) -> (u32, u32) {
    let n = n as u64;
    // Row u starts at offset u*n - u*(u+3)/2 ... solve by walking rows is
    // O(n); use the closed form via the quadratic instead.
    // Pairs before row u: S(u) = u*(2n - u - 1)/2. Find largest u with
    // S(u) <= idx.
    let mut u = ((2.0 * n as f64 - 1.0
        - ((2.0 * n as f64 - 1.0).powi(2) - 8.0 * idx as f64).sqrt())
        / 2.0)
        .floor() as u64;
    // Guard against floating point off-by-one.
    while u > 0 && row_start(n, u) > idx {
        u -= 1;
    }
    while row_start(n, u + 1) <= idx {
        u += 1;
    }
    let v = u + 1 + (idx - row_start(n, u));
    (u as u32, v as u32)
}

fn row_start(n: u64, u: u64) -> u64 {
    u * (2 * n - u - 1) / 2
}

/// Components of the subgraph given by `edges`, numbered by first
/// occurrence by vertex id; sizes returned descending.
pub fn components_from_edges(n: u32, edges: &[(u32, u32)]) -> (Vec<u32>, Vec<u32>) {
    let mut dsu = DisjointSet::new(n as usize);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    let mut component_id = vec![u32::MAX; n as usize];
    let mut sizes: Vec<u32> = Vec::new();
    let mut root_to_id: Vec<u32> = vec![u32::MAX; n as usize];
    for v in 0..n {
        let root = dsu.find(v);
        if root_to_id[root as usize] == u32::MAX {
            root_to_id[root as usize] = sizes.len() as u32;
            sizes.push(0);
        }
        let id = root_to_id[root as usize];
        component_id[v as usize] = id;
        sizes[id as usize] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (component_id, sizes)
}
