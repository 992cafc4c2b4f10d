//! Samplers for uniform random d-regular graphs.
//!
//! - [`sample_pairing`]: the configuration (pairing) model, a uniform
//!   perfect matching on n·d semi-edge points projected to a multigraph.
//! - [`sample_uniform_rejection`]: retries the pairing model until the
//!   outcome is simple; conditional on simplicity the result is exactly
//!   uniform on G_{n,d}.
//! - [`sample_switching_chain`]: random walk on G_{n,d} via degree-
//!   preserving 4-cycle switchings from a deterministic circulant start.
//!   Approximate-uniform; certified against enumeration at tiny sizes.
//! - [`sample_pairing_repair`]: pairing model followed by switching-based
//!   removal of loops and parallel edges. Approximate-uniform, O(n·d);
//!   the scalable fallback when rejection acceptance e^{−(d²−1)/4} is
//!   negligible and the chain's burn-in is unaffordable.
//! - [`enumerate_regular`] / [`enumerate_regular_via_pairings`]: two
//!   independent exhaustive enumerations of all labelled simple d-regular
//!   graphs at tiny n, used as oracles for uniformity and exact
//!   probability tests.
//!
//! Only rejection is exactly uniform. Whether the approximate samplers'
//! residual bias is material for critical-window statistics at large d is
//! an open empirical question; experiment rows carry sampler provenance
//! so the choice stays visible downstream.

use crate::graph::{normalize_edge, GraphError, Multigraph, RegularGraph};
use crate::rng::Xoshiro256;
use crate::stats::binomial_ci_half_width;
use std::collections::HashSet;
use std::fmt;

pub const DEFAULT_ENUMERATION_CAP: u32 = 8;

/// Rejection is worthwhile when the simplicity probability estimate
/// e^{−(d²−1)/4} is at least this threshold.
pub const REJECTION_ACCEPTANCE_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Debug)]
pub enum SampleError {
    Graph(GraphError),
    AttemptsExhausted { attempts: u64 },
    EnumerationCapExceeded { n: u32, cap: u32 },
    RepairFailed { remaining_defects: usize },
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::Graph(e) => write!(f, "{e}"),
            SampleError::AttemptsExhausted { attempts } => {
                write!(f, "no simple graph found in {attempts} pairing attempts")
            }
            SampleError::EnumerationCapExceeded { n, cap } => {
                write!(f, "n = {n} exceeds enumeration cap {cap}")
            }
            SampleError::RepairFailed { remaining_defects } => {
                write!(f, "switching repair stuck with {remaining_defects} defects")
            }
        }
    }
}

impl std::error::Error for SampleError {}

impl From<GraphError> for SampleError {
    fn from(e: GraphError) -> Self {
        SampleError::Graph(e)
    }
}

// Multigraphs tolerate any d >= 0 (loops allowed); simple-graph samplers
// check d <= n-1 themselves. Only parity is universal.
fn check_pairing_parameters(n: u32, d: u32) -> Result<(), SampleError> {
    if !(n as u64 * d as u64).is_multiple_of(2) {
        return Err(SampleError::Graph(GraphError::OddDegreeSum { n, d }));
    }
    Ok(())
}

/// One draw of the configuration model: shuffle the n·d semi-edge points
/// and pair them consecutively, then project point i to vertex i / d.
pub fn sample_pairing(n: u32, d: u32, rng: &mut Xoshiro256) -> Result<Multigraph, SampleError> {
    check_pairing_parameters(n, d)?;
    let mut points: Vec<u32> = (0..n * d).collect();
    rng.shuffle(&mut points);
    let edges: Vec<(u32, u32)> = points
        .chunks_exact(2)
        .map(|c| normalize_edge(c[0] / d, c[1] / d))
        .collect();
    Ok(Multigraph::new(n, d, edges)?)
}

/// Reusable pairing workspace: the rejection sampler draws many pairings
/// and only keeps simple ones, so allocations are recycled.
struct PairingWorkspace {
    n: u32,
    d: u32,
    points: Vec<u32>,
    rows: Vec<u32>,
    fill: Vec<u32>,
}

impl PairingWorkspace {
    fn new(n: u32, d: u32) -> Self {
        PairingWorkspace {
            n,
            d,
            points: (0..n * d).collect(),
            rows: vec![0; n as usize * d as usize],
            fill: vec![0; n as usize],
        }
    }

    /// Draws one pairing; returns true if the projection is simple, leaving
    /// sorted neighbor rows in `self.rows`.
    fn draw_simple(&mut self, rng: &mut Xoshiro256) -> bool {
        let d = self.d as usize;
        rng.shuffle(&mut self.points);
        self.fill.fill(0);
        for c in self.points.chunks_exact(2) {
            let (u, v) = (c[0] / self.d, c[1] / self.d);
            if u == v {
                return false; // loop
            }
            self.rows[u as usize * d + self.fill[u as usize] as usize] = v;
            self.rows[v as usize * d + self.fill[v as usize] as usize] = u;
            self.fill[u as usize] += 1;
            self.fill[v as usize] += 1;
        }
        for v in 0..self.n as usize {
            let row = &mut self.rows[v * d..(v + 1) * d];
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return false; // parallel edge
            }
        }
        true
    }

    fn edges(&self) -> Vec<(u32, u32)> {
        let d = self.d as usize;
        let mut edges = Vec::with_capacity(self.n as usize * d / 2);
        for v in 0..self.n {
            for &w in &self.rows[v as usize * d..(v as usize + 1) * d] {
                if v < w {
                    edges.push((v, w));
                }
            }
        }
        edges
    }
}

/// Exactly uniform sampler: pairing model conditioned on simplicity.
/// Fails with `AttemptsExhausted` after `max_attempts` non-simple draws.
pub fn sample_uniform_rejection(
    n: u32,
    d: u32,
    rng: &mut Xoshiro256,
    max_attempts: u64,
) -> Result<RegularGraph, SampleError> {
    check_pairing_parameters(n, d)?;
    if d == 0 || d > n - 1 {
        return Err(SampleError::Graph(GraphError::DegreeOutOfRange { n, d }));
    }
    let mut ws = PairingWorkspace::new(n, d);
    for _ in 0..max_attempts {
        if ws.draw_simple(rng) {
            let edges = ws.edges();
            return Ok(RegularGraph::from_edges(n, d, &edges)?);
        }
    }
    Err(SampleError::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// Asymptotic simplicity probability of the pairing model, e^{−(d²−1)/4}.
pub fn estimated_acceptance(d: u32) -> f64 {
    (-(d as f64 * d as f64 - 1.0) / 4.0).exp()
}

/// Monte Carlo estimate of P[pairing model is simple].
#[derive(Clone, Debug, serde::Serialize)]
pub struct SimpleProbEstimate {
    pub n: u32,
    pub d: u32,
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    /// Binomial 95% confidence half-width (normal approximation).
    pub ci_half_width: f64,
}

pub fn estimate_simple_probability(
    n: u32,
    d: u32,
    trials: u64,
    rng: &mut Xoshiro256,
) -> Result<SimpleProbEstimate, SampleError> {
    assert!(trials >= 1);
    check_pairing_parameters(n, d)?;
    let mut ws = PairingWorkspace::new(n, d);
    let mut successes = 0u64;
    if n == 1 {
        // All pairings are loops; the workspace path assumes d <= n-1.
        return Ok(SimpleProbEstimate {
            n,
            d,
            trials,
            successes: if d == 0 { trials } else { 0 },
            fraction: if d == 0 { 1.0 } else { 0.0 },
            ci_half_width: 0.0,
        });
    }
    for _ in 0..trials {
        if ws.draw_simple(rng) {
            successes += 1;
        }
    }
    Ok(SimpleProbEstimate {
        n,
        d,
        trials,
        successes,
        fraction: successes as f64 / trials as f64,
        ci_half_width: binomial_ci_half_width(successes, trials),
    })
}

// ---------------------------------------------------------------------------
// Mutable graph used by the switching chain and the pairing repair.
// ---------------------------------------------------------------------------

struct MutGraph {
    n: u32,
    d: u32,
    /// Flat adjacency, each row sorted.
    adj: Vec<u32>,
    /// Normalized edges in arbitrary order (slots are rewritten in place).
    edges: Vec<(u32, u32)>,
}

impl MutGraph {
    fn from_regular(g: &RegularGraph) -> MutGraph {
        let d = g.d() as usize;
        let mut adj = vec![0u32; g.n() as usize * d];
        for v in 0..g.n() {
            for (i, w) in g.neighbors(v).enumerate() {
                adj[v as usize * d + i] = w;
            }
        }
        MutGraph {
            n: g.n(),
            d: g.d(),
            adj,
            edges: g.edges().collect(),
        }
    }

    #[inline]
    fn has_edge(&self, u: u32, v: u32) -> bool {
        if u == v {
            return false;
        }
        let d = self.d as usize;
        self.adj[u as usize * d..(u as usize + 1) * d]
            .binary_search(&v)
            .is_ok()
    }

    fn replace_neighbor(&mut self, v: u32, old: u32, new: u32) {
        let d = self.d as usize;
        let row = &mut self.adj[v as usize * d..(v as usize + 1) * d];
        let pos = row.binary_search(&old).expect("neighbor not found");
        row[pos] = new;
        if new > old {
            let mut i = pos;
            while i + 1 < row.len() && row[i] > row[i + 1] {
                row.swap(i, i + 1);
                i += 1;
            }
        } else {
            let mut i = pos;
            while i > 0 && row[i - 1] > row[i] {
                row.swap(i - 1, i);
                i -= 1;
            }
        }
    }

    /// Attempts the switching that deletes edges at slots i and j (oriented
    /// as (x1,x2) and (x3,x4)) and adds x1x4, x2x3. Returns false and leaves
    /// the graph untouched when a precondition fails.
    fn try_switch(&mut self, i: usize, j: usize, flip1: bool, flip2: bool) -> bool {
        if i == j {
            return false;
        }
        let (mut x1, mut x2) = self.edges[i];
        if flip1 {
            std::mem::swap(&mut x1, &mut x2);
        }
        let (mut x3, mut x4) = self.edges[j];
        if flip2 {
            std::mem::swap(&mut x3, &mut x4);
        }
        if x1 == x3 || x1 == x4 || x2 == x3 || x2 == x4 {
            return false;
        }
        if self.has_edge(x1, x4) || self.has_edge(x2, x3) {
            return false;
        }
        self.replace_neighbor(x1, x2, x4);
        self.replace_neighbor(x2, x1, x3);
        self.replace_neighbor(x3, x4, x2);
        self.replace_neighbor(x4, x3, x1);
        self.edges[i] = normalize_edge(x1, x4);
        self.edges[j] = normalize_edge(x2, x3);
        true
    }

    fn into_regular(mut self) -> Result<RegularGraph, GraphError> {
        self.edges.sort_unstable();
        RegularGraph::from_edges(self.n, self.d, &self.edges)
    }
}

/// Approximate-uniform sampler: `burn_in` uniform random switching
/// proposals from the deterministic circulant start graph. A proposal is
/// two uniformly ordered edges mapped to a candidate 4-cycle; invalid
/// proposals are rejected in place.
///
/// Rejections count toward `burn_in`: the proposal kernel is symmetric,
/// so the walk with its rejection self-loops has the uniform stationary
/// law, whereas stopping after a fixed number of accepted moves follows
/// the embedded jump chain, which overweights graphs with many valid
/// switchings (measurably non-uniform already at (n, d) = (6, 3)).
pub fn sample_switching_chain(
    n: u32,
    d: u32,
    rng: &mut Xoshiro256,
    burn_in: u64,
) -> Result<RegularGraph, SampleError> {
    let start = RegularGraph::circulant(n, d)?;
    if d == n - 1 {
        return Ok(start); // complete graph: no valid switchings exist
    }
    if burn_in == 0 {
        return Ok(start);
    }
    let mut g = MutGraph::from_regular(&start);
    let m = g.edges.len() as u64;
    for _ in 0..burn_in {
        let i = rng.range(m) as usize;
        let j = rng.range(m) as usize;
        let bits = rng.next_u64();
        g.try_switch(i, j, bits & 1 == 1, bits & 2 == 2);
    }
    Ok(g.into_regular()?)
}

/// Default chain burn-in: 50 proposals per semi-edge.
pub fn default_chain_burn_in(n: u32, d: u32) -> u64 {
    50 * n as u64 * d as u64
}

/// Pairing model followed by switching repair: every loop and surplus
/// parallel edge is removed by a uniformly chosen valid switching with a
/// random partner edge. Output is simple and d-regular; the distribution
/// is approximately uniform (exact at the level of degree structure).
pub fn sample_pairing_repair(
    n: u32,
    d: u32,
    rng: &mut Xoshiro256,
) -> Result<RegularGraph, SampleError> {
    check_pairing_parameters(n, d)?;
    if d == 0 || d > n - 1 {
        return Err(SampleError::Graph(GraphError::DegreeOutOfRange { n, d }));
    }
    let mg = sample_pairing(n, d, rng)?;
    let mut edges = mg.edges;
    let m = edges.len();

    // Sorted adjacency rows double as the multiplicity structure: loops
    // put their vertex in its own row twice, parallel edges repeat an
    // entry. One counting-sort build serves both defect queries and the
    // final graph.
    let dd = d as usize;
    let mut adj = vec![0u32; n as usize * dd];
    let mut fill = vec![0u32; n as usize];
    for &(u, v) in &edges {
        adj[u as usize * dd + fill[u as usize] as usize] = v;
        fill[u as usize] += 1;
        adj[v as usize * dd + fill[v as usize] as usize] = u;
        fill[v as usize] += 1;
    }
    for v in 0..n as usize {
        adj[v * dd..(v + 1) * dd].sort_unstable();
    }
    let multiplicity = |adj: &[u32], u: u32, v: u32| -> u32 {
        adj[u as usize * dd..(u as usize + 1) * dd]
            .iter()
            .filter(|&&w| w == v)
            .count() as u32
    };
    let is_defect = |adj: &[u32], (u, v): (u32, u32)| u == v || multiplicity(adj, u, v) > 1;

    // One pass over a sorted copy marks every loop and all-but-one
    // instance of each parallel group. Repairs never create new defects,
    // so the worklist is complete; entries are rechecked at fix time
    // because an earlier repair may have consumed the surplus.
    let mut tagged: Vec<(u32, u32, u32)> = edges
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| (u, v, i as u32))
        .collect();
    tagged.sort_unstable();
    let mut worklist: Vec<usize> = Vec::new();
    for (idx, &(u, v, slot)) in tagged.iter().enumerate() {
        let duplicate = idx > 0 && (tagged[idx - 1].0, tagged[idx - 1].1) == (u, v);
        if u == v || duplicate {
            worklist.push(slot as usize);
        }
    }
    drop(tagged);

    let mut remaining = 0usize;
    for &i in &worklist {
        let e = edges[i];
        if !is_defect(&adj, e) {
            continue;
        }
        let (u, v) = e;
        let mut fixed = false;
        for _try in 0..2_000 {
            let j = rng.range(m as u64) as usize;
            if j == i {
                continue;
            }
            let (mut x, mut y) = edges[j];
            if rng.next_u64() & 1 == 1 {
                std::mem::swap(&mut x, &mut y);
            }
            // Replace {u,v}, {x,y} by {u,x}, {v,y}.
            if x == u || x == v || y == u || y == v {
                continue;
            }
            let new1 = normalize_edge(u, x);
            let new2 = normalize_edge(v, y);
            // Two loops would map onto the same pair twice.
            if new1 == new2 {
                continue;
            }
            if multiplicity(&adj, u, x) > 0 || multiplicity(&adj, v, y) > 0 {
                continue;
            }
            remove_row_entry(&mut adj, dd, u, v);
            remove_row_entry(&mut adj, dd, v, u);
            remove_row_entry(&mut adj, dd, x, y);
            remove_row_entry(&mut adj, dd, y, x);
            insert_row_entry(&mut adj, dd, u, x);
            insert_row_entry(&mut adj, dd, x, u);
            insert_row_entry(&mut adj, dd, v, y);
            insert_row_entry(&mut adj, dd, y, v);
            edges[i] = new1;
            edges[j] = new2;
            fixed = true;
            break;
        }
        if !fixed {
            remaining += 1;
        }
    }
    if remaining > 0 {
        return Err(SampleError::RepairFailed {
            remaining_defects: remaining,
        });
    }
    edges.sort_unstable();
    Ok(RegularGraph::from_sorted_parts(n, d, adj, edges))
}

/// Removes one occurrence of `val` from v's sorted row, shifting left and
/// refilling the tail slot; the row temporarily holds a sentinel that the
/// matching insert overwrites.
fn remove_row_entry(adj: &mut [u32], d: usize, v: u32, val: u32) {
    let row = &mut adj[v as usize * d..(v as usize + 1) * d];
    let pos = row.binary_search(&val).expect("row entry present");
    row.copy_within(pos + 1.., pos);
    row[d - 1] = u32::MAX;
}

/// Inserts `val` into v's sorted row at the sentinel slot left by the
/// preceding removal.
fn insert_row_entry(adj: &mut [u32], d: usize, v: u32, val: u32) {
    let row = &mut adj[v as usize * d..(v as usize + 1) * d];
    debug_assert_eq!(row[d - 1], u32::MAX, "insert must follow a removal");
    let pos = row[..d - 1].partition_point(|&w| w < val);
    row.copy_within(pos..d - 1, pos + 1);
    row[pos] = val;
}

// ---------------------------------------------------------------------------
// Sampler policy
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    CompleteShortcut,
    Rejection,
    SwitchingChain,
    PairingRepair,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SamplerKind::CompleteShortcut => "complete",
            SamplerKind::Rejection => "rejection",
            SamplerKind::SwitchingChain => "switching_chain",
            SamplerKind::PairingRepair => "pairing_repair",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerPolicy {
    /// d = n−1 short-circuits to K_n; rejection while the acceptance
    /// estimate clears [`REJECTION_ACCEPTANCE_THRESHOLD`]; otherwise
    /// pairing + switching repair.
    Auto,
    ForceRejection,
    ForceChain,
    ForcePairingRepair,
}

impl SamplerPolicy {
    pub fn parse(s: &str) -> Option<SamplerPolicy> {
        match s {
            "auto" => Some(SamplerPolicy::Auto),
            "rejection" => Some(SamplerPolicy::ForceRejection),
            "chain" | "switching-chain" | "switching_chain" => Some(SamplerPolicy::ForceChain),
            "pairing-repair" | "pairing_repair" | "repair" => Some(SamplerPolicy::ForcePairingRepair),
            _ => None,
        }
    }
}

/// Attempts budget for rejection so that failure is overwhelmingly unlikely
/// at the policy's acceptance threshold.
pub fn default_rejection_attempts(d: u32) -> u64 {
    let est = estimated_acceptance(d).max(1e-12);
    ((200.0 / est).ceil() as u64).clamp(1_000, 10_000_000)
}

pub fn sample_graph(
    n: u32,
    d: u32,
    policy: SamplerPolicy,
    rng: &mut Xoshiro256,
) -> Result<(RegularGraph, SamplerKind), SampleError> {
    if n >= 2 && d == n - 1 {
        return Ok((RegularGraph::complete(n)?, SamplerKind::CompleteShortcut));
    }
    match policy {
        SamplerPolicy::Auto => {
            if estimated_acceptance(d) >= REJECTION_ACCEPTANCE_THRESHOLD {
                let g = sample_uniform_rejection(n, d, rng, default_rejection_attempts(d))?;
                Ok((g, SamplerKind::Rejection))
            } else {
                let g = sample_pairing_repair(n, d, rng)?;
                Ok((g, SamplerKind::PairingRepair))
            }
        }
        SamplerPolicy::ForceRejection => {
            let g = sample_uniform_rejection(n, d, rng, default_rejection_attempts(d))?;
            Ok((g, SamplerKind::Rejection))
        }
        SamplerPolicy::ForceChain => {
            let g = sample_switching_chain(n, d, rng, default_chain_burn_in(n, d))?;
            Ok((g, SamplerKind::SwitchingChain))
        }
        SamplerPolicy::ForcePairingRepair => {
            let g = sample_pairing_repair(n, d, rng)?;
            Ok((g, SamplerKind::PairingRepair))
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration oracles
// ---------------------------------------------------------------------------

/// Canonical signature: the sorted edge list.
pub fn edge_signature(g: &RegularGraph) -> Vec<(u32, u32)> {
    g.edges().collect()
}

/// All labelled simple d-regular graphs on n vertices, by backtracking
/// edge extension: process vertices in increasing order, assigning each
/// vertex its set of higher-indexed neighbors. Every labelled graph is
/// produced exactly once. Returns the empty list when n·d is odd.
pub fn enumerate_regular(n: u32, d: u32) -> Result<Vec<RegularGraph>, SampleError> {
    enumerate_regular_capped(n, d, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_regular_capped(
    n: u32,
    d: u32,
    cap: u32,
) -> Result<Vec<RegularGraph>, SampleError> {
    if n >= 2 && d == n - 1 {
        return Ok(vec![RegularGraph::complete(n)?]);
    }
    if n > cap {
        return Err(SampleError::EnumerationCapExceeded { n, cap });
    }
    if n == 0 || d >= n {
        return Ok(vec![]);
    }
    if !(n as u64 * d as u64).is_multiple_of(2) {
        return Ok(vec![]);
    }
    if d == 0 {
        return Ok(vec![RegularGraph::from_edges(n, 0, &[])?]);
    }
    let mut residual = vec![d; n as usize];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut out = Vec::new();
    extend_vertex(0, n, d, &mut residual, &mut edges, &mut out);
    let mut graphs: Vec<RegularGraph> = out
        .into_iter()
        .map(|es| RegularGraph::from_edges(n, d, &es).expect("enumerated graph must validate"))
        .collect();
    graphs.sort_by_key(edge_signature);
    Ok(graphs)
}

fn extend_vertex(
    u: u32,
    n: u32,
    d: u32,
    residual: &mut [u32],
    edges: &mut Vec<(u32, u32)>,
    out: &mut Vec<Vec<(u32, u32)>>,
) {
    if u == n {
        if residual.iter().all(|&r| r == 0) {
            out.push(edges.clone());
        }
        return;
    }
    let need = residual[u as usize];
    if need == 0 {
        extend_vertex(u + 1, n, d, residual, edges, out);
        return;
    }
    // Choose `need` higher-indexed neighbors with spare capacity.
    let mut chosen: Vec<u32> = Vec::with_capacity(need as usize);
    choose_neighbors(u, u + 1, need, n, d, residual, edges, &mut chosen, out);
}

#[allow(clippy::too_many_arguments)]
fn choose_neighbors(
    u: u32,
    from: u32,
    need: u32,
    n: u32,
    d: u32,
    residual: &mut [u32],
    edges: &mut Vec<(u32, u32)>,
    chosen: &mut Vec<u32>,
    out: &mut Vec<Vec<(u32, u32)>>,
) {
    if need == 0 {
        residual[u as usize] = 0;
        extend_vertex(u + 1, n, d, residual, edges, out);
        residual[u as usize] = chosen.len() as u32;
        return;
    }
    if n - from < need {
        return; // not enough candidates left
    }
    for v in from..n {
        if residual[v as usize] == 0 {
            continue;
        }
        residual[v as usize] -= 1;
        edges.push((u, v));
        chosen.push(v);
        choose_neighbors(u, v + 1, need - 1, n, d, residual, edges, chosen, out);
        chosen.pop();
        edges.pop();
        residual[v as usize] += 1;
    }
}

/// Independent enumeration oracle: recursively enumerate perfect matchings
/// of the n·d semi-edge points, pruning any branch that creates a loop or
/// parallel edge, and deduplicate projected graphs. Also returns the count
/// of simple matchings (each simple graph is hit (d!)^n times).
pub fn enumerate_regular_via_pairings(
    n: u32,
    d: u32,
) -> Result<(Vec<RegularGraph>, u64), SampleError> {
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(SampleError::EnumerationCapExceeded {
            n,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    if n == 0 || d == 0 || d >= n || !(n as u64 * d as u64).is_multiple_of(2) {
        return Ok((
            enumerate_regular_capped(n.min(DEFAULT_ENUMERATION_CAP), d, DEFAULT_ENUMERATION_CAP)?,
            0,
        ));
    }
    let points = (n * d) as usize;
    let mut matched = vec![false; points];
    // Adjacency bitmask per vertex; n <= 8 fits in u8 but use u32 for room.
    let mut adjmask = vec![0u32; n as usize];
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(points / 2);
    let mut sigs: HashSet<Vec<(u32, u32)>> = HashSet::new();
    let mut simple_matchings = 0u64;
    match_points(
        d,
        &mut matched,
        &mut adjmask,
        &mut pairs,
        &mut sigs,
        &mut simple_matchings,
    );
    let mut graphs: Vec<RegularGraph> = sigs
        .into_iter()
        .map(|es| RegularGraph::from_edges(n, d, &es).expect("projected graph must validate"))
        .collect();
    graphs.sort_by_key(edge_signature);
    Ok((graphs, simple_matchings))
}

fn match_points(
    d: u32,
    matched: &mut [bool],
    adjmask: &mut [u32],
    pairs: &mut Vec<(u32, u32)>,
    sigs: &mut HashSet<Vec<(u32, u32)>>,
    simple_matchings: &mut u64,
) {
    let first = match matched.iter().position(|&m| !m) {
        Some(p) => p,
        None => {
            *simple_matchings += 1;
            let mut es: Vec<(u32, u32)> = pairs.clone();
            es.sort_unstable();
            sigs.insert(es);
            return;
        }
    };
    matched[first] = true;
    let u = first as u32 / d;
    for q in (first + 1)..matched.len() {
        if matched[q] {
            continue;
        }
        let v = q as u32 / d;
        if v == u || adjmask[u as usize] & (1 << v) != 0 {
            continue; // loop or parallel edge: prune
        }
        matched[q] = true;
        adjmask[u as usize] |= 1 << v;
        adjmask[v as usize] |= 1 << u;
        pairs.push(normalize_edge(u, v));
        match_points(d, matched, adjmask, pairs, sigs, simple_matchings);
        pairs.pop();
        adjmask[u as usize] &= !(1 << v);
        adjmask[v as usize] &= !(1 << u);
        matched[q] = false;
    }
    matched[first] = false;
}

/// (2m−1)!! — the number of perfect matchings of 2m points.
pub fn count_all_pairings(points: u64) -> u64 {
    assert!(points.is_multiple_of(2));
    let mut acc = 1u64;
    let mut k = points.saturating_sub(1);
    while k >= 1 {
        acc = acc.checked_mul(k).expect("double factorial overflow");
        if k < 2 {
            break;
        }
        k -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn rng(seed: u64) -> Xoshiro256 {
        StreamKey::new(seed).rng()
    }

    #[test]
    fn pairing_unique_matchings() {
        let mut r = rng(1);
        let mg = sample_pairing(2, 1, &mut r).unwrap();
        assert_eq!(mg.edges, vec![(0, 1)]);
        assert!(mg.is_simple());
        let mg = sample_pairing(1, 2, &mut r).unwrap();
        assert_eq!(mg.edges, vec![(0, 0)]);
        assert!(!mg.is_simple());
    }

    #[test]
    fn pairing_rejects_odd_parity() {
        let mut r = rng(2);
        assert!(matches!(
            sample_pairing(5, 3, &mut r),
            Err(SampleError::Graph(GraphError::OddDegreeSum { .. }))
        ));
    }

    #[test]
    fn rejection_on_k4_support() {
        let mut r = rng(3);
        for _ in 0..10 {
            let g = sample_uniform_rejection(4, 3, &mut r, 10_000).unwrap();
            assert_eq!(
                edge_signature(&g),
                vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
            );
        }
    }

    #[test]
    fn rejection_exhausts_for_dense_d() {
        // Acceptance ~ e^{-Omega(d^2)} is hopeless at n=100, d=20.
        let mut r = rng(4);
        let err = sample_uniform_rejection(100, 20, &mut r, 1_000).unwrap_err();
        assert!(matches!(err, SampleError::AttemptsExhausted { attempts: 1_000 }));
    }

    #[test]
    fn chain_burn_in_zero_is_circulant() {
        let mut r = rng(5);
        let g = sample_switching_chain(8, 3, &mut r, 0).unwrap();
        let c = RegularGraph::circulant(8, 3).unwrap();
        assert_eq!(edge_signature(&g), edge_signature(&c));
    }

    #[test]
    fn chain_outputs_stay_valid() {
        let mut r = rng(6);
        for seed in 0..5u64 {
            let mut r2 = rng(seed);
            let g = sample_switching_chain(12, 3, &mut r2, 500).unwrap();
            g.validate().unwrap();
        }
        let g = sample_switching_chain(10, 4, &mut r, 1_000).unwrap();
        g.validate().unwrap();
    }

    #[test]
    fn pairing_repair_outputs_are_simple_regular() {
        for (n, d, seed) in [(30u32, 4u32, 7u64), (50, 5, 8), (40, 7, 9), (64, 9, 10)] {
            let mut r = rng(seed);
            let g = sample_pairing_repair(n, d, &mut r).unwrap();
            g.validate().unwrap();
            assert_eq!(g.d(), d);
        }
    }

    #[test]
    fn enumerate_k4_unique() {
        let graphs = enumerate_regular(4, 3).unwrap();
        assert_eq!(graphs.len(), 1);
        assert_eq!(
            edge_signature(&graphs[0]),
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn enumerate_odd_parity_is_empty() {
        assert!(enumerate_regular(5, 3).unwrap().is_empty());
    }

    #[test]
    fn enumerate_counts_match_known_values() {
        // Labelled 2-regular graphs on 5 vertices: the 12 pentagon labellings.
        assert_eq!(enumerate_regular(5, 2).unwrap().len(), 12);
        // On 6 vertices: 60 hexagons + 10 triangle pairs.
        assert_eq!(enumerate_regular(6, 2).unwrap().len(), 70);
        // Labelled cubic graphs on 6 vertices: 70 (10 copies of K_{3,3},
        // 60 of the triangular prism).
        assert_eq!(enumerate_regular(6, 3).unwrap().len(), 70);
    }

    #[test]
    fn enumeration_cap_enforced() {
        assert!(matches!(
            enumerate_regular(9, 2),
            Err(SampleError::EnumerationCapExceeded { .. })
        ));
        // d = n-1 shortcut bypasses the cap.
        let ks = enumerate_regular(12, 11).unwrap();
        assert_eq!(ks.len(), 1);
    }

    #[test]
    fn dual_enumeration_agrees_at_4_3() {
        let a = enumerate_regular(4, 3).unwrap();
        let (b, simple_matchings) = enumerate_regular_via_pairings(4, 3).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(edge_signature(x), edge_signature(y));
        }
        // Each simple graph is reached by (d!)^n = 6^4 matchings.
        assert_eq!(simple_matchings, 1296);
        assert_eq!(count_all_pairings(12), 10_395);
    }

    #[test]
    fn estimate_simple_probability_endpoints() {
        let mut r = rng(11);
        let est = estimate_simple_probability(2, 1, 100, &mut r).unwrap();
        assert_eq!(est.fraction, 1.0);
        let est = estimate_simple_probability(1, 2, 100, &mut r).unwrap();
        assert_eq!(est.fraction, 0.0);
    }

    #[test]
    fn auto_policy_routes_by_density() {
        let mut r = rng(12);
        let (g, kind) = sample_graph(20, 19, SamplerPolicy::Auto, &mut r).unwrap();
        assert_eq!(kind, SamplerKind::CompleteShortcut);
        assert_eq!(g.d(), 19);
        let (_, kind) = sample_graph(24, 3, SamplerPolicy::Auto, &mut r).unwrap();
        assert_eq!(kind, SamplerKind::Rejection);
        let (g, kind) = sample_graph(60, 8, SamplerPolicy::Auto, &mut r).unwrap();
        assert_eq!(kind, SamplerKind::PairingRepair);
        g.validate().unwrap();
    }

    #[test]
    fn acceptance_estimate_formula() {
        assert!((estimated_acceptance(3) - (-2.0f64).exp()).abs() < 1e-12);
        assert!(estimated_acceptance(3) >= REJECTION_ACCEPTANCE_THRESHOLD);
        assert!(estimated_acceptance(7) < REJECTION_ACCEPTANCE_THRESHOLD);
    }
}
