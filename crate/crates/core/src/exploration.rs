//! The frontier exploration process.
//!
//! The process reveals percolation indicators one edge at a time on an
//! input (G, 𝔖). It maintains the explored set S_t, the bipartite graph
//! F_t of exposed-but-failed edges between S_t and its complement, the
//! induced graph H_t = G[S_t], and the frontier
//! X_t = Σ_{u∈S_t} (d − d_{H_t}(u) − d_{F_t}(u)), the number of unexposed
//! edges leaving S_t.
//!
//! While X_t > 0 the active vertex v_{t+1} is the least explored vertex
//! with unexposed outward edges; the partner w_{t+1} minimizes
//! σ_{v_{t+1}}(ℓ(w)) over unexposed non-failed neighbors outside S_t, and
//! that single edge is exposed. On failure the edge joins F_t (X drops by
//! one). On success w joins S_t with
//!   Y_{t+1} = d_{F_t}(w),  Z_{t+1} = d_{G,S_t}(w) − Y_{t+1} − 1,
//!   η_{t+1} = d − 2 − Y_{t+1} − 2 Z_{t+1}.
//! When X_t = 0 a fresh component starts at the unexplored vertex with the
//! fewest failed edges (ties to the smallest id) and η_{t+1} = d − Y_{t+1}.

use crate::graph::RegularGraph;
use crate::rng::{edge_key, StreamKey, Xoshiro256};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// An input (G, 𝔖): the graph plus one uniform permutation of {1..d} per
/// vertex. Semi-edge labels are fixed by neighbor rank (the i-th smallest
/// neighbor of v carries label i), which loses no generality because σ_v
/// is uniform.
pub struct Input {
    graph: RegularGraph,
    /// Flat n·d table; σ_v(i) = perms[v·d + (i−1)].
    perms: Vec<u16>,
}

impl Input {
    /// Uniform 𝔖: each σ_v independent uniform on permutations of {1..d}.
    pub fn random(graph: RegularGraph, rng: &mut Xoshiro256) -> Input {
        let d = graph.d() as usize;
        assert!(d <= u16::MAX as usize, "degree too large for perm table");
        let n = graph.n() as usize;
        let mut perms = Vec::with_capacity(n * d);
        for _ in 0..n {
            perms.extend_from_slice(&rng.permutation(d));
        }
        Input { graph, perms }
    }

    /// Test hook: identity permutations make the partner choice "smallest
    /// ranked unexposed neighbor".
    pub fn with_identity_perms(graph: RegularGraph) -> Input {
        let d = graph.d() as usize;
        let n = graph.n() as usize;
        let one: Vec<u16> = (1..=d as u16).collect();
        let mut perms = Vec::with_capacity(n * d);
        for _ in 0..n {
            perms.extend_from_slice(&one);
        }
        Input { graph, perms }
    }

    pub fn graph(&self) -> &RegularGraph {
        &self.graph
    }

    /// σ_v(label), label in 1..=d.
    #[inline]
    pub fn sigma(&self, v: u32, label: u16) -> u16 {
        self.perms[v as usize * self.graph.d() as usize + label as usize - 1]
    }
}

/// Source of percolation indicators, queried lazily edge by edge.
pub trait IndicatorSource {
    fn indicator(&mut self, u: u32, v: u32) -> bool;
}

/// The production source: the same keyed Bernoulli draw the eager
/// percolation module uses, so lazy and eager exposure agree bit for bit.
#[derive(Clone, Copy, Debug)]
pub struct KeyedIndicators {
    pub stream: StreamKey,
    pub p: f64,
}

impl IndicatorSource for KeyedIndicators {
    #[inline]
    fn indicator(&mut self, u: u32, v: u32) -> bool {
        self.stream.bernoulli(edge_key(u, v), self.p)
    }
}

/// Test fixture: every indicator equals the constant.
pub struct ConstIndicators(pub bool);

impl IndicatorSource for ConstIndicators {
    fn indicator(&mut self, _: u32, _: u32) -> bool {
        self.0
    }
}

/// One step of the exploration.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    /// True when this step started a fresh component (X_t was 0).
    pub fresh: bool,
    /// Active vertex (absent on fresh steps).
    pub v: Option<u32>,
    pub w: u32,
    /// Exposed indicator (absent on fresh steps).
    pub indicator: Option<bool>,
    pub y: u32,
    pub z: u32,
    pub eta: i32,
    pub x_after: u64,
    pub s_size_after: u32,
    /// Component starters so far (|A_t|).
    pub a_after: u32,
    /// Vertices added through percolated edges so far (|S_t \ A_t|).
    pub c_after: u32,
    /// Component id of the component this step touched.
    pub comp: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExplorationError {
    /// S = V and X = 0: nothing left to expose.
    Exhausted,
}

impl fmt::Display for ExplorationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExplorationError::Exhausted => write!(f, "exploration exhausted: S = V and X = 0"),
        }
    }
}

impl std::error::Error for ExplorationError {}

/// How often the incremental frontier is recomputed from scratch and
/// checked against its definition.
const X_AUDIT_INTERVAL: u64 = 1 << 14;

/// Live state of one exploration run.
pub struct Explorer<'a> {
    input: &'a Input,
    t: u64,
    x: u64,
    in_s: Vec<bool>,
    comp_id: Vec<u32>,
    d_h: Vec<u32>,
    d_f: Vec<u32>,
    /// Exposure flags per adjacency slot (both directions marked).
    exposed: Vec<bool>,
    /// F-partners (inside S) of each unexplored vertex with failed edges.
    f_partners: HashMap<u32, Vec<u32>>,
    /// Explored vertices in order of addition.
    explored: Vec<u32>,
    /// Explored vertices with unexposed outward edges, by id.
    active: BTreeSet<u32>,
    /// Monotone cursor for the least unexplored vertex with d_F = 0.
    cursor0: u32,
    a_count: u32,
    c_count: u32,
    current_comp: u32,
}

impl<'a> Explorer<'a> {
    pub fn new(input: &'a Input) -> Explorer<'a> {
        let n = input.graph.n() as usize;
        let d = input.graph.d() as usize;
        Explorer {
            input,
            t: 0,
            x: 0,
            in_s: vec![false; n],
            comp_id: vec![u32::MAX; n],
            d_h: vec![0; n],
            d_f: vec![0; n],
            exposed: vec![false; n * d],
            f_partners: HashMap::new(),
            explored: Vec::new(),
            active: BTreeSet::new(),
            cursor0: 0,
            a_count: 0,
            c_count: 0,
            current_comp: u32::MAX,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn s_size(&self) -> u32 {
        self.explored.len() as u32
    }

    pub fn a_count(&self) -> u32 {
        self.a_count
    }

    pub fn c_count(&self) -> u32 {
        self.c_count
    }

    pub fn component_of(&self, v: u32) -> Option<u32> {
        let id = self.comp_id[v as usize];
        (id != u32::MAX).then_some(id)
    }

    /// Explored vertices in order of addition (the set S_t).
    pub fn explored(&self) -> &[u32] {
        &self.explored
    }

    /// Current failed-edge set F_t as (inside, outside) pairs.
    pub fn f_edge_list(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (&w, partners) in &self.f_partners {
            for &s in partners {
                out.push((s, w));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_exhausted(&self) -> bool {
        self.explored.len() == self.in_s.len() && self.x == 0
    }

    /// The frontier recomputed from its definition.
    pub fn x_from_scratch(&self) -> u64 {
        let d = self.input.graph.d() as u64;
        self.explored
            .iter()
            .map(|&u| d - self.d_h[u as usize] as u64 - self.d_f[u as usize] as u64)
            .sum()
    }

    #[inline]
    fn capacity(&self, u: u32) -> u32 {
        self.input.graph.d() - self.d_h[u as usize] - self.d_f[u as usize]
    }

    /// Least unexplored vertex minimizing d_F (ties to smallest id).
    fn fresh_vertex(&mut self) -> u32 {
        let n = self.in_s.len() as u32;
        while self.cursor0 < n {
            let v = self.cursor0 as usize;
            if !self.in_s[v] && self.d_f[v] == 0 {
                return self.cursor0;
            }
            // Skipped ids never become candidates again: S only grows and
            // d_F of unexplored vertices only increases.
            self.cursor0 += 1;
        }
        // Every unexplored vertex has failed edges; scan for the minimum.
        let mut best: Option<(u32, u32)> = None;
        for v in 0..n {
            if self.in_s[v as usize] {
                continue;
            }
            let key = (self.d_f[v as usize], v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        best.expect("fresh_vertex called with S = V").1
    }

    /// Adds w to S: updates H/F degrees of its neighbors, deletes failed
    /// edges at w, and maintains the active set. Returns (y, d_{G,S}(w))
    /// measured before the insertion.
    fn absorb(&mut self, w: u32) -> (u32, u32) {
        let g = &self.input.graph;
        let y = self.d_f[w as usize];
        let partners = self.f_partners.remove(&w).unwrap_or_default();
        debug_assert_eq!(partners.len() as u32, y);
        let mut neighbors_in_s = 0u32;
        self.in_s[w as usize] = true;
        self.comp_id[w as usize] = self.current_comp;
        self.explored.push(w);
        for u in g.neighbors(w) {
            if self.in_s[u as usize] && u != w {
                neighbors_in_s += 1;
                self.d_h[u as usize] += 1;
            }
        }
        for &s in &partners {
            debug_assert!(self.in_s[s as usize]);
            self.d_f[s as usize] -= 1;
        }
        // Neighbors in S that were not F-partners lost one unit of
        // capacity (a Z edge moved inside); drop the saturated ones.
        for u in g.neighbors(w) {
            if self.in_s[u as usize] && u != w && self.capacity(u) == 0 {
                self.active.remove(&u);
            }
        }
        self.d_f[w as usize] = 0;
        self.d_h[w as usize] = neighbors_in_s;
        if self.capacity(w) > 0 {
            self.active.insert(w);
        }
        (y, neighbors_in_s)
    }

    /// Advances the process by one step.
    pub fn step(
        &mut self,
        indicators: &mut impl IndicatorSource,
    ) -> Result<StepRecord, ExplorationError> {
        if self.is_exhausted() {
            return Err(ExplorationError::Exhausted);
        }
        let g = &self.input.graph;
        let d = g.d() as usize;
        let record = if self.x > 0 {
            let v = *self.active.first().expect("X > 0 requires an active vertex");
            debug_assert!(self.capacity(v) > 0);
            // Partner minimizing sigma_v over unexposed out-edges.
            let mut best: Option<(u16, u32, usize)> = None;
            for i in 0..d {
                if self.exposed[v as usize * d + i] {
                    continue;
                }
                let w = g.nth_neighbor(v, i);
                if self.in_s[w as usize] {
                    continue; // unexposed edge inside S stays unexposed
                }
                let key = self.input.sigma(v, i as u16 + 1);
                if best.is_none_or(|(s, _, _)| key < s) {
                    best = Some((key, w, i));
                }
            }
            let (_, w, slot) = best.expect("active vertex must have an unexposed out-edge");
            self.exposed[v as usize * d + slot] = true;
            let back = g
                .neighbor_rank(w, v)
                .expect("adjacency must be symmetric");
            self.exposed[w as usize * d + back] = true;
            let ind = indicators.indicator(v, w);
            let (y, z, eta) = if ind {
                let (y, neighbors_in_s) = self.absorb(w);
                self.c_count += 1;
                let z = neighbors_in_s - y - 1;
                let eta = g.d() as i64 - 2 - y as i64 - 2 * z as i64;
                (y, z, eta)
            } else {
                self.d_f[v as usize] += 1;
                self.d_f[w as usize] += 1;
                self.f_partners.entry(w).or_default().push(v);
                if self.capacity(v) == 0 {
                    self.active.remove(&v);
                }
                (0, 0, -1)
            };
            self.x = (self.x as i64 + eta) as u64;
            self.t += 1;
            StepRecord {
                t: self.t,
                fresh: false,
                v: Some(v),
                w,
                indicator: Some(ind),
                y,
                z,
                eta: eta as i32,
                x_after: self.x,
                s_size_after: self.s_size(),
                a_after: self.a_count,
                c_after: self.c_count,
                comp: self.current_comp,
            }
        } else {
            let w = self.fresh_vertex();
            self.current_comp = self.a_count;
            self.a_count += 1;
            let (y, neighbors_in_s) = self.absorb(w);
            // At X = 0 every explored neighbor of w is an F-partner.
            debug_assert_eq!(neighbors_in_s, y);
            let eta = g.d() as i64 - y as i64;
            self.x = (self.x as i64 + eta) as u64;
            self.t += 1;
            StepRecord {
                t: self.t,
                fresh: true,
                v: None,
                w,
                indicator: None,
                y,
                z: 0,
                eta: eta as i32,
                x_after: self.x,
                s_size_after: self.s_size(),
                a_after: self.a_count,
                c_after: self.c_count,
                comp: self.current_comp,
            }
        };
        if self.t.is_multiple_of(X_AUDIT_INTERVAL) {
            assert_eq!(
                self.x,
                self.x_from_scratch(),
                "incremental frontier diverged from its definition at t = {}",
                self.t
            );
        }
        Ok(record)
    }
}

/// A completed exploration run.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub n: u32,
    pub d: u32,
    pub p: f64,
    pub steps: Vec<StepRecord>,
    /// True when the process consumed the whole graph before t_max.
    pub exhausted: bool,
}

impl Trajectory {
    pub fn x_at(&self, t: u64) -> u64 {
        if t == 0 {
            0
        } else {
            self.steps[t as usize - 1].x_after
        }
    }

    pub fn s_size_at(&self, t: u64) -> u32 {
        if t == 0 {
            0
        } else {
            self.steps[t as usize - 1].s_size_after
        }
    }

    pub fn a_at(&self, t: u64) -> u32 {
        if t == 0 {
            0
        } else {
            self.steps[t as usize - 1].a_after
        }
    }

    pub fn c_at(&self, t: u64) -> u32 {
        if t == 0 {
            0
        } else {
            self.steps[t as usize - 1].c_after
        }
    }

    /// X_0, X_1, ..., X_T.
    pub fn x_series(&self) -> Vec<u64> {
        std::iter::once(0)
            .chain(self.steps.iter().map(|s| s.x_after))
            .collect()
    }

    /// Explored vertices grouped by exploration component id.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut comps: Vec<Vec<u32>> = Vec::new();
        for s in &self.steps {
            if s.fresh || s.indicator == Some(true) {
                if s.comp as usize >= comps.len() {
                    comps.resize(s.comp as usize + 1, Vec::new());
                }
                comps[s.comp as usize].push(s.w);
            }
        }
        comps
    }
}

/// Runs the exploration for at most `t_max` steps with an arbitrary
/// indicator source; `p` is recorded in the header only.
pub fn run_with(
    input: &Input,
    indicators: &mut impl IndicatorSource,
    p: f64,
    t_max: u64,
) -> Trajectory {
    let mut explorer = Explorer::new(input);
    let mut steps = Vec::new();
    let mut exhausted = false;
    while explorer.t() < t_max {
        match explorer.step(indicators) {
            Ok(rec) => steps.push(rec),
            Err(ExplorationError::Exhausted) => {
                exhausted = true;
                break;
            }
        }
    }
    if explorer.is_exhausted() {
        exhausted = true;
    }
    Trajectory {
        n: input.graph.n(),
        d: input.graph.d(),
        p,
        steps,
        exhausted,
    }
}

/// Runs the exploration against the keyed percolation indicators, making
/// the trajectory a deterministic function of (input, stream, p).
pub fn run(input: &Input, p: f64, stream: StreamKey, t_max: u64) -> Trajectory {
    let mut src = KeyedIndicators { stream, p };
    run_with(input, &mut src, p, t_max)
}

// ---------------------------------------------------------------------------
// Two-phase stopping-time experiment
// ---------------------------------------------------------------------------

/// Realized stopping times of the two-phase experiment with scale
/// parameter A at p = (1 − μ n^{−1/3})/(d−1):
///   h = A^{−1/4} d n^{1/3},  T₁ = ⌊5 d n^{2/3}/6⌋,  T₂ = ⌊2 A^{−1} d n^{2/3}⌋,
///   τ_h = min{t: X_t ≥ h} ∧ T₁,
///   τ_S¹ = min{t: |S_t| ≥ 3 n^{2/3}} (None if unobserved),
///   τ₁ = τ_h ∧ τ_S¹,
///   τ₀ = min{t: X_{τ_h+t} = 0} ∧ T₂,
///   τ_S² = min{t: |S_{τ_h+t} ∖ S_{τ_h}| ≥ 2 n^{2/3}} (None if unobserved),
///   τ₂ = τ₀ ∧ τ_S².
#[derive(Clone, Debug, Serialize)]
pub struct PhaseOutcome {
    pub n: u32,
    pub d: u32,
    pub mu: f64,
    pub a_param: f64,
    pub p: f64,
    pub h: f64,
    pub t1_cap: u64,
    pub t2_cap: u64,
    pub tau_h: u64,
    pub tau_s1: Option<u64>,
    pub tau_1: u64,
    pub tau_0: u64,
    pub tau_s2: Option<u64>,
    pub tau_2: u64,
    /// The event {τ_h < T₁, τ_h < τ_S¹}.
    pub e_holds: bool,
    /// |S_{τ_h+τ₂} ∖ S_{τ_h}|: explored growth of a single component
    /// during the second phase.
    pub s_gain: u32,
    /// Max over t ≤ τ₂ of W_t = h − min{h, X_{τ_h+t}}.
    pub w_max: f64,
    pub w_final: f64,
    pub x_at_tau_h: u64,
    /// The graph ran out of vertices before the caps (tiny-n safeguard).
    pub exhausted: bool,
}

pub fn two_phase_experiment(
    input: &Input,
    mu: f64,
    a_param: f64,
    stream: StreamKey,
) -> PhaseOutcome {
    assert!(mu >= 0.0 && a_param > 0.0);
    let n = input.graph.n();
    let d = input.graph.d();
    let nf = n as f64;
    let p = ((1.0 - mu * nf.powf(-1.0 / 3.0)) / (d as f64 - 1.0)).clamp(0.0, 1.0);
    let h = a_param.powf(-0.25) * d as f64 * nf.powf(1.0 / 3.0);
    let t1_cap = (5.0 * d as f64 * nf.powf(2.0 / 3.0) / 6.0).floor() as u64;
    let t2_cap = (2.0 * d as f64 * nf.powf(2.0 / 3.0) / a_param).floor() as u64;
    let s1_threshold = 3.0 * nf.powf(2.0 / 3.0);
    let s2_threshold = 2.0 * nf.powf(2.0 / 3.0);

    let mut indicators = KeyedIndicators { stream, p };
    let mut explorer = Explorer::new(input);
    let mut tau_s1: Option<u64> = None;
    let mut exhausted = false;

    // First phase: walk until X >= h or the cap.
    let tau_h = loop {
        if explorer.x() as f64 >= h {
            break explorer.t();
        }
        if explorer.t() >= t1_cap {
            break t1_cap;
        }
        match explorer.step(&mut indicators) {
            Ok(rec) => {
                if tau_s1.is_none() && rec.s_size_after as f64 >= s1_threshold {
                    tau_s1 = Some(rec.t);
                }
            }
            Err(ExplorationError::Exhausted) => {
                exhausted = true;
                break t1_cap;
            }
        }
    };
    let x_at_tau_h = explorer.x();
    let s_at_tau_h = explorer.s_size();
    let e_holds = tau_h < t1_cap && tau_s1.is_none_or(|s| tau_h < s);

    // Second phase: watch W_t = h − min(h, X) until X dies or S grows by
    // 2 n^{2/3}, capped at T2.
    let mut tau_0: Option<u64> = None;
    let mut tau_s2: Option<u64> = None;
    let mut w_max = h - h.min(x_at_tau_h as f64);
    let mut t2 = 0u64;
    let tau_2 = loop {
        let w_now = h - h.min(explorer.x() as f64);
        w_max = w_max.max(w_now);
        if explorer.x() == 0 {
            tau_0 = Some(t2);
            break t2;
        }
        let gain = explorer.s_size() - s_at_tau_h;
        if gain as f64 >= s2_threshold {
            tau_s2 = Some(t2);
            break t2;
        }
        if t2 >= t2_cap {
            break t2_cap;
        }
        match explorer.step(&mut indicators) {
            Ok(_) => t2 += 1,
            Err(ExplorationError::Exhausted) => {
                exhausted = true;
                tau_0 = Some(t2);
                break t2;
            }
        }
    };
    let s_gain = explorer.s_size() - s_at_tau_h;
    let w_final = h - h.min(explorer.x() as f64);
    w_max = w_max.max(w_final);

    PhaseOutcome {
        n,
        d,
        mu,
        a_param,
        p,
        h,
        t1_cap,
        t2_cap,
        tau_h,
        tau_s1,
        tau_1: tau_s1.map_or(tau_h, |s| s.min(tau_h)),
        tau_0: tau_0.unwrap_or(t2_cap),
        tau_s2,
        tau_2,
        e_holds,
        s_gain,
        w_max,
        w_final,
        x_at_tau_h,
        exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_uniform_rejection;
    use crate::stats::chi_square_uniform;

    fn k4() -> RegularGraph {
        RegularGraph::from_edges(4, 3, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn k4_forced_trajectory_identity_perms() {
        let input = Input::with_identity_perms(k4());
        let mut src = ConstIndicators(true);
        let traj = run_with(&input, &mut src, 1.0, 100);
        assert_eq!(traj.x_series(), vec![0, 3, 4, 3, 0]);
        let last = traj.steps.last().unwrap();
        assert_eq!((last.y, last.z, last.eta), (0, 2, -3));
        assert!(traj.exhausted);
        assert!(traj.steps[0].fresh);
        assert_eq!(traj.steps[0].eta, 3);
    }

    #[test]
    fn k4_forced_trajectory_any_seed() {
        // K4 is symmetric: the X trajectory is seed-independent at p = 1.
        for seed in 0..25u64 {
            let mut rng = StreamKey::new(seed).rng();
            let input = Input::random(k4(), &mut rng);
            let traj = run(&input, 1.0, StreamKey::new(seed).child(1), 100);
            assert_eq!(traj.x_series(), vec![0, 3, 4, 3, 0], "seed {seed}");
            let last = traj.steps.last().unwrap();
            assert_eq!((last.y, last.z, last.eta), (0, 2, -3));
        }
    }

    #[test]
    fn p_zero_yields_singletons_and_unit_drops() {
        let g = RegularGraph::circulant(12, 3).unwrap();
        let input = Input::with_identity_perms(g);
        let mut src = ConstIndicators(false);
        let traj = run_with(&input, &mut src, 0.0, 10_000);
        assert!(traj.exhausted);
        for s in &traj.steps {
            if s.fresh {
                assert_eq!(s.eta, 3 - s.y as i32);
            } else {
                assert_eq!(s.eta, -1);
                assert_eq!(s.indicator, Some(false));
            }
        }
        // All components singletons.
        for comp in traj.components() {
            assert_eq!(comp.len(), 1);
        }
        // S grew only by fresh vertices.
        let fresh_count = traj.steps.iter().filter(|s| s.fresh).count();
        assert_eq!(fresh_count, 12);
    }

    #[test]
    fn p_one_connected_explores_everything_in_one_component() {
        let g = RegularGraph::circulant(20, 4).unwrap();
        assert!(g.is_connected());
        let input = Input::with_identity_perms(g);
        let mut src = ConstIndicators(true);
        let traj = run_with(&input, &mut src, 1.0, 10_000);
        assert!(traj.exhausted);
        let last = traj.steps.last().unwrap();
        assert_eq!(last.a_after, 1);
        assert_eq!(last.s_size_after, 20);
    }

    #[test]
    fn f_edges_bounded_by_t_and_x_matches_definition() {
        let g = sample_uniform_rejection(60, 3, &mut StreamKey::new(5).rng(), 10_000).unwrap();
        let input = Input::random(g, &mut StreamKey::new(6).rng());
        let mut explorer = Explorer::new(&input);
        let mut src = KeyedIndicators {
            stream: StreamKey::new(7),
            p: 0.5,
        };
        let mut f_edges = 0u64;
        while let Ok(rec) = explorer.step(&mut src) {
            if rec.indicator == Some(false) {
                f_edges += 1;
            }
            // |E(F_t)| <= t, and eta in the allowed range.
            assert!(f_edges <= rec.t);
            assert!(rec.eta <= 3 && rec.eta >= -3);
            assert_eq!(explorer.x_from_scratch(), explorer.x());
        }
    }

    #[test]
    fn determinism_byte_for_byte() {
        let g = sample_uniform_rejection(80, 3, &mut StreamKey::new(8).rng(), 10_000).unwrap();
        let input = Input::random(g, &mut StreamKey::new(9).rng());
        let a = run(&input, 0.47, StreamKey::new(10), 500);
        let b = run(&input, 0.47, StreamKey::new(10), 500);
        assert_eq!(
            serde_json::to_string(&a.steps).unwrap(),
            serde_json::to_string(&b.steps).unwrap()
        );
    }

    #[test]
    fn sigma_first_value_is_uniform() {
        // sigma_v(1) across 10^4 iid permutations, chi-square at p > 1e-3.
        let g = RegularGraph::circulant(10_000, 5).unwrap();
        let input = Input::random(g, &mut StreamKey::new(11).rng());
        let mut counts = [0u64; 5];
        for v in 0..10_000u32 {
            counts[input.sigma(v, 1) as usize - 1] += 1;
        }
        let (_, p) = chi_square_uniform(&counts);
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn identity_perms_pick_smallest_ranked_neighbor() {
        let input = Input::with_identity_perms(k4());
        let mut src = ConstIndicators(true);
        let traj = run_with(&input, &mut src, 1.0, 100);
        // Fresh start at 0, then partners in rank order: 1, 2, 3.
        assert_eq!(traj.steps[0].w, 0);
        assert_eq!(traj.steps[1].w, 1);
        assert_eq!(traj.steps[2].w, 2);
        assert_eq!(traj.steps[3].w, 3);
    }

    #[test]
    fn fresh_step_with_failed_edges_reduces_eta() {
        // p = 0 on K4: later fresh vertices have accumulated failures, so
        // eta = d − Y with Y > 0.
        let input = Input::with_identity_perms(k4());
        let mut src = ConstIndicators(false);
        let traj = run_with(&input, &mut src, 0.0, 100);
        let fresh: Vec<&StepRecord> = traj.steps.iter().filter(|s| s.fresh).collect();
        assert_eq!(fresh.len(), 4);
        assert_eq!(fresh[0].y, 0);
        assert_eq!(fresh[0].eta, 3);
        assert!(fresh[3].y > 0);
        assert_eq!(fresh[3].eta, 3 - fresh[3].y as i32);
    }

    #[test]
    fn exhausted_error_after_full_exploration() {
        let input = Input::with_identity_perms(k4());
        let mut explorer = Explorer::new(&input);
        let mut src = ConstIndicators(true);
        for _ in 0..4 {
            explorer.step(&mut src).unwrap();
        }
        assert_eq!(
            explorer.step(&mut src).unwrap_err(),
            ExplorationError::Exhausted
        );
    }

    #[test]
    fn phase_parameters_match_hand_arithmetic() {
        // n = 10^6, d = 3, A = 16: h = 150, T1 = 25000, T2 = 3750.
        let nf = 1_000_000f64;
        let h = 16f64.powf(-0.25) * 3.0 * nf.powf(1.0 / 3.0);
        assert!((h - 150.0).abs() < 1e-6);
        let t1 = (5.0 * 3.0 * nf.powf(2.0 / 3.0) / 6.0).floor() as u64;
        // f64 cube roots of exact cubes can land a hair below the integer;
        // accept the floor within one step.
        assert!((24_999..=25_000).contains(&t1));
        let t2 = (2.0 * 3.0 * nf.powf(2.0 / 3.0) / 16.0).floor() as u64;
        assert!((3_749..=3_750).contains(&t2));
    }

    #[test]
    fn two_phase_on_small_graph_obeys_caps_and_e_definition() {
        for seed in 0..10u64 {
            let g =
                sample_uniform_rejection(100, 3, &mut StreamKey::new(seed).rng(), 10_000).unwrap();
            let input = Input::random(g, &mut StreamKey::new(seed).child(2).rng());
            let out = two_phase_experiment(&input, 0.0, 16.0, StreamKey::new(seed).child(3));
            assert!(out.tau_h <= out.t1_cap);
            assert!(out.tau_2 <= out.t2_cap);
            assert!(out.tau_0 <= out.t2_cap);
            assert_eq!(
                out.tau_1,
                out.tau_s1.map_or(out.tau_h, |s| s.min(out.tau_h))
            );
            assert_eq!(
                out.e_holds,
                out.tau_h < out.t1_cap && out.tau_s1.is_none_or(|s| out.tau_h < s)
            );
            if out.tau_h == out.t1_cap {
                assert!(!out.e_holds);
            }
        }
    }
}
