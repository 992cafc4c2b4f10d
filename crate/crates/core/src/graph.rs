//! Simple d-regular graphs, multigraphs from the pairing model, and the
//! 4-cycle switching primitive.

use std::fmt;

/// A simple labelled d-regular graph on vertices 0..n−1.
///
/// Sparse graphs store one sorted row of d neighbors per vertex (flat
/// n·d array) plus the canonical edge list (u < v, lexicographic). The
/// complete graph K_n is represented implicitly so that dense endpoints
/// (d = n−1) never materialize Θ(n²) edges.
///
/// Immutable after construction; safe to share read-only across threads.
#[derive(Clone, Debug)]
pub struct RegularGraph {
    n: u32,
    d: u32,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    Sparse {
        /// Flat adjacency, row `v` at `v*d..(v+1)*d`, each row sorted.
        adj: Vec<u32>,
        /// Canonical edge list: u < v, sorted lexicographically.
        edges: Vec<(u32, u32)>,
    },
    Complete,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    OddDegreeSum { n: u32, d: u32 },
    DegreeOutOfRange { n: u32, d: u32 },
    VertexOutOfRange { v: u32, n: u32 },
    SelfLoop { v: u32 },
    DuplicateEdge { u: u32, v: u32 },
    WrongDegree { v: u32, expected: u32, got: u32 },
    WrongEdgeCount { expected: usize, got: usize },
    Switching(SwitchingViolation),
    Parse(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::OddDegreeSum { n, d } => {
                write!(f, "no {d}-regular graph on {n} vertices: n*d is odd")
            }
            GraphError::DegreeOutOfRange { n, d } => {
                write!(f, "degree {d} out of range for {n} vertices")
            }
            GraphError::VertexOutOfRange { v, n } => {
                write!(f, "vertex {v} out of range (n = {n})")
            }
            GraphError::SelfLoop { v } => write!(f, "self-loop at vertex {v}"),
            GraphError::DuplicateEdge { u, v } => write!(f, "duplicate edge {u}-{v}"),
            GraphError::WrongDegree { v, expected, got } => {
                write!(f, "vertex {v} has degree {got}, expected {expected}")
            }
            GraphError::WrongEdgeCount { expected, got } => {
                write!(f, "edge list has {got} edges, expected {expected}")
            }
            GraphError::Switching(violation) => write!(f, "invalid switching: {violation}"),
            GraphError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for GraphError {}

/// Which precondition of a switching failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchingViolation {
    VerticesNotDistinct,
    MissingEdgeX1X2,
    MissingEdgeX3X4,
    PresentEdgeX1X4,
    PresentEdgeX2X3,
}

impl fmt::Display for SwitchingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            SwitchingViolation::VerticesNotDistinct => "the four vertices are not distinct",
            SwitchingViolation::MissingEdgeX1X2 => "x1-x2 is not an edge",
            SwitchingViolation::MissingEdgeX3X4 => "x3-x4 is not an edge",
            SwitchingViolation::PresentEdgeX1X4 => "x1-x4 is already an edge",
            SwitchingViolation::PresentEdgeX2X3 => "x2-x3 is already an edge",
        };
        f.write_str(msg)
    }
}

/// A 4-cycle x1 x2 x3 x4 on which a switching deletes x1x2, x3x4 and adds
/// x1x4, x2x3. Validity is checked against a graph at application time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwitchingCycle {
    pub x1: u32,
    pub x2: u32,
    pub x3: u32,
    pub x4: u32,
}

impl SwitchingCycle {
    pub fn new(x1: u32, x2: u32, x3: u32, x4: u32) -> Self {
        SwitchingCycle { x1, x2, x3, x4 }
    }

    /// The cycle whose switching undoes this one on the resulting graph.
    pub fn reverse(self) -> Self {
        // Applying on (x1, x4, x3, x2) deletes x1x4, x2x3 and restores
        // x1x2, x3x4.
        SwitchingCycle {
            x1: self.x1,
            x2: self.x4,
            x3: self.x3,
            x4: self.x2,
        }
    }

    pub fn check_on(&self, g: &RegularGraph) -> Result<(), SwitchingViolation> {
        let vs = [self.x1, self.x2, self.x3, self.x4];
        for i in 0..4 {
            for j in (i + 1)..4 {
                if vs[i] == vs[j] {
                    return Err(SwitchingViolation::VerticesNotDistinct);
                }
            }
        }
        if !g.has_edge(self.x1, self.x2) {
            return Err(SwitchingViolation::MissingEdgeX1X2);
        }
        if !g.has_edge(self.x3, self.x4) {
            return Err(SwitchingViolation::MissingEdgeX3X4);
        }
        if g.has_edge(self.x1, self.x4) {
            return Err(SwitchingViolation::PresentEdgeX1X4);
        }
        if g.has_edge(self.x2, self.x3) {
            return Err(SwitchingViolation::PresentEdgeX2X3);
        }
        Ok(())
    }
}

#[inline]
pub fn normalize_edge(u: u32, v: u32) -> (u32, u32) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl RegularGraph {
    /// Builds and fully validates a sparse graph from an edge list.
    pub fn from_edges(n: u32, d: u32, raw_edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        check_parameters(n, d)?;
        let m = (n as usize * d as usize) / 2;
        if raw_edges.len() != m {
            return Err(GraphError::WrongEdgeCount {
                expected: m,
                got: raw_edges.len(),
            });
        }
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m);
        for &(u, v) in raw_edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { v: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { v: u });
            }
            edges.push(normalize_edge(u, v));
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge {
                    u: w[0].0,
                    v: w[0].1,
                });
            }
        }
        let adj = build_sorted_adjacency(n, d, &edges)?;
        Ok(RegularGraph {
            n,
            d,
            repr: Repr::Sparse { adj, edges },
        })
    }

    /// The complete graph K_n (implicit representation, d = n−1).
    pub fn complete(n: u32) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::DegreeOutOfRange { n, d: n.saturating_sub(1) });
        }
        Ok(RegularGraph {
            n,
            d: n - 1,
            repr: Repr::Complete,
        })
    }

    /// Deterministic circulant d-regular graph: vertex i is adjacent to
    /// i ± 1, ..., i ± d/2 (mod n), plus the antipode i + n/2 when d is odd.
    pub fn circulant(n: u32, d: u32) -> Result<Self, GraphError> {
        check_parameters(n, d)?;
        if d == n - 1 {
            return Self::complete(n);
        }
        let half = d / 2;
        // d odd implies n even (n*d even), so the antipode is well defined.
        let mut edges = Vec::with_capacity((n as usize * d as usize) / 2);
        for i in 0..n {
            for k in 1..=half {
                let j = (i + k) % n;
                edges.push(normalize_edge(i, j));
            }
            if d % 2 == 1 {
                let j = (i + n / 2) % n;
                if i < j {
                    edges.push((i, j));
                }
            }
        }
        // For offsets k and n-k coinciding (2k = n) edges would repeat; that
        // happens only when half = n/2, i.e. d >= n-1, excluded above.
        Self::from_edges(n, d, &edges)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        (self.n as usize * self.d as usize) / 2
    }

    pub fn is_complete_repr(&self) -> bool {
        matches!(self.repr, Repr::Complete)
    }

    #[inline]
    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        debug_assert!(u < self.n && v < self.n);
        if u == v {
            return false;
        }
        match &self.repr {
            Repr::Sparse { adj, .. } => {
                let row = &adj[u as usize * self.d as usize..(u as usize + 1) * self.d as usize];
                row.binary_search(&v).is_ok()
            }
            Repr::Complete => true,
        }
    }

    /// Neighbors of u in increasing order.
    pub fn neighbors(&self, u: u32) -> impl Iterator<Item = u32> + '_ {
        debug_assert!(u < self.n);
        match &self.repr {
            Repr::Sparse { adj, .. } => {
                let row = &adj[u as usize * self.d as usize..(u as usize + 1) * self.d as usize];
                NeighborIter::Slice(row.iter())
            }
            Repr::Complete => NeighborIter::Complete { u, next: 0, n: self.n },
        }
    }

    /// The i-th smallest neighbor of u (0-based rank).
    #[inline]
    pub fn nth_neighbor(&self, u: u32, i: usize) -> u32 {
        debug_assert!(i < self.d as usize);
        match &self.repr {
            Repr::Sparse { adj, .. } => adj[u as usize * self.d as usize + i],
            Repr::Complete => {
                let i = i as u32;
                if i < u {
                    i
                } else {
                    i + 1
                }
            }
        }
    }

    /// Rank of w among u's sorted neighbors, if adjacent.
    #[inline]
    pub fn neighbor_rank(&self, u: u32, w: u32) -> Option<usize> {
        match &self.repr {
            Repr::Sparse { adj, .. } => {
                let row = &adj[u as usize * self.d as usize..(u as usize + 1) * self.d as usize];
                row.binary_search(&w).ok()
            }
            Repr::Complete => {
                if u == w || w >= self.n {
                    None
                } else if w < u {
                    Some(w as usize)
                } else {
                    Some(w as usize - 1)
                }
            }
        }
    }

    /// Canonical edges (u < v) in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        match &self.repr {
            Repr::Sparse { edges, .. } => EdgeIter::Slice(edges.iter()),
            Repr::Complete => EdgeIter::Complete { n: self.n, u: 0, v: 1 },
        }
    }

    /// Slice access to the canonical edge list (sparse representation only).
    pub fn edge_slice(&self) -> Option<&[(u32, u32)]> {
        match &self.repr {
            Repr::Sparse { edges, .. } => Some(edges),
            Repr::Complete => None,
        }
    }

    /// Applies a switching, returning the new graph. The reverse switching
    /// on the same 4-cycle restores the original graph exactly.
    pub fn apply_switching(&self, c: SwitchingCycle) -> Result<RegularGraph, GraphError> {
        c.check_on(self).map_err(GraphError::Switching)?;
        let (adj, edges) = match &self.repr {
            Repr::Sparse { adj, edges } => (adj.clone(), edges.clone()),
            // A complete graph has no non-edges, so check_on always fails
            // before reaching here.
            Repr::Complete => unreachable!("switching on complete graph has no valid cycles"),
        };
        let mut adj = adj;
        let d = self.d as usize;
        replace_in_row(&mut adj, d, c.x1, c.x2, c.x4);
        replace_in_row(&mut adj, d, c.x2, c.x1, c.x3);
        replace_in_row(&mut adj, d, c.x3, c.x4, c.x2);
        replace_in_row(&mut adj, d, c.x4, c.x3, c.x1);
        let mut edges = edges;
        remove_sorted_edge(&mut edges, normalize_edge(c.x1, c.x2));
        remove_sorted_edge(&mut edges, normalize_edge(c.x3, c.x4));
        insert_sorted_edge(&mut edges, normalize_edge(c.x1, c.x4));
        insert_sorted_edge(&mut edges, normalize_edge(c.x2, c.x3));
        Ok(RegularGraph {
            n: self.n,
            d: self.d,
            repr: Repr::Sparse { adj, edges },
        })
    }

    /// Full invariant check: simple, symmetric, d-regular, consistent lists.
    pub fn validate(&self) -> Result<(), GraphError> {
        check_parameters(self.n, self.d)?;
        let (adj, edges) = match &self.repr {
            Repr::Sparse { adj, edges } => (adj, edges),
            Repr::Complete => return Ok(()),
        };
        let d = self.d as usize;
        if edges.len() != self.edge_count() {
            return Err(GraphError::WrongEdgeCount {
                expected: self.edge_count(),
                got: edges.len(),
            });
        }
        for v in 0..self.n {
            let row = &adj[v as usize * d..(v as usize + 1) * d];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(GraphError::DuplicateEdge { u: v, v: w[1] });
                }
            }
            for &w in row {
                if w >= self.n {
                    return Err(GraphError::VertexOutOfRange { v: w, n: self.n });
                }
                if w == v {
                    return Err(GraphError::SelfLoop { v });
                }
                if !self.has_edge(w, v) {
                    return Err(GraphError::DuplicateEdge { u: v, v: w });
                }
            }
        }
        for &(u, v) in edges {
            if u >= v || !self.has_edge(u, v) {
                return Err(GraphError::DuplicateEdge { u, v });
            }
        }
        Ok(())
    }

    /// Vertex degrees as a multiset (they are all d; used by property tests).
    pub fn degree_of(&self, v: u32) -> u32 {
        debug_assert!(v < self.n);
        self.d
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        if matches!(self.repr, Repr::Complete) {
            return true;
        }
        let mut seen = vec![false; self.n as usize];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1u32;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Assembles a graph from parts already in canonical form (rows and
    /// edge list sorted, simple, d-regular). Used by samplers that
    /// maintain those invariants incrementally; debug builds re-validate.
    pub(crate) fn from_sorted_parts(n: u32, d: u32, adj: Vec<u32>, edges: Vec<(u32, u32)>) -> Self {
        let g = RegularGraph {
            n,
            d,
            repr: Repr::Sparse { adj, edges },
        };
        debug_assert!(g.validate().is_ok(), "from_sorted_parts invariants");
        g
    }

    /// Plain-text edge list: header "n d m", then one "u v" line per edge
    /// in canonical order.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::with_capacity(16 + self.edge_count() * 8);
        out.push_str(&format!("{} {} {}\n", self.n, self.d, self.edge_count()));
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses the edge-list format produced by [`to_edge_list_string`].
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("empty input".into()))?;
        let mut it = header.split_whitespace();
        let n: u32 = parse_field(it.next(), "n")?;
        let d: u32 = parse_field(it.next(), "d")?;
        let m: usize = parse_field(it.next(), "m")?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let mut it = line.split_whitespace();
            let u: u32 = parse_field(it.next(), "u")?;
            let v: u32 = parse_field(it.next(), "v")?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        Self::from_edges(n, d, &edges)
    }
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, name: &str) -> Result<T, GraphError> {
    tok.ok_or_else(|| GraphError::Parse(format!("missing field {name}")))?
        .parse()
        .map_err(|_| GraphError::Parse(format!("invalid field {name}")))
}

fn check_parameters(n: u32, d: u32) -> Result<(), GraphError> {
    if n == 0 || (d >= n && !(n == 1 && d == 0)) {
        return Err(GraphError::DegreeOutOfRange { n, d });
    }
    if !(n as u64 * d as u64).is_multiple_of(2) {
        return Err(GraphError::OddDegreeSum { n, d });
    }
    Ok(())
}

fn build_sorted_adjacency(n: u32, d: u32, edges: &[(u32, u32)]) -> Result<Vec<u32>, GraphError> {
    let d = d as usize;
    let mut fill = vec![0u32; n as usize];
    let mut adj = vec![0u32; n as usize * d];
    for &(u, v) in edges {
        for (a, b) in [(u, v), (v, u)] {
            let got = fill[a as usize];
            if got as usize >= d {
                return Err(GraphError::WrongDegree {
                    v: a,
                    expected: d as u32,
                    got: got + 1,
                });
            }
            adj[a as usize * d + got as usize] = b;
            fill[a as usize] = got + 1;
        }
    }
    for v in 0..n as usize {
        if fill[v] as usize != d {
            return Err(GraphError::WrongDegree {
                v: v as u32,
                expected: d as u32,
                got: fill[v],
            });
        }
        adj[v * d..(v + 1) * d].sort_unstable();
    }
    Ok(adj)
}

/// Replaces `old` with `new` in v's sorted row, keeping it sorted.
fn replace_in_row(adj: &mut [u32], d: usize, v: u32, old: u32, new: u32) {
    let row = &mut adj[v as usize * d..(v as usize + 1) * d];
    let pos = row.binary_search(&old).expect("edge endpoint missing from row");
    row[pos] = new;
    // Restore sortedness with a local rotation.
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

fn remove_sorted_edge(edges: &mut Vec<(u32, u32)>, e: (u32, u32)) {
    let pos = edges.binary_search(&e).expect("edge missing from edge list");
    edges.remove(pos);
}

fn insert_sorted_edge(edges: &mut Vec<(u32, u32)>, e: (u32, u32)) {
    let pos = edges.binary_search(&e).expect_err("edge already present");
    edges.insert(pos, e);
}

enum NeighborIter<'a> {
    Slice(std::slice::Iter<'a, u32>),
    Complete { u: u32, next: u32, n: u32 },
}

impl Iterator for NeighborIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            NeighborIter::Slice(it) => it.next().copied(),
            NeighborIter::Complete { u, next, n } => {
                if *next == *u {
                    *next += 1;
                }
                if *next >= *n {
                    None
                } else {
                    let v = *next;
                    *next += 1;
                    Some(v)
                }
            }
        }
    }
}

enum EdgeIter<'a> {
    Slice(std::slice::Iter<'a, (u32, u32)>),
    Complete { n: u32, u: u32, v: u32 },
}

impl Iterator for EdgeIter<'_> {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        match self {
            EdgeIter::Slice(it) => it.next().copied(),
            EdgeIter::Complete { n, u, v } => {
                if *v >= *n {
                    *u += 1;
                    *v = *u + 1;
                }
                if *v >= *n {
                    return None;
                }
                let e = (*u, *v);
                *v += 1;
                Some(e)
            }
        }
    }
}

/// A d-regular multigraph as produced by the pairing model: the edge
/// multiset may contain loops and parallel edges. Loops count twice
/// toward the degree.
#[derive(Clone, Debug)]
pub struct Multigraph {
    pub n: u32,
    pub d: u32,
    /// Normalized u <= v; loops appear as (v, v).
    pub edges: Vec<(u32, u32)>,
}

impl Multigraph {
    pub fn new(n: u32, d: u32, mut edges: Vec<(u32, u32)>) -> Result<Self, GraphError> {
        if !(n as u64 * d as u64).is_multiple_of(2) {
            return Err(GraphError::OddDegreeSum { n, d });
        }
        for e in edges.iter_mut() {
            *e = normalize_edge(e.0, e.1);
        }
        let mg = Multigraph { n, d, edges };
        mg.check_degrees()?;
        Ok(mg)
    }

    fn check_degrees(&self) -> Result<(), GraphError> {
        let mut deg = vec![0u32; self.n as usize];
        for &(u, v) in &self.edges {
            if u >= self.n || v >= self.n {
                return Err(GraphError::VertexOutOfRange {
                    v: u.max(v),
                    n: self.n,
                });
            }
            deg[u as usize] += 1;
            deg[v as usize] += 1; // loops count twice
        }
        for (v, &g) in deg.iter().enumerate() {
            if g != self.d {
                return Err(GraphError::WrongDegree {
                    v: v as u32,
                    expected: self.d,
                    got: g,
                });
            }
        }
        Ok(())
    }

    pub fn is_simple(&self) -> bool {
        let mut sorted: Vec<(u32, u32)> = self.edges.clone();
        sorted.sort_unstable();
        if sorted.iter().any(|&(u, v)| u == v) {
            return false;
        }
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// Converts to a validated simple regular graph. Fails if not simple.
    pub fn into_regular(self) -> Result<RegularGraph, GraphError> {
        RegularGraph::from_edges(self.n, self.d, &self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> RegularGraph {
        RegularGraph::from_edges(4, 3, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn c6() -> RegularGraph {
        RegularGraph::from_edges(6, 2, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap()
    }

    #[test]
    fn has_edge_on_k4() {
        let g = k4();
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(0, 0));
    }

    #[test]
    fn has_edge_on_c6() {
        let g = c6();
        assert!(!g.has_edge(0, 3));
        assert!(g.has_edge(0, 5));
        assert!(g.has_edge(5, 0));
    }

    #[test]
    fn rejects_odd_degree_sum() {
        assert_eq!(
            RegularGraph::from_edges(5, 3, &[]).unwrap_err(),
            GraphError::OddDegreeSum { n: 5, d: 3 }
        );
    }

    #[test]
    fn rejects_duplicate_and_loop() {
        let err = RegularGraph::from_edges(4, 3, &[(0, 1), (1, 0), (0, 3), (1, 2), (1, 3), (2, 3)])
            .unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge { u: 0, v: 1 });
        let err =
            RegularGraph::from_edges(4, 3, &[(0, 0), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
                .unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { v: 0 });
    }

    #[test]
    fn switching_on_c6_gives_expected_edges() {
        // Delete 01, 34; add 04, 13.
        let g = c6();
        let g2 = g
            .apply_switching(SwitchingCycle::new(0, 1, 3, 4))
            .unwrap();
        let edges: Vec<(u32, u32)> = g2.edges().collect();
        assert_eq!(edges, vec![(0, 4), (0, 5), (1, 2), (1, 3), (2, 3), (4, 5)]);
        g2.validate().unwrap();
        assert_eq!(g2.d(), 2);
    }

    #[test]
    fn switching_is_reversible() {
        let g = c6();
        let c = SwitchingCycle::new(0, 1, 3, 4);
        let g2 = g.apply_switching(c).unwrap();
        let g3 = g2.apply_switching(c.reverse()).unwrap();
        let before: Vec<_> = g.edges().collect();
        let after: Vec<_> = g3.edges().collect();
        assert_eq!(before, after);
    }

    #[test]
    fn switching_reports_which_precondition_failed() {
        let g = c6();
        assert_eq!(
            g.apply_switching(SwitchingCycle::new(0, 3, 1, 2)).unwrap_err(),
            GraphError::Switching(SwitchingViolation::MissingEdgeX1X2)
        );
        assert_eq!(
            g.apply_switching(SwitchingCycle::new(0, 1, 2, 4)).unwrap_err(),
            GraphError::Switching(SwitchingViolation::MissingEdgeX3X4)
        );
        // (1, 2, 3, 4): both deletions are edges, x2x3 = 2-3 already exists.
        assert_eq!(
            g.apply_switching(SwitchingCycle::new(1, 2, 3, 4)).unwrap_err(),
            GraphError::Switching(SwitchingViolation::PresentEdgeX2X3)
        );
        // (0, 1, 4, 5): both deletions are edges, x1x4 = 0-5 already exists.
        assert_eq!(
            g.apply_switching(SwitchingCycle::new(0, 1, 4, 5)).unwrap_err(),
            GraphError::Switching(SwitchingViolation::PresentEdgeX1X4)
        );
        assert_eq!(
            g.apply_switching(SwitchingCycle::new(0, 1, 0, 5)).unwrap_err(),
            GraphError::Switching(SwitchingViolation::VerticesNotDistinct)
        );
    }

    #[test]
    fn complete_graph_queries() {
        let g = RegularGraph::complete(5).unwrap();
        assert_eq!(g.d(), 4);
        assert_eq!(g.edge_count(), 10);
        assert!(g.has_edge(0, 4));
        assert!(!g.has_edge(2, 2));
        let nbrs: Vec<u32> = g.neighbors(2).collect();
        assert_eq!(nbrs, vec![0, 1, 3, 4]);
        assert_eq!(g.nth_neighbor(2, 2), 3);
        assert_eq!(g.neighbor_rank(2, 3), Some(2));
        assert_eq!(g.neighbor_rank(2, 2), None);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges.len(), 10);
        assert_eq!(edges[0], (0, 1));
        assert_eq!(edges[9], (3, 4));
    }

    #[test]
    fn circulant_is_valid_for_odd_and_even_degree() {
        for (n, d) in [(8u32, 3u32), (8, 4), (10, 5), (12, 6), (6, 2), (7, 4)] {
            let g = RegularGraph::circulant(n, d).unwrap();
            g.validate().unwrap();
            assert_eq!(g.d(), d);
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = k4();
        let text = g.to_edge_list_string();
        assert!(text.starts_with("4 3 6\n"));
        let g2 = RegularGraph::parse_edge_list(&text).unwrap();
        let a: Vec<_> = g.edges().collect();
        let b: Vec<_> = g2.edges().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn multigraph_degree_validation() {
        // One loop at 0 contributes 2 to its degree.
        let mg = Multigraph::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
        assert!(!mg.is_simple());
        let err = Multigraph::new(2, 2, vec![(0, 1), (0, 0)]).unwrap_err();
        assert!(matches!(err, GraphError::WrongDegree { .. }));
        let ok = Multigraph::new(2, 2, vec![(0, 1), (1, 0)]).unwrap();
        assert!(!ok.is_simple()); // parallel pair
    }

    #[test]
    fn nth_neighbor_and_rank_agree_on_sparse() {
        let g = k4();
        for v in 0..4 {
            for i in 0..3 {
                let w = g.nth_neighbor(v, i);
                assert_eq!(g.neighbor_rank(v, w), Some(i));
            }
        }
    }
}
