//! Data model, text format, validation, links, balls and basic invariants of
//! finite square 2-complexes.
//!
//! A complex is a set of vertices, a set of edges (unordered vertex pairs)
//! and a set of squares (cyclic vertex quadruples). Squares are stored in a
//! canonical form, the lexicographically minimal cycle over the dihedral
//! group of order 8, so duplicate detection and face checks are independent
//! of how a boundary cycle was written down. Edges are explicit rather than
//! inferred from squares: a complex may have dangling edges (spines) and
//! isolated vertices (the terminal state of a full collapse).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Identifier of a vertex (0-cell).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// Identifier of an edge (1-cell).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

/// Identifier of a square (2-cell).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SquareId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for SquareId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A cell of any dimension, used in diagnostics and validation reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CellRef {
    Vertex(VertexId),
    Edge(EdgeId),
    Square(SquareId),
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellRef::Vertex(v) => write!(f, "v{v}"),
            CellRef::Edge(e) => write!(f, "e{e}"),
            CellRef::Square(s) => write!(f, "s{s}"),
        }
    }
}

/// A square-corner at a vertex: the two boundary edges of one square meeting
/// there. Corners are the arcs of the vertex link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corner {
    pub square: SquareId,
    pub edges: [EdgeId; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Edge {
    id: EdgeId,
    /// Endpoints, stored with the smaller id first.
    ends: [VertexId; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Square {
    id: SquareId,
    /// Canonical boundary cycle.
    cycle: [VertexId; 4],
}

/// The lexicographically minimal representative of a boundary cycle over the
/// 8 rotations and reflections.
pub fn canonical_cycle(cycle: [VertexId; 4]) -> [VertexId; 4] {
    let mut best = cycle;
    for r in 0..4 {
        let fwd = [
            cycle[r],
            cycle[(r + 1) % 4],
            cycle[(r + 2) % 4],
            cycle[(r + 3) % 4],
        ];
        let rev = [
            cycle[r],
            cycle[(r + 3) % 4],
            cycle[(r + 2) % 4],
            cycle[(r + 1) % 4],
        ];
        if fwd < best {
            best = fwd;
        }
        if rev < best {
            best = rev;
        }
    }
    best
}

/// A finite square 2-complex.
///
/// Immutable after construction: every operation is a pure function of its
/// inputs, and mutation is modeled as construction of a new complex.
/// Declaration order is preserved and is the canonical serialization order.
#[derive(Clone, Debug)]
pub struct SquareComplex {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    squares: Vec<Square>,

    // Derived incidence, rebuilt on construction.
    vertex_set: BTreeSet<VertexId>,
    edge_index: BTreeMap<EdgeId, usize>,
    square_index: BTreeMap<SquareId, usize>,
    edge_by_pair: BTreeMap<(VertexId, VertexId), EdgeId>,
    square_by_cycle: BTreeMap<[VertexId; 4], SquareId>,
    edges_at: BTreeMap<VertexId, Vec<EdgeId>>,
    squares_at_edge: BTreeMap<EdgeId, Vec<SquareId>>,
    corners_at: BTreeMap<VertexId, Vec<Corner>>,
}

impl PartialEq for SquareComplex {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.edges == other.edges
            && self.squares == other.squares
    }
}

impl Eq for SquareComplex {}

/// Construction error for programmatic builds.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("duplicate {0}")]
    DuplicateId(CellRef),
    #[error("{cell} references unknown vertex {vertex}")]
    UnknownVertex { cell: CellRef, vertex: VertexId },
    #[error("square {square}: no edge joins vertices {0} and {1}", pair[0], pair[1])]
    MissingBoundaryEdge {
        square: SquareId,
        pair: [VertexId; 2],
    },
}

/// Error raised by operations that receive a cell id not present in the
/// complex.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("unknown {0}")]
pub struct UnknownCell(pub CellRef);

/// Smallest unused ids per cell dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeCellIds {
    pub vertex: u32,
    pub edge: u32,
    pub square: u32,
}

impl SquareComplex {
    /// The empty complex.
    pub fn empty() -> Self {
        Self::from_cells(Vec::new(), Vec::new(), Vec::new()).unwrap()
    }

    /// Builds a complex from explicit cell lists, canonicalizing squares and
    /// deriving incidence. Rejects duplicate ids and references to undeclared
    /// vertices or boundary edges; geometric rules (distinct endpoints, the
    /// single-face condition, ...) are the business of [`SquareComplex::validate`].
    pub fn from_cells(
        vertices: Vec<u32>,
        edges: Vec<(u32, u32, u32)>,
        squares: Vec<(u32, [u32; 4])>,
    ) -> Result<Self, BuildError> {
        let mut cx = SquareComplex {
            vertices: vertices.into_iter().map(VertexId).collect(),
            edges: edges
                .into_iter()
                .map(|(id, a, b)| Edge {
                    id: EdgeId(id),
                    ends: sorted_pair(VertexId(a), VertexId(b)),
                })
                .collect(),
            squares: squares
                .into_iter()
                .map(|(id, c)| Square {
                    id: SquareId(id),
                    cycle: canonical_cycle(c.map(VertexId)),
                })
                .collect(),
            vertex_set: BTreeSet::new(),
            edge_index: BTreeMap::new(),
            square_index: BTreeMap::new(),
            edge_by_pair: BTreeMap::new(),
            square_by_cycle: BTreeMap::new(),
            edges_at: BTreeMap::new(),
            squares_at_edge: BTreeMap::new(),
            corners_at: BTreeMap::new(),
        };
        cx.check_references()?;
        cx.derive();
        Ok(cx)
    }

    fn check_references(&self) -> Result<(), BuildError> {
        let mut vset = BTreeSet::new();
        for &v in &self.vertices {
            if !vset.insert(v) {
                return Err(BuildError::DuplicateId(CellRef::Vertex(v)));
            }
        }
        let mut eset = BTreeSet::new();
        for e in &self.edges {
            if !eset.insert(e.id) {
                return Err(BuildError::DuplicateId(CellRef::Edge(e.id)));
            }
            for &v in &e.ends {
                if !vset.contains(&v) {
                    return Err(BuildError::UnknownVertex {
                        cell: CellRef::Edge(e.id),
                        vertex: v,
                    });
                }
            }
        }
        let pairs: BTreeSet<(VertexId, VertexId)> =
            self.edges.iter().map(|e| (e.ends[0], e.ends[1])).collect();
        let mut sset = BTreeSet::new();
        for s in &self.squares {
            if !sset.insert(s.id) {
                return Err(BuildError::DuplicateId(CellRef::Square(s.id)));
            }
            for &v in &s.cycle {
                if !vset.contains(&v) {
                    return Err(BuildError::UnknownVertex {
                        cell: CellRef::Square(s.id),
                        vertex: v,
                    });
                }
            }
            for i in 0..4 {
                let pair = sorted_pair(s.cycle[i], s.cycle[(i + 1) % 4]);
                if !pairs.contains(&(pair[0], pair[1])) {
                    return Err(BuildError::MissingBoundaryEdge {
                        square: s.id,
                        pair,
                    });
                }
            }
        }
        Ok(())
    }

    fn derive(&mut self) {
        self.vertex_set = self.vertices.iter().copied().collect();
        self.edge_index = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id, i))
            .collect();
        self.square_index = self
            .squares
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id, i))
            .collect();

        self.edge_by_pair.clear();
        for e in &self.edges {
            self.edge_by_pair
                .entry((e.ends[0], e.ends[1]))
                .or_insert(e.id);
        }
        self.square_by_cycle.clear();
        for s in &self.squares {
            self.square_by_cycle.entry(s.cycle).or_insert(s.id);
        }

        self.edges_at = self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for e in &self.edges {
            if let Some(list) = self.edges_at.get_mut(&e.ends[0]) {
                list.push(e.id);
            }
            if e.ends[0] != e.ends[1] {
                if let Some(list) = self.edges_at.get_mut(&e.ends[1]) {
                    list.push(e.id);
                }
            }
        }

        self.squares_at_edge = self.edges.iter().map(|e| (e.id, Vec::new())).collect();
        self.corners_at = self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for s in &self.squares {
            for i in 0..4 {
                let prev = s.cycle[(i + 3) % 4];
                let here = s.cycle[i];
                let next = s.cycle[(i + 1) % 4];
                if let Some(&e) = self.edge_by_pair.get(&pair_key(here, next)) {
                    if let Some(list) = self.squares_at_edge.get_mut(&e) {
                        list.push(s.id);
                    }
                }
                let e_in = self.edge_by_pair.get(&pair_key(prev, here)).copied();
                let e_out = self.edge_by_pair.get(&pair_key(here, next)).copied();
                if let (Some(a), Some(b)) = (e_in, e_out) {
                    if let Some(list) = self.corners_at.get_mut(&here) {
                        let mut edges = [a, b];
                        edges.sort();
                        list.push(Corner { square: s.id, edges });
                    }
                }
            }
        }
        for list in self.squares_at_edge.values_mut() {
            list.sort();
        }
        for list in self.edges_at.values_mut() {
            list.sort();
        }
    }

    // ---- accessors -------------------------------------------------------

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    pub fn square_ids(&self) -> impl Iterator<Item = SquareId> + '_ {
        self.squares.iter().map(|s| s.id)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_squares(&self) -> usize {
        self.squares.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertex_set.contains(&v)
    }

    pub fn edge_ends(&self, e: EdgeId) -> Option<[VertexId; 2]> {
        self.edge_index.get(&e).map(|&i| self.edges[i].ends)
    }

    /// Canonical boundary cycle of a square.
    pub fn square_cycle(&self, s: SquareId) -> Option<[VertexId; 4]> {
        self.square_index.get(&s).map(|&i| self.squares[i].cycle)
    }

    /// The declared edge joining two vertices, if any.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.edge_by_pair.get(&pair_key(u, v)).copied()
    }

    /// The square with the given boundary cycle (any of its 8 writings).
    pub fn square_with_cycle(&self, cycle: [VertexId; 4]) -> Option<SquareId> {
        self.square_by_cycle.get(&canonical_cycle(cycle)).copied()
    }

    /// Edges incident to a vertex, in ascending id order.
    pub fn edges_at(&self, v: VertexId) -> &[EdgeId] {
        self.edges_at.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Squares containing an edge on their boundary, ascending.
    pub fn squares_at_edge(&self, e: EdgeId) -> &[SquareId] {
        self.squares_at_edge
            .get(&e)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Square-corners at a vertex.
    pub fn corners_at(&self, v: VertexId) -> &[Corner] {
        self.corners_at.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Boundary edge ids of a square (where declared), one per cycle side.
    pub fn boundary_edges(&self, s: SquareId) -> Option<Vec<EdgeId>> {
        let cycle = self.square_cycle(s)?;
        let mut out = Vec::with_capacity(4);
        for i in 0..4 {
            if let Some(e) = self.edge_between(cycle[i], cycle[(i + 1) % 4]) {
                out.push(e);
            }
        }
        Some(out)
    }

    /// Neighbors of a vertex in the 1-skeleton, ascending, without duplicates.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .edges_at(v)
            .iter()
            .filter_map(|&e| {
                let ends = self.edge_ends(e)?;
                Some(if ends[0] == v { ends[1] } else { ends[0] })
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    // ---- invariants ------------------------------------------------------

    /// |V| - |E| + |S|.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.squares.len() as i64
    }

    /// Edge-path distances from `v` in the 1-skeleton; unreachable vertices
    /// are absent from the map.
    pub fn bfs_distances(&self, v: VertexId) -> BTreeMap<VertexId, usize> {
        let mut dist = BTreeMap::new();
        if !self.contains_vertex(v) {
            return dist;
        }
        dist.insert(v, 0usize);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            for w in self.neighbors(u) {
                if !dist.contains_key(&w) {
                    dist.insert(w, du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Whether the 1-skeleton (hence the complex) has at most one component.
    pub fn is_connected(&self) -> bool {
        match self.vertices.first() {
            None => true,
            Some(&v) => self.bfs_distances(v).len() == self.vertices.len(),
        }
    }

    /// The full subcomplex on the vertices of v's component.
    pub fn component_of(&self, v: VertexId) -> Result<SquareComplex, UnknownCell> {
        if !self.contains_vertex(v) {
            return Err(UnknownCell(CellRef::Vertex(v)));
        }
        let keep: BTreeSet<VertexId> = self.bfs_distances(v).into_keys().collect();
        Ok(self.full_subcomplex(&keep))
    }

    /// Eccentricity of `v` within its component.
    pub fn eccentricity(&self, v: VertexId) -> Result<usize, UnknownCell> {
        if !self.contains_vertex(v) {
            return Err(UnknownCell(CellRef::Vertex(v)));
        }
        Ok(self.bfs_distances(v).into_values().max().unwrap_or(0))
    }

    /// The combinatorial ball of radius `n` around `v`: the full subcomplex
    /// on the vertices at edge-path distance at most `n`. Taken within v's
    /// component when the complex is disconnected.
    pub fn ball(&self, v: VertexId, n: usize) -> Result<SquareComplex, UnknownCell> {
        if !self.contains_vertex(v) {
            return Err(UnknownCell(CellRef::Vertex(v)));
        }
        let keep: BTreeSet<VertexId> = self
            .bfs_distances(v)
            .into_iter()
            .filter(|&(_, d)| d <= n)
            .map(|(w, _)| w)
            .collect();
        Ok(self.full_subcomplex(&keep))
    }

    /// Full subcomplex spanned by a vertex set: every edge and square of the
    /// complex all of whose vertices lie in the set.
    pub fn full_subcomplex(&self, keep: &BTreeSet<VertexId>) -> SquareComplex {
        let vertices: Vec<u32> = self
            .vertices
            .iter()
            .filter(|v| keep.contains(v))
            .map(|v| v.0)
            .collect();
        let edges: Vec<(u32, u32, u32)> = self
            .edges
            .iter()
            .filter(|e| e.ends.iter().all(|v| keep.contains(v)))
            .map(|e| (e.id.0, e.ends[0].0, e.ends[1].0))
            .collect();
        let squares: Vec<(u32, [u32; 4])> = self
            .squares
            .iter()
            .filter(|s| s.cycle.iter().all(|v| keep.contains(v)))
            .map(|s| (s.id.0, s.cycle.map(|v| v.0)))
            .collect();
        SquareComplex::from_cells(vertices, edges, squares)
            .expect("subcomplex of a well-formed complex is well-formed")
    }

    /// Removes the listed cells, keeping everything else untouched.
    pub(crate) fn without_cells(
        &self,
        drop_vertices: &[VertexId],
        drop_edges: &[EdgeId],
        drop_squares: &[SquareId],
    ) -> SquareComplex {
        let vertices: Vec<u32> = self
            .vertices
            .iter()
            .filter(|v| !drop_vertices.contains(v))
            .map(|v| v.0)
            .collect();
        let edges: Vec<(u32, u32, u32)> = self
            .edges
            .iter()
            .filter(|e| !drop_edges.contains(&e.id))
            .map(|e| (e.id.0, e.ends[0].0, e.ends[1].0))
            .collect();
        let squares: Vec<(u32, [u32; 4])> = self
            .squares
            .iter()
            .filter(|s| !drop_squares.contains(&s.id))
            .map(|s| (s.id.0, s.cycle.map(|v| v.0)))
            .collect();
        SquareComplex::from_cells(vertices, edges, squares)
            .expect("cell removal preserves referential integrity")
    }

    /// Smallest ids not yet used per cell dimension, for growing complexes.
    pub fn free_cell_ids(&self) -> FreeCellIds {
        FreeCellIds {
            vertex: self.vertices.iter().map(|v| v.0 + 1).max().unwrap_or(0),
            edge: self.edges.iter().map(|e| e.id.0 + 1).max().unwrap_or(0),
            square: self.squares.iter().map(|s| s.id.0 + 1).max().unwrap_or(0),
        }
    }

    /// Decomposes into raw cell lists in declaration order, suitable for
    /// [`SquareComplex::from_cells`].
    pub fn into_cell_lists(self) -> (Vec<u32>, Vec<(u32, u32, u32)>, Vec<(u32, [u32; 4])>) {
        (
            self.vertices.iter().map(|v| v.0).collect(),
            self.edges
                .iter()
                .map(|e| (e.id.0, e.ends[0].0, e.ends[1].0))
                .collect(),
            self.squares
                .iter()
                .map(|s| (s.id.0, s.cycle.map(|v| v.0)))
                .collect(),
        )
    }

    /// Order-independent fingerprint of the complex: SHA-256 over the cell
    /// lists sorted by id (`v <id>`, `e <id> <u> <v>`, `s <id> <a> <b> <c>
    /// <d>` lines, squares in canonical form), printed as lowercase hex.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        let mut vs = self.vertices.clone();
        vs.sort();
        for v in vs {
            hasher.update(format!("v {v}\n"));
        }
        let mut es = self.edges.clone();
        es.sort_by_key(|e| e.id);
        for e in es {
            hasher.update(format!("e {} {} {}\n", e.id, e.ends[0], e.ends[1]));
        }
        let mut ss = self.squares.clone();
        ss.sort_by_key(|s| s.id);
        for s in ss {
            hasher.update(format!(
                "s {} {} {} {} {}\n",
                s.id, s.cycle[0], s.cycle[1], s.cycle[2], s.cycle[3]
            ));
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    // ---- text format -----------------------------------------------------

    /// Parses the `.sqc` line format. Cells must be declared before they are
    /// referenced. Errors carry 1-based line and column positions.
    pub fn parse(text: &str) -> Result<SquareComplex, ParseError> {
        let mut vertices: Vec<u32> = Vec::new();
        let mut vset: BTreeSet<u32> = BTreeSet::new();
        let mut edges: Vec<(u32, u32, u32)> = Vec::new();
        let mut eids: BTreeSet<u32> = BTreeSet::new();
        let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
        let mut squares: Vec<(u32, [u32; 4])> = Vec::new();
        let mut sids: BTreeSet<u32> = BTreeSet::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(content);
            if tokens.is_empty() {
                continue;
            }
            let (col0, word) = tokens[0];
            let args = &tokens[1..];
            match word {
                "v" => {
                    let id = expect_args::<1>(line, col0, "v <id>", args)?[0];
                    if !vset.insert(id) {
                        return Err(ParseError::duplicate(line, col0, CellRef::Vertex(VertexId(id))));
                    }
                    vertices.push(id);
                }
                "e" => {
                    let [id, a, b] = expect_args::<3>(line, col0, "e <id> <v1> <v2>", args)?;
                    if !eids.insert(id) {
                        return Err(ParseError::duplicate(line, col0, CellRef::Edge(EdgeId(id))));
                    }
                    for (i, &v) in [a, b].iter().enumerate() {
                        if !vset.contains(&v) {
                            return Err(ParseError::unknown_vertex(line, args[1 + i].0, v));
                        }
                    }
                    let (lo, hi) = (a.min(b), a.max(b));
                    pairs.insert((lo, hi));
                    edges.push((id, a, b));
                }
                "s" => {
                    let [id, a, b, c, d] =
                        expect_args::<5>(line, col0, "s <id> <v1> <v2> <v3> <v4>", args)?;
                    if !sids.insert(id) {
                        return Err(ParseError::duplicate(line, col0, CellRef::Square(SquareId(id))));
                    }
                    let cyc = [a, b, c, d];
                    for (i, &v) in cyc.iter().enumerate() {
                        if !vset.contains(&v) {
                            return Err(ParseError::unknown_vertex(line, args[1 + i].0, v));
                        }
                    }
                    for i in 0..4 {
                        let (u, w) = (cyc[i], cyc[(i + 1) % 4]);
                        if !pairs.contains(&(u.min(w), u.max(w))) {
                            return Err(ParseError {
                                line,
                                col: col0,
                                kind: ParseErrorKind::MissingEdge { pair: [u, w] },
                            });
                        }
                    }
                    squares.push((id, cyc));
                }
                other => {
                    return Err(ParseError::syntax(
                        line,
                        col0,
                        format!("unknown directive `{other}` (expected v, e or s)"),
                    ));
                }
            }
        }

        SquareComplex::from_cells(vertices, edges, squares).map_err(|e| ParseError {
            line: 0,
            col: 0,
            kind: ParseErrorKind::Syntax(e.to_string()),
        })
    }

    /// Serializes in declaration order; `parse` of the output reproduces the
    /// complex exactly.
    pub fn to_sqc(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("v {v}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!("e {} {} {}\n", e.id, e.ends[0], e.ends[1]));
        }
        for s in &self.squares {
            out.push_str(&format!(
                "s {} {} {} {} {}\n",
                s.id, s.cycle[0], s.cycle[1], s.cycle[2], s.cycle[3]
            ));
        }
        out
    }

    // ---- validation ------------------------------------------------------

    /// Checks the structural rules of a square complex and reports every
    /// violation. `ok` iff no violation.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        for e in &self.edges {
            if e.ends[0] == e.ends[1] {
                violations.push(Violation {
                    rule: rules::EDGE_DISTINCT,
                    cells: vec![CellRef::Edge(e.id)],
                    message: format!("edge {} joins vertex {} to itself", e.id, e.ends[0]),
                });
            }
        }

        let mut by_pair: BTreeMap<[VertexId; 2], Vec<EdgeId>> = BTreeMap::new();
        for e in &self.edges {
            by_pair.entry(e.ends).or_default().push(e.id);
        }
        for (pair, ids) in by_pair {
            if ids.len() > 1 {
                violations.push(Violation {
                    rule: rules::EDGE_UNIQUE,
                    cells: ids.iter().map(|&e| CellRef::Edge(e)).collect(),
                    message: format!(
                        "edges {} all join vertices {} and {}",
                        join_ids(&ids),
                        pair[0],
                        pair[1]
                    ),
                });
            }
        }

        for s in &self.squares {
            let mut sorted = s.cycle;
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                violations.push(Violation {
                    rule: rules::SQUARE_DISTINCT,
                    cells: vec![CellRef::Square(s.id)],
                    message: format!("square {} repeats a vertex in its boundary cycle", s.id),
                });
            }
            for i in 0..4 {
                let (u, w) = (s.cycle[i], s.cycle[(i + 1) % 4]);
                if self.edge_between(u, w).is_none() {
                    violations.push(Violation {
                        rule: rules::SQUARE_BOUNDARY,
                        cells: vec![CellRef::Square(s.id)],
                        message: format!("square {}: no edge joins vertices {u} and {w}", s.id),
                    });
                }
            }
        }

        let mut by_cycle: BTreeMap<[VertexId; 4], Vec<SquareId>> = BTreeMap::new();
        for s in &self.squares {
            by_cycle.entry(s.cycle).or_default().push(s.id);
        }
        for (_, ids) in by_cycle {
            if ids.len() > 1 {
                violations.push(Violation {
                    rule: rules::SQUARE_UNIQUE,
                    cells: ids.iter().map(|&s| CellRef::Square(s)).collect(),
                    message: format!(
                        "duplicate square: {} share one canonical boundary cycle",
                        join_ids(&ids)
                    ),
                });
            }
        }

        self.check_single_face(&mut violations);
        ValidationReport { violations }
    }

    /// Any two cells must intersect in the empty set or a single common face.
    fn check_single_face(&self, violations: &mut Vec<Violation>) {
        let square_data: Vec<(SquareId, BTreeSet<VertexId>, BTreeSet<EdgeId>)> = self
            .squares
            .iter()
            .map(|s| {
                let vs: BTreeSet<VertexId> = s.cycle.iter().copied().collect();
                let es: BTreeSet<EdgeId> =
                    self.boundary_edges(s.id).unwrap_or_default().into_iter().collect();
                (s.id, vs, es)
            })
            .collect();

        for i in 0..square_data.len() {
            for j in (i + 1)..square_data.len() {
                let (sa, va, ea) = &square_data[i];
                let (sb, vb, eb) = &square_data[j];
                let shared_e: Vec<EdgeId> = ea.intersection(eb).copied().collect();
                let shared_v: Vec<VertexId> = va.intersection(vb).copied().collect();
                let single_face = match shared_e.len() {
                    0 => shared_v.len() <= 1,
                    1 => {
                        let ends = self.edge_ends(shared_e[0]).unwrap_or([VertexId(0); 2]);
                        shared_v.len() == 2 && shared_v.contains(&ends[0]) && shared_v.contains(&ends[1])
                    }
                    _ => false,
                };
                if !single_face {
                    violations.push(Violation {
                        rule: rules::SINGLE_FACE,
                        cells: vec![CellRef::Square(*sa), CellRef::Square(*sb)],
                        message: format!("cells share more than one face: squares {sa} and {sb}"),
                    });
                }
            }
        }

        for e in &self.edges {
            for (sid, vs, es) in &square_data {
                if es.contains(&e.id) {
                    continue;
                }
                let shared = e.ends.iter().filter(|v| vs.contains(v)).count();
                let distinct_shared = if e.ends[0] == e.ends[1] { shared.min(1) } else { shared };
                if distinct_shared > 1 {
                    violations.push(Violation {
                        rule: rules::SINGLE_FACE,
                        cells: vec![CellRef::Edge(e.id), CellRef::Square(*sid)],
                        message: format!(
                            "cells share more than one face: edge {} meets square {sid} in two vertices",
                            e.id
                        ),
                    });
                }
            }
        }
    }

    // ---- links -----------------------------------------------------------

    /// The link of a vertex: one node per incident edge, one arc per
    /// square-corner, classified by shape.
    pub fn link_graph(&self, v: VertexId) -> Result<LinkGraph, UnknownCell> {
        if !self.contains_vertex(v) {
            return Err(UnknownCell(CellRef::Vertex(v)));
        }
        let nodes: Vec<EdgeId> = self.edges_at(v).to_vec();
        let arcs: Vec<LinkArc> = self
            .corners_at(v)
            .iter()
            .map(|c| LinkArc {
                ends: c.edges,
                square: c.square,
            })
            .collect();
        let class = classify_link(&nodes, &arcs);
        Ok(LinkGraph {
            vertex: v,
            nodes,
            arcs,
            class,
        })
    }
}

/// Rule identifiers used in validation reports.
pub mod rules {
    pub const EDGE_DISTINCT: &str = "edge-distinct";
    pub const EDGE_UNIQUE: &str = "edge-unique";
    pub const SQUARE_DISTINCT: &str = "square-distinct";
    pub const SQUARE_BOUNDARY: &str = "square-boundary";
    pub const SQUARE_UNIQUE: &str = "square-unique";
    pub const SINGLE_FACE: &str = "single-face";
}

/// One violated rule with the offending cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub cells: Vec<CellRef>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

/// Outcome of [`SquareComplex::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// An arc of a vertex link: a square-corner joining two incident edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkArc {
    pub ends: [EdgeId; 2],
    pub square: SquareId,
}

/// Shape of a vertex link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkClass {
    /// A single cycle; the vertex is interior.
    Cycle,
    /// A single path (possibly one isolated node).
    Path,
    /// Several components, each of degree at most 2, or no nodes at all.
    DisjointUnion,
    /// Anything with a node of degree 3 or more.
    Other,
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LinkClass::Cycle => "cycle",
            LinkClass::Path => "path",
            LinkClass::DisjointUnion => "disjoint-union",
            LinkClass::Other => "other",
        };
        f.write_str(s)
    }
}

/// The link of a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkGraph {
    pub vertex: VertexId,
    /// Edge ids incident to the vertex, ascending.
    pub nodes: Vec<EdgeId>,
    /// One arc per square-corner.
    pub arcs: Vec<LinkArc>,
    pub class: LinkClass,
}

impl LinkGraph {
    /// Arc endpoint pairs as indices into `nodes`.
    pub fn arc_indices(&self) -> Vec<[usize; 2]> {
        self.arcs
            .iter()
            .map(|a| {
                [
                    self.nodes.binary_search(&a.ends[0]).expect("arc end is a node"),
                    self.nodes.binary_search(&a.ends[1]).expect("arc end is a node"),
                ]
            })
            .collect()
    }
}

fn classify_link(nodes: &[EdgeId], arcs: &[LinkArc]) -> LinkClass {
    if nodes.is_empty() {
        return LinkClass::DisjointUnion;
    }
    let index: BTreeMap<EdgeId, usize> = nodes.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let n = nodes.len();
    let mut degree = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in arcs {
        let (u, v) = (index[&a.ends[0]], index[&a.ends[1]]);
        if u == v {
            degree[u] += 2;
            adj[u].push(u);
        } else {
            degree[u] += 1;
            degree[v] += 1;
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    if degree.iter().any(|&d| d >= 3) {
        return LinkClass::Other;
    }
    // connectivity
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    if count < n {
        return LinkClass::DisjointUnion;
    }
    if arcs.len() == n {
        LinkClass::Cycle
    } else {
        LinkClass::Path
    }
}

// ---- parsing helpers -----------------------------------------------------

/// Parse error with 1-based position.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("reference to undeclared vertex {0}")]
    UnknownVertex(u32),
    #[error("no edge joins vertices {0} and {1}", pair[0], pair[1])]
    MissingEdge { pair: [u32; 2] },
    #[error("duplicate {0}")]
    DuplicateId(CellRef),
}

impl ParseError {
    fn syntax(line: usize, col: usize, msg: String) -> Self {
        ParseError {
            line,
            col,
            kind: ParseErrorKind::Syntax(msg),
        }
    }

    fn unknown_vertex(line: usize, col: usize, v: u32) -> Self {
        ParseError {
            line,
            col,
            kind: ParseErrorKind::UnknownVertex(v),
        }
    }

    fn duplicate(line: usize, col: usize, cell: CellRef) -> Self {
        ParseError {
            line,
            col,
            kind: ParseErrorKind::DuplicateId(cell),
        }
    }
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn expect_args<const N: usize>(
    line: usize,
    col: usize,
    synopsis: &str,
    args: &[(usize, &str)],
) -> Result<[u32; N], ParseError> {
    if args.len() != N {
        return Err(ParseError::syntax(
            line,
            col,
            format!("expected `{synopsis}`, got {} argument(s)", args.len()),
        ));
    }
    let mut out = [0u32; N];
    for (i, &(c, tok)) in args.iter().enumerate() {
        out[i] = tok
            .parse::<u32>()
            .map_err(|_| ParseError::syntax(line, c, format!("`{tok}` is not a cell id")))?;
    }
    Ok(out)
}

fn sorted_pair(a: VertexId, b: VertexId) -> [VertexId; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

fn pair_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    let p = sorted_pair(a, b);
    (p[0], p[1])
}

fn join_ids<T: fmt::Display>(ids: &[T]) -> String {
    ids.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
