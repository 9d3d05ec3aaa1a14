//! Subdivision meshes of the piecewise-Euclidean realization.
//!
//! Each surviving square carries a (k+1) × (k+1) lattice of nodes joined by
//! a 16-neighborhood stencil (axis, diagonal and knight moves) weighted by
//! Euclidean length; each surviving edge carries a k-step path. Lattice
//! points on shared faces are identified across carriers, so the mesh metric
//! approximates the intrinsic metric of the realization. Shortest paths
//! overestimate true geodesics by the stencil factor (≤ 1.028: the worst
//! direction is 13.28° off the nearest stencil ray) plus O(1/k) snapping.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use thiserror::Error;

use crate::complex::{CellRef, EdgeId, SquareComplex, SquareId, UnknownCell, VertexId};

/// A point of the realization, addressed through its carrier cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfacePoint {
    Vertex(VertexId),
    /// Parameter t ∈ [0,1] along the edge's stored (smaller id first) pair.
    Edge { edge: EdgeId, t: f64 },
    /// Coordinates (x, y) ∈ [0,1]² in the square's canonical frame: first
    /// canonical vertex at the origin, cycle counterclockwise.
    Square { square: SquareId, x: f64, y: f64 },
}

impl fmt::Display for SurfacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfacePoint::Vertex(v) => write!(f, "v{v}"),
            SurfacePoint::Edge { edge, t } => write!(f, "{edge}:{t}"),
            SurfacePoint::Square { square, x, y } => write!(f, "{square}:{x},{y}"),
        }
    }
}

/// Cells excluded from a mesh; models the subcomplex K ∖ {e, σ}.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RemovalMask {
    pub squares: BTreeSet<SquareId>,
    pub edges: BTreeSet<EdgeId>,
}

impl RemovalMask {
    pub fn empty() -> Self {
        RemovalMask::default()
    }

    pub fn of_squares(squares: impl IntoIterator<Item = SquareId>) -> Self {
        RemovalMask { squares: squares.into_iter().collect(), edges: BTreeSet::new() }
    }

    pub fn new(
        squares: impl IntoIterator<Item = SquareId>,
        edges: impl IntoIterator<Item = EdgeId>,
    ) -> Self {
        RemovalMask {
            squares: squares.into_iter().collect(),
            edges: edges.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty() && self.edges.is_empty()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("subdivision parameter k must be at least 2, got {0}")]
    SubdivisionTooCoarse(usize),
    #[error(transparent)]
    UnknownCell(#[from] UnknownCell),
    #[error("mask removes edge {edge} still required by kept square {square}")]
    InconsistentMask { edge: EdgeId, square: SquareId },
    #[error("complex is not well-formed: {0}")]
    InvalidComplex(String),
    #[error("point {0} lies in a removed cell")]
    PointInRemovedCell(String),
    #[error("coordinates of {0} out of range [0, 1]")]
    CoordinatesOutOfRange(String),
    #[error("no path between the query points (mesh is disconnected there)")]
    Disconnected,
}

/// The subdivision mesh of a complex minus a removal mask.
///
/// Immutable after construction; distance queries are pure and safe to run
/// concurrently.
#[derive(Clone, Debug)]
pub struct Mesh {
    k: usize,
    adj: Vec<Vec<(usize, f64)>>,
    vertex_nodes: BTreeMap<VertexId, usize>,
    /// Per surviving edge: k+1 node ids from ends[0] to ends[1].
    edge_nodes: BTreeMap<EdgeId, Vec<usize>>,
    /// Per surviving square: (k+1)² node ids, row-major j·(k+1)+i.
    square_nodes: BTreeMap<SquareId, Vec<usize>>,
}

/// The 16-neighborhood stencil as positive-direction offsets.
const STENCIL: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (1, 1),
    (1, -1),
    (2, 1),
    (2, -1),
    (1, 2),
    (1, -2),
];

impl Mesh {
    /// Builds the mesh of `k` lattice points per square side over the
    /// complex minus the mask. Nodes on a removed square's surviving
    /// boundary edges remain. The complex must pass validation.
    pub fn build(complex: &SquareComplex, k: usize, mask: &RemovalMask) -> Result<Mesh, MeshError> {
        if k < 2 {
            return Err(MeshError::SubdivisionTooCoarse(k));
        }
        for &s in &mask.squares {
            if complex.square_cycle(s).is_none() {
                return Err(UnknownCell(CellRef::Square(s)).into());
            }
        }
        for &e in &mask.edges {
            if complex.edge_ends(e).is_none() {
                return Err(UnknownCell(CellRef::Edge(e)).into());
            }
            for &s in complex.squares_at_edge(e) {
                if !mask.squares.contains(&s) {
                    return Err(MeshError::InconsistentMask { edge: e, square: s });
                }
            }
        }

        let mut mesh = Mesh {
            k,
            adj: Vec::new(),
            vertex_nodes: BTreeMap::new(),
            edge_nodes: BTreeMap::new(),
            square_nodes: BTreeMap::new(),
        };
        let mut node_count = 0usize;
        let fresh = |count: &mut usize| {
            let id = *count;
            *count += 1;
            id
        };

        for &v in complex.vertices() {
            let id = fresh(&mut node_count);
            mesh.vertex_nodes.insert(v, id);
        }
        let kept_edges: Vec<EdgeId> = complex
            .edge_ids()
            .filter(|e| !mask.edges.contains(e))
            .collect();
        for &e in &kept_edges {
            let ends = complex.edge_ends(e).expect("listed edge exists");
            let mut nodes = Vec::with_capacity(k + 1);
            nodes.push(mesh.vertex_nodes[&ends[0]]);
            for _ in 1..k {
                nodes.push(fresh(&mut node_count));
            }
            nodes.push(mesh.vertex_nodes[&ends[1]]);
            mesh.edge_nodes.insert(e, nodes);
        }
        let kept_squares: Vec<SquareId> = complex
            .square_ids()
            .filter(|s| !mask.squares.contains(s))
            .collect();
        for &s in &kept_squares {
            let cycle = complex.square_cycle(s).expect("listed square exists");
            let mut nodes = vec![usize::MAX; (k + 1) * (k + 1)];
            for j in 0..=k {
                for i in 0..=k {
                    let id = match (i, j) {
                        (0, 0) => mesh.vertex_nodes[&cycle[0]],
                        (i, 0) if i == k => mesh.vertex_nodes[&cycle[1]],
                        (i, j) if i == k && j == k => mesh.vertex_nodes[&cycle[2]],
                        (0, j) if j == k => mesh.vertex_nodes[&cycle[3]],
                        (i, 0) => mesh.boundary_node(complex, cycle[0], cycle[1], i)?,
                        (i, j) if j == k => mesh.boundary_node(complex, cycle[3], cycle[2], i)?,
                        (0, j) => mesh.boundary_node(complex, cycle[0], cycle[3], j)?,
                        (i, j) if i == k => mesh.boundary_node(complex, cycle[1], cycle[2], j)?,
                        _ => fresh(&mut node_count),
                    };
                    nodes[j * (k + 1) + i] = id;
                }
            }
            mesh.square_nodes.insert(s, nodes);
        }

        // Arcs: the stencil inside every kept square, paths along every kept
        // edge; axis arcs along shared boundaries are deduplicated.
        let mut arcs: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut weighted: Vec<(usize, usize, f64)> = Vec::new();
        let mut add = |arcs: &mut BTreeSet<(usize, usize)>, a: usize, b: usize, w: f64| {
            let key = (a.min(b), a.max(b));
            if arcs.insert(key) {
                weighted.push((key.0, key.1, w));
            }
        };
        let step = 1.0 / k as f64;
        for &e in &kept_edges {
            let nodes = &mesh.edge_nodes[&e];
            for w in nodes.windows(2) {
                add(&mut arcs, w[0], w[1], step);
            }
        }
        for &s in &kept_squares {
            let nodes = &mesh.square_nodes[&s];
            for j in 0..=k as i64 {
                for i in 0..=k as i64 {
                    let from = nodes[(j as usize) * (k + 1) + i as usize];
                    for (di, dj) in STENCIL {
                        let (ni, nj) = (i + di, j + dj);
                        if ni < 0 || nj < 0 || ni > k as i64 || nj > k as i64 {
                            continue;
                        }
                        let to = nodes[(nj as usize) * (k + 1) + ni as usize];
                        let w = ((di * di + dj * dj) as f64).sqrt() * step;
                        add(&mut arcs, from, to, w);
                    }
                }
            }
        }
        mesh.adj = vec![Vec::new(); node_count];
        for (a, b, w) in weighted {
            mesh.adj[a].push((b, w));
            mesh.adj[b].push((a, w));
        }
        Ok(mesh)
    }

    fn boundary_node(
        &self,
        complex: &SquareComplex,
        from: VertexId,
        to: VertexId,
        step: usize,
    ) -> Result<usize, MeshError> {
        let e = complex.edge_between(from, to).ok_or_else(|| {
            MeshError::InvalidComplex(format!("no edge joins vertices {from} and {to}"))
        })?;
        let nodes = self.edge_nodes.get(&e).ok_or_else(|| {
            MeshError::InvalidComplex(format!("boundary edge {e} of a kept square is missing"))
        })?;
        let ends = complex.edge_ends(e).expect("edge exists");
        let idx = if ends[0] == from { step } else { self.k - step };
        Ok(nodes[idx])
    }

    pub fn subdivision(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn arc_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Longest arc length in the mesh (the knight move √5 / k).
    pub fn max_arc_length(&self) -> f64 {
        5f64.sqrt() / self.k as f64
    }

    pub fn vertex_node(&self, v: VertexId) -> Option<usize> {
        self.vertex_nodes.get(&v).copied()
    }

    /// Nodes along a surviving edge, from its smaller end to its larger end.
    pub fn edge_node_path(&self, e: EdgeId) -> Option<&[usize]> {
        self.edge_nodes.get(&e).map(Vec::as_slice)
    }

    /// Snaps a surface point to the nearest lattice node of its carrier;
    /// ties resolve to the smallest node id.
    pub fn snap(&self, p: &SurfacePoint) -> Result<usize, MeshError> {
        match *p {
            SurfacePoint::Vertex(v) => self
                .vertex_nodes
                .get(&v)
                .copied()
                .ok_or_else(|| UnknownCell(CellRef::Vertex(v)).into()),
            SurfacePoint::Edge { edge, t } => {
                let nodes = self
                    .edge_nodes
                    .get(&edge)
                    .ok_or_else(|| MeshError::PointInRemovedCell(p.to_string()))?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(MeshError::CoordinatesOutOfRange(p.to_string()));
                }
                let exact = t * self.k as f64;
                let lo = exact.floor() as usize;
                let candidates = [lo, (lo + 1).min(self.k)];
                Ok(snap_candidates(
                    candidates
                        .iter()
                        .map(|&i| (nodes[i], (exact - i as f64).abs())),
                ))
            }
            SurfacePoint::Square { square, x, y } => {
                let nodes = self
                    .square_nodes
                    .get(&square)
                    .ok_or_else(|| MeshError::PointInRemovedCell(p.to_string()))?;
                if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                    return Err(MeshError::CoordinatesOutOfRange(p.to_string()));
                }
                let (ex, ey) = (x * self.k as f64, y * self.k as f64);
                let (ix, iy) = (ex.floor() as usize, ey.floor() as usize);
                let mut candidates = Vec::with_capacity(4);
                for i in [ix, (ix + 1).min(self.k)] {
                    for j in [iy, (iy + 1).min(self.k)] {
                        let d2 = (ex - i as f64).powi(2) + (ey - j as f64).powi(2);
                        candidates.push((nodes[j * (self.k + 1) + i], d2));
                    }
                }
                Ok(snap_candidates(candidates.into_iter()))
            }
        }
    }

    /// Single-source shortest paths by Dijkstra.
    pub fn shortest_paths(&self, source: usize) -> ShortestPaths {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry { dist: 0.0, node: source });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for &(next, w) in &self.adj[node] {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    prev[next] = node;
                    heap.push(HeapEntry { dist: nd, node: next });
                }
            }
        }
        ShortestPaths { source, dist, prev }
    }

    /// Shortest mesh path between two surface points (snapped to nodes).
    pub fn distance(&self, p: &SurfacePoint, q: &SurfacePoint) -> Result<MeshPath, MeshError> {
        let a = self.snap(p)?;
        let b = self.snap(q)?;
        let paths = self.shortest_paths(a);
        let length = paths.dist[b];
        if !length.is_finite() {
            return Err(MeshError::Disconnected);
        }
        Ok(MeshPath { length, nodes: paths.path_to(b).expect("finite distance has a path") })
    }
}

fn snap_candidates(candidates: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (node, d) in candidates {
        best = match best {
            None => Some((node, d)),
            Some((bn, bd)) => {
                if d < bd - 1e-15 || ((d - bd).abs() <= 1e-15 && node < bn) {
                    Some((node, d))
                } else {
                    Some((bn, bd))
                }
            }
        };
    }
    best.expect("at least one candidate").0
}

/// Shortest-path tree from one source node.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    prev: Vec<usize>,
}

impl ShortestPaths {
    /// Node sequence from the source to `target`, inclusive.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.source {
            cur = self.prev[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    /// The path node closest to the given arc-length position from the
    /// source (first such node on ties).
    pub fn node_at_length(&self, target: usize, position: f64) -> Option<usize> {
        let path = self.path_to(target)?;
        path.iter()
            .copied()
            .min_by(|&a, &b| {
                let da = (self.dist[a] - position).abs();
                let db = (self.dist[b] - position).abs();
                da.partial_cmp(&db).expect("finite distances")
            })
    }
}

#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on distance, then node id for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A mesh shortest path with its length.
#[derive(Clone, Debug)]
pub struct MeshPath {
    pub length: f64,
    pub nodes: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    fn grid(r: u32, c: u32) -> SquareComplex {
        generate(&GeneratorSpec::Grid { rows: r, cols: c }).unwrap()
    }

    #[test]
    fn single_square_node_and_arc_counts() {
        let k = grid(1, 1);
        let mesh = Mesh::build(&k, 2, &RemovalMask::empty()).unwrap();
        assert_eq!(mesh.node_count(), 9);
        // 12 axis + 8 diagonal + 8 knight arcs at k = 2.
        assert_eq!(mesh.arc_count(), 28);
    }

    #[test]
    fn shared_edge_nodes_are_identified_once() {
        let k = grid(2, 2);
        let mesh = Mesh::build(&k, 2, &RemovalMask::empty()).unwrap();
        // Full lattice of a 2x2 block at spacing 1/2: 5 × 5 points.
        assert_eq!(mesh.node_count(), 25);
    }

    #[test]
    fn node_count_formula_holds_on_the_torus() {
        let t = generate(&GeneratorSpec::Torus { rows: 3, cols: 3 }).unwrap();
        let k = 4usize;
        let mesh = Mesh::build(&t, k, &RemovalMask::empty()).unwrap();
        let expected = t.n_squares() * (k - 1) * (k - 1) + t.n_edges() * (k - 1) + t.n_vertices();
        assert_eq!(mesh.node_count(), expected);
    }

    #[test]
    fn masked_square_keeps_its_surviving_boundary() {
        let k = grid(2, 2);
        let full = Mesh::build(&k, 2, &RemovalMask::empty()).unwrap();
        let masked = Mesh::build(&k, 2, &RemovalMask::of_squares([SquareId(3)])).unwrap();
        // Only the single interior lattice point of the masked square is gone.
        assert_eq!(masked.node_count(), full.node_count() - 1);
    }

    #[test]
    fn too_coarse_subdivision_is_rejected() {
        let k = grid(1, 1);
        assert!(matches!(
            Mesh::build(&k, 1, &RemovalMask::empty()),
            Err(MeshError::SubdivisionTooCoarse(1))
        ));
    }

    #[test]
    fn mask_consistency_is_enforced() {
        let k = grid(2, 2);
        // Edge 0 lies in square 0; removing the edge but not the square is
        // inconsistent.
        let bad = RemovalMask::new([], [EdgeId(0)]);
        assert!(matches!(
            Mesh::build(&k, 2, &bad),
            Err(MeshError::InconsistentMask { .. })
        ));
        let good = RemovalMask::new([SquareId(0)], [EdgeId(0)]);
        assert!(Mesh::build(&k, 2, &good).is_ok());
    }

    #[test]
    fn diagonal_of_the_unit_square_is_exact() {
        let k = grid(1, 1);
        for sub in [8usize, 16, 32] {
            let mesh = Mesh::build(&k, sub, &RemovalMask::empty()).unwrap();
            let p = SurfacePoint::Square { square: SquareId(0), x: 0.0, y: 0.0 };
            let q = SurfacePoint::Square { square: SquareId(0), x: 1.0, y: 1.0 };
            let d = mesh.distance(&p, &q).unwrap();
            assert!(
                (d.length - 2f64.sqrt()).abs() / 2f64.sqrt() <= 0.03,
                "k = {sub}: {}",
                d.length
            );
        }
    }

    #[test]
    fn flat_two_square_chord_is_near_exact() {
        let k = grid(1, 2);
        let mesh = Mesh::build(&k, 32, &RemovalMask::empty()).unwrap();
        let p = SurfacePoint::Vertex(VertexId(0));
        let q = SurfacePoint::Vertex(VertexId(5));
        let d = mesh.distance(&p, &q).unwrap();
        let exact = 5f64.sqrt();
        assert!((d.length - exact).abs() / exact <= 0.03, "{}", d.length);
    }

    #[test]
    fn identical_points_have_zero_distance() {
        let k = grid(1, 1);
        let mesh = Mesh::build(&k, 4, &RemovalMask::empty()).unwrap();
        let p = SurfacePoint::Square { square: SquareId(0), x: 0.3, y: 0.7 };
        assert_eq!(mesh.distance(&p, &p).unwrap().length, 0.0);
    }

    #[test]
    fn snapping_rejects_removed_cells_and_bad_coordinates() {
        let k = grid(2, 2);
        let mesh = Mesh::build(&k, 4, &RemovalMask::of_squares([SquareId(3)])).unwrap();
        let inside_removed = SurfacePoint::Square { square: SquareId(3), x: 0.5, y: 0.5 };
        assert!(matches!(
            mesh.snap(&inside_removed),
            Err(MeshError::PointInRemovedCell(_))
        ));
        let out = SurfacePoint::Square { square: SquareId(0), x: 1.5, y: 0.0 };
        assert!(matches!(
            mesh.snap(&out),
            Err(MeshError::CoordinatesOutOfRange(_))
        ));
    }

    #[test]
    fn disconnected_mesh_reports_no_path() {
        let k = SquareComplex::from_cells(vec![0, 1, 2, 3], vec![(0, 0, 1), (1, 2, 3)], vec![])
            .unwrap();
        let mesh = Mesh::build(&k, 2, &RemovalMask::empty()).unwrap();
        let p = SurfacePoint::Vertex(VertexId(0));
        let q = SurfacePoint::Vertex(VertexId(2));
        assert!(matches!(mesh.distance(&p, &q), Err(MeshError::Disconnected)));
    }

    #[test]
    fn shared_face_points_snap_to_one_node_across_carriers() {
        // The center vertex of the 2x2 grid reached as a vertex, as a
        // square corner (from two different squares) and as an edge
        // endpoint must be the same mesh node.
        let k = grid(2, 2);
        let mesh = Mesh::build(&k, 4, &RemovalMask::empty()).unwrap();
        let center = VertexId(4);
        let via_vertex = mesh.snap(&SurfacePoint::Vertex(center)).unwrap();
        for s in k.square_ids() {
            let cycle = k.square_cycle(s).unwrap();
            if let Some(i) = cycle.iter().position(|&v| v == center) {
                let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
                let [x, y] = corners[i];
                let via_square = mesh.snap(&SurfacePoint::Square { square: s, x, y }).unwrap();
                assert_eq!(via_square, via_vertex, "square {s}");
            }
        }
        for &e in k.edges_at(center) {
            let ends = k.edge_ends(e).unwrap();
            let t = if ends[0] == center { 0.0 } else { 1.0 };
            let via_edge = mesh.snap(&SurfacePoint::Edge { edge: e, t }).unwrap();
            assert_eq!(via_edge, via_vertex, "edge {e}");
        }
        // An interior point of a shared edge, addressed from both sides.
        let e = k.edge_between(VertexId(4), VertexId(5)).unwrap();
        let via_edge = mesh.snap(&SurfacePoint::Edge { edge: e, t: 0.5 }).unwrap();
        let via_s1 = mesh
            .snap(&SurfacePoint::Square { square: SquareId(1), x: 0.5, y: 1.0 })
            .unwrap();
        let via_s3 = mesh
            .snap(&SurfacePoint::Square { square: SquareId(3), x: 0.5, y: 0.0 })
            .unwrap();
        assert_eq!(via_edge, via_s1);
        assert_eq!(via_edge, via_s3);
    }

    #[test]
    fn mesh_metric_is_symmetric_and_triangular() {
        let k = grid(2, 2);
        let mesh = Mesh::build(&k, 8, &RemovalMask::empty()).unwrap();
        let pts = [
            SurfacePoint::Square { square: SquareId(0), x: 0.2, y: 0.4 },
            SurfacePoint::Square { square: SquareId(3), x: 0.8, y: 0.9 },
            SurfacePoint::Vertex(VertexId(2)),
        ];
        let d = |a: &SurfacePoint, b: &SurfacePoint| mesh.distance(a, b).unwrap().length;
        let (dpq, dqp) = (d(&pts[0], &pts[1]), d(&pts[1], &pts[0]));
        assert!((dpq - dqp).abs() < 1e-12);
        let (dpr, dqr) = (d(&pts[0], &pts[2]), d(&pts[1], &pts[2]));
        assert!(dpr <= dpq + dqr + 1e-12);
    }
}
