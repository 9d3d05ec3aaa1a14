//! Isometric unfolding of square galleries into the plane.
//!
//! A gallery is an ordered run of squares, consecutive ones sharing exactly
//! one edge. Unfolding places each square isometrically so that shared
//! edges coincide and consecutive squares lie on opposite sides; a straight
//! planar segment that stays inside the unfolded strip is a geodesic of the
//! strip, hence an upper bound for the intrinsic distance and exact when
//! the strip contains a globally shortest path.

use thiserror::Error;

use crate::complex::{CellRef, EdgeId, SquareComplex, SquareId, UnknownCell, VertexId};
use crate::geometry::mesh::SurfacePoint;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GalleryError {
    #[error("gallery is empty")]
    Empty,
    #[error(transparent)]
    UnknownCell(#[from] UnknownCell),
    #[error("squares {0} and {1} do not share exactly one edge")]
    NotAdjacent(SquareId, SquareId),
    #[error("point {0} does not lie in gallery square {1}")]
    PointOutsideSquare(String, SquareId),
}

/// A gallery with the planar placement of each square.
#[derive(Clone, Debug)]
pub struct Gallery {
    squares: Vec<SquareId>,
    /// Placed corner coordinates, aligned with each square's canonical cycle.
    placements: Vec<[[f64; 2]; 4]>,
}

impl Gallery {
    /// Unfolds a run of squares. The first square sits in its canonical
    /// frame; each next square is placed by the unique isometry that matches
    /// the shared edge vertex-for-vertex and puts it on the far side.
    pub fn unfold(complex: &SquareComplex, squares: &[SquareId]) -> Result<Gallery, GalleryError> {
        if squares.is_empty() {
            return Err(GalleryError::Empty);
        }
        let mut placements: Vec<[[f64; 2]; 4]> = Vec::with_capacity(squares.len());
        for (idx, &s) in squares.iter().enumerate() {
            let cycle = complex
                .square_cycle(s)
                .ok_or(UnknownCell(CellRef::Square(s)))?;
            if idx == 0 {
                placements.push([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
                continue;
            }
            let prev = squares[idx - 1];
            let prev_cycle = complex.square_cycle(prev).expect("placed square exists");
            let shared = shared_edge(complex, prev, s)
                .ok_or(GalleryError::NotAdjacent(prev, s))?;
            let ends = complex.edge_ends(shared).expect("shared edge exists");

            let prev_place = placements[idx - 1];
            let target_a = corner_of(&prev_cycle, &prev_place, ends[0]);
            let target_b = corner_of(&prev_cycle, &prev_place, ends[1]);
            let local_a = local_corner(&cycle, ends[0]);
            let local_b = local_corner(&cycle, ends[1]);

            // Two isometries match the edge; pick the one placing this
            // square's center on the far side of the shared edge.
            let prev_center = centroid(&prev_place);
            let rot = edge_isometry(local_a, local_b, target_a, target_b, false);
            let refl = edge_isometry(local_a, local_b, target_a, target_b, true);
            let mut chosen = None;
            for map in [rot, refl] {
                let center = map.apply([0.5, 0.5]);
                if side(target_a, target_b, center) * side(target_a, target_b, prev_center) < 0.0 {
                    chosen = Some(map);
                    break;
                }
            }
            let map = chosen.ok_or(GalleryError::NotAdjacent(prev, s))?;
            placements.push([
                map.apply([0.0, 0.0]),
                map.apply([1.0, 0.0]),
                map.apply([1.0, 1.0]),
                map.apply([0.0, 1.0]),
            ]);
        }
        Ok(Gallery { squares: squares.to_vec(), placements })
    }

    pub fn squares(&self) -> &[SquareId] {
        &self.squares
    }

    /// Placed corners of the idx-th square, aligned with its canonical cycle.
    pub fn placement(&self, idx: usize) -> [[f64; 2]; 4] {
        self.placements[idx]
    }

    /// Planar position of local coordinates within the idx-th square.
    pub fn to_plane(&self, idx: usize, local: [f64; 2]) -> [f64; 2] {
        let p = &self.placements[idx];
        let ex = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let ey = [p[3][0] - p[0][0], p[3][1] - p[0][1]];
        [
            p[0][0] + local[0] * ex[0] + local[1] * ey[0],
            p[0][1] + local[0] * ex[1] + local[1] * ey[1],
        ]
    }

    /// Parameter interval of the segment a→b inside the idx-th placed square
    /// (closed convex clip), or None if it misses the square.
    pub fn clip_segment(&self, idx: usize, a: [f64; 2], b: [f64; 2]) -> Option<(f64, f64)> {
        let place = &self.placements[idx];
        let center = centroid(place);
        let mut t_in = 0.0f64;
        let mut t_out = 1.0f64;
        for i in 0..4 {
            let (p, q) = (place[i], place[(i + 1) % 4]);
            // Inward normal: towards the center.
            let mut n = [-(q[1] - p[1]), q[0] - p[0]];
            if n[0] * (center[0] - p[0]) + n[1] * (center[1] - p[1]) < 0.0 {
                n = [-n[0], -n[1]];
            }
            let da = n[0] * (a[0] - p[0]) + n[1] * (a[1] - p[1]);
            let db = n[0] * (b[0] - p[0]) + n[1] * (b[1] - p[1]);
            let denom = db - da;
            if denom.abs() < 1e-15 {
                if da < -1e-12 {
                    return None;
                }
                continue;
            }
            let t = -da / denom;
            if denom > 0.0 {
                t_in = t_in.max(t);
            } else {
                t_out = t_out.min(t);
            }
            if t_in > t_out + 1e-12 {
                return None;
            }
        }
        Some((t_in.clamp(0.0, 1.0), t_out.clamp(0.0, 1.0)))
    }
}

/// Outcome of tracing a straight segment through an unfolded gallery.
#[derive(Clone, Debug, PartialEq)]
pub enum UnfoldOutcome {
    /// The planar segment stays inside the strip; its Euclidean length is an
    /// upper bound for the intrinsic distance, exact when globally shortest.
    Straight { length: f64 },
    /// The segment leaves the strip before reaching the given square.
    Exits { square_index: usize },
}

/// Unfolds the gallery and traces the straight segment from `p` in the first
/// square to `q` in the last.
pub fn unfold_gallery(
    complex: &SquareComplex,
    squares: &[SquareId],
    p: &SurfacePoint,
    q: &SurfacePoint,
) -> Result<UnfoldOutcome, GalleryError> {
    let gallery = Gallery::unfold(complex, squares)?;
    let first = *squares.first().ok_or(GalleryError::Empty)?;
    let last = *squares.last().expect("non-empty");
    let p_local = local_coords(complex, first, p)
        .ok_or_else(|| GalleryError::PointOutsideSquare(p.to_string(), first))?;
    let q_local = local_coords(complex, last, q)
        .ok_or_else(|| GalleryError::PointOutsideSquare(q.to_string(), last))?;
    let a = gallery.to_plane(0, p_local);
    let b = gallery.to_plane(squares.len() - 1, q_local);

    // The clipped intervals must cover [0, 1] in gallery order.
    let mut covered = 0.0f64;
    for idx in 0..squares.len() {
        match gallery.clip_segment(idx, a, b) {
            Some((t_in, t_out)) if t_in <= covered + 1e-9 => {
                covered = covered.max(t_out);
            }
            _ => return Ok(UnfoldOutcome::Exits { square_index: idx }),
        }
    }
    if covered < 1.0 - 1e-9 {
        return Ok(UnfoldOutcome::Exits { square_index: squares.len() - 1 });
    }
    let length = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    Ok(UnfoldOutcome::Straight { length })
}

/// The single edge shared by two squares, if there is exactly one.
pub fn shared_edge(complex: &SquareComplex, a: SquareId, b: SquareId) -> Option<EdgeId> {
    let ea = complex.boundary_edges(a)?;
    let eb = complex.boundary_edges(b)?;
    let shared: Vec<EdgeId> = ea.into_iter().filter(|e| eb.contains(e)).collect();
    match shared.as_slice() {
        [e] => Some(*e),
        _ => None,
    }
}

/// Local coordinates of a surface point within a given square, when the
/// point lies on that square (vertex corners and boundary edges included).
pub fn local_coords(
    complex: &SquareComplex,
    square: SquareId,
    p: &SurfacePoint,
) -> Option<[f64; 2]> {
    let cycle = complex.square_cycle(square)?;
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    match *p {
        SurfacePoint::Square { square: s, x, y } => (s == square).then_some([x, y]),
        SurfacePoint::Vertex(v) => cycle.iter().position(|&c| c == v).map(|i| CORNERS[i]),
        SurfacePoint::Edge { edge, t } => {
            let ends = complex.edge_ends(edge)?;
            for i in 0..4 {
                let (u, w) = (cycle[i], cycle[(i + 1) % 4]);
                if complex.edge_between(u, w) == Some(edge) {
                    // Parameter runs from ends[0] to ends[1].
                    let (cu, cw) = (CORNERS[i], CORNERS[(i + 1) % 4]);
                    let (from, to) = if ends[0] == u { (cu, cw) } else { (cw, cu) };
                    return Some([
                        from[0] + t * (to[0] - from[0]),
                        from[1] + t * (to[1] - from[1]),
                    ]);
                }
            }
            None
        }
    }
}

fn corner_of(cycle: &[VertexId; 4], place: &[[f64; 2]; 4], v: VertexId) -> [f64; 2] {
    let i = cycle.iter().position(|&c| c == v).expect("vertex on cycle");
    place[i]
}

fn local_corner(cycle: &[VertexId; 4], v: VertexId) -> [f64; 2] {
    const CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let i = cycle.iter().position(|&c| c == v).expect("vertex on cycle");
    CORNERS[i]
}

fn centroid(place: &[[f64; 2]; 4]) -> [f64; 2] {
    [
        place.iter().map(|p| p[0]).sum::<f64>() / 4.0,
        place.iter().map(|p| p[1]).sum::<f64>() / 4.0,
    ]
}

fn side(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// A rigid motion of the plane built from an edge correspondence.
#[derive(Clone, Copy, Debug)]
struct Isometry {
    // Columns of the linear part followed by the translation.
    m: [[f64; 2]; 2],
    t: [f64; 2],
}

impl Isometry {
    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * p[0] + self.m[0][1] * p[1] + self.t[0],
            self.m[1][0] * p[0] + self.m[1][1] * p[1] + self.t[1],
        ]
    }
}

/// The isometry taking `la`→`ta`, `lb`→`tb`; `reflect` selects the
/// orientation-reversing one.
fn edge_isometry(la: [f64; 2], lb: [f64; 2], ta: [f64; 2], tb: [f64; 2], reflect: bool) -> Isometry {
    let u = [lb[0] - la[0], lb[1] - la[1]];
    let v = [tb[0] - ta[0], tb[1] - ta[1]];
    // Unit edges: rotation by the angle between u and v (plus a reflection
    // across u first when requested).
    let (cos, sin) = {
        let dot = u[0] * v[0] + u[1] * v[1];
        let cross = u[0] * v[1] - u[1] * v[0];
        let len2 = (u[0] * u[0] + u[1] * u[1]).max(1e-30);
        (dot / len2, cross / len2)
    };
    let rot = [[cos, -sin], [sin, cos]];
    let m = if reflect {
        // Reflect across the line through la with direction u, then rotate.
        let len2 = (u[0] * u[0] + u[1] * u[1]).max(1e-30);
        let rxx = (u[0] * u[0] - u[1] * u[1]) / len2;
        let rxy = 2.0 * u[0] * u[1] / len2;
        mat_mul(rot, [[rxx, rxy], [rxy, -rxx]])
    } else {
        rot
    };
    // Translation so that la maps to ta. The reflection matrix above fixes
    // the direction u, so the edge correspondence is preserved either way.
    let la_rot = [
        m[0][0] * la[0] + m[0][1] * la[1],
        m[1][0] * la[0] + m[1][1] * la[1],
    ];
    Isometry { m, t: [ta[0] - la_rot[0], ta[1] - la_rot[1]] }
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}
