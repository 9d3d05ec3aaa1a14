//! Numeric falsifiers on the mesh metric: CAT(0)-inequality sampling over
//! random geodesic triangles, and verification that geodesics after a 2→1
//! collapse concatenate through the collapsed square's far corner(s).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{CellRef, EdgeId, SquareComplex, SquareId, UnknownCell, VertexId};
use crate::curvature::check_cat0;
use crate::geometry::gallery::{local_coords, shared_edge, Gallery, GalleryError};
use crate::geometry::mesh::{Mesh, MeshError, RemovalMask, SurfacePoint};
use crate::geometry::TriangleError;

/// Worst-case relative overestimate of the 16-neighborhood mesh metric: the
/// worst direction lies 13.28° off the nearest stencil ray, 1/cos ≈ 1.0275.
pub const STENCIL_EXCESS: f64 = 0.028;

/// Worst-case deviation of an optimal stencil path from the straight chord,
/// per unit of chord length: a shortest zigzag may run one bracketing
/// direction first, peaking at tan(13.28°)/2 ≈ 0.118 off the chord, so a
/// path midpoint carries that much positional freedom.
pub const LATERAL_DRIFT: f64 = 0.12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Triangle(#[from] TriangleError),
    #[error(transparent)]
    UnknownCell(#[from] UnknownCell),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// One CAT(0)-inequality violation found by the sampler.
#[derive(Clone, Debug)]
pub struct Cat0Violation {
    /// The sampled triangle's corner nodes.
    pub triangle: [usize; 3],
    /// The two side-midpoint nodes whose distance broke the bound.
    pub pair: [usize; 2],
    pub measured: f64,
    pub bound: f64,
}

/// Report of [`sample_cat0`].
#[derive(Clone, Debug)]
pub struct Cat0SampleReport {
    pub requested: usize,
    pub sampled: usize,
    pub degenerate_skipped: usize,
    pub checks_run: usize,
    pub violations: Vec<Cat0Violation>,
    /// Largest measured/bound ratio over all checks.
    pub worst_ratio: f64,
    /// Triangles with a side path through the surviving boundary of a
    /// removed square (coverage of the collapse site).
    pub touching_removed_boundary: usize,
}

impl Cat0SampleReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples random mesh-node triangles and checks the CAT(0) inequality
/// between side midpoints against the planar comparison triangle.
///
/// For each triangle the three side midpoints (path nodes nearest to half
/// the side length) are compared pairwise: the mesh distance must not
/// exceed the planar distance between the corresponding comparison points
/// by more than the slack
/// `d̄·(STENCIL_EXCESS + tolerance) + 2·h + LATERAL_DRIFT·(Lᵢ + Lⱼ)`,
/// where h is the longest mesh arc and Lᵢ, Lⱼ are the two side lengths;
/// the last term covers the positional freedom of shortest-path midpoints.
/// Degenerate comparison triangles are skipped and counted.
pub fn sample_cat0(
    complex: &SquareComplex,
    mask: &RemovalMask,
    n_triangles: usize,
    k: usize,
    tolerance: f64,
    seed: u64,
) -> Result<Cat0SampleReport, GeometryError> {
    let mesh = Mesh::build(complex, k, mask)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.node_count();
    if n < 3 {
        return Err(GeometryError::Precondition(
            "mesh has fewer than three nodes".into(),
        ));
    }

    // Nodes on the surviving boundary of removed squares, for coverage.
    let mut boundary_nodes = vec![false; n];
    for &s in &mask.squares {
        let cycle = complex
            .square_cycle(s)
            .ok_or(UnknownCell(CellRef::Square(s)))?;
        for i in 0..4 {
            if let Some(e) = complex.edge_between(cycle[i], cycle[(i + 1) % 4]) {
                if let Some(nodes) = mesh.edge_node_path(e) {
                    for &node in nodes {
                        boundary_nodes[node] = true;
                    }
                }
            }
        }
    }

    let slack = |planar: f64, sides: f64| {
        planar * (STENCIL_EXCESS + tolerance) + 2.0 * mesh.max_arc_length() + LATERAL_DRIFT * sides
    };
    let mut report = Cat0SampleReport {
        requested: n_triangles,
        sampled: 0,
        degenerate_skipped: 0,
        checks_run: 0,
        violations: Vec::new(),
        worst_ratio: 0.0,
        touching_removed_boundary: 0,
    };

    for _ in 0..n_triangles {
        let p = rng.gen_range(0..n);
        let q = rng.gen_range(0..n);
        let r = rng.gen_range(0..n);
        if p == q || q == r || p == r {
            report.degenerate_skipped += 1;
            continue;
        }
        let from_p = mesh.shortest_paths(p);
        let from_q = mesh.shortest_paths(q);
        let (d_pq, d_pr, d_qr) = (from_p.dist[q], from_p.dist[r], from_q.dist[r]);
        if !(d_pq.is_finite() && d_pr.is_finite() && d_qr.is_finite()) {
            report.degenerate_skipped += 1;
            continue;
        }
        report.sampled += 1;

        let area2 = {
            let s = (d_pq + d_pr + d_qr) / 2.0;
            s * (s - d_pq) * (s - d_pr) * (s - d_qr)
        };
        if area2 < 1e-24 {
            report.degenerate_skipped += 1;
            report.sampled -= 1;
            continue;
        }

        // Side midpoints as path nodes, with their arc fractions.
        let m_pq = from_p.node_at_length(q, d_pq / 2.0).expect("path exists");
        let m_pr = from_p.node_at_length(r, d_pr / 2.0).expect("path exists");
        let m_qr = from_q.node_at_length(r, d_qr / 2.0).expect("path exists");
        let fractions = [
            from_p.dist[m_pq] / d_pq,
            from_p.dist[m_pr] / d_pr,
            from_q.dist[m_qr] / d_qr,
        ];

        // Planar midpoint distances, maximized over the stencil-uncertainty
        // box: each true side length lies in [mesh/(1+ε), mesh], and the
        // corner deflating the dominant side majorizes the true comparison
        // triangle, so thin triangles do not amplify mesh noise into false
        // violations.
        let deflate = 1.0 / (1.0 + STENCIL_EXCESS);
        let mut planar = [0.0f64; 3];
        for combo in 0..8u32 {
            let spq = if combo & 1 != 0 { d_pq * deflate } else { d_pq };
            let spr = if combo & 2 != 0 { d_pr * deflate } else { d_pr };
            let sqr = if combo & 4 != 0 { d_qr * deflate } else { d_qr };
            let longest = spq.max(spr).max(sqr);
            if 2.0 * longest > spq + spr + sqr {
                continue;
            }
            let bar_p = [0.0, 0.0];
            let bar_q = [spq, 0.0];
            let rx = (spr * spr + spq * spq - sqr * sqr) / (2.0 * spq);
            let ry = (spr * spr - rx * rx).max(0.0).sqrt();
            let bar_r = [rx, ry];
            let bar_m_pq = lerp(bar_p, bar_q, fractions[0]);
            let bar_m_pr = lerp(bar_p, bar_r, fractions[1]);
            let bar_m_qr = lerp(bar_q, bar_r, fractions[2]);
            planar[0] = planar[0].max(planar_dist(bar_m_pq, bar_m_pr));
            planar[1] = planar[1].max(planar_dist(bar_m_pq, bar_m_qr));
            planar[2] = planar[2].max(planar_dist(bar_m_pr, bar_m_qr));
        }

        let covered = [from_p.path_to(q), from_p.path_to(r), from_q.path_to(r)]
            .iter()
            .flatten()
            .flatten()
            .any(|&node| boundary_nodes[node]);
        if covered {
            report.touching_removed_boundary += 1;
        }

        let from_m_pq = mesh.shortest_paths(m_pq);
        let from_m_pr = mesh.shortest_paths(m_pr);
        let checks = [
            (m_pq, m_pr, from_m_pq.dist[m_pr], planar[0], d_pq + d_pr),
            (m_pq, m_qr, from_m_pq.dist[m_qr], planar[1], d_pq + d_qr),
            (m_pr, m_qr, from_m_pr.dist[m_qr], planar[2], d_pr + d_qr),
        ];
        for (a, b, measured, planar, sides) in checks {
            report.checks_run += 1;
            let bound = planar + slack(planar, sides);
            if bound > 0.0 {
                report.worst_ratio = report.worst_ratio.max(measured / bound);
            }
            if measured > bound {
                report.violations.push(Cat0Violation {
                    triangle: [p, q, r],
                    pair: [a, b],
                    measured,
                    bound,
                });
            }
        }
    }
    Ok(report)
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn planar_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Crossing pattern of the straight route through the collapsed square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeodesicCase {
    /// The chord crosses the two edges meeting at one far corner; the
    /// detour geodesic bends at that corner.
    CornerDetour,
    /// The chord crosses the two side edges; the detour runs along the far
    /// boundary edge between both corners.
    FarEdgeDetour,
    /// The chord misses the square's interior; no detour is needed.
    NoDetour,
    /// None of the expected patterns (logged, not guessed at).
    Unclassified,
}

impl std::fmt::Display for GeodesicCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GeodesicCase::CornerDetour => "A",
            GeodesicCase::FarEdgeDetour => "B",
            GeodesicCase::NoDetour => "no-detour",
            GeodesicCase::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

/// Report of [`check_collapsed_geodesic`].
#[derive(Clone, Debug)]
pub struct CollapsedGeodesicReport {
    pub case: GeodesicCase,
    /// Mesh distance between the query points in K ∖ {e, σ}.
    pub masked_distance: f64,
    /// Mesh distance in the full complex.
    pub full_distance: f64,
    /// d'(P, corner) + d'(corner, Q) through the detected corner.
    pub corner_sum: f64,
    /// d'(P, near) + d'(near, far) + d'(far, Q) along the far edge.
    pub far_edge_sum: f64,
    /// The far corner the chord passes (labelled `a` in corner detours).
    pub corner: VertexId,
    /// The other far corner.
    pub other_corner: VertexId,
    pub corner_rel_err: f64,
    pub far_edge_rel_err: f64,
    /// Whether the concatenation matching the detected case agrees with the
    /// masked mesh distance within the tolerance handed in.
    pub matches: bool,
}

/// Checks that after removing a square with a free edge, geodesics between
/// points on either side concatenate through the square's far corner (case
/// A) or along its far edge (case B).
///
/// `p` and `q` must be square-carried points outside `square`; the crossing
/// pattern of the straight route is detected by unfolding the gallery
/// (p's square, `square`, q's square). Chords hitting a corner of the
/// square are perturbed by 1e-9 in local coordinates.
pub fn check_collapsed_geodesic(
    complex: &SquareComplex,
    square: SquareId,
    free_edge: EdgeId,
    p: &SurfacePoint,
    q: &SurfacePoint,
    k: usize,
    tolerance: f64,
) -> Result<CollapsedGeodesicReport, GeometryError> {
    if !check_cat0(complex).is_cat0() {
        return Err(GeometryError::Precondition(
            "complex is not CAT(0)".into(),
        ));
    }
    let cycle = complex
        .square_cycle(square)
        .ok_or(UnknownCell(CellRef::Square(square)))?;
    if complex.squares_at_edge(free_edge) != [square] {
        return Err(GeometryError::Precondition(format!(
            "edge {free_edge} is not a free edge of square {square}"
        )));
    }
    let (SurfacePoint::Square { square: sq_p, .. }, SurfacePoint::Square { square: sq_q, .. }) =
        (*p, *q)
    else {
        return Err(GeometryError::Precondition(
            "query points must be square-carried".into(),
        ));
    };
    if sq_p == square || sq_q == square {
        return Err(GeometryError::Precondition(
            "query points must lie outside the collapsed square".into(),
        ));
    }

    // Label the square a–b–c–h with the free edge e = [b, c].
    let ends = complex.edge_ends(free_edge).expect("free edge exists");
    let pos_b = cycle
        .iter()
        .position(|&v| v == ends[0] || v == ends[1])
        .expect("edge endpoint on cycle");
    let (b, c, a, h) = {
        // Walk the cycle so that b, c are consecutive.
        let next = cycle[(pos_b + 1) % 4];
        if next == ends[0] || next == ends[1] {
            let b = cycle[pos_b];
            let c = next;
            (b, c, cycle[(pos_b + 3) % 4], cycle[(pos_b + 2) % 4])
        } else {
            let b = cycle[pos_b];
            let c = cycle[(pos_b + 3) % 4];
            (b, c, cycle[(pos_b + 1) % 4], cycle[(pos_b + 2) % 4])
        }
    };

    let mask = RemovalMask::new([square], [free_edge]);
    let masked = Mesh::build(complex, k, &mask)?;
    let full = Mesh::build(complex, k, &RemovalMask::empty())?;
    let masked_distance = masked.distance(p, q)?.length;
    let full_distance = full.distance(p, q)?.length;

    let legs_from = |point: &SurfacePoint, v: VertexId| -> Result<f64, GeometryError> {
        Ok(masked.distance(point, &SurfacePoint::Vertex(v))?.length)
    };

    let case = classify_crossing(complex, square, free_edge, (a, b, c, h), p, q)?;
    // Normalize so that `corner` is the bend corner for corner detours and
    // the corner on p's side for far-edge detours.
    let (corner, other_corner) = match case {
        DetectedCase::Corner(v) => (v, if v == a { h } else { a }),
        DetectedCase::FarEdge { near_p } => (near_p, if near_p == a { h } else { a }),
        DetectedCase::None | DetectedCase::Unknown => (a, h),
    };

    let corner_sum = legs_from(p, corner)? + legs_from(q, corner)?;
    let far_edge_sum = legs_from(p, corner)?
        + masked
            .distance(&SurfacePoint::Vertex(corner), &SurfacePoint::Vertex(other_corner))?
            .length
        + legs_from(q, other_corner)?;

    let corner_rel_err = rel_err(masked_distance, corner_sum);
    let far_edge_rel_err = rel_err(masked_distance, far_edge_sum);

    let (case, matches) = match case {
        DetectedCase::Corner(_) => (GeodesicCase::CornerDetour, corner_rel_err <= tolerance),
        DetectedCase::FarEdge { .. } => (GeodesicCase::FarEdgeDetour, far_edge_rel_err <= tolerance),
        DetectedCase::None => (
            GeodesicCase::NoDetour,
            rel_err(masked_distance, full_distance) <= tolerance,
        ),
        DetectedCase::Unknown => (GeodesicCase::Unclassified, false),
    };

    Ok(CollapsedGeodesicReport {
        case,
        masked_distance,
        full_distance,
        corner_sum,
        far_edge_sum,
        corner,
        other_corner,
        corner_rel_err,
        far_edge_rel_err,
        matches,
    })
}

fn rel_err(measured: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        measured.abs()
    } else {
        (measured - reference).abs() / reference
    }
}

enum DetectedCase {
    Corner(VertexId),
    FarEdge { near_p: VertexId },
    None,
    Unknown,
}

/// Finds which edges of the square the straight unfolded route crosses.
fn classify_crossing(
    complex: &SquareComplex,
    square: SquareId,
    free_edge: EdgeId,
    labels: (VertexId, VertexId, VertexId, VertexId),
    p: &SurfacePoint,
    q: &SurfacePoint,
) -> Result<DetectedCase, GeometryError> {
    let (a, b, c, h) = labels;
    let (SurfacePoint::Square { square: sq_p, x: px, y: py },
         SurfacePoint::Square { square: sq_q, x: qx, y: qy }) = (*p, *q)
    else {
        unreachable!("checked square-carried above");
    };
    if shared_edge(complex, sq_p, square).is_none()
        || shared_edge(complex, square, sq_q).is_none()
    {
        return Ok(DetectedCase::None);
    }
    let squares = [sq_p, square, sq_q];
    let gallery = Gallery::unfold(complex, &squares)?;

    // Perturb and retry when the chord hits a corner of the square.
    let mut offsets = [(0.0, 0.0), (1e-9, 1e-9)].into_iter();
    loop {
        let Some((dx, dy)) = offsets.next() else {
            return Ok(DetectedCase::Unknown);
        };
        let start = gallery.to_plane(
            0,
            local_coords(complex, sq_p, &SurfacePoint::Square {
                square: sq_p,
                x: (px + dx).clamp(0.0, 1.0),
                y: (py + dy).clamp(0.0, 1.0),
            })
            .expect("point in its own square"),
        );
        let end = gallery.to_plane(
            2,
            local_coords(complex, sq_q, &SurfacePoint::Square {
                square: sq_q,
                x: (qx + dx).clamp(0.0, 1.0),
                y: (qy + dy).clamp(0.0, 1.0),
            })
            .expect("point in its own square"),
        );

        let Some((t_in, t_out)) = gallery.clip_segment(1, start, end) else {
            return Ok(DetectedCase::None);
        };
        if t_out - t_in < 1e-12 {
            return Ok(DetectedCase::None);
        }

        let cycle = complex.square_cycle(square).expect("square exists");
        let place = gallery.placement(1);
        let mut hit_corner = false;
        let mut crossed: Vec<(f64, [VertexId; 2])> = Vec::new();
        for i in 0..4 {
            let (u, w) = (cycle[i], cycle[(i + 1) % 4]);
            let (pu, pw) = (place[i], place[(i + 1) % 4]);
            if let Some((t, s)) = segment_intersection(start, end, pu, pw) {
                if s < 1e-9 || s > 1.0 - 1e-9 {
                    hit_corner = true;
                }
                crossed.push((t, [u, w]));
            }
        }
        if hit_corner {
            continue;
        }
        crossed.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        let sides: Vec<[VertexId; 2]> = crossed.iter().map(|&(_, s)| s).collect();
        let is_edge = |side: &[VertexId; 2], x: VertexId, y: VertexId| {
            (side[0] == x && side[1] == y) || (side[0] == y && side[1] == x)
        };
        let ends = complex.edge_ends(free_edge).expect("free edge exists");
        return Ok(match sides.as_slice() {
            [] => DetectedCase::None,
            [s1, s2] => {
                if is_edge(s1, ends[0], ends[1]) || is_edge(s2, ends[0], ends[1]) {
                    DetectedCase::Unknown
                } else if (is_edge(s1, a, b) && is_edge(s2, h, a))
                    || (is_edge(s1, h, a) && is_edge(s2, a, b))
                {
                    DetectedCase::Corner(a)
                } else if (is_edge(s1, c, h) && is_edge(s2, h, a))
                    || (is_edge(s1, h, a) && is_edge(s2, c, h))
                {
                    DetectedCase::Corner(h)
                } else if is_edge(s1, a, b) && is_edge(s2, c, h) {
                    DetectedCase::FarEdge { near_p: a }
                } else if is_edge(s1, c, h) && is_edge(s2, a, b) {
                    DetectedCase::FarEdge { near_p: h }
                } else {
                    DetectedCase::Unknown
                }
            }
            _ => DetectedCase::Unknown,
        });
    }
}

/// Proper intersection parameters (t along a→b, s along c→d), when the open
/// segments cross.
fn segment_intersection(
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    d: [f64; 2],
) -> Option<(f64, f64)> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom.abs() < 1e-15 {
        return None;
    }
    let qp = [c[0] - a[0], c[1] - a[1]];
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    ((-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u))
        .then_some((t, u))
}
