//! Property tests for the combinatorial and planar-geometry invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use sqc::complex::canonical_cycle;
use sqc::curvature::{link_girth, Girth};
use sqc::generate::{generate, GeneratorSpec};
use sqc::geometry::{
    alexandrov_straighten, comparison_triangle, StraightenCase,
};
use sqc::{LinkGraph, SquareComplex, VertexId};

fn small_complex() -> impl Strategy<Value = SquareComplex> {
    prop_oneof![
        (1u32..4, 1u32..4).prop_map(|(r, c)| generate(&GeneratorSpec::Grid { rows: r, cols: c }).unwrap()),
        (0u64..200, 1u32..10)
            .prop_map(|(seed, n)| generate(&GeneratorSpec::TreeOfSquares { seed, n }).unwrap()),
        (0u64..200, 0u32..14)
            .prop_map(|(seed, n)| generate(&GeneratorSpec::RandomCat0 { seed, n }).unwrap()),
        Just(generate(&GeneratorSpec::Cube3Skel).unwrap()),
        Just(generate(&GeneratorSpec::CubeCorner).unwrap()),
        Just(generate(&GeneratorSpec::Torus { rows: 3, cols: 4 }).unwrap()),
    ]
}

proptest! {
    #[test]
    fn canonical_form_is_idempotent_and_symmetry_invariant(ids in proptest::array::uniform4(0u32..50)) {
        let cycle = ids.map(VertexId);
        let canon = canonical_cycle(cycle);
        prop_assert_eq!(canonical_cycle(canon), canon);
        for r in 0..4 {
            let fwd = [cycle[r], cycle[(r + 1) % 4], cycle[(r + 2) % 4], cycle[(r + 3) % 4]];
            let rev = [cycle[r], cycle[(r + 3) % 4], cycle[(r + 2) % 4], cycle[(r + 1) % 4]];
            prop_assert_eq!(canonical_cycle(fwd), canon);
            prop_assert_eq!(canonical_cycle(rev), canon);
        }
    }

    #[test]
    fn parse_of_serialize_is_identity(k in small_complex()) {
        let text = k.to_sqc();
        let parsed = SquareComplex::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &k);
        prop_assert_eq!(parsed.to_sqc(), text);
    }

    #[test]
    fn balls_are_monotone_and_full(k in small_complex(), radius in 0usize..6) {
        let v = k.vertices()[0];
        let inner = k.ball(v, radius).unwrap();
        let outer = k.ball(v, radius + 1).unwrap();
        let inner_vs: BTreeSet<_> = inner.vertices().iter().copied().collect();
        let outer_vs: BTreeSet<_> = outer.vertices().iter().copied().collect();
        prop_assert!(inner_vs.is_subset(&outer_vs));
        for e in inner.edge_ids() {
            prop_assert!(outer.edge_ends(e).is_some());
        }
        for s in inner.square_ids() {
            prop_assert!(outer.square_cycle(s).is_some());
        }
        // Fullness against the ambient complex.
        for s in k.square_ids() {
            let cycle = k.square_cycle(s).unwrap();
            let all_in = cycle.iter().all(|w| inner_vs.contains(w));
            prop_assert_eq!(inner.square_cycle(s).is_some(), all_in);
        }
        // Saturation at the eccentricity.
        let ecc = k.eccentricity(v).unwrap();
        prop_assert_eq!(&k.ball(v, ecc).unwrap(), &k.component_of(v).unwrap());
    }

    #[test]
    fn link_girth_matches_exhaustive_enumeration(k in small_complex()) {
        for &v in k.vertices() {
            let link = k.link_graph(v).unwrap();
            if link.nodes.len() <= 12 {
                let expected = exhaustive_girth(&link);
                let got = link_girth(&k, v).unwrap();
                let got_val = match got {
                    Girth::Finite(g) => Some(g),
                    Girth::Unbounded => None,
                };
                prop_assert_eq!(got_val, expected, "vertex {}", v);
            }
        }
    }

    #[test]
    fn mesh_metric_is_symmetric_and_triangular(
        coords in proptest::array::uniform6(0.0f64..1.0),
        squares in proptest::array::uniform3(0u32..4),
    ) {
        use sqc::geometry::{Mesh, RemovalMask, SurfacePoint};
        let k = generate(&GeneratorSpec::Grid { rows: 2, cols: 2 }).unwrap();
        let mesh = Mesh::build(&k, 4, &RemovalMask::empty()).unwrap();
        let pts: Vec<SurfacePoint> = (0..3)
            .map(|i| SurfacePoint::Square {
                square: sqc::SquareId(squares[i]),
                x: coords[2 * i],
                y: coords[2 * i + 1],
            })
            .collect();
        let d = |a: &SurfacePoint, b: &SurfacePoint| mesh.distance(a, b).unwrap().length;
        let (dpq, dqp) = (d(&pts[0], &pts[1]), d(&pts[1], &pts[0]));
        prop_assert!((dpq - dqp).abs() < 1e-12);
        let (dpr, dqr) = (d(&pts[0], &pts[2]), d(&pts[1], &pts[2]));
        prop_assert!(dpr <= dpq + dqr + 1e-12);
        prop_assert!(dpq <= dpr + dqr + 1e-12);
    }

    #[test]
    fn comparison_triangle_angles_sum_to_pi(
        a in 0.01f64..10.0,
        b in 0.01f64..10.0,
        t in 0.0f64..1.0,
    ) {
        // c interpolates between |a-b| and a+b so the triple is valid.
        let c = (a - b).abs() + t * (a + b - (a - b).abs());
        let tri = comparison_triangle([a, b, c]).unwrap();
        let total: f64 = tri.angles.iter().sum();
        prop_assert!((total - std::f64::consts::PI).abs() < 1e-9, "sum {total}");
    }

    /// Straightening trichotomy, in the direction the planar oracle
    /// confirms: above π the whole inequality set points up; below π the
    /// two base angles and the shared-point distance point down while the
    /// apex comparison still points up (or the straightened triangle does
    /// not exist at all); the equality case makes everything equal.
    #[test]
    fn straightening_directions_follow_the_gamma_sum(
        bx in -1.0f64..2.0, by in 0.05f64..2.0,
        cx in -1.0f64..2.0, cy in 0.05f64..2.0,
        shared in 0.2f64..2.0,
    ) {
        let a = [0.0, 0.0];
        let c = [shared, 0.0];
        let b = [bx, by];
        let b2 = [cx, -cy];
        let report = alexandrov_straighten(
            [dist(a, b), dist(b, c), shared],
            [dist(a, b2), dist(b2, c), shared],
        ).unwrap();
        match report.case {
            StraightenCase::AbovePi => {
                let comps = report.comparisons().expect("above-π straightening exists");
                for cmp in comps {
                    prop_assert!(cmp.lhs >= cmp.rhs - 1e-9, "{}: {} < {}", cmp.name, cmp.lhs, cmp.rhs);
                }
            }
            StraightenCase::BelowPi => {
                if let Some(comps) = report.comparisons() {
                    let apex_sum = report.alpha + report.alpha_prime;
                    for cmp in comps {
                        if cmp.name == "alpha" {
                            // The apex comparison points up whenever α + α'
                            // stays below π; at the boundary the straightened
                            // triangle degenerates.
                            if apex_sum <= std::f64::consts::PI - 1e-7 {
                                prop_assert!(cmp.lhs >= cmp.rhs - 1e-9, "alpha: {} < {}", cmp.lhs, cmp.rhs);
                            }
                        } else {
                            prop_assert!(cmp.lhs <= cmp.rhs + 1e-9, "{}: {} > {}", cmp.name, cmp.lhs, cmp.rhs);
                        }
                    }
                }
            }
            StraightenCase::EqualPi => {
                let comps = report.comparisons().expect("flat straightening exists");
                for cmp in comps {
                    prop_assert!((cmp.lhs - cmp.rhs).abs() < 1e-9);
                }
            }
        }
    }

    /// Exact equality instances: B' on the extension of the segment B–C
    /// beyond C, so that γ + γ' = π by construction.
    #[test]
    fn straightening_equality_case_collapses_all_comparisons(
        bx in -0.5f64..1.5, by in 0.1f64..2.0,
        ext in 0.1f64..2.0,
        shared in 0.5f64..2.0,
    ) {
        let a = [0.0, 0.0];
        let c = [shared, 0.0];
        let b = [bx, by];
        let len = dist(b, c);
        let b2 = [c[0] + ext * (c[0] - b[0]) / len, c[1] + ext * (c[1] - b[1]) / len];
        let report = alexandrov_straighten(
            [dist(a, b), dist(b, c), shared],
            [dist(a, b2), dist(b2, c), shared],
        ).unwrap();
        prop_assert!((report.gamma_sum - std::f64::consts::PI).abs() < 1e-7);
        let comps = report.comparisons().expect("flat straightening exists");
        for cmp in comps {
            prop_assert!(
                (cmp.lhs - cmp.rhs).abs() < 1e-7,
                "{}: {} vs {}", cmp.name, cmp.lhs, cmp.rhs
            );
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Independent girth oracle: direct enumeration of self-loops, parallel
/// arcs and simple cycles in the link multigraph.
fn exhaustive_girth(link: &LinkGraph) -> Option<usize> {
    let n = link.nodes.len();
    let arcs = link.arc_indices();
    if arcs.iter().any(|&[a, b]| a == b) {
        return Some(1);
    }
    let mut sorted: Vec<[usize; 2]> = arcs.iter().map(|&[a, b]| [a.min(b), a.max(b)]).collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Some(2);
    }
    // Simple vertex cycles of length >= 3 by DFS from each start.
    let mut adj = vec![Vec::new(); n];
    for &[a, b] in &arcs {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut best: Option<usize> = None;
    fn dfs(
        adj: &[Vec<usize>],
        start: usize,
        current: usize,
        visited: &mut Vec<bool>,
        depth: usize,
        best: &mut Option<usize>,
    ) {
        for &next in &adj[current] {
            if next == start && depth >= 3 {
                if best.map_or(true, |b| depth < b) {
                    *best = Some(depth);
                }
            } else if !visited[next] && next > start {
                visited[next] = true;
                dfs(adj, start, next, visited, depth + 1, best);
                visited[next] = false;
            }
        }
    }
    for start in 0..n {
        let mut visited = vec![false; n];
        visited[start] = true;
        dfs(&adj, start, start, &mut visited, 1, &mut best);
    }
    best
}
