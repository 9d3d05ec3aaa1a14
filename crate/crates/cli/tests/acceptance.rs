//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sqc::collapse::{
    collapse_all, elementary_collapse, filtration, free_edges, is_single_vertex, verify_sequence,
    FreeFacePair, Strategy,
};
use sqc::curvature::{check_cat0, is_npc, link_girth, Cat0Verdict, CurvatureReport, Girth, VertexClass};
use sqc::generate::{generate, GeneratorSpec};
use sqc::geometry::{
    alexandrov_straighten, check_collapsed_geodesic, sample_cat0, GeodesicCase, Mesh, RemovalMask,
    StraightenCase, SurfacePoint,
};
use sqc::{EdgeId, SquareComplex, SquareId, VertexId};

fn corpus() -> Vec<(String, SquareComplex)> {
    let mut corpus = Vec::new();
    for rows in 1..=6u32 {
        for cols in 1..=6u32 {
            let spec = GeneratorSpec::Grid { rows, cols };
            corpus.push((spec.to_string(), generate(&spec).unwrap()));
        }
    }
    for n in 1..=10u32 {
        let spec = GeneratorSpec::Staircase { n };
        corpus.push((spec.to_string(), generate(&spec).unwrap()));
    }
    for seed in 1..=10u64 {
        let spec = GeneratorSpec::TreeOfSquares { seed, n: 30 };
        corpus.push((spec.to_string(), generate(&spec).unwrap()));
    }
    for seed in 1..=20u64 {
        let spec = GeneratorSpec::RandomCat0 { seed, n: 40 };
        corpus.push((spec.to_string(), generate(&spec).unwrap()));
    }
    corpus
}

fn shared_corpus() -> &'static [(String, SquareComplex)] {
    static CORPUS: OnceLock<Vec<(String, SquareComplex)>> = OnceLock::new();
    CORPUS.get_or_init(corpus)
}

fn conclude(name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("{name}: PASS");
    } else {
        println!("{name}: FAIL ({} problem(s))", failures.len());
        for f in failures.iter().take(12) {
            println!("  - {f}");
        }
        panic!("{name} failed: {}", failures.join("; "));
    }
}

#[test]
fn criterion_1_full_collapse_over_the_corpus() {
    let start = Instant::now();
    let corpus = corpus();
    let mut failures = Vec::new();
    for (name, k) in &corpus {
        if !check_cat0(k).is_cat0() {
            failures.push(format!("{name}: not CAT0"));
            continue;
        }
        let expected_len = k.n_squares() + k.n_vertices() - 1;
        for strategy in Strategy::ALL {
            for seed in 1..=10u64 {
                let (seq, fin) = collapse_all(k, strategy, seed);
                if !is_single_vertex(&fin) {
                    failures.push(format!("{name}: {strategy} seed {seed} stalled"));
                } else if seq.steps.len() != expected_len {
                    failures.push(format!(
                        "{name}: {strategy} seed {seed} took {} steps, expected {expected_len}",
                        seq.steps.len()
                    ));
                } else if !verify_sequence(k, &seq) {
                    failures.push(format!("{name}: {strategy} seed {seed} sequence fails replay"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 1: corpus of {} complexes, 4 strategies x 10 seeds in {:.1?}",
        corpus.len(),
        elapsed
    );
    if elapsed.as_secs() > 60 {
        failures.push(format!("runtime {elapsed:.1?} exceeds 60 s"));
    }
    conclude("criterion 1 (collapse to a point)", failures);
}

#[test]
fn criterion_2_negative_controls() {
    let mut failures = Vec::new();

    let torus = generate(&GeneratorSpec::Torus { rows: 4, cols: 4 }).unwrap();
    if !is_npc(&torus).0 {
        failures.push("4x4 torus: expected npc = true".into());
    }
    let verdict = check_cat0(&torus);
    if !matches!(verdict, Cat0Verdict::NotMedian { .. }) {
        failures.push(format!(
            "4x4 torus: expected NotMedian, got {verdict} (the 4x4 torus skeleton is the \
             4-cube graph, which is median; the complex fails on unfilled induced 4-cycles \
             instead — see the decisions ledger)"
        ));
    }
    if !free_edges(&torus).is_empty() {
        failures.push("4x4 torus: expected no free edges".into());
    }
    let (seq, fin) = collapse_all(&torus, Strategy::First, 1);
    if !(seq.steps.is_empty() && fin == torus) {
        failures.push("4x4 torus: expected an immediate stall".into());
    }

    let cube = generate(&GeneratorSpec::Cube3Skel).unwrap();
    match check_cat0(&cube) {
        Cat0Verdict::NotNpc { witness } => {
            if link_girth(&cube, witness).unwrap() != Girth::Finite(3) {
                failures.push(format!("cube3skel: witness {witness} is not a girth-3 vertex"));
            }
        }
        other => failures.push(format!("cube3skel: expected NotNPC, got {other}")),
    }

    let corner = generate(&GeneratorSpec::CubeCorner).unwrap();
    let report = sample_cat0(&corner, &RemovalMask::empty(), 500, 32, 0.05, 2).unwrap();
    println!(
        "criterion 2: cubecorner sampler found {} violations in {} checks (worst ratio {:.2})",
        report.violations.len(),
        report.checks_run,
        report.worst_ratio
    );
    if report.violations.is_empty() {
        failures.push("cubecorner: expected at least one CAT(0) violation".into());
    }

    conclude("criterion 2 (negative controls)", failures);
}

#[test]
fn criterion_3_curvature_and_free_faces() {
    let mut failures = Vec::new();
    for (name, k) in shared_corpus() {
        let report = CurvatureReport::new(k);
        for row in &report.rows {
            if row.class == VertexClass::Interior {
                let omega = row.omega.expect("interior rows carry omega");
                if omega.half_pis() > 0 {
                    failures.push(format!("{name}: interior vertex {} has omega {omega}", row.vertex));
                }
            }
        }
        if k.n_squares() > 0 && free_edges(k).is_empty() {
            failures.push(format!("{name}: no free edge despite {} squares", k.n_squares()));
        }
        // Replay one run and check curvature after every 2→1 step.
        let (seq, _) = collapse_all(k, Strategy::First, 1);
        let mut current = k.clone();
        for &step in &seq.steps {
            current = elementary_collapse(&current, step).unwrap();
            if matches!(step, FreeFacePair::EdgeInSquare { .. }) && !is_npc(&current).0 {
                failures.push(format!("{name}: intermediate complex lost npc after {step}"));
                break;
            }
        }
    }
    conclude("criterion 3 (interior curvature and free faces)", failures);
}

// ---- criterion 4: straightening inequalities against a planar oracle ------

struct OracleReport {
    gamma_sum: f64,
    angles: [f64; 6],
    straightened: Option<[f64; 4]>,
    shared: f64,
    apex_sum: f64,
}

fn vec_angle(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1]];
    let v = [r[0] - p[0], r[1] - p[1]];
    let dot = u[0] * v[0] + u[1] * v[1];
    let cross = u[0] * v[1] - u[1] * v[0];
    cross.atan2(dot).abs()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Exact planar construction: measures every angle from coordinates and
/// rebuilds the straightened triangle explicitly.
fn oracle(a: [f64; 2], b: [f64; 2], b2: [f64; 2], c: [f64; 2]) -> OracleReport {
    let alpha = vec_angle(a, b, c);
    let beta = vec_angle(b, a, c);
    let gamma = vec_angle(c, a, b);
    let alpha2 = vec_angle(a, b2, c);
    let beta2 = vec_angle(b2, a, c);
    let gamma2 = vec_angle(c, a, b2);
    let (ab, bc, ac) = (dist(a, b), dist(b, c), dist(a, c));
    let (ab2, b2c) = (dist(a, b2), dist(b2, c));
    let base = bc + b2c;
    let straightened = if base <= ab + ab2 + 1e-12 && ab <= base + ab2 && ab2 <= base + ab {
        let bar_b = [0.0, 0.0];
        let bar_b2 = [base, 0.0];
        let x = (ab * ab + base * base - ab2 * ab2) / (2.0 * base);
        let y = (ab * ab - x * x).max(0.0).sqrt();
        let bar_a = [x, y];
        let bar_c = [bc, 0.0];
        Some([
            vec_angle(bar_a, bar_b, bar_b2),
            vec_angle(bar_b, bar_a, bar_b2),
            vec_angle(bar_b2, bar_a, bar_b),
            dist(bar_a, bar_c),
        ])
    } else {
        None
    };
    OracleReport {
        gamma_sum: gamma + gamma2,
        angles: [alpha, beta, gamma, alpha2, beta2, gamma2],
        straightened,
        shared: ac,
        apex_sum: alpha + alpha2,
    }
}

#[test]
fn criterion_4_straightening_inequalities() {
    const N: usize = 10_000;
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_811);
    let mut failures = Vec::new();

    let mut numeric_mismatches = 0usize;
    let mut above = 0usize;
    let mut below = 0usize;
    let mut equality_cases = 0usize;
    let mut above_violations = [0usize; 4];
    let mut below_violations = [0usize; 4];
    let mut below_unconstructible = 0usize;
    let names = ["alpha", "beta", "beta_prime", "shared_point"];

    for _ in 0..N {
        let shared = rng.gen_range(0.2..2.0);
        let a = [0.0, 0.0];
        let c = [shared, 0.0];
        let b = [rng.gen_range(-1.0..shared + 1.0), rng.gen_range(0.05..2.0)];
        let b2 = [rng.gen_range(-1.0..shared + 1.0), -rng.gen_range(0.05..2.0)];

        let wanted = oracle(a, b, b2, c);
        let report = alexandrov_straighten(
            [dist(a, b), dist(b, c), shared],
            [dist(a, b2), dist(b2, c), shared],
        )
        .expect("sampled coordinates give valid triangles");

        // The implementation must agree with the oracle numerically.
        let impl_angles = [
            report.alpha,
            report.beta,
            report.gamma,
            report.alpha_prime,
            report.beta_prime,
            report.gamma_prime,
        ];
        for (i, w) in wanted.angles.iter().enumerate() {
            if (impl_angles[i] - w).abs() > TOL {
                numeric_mismatches += 1;
            }
        }
        match (&wanted.straightened, report.comparisons()) {
            (Some(ws), Some(comps)) => {
                for (i, cmp) in comps.iter().enumerate() {
                    if (cmp.lhs - ws[i]).abs() > TOL {
                        numeric_mismatches += 1;
                    }
                }
            }
            (None, None) => {}
            _ => numeric_mismatches += 1,
        }

        // The criterion proper: the inequality set matching sign(γ+γ'−π).
        if (wanted.gamma_sum - std::f64::consts::PI).abs() < 1e-12 {
            equality_cases += 1;
            if let Some(ws) = &wanted.straightened {
                let rhs = [wanted.apex_sum, wanted.angles[1], wanted.angles[4], wanted.shared];
                for i in 0..4 {
                    if (ws[i] - rhs[i]).abs() > TOL {
                        failures.push(format!("equality case broke {}", names[i]));
                    }
                }
            }
        } else if wanted.gamma_sum > std::f64::consts::PI {
            above += 1;
            let ws = wanted.straightened.expect("above-π straightening always exists");
            let rhs = [wanted.apex_sum, wanted.angles[1], wanted.angles[4], wanted.shared];
            for i in 0..4 {
                if ws[i] < rhs[i] - TOL {
                    above_violations[i] += 1;
                }
            }
        } else {
            below += 1;
            match &wanted.straightened {
                None => below_unconstructible += 1,
                Some(ws) => {
                    let rhs = [wanted.apex_sum, wanted.angles[1], wanted.angles[4], wanted.shared];
                    for i in 0..4 {
                        if ws[i] > rhs[i] + TOL {
                            below_violations[i] += 1;
                        }
                    }
                }
            }
        }
        let _ = report.case == StraightenCase::EqualPi;
    }

    println!(
        "criterion 4: {N} pairs ({above} above π, {below} below π, {equality_cases} within 1e-12 of π)"
    );
    println!("  implementation vs oracle mismatches beyond 1e-9: {numeric_mismatches}");
    println!("  above-π '≥' violations per comparison {names:?}: {above_violations:?}");
    println!(
        "  below-π '≤' violations per comparison {names:?}: {below_violations:?}, \
         straightened triangle unconstructible: {below_unconstructible}"
    );

    if numeric_mismatches > 0 {
        failures.push(format!("{numeric_mismatches} numeric mismatches against the oracle"));
    }
    for i in 0..4 {
        if above_violations[i] > 0 {
            failures.push(format!(
                "above π: {} samples broke {} ≥",
                above_violations[i], names[i]
            ));
        }
        if below_violations[i] > 0 {
            failures.push(format!(
                "below π: {} samples broke {} ≤",
                below_violations[i], names[i]
            ));
        }
    }
    if below_unconstructible > 0 {
        failures.push(format!(
            "below π: {below_unconstructible} samples admit no straightened triangle \
             (d(B,C)+d(C,B') exceeds d(A,B)+d(A,B'))"
        ));
    }
    conclude("criterion 4 (straightening inequality set)", failures);
}

#[test]
fn criterion_5_collapsed_geodesics() {
    let start = Instant::now();
    let mut failures = Vec::new();

    // Corner-detour instance: 2x2 grid, top-right square 3 with free top
    // edge 5, chords from the top-left square into the bottom-right square
    // passing the center vertex 4.
    let grid = generate(&GeneratorSpec::Grid { rows: 2, cols: 2 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut produced = 0usize;
    while produced < 10 {
        let (px, py) = (rng.gen_range(0.05..0.95), rng.gen_range(1.05..1.95));
        let (qx, qy) = (rng.gen_range(1.05..1.95), rng.gen_range(0.05..0.95));
        let y_at_x1 = py + (qy - py) * (1.0 - px) / (qx - px);
        let x_at_y1 = px + (qx - px) * (py - 1.0) / (py - qy);
        if !(1.02..=1.98).contains(&y_at_x1) || !(1.02..=1.98).contains(&x_at_y1) {
            continue;
        }
        produced += 1;
        let p = SurfacePoint::Square { square: SquareId(2), x: px, y: py - 1.0 };
        let q = SurfacePoint::Square { square: SquareId(1), x: qx - 1.0, y: qy };
        let report =
            check_collapsed_geodesic(&grid, SquareId(3), EdgeId(5), &p, &q, 32, 0.05).unwrap();
        if report.case != GeodesicCase::CornerDetour {
            failures.push(format!("case A pair {produced}: detected {}", report.case));
            continue;
        }
        if report.corner != VertexId(4) {
            failures.push(format!("case A pair {produced}: corner {}", report.corner));
        }
        if !report.matches {
            failures.push(format!(
                "case A pair {produced}: rel err {:.4}",
                report.corner_rel_err
            ));
        }
        // The masked region is flat, so the legs have planar lengths.
        let exact = dist([px, py], [1.0, 1.0]) + dist([qx, qy], [1.0, 1.0]);
        if (report.corner_sum - exact).abs() / exact > 0.08 {
            failures.push(format!(
                "case A pair {produced}: legs {:.4} vs planar {exact:.4}",
                report.corner_sum
            ));
        }
    }

    // Far-edge instance: middle square of a 1x3 strip with its free top
    // edge 4; the detour runs along the bottom edge.
    let strip = generate(&GeneratorSpec::Strip { n: 3 }).unwrap();
    for i in 0..10 {
        let (px, py) = (rng.gen_range(0.05..0.95), rng.gen_range(0.1..0.9));
        let (qx, qy) = (rng.gen_range(0.05..0.95), rng.gen_range(0.1..0.9));
        let p = SurfacePoint::Square { square: SquareId(0), x: px, y: py };
        let q = SurfacePoint::Square { square: SquareId(2), x: qx, y: qy };
        let report =
            check_collapsed_geodesic(&strip, SquareId(1), EdgeId(4), &p, &q, 32, 0.05).unwrap();
        if report.case != GeodesicCase::FarEdgeDetour {
            failures.push(format!("case B pair {i}: detected {}", report.case));
            continue;
        }
        if !report.matches {
            failures.push(format!("case B pair {i}: rel err {:.4}", report.far_edge_rel_err));
        }
    }

    let elapsed = start.elapsed();
    println!("criterion 5: 10 corner-detour and 10 far-edge pairs in {elapsed:.1?}");
    if elapsed.as_secs() > 30 {
        failures.push(format!("runtime {elapsed:.1?} exceeds 30 s"));
    }
    conclude("criterion 5 (collapsed geodesics)", failures);
}

#[test]
fn criterion_6_masked_grid_sampler_is_clean() {
    let grid = generate(&GeneratorSpec::Grid { rows: 2, cols: 2 }).unwrap();
    let mask = RemovalMask::new([SquareId(3)], [EdgeId(5)]);
    let report = sample_cat0(&grid, &mask, 500, 32, 0.05, 7).unwrap();
    println!(
        "criterion 6: {} triangles sampled, {} checks, {} violations (worst ratio {:.3}, {} touching the removed boundary)",
        report.sampled,
        report.checks_run,
        report.violations.len(),
        report.worst_ratio,
        report.touching_removed_boundary
    );
    let mut failures = Vec::new();
    if !report.ok() {
        failures.push(format!("{} violations on the collapsed grid", report.violations.len()));
    }
    conclude("criterion 6 (collapsed neighborhood stays CAT(0))", failures);
}

#[test]
fn criterion_7_filtrations_from_random_vertices() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (name, k) in shared_corpus() {
        let base = k.vertices()[rng.gen_range(0..k.n_vertices())];
        let filt = filtration(k, base, Strategy::First, 1).unwrap();
        for ball in &filt.balls {
            if !ball.collapsed_to_point() {
                failures.push(format!("{name}: ball of radius {} stalled", ball.radius));
            }
        }
        for pair in filt.balls.windows(2) {
            let inner = &pair[0].complex;
            let outer = &pair[1].complex;
            if !inner.vertices().iter().all(|&v| outer.contains_vertex(v)) {
                failures.push(format!("{name}: balls are not monotone"));
            }
        }
        if &filt.balls.last().unwrap().complex != k {
            failures.push(format!("{name}: final ball is not the whole complex"));
        }
    }
    conclude("criterion 7 (ball filtrations)", failures);
}

#[test]
fn criterion_8_mesh_calibration() {
    let mut failures = Vec::new();
    let cases = [
        (
            GeneratorSpec::Grid { rows: 1, cols: 1 },
            SurfacePoint::Square { square: SquareId(0), x: 0.0, y: 0.0 },
            SurfacePoint::Square { square: SquareId(0), x: 1.0, y: 1.0 },
            2f64.sqrt(),
            "unit square diagonal",
        ),
        (
            GeneratorSpec::Grid { rows: 1, cols: 2 },
            SurfacePoint::Vertex(VertexId(0)),
            SurfacePoint::Vertex(VertexId(5)),
            5f64.sqrt(),
            "2x1 grid chord",
        ),
    ];
    for (spec, p, q, exact, label) in cases {
        let complex = generate(&spec).unwrap();
        let mut errors = Vec::new();
        for k in [8usize, 16, 32] {
            let mesh = Mesh::build(&complex, k, &RemovalMask::empty()).unwrap();
            let d = mesh.distance(&p, &q).unwrap().length;
            errors.push((d - exact).abs() / exact);
        }
        println!("criterion 8: {label} errors at k=8,16,32: {errors:?}");
        if !(errors[0] >= errors[1] - 1e-12 && errors[1] >= errors[2] - 1e-12) {
            failures.push(format!("{label}: errors do not decrease monotonically"));
        }
        if errors[2] > 0.03 {
            failures.push(format!("{label}: error {:.4} at k=32 exceeds 3%", errors[2]));
        }
    }
    conclude("criterion 8 (mesh calibration)", failures);
}
