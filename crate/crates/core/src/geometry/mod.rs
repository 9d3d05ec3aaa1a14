//! Piecewise-Euclidean metric layer: comparison triangles, triangle
//! straightening, angle-limit extrapolation, subdivision meshes, gallery
//! unfolding, post-collapse geodesic verification and CAT(0)-inequality
//! sampling.
//!
//! Everything here is double precision with explicitly stated tolerances;
//! exactness lives in the combinatorial modules.

mod gallery;
mod mesh;
mod sampler;

pub use gallery::{unfold_gallery, Gallery, GalleryError, UnfoldOutcome};
pub use mesh::{Mesh, MeshError, MeshPath, RemovalMask, ShortestPaths, SurfacePoint};
pub use sampler::{
    check_collapsed_geodesic, sample_cat0, Cat0SampleReport, Cat0Violation,
    CollapsedGeodesicReport, GeodesicCase, GeometryError, LATERAL_DRIFT, STENCIL_EXCESS,
};

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use thiserror::Error;

/// Relative tolerance for triangle-inequality checks.
pub const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TriangleError {
    #[error("side length {0} is not a finite nonnegative number")]
    BadLength(f64),
    #[error("triangle inequality violated: {longest} > {other_sum} + tolerance")]
    Inequality { longest: f64, other_sum: f64 },
    #[error("comparison angle undefined: an adjacent side is zero")]
    DegenerateApex,
    #[error("glued triangles disagree on the shared side: {0} vs {1}")]
    SharedSideMismatch(f64, f64),
}

/// The planar triangle with prescribed side lengths.
///
/// `angles[i]` is the angle opposite `sides[i]`; the angles of a valid
/// triangle sum to π within 1e-9. Degenerate inputs follow limit
/// conventions: a flat triangle has angles {0, 0, π}, a zero side puts π/2
/// at its two endpoints, and the point triangle is treated as equilateral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonTriangle {
    pub sides: [f64; 3],
    pub angles: [f64; 3],
}

/// Builds the comparison triangle for three side lengths (law of cosines).
pub fn comparison_triangle(sides: [f64; 3]) -> Result<ComparisonTriangle, TriangleError> {
    check_triangle(sides)?;
    let angles = [
        angle_opposite(sides[0], sides[1], sides[2]),
        angle_opposite(sides[1], sides[0], sides[2]),
        angle_opposite(sides[2], sides[0], sides[1]),
    ];
    Ok(ComparisonTriangle { sides, angles })
}

/// The comparison angle at p between q and r, from the three pairwise
/// distances. Defined only when q and r are both distinct from p.
pub fn comparison_angle(d_pq: f64, d_pr: f64, d_qr: f64) -> Result<f64, TriangleError> {
    if d_pq == 0.0 || d_pr == 0.0 {
        return Err(TriangleError::DegenerateApex);
    }
    check_triangle([d_pq, d_pr, d_qr])?;
    Ok(angle_opposite(d_qr, d_pq, d_pr))
}

fn check_triangle(sides: [f64; 3]) -> Result<(), TriangleError> {
    for &s in &sides {
        if !s.is_finite() || s < 0.0 {
            return Err(TriangleError::BadLength(s));
        }
    }
    let mut sorted = sides;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let longest = sorted[2];
    let other_sum = sorted[0] + sorted[1];
    if longest > other_sum + TRIANGLE_TOL * longest.max(1.0) {
        return Err(TriangleError::Inequality { longest, other_sum });
    }
    Ok(())
}

/// Angle opposite `opp` in a triangle with adjacent sides `s1`, `s2`.
fn angle_opposite(opp: f64, s1: f64, s2: f64) -> f64 {
    if s1 == 0.0 && s2 == 0.0 {
        // Point triangle: equilateral limit.
        FRAC_PI_3
    } else if s1 == 0.0 || s2 == 0.0 {
        // The triangle degenerates to a segment doubled at this corner.
        FRAC_PI_2
    } else {
        let cos = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
        cos.clamp(-1.0, 1.0).acos()
    }
}

/// Position of γ + γ' relative to π.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StraightenCase {
    AbovePi,
    BelowPi,
    /// |γ + γ' − π| < 1e-12.
    EqualPi,
}

impl std::fmt::Display for StraightenCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StraightenCase::AbovePi => "above",
            StraightenCase::BelowPi => "below",
            StraightenCase::EqualPi => "equality",
        };
        f.write_str(s)
    }
}

/// One comparison of the straightening report: `lhs` from the straightened
/// triangle against `rhs` from the glued pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleComparison {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl AngleComparison {
    /// Direction of the comparison under an absolute tolerance.
    pub fn relation(&self, tol: f64) -> Ordering {
        if (self.lhs - self.rhs).abs() <= tol {
            Ordering::Equal
        } else if self.lhs < self.rhs {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// The straightened triangle of a glued pair: side lengths, its angles and
/// the position of the marked point on the base.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Straightened {
    /// d(B̄, B̄') = d(B,C) + d(C,B').
    pub base: f64,
    pub bar_alpha: f64,
    pub bar_beta: f64,
    pub bar_beta_prime: f64,
    /// Distance from the apex to the marked point C̄ on the base.
    pub bar_shared: f64,
}

/// Report of [`alexandrov_straighten`].
#[derive(Clone, Debug, PartialEq)]
pub struct StraightenReport {
    /// Angles of the first triangle at (A, B, C).
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Angles of the second triangle at (A, B', C).
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub gamma_prime: f64,
    pub gamma_sum: f64,
    pub case: StraightenCase,
    /// Length of the shared side A–C.
    pub shared: f64,
    /// None when the straightened side lengths violate the triangle
    /// inequality, which happens for some pairs with γ + γ' < π.
    pub straightened: Option<Straightened>,
}

impl StraightenReport {
    /// The four comparisons (ᾱ vs α+α', β̄ vs β, β̄' vs β', d(Ā,C̄) vs
    /// d(A,C)), when the straightened triangle exists.
    pub fn comparisons(&self) -> Option<[AngleComparison; 4]> {
        let s = self.straightened.as_ref()?;
        Some([
            AngleComparison { name: "alpha", lhs: s.bar_alpha, rhs: self.alpha + self.alpha_prime },
            AngleComparison { name: "beta", lhs: s.bar_beta, rhs: self.beta },
            AngleComparison { name: "beta_prime", lhs: s.bar_beta_prime, rhs: self.beta_prime },
            AngleComparison { name: "shared_point", lhs: s.bar_shared, rhs: self.shared },
        ])
    }
}

/// Straightens two triangles glued along a common side A–C.
///
/// `first` holds the sides of triangle (A, B, C) as `[d(A,B), d(B,C),
/// d(A,C)]`; `second` holds (A, B', C) as `[d(A,B'), d(B',C), d(A,C)]` with
/// the same shared length. The straightened triangle has apex Ā, base
/// d(B̄,B̄') = d(B,C) + d(C,B'), and the marked point C̄ on the base with
/// d(B̄,C̄) = d(B,C).
pub fn alexandrov_straighten(
    first: [f64; 3],
    second: [f64; 3],
) -> Result<StraightenReport, TriangleError> {
    let t1 = comparison_triangle(first)?;
    let t2 = comparison_triangle(second)?;
    let shared = first[2];
    if (first[2] - second[2]).abs() > TRIANGLE_TOL * first[2].max(1.0) {
        return Err(TriangleError::SharedSideMismatch(first[2], second[2]));
    }

    // Angles at A, B, C: opposite sides are bc, ac, ab respectively.
    let (alpha, beta, gamma) = (t1.angles[1], t1.angles[2], t1.angles[0]);
    let (alpha_prime, beta_prime, gamma_prime) = (t2.angles[1], t2.angles[2], t2.angles[0]);
    let gamma_sum = gamma + gamma_prime;
    let case = if (gamma_sum - PI).abs() < 1e-12 {
        StraightenCase::EqualPi
    } else if gamma_sum > PI {
        StraightenCase::AbovePi
    } else {
        StraightenCase::BelowPi
    };

    let (ab, bc) = (first[0], first[1]);
    let (ab_prime, b_prime_c) = (second[0], second[1]);
    let base = bc + b_prime_c;
    let straightened = comparison_triangle([base, ab_prime, ab]).ok().map(|bar| {
        // bar.angles: [apex Ā (opposite base), B̄ (opposite ab'), B̄' (opposite ab)]
        let bar_alpha = bar.angles[0];
        let bar_beta = bar.angles[1];
        let bar_beta_prime = bar.angles[2];
        // Place B̄ at the origin and B̄' on the x-axis to locate Ā and C̄.
        let bar_shared = if base == 0.0 {
            ab
        } else {
            let x = (ab * ab + base * base - ab_prime * ab_prime) / (2.0 * base);
            let y2 = (ab * ab - x * x).max(0.0);
            let dx = x - bc;
            (dx * dx + y2).sqrt()
        };
        Straightened { base, bar_alpha, bar_beta, bar_beta_prime, bar_shared }
    });

    Ok(StraightenReport {
        alpha,
        beta,
        gamma,
        alpha_prime,
        beta_prime,
        gamma_prime,
        gamma_sum,
        case,
        shared,
        straightened,
    })
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AngleLimitError {
    #[error("no samples")]
    Empty,
    #[error("t values must be strictly decreasing and positive (sample {index})")]
    NotDecreasing { index: usize },
    #[error("chord {chord} exceeds 2t = {max} (sample {index})")]
    ChordTooLong { index: usize, chord: f64, max: f64 },
    #[error("comparison angles decrease with t by {violation} (beyond tolerance {tol}); input is not geodesic in a CAT(0) sense")]
    NonMonotone { violation: f64, tol: f64 },
}

/// Result of [`alexandrov_angle_limit`].
#[derive(Clone, Debug, PartialEq)]
pub struct AngleLimitReport {
    /// Extrapolated angle at t → 0.
    pub estimate: f64,
    /// 2·arcsin(d / 2t) per sample, in input order.
    pub angles: Vec<f64>,
    /// Largest observed increase of the angle as t decreases (0 when the
    /// monotonicity holds exactly).
    pub max_violation: f64,
}

/// Estimates the angle between two geodesics from chord samples.
///
/// `samples` holds pairs (t, d(c(t), c'(t))) with t strictly decreasing
/// towards 0. Comparison angles 2·arcsin(d/2t) must be non-decreasing in t;
/// a decrease beyond `monotone_tol` signals non-geodesic input and errors.
/// The limit at t → 0 is a Richardson-style polynomial extrapolation through
/// the last (smallest-t) samples.
pub fn alexandrov_angle_limit(
    samples: &[(f64, f64)],
    monotone_tol: f64,
) -> Result<AngleLimitReport, AngleLimitError> {
    if samples.is_empty() {
        return Err(AngleLimitError::Empty);
    }
    for (i, w) in samples.windows(2).enumerate() {
        if w[1].0 >= w[0].0 || w[1].0 <= 0.0 {
            return Err(AngleLimitError::NotDecreasing { index: i + 1 });
        }
    }
    if samples[0].0 <= 0.0 {
        return Err(AngleLimitError::NotDecreasing { index: 0 });
    }
    let mut angles = Vec::with_capacity(samples.len());
    for (i, &(t, d)) in samples.iter().enumerate() {
        let ratio = d / (2.0 * t);
        if ratio > 1.0 + 1e-12 {
            return Err(AngleLimitError::ChordTooLong { index: i, chord: d, max: 2.0 * t });
        }
        angles.push(2.0 * ratio.clamp(-1.0, 1.0).asin());
    }
    // Samples run towards t = 0, so angles must not increase along the list.
    let mut max_violation = 0.0f64;
    for w in angles.windows(2) {
        max_violation = max_violation.max(w[1] - w[0]);
    }
    if max_violation > monotone_tol {
        return Err(AngleLimitError::NonMonotone { violation: max_violation, tol: monotone_tol });
    }

    let tail = samples.len().min(3);
    let pts: Vec<(f64, f64)> = samples[samples.len() - tail..]
        .iter()
        .zip(&angles[angles.len() - tail..])
        .map(|(&(t, _), &a)| (t, a))
        .collect();
    let estimate = lagrange_at_zero(&pts);
    Ok(AngleLimitReport { estimate, angles, max_violation })
}

fn lagrange_at_zero(pts: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for (i, &(ti, yi)) in pts.iter().enumerate() {
        let mut weight = 1.0;
        for (j, &(tj, _)) in pts.iter().enumerate() {
            if i != j {
                weight *= (0.0 - tj) / (ti - tj);
            }
        }
        total += weight * yi;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_angles() {
        let t = comparison_triangle([3.0, 4.0, 5.0]).unwrap();
        assert!((t.angles[2] - FRAC_PI_2).abs() < 1e-12);
        assert!((t.angles.iter().sum::<f64>() - PI).abs() < 1e-12);
    }

    #[test]
    fn equilateral_angles() {
        let t = comparison_triangle([1.0, 1.0, 1.0]).unwrap();
        for a in t.angles {
            assert!((a - FRAC_PI_3).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_triangle_is_degenerate() {
        let t = comparison_triangle([1.0, 1.0, 2.0]).unwrap();
        assert!(t.angles[0].abs() < 1e-7);
        assert!(t.angles[1].abs() < 1e-7);
        assert!((t.angles[2] - PI).abs() < 1e-7);
    }

    #[test]
    fn violated_inequality_is_an_error() {
        assert!(matches!(
            comparison_triangle([1.0, 1.0, 2.1]),
            Err(TriangleError::Inequality { .. })
        ));
        // Within the 1e-12 relative band it is accepted as degenerate.
        assert!(comparison_triangle([1.0, 1.0, 2.0 + 1e-13]).is_ok());
    }

    #[test]
    fn comparison_angle_examples() {
        assert!((comparison_angle(1.0, 1.0, 2f64.sqrt()).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((comparison_angle(1.0, 1.0, 2.0).unwrap() - PI).abs() < 1e-12);
        // Oracle by coordinates: p at origin, q = (2, 0), r placed from the
        // side lengths (2, 3, 2).
        let (d_pq, d_pr, d_qr) = (2.0f64, 3.0, 2.0);
        let x = (d_pq * d_pq + d_pr * d_pr - d_qr * d_qr) / (2.0 * d_pq);
        let y = (d_pr * d_pr - x * x).sqrt();
        let oracle = y.atan2(x);
        assert!((comparison_angle(d_pq, d_pr, d_qr).unwrap() - oracle).abs() < 1e-12);
        assert!(matches!(
            comparison_angle(0.0, 1.0, 1.0),
            Err(TriangleError::DegenerateApex)
        ));
    }

    #[test]
    fn straighten_equality_case_is_all_equal() {
        // Two congruent right triangles glued along the leg A–C, γ = γ' = π/2.
        let sides = [2f64.sqrt(), 1.0, 1.0];
        let report = alexandrov_straighten(sides, sides).unwrap();
        assert_eq!(report.case, StraightenCase::EqualPi);
        let comparisons = report.comparisons().unwrap();
        for c in comparisons {
            assert!(
                (c.lhs - c.rhs).abs() < 1e-9,
                "{}: {} vs {}",
                c.name,
                c.lhs,
                c.rhs
            );
        }
    }

    #[test]
    fn straighten_rejects_mismatched_shared_side() {
        assert!(matches!(
            alexandrov_straighten([1.0, 1.0, 1.0], [1.0, 1.0, 1.5]),
            Err(TriangleError::SharedSideMismatch(..))
        ));
    }

    #[test]
    fn angle_limit_recovers_exact_planar_angle() {
        let phi = 1.1f64;
        let samples: Vec<(f64, f64)> = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&t| (t, 2.0 * t * (phi / 2.0).sin()))
            .collect();
        let report = alexandrov_angle_limit(&samples, 1e-9).unwrap();
        assert!((report.estimate - phi).abs() < 1e-12);
        assert_eq!(report.max_violation, 0.0);
    }

    #[test]
    fn angle_limit_tolerates_small_perturbations() {
        let phi = FRAC_PI_2;
        let samples: Vec<(f64, f64)> = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&t| (t, 2.0 * t * (phi / 2.0).sin() + 1e-6))
            .collect();
        let report = alexandrov_angle_limit(&samples, 1e-3).unwrap();
        assert!(
            (report.estimate - phi).abs() < 1e-4,
            "estimate {} vs {}",
            report.estimate,
            phi
        );
    }

    #[test]
    fn angle_limit_flags_superlinear_chords() {
        // Chord/2t ratios that grow as t shrinks: the comparison angle
        // decreases with t, which no geodesic pair allows.
        let samples = [(0.4, 2.0 * 0.4 * 0.3), (0.2, 2.0 * 0.2 * 0.4), (0.1, 2.0 * 0.1 * 0.5)];
        assert!(matches!(
            alexandrov_angle_limit(&samples, 1e-3),
            Err(AngleLimitError::NonMonotone { .. })
        ));
    }

    #[test]
    fn angle_limit_validates_input_shape() {
        assert!(matches!(
            alexandrov_angle_limit(&[], 1e-3),
            Err(AngleLimitError::Empty)
        ));
        assert!(matches!(
            alexandrov_angle_limit(&[(0.1, 0.05), (0.2, 0.05)], 1e-3),
            Err(AngleLimitError::NotDecreasing { .. })
        ));
        assert!(matches!(
            alexandrov_angle_limit(&[(0.1, 0.3)], 1e-3),
            Err(AngleLimitError::ChordTooLong { .. })
        ));
    }
}
