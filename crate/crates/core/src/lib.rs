//! Finite square 2-complexes.
//!
//! The crate models a complex as vertices, edges and unit Euclidean squares
//! glued along faces, and provides:
//!
//! - [`complex`] — the data model, the `.sqc` text format, validation,
//!   vertex links, Euler characteristic and combinatorial balls;
//! - [`curvature`] — link girth, nonpositive curvature, vertex/cell
//!   curvature, median-graph recognition and the CAT(0) verdict;
//! - [`collapse`] — free faces, elementary collapses, strategy-driven full
//!   collapse, spines, replayable collapse sequences and ball filtrations;
//! - [`geometry`] — comparison triangles, triangle straightening, angle
//!   limits, subdivision meshes of the piecewise-Euclidean realization,
//!   gallery unfolding and CAT(0)-inequality sampling;
//! - [`generate`] — deterministic generators for the test corpus.

pub mod collapse;
pub mod complex;
pub mod curvature;
pub mod generate;
pub mod geometry;

pub use collapse::{CollapseMode, CollapseSequence, Filtration, FreeFacePair, Strategy};
pub use complex::{
    EdgeId, LinkClass, LinkGraph, ParseError, SquareComplex, SquareId, ValidationReport, VertexId,
};
pub use curvature::{Cat0Verdict, CurvatureReport, ExactAngle, Girth};
pub use generate::GeneratorSpec;
pub use geometry::{Mesh, RemovalMask, SurfacePoint};
