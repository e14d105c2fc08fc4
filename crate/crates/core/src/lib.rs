//! Wavefronts of Legendre submanifolds described by generating functions.
//!
//! A generating function `g(x_I, p_J)` in the standard contact space
//! `(x, p, z)` defines a Legendre submanifold `L` through
//! `p_I = ∂g/∂x_I`, `x_J = −∂g/∂p_J`, `z = p_J·x_J + g`. This crate computes
//! its e-wavefront `(x, z)` and m-wavefront `(p, p·x − z)`, the
//! quasi-Hessian metric, the cubic tensor and the canonical divergence;
//! finds and classifies m-wavefront singularities (cuspidal edge,
//! swallowtail, A3-type); and extracts sampled normal forms of the
//! multi-valued dual potential.
//!
//! Modules:
//!
//! - [`jets`]: truncated Taylor arithmetic through order 4.
//! - [`gfexpr`]: the expression language and its symbolic gradient.
//! - [`geometry`]: lifts, projections, metric, tensors, divergence.
//! - [`classify`]: singular-set search and point classification.
//! - [`normalform`]: adapted coordinates and normal-form sampling.
//! - [`affine`]: affine Legendre equivalences and re-partitioned charts.
//! - [`identities`]: randomized residual checks between the above.
//! - [`frontio`]: configuration, mesh export and the CLI jobs.
//!
//! Runnable walkthroughs live in `examples/`: `jets`, `parse_expression`,
//! `wavefronts`, `classify_singularities`, `normal_form`,
//! `divergence_identities` and `affine_equivalence`.
//!
//! ```
//! use emfront::{classify_point, GeneratingFunction, Tolerances, Classification};
//!
//! let g = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1])?;
//! let report = classify_point(&g, &[0.0, 0.3], &Tolerances::default())?;
//! assert_eq!(report.classification, Classification::CuspidalEdge);
//! # Ok::<(), emfront::Error>(())
//! ```

pub mod affine;
pub mod classify;
pub mod error;
pub mod frontio;
pub mod geometry;
pub mod gfexpr;
pub mod identities;
pub mod jets;
pub mod model;
pub mod normalform;
pub mod scalar;

pub use nalgebra;

pub use affine::{AffineChartModel, AffineLegendre};
pub use classify::{
    classify_point, classify_point_e, classify_window, find_singular_set, ChartWindow, Classification,
    SingularityReport, Tolerances,
};
pub use error::{Error, Result};
pub use geometry::{canonical_divergence, divergence_functional, lift, project_e, project_m, LiftedPoint};
pub use gfexpr::{GeneratingFunction, Partition};
pub use jets::{Jet, MultiIndex, MAX_ORDER};
pub use model::LocalModel;
pub use normalform::{extract_normal_form, Branch, NormalFormKind, NormalFormModel};
pub use scalar::Scalar;
