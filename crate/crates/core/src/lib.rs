//! Finite-range verification of the zeros of the Riemann zeta function.
//!
//! The pipeline enumerates critical-line zeros γ_1 < γ_2 < … by scanning the
//! Riemann–Siegel Z function for sign changes, measures each zero's
//! multiplicity with shrinking circles, counts every zero inside the
//! rectangles bounded by midpoints between consecutive ordinates using the
//! argument principle, and folds the comparison into the index function g(n)
//! whose non-zero values mark rectangles holding zeros off the line.
//!
//! Modules, bottom-up:
//!
//! - [`special`]: ζ, log Γ, ψ, ξ and ξ'/ξ.
//! - [`riemann_siegel`]: θ(t) and Z(t).
//! - [`zeros`]: sign-change scan, bisection and the increasing enumeration.
//! - [`contour`]: winding counts over circles and rectangles.
//! - [`decider`]: g(n), per-rectangle records and the run verdict.
//! - [`report`]: run configuration, zero cache, reports and plot data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod contour;
pub mod decider;
pub mod quadrature;
pub mod report;
pub mod riemann_siegel;
pub mod special;
pub mod target;
pub mod zeros;

/// A point or value in the complex plane.
pub type ComplexValue = num_complex::Complex64;

pub use contour::{
    CircleContour, ContourCount, ContourCounter, ContourError, QuadPolicy, RectangleContour,
    WindingResult,
};
pub use decider::{g_step, off_line_index_set, verify_range, Verdict, VerificationRun};
pub use special::{EvalAccuracy, SpecialError};
pub use target::{CompletedZeta, PlantedZero, XiTarget};
pub use zeros::{enumerate_zeros, CriticalZero, EnumeratorConfig, ZeroBracket};
