//! Explicit Koppelman-type integral operators on singular complex plane curves.
//!
//! The crate models a unibranch plane curve `Z` through a polynomial
//! parametrization `τ ↦ π(τ)` with a single singular parameter at `τ = 0`
//! (the cusps `z₁ʳ = z₂ˢ` being the main family), and evaluates on it
//!
//! * the boundary representation operator `P` (holomorphic extension of
//!   strongly holomorphic functions),
//! * the area solution operator `K` for `∂̄u = φ` and its weighted variants
//!   `K_μ`, whose solutions vanish to high order at the singularity,
//! * the moment pairings that decide strong holomorphy on a cusp,
//!
//! together with the numerical checks (finite-difference `∂̄`, growth
//! profiles) used to verify the Koppelman identity `∂̄Kφ = φ`.
//!
//! Module map:
//!
//! | module        | contents                                              |
//! |---------------|-------------------------------------------------------|
//! | [`polyalg`]   | complex polynomials in one and two variables          |
//! | [`curve`]     | cusp and parametrized curves, semigroups, `ω`, pullback |
//! | [`forms`]     | symbolic functions and `(0,1)`-forms, the form grammar |
//! | [`quad`]      | circle/annulus rules, Gauss–Legendre, principal values |
//! | [`kernel`]    | Hefer quotients, the kernel `C`, weights, densities    |
//! | [`operators`] | `P`, `K_μ`, moment criterion, verification helpers     |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod forms;
pub mod kernel;
pub mod operators;
pub mod polyalg;
pub mod quad;

pub use num_complex::Complex64;

pub use curve::{
    canonical_weight, make_curve, pullback, semigroup, Curve, CurveKind, CurveSpec, CuspCurve, ParamCurve,
    SemigroupInfo,
};
pub use error::{Error, Result};
pub use forms::{parse_expr, Envelope, FormDegree, FormSupport, MonomialFormSum, RadialBump, Term};
pub use kernel::{KernelContext, RegularPart};
pub use operators::{
    dbar_fd, growth_profile, moment_check, represent_boundary, represent_boundary_fn, solve_area, verify_koppelman,
    GrowthFit, KoppelmanPoint, KoppelmanReport, MomentConfig, MomentEntry, MomentReport, Resolution, SolveOptions,
    SolveReport, TransformRoute,
};
pub use polyalg::{BiPoly, UniPoly};
pub use quad::{integrate_annulus, integrate_circle, pv_limit, AnnulusRule, CircleRule, PVConfig, PvOutcome};

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parses a complex literal of the form `a+bi`, `a-bi`, `a`, `bi` or `i`.
///
/// Whitespace is ignored. This is the format used for complex values on the
/// command line and in CSV-adjacent text.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    forms::parse_complex_literal(text)
}
