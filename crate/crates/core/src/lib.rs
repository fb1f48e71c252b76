//! Gaussian integral means of entire functions.
//!
//! For an entire `f`, `p > 0` and a real `alpha`, the Gaussian integral mean
//!
//! ```text
//! M_{p,α}(f, r) = ∫_{|z|≤r} |f|^p e^{-α|z|²} dA / ∫_{|z|≤r} e^{-α|z|²} dA
//! ```
//!
//! equals `h(x) / φ(x)` with `x = r²`, `h(x) = ∫₀ˣ M(t) e^{-αt} dt`,
//! `M(x) = ∫₀^{2π} |f(√x e^{iθ})|^p dθ` and `φ(x) = (1 - e^{-αx}) / α`.
//!
//! The crate evaluates these quantities, the `D` operator that decides
//! convexity of `ln F` in `ln x`, the explicit sufficient conditions for
//! log-convexity (`alpha < 0`) and log-concavity (`alpha >= 0`), and a set of
//! property suites that check every intermediate inequality against
//! brute-force evaluations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexity;
pub mod entire;
pub mod error;
pub mod integral_means;
pub mod quadrature;
pub mod special_fn;
pub mod tolerance;
pub mod verification;

pub use convexity::{
    check_corollary1, check_corollary2, check_corollary3, check_theorem1, check_theorem1_below_x0,
    check_theorem2, check_theorem3, corollary1_radius, d_of_phi, d_operator, delta_both_ways,
    loglog_second_difference, theorem2_bound, y0_threshold, Abscissa, CheckOptions, Criterion,
    CriterionReport, CurvatureReport, DeltaComparison, FunctionJet, Shape, SlopeFunction, Verdict,
    Witness,
};
pub use entire::EntireFunction;
pub use error::{Error, Result};
pub use integral_means::{
    accumulate_h, circle_mean, circle_mean_value, monomial_mean_closed_form, radial_mean_profile,
    CircleMean, GeometricGrid, MeanParams, MeanProfile, ProfileRow,
};
pub use special_fn::{
    aux_abcs, aux_g, lower_incomplete_gamma, phi, solve_t0, solve_t0_in, t0, x0_of_alpha,
    AuxiliaryBundle, GFunctions, GaussianWeight, RootResult,
};
pub use verification::{
    d2, d2_minimum, default_y_grid, minimize_d2, small_root, verify_d3_bounds, verify_d_chain,
    verify_delta_boundary, verify_lemma4, verify_lemma5, y_star, D2Minimum, DeltaForm, GridSpec,
    SuiteFailure, SuiteReport, SuiteStatus,
};

pub use num_complex::Complex64;
