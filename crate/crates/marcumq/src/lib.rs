//! Numerical toolkit for the first-order Marcum Q-function `Q₁(a, b)` and an
//! exponential-type approximation of it,
//!
//! ```text
//! Q̃₁(a, b) = exp(−e^ν · b^μ),
//! ```
//!
//! whose two parameters `(ν, μ)` depend on `a` only. The crate provides:
//!
//! - [`special`]: reference evaluators — modified Bessel functions `Iₙ`,
//!   the lower incomplete gamma function `γ(s, x)`, a series evaluation of
//!   `Q₁`, and an independent adaptive-quadrature evaluation of the defining
//!   integral used as a cross-check oracle.
//! - [`approx`]: the approximation `Q̃₁`, the closed-form small-`a`
//!   parameterization, polynomial parameter evaluation, and the continuous /
//!   discretized squared-error functionals `ℰ` and `Ê`.
//! - [`calibrate`]: per-`a` minimization of `Ê` (derivative-free line search)
//!   and ordinary-least-squares polynomial regression of the fitted
//!   parameters over `a`.
//! - [`connectivity`]: an application to pair connectivity under Rician
//!   fading — the power CCDF, the connection probability `H(r)`, and the
//!   connection-mass integral `∫ r·H(r) dr` in closed form and by quadrature.
//!
//! All functions are pure: no global state, no interior mutability, no
//! randomness. Results are deterministic across runs and safe to compute
//! concurrently from any number of threads.

pub mod approx;
pub mod calibrate;
pub mod connectivity;
pub mod error;
mod quad;
pub mod special;

pub use approx::{
    analytic_params_small_a, continuous_error, default_mu_poly, default_nu_poly, discrete_error,
    eval_poly_params, q_tilde, ApproxParams, PolyCoeffs,
};
pub use calibrate::{
    fit_grid, fit_single, regress_poly, FitConfig, FitResult, InitStrategy, RegressionResult,
};
pub use connectivity::{
    connection_mass_closed_form, connection_mass_numeric, pair_connectivity, rician_power_ccdf,
    ConnectivityMethod, MassIntegrand, Scenario,
};
pub use error::{Error, Result};
pub use special::{bessel_i, lower_incomplete_gamma, marcum_q1, marcum_q1_quadrature};
