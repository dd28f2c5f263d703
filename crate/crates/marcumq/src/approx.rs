//! The exponential-type approximation
//!
//! ```text
//! Q̃₁(a, b) = exp(−e^{ν(a)} · b^{μ(a)})
//! ```
//!
//! of the first-order Marcum Q-function, together with the two error
//! functionals that drive calibration:
//!
//! ```text
//! ℰ(a)  = ∫₀^∞ (Q₁(a,b) − Q̃₁(a,b))² db            (continuous)
//! Ê(a)  = δ · Σ_{β=0}^{⌊b_max/δ⌋} (Q₁(a,δβ) − Q̃₁(a,δβ))²   (discrete)
//! ```
//!
//! Two parameterizations of (ν, μ) are provided: a closed-form small-`a`
//! expansion that is exact at `a = 0`, and degree-4 polynomial evaluation
//! against caller-supplied (or bundled reference) coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::special;

/// Parameter pair (ν, μ) of the exponential approximation
/// `Q̃₁(b) = exp(−e^ν b^μ)`.
///
/// Valid parameters have finite ν with `e^ν` representable, and `μ > 0`
/// (required so that `Q̃₁(0) = 1` and the function decays in `b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    /// Exponent offset ν; the scale factor is λ = e^ν.
    pub nu: f64,
    /// Exponent power μ > 0.
    pub mu: f64,
}

impl ApproxParams {
    /// Validated constructor.
    pub fn new(nu: f64, mu: f64) -> Result<Self> {
        let p = ApproxParams { nu, mu };
        p.validate()?;
        Ok(p)
    }

    /// Checks the type invariants: `μ > 0`, ν finite, `e^ν` finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Domain(format!(
                "ApproxParams requires mu > 0, got mu={}",
                self.mu
            )));
        }
        if !self.nu.is_finite() || !self.nu.exp().is_finite() {
            return Err(Error::Domain(format!(
                "ApproxParams requires finite nu with finite e^nu, got nu={}",
                self.nu
            )));
        }
        Ok(())
    }
}

/// Dense polynomial with coefficients in ascending order
/// (`c₀ + c₁ a + … + c_m a^m`), evaluated in nested (Horner) form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    coeffs: Vec<f64>,
}

impl PolyCoeffs {
    /// Builds a polynomial from ascending coefficients `c₀ … c_m`.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] if the vector is empty or contains non-finite
    /// values.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain(
                "PolyCoeffs requires at least one coefficient".to_string(),
            ));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!(
                "PolyCoeffs requires finite coefficients, got {bad}"
            )));
        }
        Ok(PolyCoeffs { coeffs })
    }

    /// Polynomial degree `m` (one less than the coefficient count).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Ascending coefficients `c₀ … c_m`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluates the polynomial at `x` by nested multiplication.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Bundled reference coefficients for μ(a), ascending degree-4 form.
///
/// These are published values printed at 3-decimal precision; they are kept
/// verbatim so results line up with the tabulated reference data, and that
/// print precision bounds how closely anything derived from them can be
/// reproduced.
pub fn default_mu_poly() -> PolyCoeffs {
    PolyCoeffs::new(vec![2.174, -0.592, 0.593, -0.092, 0.005]).expect("static coefficients")
}

/// Bundled reference coefficients for ν(a), ascending degree-4 form.
///
/// Same published-value status and precision caveat as [`default_mu_poly`].
pub fn default_nu_poly() -> PolyCoeffs {
    PolyCoeffs::new(vec![-0.840, 0.327, -0.740, 0.083, -0.004]).expect("static coefficients")
}

/// Raw evaluation of `exp(−e^ν b^μ)` for `b > 0`, `1` at `b = 0`.
///
/// The exponent is assembled in log form, `e^ν b^μ = exp(ν + μ ln b)`, which
/// cannot produce NaN for finite ν, μ and positive finite `b` — extreme
/// parameters saturate cleanly to 0 or 1. Shared by [`q_tilde`],
/// [`discrete_error`], and the calibration objective so every consumer
/// evaluates the identical expression.
pub(crate) fn q_tilde_raw(nu: f64, mu: f64, b: f64) -> f64 {
    if b == 0.0 {
        1.0
    } else {
        (-(nu + mu * b.ln()).exp()).exp()
    }
}

/// The exponential-type approximation `Q̃₁(b) = exp(−e^ν b^μ)`.
///
/// Returns exactly 1 at `b = 0` and is strictly decreasing in `b`; the range
/// is (0, 1].
///
/// # Errors
///
/// [`Error::Domain`] for `b < 0` (or NaN) and for invalid parameters.
pub fn q_tilde(params: ApproxParams, b: f64) -> Result<f64> {
    params.validate()?;
    if !(b >= 0.0) {
        return Err(Error::Domain(format!("q_tilde requires b >= 0, got {b}")));
    }
    Ok(q_tilde_raw(params.nu, params.mu, b))
}

/// Closed-form small-`a` parameterization
///
/// ```text
/// μ(a) = 2 + 9 a⁴ / (8 (9π² − 80))
/// ν(a) = −ln 2 − a²/2 + (45π² + 72 ln 2 + 36 C − 496) a⁴ / (64 (9π² − 80))
/// ```
///
/// where `C ≈ 0.5772` is the Euler–Mascheroni constant. At `a = 0` this
/// returns `{ν: −ln 2, μ: 2}` exactly, for which the approximation equals
/// `Q₁(0, b) = exp(−b²/2)` identically. Intended for `a ≪ 1`; no upper
/// cutoff is enforced.
///
/// # Errors
///
/// [`Error::Domain`] for `a < 0` (or NaN).
pub fn analytic_params_small_a(a: f64) -> Result<ApproxParams> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!(
            "analytic_params_small_a requires a >= 0, got {a}"
        )));
    }
    /// Euler–Mascheroni constant C.
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let denom = 9.0 * pi2 - 80.0;
    let a2 = a * a;
    let a4 = a2 * a2;
    let mu = 2.0 + 9.0 * a4 / (8.0 * denom);
    let nu = -std::f64::consts::LN_2 - 0.5 * a2
        + (45.0 * pi2 + 72.0 * std::f64::consts::LN_2 + 36.0 * EULER_GAMMA - 496.0) * a4
            / (64.0 * denom);
    Ok(ApproxParams { nu, mu })
}

/// Evaluates the μ- and ν-polynomials at `a` (Horner form) and returns the
/// resulting parameter pair.
///
/// # Errors
///
/// [`Error::Domain`] for `a < 0` (or NaN).
pub fn eval_poly_params(mu_poly: &PolyCoeffs, nu_poly: &PolyCoeffs, a: f64) -> Result<ApproxParams> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!(
            "eval_poly_params requires a >= 0, got {a}"
        )));
    }
    Ok(ApproxParams {
        nu: nu_poly.eval(a),
        mu: mu_poly.eval(a),
    })
}

/// Threshold both `Q₁(a, b_max)` and `Q̃₁(b_max)` must be under for the
/// truncation of the continuous error integral to be sound.
const TAIL_NEGLIGIBLE: f64 = 1e-12;

/// Continuous approximation error
/// `ℰ = ∫₀^{b_max} (Q₁(a,b) − Q̃₁(a,b))² db`, evaluated by adaptive
/// quadrature to absolute accuracy `tol`.
///
/// The integral is a controlled truncation of the ideal upper limit ∞: the
/// precondition — checked at runtime — is that both `Q₁(a, b_max)` and
/// `Q̃₁(b_max)` are below 1e-12, so the discarded tail of the squared
/// difference is negligible at every supported tolerance.
///
/// # Errors
///
/// [`Error::Domain`] for `a < 0`, invalid params, or nonpositive
/// `b_max`/`tol`; [`Error::Precondition`] when the tail check fails;
/// [`Error::Convergence`] if quadrature cannot reach `tol`.
pub fn continuous_error(a: f64, params: ApproxParams, b_max: f64, tol: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!(
            "continuous_error requires a >= 0, got {a}"
        )));
    }
    params.validate()?;
    if !(b_max > 0.0 && b_max.is_finite()) {
        return Err(Error::Domain(format!(
            "continuous_error requires b_max > 0, got {b_max}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!(
            "continuous_error requires tol > 0, got {tol}"
        )));
    }
    // Tail check doubles as a pre-flight of the Q₁ series for this `a`, so
    // the closure below cannot fail.
    let q_tail = special::marcum_q1(a, b_max)?;
    let approx_tail = q_tilde_raw(params.nu, params.mu, b_max);
    if q_tail >= TAIL_NEGLIGIBLE || approx_tail >= TAIL_NEGLIGIBLE {
        return Err(Error::Precondition(format!(
            "tail not negligible at b_max={b_max}: Q1={q_tail:.3e}, approximation={approx_tail:.3e} \
             (both must be < {TAIL_NEGLIGIBLE:.0e})"
        )));
    }
    let integrand = |b: f64| {
        let q = special::marcum_q1(a, b).expect("pre-flighted at b_max for the same a");
        let d = q - q_tilde_raw(params.nu, params.mu, b);
        d * d
    };
    let out = quad::integrate(integrand, 0.0, b_max, tol, 4000)?;
    Ok(out.value.max(0.0))
}

/// Discrete approximation error
/// `Ê = δ · Σ_{β=0}^{⌊b_max/δ⌋} (Q₁(a, δβ) − Q̃₁(a, δβ))²`.
///
/// Grid points are formed as exact products `δ·β` (no running accumulation),
/// the count `⌊b_max/δ⌋` carries a 1e-9 guard against the quotient landing
/// an ulp under an integer, and terms are accumulated with compensated
/// summation. The `β = 0` term is identically zero since both functions
/// equal 1 there. Converges to [`continuous_error`] as `δ → 0`.
///
/// # Errors
///
/// [`Error::Domain`] for `a < 0`, invalid params, or nonpositive
/// `delta`/`b_max`.
pub fn discrete_error(a: f64, params: ApproxParams, delta: f64, b_max: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!(
            "discrete_error requires a >= 0, got {a}"
        )));
    }
    params.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "discrete_error requires delta > 0, got {delta}"
        )));
    }
    if !(b_max > 0.0 && b_max.is_finite()) {
        return Err(Error::Domain(format!(
            "discrete_error requires b_max > 0, got {b_max}"
        )));
    }
    let steps = (b_max / delta + 1e-9).floor() as u64;
    let mut acc = quad::NeumaierSum::default();
    for beta in 1..=steps {
        let b = delta * beta as f64;
        let d = special::marcum_q1(a, b)? - q_tilde_raw(params.nu, params.mu, b);
        acc.add(d * d);
    }
    Ok(delta * acc.value())
}
