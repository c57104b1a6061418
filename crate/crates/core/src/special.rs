//! Scalar building blocks: rising factorials, the Gauss hypergeometric
//! function ₂F₁ on the non-positive real axis, and the shared series control
//! and result types used by every truncated series in the crate.

use serde::Serialize;

use crate::error::{Error, Result};

/// Below this magnitude of `z` the ₂F₁ power series is summed directly.
const DIRECT_SERIES_LIMIT: f64 = 0.5;

/// Below `-PFAFF_LIMIT` the Pfaff argument `z/(z-1)` exceeds 2/3 and the
/// inverse-argument connection formula is preferred.
const PFAFF_LIMIT: f64 = 2.0;

/// Largest tolerated ratio `Σ|term| / |sum|` before an alternative route
/// is tried.
const CANCELLATION_LIMIT: f64 = 100.0;

/// `b - a` closer than this to an integer makes the inverse-argument
/// formula degenerate (its gamma prefactors blow up and cancel).
const INTEGER_GAP: f64 = 1e-3;

/// Stopping knobs shared by every truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesControl {
    /// Relative tolerance on the size of the latest increment.
    pub rel_tol: f64,
    /// Hard cap on the number of terms (or anti-diagonals, for double series).
    pub max_terms: usize,
    /// Number of successive increments that must pass before stopping.
    pub consecutive_passes: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            max_terms: 10_000,
            consecutive_passes: 2,
        }
    }
}

impl SeriesControl {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidControl(format!(
                "rel_tol must satisfy 0 < rel_tol < 1, got {}",
                self.rel_tol
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidControl("max_terms must be >= 1".into()));
        }
        if self.consecutive_passes == 0 {
            return Err(Error::InvalidControl(
                "consecutive_passes must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Tolerance threshold relative to `reference`, floored at the smallest
    /// normal magnitude so that an exactly-zero sum can still pass.
    #[inline]
    pub fn threshold(&self, reference: f64) -> f64 {
        self.rel_tol * reference.abs().max(f64::MIN_POSITIVE)
    }
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Series,
    Pfaff,
    /// ₂F₁ via the `z -> 1/z` connection formula, for large negative `z`.
    InverseArgument,
    FiniteSum,
    ClosedForm,
    Quadrature,
    DoubleSeries,
    Recurrence,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Pfaff => "pfaff",
            Method::InverseArgument => "inverse-argument",
            Method::FiniteSum => "finite-sum",
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::DoubleSeries => "double-series",
            Method::Recurrence => "recurrence",
        }
    }
}

/// A computed value together with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    pub terms_used: usize,
    /// Absolute error estimate; for series this is the last increment.
    pub est_error: f64,
    pub converged: bool,
    pub method: Method,
}

impl EvalResult {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            terms_used: 1,
            est_error: 0.0,
            converged: true,
            method,
        }
    }

    /// Promote a non-converged result to [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value,
                terms_used: self.terms_used,
                est_error: self.est_error,
            })
        }
    }

    /// Multiply value and error estimate by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            est_error: self.est_error * factor.abs(),
            ..self
        }
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Counts consecutive increments that fall under the tolerance.
#[derive(Debug, Clone)]
pub(crate) struct StopRule {
    ctl: SeriesControl,
    passes: usize,
}

impl StopRule {
    pub(crate) fn new(ctl: SeriesControl) -> Self {
        Self { ctl, passes: 0 }
    }

    /// Record one increment; returns true once enough successive increments
    /// have satisfied `|increment| <= rel_tol * |sum|`.
    pub(crate) fn update(&mut self, increment: f64, sum: f64) -> bool {
        if increment.abs() <= self.ctl.threshold(sum) {
            self.passes += 1;
        } else {
            self.passes = 0;
        }
        self.passes >= self.ctl.consecutive_passes
    }
}

/// Rising factorial `(alpha)_k = alpha (alpha+1) ... (alpha+k-1)`.
///
/// Evaluated as a left-to-right product so that
/// `pochhammer(a, k + 1) == pochhammer(a, k) * (a + k)` holds bit for bit.
/// Overflows to infinity rather than panicking.
pub fn pochhammer(alpha: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (alpha + i as f64))
}

pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gauss hypergeometric function ₂F₁(α, β; γ; z) for real parameters and
/// `z <= 0`.
///
/// * `-0.5 < z <= 0`: direct power series.
/// * `-2 <= z <= -0.5`: Pfaff transformation
///   `(1-z)^(-α) ₂F₁(α, γ-β; γ; z/(z-1))`, transformed argument in `[1/3, 2/3]`.
/// * `z < -2`: the `1/z` connection formula when `β - α` is not an integer,
///   Pfaff otherwise.
///
/// Large `α` makes the direct and `1/z` series alternate with huge terms.
/// When a route loses more than two digits to cancellation the Pfaff form,
/// whose terms do not alternate for `α > 0` and `γ > β`, is also evaluated
/// and the result with the smaller error bound is returned.
///
/// Running out of terms is reported through `converged == false`.
pub fn hyp2f1(
    alpha: f64,
    beta: f64,
    gamma: f64,
    z: f64,
    ctl: &SeriesControl,
) -> Result<EvalResult> {
    ctl.validate()?;
    if [alpha, beta, gamma, z].iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "hyp2f1 arguments must be finite (alpha={alpha}, beta={beta}, gamma={gamma}, z={z})"
        )));
    }
    if is_nonpositive_integer(gamma) {
        return Err(Error::Domain(format!(
            "hyp2f1: gamma must not be a non-positive integer, got {gamma}"
        )));
    }
    if z > 0.0 {
        return Err(Error::Domain(format!("hyp2f1: requires z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(EvalResult::exact(1.0, Method::Series));
    }
    let diff = beta - alpha;
    let first = if z > -DIRECT_SERIES_LIMIT {
        power_series(alpha, beta, gamma, z, ctl)
    } else if z < -PFAFF_LIMIT && (diff - diff.round()).abs() > INTEGER_GAP {
        inverse_argument(alpha, beta, gamma, z, ctl)
    } else {
        return Ok(pfaff(alpha, beta, gamma, z, ctl).result);
    };
    if first.condition() <= CANCELLATION_LIMIT {
        return Ok(first.result);
    }
    let fallback = pfaff(alpha, beta, gamma, z, ctl);
    Ok(if fallback.error_bound() < first.error_bound() {
        fallback.result
    } else {
        first.result
    })
}

/// A series result together with `Σ|term|`, which bounds the rounding error.
#[derive(Debug, Clone, Copy)]
struct Summed {
    result: EvalResult,
    magnitude: f64,
}

impl Summed {
    fn condition(&self) -> f64 {
        self.magnitude / self.result.value.abs()
    }

    fn error_bound(&self) -> f64 {
        let bound = self.result.est_error + f64::EPSILON * self.magnitude;
        if bound.is_nan() {
            f64::INFINITY
        } else {
            bound
        }
    }

    fn scaled(self, factor: f64) -> Self {
        Self {
            result: self.result.scaled(factor),
            magnitude: self.magnitude * factor.abs(),
        }
    }
}

/// Σ (α)_k (β)_k / ((γ)_k k!) z^k with compensated accumulation. `z` may be
/// of either sign here; callers keep `|z| < 1`.
fn power_series(alpha: f64, beta: f64, gamma: f64, z: f64, ctl: &SeriesControl) -> Summed {
    let mut acc = CompensatedSum::new();
    let mut magnitude = 1.0;
    let mut stop = StopRule::new(*ctl);
    let mut term = 1.0;
    acc.add(term);
    let mut terms_used = 1;
    let mut converged = false;

    while !converged && terms_used < ctl.max_terms {
        let k = (terms_used - 1) as f64;
        term *= (alpha + k) * (beta + k) / ((gamma + k) * (k + 1.0)) * z;
        acc.add(term);
        magnitude += term.abs();
        terms_used += 1;
        converged = stop.update(term, acc.value());
    }

    Summed {
        result: EvalResult {
            value: acc.value(),
            terms_used,
            est_error: term.abs(),
            converged,
            method: Method::Series,
        },
        magnitude,
    }
}

fn pfaff(alpha: f64, beta: f64, gamma: f64, z: f64, ctl: &SeriesControl) -> Summed {
    let w = z / (z - 1.0);
    let prefactor = (1.0 - z).powf(-alpha);
    let mut s = power_series(alpha, gamma - beta, gamma, w, ctl).scaled(prefactor);
    s.result = s.result.with_method(Method::Pfaff);
    s
}

/// Γ(num₀)Γ(num₁)… / (Γ(den₀)Γ(den₁)…) · exp(log_scale), evaluated in log
/// space. A pole in the denominator makes the whole ratio zero.
fn gamma_ratio(num: &[f64], den: &[f64], log_scale: f64) -> f64 {
    if den.iter().any(|&d| is_nonpositive_integer(d)) {
        return 0.0;
    }
    let mut log = log_scale;
    let mut sign = 1.0;
    for &x in num {
        let (lg, s) = libm::lgamma_r(x);
        log += lg;
        sign *= s as f64;
    }
    for &x in den {
        let (lg, s) = libm::lgamma_r(x);
        log -= lg;
        sign *= s as f64;
    }
    sign * log.exp()
}

fn inverse_argument(alpha: f64, beta: f64, gamma: f64, z: f64, ctl: &SeriesControl) -> Summed {
    let u = 1.0 / z;
    let log_mz = (-z).ln();

    let c1 = gamma_ratio(
        &[gamma, beta - alpha],
        &[beta, gamma - alpha],
        -alpha * log_mz,
    );
    let c2 = gamma_ratio(
        &[gamma, alpha - beta],
        &[alpha, gamma - beta],
        -beta * log_mz,
    );

    let f1 = power_series(alpha, alpha - gamma + 1.0, alpha - beta + 1.0, u, ctl);
    let f2 = power_series(beta, beta - gamma + 1.0, beta - alpha + 1.0, u, ctl);

    let magnitude = c1.abs() * f1.magnitude + c2.abs() * f2.magnitude;
    let (f1, f2) = (f1.result, f2.result);
    let value = c1 * f1.value + c2 * f2.value;
    let est_error = c1.abs() * f1.est_error + c2.abs() * f2.est_error;
    Summed {
        result: EvalResult {
            value,
            terms_used: f1.terms_used.max(f2.terms_used),
            est_error,
            converged: f1.converged && f2.converged && est_error <= ctl.threshold(value),
            method: Method::InverseArgument,
        },
        magnitude,
    }
}
