//! The generalized Hubbell rectangular source integral
//!
//! ```text
//! H[a,b,p,λ; α,β,γ] = (σa/4π) ∫₀^b x^λ (x²+p)^(-α) ₂F₁(α, β; γ; -a²/(x²+p)) dx
//! ```
//!
//! and its classical special cases: the plaque integral `I(a,b)` (p = 1,
//! λ = 0, (α,β,γ) = (1,½,3/2)) and the detector response `h(a,b) = 4π I / σ`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::appell::f2_finite_sum;
use crate::error::{Error, Result};
use crate::special::{hyp2f1, CompensatedSum, EvalResult, Method, SeriesControl, StopRule};

/// Full parameter tuple of the generalized integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HubbellParams {
    /// Width over height, `w/h`.
    pub a: f64,
    /// Length over height, `l/h`.
    pub b: f64,
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Source strength per unit area.
    pub sigma: f64,
}

impl HubbellParams {
    /// Parameters with σ = 1.
    pub fn new(a: f64, b: f64, p: f64, lambda: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            a,
            b,
            p,
            lambda,
            alpha,
            beta,
            gamma,
            sigma: 1.0,
        }
    }

    /// The plaque case `H[a,b,p,0; 1,½,3/2]`.
    pub fn classical(a: f64, b: f64, p: f64) -> Self {
        Self::new(a, b, p, 0.0, 1.0, 0.5, 1.5)
    }

    /// The `H[a,b,p,1; ½,½,1]` case that has a closed form.
    pub fn half(a: f64, b: f64, p: f64) -> Self {
        Self::new(a, b, p, 1.0, 0.5, 0.5, 1.0)
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        Self { sigma, ..self }
    }

    pub fn is_classical(&self) -> bool {
        (self.lambda, self.alpha, self.beta, self.gamma) == (0.0, 1.0, 0.5, 1.5)
    }

    pub fn is_half(&self) -> bool {
        (self.lambda, self.alpha, self.beta, self.gamma) == (1.0, 0.5, 0.5, 1.0)
    }

    /// Checks the convergence conditions of the defining integral. The error
    /// message names the violated constraint.
    ///
    /// Only `lambda > -1` is required of the exponent: the upper bound
    /// `lambda < 2*alpha - 1` matters for an infinitely long source, which
    /// this crate does not evaluate.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("p", self.p),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("sigma", self.sigma),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "{name} must be finite, got {v}"
            )));
        }
        check_positive(self.a, self.b, self.p)?;
        if self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "constraint gamma > beta > 0 violated: beta = {}",
                self.beta
            )));
        }
        if self.gamma <= self.beta {
            return Err(Error::InvalidParams(format!(
                "constraint gamma > beta > 0 violated: gamma = {}, beta = {}",
                self.gamma, self.beta
            )));
        }
        if self.lambda <= -1.0 {
            return Err(Error::InvalidParams(format!(
                "constraint lambda > -1 violated: lambda = {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

fn check_positive(a: f64, b: f64, p: f64) -> Result<()> {
    for (name, v) in [("a", a), ("b", b), ("p", p)] {
        if v <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "constraint {name} > 0 violated: {name} = {v}"
            )));
        }
    }
    Ok(())
}

/// The plaque geometry is conventionally stated with `a <= b`; the integral
/// itself does not need it.
pub fn plaque_ordering_warning(a: f64, b: f64) -> Option<String> {
    (a > b).then(|| {
        format!("a = {a} exceeds b = {b}; plaque integrals are usually quoted with a <= b")
    })
}

/// `H[a,b,p,λ; α,β,γ]` by the adaptive finite ₂F₁ sum times the prefactor
/// `(σa/4π) · b^(λ+1) / ((λ+1) p^α)`.
pub fn eval_h_general(params: &HubbellParams, ctl: &SeriesControl) -> Result<EvalResult> {
    params.validate()?;
    let HubbellParams {
        a,
        b,
        p,
        lambda,
        alpha,
        beta,
        gamma,
        sigma,
    } = *params;
    let prefactor =
        sigma * a / (4.0 * PI) * b.powf(lambda + 1.0) / ((lambda + 1.0) * p.powf(alpha));
    let sum = f2_finite_sum(alpha, beta, gamma, lambda, a, b, p, ctl)?;
    Ok(sum.scaled(prefactor))
}

/// `H[a,b,p,0; 1,½,3/2] = (σab/4πp) Σ k!/(3/2)_k (b²/p)^k (1+b²/p)^(-1-k) ₂F₁(k+1, ½; 3/2; -a²/(p+b²))`.
pub fn eval_h_lambda0(
    a: f64,
    b: f64,
    p: f64,
    sigma: f64,
    ctl: &SeriesControl,
) -> Result<EvalResult> {
    HubbellParams::classical(a, b, p)
        .with_sigma(sigma)
        .validate()?;
    let sum = f2_finite_sum(1.0, 0.5, 1.5, 0.0, a, b, p, ctl)?;
    Ok(sum.scaled(sigma * a * b / (4.0 * PI * p)))
}

/// Closed form of `H[a,b,p,1; ½,½,1]`:
///
/// ```text
/// (σ a √p / 4π) [ √(1+b²/p) ₂F₁(-½,½;1;-a²/(p+b²)) - ₂F₁(-½,½;1;-a²/p) ]
/// ```
///
/// The bracket is a small difference of two numbers near 1. When both
/// arguments are in the power-series range it is regrouped as
/// `(√(1+q)-1) F(z₁) + [F(z₁) - F(z₀)]` with the second part summed termwise.
pub fn eval_h_closed_half(
    a: f64,
    b: f64,
    p: f64,
    sigma: f64,
    ctl: &SeriesControl,
) -> Result<EvalResult> {
    HubbellParams::half(a, b, p).with_sigma(sigma).validate()?;
    let a2 = a * a;
    let q = b * b / p;
    let z1 = -a2 / (p + b * b);
    let z0 = -a2 / p;
    let far = hyp2f1(-0.5, 0.5, 1.0, z1, ctl)?;
    let stretch = (1.0 + q).sqrt();
    let prefactor = sigma * a * p.sqrt() / (4.0 * PI);

    let (bracket, err, terms, converged) = if z0 >= -0.5 {
        let delta = a2 * q / (p + b * b);
        let diff = half_difference(z1, z0, delta, ctl);
        let excess = q / (stretch + 1.0);
        let bracket = excess * far.value + diff.value;
        let rounding = f64::EPSILON * (excess * far.value.abs() + diff.value.abs());
        (
            bracket,
            excess * far.est_error + diff.est_error + rounding,
            far.terms_used.max(diff.terms_used),
            far.converged && diff.converged,
        )
    } else {
        let near = hyp2f1(-0.5, 0.5, 1.0, z0, ctl)?;
        let bracket = stretch * far.value - near.value;
        let rounding = f64::EPSILON * (stretch * far.value.abs() + near.value.abs());
        (
            bracket,
            stretch * far.est_error + near.est_error + rounding,
            far.terms_used.max(near.terms_used),
            far.converged && near.converged,
        )
    };
    Ok(EvalResult {
        value: prefactor * bracket,
        terms_used: terms,
        est_error: prefactor.abs() * err,
        converged,
        method: Method::ClosedForm,
    })
}

/// `₂F₁(-½,½;1;z₁) - ₂F₁(-½,½;1;z₀)` as one series in `z₁^k - z₀^k`, with
/// `delta = z₁ - z₀` supplied exactly by the caller.
fn half_difference(z1: f64, z0: f64, delta: f64, ctl: &SeriesControl) -> EvalResult {
    let mut acc = CompensatedSum::new();
    let mut stop = StopRule::new(*ctl);
    let mut coeff = 1.0;
    let mut power_gap = 0.0;
    let mut z0_pow = 1.0;
    let mut term = 0.0;
    let mut terms_used = 0;
    let mut converged = false;

    while !converged && terms_used < ctl.max_terms {
        let k = (terms_used + 1) as f64;
        coeff *= (k - 1.5) * (k - 0.5) / (k * k);
        // z₁^k - z₀^k = z₁ (z₁^(k-1) - z₀^(k-1)) + z₀^(k-1) (z₁ - z₀)
        power_gap = z1 * power_gap + z0_pow * delta;
        z0_pow *= z0;
        term = coeff * power_gap;
        acc.add(term);
        terms_used += 1;
        converged = stop.update(term, acc.value());
    }

    EvalResult {
        value: acc.value(),
        terms_used,
        est_error: term.abs(),
        converged,
        method: Method::Series,
    }
}

/// Plaque integral `I(a,b) = (σ/4π) ∫₀^b arctan(a/√(x²+1)) / √(x²+1) dx`,
/// i.e. `H[a,b,1,0; 1,½,3/2]`.
#[allow(non_snake_case)]
pub fn eval_I(a: f64, b: f64, sigma: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    eval_h_lambda0(a, b, 1.0, sigma, ctl)
}

/// Detector response `h(a,b) = ∫₀^a ∫₀^b dy dx / (1+x²+y²) = 4π I(a,b) / σ`.
pub fn eval_detector_response(a: f64, b: f64, ctl: &SeriesControl) -> Result<EvalResult> {
    Ok(eval_I(a, b, 1.0, ctl)?.scaled(4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn validation_names_constraint() {
        let cases = [
            (HubbellParams::classical(0.1, 0.1, 0.0), "p > 0"),
            (HubbellParams::classical(-0.1, 0.1, 1.0), "a > 0"),
            (HubbellParams::classical(0.1, 0.0, 1.0), "b > 0"),
            (
                HubbellParams::new(0.1, 0.1, 1.0, 0.0, 1.0, 1.5, 1.5),
                "gamma > beta",
            ),
            (
                HubbellParams::new(0.1, 0.1, 1.0, 0.0, 1.0, 0.0, 1.5),
                "gamma > beta > 0",
            ),
            (
                HubbellParams::new(0.1, 0.1, 1.0, -1.0, 1.0, 0.5, 1.5),
                "lambda > -1",
            ),
        ];
        for (params, needle) in cases {
            match params.validate() {
                Err(Error::InvalidParams(msg)) => assert!(msg.contains(needle), "{msg}"),
                other => panic!("expected InvalidParams for {params:?}, got {other:?}"),
            }
        }
        assert!(HubbellParams::classical(0.1, 0.1, 0.5).validate().is_ok());
        assert!(HubbellParams::half(0.1, 0.1, 0.5).validate().is_ok());
    }

    #[test]
    fn general_matches_published_digits() {
        let r = eval_h_general(&HubbellParams::half(0.1, 0.2, 0.5), &ctl()).unwrap();
        assert!(r.converged);
        assert!(rel(r.value, 0.000_219_698_305_361_161_92) < 1e-14);

        let r = eval_h_general(&HubbellParams::half(0.5, 1.0, 2.5), &ctl()).unwrap();
        assert!(rel(r.value, 0.011_293_885_774_813_332) < 1e-14);

        let r = eval_h_general(&HubbellParams::classical(0.8, 2.6, 7.5), &ctl()).unwrap();
        assert!(rel(r.value, 0.017_255_112_588_899_273) < 1e-14);
    }

    #[test]
    fn general_vanishes_with_length() {
        let mut prev = f64::INFINITY;
        for b in [1e-2, 1e-4, 1e-6] {
            let v = eval_h_general(&HubbellParams::new(0.3, b, 1.0, 0.5, 1.0, 0.5, 1.5), &ctl())
                .unwrap()
                .value;
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        // b^(λ+1) with λ = 0.5
        assert!(prev < 1e-8);
    }

    #[test]
    fn lambda0_matches_published_digits() {
        let r = eval_h_lambda0(0.1, 0.1, 0.5, 1.0, &ctl()).unwrap();
        assert!(rel(r.value, 0.001_570_716_369_171_686) < 1e-14);
        let r = eval_h_lambda0(0.5, 0.5, 1.0, 1.0, &ctl()).unwrap();
        assert!(rel(r.value, 0.017_188_506_077_049_23) < 1e-14);
    }

    #[test]
    fn lambda0_is_linear_in_width_near_zero() {
        let small = eval_h_lambda0(1e-6, 0.5, 1.0, 1.0, &ctl()).unwrap().value;
        let smaller = eval_h_lambda0(1e-7, 0.5, 1.0, 1.0, &ctl()).unwrap().value;
        assert!(rel(small / smaller, 10.0) < 1e-9);
    }

    #[test]
    fn lambda0_agrees_with_general() {
        for (a, b, p) in [(0.1, 0.1, 0.5), (0.8, 2.6, 7.5), (2.0, 0.3, 0.7)] {
            let l0 = eval_h_lambda0(a, b, p, 1.0, &ctl()).unwrap();
            let g = eval_h_general(&HubbellParams::classical(a, b, p), &ctl()).unwrap();
            assert!(rel(l0.value, g.value) < 1e-14);
        }
    }

    #[test]
    fn closed_half_matches_published_digits() {
        let r = eval_h_closed_half(0.1, 0.5, 0.5, 1.0, &ctl()).unwrap();
        assert_eq!(r.method, Method::ClosedForm);
        assert!(rel(r.value, 0.001_259_518_891_975_573_3) < 1e-14);
        let r = eval_h_closed_half(0.5, 0.5, 0.5, 1.0, &ctl()).unwrap();
        assert!(rel(r.value, 0.005_794_884_270_704_959_5) < 1e-14);
    }

    #[test]
    fn closed_half_vanishes_with_length() {
        let v = eval_h_closed_half(0.4, 1e-9, 0.8, 1.0, &ctl())
            .unwrap()
            .value;
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn plaque_integral_reference() {
        // (1/4π) ∫₀^0.5 arctan(0.5/√(x²+1))/√(x²+1) dx, mpmath quadrature.
        let r = eval_I(0.5, 0.5, 1.0, &ctl()).unwrap();
        assert!(rel(r.value, 0.017_188_506_077_049_225_783_256_74) < 1e-11);
        assert_eq!(
            r.value,
            eval_h_lambda0(0.5, 0.5, 1.0, 1.0, &ctl()).unwrap().value
        );
    }

    #[test]
    fn plaque_integral_wide_source_limit() {
        // arctan saturates at π/2, so 4π I → (π/2) asinh(b).
        let r = eval_I(1e6, 1.0, 1.0, &ctl()).unwrap();
        assert!(r.converged);
        let limit = std::f64::consts::FRAC_PI_2 * 1f64.asinh();
        assert!(rel(4.0 * PI * r.value, limit) < 1e-5);
    }

    #[test]
    fn ordering_warning() {
        assert!(plaque_ordering_warning(2.0, 1.0).is_some());
        assert!(plaque_ordering_warning(1.0, 1.0).is_none());
        // evaluation still proceeds
        assert!(eval_I(2.0, 1.0, 1.0, &ctl()).is_ok());
    }

    #[test]
    fn detector_response_reference() {
        // ∫₀^1 arctan(1/√(1+x²))/√(1+x²) dx, mpmath quadrature.
        let r = eval_detector_response(1.0, 1.0, &ctl()).unwrap();
        assert!(rel(r.value, 0.639_510_351_870_311_001_962_693_1) < 1e-13);
    }

    #[test]
    fn linear_in_sigma() {
        let p = HubbellParams::new(0.7, 1.3, 0.9, 0.5, 1.2, 0.4, 1.1);
        let one = eval_h_general(&p, &ctl()).unwrap().value;
        let two = eval_h_general(&p.with_sigma(2.0), &ctl()).unwrap().value;
        assert!((two - 2.0 * one).abs() <= 2.0 * f64::EPSILON * two.abs());
    }
}
