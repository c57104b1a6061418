//! Appell's F2 function.
//!
//! ```text
//! F2(σ; α₁, α₂; β₁, β₂; x, y) = Σ_{m,n≥0} (σ)_{m+n} (α₁)_m (α₂)_n
//!                               / ((β₁)_m (β₂)_n m! n!) · x^m y^n
//! ```
//!
//! Besides the reference double series this module carries the reduction of
//! the degenerate case `α₂ = β₂` to a single ₂F₁, the recurrence that lowers
//! `α₂` by an integer, and the finite ₂F₁ expansion obtained by unrolling
//! that recurrence, which is what the Hubbell evaluator consumes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{
    hyp2f1, is_nonpositive_integer, CompensatedSum, EvalResult, Method, SeriesControl, StopRule,
};

/// Parameters and arguments of F2(σ; α₁, α₂; β₁, β₂; x, y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F2Args {
    pub sigma: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub x: f64,
    pub y: f64,
}

impl F2Args {
    pub fn new(sigma: f64, a1: f64, a2: f64, b1: f64, b2: f64, x: f64, y: f64) -> Self {
        Self {
            sigma,
            a1,
            a2,
            b1,
            b2,
            x,
            y,
        }
    }

    /// The F2 behind the generalized Hubbell integral:
    /// `F2(α; β, (λ+1)/2; γ, (λ+3)/2; -a²/p, -b²/p)`.
    pub fn hubbell(alpha: f64, beta: f64, gamma: f64, lambda: f64, a: f64, b: f64, p: f64) -> Self {
        Self::new(
            alpha,
            beta,
            (lambda + 1.0) / 2.0,
            gamma,
            (lambda + 3.0) / 2.0,
            -a * a / p,
            -b * b / p,
        )
    }

    /// True inside the double series' region of convergence.
    pub fn in_series_domain(&self) -> bool {
        self.x.abs() + self.y.abs() < 1.0
    }

    fn check_denominators(&self) -> Result<()> {
        let all = [
            self.sigma, self.a1, self.a2, self.b1, self.b2, self.x, self.y,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "F2 arguments must be finite: {self:?}"
            )));
        }
        if is_nonpositive_integer(self.b1) || is_nonpositive_integer(self.b2) {
            return Err(Error::Domain(format!(
                "F2 denominator parameters must not be non-positive integers (b1={}, b2={})",
                self.b1, self.b2
            )));
        }
        Ok(())
    }
}

/// Rising-factorial ratios `(a)_k / (b)_k` for `k = 0, 1, ...`, extended on demand.
struct RatioTable {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl RatioTable {
    fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            values: vec![1.0],
        }
    }

    fn extend_to(&mut self, k: usize) {
        while self.values.len() <= k {
            let j = (self.values.len() - 1) as f64;
            let last = self.values[self.values.len() - 1];
            self.values.push(last * (self.a + j) / (self.b + j));
        }
    }
}

/// Reference double series, summed over anti-diagonals `m + n = s`.
///
/// Within diagonal `s` each term is
/// `(σ)_s/s! · C(s,m) x^m y^n · (α₁)_m/(β₁)_m · (α₂)_n/(β₂)_n`; the binomial
/// weights `C(s,m) x^m y^n` are advanced with Pascal's rule so no step divides
/// by `x`, `y` or a numerator parameter. Stops once `consecutive_passes`
/// diagonals in a row have total absolute size within tolerance.
pub fn f2_double_series(args: &F2Args, ctl: &SeriesControl) -> Result<EvalResult> {
    ctl.validate()?;
    args.check_denominators()?;
    if !args.in_series_domain() {
        return Err(Error::Domain(format!(
            "double series requires series domain |x|+|y| < 1, got |{}|+|{}| = {}",
            args.x,
            args.y,
            args.x.abs() + args.y.abs()
        )));
    }

    let F2Args {
        sigma,
        a1,
        a2,
        b1,
        b2,
        x,
        y,
    } = *args;
    let mut r1 = RatioTable::new(a1, b1);
    let mut r2 = RatioTable::new(a2, b2);

    // Diagonal 0.
    let mut weights = vec![1.0];
    let mut sigma_over_fact = 1.0;
    let mut total = CompensatedSum::new();
    total.add(1.0);
    let mut stop = StopRule::new(*ctl);
    let mut diagonals = 1;
    let mut last = 1.0;
    let mut converged = false;

    while !converged && diagonals < ctl.max_terms {
        let s = diagonals;
        sigma_over_fact *= (sigma + (s - 1) as f64) / s as f64;

        let mut next = Vec::with_capacity(s + 1);
        for m in 0..=s {
            let from_x = if m > 0 { x * weights[m - 1] } else { 0.0 };
            let from_y = if m < s { y * weights[m] } else { 0.0 };
            next.push(from_x + from_y);
        }
        weights = next;

        r1.extend_to(s);
        r2.extend_to(s);
        let mut diag = CompensatedSum::new();
        let mut diag_abs = 0.0;
        for (m, w) in weights.iter().enumerate() {
            let t = w * r1.values[m] * r2.values[s - m];
            diag.add(t);
            diag_abs += t.abs();
        }
        let diag_value = sigma_over_fact * diag.value();
        last = (sigma_over_fact * diag_abs).abs();

        total.add(diag_value);
        diagonals += 1;
        converged = stop.update(last, total.value());
    }

    Ok(EvalResult {
        value: total.value(),
        terms_used: diagonals,
        est_error: last,
        converged,
        method: Method::DoubleSeries,
    })
}

/// Degenerate case `α₂ = β₂`:
/// `F2(σ; α₁, β₂; β₁, β₂; x, y) = (1-y)^(-σ) ₂F₁(σ, α₁; β₁; x/(1-y))`.
pub fn f2_reduce_to_2f1(args: &F2Args, ctl: &SeriesControl) -> Result<EvalResult> {
    args.check_denominators()?;
    if args.a2 != args.b2 {
        return Err(Error::Domain(format!(
            "reduction requires a2 == b2, got a2={} b2={}",
            args.a2, args.b2
        )));
    }
    if args.y >= 1.0 {
        return Err(Error::Domain(format!(
            "reduction requires y < 1, got {}",
            args.y
        )));
    }
    let shift = 1.0 - args.y;
    let inner = hyp2f1(args.sigma, args.a1, args.b1, args.x / shift, ctl)?;
    Ok(inner.scaled(shift.powf(-args.sigma)))
}

/// Right-hand side of the `α₂ -> α₂ - n` recurrence:
///
/// ```text
/// F2(σ; α₁, α₂-n; β₁, β₂; x, y) = F2(σ; α₁, α₂; β₁, β₂; x, y)
///     - (σ y / β₂) Σ_{k=1..n} F2(σ+1; α₁, α₂-k+1; β₁, β₂+1; x, y)
/// ```
///
/// `args` holds the unshifted parameters; the result approximates F2 at
/// `α₂ - n`. Every F2 on the right is evaluated by [`f2_double_series`].
pub fn f2_recurrence_step(args: &F2Args, n: usize, ctl: &SeriesControl) -> Result<EvalResult> {
    if n == 0 {
        return Err(Error::Domain("recurrence step requires n >= 1".into()));
    }
    let base = f2_double_series(args, ctl)?;

    let mut correction = CompensatedSum::new();
    let mut correction_err = 0.0;
    let mut terms_used = base.terms_used;
    let mut converged = base.converged;
    for k in 1..=n {
        let shifted = F2Args {
            sigma: args.sigma + 1.0,
            a2: args.a2 - (k - 1) as f64,
            b2: args.b2 + 1.0,
            ..*args
        };
        let r = f2_double_series(&shifted, ctl)?;
        correction.add(r.value);
        correction_err += r.est_error;
        terms_used = terms_used.max(r.terms_used);
        converged &= r.converged;
    }

    let factor = args.sigma * args.y / args.b2;
    Ok(EvalResult {
        value: base.value - factor * correction.value(),
        terms_used,
        est_error: base.est_error + factor.abs() * correction_err,
        converged,
        method: Method::Recurrence,
    })
}

/// Summands of the finite expansion
///
/// ```text
/// F2(α; β, (λ+1)/2; γ, (λ+3)/2; -a²/p, -b²/p)
///   = Σ_k (α)_k / ((λ+3)/2)_k · (b²/p)^k (1+b²/p)^(-α-k) ₂F₁(α+k, β; γ; -a²/(p+b²))
/// ```
///
/// The coefficient is advanced by its term ratio
/// `(α+k)/((λ+3)/2+k) · q/(1+q)` with `q = b²/p`; each ₂F₁ is evaluated
/// independently.
#[derive(Debug, Clone)]
pub struct FiniteSumTerms {
    alpha: f64,
    beta: f64,
    gamma: f64,
    lower: f64,
    ratio: f64,
    z: f64,
    coefficient: f64,
    k: usize,
    ctl: SeriesControl,
}

impl FiniteSumTerms {
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        lambda: f64,
        a: f64,
        b: f64,
        p: f64,
        ctl: &SeriesControl,
    ) -> Result<Self> {
        ctl.validate()?;
        let all = [alpha, beta, gamma, lambda, a, b, p];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("finite sum arguments must be finite".into()));
        }
        if p <= 0.0 {
            return Err(Error::Domain(format!("finite sum requires p > 0, got {p}")));
        }
        if a < 0.0 || b < 0.0 {
            return Err(Error::Domain(format!(
                "finite sum requires a, b >= 0, got a={a} b={b}"
            )));
        }
        if gamma <= beta || beta <= 0.0 {
            return Err(Error::Domain(format!(
                "finite sum requires gamma > beta > 0, got beta={beta} gamma={gamma}"
            )));
        }
        let lower = (lambda + 3.0) / 2.0;
        if is_nonpositive_integer(lower) {
            return Err(Error::Domain(format!(
                "(lambda+3)/2 must not be a non-positive integer, got {lower}"
            )));
        }
        let q = b * b / p;
        Ok(Self {
            alpha,
            beta,
            gamma,
            lower,
            ratio: q / (1.0 + q),
            z: -a * a / (p + b * b),
            coefficient: (1.0 + q).powf(-alpha),
            k: 0,
            ctl: *ctl,
        })
    }
}

impl Iterator for FiniteSumTerms {
    type Item = Result<EvalResult>;

    fn next(&mut self) -> Option<Self::Item> {
        let k = self.k as f64;
        let inner = match hyp2f1(self.alpha + k, self.beta, self.gamma, self.z, &self.ctl) {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        let term = inner.scaled(self.coefficient);
        self.coefficient *= (self.alpha + k) / (self.lower + k) * self.ratio;
        self.k += 1;
        Some(Ok(term))
    }
}

/// Adaptive partial sum of [`FiniteSumTerms`].
///
/// Terms are added until `consecutive_passes` successive increments satisfy
/// `|H_{n+1} - H_n| < rel_tol · |H_n|`. `terms_used` is the number of summands
/// (`n + 1`), `est_error` the magnitude of the last one. The result is marked
/// unconverged if the cap is hit or any inner ₂F₁ failed to converge.
pub fn f2_finite_sum(
    alpha: f64,
    beta: f64,
    gamma: f64,
    lambda: f64,
    a: f64,
    b: f64,
    p: f64,
    ctl: &SeriesControl,
) -> Result<EvalResult> {
    let terms = FiniteSumTerms::new(alpha, beta, gamma, lambda, a, b, p, ctl)?;
    let mut acc = CompensatedSum::new();
    let mut stop = StopRule::new(*ctl);
    let mut inner_ok = true;
    let mut terms_used = 0;
    let mut last = 0.0;
    let mut stopped = false;

    for term in terms.take(ctl.max_terms) {
        let term = term?;
        inner_ok &= term.converged;
        acc.add(term.value);
        terms_used += 1;
        last = term.value.abs();
        // The first summand is H_0 itself, not an increment.
        if terms_used > 1 && stop.update(last, acc.value()) {
            stopped = true;
            break;
        }
    }

    Ok(EvalResult {
        value: acc.value(),
        terms_used,
        est_error: last,
        converged: stopped && inner_ok,
        method: Method::FiniteSum,
    })
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
    fn double_series_at_origin() {
        let r = f2_double_series(&F2Args::new(0.7, 1.1, 2.3, 1.5, 0.4, 0.0, 0.0), &ctl()).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.converged);
    }

    #[test]
    fn double_series_reference_values() {
        // Brute-force double sum in mpmath at 60 digits.
        let r =
            f2_double_series(&F2Args::new(0.5, 0.5, 1.0, 1.0, 2.0, -0.04, -0.16), &ctl()).unwrap();
        assert!(r.converged);
        assert!(rel(r.value, 0.954_154_009_753_060_067_767_211_1) < 1e-14);

        // h(0.2, 0.3) / 0.06 from a 2-D quadrature of 1/(1+x²+y²).
        let r =
            f2_double_series(&F2Args::new(1.0, 0.5, 0.5, 1.5, 1.5, -0.04, -0.09), &ctl()).unwrap();
        assert!(rel(r.value, 0.959_215_694_772_382_484_179_706_4) < 1e-14);
    }

    #[test]
    fn double_series_domain() {
        let err = f2_double_series(&F2Args::new(1.0, 0.5, 0.5, 1.5, 1.5, -0.6, -0.6), &ctl());
        assert!(matches!(err, Err(Error::Domain(msg)) if msg.contains("|x|+|y| < 1")));
        let err = f2_double_series(&F2Args::new(1.0, 0.5, 0.5, -1.0, 1.5, -0.1, -0.1), &ctl());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn double_series_handles_terminating_numerators() {
        // α₂ = 0 removes every n > 0 term: F2 collapses to ₂F₁(σ, α₁; β₁; x).
        let args = F2Args::new(0.8, 1.3, 0.0, 2.1, 1.7, -0.3, -0.4);
        let f2 = f2_double_series(&args, &ctl()).unwrap();
        let f21 = hyp2f1(0.8, 1.3, 2.1, -0.3, &ctl()).unwrap();
        assert!(rel(f2.value, f21.value) < 1e-14);
    }

    #[test]
    fn double_series_reports_cap() {
        let c = SeriesControl {
            max_terms: 4,
            ..ctl()
        };
        let r = f2_double_series(&F2Args::new(1.0, 0.5, 0.5, 1.5, 1.5, -0.3, -0.4), &c).unwrap();
        assert!(!r.converged);
        assert_eq!(r.terms_used, 4);
    }

    #[test]
    fn reduction_reference_value() {
        let args = F2Args::new(0.5, 0.5, 2.0, 1.0, 2.0, -0.1, -0.2);
        let r = f2_reduce_to_2f1(&args, &ctl()).unwrap();
        assert!(rel(r.value, 0.894_695_754_202_934_525_878_440_3) < 1e-14);
        let d = f2_double_series(&args, &ctl()).unwrap();
        assert!(rel(r.value, d.value) < 1e-12);

        let origin = F2Args::new(0.5, 0.5, 2.0, 1.0, 2.0, 0.0, 0.0);
        assert_eq!(f2_reduce_to_2f1(&origin, &ctl()).unwrap().value, 1.0);
    }

    #[test]
    fn reduction_preconditions() {
        let mismatch = F2Args::new(0.5, 0.5, 1.0, 1.0, 2.0, -0.1, -0.2);
        assert!(matches!(
            f2_reduce_to_2f1(&mismatch, &ctl()),
            Err(Error::Domain(_))
        ));
        let big_y = F2Args::new(0.5, 0.5, 2.0, 1.0, 2.0, -0.1, 1.0);
        assert!(matches!(
            f2_reduce_to_2f1(&big_y, &ctl()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn recurrence_with_zero_y_is_plain_2f1() {
        let args = F2Args::new(0.5, 0.5, 2.0, 1.0, 2.0, -0.3, 0.0);
        let r = f2_recurrence_step(&args, 2, &ctl()).unwrap();
        let f21 = hyp2f1(0.5, 0.5, 1.0, -0.3, &ctl()).unwrap();
        assert!(rel(r.value, f21.value) < 1e-14);
    }

    #[test]
    fn recurrence_single_step() {
        let args = F2Args::new(0.5, 0.5, 2.0, 1.0, 2.0, -0.1, -0.2);
        let rhs = f2_recurrence_step(&args, 1, &ctl()).unwrap();
        let lhs = f2_double_series(&F2Args { a2: 1.0, ..args }, &ctl()).unwrap();
        assert_eq!(rhs.method, Method::Recurrence);
        assert!(rel(rhs.value, lhs.value) < 1e-12);
        assert!(f2_recurrence_step(&args, 0, &ctl()).is_err());
    }

    #[test]
    fn recurrence_reference_value() {
        // mpmath: both sides agree to 1e-56 at this point.
        let args = F2Args::new(0.7, 0.5, 2.3, 1.2, 2.1, -0.1, -0.2);
        let expected = [
            0.900_014_669_959_370_717_98,
            0.954_882_356_420_150_738_28,
            1.015_396_107_026_030_288_8,
        ];
        for (n, e) in (1..=3).zip(expected) {
            let r = f2_recurrence_step(&args, n, &ctl()).unwrap();
            assert!(rel(r.value, e) < 1e-13, "n={n}");
        }
    }

    #[test]
    fn finite_sum_at_zero_width() {
        // a = 0: every ₂F₁ is 1 and the sum is F2(α; β, (λ+1)/2; γ, (λ+3)/2; 0, -b²/p).
        let (alpha, beta, gamma, lambda, b, p) = (0.8, 0.5, 1.5, 0.4, 0.6, 0.9);
        let sum = f2_finite_sum(alpha, beta, gamma, lambda, 0.0, b, p, &ctl()).unwrap();
        let args = F2Args::hubbell(alpha, beta, gamma, lambda, 0.0, b, p);
        let series = f2_double_series(&args, &ctl()).unwrap();
        assert!(sum.converged);
        assert!(rel(sum.value, series.value) < 1e-13);
    }

    #[test]
    fn finite_sum_table_point() {
        // F2 behind H[0.1, 0.2, 0.5, 1; ½, ½, 1]; prefactor applied by hand.
        let r = f2_finite_sum(0.5, 0.5, 1.0, 1.0, 0.1, 0.2, 0.5, &ctl()).unwrap();
        let prefactor = 0.1 / (4.0 * std::f64::consts::PI) * 0.2f64.powi(2) / (2.0 * 0.5f64.sqrt());
        assert!(rel(prefactor * r.value, 0.000_219_698_305_361_161_973_2) < 1e-14);
        assert!(r.converged);
        assert!(r.est_error <= 1e-15 * r.value);
    }

    #[test]
    fn finite_sum_terms_positive() {
        let terms: Vec<f64> = FiniteSumTerms::new(1.0, 0.5, 1.5, 0.0, 0.8, 2.6, 7.5, &ctl())
            .unwrap()
            .take(60)
            .map(|t| t.unwrap().value)
            .collect();
        assert!(terms.iter().all(|&t| t > 0.0));
    }

    #[test]
    fn finite_sum_preconditions() {
        assert!(f2_finite_sum(1.0, 0.5, 1.5, 0.0, 0.1, 0.1, 0.0, &ctl()).is_err());
        assert!(f2_finite_sum(1.0, 1.5, 1.5, 0.0, 0.1, 0.1, 1.0, &ctl()).is_err());
        assert!(f2_finite_sum(1.0, 0.5, 1.5, -5.0, 0.1, 0.1, 1.0, &ctl()).is_err());
        assert!(f2_finite_sum(1.0, 0.5, 1.5, 0.0, -0.1, 0.1, 1.0, &ctl()).is_err());
    }

    #[test]
    fn finite_sum_hits_cap_for_long_plates() {
        let c = SeriesControl {
            max_terms: 20,
            ..ctl()
        };
        let r = f2_finite_sum(1.0, 0.5, 1.5, 0.0, 0.5, 30.0, 1.0, &c).unwrap();
        assert!(!r.converged);
        assert_eq!(r.terms_used, 20);
    }
}
