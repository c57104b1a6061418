//! Quadrature ground truth for the series evaluators.
//!
//! Everything here integrates the defining integrals directly with an
//! adaptive Gauss–Kronrod 7/15 rule and recursive interval halving. The
//! plaque forms ([`quad_I`], [`quad_h2d`]) use only elementary functions, so
//! they share no numerical kernel with the hypergeometric code.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hubbell::HubbellParams;
use crate::special::{hyp2f1, EvalResult, Method, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of interval halvings along any branch.
    pub max_depth: usize,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_depth: 60,
        }
    }
}

impl QuadratureControl {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidControl(format!(
                "quadrature tolerances must be positive (abs_tol={}, rel_tol={})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidControl("max_depth must be >= 1".into()));
        }
        Ok(())
    }
}

// Kronrod nodes on [0, 1]; odd indices are the Gauss points.
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gauss_kronrod<F>(f: &mut F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for j in 0..7 {
        let dx = half * KRONROD_NODES[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += KRONROD_WEIGHTS[j] * pair;
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * pair;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

struct Adaptive<'a, F> {
    f: &'a mut F,
    max_depth: usize,
    evaluations: usize,
    depth_exceeded: bool,
}

impl<F> Adaptive<'_, F>
where
    F: FnMut(f64) -> Result<f64>,
{
    /// Returns (integral, accumulated error bound) over `[lo, hi]` given the
    /// panel estimate already computed there.
    fn refine(
        &mut self,
        lo: f64,
        hi: f64,
        estimate: (f64, f64),
        tol: f64,
        depth: usize,
    ) -> Result<(f64, f64)> {
        let (value, err) = estimate;
        // Accept panels at the tolerance or at the rounding floor.
        if err <= tol || err <= 50.0 * f64::EPSILON * value.abs() {
            return Ok(estimate);
        }
        if depth >= self.max_depth {
            self.depth_exceeded = true;
            return Ok(estimate);
        }
        let mid = 0.5 * (lo + hi);
        let left = gauss_kronrod(self.f, lo, mid)?;
        let right = gauss_kronrod(self.f, mid, hi)?;
        self.evaluations += 30;
        let (lv, le) = self.refine(lo, mid, left, 0.5 * tol, depth + 1)?;
        let (rv, re) = self.refine(mid, hi, right, 0.5 * tol, depth + 1)?;
        Ok((lv + rv, le + re))
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[lo, hi]`.
///
/// The global tolerance `max(abs_tol, rel_tol · |first estimate|)` is split
/// evenly at every halving. `est_error` sums the `|K15 - G7|` panel
/// differences; hitting `max_depth` on any branch returns the best estimate
/// with `converged == false`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, qctl: &QuadratureControl) -> Result<EvalResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    qctl.validate()?;
    if lo == hi {
        return Ok(EvalResult::exact(0.0, Method::Quadrature));
    }
    let first = gauss_kronrod(&mut f, lo, hi)?;
    let tol = qctl.abs_tol.max(qctl.rel_tol * first.0.abs());
    let mut driver = Adaptive {
        f: &mut f,
        max_depth: qctl.max_depth,
        evaluations: 15,
        depth_exceeded: false,
    };
    let (value, est_error) = driver.refine(lo, hi, first, tol, 0)?;
    Ok(EvalResult {
        value,
        terms_used: driver.evaluations,
        est_error,
        converged: !driver.depth_exceeded,
        method: Method::Quadrature,
    })
}

/// `(σa/4π) ∫₀^b x^λ (x²+p)^(-α) ₂F₁(α,β;γ;-a²/(x²+p)) dx` by quadrature.
///
/// For `-1 < λ < 0` the integrable endpoint singularity is removed with
/// `x = t^(1/(λ+1))`, which turns `x^λ dx` into `dt/(λ+1)`.
pub fn quad_h_general(params: &HubbellParams, qctl: &QuadratureControl) -> Result<EvalResult> {
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
    let ctl = SeriesControl::default();
    let kernel = move |x: f64| -> Result<f64> {
        let shifted = x * x + p;
        let f = hyp2f1(alpha, beta, gamma, -a * a / shifted, &ctl)?;
        Ok(shifted.powf(-alpha) * f.value)
    };
    let prefactor = sigma * a / (4.0 * PI);

    let result = if lambda < 0.0 {
        let power = 1.0 / (lambda + 1.0);
        integrate(
            |t| Ok(kernel(t.powf(power))? * power),
            0.0,
            b.powf(lambda + 1.0),
            qctl,
        )?
    } else {
        integrate(|x| Ok(x.powf(lambda) * kernel(x)?), 0.0, b, qctl)?
    };
    Ok(result.scaled(prefactor))
}

fn check_plaque(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParams(format!(
            "constraint a > 0 and b > 0 violated: a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// `(σ/4π) ∫₀^b arctan(a/√(x²+1)) / √(x²+1) dx`, elementary integrand only.
#[allow(non_snake_case)]
pub fn quad_I(a: f64, b: f64, sigma: f64, qctl: &QuadratureControl) -> Result<EvalResult> {
    check_plaque(a, b)?;
    let result = integrate(
        |x| {
            let r = x.hypot(1.0);
            Ok((a / r).atan() / r)
        },
        0.0,
        b,
        qctl,
    )?;
    Ok(result.scaled(sigma / (4.0 * PI)))
}

/// `h(a,b) = ∫₀^a ∫₀^b dy dx / (1+x²+y²)`, with the inner integral done in
/// closed form: `∫₀^b dy/(c²+y²) = arctan(b/c)/c`, `c = √(1+x²)`.
pub fn quad_h2d(a: f64, b: f64, qctl: &QuadratureControl) -> Result<EvalResult> {
    check_plaque(a, b)?;
    integrate(
        |x| {
            let c = x.hypot(1.0);
            Ok((b / c).atan() / c)
        },
        0.0,
        a,
        qctl,
    )
}
