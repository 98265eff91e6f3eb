//! Numerical integration: adaptive Gauss–Kronrod (7/15) with global
//! bisection of the worst interval, and tanh-sinh for integrable endpoint
//! singularities.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 2000 }
    }
}

impl QuadSettings {
    pub fn tight() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, settings: QuadSettings) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Input(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0, subdivisions: 0 });
    }
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut segments = vec![Segment { a, b, value, error }];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Numeric(format!("non-finite integrand on [{a}, {b}] (partial value {total})")));
        }
        if total_err <= settings.abs_tol.max(settings.rel_tol * total.abs()) {
            return Ok(QuadResult { value: total, error_estimate: total_err, subdivisions: segments.len() - 1 });
        }
        if segments.len() > settings.max_subdivisions {
            return Err(Error::Quadrature {
                lower: a,
                upper: b,
                value: total,
                error_estimate: total_err,
                subdivisions: segments.len() - 1,
            });
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval cannot be split further in floating point
            return Err(Error::Quadrature {
                lower: a,
                upper: b,
                value: total,
                error_estimate: total_err,
                subdivisions: segments.len(),
            });
        }
        let (v1, e1) = gauss_kronrod(&f, seg.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, seg.b);
        segments.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
    }
}

/// Integrate over consecutive breakpoints `points[0] < points[1] < ...`,
/// one adaptive run per panel so kinks never fall inside a panel.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, points: &[f64], settings: QuadSettings) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Input("need at least two breakpoints".into()));
    }
    let mut parts = Vec::with_capacity(points.len() - 1);
    for w in points.windows(2) {
        parts.push(integrate(&f, w[0], w[1], settings)?.value);
    }
    Ok(pairwise_sum(&parts))
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable
/// singularities there are fine. `f` receives `(x, distance_to_nearest_endpoint)`
/// to let callers evaluate singular factors without cancellation.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    let r = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        // distance of the node from the near endpoint, in units of r
        let gap = 1.0 / (s.abs().exp() * cosh_s);
        if gap * r <= 0.0 || !gap.is_finite() {
            return 0.0;
        }
        let weight = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        let x = if s >= 0.0 { b - r * gap } else { a + r * gap };
        let v = f(x, r * gap);
        if v == 0.0 {
            0.0
        } else {
            r * weight * v
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = h * sum;
    for _level in 0..12 {
        h *= 0.5;
        // add the new odd nodes
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = h * sum;
        if !next.is_finite() {
            return Err(Error::Numeric("non-finite value in tanh-sinh quadrature".into()));
        }
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Quadrature { lower: a, upper: b, value: estimate, error_estimate: f64::NAN, subdivisions: 12 })
}

/// Pairwise summation in ascending index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}
