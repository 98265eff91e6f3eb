//! Source families, the parameter cube and boundary-vanishing priors.
//!
//! All shipped families are products of independent one-dimensional
//! coordinates, so the per-coordinate methods of [`ParametricModel`] carry the
//! whole model. Vector-valued operations (density, score, sampling) are
//! provided on top of them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::infogeom::ScalarLaw;
use crate::quadrature::{integrate_panels, QuadSettings};
use crate::rng::SimRng;
use crate::special::{normal_cdf, normal_pdf, normal_quantile, normal_sf};

/// The hyper-cube `[-B, B]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    dim: usize,
    half_width: f64,
}

impl ParameterSpace {
    pub fn new(dim: usize, half_width: f64) -> Result<Self> {
        if dim == 0 {
            return Err(input("parameter dimension must be at least 1"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(input(format!("half-width must be positive and finite, got {half_width}")));
        }
        Ok(Self { dim, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim && theta.iter().all(|t| t.abs() <= self.half_width)
    }

    /// Dimension, finiteness and membership check.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(input(format!("θ has dimension {}, expected {}", theta.len(), self.dim)));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(input("θ has non-finite entries"));
        }
        if !self.contains(theta) {
            return Err(domain(format!("θ = {theta:?} lies outside [-{0}, {0}]^{1}", self.half_width, self.dim)));
        }
        Ok(())
    }

    pub fn clip(&self, theta: &mut [f64]) {
        for t in theta.iter_mut() {
            *t = t.clamp(-self.half_width, self.half_width);
        }
    }
}

/// Which of the two bound regimes an order `p` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `1 < p < 2`
    Low,
    /// `p >= 2`
    High,
}

/// Loss order `p > 1` together with its Hölder conjugate `q = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOrder {
    p: f64,
    q: f64,
}

impl LossOrder {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(domain(format!("loss order must satisfy p > 1, got {p}")));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn regime(&self) -> Regime {
        if self.p < 2.0 {
            Regime::Low
        } else {
            Regime::High
        }
    }

    /// True on `3/2 < p < 2`, where the low-regime Orlicz bound is stated.
    pub fn orlicz_low_valid(&self) -> bool {
        self.p > 1.5 && self.p < 2.0
    }
}

impl Serialize for LossOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.p)
    }
}

/// A product family `f(x|θ) = ∏_i g(x_i | θ_i)`.
///
/// Implementors supply the one-dimensional pieces; coordinates are indexed
/// from zero.
pub trait ParametricModel: Send + Sync + fmt::Debug {
    fn space(&self) -> &ParameterSpace;

    /// Short name used in reports.
    fn name(&self) -> &'static str;

    /// Scale parameter (σ or b).
    fn scale(&self) -> f64;

    fn coordinate_density(&self, x: f64, theta: f64) -> f64;

    /// `∂/∂θ log g(x|θ)`.
    fn coordinate_score(&self, x: f64, theta: f64) -> f64;

    fn coordinate_cdf(&self, x: f64, theta: f64) -> f64;

    fn coordinate_sf(&self, x: f64, theta: f64) -> f64 {
        1.0 - self.coordinate_cdf(x, theta)
    }

    /// `∂/∂θ G(x|θ)` for the coordinate CDF `G`.
    fn coordinate_cdf_dtheta(&self, x: f64, theta: f64) -> f64 {
        let h = 1e-6;
        (self.coordinate_cdf(x, theta + h) - self.coordinate_cdf(x, theta - h)) / (2.0 * h)
    }

    fn coordinate_quantile(&self, u: f64, theta: f64) -> f64;

    fn sample_coordinate(&self, theta: f64, rng: &mut SimRng) -> f64;

    /// Increasing breakpoints covering the effective support at `θ`,
    /// including any kinks of the density or score.
    fn integration_breakpoints(&self, theta: f64) -> Vec<f64>;

    /// True when `g(x|θ) = g_0(x - θ)`.
    fn is_location_family(&self) -> bool {
        false
    }

    /// Law of the projection `<u, S_θ(X)>` for a unit vector `u`.
    fn score_projection_law(&self, theta: &[f64], direction: &[f64]) -> ScalarLaw;

    /// `∂/∂θ_i E[Y_i]` for `Y ~ f(·|θ)`.
    fn mean_functional_derivative(&self, theta: &[f64], i: usize) -> f64 {
        if self.is_location_family() {
            return 1.0;
        }
        let mean = |t: f64| {
            integrate_panels(
                |x| x * self.coordinate_density(x, t),
                &self.integration_breakpoints(t),
                QuadSettings::tight(),
            )
            .unwrap_or(f64::NAN)
        };
        let h = 1e-5;
        (mean(theta[i] + h) - mean(theta[i] - h)) / (2.0 * h)
    }

    fn density(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        self.space().check(theta)?;
        check_sample(x, self.space().dim())?;
        Ok(x.iter().zip(theta).map(|(&xi, &ti)| self.coordinate_density(xi, ti)).product())
    }

    fn log_density(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        self.space().check(theta)?;
        check_sample(x, self.space().dim())?;
        Ok(x.iter().zip(theta).map(|(&xi, &ti)| self.coordinate_density(xi, ti).ln()).sum())
    }

    /// Gradient of `log f(x|θ)` in `θ`.
    fn score(&self, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
        self.space().check(theta)?;
        check_sample(x, self.space().dim())?;
        Ok(x.iter().zip(theta).map(|(&xi, &ti)| self.coordinate_score(xi, ti)).collect())
    }

    /// `count` i.i.d. draws from `f(·|θ)`.
    fn sample(&self, theta: &[f64], count: usize, rng: &mut SimRng) -> Result<Vec<Vec<f64>>> {
        self.space().check(theta)?;
        Ok((0..count).map(|_| theta.iter().map(|&t| self.sample_coordinate(t, rng)).collect()).collect())
    }
}

fn check_sample(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(input(format!("x has dimension {}, expected {dim}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(input("x has non-finite entries"));
    }
    Ok(())
}

/// `X ~ N(θ, σ² I_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLocation {
    sigma: f64,
    space: ParameterSpace,
}

impl GaussianLocation {
    pub fn new(sigma: f64, space: ParameterSpace) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(input(format!("σ must be positive, got {sigma}")));
        }
        Ok(Self { sigma, space })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl ParametricModel for GaussianLocation {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }

    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn scale(&self) -> f64 {
        self.sigma
    }

    fn coordinate_density(&self, x: f64, theta: f64) -> f64 {
        normal_pdf((x - theta) / self.sigma) / self.sigma
    }

    fn coordinate_score(&self, x: f64, theta: f64) -> f64 {
        (x - theta) / (self.sigma * self.sigma)
    }

    fn coordinate_cdf(&self, x: f64, theta: f64) -> f64 {
        normal_cdf((x - theta) / self.sigma)
    }

    fn coordinate_sf(&self, x: f64, theta: f64) -> f64 {
        normal_sf((x - theta) / self.sigma)
    }

    fn coordinate_cdf_dtheta(&self, x: f64, theta: f64) -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        -self.coordinate_density(x, theta)
    }

    fn coordinate_quantile(&self, u: f64, theta: f64) -> f64 {
        theta + self.sigma * normal_quantile(u)
    }

    fn sample_coordinate(&self, theta: f64, rng: &mut SimRng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        theta + self.sigma * z
    }

    fn integration_breakpoints(&self, theta: f64) -> Vec<f64> {
        let w = 12.0 * self.sigma;
        vec![theta - w, theta - self.sigma, theta, theta + self.sigma, theta + w]
    }

    fn is_location_family(&self) -> bool {
        true
    }

    fn score_projection_law(&self, _theta: &[f64], direction: &[f64]) -> ScalarLaw {
        let norm = direction.iter().map(|u| u * u).sum::<f64>().sqrt();
        ScalarLaw::Gaussian { sd: norm / self.sigma }
    }
}

/// Independent Laplace coordinates with location `θ_i` and scale `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceLocation {
    b: f64,
    space: ParameterSpace,
}

impl LaplaceLocation {
    pub fn new(b: f64, space: ParameterSpace) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(input(format!("Laplace scale must be positive, got {b}")));
        }
        Ok(Self { b, space })
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Largest dimension for which the Laplace score projection is enumerated exactly.
const LAPLACE_EXACT_DIM: usize = 16;

impl ParametricModel for LaplaceLocation {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }

    fn name(&self) -> &'static str {
        "laplace"
    }

    fn scale(&self) -> f64 {
        self.b
    }

    fn coordinate_density(&self, x: f64, theta: f64) -> f64 {
        (-(x - theta).abs() / self.b).exp() / (2.0 * self.b)
    }

    fn coordinate_score(&self, x: f64, theta: f64) -> f64 {
        // symmetric subgradient at the kink
        if x > theta {
            1.0 / self.b
        } else if x < theta {
            -1.0 / self.b
        } else {
            0.0
        }
    }

    fn coordinate_cdf(&self, x: f64, theta: f64) -> f64 {
        let z = (x - theta) / self.b;
        if z < 0.0 {
            0.5 * z.exp()
        } else {
            1.0 - 0.5 * (-z).exp()
        }
    }

    fn coordinate_sf(&self, x: f64, theta: f64) -> f64 {
        let z = (x - theta) / self.b;
        if z > 0.0 {
            0.5 * (-z).exp()
        } else {
            1.0 - 0.5 * z.exp()
        }
    }

    fn coordinate_cdf_dtheta(&self, x: f64, theta: f64) -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        -self.coordinate_density(x, theta)
    }

    fn coordinate_quantile(&self, u: f64, theta: f64) -> f64 {
        if u < 0.5 {
            theta + self.b * (2.0 * u).ln()
        } else {
            theta - self.b * (2.0 * (1.0 - u)).ln()
        }
    }

    fn sample_coordinate(&self, theta: f64, rng: &mut SimRng) -> f64 {
        // open interval (0, 1)
        let u: f64 = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        self.coordinate_quantile(u, theta)
    }

    fn integration_breakpoints(&self, theta: f64) -> Vec<f64> {
        let w = 40.0 * self.b;
        vec![theta - w, theta - self.b, theta, theta + self.b, theta + w]
    }

    fn is_location_family(&self) -> bool {
        true
    }

    fn score_projection_law(&self, _theta: &[f64], direction: &[f64]) -> ScalarLaw {
        // <u, S> = Σ_i u_i ε_i / b with independent Rademacher ε_i
        let b = self.b;
        let nonzero: Vec<f64> = direction.iter().copied().filter(|u| *u != 0.0).collect();
        if nonzero.len() <= LAPLACE_EXACT_DIM {
            let count = 1usize << nonzero.len();
            let atoms = (0..count)
                .map(|mask| {
                    nonzero.iter().enumerate().map(|(j, u)| if mask >> j & 1 == 1 { u / b } else { -u / b }).sum()
                })
                .collect();
            ScalarLaw::Discrete { atoms, weights: vec![1.0 / count as f64; count] }
        } else {
            ScalarLaw::Sampler {
                draw: Arc::new(move |rng: &mut SimRng| {
                    nonzero.iter().map(|u| if rng.random::<bool>() { u / b } else { -u / b }).sum()
                }),
                count: 100_000,
            }
        }
    }
}

/// A factorized prior `μ(θ) = ∏_i μ_i(θ_i)` on the parameter cube that
/// vanishes on the boundary. Coordinates are indexed from zero.
pub trait Prior: Send + Sync + fmt::Debug {
    fn space(&self) -> &ParameterSpace;

    fn name(&self) -> &'static str;

    fn coordinate_density(&self, i: usize, t: f64) -> f64;

    /// `d/dt log μ_i(t)` on the open interval.
    fn coordinate_score(&self, i: usize, t: f64) -> f64;

    /// `μ_i(t)` and `|score_i(t)|^q · μ_i(t)` evaluated near the boundary,
    /// given the distance to the nearest endpoint. The default simply uses
    /// the point itself.
    fn weighted_abs_score_power(&self, i: usize, t: f64, _gap: f64, q: f64) -> f64 {
        self.coordinate_density(i, t) * self.coordinate_score(i, t).abs().powf(q)
    }

    /// Closed form of `(E|score_i|^q)^{p-1}` when available.
    fn closed_form_information(&self, _i: usize, _order: &LossOrder) -> Option<Result<f64>> {
        None
    }

    fn sample_coordinate(&self, i: usize, rng: &mut SimRng) -> f64;

    fn density(&self, theta: &[f64]) -> Result<f64> {
        self.space().check(theta)?;
        Ok(theta.iter().enumerate().map(|(i, &t)| self.coordinate_density(i, t)).product())
    }

    fn log_density(&self, theta: &[f64]) -> Result<f64> {
        self.space().check(theta)?;
        Ok(theta.iter().enumerate().map(|(i, &t)| self.coordinate_density(i, t).ln()).sum())
    }

    /// Gradient of `log μ(θ)`; θ must lie strictly inside the cube.
    fn score(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.space().check(theta)?;
        let b = self.space().half_width();
        if let Some(t) = theta.iter().find(|t| t.abs() >= b) {
            return Err(Error::Divergence(format!("prior score is unbounded at the boundary point {t}")));
        }
        Ok(theta.iter().enumerate().map(|(i, &t)| self.coordinate_score(i, t)).collect())
    }

    fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        (0..self.space().dim()).map(|i| self.sample_coordinate(i, rng)).collect()
    }
}

/// Tabulated inverse CDF with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCdfTable {
    points: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfTable {
    /// Tabulate `cdf` on `size` equally spaced points of `[lo, hi]`.
    pub fn new(cdf: impl Fn(f64) -> f64, lo: f64, hi: f64, size: usize) -> Self {
        let size = size.max(2);
        let points: Vec<f64> = (0..size).map(|j| lo + (hi - lo) * j as f64 / (size - 1) as f64).collect();
        let mut values: Vec<f64> = points.iter().map(|&t| cdf(t)).collect();
        values[0] = 0.0;
        values[size - 1] = 1.0;
        for j in 1..size {
            values[j] = values[j].max(values[j - 1]);
        }
        Self { points, cdf: values }
    }

    pub fn invert(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (t0, t1) = (self.points[j - 1], self.points[j]);
        if c1 <= c0 {
            return t0;
        }
        t0 + (t1 - t0) * (u - c0) / (c1 - c0)
    }
}

/// Number of table points used for prior sampling.
pub const PRIOR_TABLE_SIZE: usize = 4096;

/// `μ_i(θ) = (1/B) cos²(πθ / (2B))` on every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct RaisedCosine {
    space: ParameterSpace,
    table: InverseCdfTable,
}

impl RaisedCosine {
    pub fn new(space: ParameterSpace) -> Self {
        let b = space.half_width();
        let table = InverseCdfTable::new(|t| raised_cosine_cdf(t, b), -b, b, PRIOR_TABLE_SIZE);
        Self { space, table }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        raised_cosine_cdf(t, self.space.half_width())
    }
}

fn raised_cosine_cdf(t: f64, b: f64) -> f64 {
    let t = t.clamp(-b, b);
    (t + b) / (2.0 * b) + (PI * t / b).sin() / (2.0 * PI)
}

impl Prior for RaisedCosine {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }

    fn name(&self) -> &'static str {
        "raised-cosine"
    }

    fn coordinate_density(&self, _i: usize, t: f64) -> f64 {
        let b = self.space.half_width();
        if t.abs() > b {
            return 0.0;
        }
        if t.abs() == b {
            return 0.0;
        }
        let c = (PI * t / (2.0 * b)).cos();
        c * c / b
    }

    fn coordinate_score(&self, _i: usize, t: f64) -> f64 {
        let b = self.space.half_width();
        -(PI / b) * (PI * t / (2.0 * b)).tan()
    }

    fn weighted_abs_score_power(&self, _i: usize, t: f64, gap: f64, q: f64) -> f64 {
        // near ±B write cos(πt/2B) = sin(π gap / 2B) to avoid cancellation
        let b = self.space.half_width();
        let angle = PI * gap / (2.0 * b);
        let (cos, sin) = if t.abs() > 0.5 * b {
            (angle.sin(), angle.cos())
        } else {
            let a = PI * t / (2.0 * b);
            (a.cos(), a.sin().abs())
        };
        // μ |score|^q = (1/B) cos² (π/B)^q |sin/cos|^q
        (PI / b).powf(q) / b * sin.powf(q) * cos.powf(2.0 - q)
    }

    fn closed_form_information(&self, _i: usize, order: &LossOrder) -> Option<Result<f64>> {
        Some(crate::bounds::constant_a(order.p(), self.space.half_width()).map(|a| a.powf(order.p())))
    }

    fn sample_coordinate(&self, _i: usize, rng: &mut SimRng) -> f64 {
        let u: f64 = rng.random();
        self.table.invert(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;
    use approx::assert_relative_eq;

    fn space(d: usize, b: f64) -> ParameterSpace {
        ParameterSpace::new(d, b).unwrap()
    }

    #[test]
    fn parameter_space_validation() {
        assert!(ParameterSpace::new(0, 1.0).is_err());
        assert!(ParameterSpace::new(1, 0.0).is_err());
        let s = space(2, 1.0);
        assert!(s.contains(&[1.0, -1.0]));
        assert!(!s.contains(&[1.0 + 1e-12, 0.0]));
        assert!(matches!(s.check(&[2.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(s.check(&[f64::NAN, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn loss_order_conjugate() {
        for &p in &[1.01, 1.5, 1.8, 2.0, 3.0, 7.5] {
            let o = LossOrder::new(p).unwrap();
            assert!((1.0 / o.p() + 1.0 / o.q() - 1.0).abs() < 1e-12);
            assert_eq!(o.regime() == Regime::Low, p < 2.0);
            if o.orlicz_low_valid() {
                assert_eq!(o.regime(), Regime::Low);
            }
        }
        assert!(LossOrder::new(1.0).is_err());
        assert!(LossOrder::new(1.6).unwrap().orlicz_low_valid());
        assert!(!LossOrder::new(1.4).unwrap().orlicz_low_valid());
    }

    #[test]
    fn density_mode_values() {
        let g = GaussianLocation::new(1.0, space(1, 1.0)).unwrap();
        assert_relative_eq!(g.density(&[0.0], &[0.0]).unwrap(), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
        let l = LaplaceLocation::new(1.0, space(1, 1.0)).unwrap();
        assert_relative_eq!(l.density(&[0.0], &[0.0]).unwrap(), 0.5, max_relative = 1e-15);
        assert!(matches!(g.density(&[0.0], &[1.5]), Err(Error::Domain(_))));
        assert!(matches!(g.density(&[f64::INFINITY], &[0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn gaussian_2d_density_against_normalized_oracle() {
        // Oracle: normalize exp(-x²/8) numerically on a fine grid, then take the product.
        let n = 200_000;
        let (lo, hi) = (-40.0, 40.0);
        let h = (hi - lo) / n as f64;
        let mass: f64 = (0..=n)
            .map(|j| {
                let x: f64 = lo + j as f64 * h;
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                w * (-x * x / 8.0).exp()
            })
            .sum::<f64>()
            * h;
        let one_d = (-1.0f64 / 8.0).exp() / mass;
        let g = GaussianLocation::new(2.0, space(2, 1.0)).unwrap();
        assert_relative_eq!(g.density(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), one_d * one_d, max_relative = 1e-10);
    }

    #[test]
    fn densities_integrate_to_one_and_scores_have_zero_mean() {
        let models: Vec<Box<dyn ParametricModel>> = vec![
            Box::new(GaussianLocation::new(1.3, space(1, 2.0)).unwrap()),
            Box::new(LaplaceLocation::new(0.7, space(1, 2.0)).unwrap()),
        ];
        for m in &models {
            for &t in &[-2.0, -0.4, 0.0, 1.1] {
                let pts = m.integration_breakpoints(t);
                let mass = integrate_panels(|x| m.coordinate_density(x, t), &pts, QuadSettings::tight()).unwrap();
                assert!((mass - 1.0).abs() < 1e-8, "{} mass {mass}", m.name());
                let mean_score = integrate_panels(
                    |x| m.coordinate_density(x, t) * m.coordinate_score(x, t),
                    &pts,
                    QuadSettings::tight(),
                )
                .unwrap();
                assert!(mean_score.abs() < 1e-8, "{} score mean {mean_score}", m.name());
            }
        }
    }

    #[test]
    fn score_examples() {
        let g = GaussianLocation::new(1.0, space(2, 1.0)).unwrap();
        assert_eq!(g.score(&[0.3, -0.2], &[0.3, -0.2]).unwrap(), vec![0.0, 0.0]);
        let g2 = GaussianLocation::new(2.0, space(1, 1.0)).unwrap();
        // finite difference of the log density
        let h = 1e-6;
        let fd = (g2.coordinate_density(3.0, 1.0 + h).ln() - g2.coordinate_density(3.0, 1.0 - h).ln()) / (2.0 * h);
        assert!((fd - 0.5).abs() < 1e-6);
        assert!((g2.score(&[3.0], &[1.0]).unwrap()[0] - 0.5).abs() < 1e-15);
        let l = LaplaceLocation::new(1.0, space(1, 1.0)).unwrap();
        assert_eq!(l.score(&[2.0], &[0.0]).unwrap(), vec![1.0]);
        assert_eq!(l.score(&[0.5], &[0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn score_matches_finite_differences() {
        use rand::Rng;
        let mut rng = from_seed(11);
        let g = GaussianLocation::new(0.8, space(1, 2.0)).unwrap();
        let l = LaplaceLocation::new(1.2, space(1, 2.0)).unwrap();
        let h = 1e-6;
        for _ in 0..100 {
            let t: f64 = rng.random_range(-2.0 + 1e-5..2.0 - 1e-5);
            let x: f64 = rng.random_range(-5.0..5.0);
            for m in [&g as &dyn ParametricModel, &l] {
                if (x - t).abs() < 1e-3 {
                    continue;
                }
                let fd = (m.coordinate_density(x, t + h).ln() - m.coordinate_density(x, t - h).ln()) / (2.0 * h);
                assert!((fd - m.coordinate_score(x, t)).abs() <= 1e-5, "{} x={x} t={t}", m.name());
            }
        }
    }

    #[test]
    fn sampling_moments_and_determinism() {
        let g = GaussianLocation::new(1.0, space(1, 1.0)).unwrap();
        let mut rng = from_seed(1);
        assert!(g.sample(&[0.0], 0, &mut rng).unwrap().is_empty());
        let xs = g.sample(&[0.0], 1_000_000, &mut rng).unwrap();
        let mean = xs.iter().map(|x| x[0]).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 4e-3, "mean {mean}");

        let l = LaplaceLocation::new(1.0, space(1, 1.0)).unwrap();
        let mut v: Vec<f64> =
            l.sample(&[0.5], 1_000_000, &mut from_seed(2)).unwrap().into_iter().map(|x| x[0]).collect();
        v.sort_by(f64::total_cmp);
        let median = 0.5 * (v[499_999] + v[500_000]);
        assert!((median - 0.5).abs() < 5e-3, "median {median}");

        let a = l.sample(&[0.1], 50, &mut from_seed(3)).unwrap();
        let b = l.sample(&[0.1], 50, &mut from_seed(3)).unwrap();
        assert_eq!(a, b);
        assert!(g.sample(&[3.0], 1, &mut rng).is_err());
    }

    #[test]
    fn mean_functional_derivative_is_one() {
        let g = GaussianLocation::new(1.0, space(2, 1.0)).unwrap();
        let l = LaplaceLocation::new(2.0, space(2, 1.0)).unwrap();
        assert_eq!(g.mean_functional_derivative(&[0.3, -0.7], 1), 1.0);
        assert_eq!(l.mean_functional_derivative(&[0.0, 0.0], 0), 1.0);
        // finite difference of a Monte Carlo mean with common random numbers
        let mc_mean = |t: f64| {
            let xs = g.sample(&[0.3, t], 200_000, &mut from_seed(9)).unwrap();
            xs.iter().map(|x| x[1]).sum::<f64>() / xs.len() as f64
        };
        let fd = (mc_mean(-0.6) - mc_mean(-0.8)) / 0.2;
        assert!((fd - 1.0).abs() < 1e-2);
    }

    #[test]
    fn raised_cosine_properties() {
        let s = space(3, 1.0);
        let prior = RaisedCosine::new(s);
        assert_eq!(prior.score(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        let sc = prior.score(&[0.5, 0.0, 0.0]).unwrap();
        assert_relative_eq!(sc[0], -PI, max_relative = 1e-12);
        let h = 1e-6;
        let fd = (prior.coordinate_density(0, 0.5 + h).ln() - prior.coordinate_density(0, 0.5 - h).ln()) / (2.0 * h);
        assert!((fd + PI).abs() < 1e-6);
        let p2 = RaisedCosine::new(space(1, 2.0));
        assert_relative_eq!(p2.score(&[1.0]).unwrap()[0], -PI / 2.0, max_relative = 1e-12);
        assert!(matches!(prior.score(&[1.0, 0.0, 0.0]), Err(Error::Divergence(_))));

        assert!(prior.coordinate_density(0, 1.0).abs() < 1e-12);
        assert!(prior.coordinate_density(0, -1.0).abs() < 1e-12);
        let mass =
            integrate_panels(|t| prior.coordinate_density(0, t), &[-1.0, 0.0, 1.0], QuadSettings::tight()).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
        let theta = [0.3, -0.6, 0.9];
        let total = prior.log_density(&theta).unwrap();
        let parts: f64 = theta.iter().map(|&t| prior.coordinate_density(0, t).ln()).sum();
        assert_eq!(total, parts);
    }

    #[test]
    fn raised_cosine_sampling() {
        let prior = RaisedCosine::new(space(1, 1.0));
        let mut rng = from_seed(5);
        let draws: Vec<f64> = (0..1_000_000).map(|_| prior.sample(&mut rng)[0]).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 4e-3);
        assert!(draws.iter().all(|t| t.abs() <= 1.0));
        let tail = draws.iter().filter(|t| t.abs() > 0.9).count() as f64 / draws.len() as f64;
        let exact = 2.0
            * crate::quadrature::integrate(|t| prior.coordinate_density(0, t), 0.9, 1.0, QuadSettings::tight())
                .unwrap()
                .value;
        assert!((tail - exact).abs() < 2e-3, "tail {tail} vs {exact}");
        let a = prior.sample(&mut from_seed(8));
        let b = prior.sample(&mut from_seed(8));
        assert_eq!(a, b);
    }
}
