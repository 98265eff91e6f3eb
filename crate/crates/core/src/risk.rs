//! Losses, a 1-d optimal transport oracle, and Monte Carlo risk.
//!
//! Trial `t` of a run draws from the stream `derive_seed(master_seed, t)`, so
//! results are bit-identical for any number of worker threads.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::estimate::{Estimator, SampleMeanEstimator, SimulationPlan};
use crate::models::{LossOrder, ParameterSpace, ParametricModel};
use crate::quadrature::pairwise_sum;
use crate::quantize::MessageRecord;
use crate::rng::{stream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LossKind {
    Lp,
    Wasserstein,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lp => "LP",
            Self::Wasserstein => "WASSERSTEIN",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `‖θ̂ - θ‖_p^p`.
pub fn lp_loss(estimate: &[f64], theta: &[f64], order: LossOrder) -> Result<f64> {
    if estimate.len() != theta.len() {
        return Err(input("dimension mismatch in loss"));
    }
    Ok(estimate.iter().zip(theta).map(|(a, b)| (a - b).abs().powf(order.p())).sum())
}

/// `W_p^p(f(·|θ̂), f(·|θ))` for a location family with ground metric
/// `‖·‖_p`, which equals `‖θ̂ - θ‖_p^p`.
pub fn wasserstein_location_closed_form(
    model: &dyn ParametricModel,
    estimate: &[f64],
    theta: &[f64],
    order: LossOrder,
) -> Result<f64> {
    if !model.is_location_family() {
        return Err(Error::UnsupportedModel(format!(
            "{} is not a location family; use the quantile oracle",
            model.name()
        )));
    }
    lp_loss(estimate, theta, order)
}

/// Grid for [`wasserstein_1d_quantile_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileGrid {
    /// Number of Simpson nodes; rounded up to odd.
    pub points: usize,
    /// Mass trimmed from each tail.
    pub trim: f64,
}

impl Default for QuantileGrid {
    fn default() -> Self {
        Self { points: 100_001, trim: 1e-6 }
    }
}

/// `∫ |F_P^{-1}(u) - F_Q^{-1}(u)|^p du` over the trimmed unit interval by
/// composite Simpson, with both quantiles found by inverting the CDFs.
pub fn wasserstein_1d_quantile_oracle(
    cdf_p: impl Fn(f64) -> f64,
    cdf_q: impl Fn(f64) -> f64,
    order: LossOrder,
    grid: QuantileGrid,
) -> Result<f64> {
    if !(grid.trim > 0.0 && grid.trim < 0.5) || grid.points < 3 {
        return Err(input("quantile grid needs at least 3 points and trim in (0, 1/2)"));
    }
    let points = grid.points | 1;
    let (a, b) = (grid.trim, 1.0 - grid.trim);
    let h = (b - a) / (points - 1) as f64;
    let mut inv_p = MonotoneInverse::new(&cdf_p);
    let mut inv_q = MonotoneInverse::new(&cdf_q);
    let mut terms = Vec::with_capacity(points);
    for j in 0..points {
        let u = a + h * j as f64;
        let (xp, xq) = (inv_p.invert(u)?, inv_q.invert(u)?);
        let w = if j == 0 || j == points - 1 {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(w * (xp - xq).abs().powf(order.p()));
    }
    Ok(pairwise_sum(&terms) * h / 3.0)
}

/// Inverts a continuous CDF at increasing levels, reusing the last root as
/// the start of the next bracket.
struct MonotoneInverse<'a, F: Fn(f64) -> f64> {
    cdf: &'a F,
    last: Option<f64>,
}

impl<'a, F: Fn(f64) -> f64> MonotoneInverse<'a, F> {
    fn new(cdf: &'a F) -> Self {
        Self { cdf, last: None }
    }

    fn invert(&mut self, u: f64) -> Result<f64> {
        let g = |x: f64| (self.cdf)(x) - u;
        let start = self.last.unwrap_or(0.0);
        let (mut lo, mut hi) = (start, start);
        let mut step = 1.0;
        while g(lo) > 0.0 {
            lo -= step;
            step *= 2.0;
            if step > 1e300 {
                return Err(Error::Numeric(format!("no quantile for level {u}")));
            }
        }
        step = 1e-3f64.max(if self.last.is_some() { 1e-3 } else { 1.0 });
        while g(hi) < 0.0 {
            hi += step;
            step *= 2.0;
            if step > 1e300 {
                return Err(Error::Numeric(format!("no quantile for level {u}")));
            }
        }
        let root = illinois(g, lo, hi)?;
        if !root.is_finite() {
            return Err(Error::Numeric(format!("non-finite quantile at level {u}")));
        }
        self.last = Some(root);
        Ok(root)
    }
}

/// Regula falsi with the Illinois modification on a sign-changing bracket.
fn illinois(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let (mut fa, mut fb) = (g(a), g(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = g(c);
        if fc == 0.0 || (b - a).abs() <= 1e-14 * (1.0 + c.abs()) {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// What one Monte Carlo trial produces: an estimate of `θ`.
pub trait Scheme: Sync {
    fn name(&self) -> &'static str;

    fn run_trial(&self, model: &dyn ParametricModel, theta: &[f64], n: usize, rng: &mut SimRng) -> Result<Vec<f64>>;
}

/// Draw `n` samples, encode each at its sensor, estimate.
impl<E: Estimator + ?Sized> Scheme for E {
    fn name(&self) -> &'static str {
        Estimator::name(self)
    }

    fn run_trial(&self, model: &dyn ParametricModel, theta: &[f64], n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
        let q = self.quantizer();
        let mut x = vec![0.0; theta.len()];
        let mut messages = Vec::with_capacity(n);
        for sensor in 1..=n {
            for (xi, &ti) in x.iter_mut().zip(theta) {
                *xi = model.sample_coordinate(ti, rng);
            }
            messages.push(MessageRecord { sensor, message: q.encode(sensor, &x, rng)? });
        }
        self.estimate(&messages, model)
    }
}

impl Scheme for SampleMeanEstimator {
    fn name(&self) -> &'static str {
        SampleMeanEstimator::name(self)
    }

    fn run_trial(&self, model: &dyn ParametricModel, theta: &[f64], n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
        let samples = model.sample(theta, n, rng)?;
        self.estimate_from_samples(&samples, model.space())
    }
}

/// Abort threshold for failed trials.
pub const MAX_TRIAL_FAILURES: usize = 10;

/// Monte Carlo risk at one `θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`; 0 when fewer than 2 trials.
    pub std_error: f64,
    /// Successful trials.
    pub trials: usize,
    pub failed_trials: usize,
    /// Set when `std_error` is undefined because fewer than 2 trials ran.
    pub insufficient_trials: bool,
    pub loss: LossKind,
    pub theta: Vec<f64>,
    pub order: LossOrder,
}

/// Loss evaluated on every trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTarget {
    pub loss: LossKind,
    pub order: LossOrder,
}

/// One estimate per trial, in trial order.
pub fn simulate_estimates<S: Scheme + ?Sized>(
    scheme: &S,
    model: &dyn ParametricModel,
    theta: &[f64],
    plan: &SimulationPlan,
) -> Result<Vec<Vec<f64>>> {
    model.space().check(theta)?;
    let outcomes: Vec<Result<Vec<f64>>> = (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(plan.master_seed, t as u64);
            scheme.run_trial(model, theta, plan.n, &mut rng)
        })
        .collect();
    let mut failures = 0;
    let mut last = None;
    let mut estimates = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(e) => estimates.push(e),
            Err(e) => {
                failures += 1;
                last = Some(e);
            }
        }
    }
    if failures >= MAX_TRIAL_FAILURES {
        return Err(Error::TooManyFailures { failures, last: last.map(|e| e.to_string()).unwrap_or_default() });
    }
    Ok(estimates)
}

fn loss_value(model: &dyn ParametricModel, target: LossTarget, estimate: &[f64], theta: &[f64]) -> Result<f64> {
    match target.loss {
        LossKind::Lp => lp_loss(estimate, theta, target.order),
        LossKind::Wasserstein => wasserstein_location_closed_form(model, estimate, theta, target.order),
    }
}

/// Risk summary of `estimates` under `target`.
pub fn risk_from_estimates(
    model: &dyn ParametricModel,
    estimates: &[Vec<f64>],
    theta: &[f64],
    target: LossTarget,
    failed_trials: usize,
) -> Result<RiskEstimate> {
    if estimates.is_empty() {
        return Err(input("no successful trials"));
    }
    let losses = estimates.iter().map(|e| loss_value(model, target, e, theta)).collect::<Result<Vec<_>>>()?;
    let count = losses.len();
    let mean = pairwise_sum(&losses) / count as f64;
    let (std_error, insufficient) = if count < 2 {
        (0.0, true)
    } else {
        let dev: Vec<f64> = losses.iter().map(|l| (l - mean).powi(2)).collect();
        let var = pairwise_sum(&dev) / (count - 1) as f64;
        ((var / count as f64).sqrt(), false)
    };
    Ok(RiskEstimate {
        mean,
        std_error,
        trials: count,
        failed_trials,
        insufficient_trials: insufficient,
        loss: target.loss,
        theta: theta.to_vec(),
        order: target.order,
    })
}

/// Monte Carlo risks at `θ` for several losses from one set of trials.
pub fn monte_carlo_risks<S: Scheme + ?Sized>(
    scheme: &S,
    model: &dyn ParametricModel,
    theta: &[f64],
    plan: &SimulationPlan,
    targets: &[LossTarget],
) -> Result<Vec<RiskEstimate>> {
    let estimates = simulate_estimates(scheme, model, theta, plan)?;
    let failed = plan.trials - estimates.len();
    targets.iter().map(|t| risk_from_estimates(model, &estimates, theta, *t, failed)).collect()
}

/// Monte Carlo risk at `θ`.
pub fn monte_carlo_risk<S: Scheme + ?Sized>(
    scheme: &S,
    model: &dyn ParametricModel,
    theta: &[f64],
    plan: &SimulationPlan,
    loss: LossKind,
    order: LossOrder,
) -> Result<RiskEstimate> {
    let mut v = monte_carlo_risks(scheme, model, theta, plan, &[LossTarget { loss, order }])?;
    Ok(v.remove(0))
}

/// For each target, the grid point with the largest mean risk.
pub fn worst_case_risks<S: Scheme + ?Sized>(
    scheme: &S,
    model: &dyn ParametricModel,
    plan: &SimulationPlan,
    targets: &[LossTarget],
) -> Result<Vec<RiskEstimate>> {
    if plan.theta_grid.is_empty() {
        return Err(input("theta grid must be nonempty"));
    }
    let mut best: Vec<Option<RiskEstimate>> = vec![None; targets.len()];
    for theta in &plan.theta_grid {
        let risks = monte_carlo_risks(scheme, model, theta, plan, targets)?;
        for (slot, r) in best.iter_mut().zip(risks) {
            if slot.as_ref().is_none_or(|b| r.mean > b.mean) {
                *slot = Some(r);
            }
        }
    }
    Ok(best.into_iter().map(|b| b.expect("grid is nonempty")).collect())
}

/// Worst-case risk over the plan's grid and the maximizing `θ`.
pub fn worst_case_risk<S: Scheme + ?Sized>(
    scheme: &S,
    model: &dyn ParametricModel,
    plan: &SimulationPlan,
    loss: LossKind,
    order: LossOrder,
) -> Result<(RiskEstimate, Vec<f64>)> {
    let r = worst_case_risks(scheme, model, plan, &[LossTarget { loss, order }])?.remove(0);
    let theta = r.theta.clone();
    Ok((r, theta))
}

const GRID_PER_AXIS: usize = 9;
const TENSOR_MAX_DIM: usize = 3;
const RANDOM_GRID_POINTS: usize = 200;

/// 9 points per coordinate tensorized for `d <= 3`; otherwise 200 uniform
/// points plus the corners and the center.
pub fn default_theta_grid(space: &ParameterSpace, rng: &mut SimRng) -> Vec<Vec<f64>> {
    let d = space.dim();
    let b = space.half_width();
    if d <= TENSOR_MAX_DIM {
        let axis: Vec<f64> = (0..GRID_PER_AXIS).map(|j| -b + 2.0 * b * j as f64 / (GRID_PER_AXIS - 1) as f64).collect();
        let mut grid = vec![Vec::new()];
        for _ in 0..d {
            grid = grid
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    axis.iter().map(move |&a| {
                        let mut p = prefix.clone();
                        p.push(a);
                        p
                    })
                })
                .collect();
        }
        return grid;
    }
    let mut grid: Vec<Vec<f64>> =
        (0..RANDOM_GRID_POINTS).map(|_| (0..d).map(|_| rng.random_range(-b..=b)).collect()).collect();
    if d < 20 {
        for mask in 0u64..(1 << d) {
            grid.push((0..d).map(|i| if mask >> i & 1 == 1 { b } else { -b }).collect());
        }
    }
    grid.push(vec![0.0; d]);
    grid
}
