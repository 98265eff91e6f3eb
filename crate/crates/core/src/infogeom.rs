//! Generalized Fisher information of order `p` and `Ψ_r` Orlicz norms.
//!
//! For a score `S` and `q = p/(p-1)` the per-coordinate information is
//! `(E|S_i|^q)^{p-1}`; the trace `Ω^(p)` sums it over coordinates. At `p = 2`
//! both reduce to the classical Fisher information and its trace.
//!
//! Expectations over `X` use adaptive Gauss–Kronrod per coordinate; message
//! expectations are finite sums over the alphabet; prior expectations
//! `E_Θ[·]` integrate the prior density coordinate by coordinate.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, input, Error, Result};
use crate::models::{LossOrder, ParametricModel, Prior};
use crate::quadrature::{integrate, integrate_panels, pairwise_sum, tanh_sinh, QuadSettings};
use crate::quantize::Quantizer;
use crate::rng::{from_seed, SimRng};

/// What the information was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InfoSource {
    RawX,
    Message,
    Prior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedFisherResult {
    /// `I^(p)(θ_i)` for each coordinate.
    pub per_coordinate: Vec<f64>,
    /// `Ω^(p)`, the sum of `per_coordinate`.
    pub trace: f64,
    pub order: LossOrder,
    pub source: InfoSource,
}

impl GeneralizedFisherResult {
    fn new(per_coordinate: Vec<f64>, order: LossOrder, source: InfoSource) -> Result<Self> {
        if per_coordinate.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numeric(format!("invalid information values {per_coordinate:?}")));
        }
        let trace = pairwise_sum(&per_coordinate);
        Ok(Self { per_coordinate, trace, order, source })
    }
}

fn x_settings() -> QuadSettings {
    QuadSettings { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 2000 }
}

/// `E|S_{θ_i}(X)|^q` for one coordinate.
pub fn coordinate_score_moment(model: &dyn ParametricModel, theta_i: f64, q: f64) -> Result<f64> {
    let pts = model.integration_breakpoints(theta_i);
    integrate_panels(
        |x| {
            let f = model.coordinate_density(x, theta_i);
            if f == 0.0 {
                0.0
            } else {
                f * model.coordinate_score(x, theta_i).abs().powf(q)
            }
        },
        &pts,
        x_settings(),
    )
}

/// Generalized Fisher information of order `p` of a raw sample `X`.
pub fn generalized_fisher_x(
    model: &dyn ParametricModel,
    theta: &[f64],
    order: LossOrder,
) -> Result<GeneralizedFisherResult> {
    model.space().check(theta)?;
    let per = theta
        .iter()
        .map(|&t| coordinate_score_moment(model, t, order.q()).map(|m| m.powf(order.p() - 1.0)))
        .collect::<Result<Vec<_>>>()?;
    GeneralizedFisherResult::new(per, order, InfoSource::RawX)
}

fn two() -> LossOrder {
    LossOrder::new(2.0).expect("p = 2 is valid")
}

/// Classical Fisher information trace `Tr I_X(θ)`.
pub fn fisher_trace_x(model: &dyn ParametricModel, theta: &[f64]) -> Result<f64> {
    Ok(generalized_fisher_x(model, theta, two())?.trace)
}

/// Generalized Fisher information of order `p` of one sensor's message.
/// Zero-probability messages are skipped.
pub fn generalized_fisher_message(
    quantizer: &dyn Quantizer,
    model: &dyn ParametricModel,
    sensor: usize,
    theta: &[f64],
    order: LossOrder,
) -> Result<GeneralizedFisherResult> {
    let d = theta.len();
    let mut moments = vec![Vec::with_capacity(quantizer.alphabet_size() as usize); d];
    for m in 1..=quantizer.alphabet_size() {
        let (p, score) = quantizer.message_likelihood_and_score(model, sensor, theta, m)?;
        if p <= 0.0 {
            continue;
        }
        for (acc, s) in moments.iter_mut().zip(&score) {
            acc.push(if *s == 0.0 { 0.0 } else { p * s.abs().powf(order.q()) });
        }
    }
    let per = moments.iter().map(|v| pairwise_sum(v).powf(order.p() - 1.0)).collect();
    GeneralizedFisherResult::new(per, order, InfoSource::Message)
}

/// `Tr I_{M_j}(θ)` for one sensor.
pub fn fisher_trace_message(
    quantizer: &dyn Quantizer,
    model: &dyn ParametricModel,
    sensor: usize,
    theta: &[f64],
) -> Result<f64> {
    Ok(generalized_fisher_message(quantizer, model, sensor, theta, two())?.trace)
}

/// `Ω^(p)(μ)`; closed form where the prior has one, otherwise quadrature.
pub fn prior_omega(prior: &dyn Prior, order: LossOrder) -> Result<GeneralizedFisherResult> {
    let d = prior.space().dim();
    let per = (0..d)
        .map(|i| match prior.closed_form_information(i, &order) {
            Some(v) => v,
            None => prior_information_quadrature(prior, i, order),
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralizedFisherResult::new(per, order, InfoSource::Prior)
}

/// `Ω^(p)(μ)` by tanh-sinh quadrature regardless of any closed form.
pub fn prior_omega_quadrature(prior: &dyn Prior, order: LossOrder) -> Result<GeneralizedFisherResult> {
    let d = prior.space().dim();
    let per = (0..d).map(|i| prior_information_quadrature(prior, i, order)).collect::<Result<Vec<_>>>()?;
    GeneralizedFisherResult::new(per, order, InfoSource::Prior)
}

fn prior_information_quadrature(prior: &dyn Prior, i: usize, order: LossOrder) -> Result<f64> {
    let b = prior.space().half_width();
    let q = order.q();
    let moment = tanh_sinh(|t, gap| prior.weighted_abs_score_power(i, t, gap, q), -b, b, 1e-11)
        .map_err(|e| domain(format!("prior information of order {} does not converge ({e})", order.p())))?;
    Ok(moment.powf(order.p() - 1.0))
}

/// `Tr I(μ)`.
pub fn prior_fisher_trace(prior: &dyn Prior) -> Result<f64> {
    Ok(prior_omega(prior, two())?.trace)
}

const NESTED_MAX_DIM: usize = 3;
const PRIOR_MC_DRAWS: usize = 1 << 16;
const PRIOR_MC_SEED: u64 = 0x005E_ED0F_9A1A;

/// `E_Θ[h(Θ)]` under the prior when `h` depends only on `coords`.
///
/// `h` receives a full parameter vector whose other entries are zero. Up to
/// three coordinates are integrated by nested adaptive quadrature; beyond
/// that a fixed-seed Monte Carlo average over prior draws is used.
pub fn prior_expectation(prior: &dyn Prior, coords: &[usize], h: &dyn Fn(&[f64]) -> Result<f64>) -> Result<f64> {
    let d = prior.space().dim();
    if coords.iter().any(|&c| c >= d) {
        return Err(input("coordinate index out of range"));
    }
    let mut theta = vec![0.0; d];
    if coords.is_empty() {
        return h(&theta);
    }
    if coords.len() > NESTED_MAX_DIM {
        let mut rng = from_seed(PRIOR_MC_SEED);
        let mut values = Vec::with_capacity(PRIOR_MC_DRAWS);
        for _ in 0..PRIOR_MC_DRAWS {
            for &c in coords {
                theta[c] = prior.sample_coordinate(c, &mut rng);
            }
            values.push(h(&theta)?);
        }
        return Ok(pairwise_sum(&values) / PRIOR_MC_DRAWS as f64);
    }
    nested(prior, coords, &mut theta, h)
}

fn nested(prior: &dyn Prior, coords: &[usize], theta: &mut [f64], h: &dyn Fn(&[f64]) -> Result<f64>) -> Result<f64> {
    let b = prior.space().half_width();
    let (&c, rest) = coords.split_first().expect("non-empty");
    let settings = if rest.is_empty() {
        QuadSettings { abs_tol: 1e-13, rel_tol: 1e-10, max_subdivisions: 500 }
    } else {
        QuadSettings { abs_tol: 1e-11, rel_tol: 1e-8, max_subdivisions: 200 }
    };
    let failure = std::cell::RefCell::new(None);
    let base = theta.to_vec();
    let integrand = |t: f64| -> f64 {
        let w = prior.coordinate_density(c, t);
        if w == 0.0 {
            return 0.0;
        }
        let mut local = base.clone();
        local[c] = t;
        let value = if rest.is_empty() { h(&local) } else { nested(prior, rest, &mut local, h) };
        match value {
            Ok(v) => w * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let result = integrate_panels(integrand, &[-b, 0.0, b], settings);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    theta[c] = base[c];
    result
}

/// `E_Θ[Tr I_X(Θ)]`.
pub fn expected_fisher_trace_x(model: &dyn ParametricModel, prior: &dyn Prior) -> Result<f64> {
    let d = model.space().dim();
    if model.is_location_family() {
        return fisher_trace_x(model, &vec![0.0; d]);
    }
    let per = (0..d)
        .map(|i| prior_expectation(prior, &[i], &|t: &[f64]| coordinate_score_moment(model, t[i], 2.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&per))
}

/// `E_Θ[(Ω^(p)_X(Θ))^{1/(p-1)}]`.
pub fn expected_omega_x_power(model: &dyn ParametricModel, prior: &dyn Prior, order: LossOrder) -> Result<f64> {
    let d = model.space().dim();
    let exponent = 1.0 / (order.p() - 1.0);
    if model.is_location_family() {
        // the score law does not move with θ
        return Ok(generalized_fisher_x(model, &vec![0.0; d], order)?.trace.powf(exponent));
    }
    let coords: Vec<usize> = (0..d).collect();
    prior_expectation(prior, &coords, &|t: &[f64]| Ok(generalized_fisher_x(model, t, order)?.trace.powf(exponent)))
}

/// Per-sensor information terms entering the distributed bounds:
/// `E_Θ[(Ω^(p)_{M_j}(Θ))^{1/(p-1)}]` for `1 < p < 2`, and
/// `E_Θ[Tr I_{M_j}(Θ)]` for `p >= 2`. One entry per sensor `j = 1..=n`.
pub fn message_information_terms(
    quantizer: &dyn Quantizer,
    model: &dyn ParametricModel,
    prior: &dyn Prior,
    n: usize,
    order: LossOrder,
) -> Result<Vec<f64>> {
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut terms = Vec::with_capacity(n);
    for sensor in 1..=n {
        let class = quantizer.sensor_class(sensor);
        if let Some(&t) = cache.get(&class) {
            terms.push(t);
            continue;
        }
        let t = message_information_term(quantizer, model, prior, sensor, order)?;
        cache.insert(class, t);
        terms.push(t);
    }
    Ok(terms)
}

/// The term of [`message_information_terms`] for one sensor.
pub fn message_information_term(
    quantizer: &dyn Quantizer,
    model: &dyn ParametricModel,
    prior: &dyn Prior,
    sensor: usize,
    order: LossOrder,
) -> Result<f64> {
    let coords = quantizer.touched_coordinates(sensor);
    match order.regime() {
        crate::models::Regime::Low => {
            let exponent = 1.0 / (order.p() - 1.0);
            prior_expectation(prior, &coords, &|t: &[f64]| {
                Ok(generalized_fisher_message(quantizer, model, sensor, t, order)?.trace.powf(exponent))
            })
        }
        crate::models::Regime::High => {
            prior_expectation(prior, &coords, &|t: &[f64]| fisher_trace_message(quantizer, model, sensor, t))
        }
    }
}

/// `E_Θ[∂/∂Θ_i E[Y_i]]`, required to be the same for every coordinate.
pub fn expected_mean_derivative(model: &dyn ParametricModel, prior: &dyn Prior) -> Result<f64> {
    let d = model.space().dim();
    if model.is_location_family() {
        return Ok(1.0);
    }
    let values = (0..d)
        .map(|i| prior_expectation(prior, &[i], &|t: &[f64]| Ok(model.mean_functional_derivative(t, i))))
        .collect::<Result<Vec<_>>>()?;
    let first = values[0];
    if values.iter().any(|v| (v - first).abs() > 1e-9 * first.abs().max(1.0)) {
        return Err(Error::UnsupportedModel(format!(
            "mean-functional derivative varies across coordinates: {values:?}"
        )));
    }
    Ok(first)
}

/// Law of a scalar random variable, as needed for Orlicz norms.
#[derive(Clone)]
pub enum ScalarLaw {
    /// Centered normal with standard deviation `sd`.
    Gaussian { sd: f64 },
    /// Absolutely continuous law given by its log-density; `scale` is a
    /// typical magnitude used to lay out quadrature panels.
    Density { log_pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>, scale: f64 },
    /// Finitely supported law.
    Discrete { atoms: Vec<f64>, weights: Vec<f64> },
    /// Law known only through a sampler; realized into `count` draws.
    Sampler { draw: Arc<dyn Fn(&mut SimRng) -> f64 + Send + Sync>, count: usize },
    /// Empirical law of fixed draws.
    Samples(Vec<f64>),
}

impl fmt::Debug for ScalarLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { sd } => f.debug_struct("Gaussian").field("sd", sd).finish(),
            Self::Density { scale, .. } => f.debug_struct("Density").field("scale", scale).finish_non_exhaustive(),
            Self::Discrete { atoms, weights } => {
                f.debug_struct("Discrete").field("atoms", atoms).field("weights", weights).finish()
            }
            Self::Sampler { count, .. } => f.debug_struct("Sampler").field("count", count).finish_non_exhaustive(),
            Self::Samples(v) => f.debug_tuple("Samples").field(&v.len()).finish(),
        }
    }
}

impl ScalarLaw {
    /// Deterministic point mass at `c`.
    pub fn constant(c: f64) -> Self {
        Self::Discrete { atoms: vec![c], weights: vec![1.0] }
    }

    /// Law of `c·Z`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Gaussian { sd } => Self::Gaussian { sd: sd * c.abs() },
            Self::Density { log_pdf, scale } => {
                let inner = Arc::clone(log_pdf);
                let c_abs = c.abs();
                Self::Density { log_pdf: Arc::new(move |x| inner(x / c) - c_abs.ln()), scale: scale * c_abs }
            }
            Self::Discrete { atoms, weights } => {
                Self::Discrete { atoms: atoms.iter().map(|a| a * c).collect(), weights: weights.clone() }
            }
            Self::Sampler { draw, count } => {
                let inner = Arc::clone(draw);
                Self::Sampler { draw: Arc::new(move |rng| c * inner(rng)), count: *count }
            }
            Self::Samples(v) => Self::Samples(v.iter().map(|x| x * c).collect()),
        }
    }

    fn realize(&self, rng: &mut SimRng) -> Self {
        match self {
            Self::Sampler { draw, count } => Self::Samples((0..*count).map(|_| draw(rng)).collect()),
            other => other.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Self::Gaussian { sd } => *sd == 0.0,
            Self::Discrete { atoms, weights } => atoms.iter().zip(weights).all(|(a, w)| *a == 0.0 || *w == 0.0),
            Self::Samples(v) => v.iter().all(|x| *x == 0.0),
            _ => false,
        }
    }

    /// Bit pattern identifying laws with closed-form descriptions.
    fn fingerprint(&self) -> Option<Vec<u64>> {
        match self {
            Self::Gaussian { sd } => Some(vec![0, sd.to_bits()]),
            Self::Discrete { atoms, weights } => {
                let mut pairs: Vec<(f64, f64)> = atoms.iter().map(|a| a.abs()).zip(weights.iter().copied()).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
                let mut key = vec![1];
                for (a, w) in pairs {
                    key.push(a.to_bits());
                    key.push(w.to_bits());
                }
                Some(key)
            }
            _ => None,
        }
    }

    /// `E[exp((|Z|/K)^r)]`, `+∞` when the expectation diverges.
    pub fn orlicz_moment(&self, k: f64, r: f64) -> Result<f64> {
        let phi = |z: f64| (z.abs() / k).powf(r);
        match self {
            Self::Gaussian { sd } => {
                if *sd == 0.0 {
                    return Ok(1.0);
                }
                let sd = *sd;
                // Gaussian tails are integrable against exp((|x|/K)^r) only for
                // r < 2, or r = 2 with K² > 2σ²
                if r > 2.0 || (r == 2.0 && k * k <= 2.0 * sd * sd) {
                    return Ok(f64::INFINITY);
                }
                let log_pdf = move |x: f64| -0.5 * (x / sd).powi(2) - (sd * (2.0 * std::f64::consts::PI).sqrt()).ln();
                let half = continuous_moment(&log_pdf, sd, k, r, true)?;
                Ok(2.0 * half)
            }
            Self::Density { log_pdf, scale } => continuous_moment(log_pdf.as_ref(), *scale, k, r, false),
            Self::Discrete { atoms, weights } => {
                let terms: Vec<f64> = atoms.iter().zip(weights).map(|(a, w)| w * phi(*a).exp()).collect();
                Ok(pairwise_sum(&terms))
            }
            Self::Samples(v) => {
                if v.is_empty() {
                    return Err(input("empty sample"));
                }
                let terms: Vec<f64> = v.iter().map(|a| phi(*a).exp()).collect();
                Ok(pairwise_sum(&terms) / v.len() as f64)
            }
            Self::Sampler { .. } => Err(input("sampler laws must be realized before evaluation")),
        }
    }
}

/// `∫ exp(log_pdf(x) + (|x|/K)^r) dx` over the line (or the half-line when
/// `half` is set), truncated where the integrand is negligible.
fn continuous_moment(log_pdf: &dyn Fn(f64) -> f64, scale: f64, k: f64, r: f64, half: bool) -> Result<f64> {
    let log_integrand = |x: f64| log_pdf(x) + (x.abs() / k).powf(r);
    let cutoff = |sign: f64| -> Option<f64> {
        let peak = log_integrand(0.0);
        let mut x = scale;
        let mut prev = log_integrand(sign * x);
        for _ in 0..60 {
            let next_x = 2.0 * x;
            let next = log_integrand(sign * next_x);
            if !next.is_nan() && next < peak.max(prev) - 60.0 && next < prev {
                return Some(next_x);
            }
            if next.is_infinite() && next > 0.0 {
                return None;
            }
            prev = prev.max(next);
            x = next_x;
        }
        None
    };
    // the tail must stay negligible far beyond the cutoff, else diverge
    let regrows = |sign: f64, end: f64| -> bool {
        let threshold = log_integrand(0.0) - 60.0;
        let mut x = end;
        (0..100).any(|_| {
            x *= 2.0;
            let v = log_integrand(sign * x);
            v.is_nan() || v > threshold
        })
    };
    let settings = QuadSettings::tight();
    let integrand = |x: f64| log_integrand(x).exp();
    let side = |sign: f64| -> Result<f64> {
        let Some(end) = cutoff(sign) else {
            return Ok(f64::INFINITY);
        };
        if regrows(sign, end) {
            return Ok(f64::INFINITY);
        }
        // geometric panels capture a slowly decaying bulk
        let mut pts = vec![0.0];
        let mut x = scale / 4.0;
        while x < end {
            pts.push(x);
            x *= 2.0;
        }
        pts.push(end);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = if sign > 0.0 { (w[0], w[1]) } else { (-w[1], -w[0]) };
            match integrate(integrand, a, b, settings) {
                Ok(r) => total += r.value,
                Err(Error::Numeric(_)) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            }
        }
        Ok(total)
    };
    if half {
        side(1.0)
    } else {
        Ok(side(1.0)? + side(-1.0)?)
    }
}

const ORLICZ_K_MIN: f64 = 1e-8;
const ORLICZ_K_MAX: f64 = 1e6;
const ORLICZ_MAX_ITER: usize = 200;
const ORLICZ_REL_TOL: f64 = 1e-12;

/// `‖Z‖_{Ψ_r} = inf{K > 0 : E[exp((|Z|/K)^r)] <= 2}`.
///
/// Returns `+∞` when no `K <= 10^6` satisfies the constraint. `rng` is used
/// only for sampler laws.
pub fn orlicz_norm(law: &ScalarLaw, r: f64, rng: &mut SimRng) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(domain(format!("Orlicz exponent must satisfy r >= 1, got {r}")));
    }
    let law = law.realize(rng);
    if law.is_zero() {
        return Ok(0.0);
    }
    let satisfied = |k: f64| -> Result<bool> { Ok(law.orlicz_moment(k, r)? <= 2.0) };
    let (mut lo, mut hi) = (ORLICZ_K_MIN, ORLICZ_K_MAX);
    if !satisfied(hi)? {
        return Ok(f64::INFINITY);
    }
    if satisfied(lo)? {
        return Ok(lo);
    }
    for _ in 0..ORLICZ_MAX_ITER {
        if hi - lo <= ORLICZ_REL_TOL * hi {
            break;
        }
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if satisfied(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Certified uniform bound `I_0` on `‖<u, S_θ(X)>‖_{Ψ_r}` over a θ grid and
/// a set of unit directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczCertificate {
    pub r: f64,
    /// `I_0`.
    pub value: f64,
    pub theta_grid: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
    /// Grid point and direction attaining the maximum.
    pub argmax: (Vec<f64>, Vec<f64>),
}

impl OrliczCertificate {
    /// Alias for `value`.
    pub fn sup_value(&self) -> f64 {
        self.value
    }
}

const MAX_CERT_GRID: usize = 4096;

/// Max of the score-projection Orlicz norm over `grid_resolution` points per
/// coordinate and `direction_count` random unit directions plus the axes.
pub fn score_projection_bound(
    model: &dyn ParametricModel,
    r: f64,
    grid_resolution: usize,
    direction_count: usize,
    rng: &mut SimRng,
) -> Result<OrliczCertificate> {
    let space = model.space();
    let d = space.dim();
    let theta_grid = certificate_grid(space.half_width(), d, grid_resolution.max(1), rng);
    let mut directions: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..direction_count {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            directions.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let mut memo: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (gi, theta) in theta_grid.iter().enumerate() {
        for (di, u) in directions.iter().enumerate() {
            let law = model.score_projection_law(theta, u);
            let norm = match law.fingerprint() {
                Some(key) => match memo.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v = orlicz_norm(&law, r, rng)?;
                        memo.insert(key, v);
                        v
                    }
                },
                None => orlicz_norm(&law, r, rng)?,
            };
            if norm > best.0 {
                best = (norm, gi, di);
            }
        }
    }
    let argmax = (theta_grid[best.1].clone(), directions[best.2].clone());
    Ok(OrliczCertificate { r, value: best.0, theta_grid, directions, argmax })
}

fn certificate_grid(b: f64, d: usize, resolution: usize, rng: &mut SimRng) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if resolution == 1 {
        vec![0.0]
    } else {
        (0..resolution).map(|j| -b + 2.0 * b * j as f64 / (resolution - 1) as f64).collect()
    };
    let total = (resolution as f64).powi(d as i32);
    if total <= MAX_CERT_GRID as f64 {
        let mut grid = vec![Vec::with_capacity(d)];
        for _ in 0..d {
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&a| {
                        let mut p = prefix.clone();
                        p.push(a);
                        p
                    })
                })
                .collect();
        }
        grid
    } else {
        let mut grid = vec![vec![0.0; d]];
        grid.extend((1..MAX_CERT_GRID).map(|_| (0..d).map(|_| axis[rng.random_range(0..resolution)]).collect()));
        grid
    }
}
