//! Closed-form minimax lower bounds and their constants.
//!
//! Every evaluator is a pure function of information quantities computed
//! elsewhere; none of them integrates anything. `LOW` bounds cover
//! `1 < p < 2` and `HIGH` bounds cover `p >= 2`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{domain, input, Error, Result};
use crate::models::{LossOrder, Regime};
use crate::special::{beta, gamma};

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BoundTag {
    T1_LOW,
    T1_HIGH,
    C1_LOW,
    C1_HIGH,
    T2_LOW,
    T2_HIGH,
    T3_LOW,
    T3_HIGH,
    COR2,
    T4_LOW,
    T4_HIGH,
    COR3_LOW,
    COR3_HIGH,
}

impl BoundTag {
    pub const ALL: [BoundTag; 13] = [
        Self::T1_LOW,
        Self::T1_HIGH,
        Self::C1_LOW,
        Self::C1_HIGH,
        Self::T2_LOW,
        Self::T2_HIGH,
        Self::T3_LOW,
        Self::T3_HIGH,
        Self::COR2,
        Self::T4_LOW,
        Self::T4_HIGH,
        Self::COR3_LOW,
        Self::COR3_HIGH,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::T1_LOW => "T1_LOW",
            Self::T1_HIGH => "T1_HIGH",
            Self::C1_LOW => "C1_LOW",
            Self::C1_HIGH => "C1_HIGH",
            Self::T2_LOW => "T2_LOW",
            Self::T2_HIGH => "T2_HIGH",
            Self::T3_LOW => "T3_LOW",
            Self::T3_HIGH => "T3_HIGH",
            Self::COR2 => "COR2",
            Self::T4_LOW => "T4_LOW",
            Self::T4_HIGH => "T4_HIGH",
            Self::COR3_LOW => "COR3_LOW",
            Self::COR3_HIGH => "COR3_HIGH",
        }
    }

    /// Whether the bound applies to a Wasserstein loss rather than `L_p`.
    pub fn is_wasserstein(self) -> bool {
        matches!(self, Self::T4_LOW | Self::T4_HIGH | Self::COR3_LOW | Self::COR3_HIGH)
    }

    fn pick(regime: Regime, low: Self, high: Self) -> Self {
        match regime {
            Regime::Low => low,
            Regime::High => high,
        }
    }
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Snapshot of the quantities a bound was evaluated from.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundInputs {
    pub n: Option<usize>,
    pub k: Option<u32>,
    pub d: usize,
    pub half_width: Option<f64>,
    pub p: f64,
    /// σ for Gaussian sources, `b` for Laplace.
    pub scale: Option<f64>,
    pub prior: Option<String>,
    pub i0: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub theorem: BoundTag,
    pub inputs: BoundInputs,
    /// Only meaningful for `COR2`; `true` elsewhere.
    pub condition_satisfied: bool,
}

impl BoundValue {
    fn new(value: f64, theorem: BoundTag, inputs: BoundInputs) -> Result<Self> {
        if !(value >= 0.0) || value.is_infinite() {
            return Err(Error::Numeric(format!("{theorem} evaluated to {value}")));
        }
        Ok(Self { value, theorem, inputs, condition_satisfied: true })
    }

    pub fn with_prior(mut self, tag: impl Into<String>) -> Self {
        self.inputs.prior = Some(tag.into());
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.inputs.scale = Some(scale);
        self
    }
}

fn base_inputs(d: usize, order: LossOrder) -> BoundInputs {
    BoundInputs { d, p: order.p(), ..Default::default() }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(input("dimension must be at least 1"));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(input(format!("{name} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(input(format!("{name} must be finite and positive, got {v}")));
    }
    Ok(())
}

fn positive_denominator(v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Numeric(format!("bound denominator is {v}")));
    }
    Ok(v)
}

fn require_regime(order: LossOrder, regime: Regime, what: &str) -> Result<()> {
    if order.regime() != regime {
        let need = match regime {
            Regime::Low => "1 < p < 2",
            Regime::High => "p >= 2",
        };
        return Err(domain(format!("{what} requires {need}, got p = {}", order.p())));
    }
    Ok(())
}

/// `A_p = (π/2)^{1/p} (2/B) 𝔅((2p-1)/(2p-2), (2p-3)/(2p-2))^{(p-1)/p}`.
pub fn constant_a(p: f64, half_width: f64) -> Result<f64> {
    if !(p > 1.5) {
        return Err(domain(format!("A_p requires p > 3/2, got {p}")));
    }
    check_positive("B", half_width)?;
    let u = (2.0 * p - 1.0) / (2.0 * p - 2.0);
    let v = (2.0 * p - 3.0) / (2.0 * p - 2.0);
    Ok((PI / 2.0).powf(1.0 / p) * (2.0 / half_width) * beta(u, v).powf((p - 1.0) / p))
}

/// `B_{p,d} = (2/(p-1)) d^{(2-p)/(2p)}`.
pub fn constant_b(p: f64, d: usize) -> Result<f64> {
    if !(p > 1.0) {
        return Err(domain(format!("B_(p,d) requires p > 1, got {p}")));
    }
    check_dim(d)?;
    Ok(2.0 / (p - 1.0) * (d as f64).powf((2.0 - p) / (2.0 * p)))
}

/// `D_p = 4√2 (p-1)/√3`.
pub fn constant_d(p: f64) -> f64 {
    4.0 * 2f64.sqrt() * (p - 1.0) / 3f64.sqrt()
}

/// `(C_p, D_p)` for `1 < p < 2`.
pub fn constants_cd(p: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 && p < 2.0) {
        return Err(domain(format!("C_p requires 1 < p < 2, got {p}")));
    }
    check_positive("sigma", sigma)?;
    let bracket = gamma(1.0 / (2.0 * p - 2.0)) / ((p - 1.0) * (2.0 * PI * sigma * sigma).sqrt());
    let c = (p - 1.0) * (2f64.sqrt() / sigma).powf(1.0 / p) * bracket.powf((p - 1.0) / p);
    Ok((c, constant_d(p)))
}

fn low_van_trees_denominator(d: f64, p: f64, data: f64, prior: f64) -> f64 {
    data.powf((p - 1.0) / p) + d.powf((p - 2.0) / p) * prior.powf(1.0 / p)
}

/// Average `L_p` risk bound for `1 < p < 2` from one raw sample.
///
/// `omega_x_expectation` is `E_Θ[(Ω^(p)_X(Θ))^{1/(p-1)}]`, `omega_prior` is
/// `Ω^(p)(μ)`.
pub fn van_trees_lp(d: usize, omega_x_expectation: f64, omega_prior: f64, order: LossOrder) -> Result<BoundValue> {
    require_regime(order, Regime::Low, "the raw-sample L_p bound")?;
    functional_van_trees(&vec![1.0; d], omega_x_expectation, omega_prior, order).map(|v| retag(v, BoundTag::T1_LOW))
}

/// Average `L_p` risk bound for `p >= 2`:
/// `d^{1+p/2} / (E_Θ[Tr I_X(Θ)] + Tr I(μ))^{p/2}`.
pub fn van_trees_l2_style(
    d: usize,
    fisher_trace_expectation: f64,
    prior_trace: f64,
    order: LossOrder,
) -> Result<BoundValue> {
    require_regime(order, Regime::High, "the raw-sample L_2-style bound")?;
    functional_van_trees(&vec![1.0; d], fisher_trace_expectation, prior_trace, order)
        .map(|v| retag(v, BoundTag::T1_HIGH))
}

fn retag(mut v: BoundValue, tag: BoundTag) -> BoundValue {
    v.theorem = tag;
    v
}

/// Van Trees bound for a differentiable functional `ψ(θ)`.
///
/// `psi_derivative_expectations[i] = E_Θ[∂ψ_i/∂Θ_i]`. `data` and `prior` are
/// the same denominators as in [`van_trees_lp`] (LOW) or
/// [`van_trees_l2_style`] (HIGH), chosen by the regime of `order`.
pub fn functional_van_trees(
    psi_derivative_expectations: &[f64],
    data: f64,
    prior: f64,
    order: LossOrder,
) -> Result<BoundValue> {
    let d = psi_derivative_expectations.len();
    check_dim(d)?;
    check_nonneg("data information", data)?;
    check_nonneg("prior information", prior)?;
    let p = order.p();
    let df = d as f64;
    let sum: f64 = psi_derivative_expectations.iter().sum();
    let value = match order.regime() {
        Regime::Low => {
            let den = positive_denominator(low_van_trees_denominator(df, p, data, prior))?;
            sum.abs().powf(p) / den.powf(p)
        }
        Regime::High => {
            let den = positive_denominator(data + prior)?;
            df.powf(1.0 - p / 2.0) * sum.abs().powf(p) / den.powf(p / 2.0)
        }
    };
    BoundValue::new(value, BoundTag::pick(order.regime(), BoundTag::C1_LOW, BoundTag::C1_HIGH), base_inputs(d, order))
}

/// Worst-case `L_p` risk bound for `n` quantized messages.
///
/// `per_message_terms[j]` is `E_Θ[(Ω^(p)_{M_j})^{1/(p-1)}]` (LOW) or
/// `E_Θ[Tr I_{M_j}]` (HIGH); `prior_term` is `Ω^(p)(μ)` or `Tr I(μ)`.
pub fn distributed_bound(d: usize, per_message_terms: &[f64], prior_term: f64, order: LossOrder) -> Result<BoundValue> {
    check_dim(d)?;
    check_nonneg("prior information", prior_term)?;
    for t in per_message_terms {
        check_nonneg("message information", *t)?;
    }
    let p = order.p();
    let df = d as f64;
    let value = match order.regime() {
        Regime::Low => {
            let aggregate: f64 = per_message_terms.iter().map(|t| t.powf(2.0 * (p - 1.0) / p)).sum::<f64>().sqrt();
            let den = positive_denominator(df.powf((p - 2.0) / p) * prior_term.powf(1.0 / p) + (p - 1.0) * aggregate)?;
            df.powf(p) / den.powf(p)
        }
        Regime::High => {
            let total: f64 = per_message_terms.iter().sum();
            let den = positive_denominator(total + prior_term)?;
            df.powf(1.0 + p / 2.0) / den.powf(p / 2.0)
        }
    };
    let mut inputs = base_inputs(d, order);
    inputs.n = Some(per_message_terms.len());
    BoundValue::new(value, BoundTag::pick(order.regime(), BoundTag::T2_LOW, BoundTag::T2_HIGH), inputs)
}

/// Worst-case Wasserstein-`p` risk bound: the distributed bound scaled by
/// `|E_Θ[∂/∂Θ_i E[Y_i]]|^p`.
pub fn wasserstein_bound(
    d: usize,
    per_message_terms: &[f64],
    prior_term: f64,
    mean_derivative_expectation: f64,
    order: LossOrder,
) -> Result<BoundValue> {
    if !mean_derivative_expectation.is_finite() {
        return Err(input("mean-functional derivative must be finite"));
    }
    let base = distributed_bound(d, per_message_terms, prior_term, order)?;
    let value = base.value * mean_derivative_expectation.abs().powf(order.p());
    BoundValue::new(value, BoundTag::pick(order.regime(), BoundTag::T4_LOW, BoundTag::T4_HIGH), base.inputs)
}

/// The two denominator terms of the Orlicz bound, kept separate so either
/// can be inspected or replaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrliczTerms {
    /// LOW: `√(n·I_0) k^{1/r} 2^{k(2-p)/p} B_{p,d}`; HIGH: `4 I_0² k^{2/r} n`.
    pub data: f64,
    /// LOW: `d^{(p-1)/p} A_p`; HIGH: `dπ²/B²`.
    pub prior: f64,
}

/// Intermediate terms of [`orlicz_bound`], with domain checks.
pub fn orlicz_terms(
    n: usize,
    k: u32,
    d: usize,
    half_width: f64,
    i0: f64,
    r: f64,
    order: LossOrder,
) -> Result<OrliczTerms> {
    check_dim(d)?;
    check_positive("B", half_width)?;
    check_nonneg("I_0", i0)?;
    if k == 0 {
        return Err(input("k must be at least 1"));
    }
    let p = order.p();
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    match order.regime() {
        Regime::Low => {
            if !(p > 1.5) {
                return Err(domain(format!("the Orlicz bound for p < 2 requires p > 3/2, got {p}")));
            }
            if !(r >= 1.0 / (p - 1.0)) {
                return Err(domain(format!("the Orlicz bound requires r >= 1/(p-1) = {}, got {r}", 1.0 / (p - 1.0))));
            }
            let data = (nf * i0).sqrt() * kf.powf(1.0 / r) * 2f64.powf(kf * (2.0 - p) / p) * constant_b(p, d)?;
            let prior = df.powf((p - 1.0) / p) * constant_a(p, half_width)?;
            Ok(OrliczTerms { data, prior })
        }
        Regime::High => {
            if !(r >= 1.0) {
                return Err(domain(format!("the Orlicz bound requires r >= 1, got {r}")));
            }
            let data = 4.0 * i0 * i0 * kf.powf(2.0 / r) * nf;
            let prior = df * PI * PI / (half_width * half_width);
            Ok(OrliczTerms { data, prior })
        }
    }
}

/// Evaluate the Orlicz bound from (possibly modified) terms.
pub fn orlicz_bound_from_terms(terms: OrliczTerms, d: usize, order: LossOrder) -> Result<BoundValue> {
    check_dim(d)?;
    let p = order.p();
    let df = d as f64;
    let den = positive_denominator(terms.data + terms.prior)?;
    let value = match order.regime() {
        Regime::Low => df.powf(p) / den.powf(p),
        Regime::High => df.powf(1.0 + p / 2.0) / den.powf(p / 2.0),
    };
    BoundValue::new(value, BoundTag::pick(order.regime(), BoundTag::T3_LOW, BoundTag::T3_HIGH), base_inputs(d, order))
}

/// Worst-case `L_p` bound for sources whose score projections have `Ψ_r`
/// norm at most `I_0`.
pub fn orlicz_bound(
    n: usize,
    k: u32,
    d: usize,
    half_width: f64,
    i0: f64,
    r: f64,
    order: LossOrder,
) -> Result<BoundValue> {
    let terms = orlicz_terms(n, k, d, half_width, i0, r, order)?;
    let mut v = orlicz_bound_from_terms(terms, d, order)?;
    v.inputs.n = Some(n);
    v.inputs.k = Some(k);
    v.inputs.half_width = Some(half_width);
    v.inputs.i0 = Some(i0);
    v.inputs.r = Some(r);
    Ok(v.with_prior("raised_cosine"))
}

/// Whether `π²σ²d <= n B² min{k, d}` holds.
pub fn glm_condition(n: usize, k: u32, d: usize, half_width: f64, sigma: f64) -> bool {
    PI * PI * sigma * sigma * d as f64 <= n as f64 * half_width * half_width * (k as usize).min(d) as f64
}

/// Gaussian-location bound for `p >= 2`:
/// `d^{1+p/2} max{(σ²/(nd))^{p/2}, (3σ²/(32nk))^{p/2}}`. The hypothesis is
/// reported in `condition_satisfied`, never enforced.
pub fn glm_bound(n: usize, k: u32, d: usize, half_width: f64, sigma: f64, order: LossOrder) -> Result<BoundValue> {
    require_regime(order, Regime::High, "the Gaussian-location bound")?;
    check_dim(d)?;
    check_positive("B", half_width)?;
    check_positive("sigma", sigma)?;
    if n == 0 || k == 0 {
        return Err(input("n and k must be at least 1"));
    }
    let p = order.p();
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    let s2 = sigma * sigma;
    let branch = (s2 / (nf * df)).max(3.0 * s2 / (32.0 * nf * kf));
    let value = df.powf(1.0 + p / 2.0) * branch.powf(p / 2.0);
    let mut v = BoundValue::new(value, BoundTag::COR2, glm_inputs(n, k, d, half_width, sigma, order))?;
    v.condition_satisfied = glm_condition(n, k, d, half_width, sigma);
    Ok(v)
}

fn glm_inputs(n: usize, k: u32, d: usize, half_width: f64, sigma: f64, order: LossOrder) -> BoundInputs {
    BoundInputs {
        n: Some(n),
        k: Some(k),
        d,
        half_width: Some(half_width),
        p: order.p(),
        scale: Some(sigma),
        prior: Some("raised_cosine".into()),
        i0: None,
        r: None,
    }
}

/// Gaussian-location Wasserstein-`p` bound under the raised-cosine prior.
pub fn glm_wasserstein_bound(
    n: usize,
    k: u32,
    d: usize,
    half_width: f64,
    sigma: f64,
    order: LossOrder,
) -> Result<BoundValue> {
    check_dim(d)?;
    check_positive("B", half_width)?;
    check_positive("sigma", sigma)?;
    if k == 0 {
        return Err(input("k must be at least 1"));
    }
    let p = order.p();
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    let s2 = sigma * sigma;
    let inputs = glm_inputs(n, k, d, half_width, sigma, order);
    match order.regime() {
        Regime::High => {
            let prior = df * PI * PI / (half_width * half_width);
            let a = (nf * df / s2 + prior).powf(-p / 2.0);
            let b = (32.0 * nf * kf / (3.0 * s2) + prior).powf(-p / 2.0);
            BoundValue::new(df.powf(1.0 + p / 2.0) * a.max(b), BoundTag::COR3_HIGH, inputs)
        }
        Regime::Low => {
            let a_p = constant_a(p, half_width)?;
            let (c_p, d_p) = constants_cd(p, sigma)?;
            let first = (c_p * df.powf((2.0 - p) / p) * nf.sqrt() + a_p).powf(-p);
            let second = (d_p / sigma
                * df.powf((4.0 - 3.0 * p) / (2.0 * p))
                * 2f64.powf(kf * (2.0 - p) / p)
                * kf.sqrt()
                * nf.sqrt()
                + a_p)
                .powf(-p);
            BoundValue::new(df * first.max(second), BoundTag::COR3_LOW, inputs)
        }
    }
}
