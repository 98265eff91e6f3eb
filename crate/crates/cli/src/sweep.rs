//! Sweep evaluation: bounds, information tables and Monte Carlo risks.

use std::collections::BTreeMap;
use std::time::Instant;

use quantbound::bounds::{distributed_bound, glm_bound, glm_wasserstein_bound, orlicz_bound, wasserstein_bound};
use quantbound::infogeom::{
    expected_mean_derivative, generalized_fisher_message, generalized_fisher_x, message_information_terms,
    prior_fisher_trace, prior_omega, score_projection_bound,
};
use quantbound::models::Prior;
use quantbound::risk::{default_theta_grid, worst_case_risks, LossKind, LossTarget};
use quantbound::rng::{derive_seed, from_seed};
use quantbound::{
    BoundTag, BoundValue, LossOrder, OrliczCertificate, ParametricModel, Regime, RiskEstimate, SimulationPlan,
};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Family};

/// Column order of [`ResultRow`].
pub const RESULT_COLUMNS: [&str; 30] = [
    "n",
    "k",
    "d",
    "p",
    "B",
    "scale",
    "family",
    "quantizer",
    "estimator",
    "loss",
    "T2_LOW",
    "T2_HIGH",
    "T3_LOW",
    "T3_HIGH",
    "COR2",
    "COR2_condition",
    "T4_LOW",
    "T4_HIGH",
    "COR3_LOW",
    "COR3_HIGH",
    "max_bound",
    "risk_mean",
    "risk_std_error",
    "trials",
    "argmax_theta",
    "dominance_margin",
    "dominated",
    "wall_clock_ms",
    "I0",
    "notes",
];

/// Bounds emitted for each loss, in column order.
pub fn tags_for(loss: LossKind) -> &'static [BoundTag] {
    match loss {
        LossKind::Lp => &[BoundTag::T2_LOW, BoundTag::T2_HIGH, BoundTag::T3_LOW, BoundTag::T3_HIGH, BoundTag::COR2],
        LossKind::Wasserstein => &[BoundTag::T4_LOW, BoundTag::T4_HIGH, BoundTag::COR3_LOW, BoundTag::COR3_HIGH],
    }
}

/// One sweep point `(n, k, p, loss)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: usize,
    pub k: u32,
    pub d: usize,
    pub p: f64,
    #[serde(rename = "B")]
    pub half_width: f64,
    pub scale: f64,
    pub family: String,
    pub quantizer: String,
    pub estimator: String,
    pub loss: String,
    #[serde(rename = "T2_LOW")]
    pub t2_low: Option<f64>,
    #[serde(rename = "T2_HIGH")]
    pub t2_high: Option<f64>,
    #[serde(rename = "T3_LOW")]
    pub t3_low: Option<f64>,
    #[serde(rename = "T3_HIGH")]
    pub t3_high: Option<f64>,
    #[serde(rename = "COR2")]
    pub cor2: Option<f64>,
    #[serde(rename = "COR2_condition")]
    pub cor2_condition: Option<bool>,
    #[serde(rename = "T4_LOW")]
    pub t4_low: Option<f64>,
    #[serde(rename = "T4_HIGH")]
    pub t4_high: Option<f64>,
    #[serde(rename = "COR3_LOW")]
    pub cor3_low: Option<f64>,
    #[serde(rename = "COR3_HIGH")]
    pub cor3_high: Option<f64>,
    /// Largest bound that applies: all emitted values except `COR2` when
    /// its hypothesis fails.
    pub max_bound: Option<f64>,
    pub risk_mean: Option<f64>,
    pub risk_std_error: Option<f64>,
    pub trials: Option<usize>,
    /// Semicolon-joined coordinates.
    pub argmax_theta: Option<String>,
    /// `risk_mean - max_bound`.
    pub dominance_margin: Option<f64>,
    /// `risk_mean + 4·risk_std_error >= max_bound`.
    pub dominated: Option<bool>,
    pub wall_clock_ms: u64,
    #[serde(rename = "I0")]
    pub i0: Option<f64>,
    pub notes: String,
}

impl ResultRow {
    pub fn bound(&self, tag: BoundTag) -> Option<f64> {
        match tag {
            BoundTag::T2_LOW => self.t2_low,
            BoundTag::T2_HIGH => self.t2_high,
            BoundTag::T3_LOW => self.t3_low,
            BoundTag::T3_HIGH => self.t3_high,
            BoundTag::COR2 => self.cor2,
            BoundTag::T4_LOW => self.t4_low,
            BoundTag::T4_HIGH => self.t4_high,
            BoundTag::COR3_LOW => self.cor3_low,
            BoundTag::COR3_HIGH => self.cor3_high,
            _ => None,
        }
    }

    fn set_bound(&mut self, tag: BoundTag, v: f64) {
        let slot = match tag {
            BoundTag::T2_LOW => &mut self.t2_low,
            BoundTag::T2_HIGH => &mut self.t2_high,
            BoundTag::T3_LOW => &mut self.t3_low,
            BoundTag::T3_HIGH => &mut self.t3_high,
            BoundTag::COR2 => &mut self.cor2,
            BoundTag::T4_LOW => &mut self.t4_low,
            BoundTag::T4_HIGH => &mut self.t4_high,
            BoundTag::COR3_LOW => &mut self.cor3_low,
            BoundTag::COR3_HIGH => &mut self.cor3_high,
            _ => return,
        };
        *slot = Some(v);
    }
}

/// Everything built once per run.
pub struct Context {
    pub config: ExperimentConfig,
    pub model: Box<dyn ParametricModel>,
    pub prior: Box<dyn Prior>,
    pub certificate: Result<OrliczCertificate, String>,
    pub theta_grid: Vec<Vec<f64>>,
}

const CERTIFICATE_STREAM: u64 = u64::MAX;
const GRID_STREAM: u64 = u64::MAX - 1;

impl Context {
    pub fn new(config: ExperimentConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let model = config.model()?;
        let prior = config.prior()?;
        let seed = config.simulation.master_seed;
        let o = &config.orlicz;
        let certificate = score_projection_bound(
            model.as_ref(),
            o.r,
            o.grid_resolution,
            o.directions,
            &mut from_seed(derive_seed(seed, CERTIFICATE_STREAM)),
        )
        .map_err(|e| e.to_string());
        let theta_grid = match &config.simulation.theta_grid {
            Some(g) => g.clone(),
            None => default_theta_grid(model.space(), &mut from_seed(derive_seed(seed, GRID_STREAM))),
        };
        Ok(Self { config, model, prior, certificate, theta_grid })
    }

    fn sorted_points(&self) -> (Vec<usize>, Vec<u32>, Vec<LossOrder>, Vec<LossKind>) {
        let mut ns = self.config.sweep.n.clone();
        ns.sort_unstable();
        ns.dedup();
        let mut ks = self.config.sweep.k.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut orders = self.config.orders();
        orders.sort_by(|a, b| a.p().total_cmp(&b.p()));
        orders.dedup_by(|a, b| a.p() == b.p());
        let mut losses = self.config.losses();
        losses.sort();
        losses.dedup();
        (ns, ks, orders, losses)
    }
}

/// Bounds at one `(n, k, p)` with per-bound failure notes.
#[derive(Debug, Clone, Default)]
pub struct BoundSet {
    pub values: BTreeMap<BoundTag, BoundValue>,
    pub notes: Vec<String>,
}

impl BoundSet {
    fn record(&mut self, label: &str, r: quantbound::Result<BoundValue>) {
        match r {
            Ok(v) => {
                self.values.insert(v.theorem, v);
            }
            Err(e) => self.notes.push(format!("{label}: {e}")),
        }
    }
}

pub fn compute_bounds(ctx: &Context, n: usize, k: u32, order: LossOrder) -> Result<BoundSet, ConfigError> {
    let cfg = &ctx.config;
    let model = ctx.model.as_ref();
    let prior = ctx.prior.as_ref();
    let d = cfg.space.dim;
    let b = cfg.space.half_width;
    let scale = cfg.model.scale;
    let estimator = cfg.estimator(k)?;
    let quantizer = estimator.quantizer();
    let mut set = BoundSet::default();
    let prior_tag = prior.name();

    let prior_term = match order.regime() {
        Regime::Low => prior_omega(prior, order).map(|r| r.trace),
        Regime::High => prior_fisher_trace(prior),
    };
    let terms = message_information_terms(quantizer, model, prior, n, order);
    match (prior_term, terms) {
        (Ok(pt), Ok(terms)) => {
            set.record(
                "T2",
                distributed_bound(d, &terms, pt, order).map(|v| v.with_prior(prior_tag).with_scale(scale)),
            );
            let t4 = expected_mean_derivative(model, prior)
                .and_then(|md| wasserstein_bound(d, &terms, pt, md, order))
                .map(|v| v.with_prior(prior_tag).with_scale(scale));
            set.record("T4", t4);
        }
        (Err(e), _) | (_, Err(e)) => {
            set.notes.push(format!("T2: {e}"));
            set.notes.push(format!("T4: {e}"));
        }
    }
    match &ctx.certificate {
        Ok(c) => set.record("T3", orlicz_bound(n, k, d, b, c.value, c.r, order).map(|v| v.with_scale(scale))),
        Err(e) => set.notes.push(format!("T3: {e}")),
    }
    if cfg.model.family == Family::Gaussian {
        if order.regime() == Regime::High {
            set.record("COR2", glm_bound(n, k, d, b, scale, order));
        }
        set.record("COR3", glm_wasserstein_bound(n, k, d, b, scale, order));
    }
    Ok(set)
}

fn base_row(ctx: &Context, n: usize, k: u32, order: LossOrder, loss: LossKind, bounds: &BoundSet) -> ResultRow {
    let cfg = &ctx.config;
    let mut row = ResultRow {
        n,
        k,
        d: cfg.space.dim,
        p: order.p(),
        half_width: cfg.space.half_width,
        scale: cfg.model.scale,
        family: ctx.model.name().to_string(),
        quantizer: format!("{:?}", cfg.quantizer.kind).to_lowercase(),
        estimator: match cfg.estimator_kind() {
            crate::config::EstimatorKind::SignInversion => "sign_inversion".into(),
            crate::config::EstimatorKind::QuantizedMle => "quantized_mle".into(),
        },
        loss: loss.as_str().to_string(),
        t2_low: None,
        t2_high: None,
        t3_low: None,
        t3_high: None,
        cor2: None,
        cor2_condition: None,
        t4_low: None,
        t4_high: None,
        cor3_low: None,
        cor3_high: None,
        max_bound: None,
        risk_mean: None,
        risk_std_error: None,
        trials: None,
        argmax_theta: None,
        dominance_margin: None,
        dominated: None,
        wall_clock_ms: 0,
        i0: ctx.certificate.as_ref().ok().map(|c| c.value),
        notes: String::new(),
    };
    let tags = tags_for(loss);
    let mut max: Option<f64> = None;
    for &tag in tags {
        if let Some(v) = bounds.values.get(&tag) {
            row.set_bound(tag, v.value);
            if tag == BoundTag::COR2 {
                row.cor2_condition = Some(v.condition_satisfied);
            }
            if v.condition_satisfied {
                max = Some(max.map_or(v.value, |m: f64| m.max(v.value)));
            }
        }
    }
    row.max_bound = max;
    let prefixes: Vec<&str> = match loss {
        LossKind::Lp => vec!["T2", "T3", "COR2"],
        LossKind::Wasserstein => vec!["T4", "COR3"],
    };
    row.notes = bounds
        .notes
        .iter()
        .filter(|n| prefixes.iter().any(|p| n.starts_with(&format!("{p}:"))))
        .cloned()
        .collect::<Vec<_>>()
        .join("; ");
    row
}

/// Bounds only, one row per `(n, k, p, loss)` in that sort order.
pub fn bound_rows(ctx: &Context) -> Result<Vec<ResultRow>, ConfigError> {
    let (ns, ks, orders, losses) = ctx.sorted_points();
    let mut rows = Vec::new();
    for &n in &ns {
        for &k in &ks {
            for &order in &orders {
                let bounds = compute_bounds(ctx, n, k, order)?;
                for &loss in &losses {
                    rows.push(base_row(ctx, n, k, order, loss, &bounds));
                }
            }
        }
    }
    Ok(rows)
}

/// Join coordinates with `;`.
pub fn join_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";")
}

fn attach_risk(row: &mut ResultRow, risk: &RiskEstimate) {
    row.risk_mean = Some(risk.mean);
    row.risk_std_error = Some(risk.std_error);
    row.trials = Some(risk.trials);
    row.argmax_theta = Some(join_vector(&risk.theta));
    if let Some(b) = row.max_bound {
        row.dominance_margin = Some(risk.mean - b);
        row.dominated = Some(risk.mean + 4.0 * risk.std_error >= b);
    }
    if risk.insufficient_trials {
        let note = "insufficient trials for a standard error";
        row.notes = if row.notes.is_empty() { note.into() } else { format!("{}; {note}", row.notes) };
    }
}

/// Bounds plus worst-case Monte Carlo risk over the θ grid.
pub fn simulate_rows(ctx: &Context) -> anyhow::Result<Vec<ResultRow>> {
    let cfg = &ctx.config;
    let (ns, ks, orders, losses) = ctx.sorted_points();
    let targets: Vec<LossTarget> =
        orders.iter().flat_map(|&order| losses.iter().map(move |&loss| LossTarget { loss, order })).collect();
    let mut rows = Vec::new();
    for &n in &ns {
        for &k in &ks {
            let estimator = cfg.estimator(k)?;
            let plan =
                SimulationPlan::new(n, k, cfg.simulation.trials, cfg.simulation.master_seed, ctx.theta_grid.clone())?;
            let start = Instant::now();
            let risks = worst_case_risks(estimator.as_ref(), ctx.model.as_ref(), &plan, &targets)?;
            let elapsed = if cfg.simulation.record_timing { start.elapsed().as_millis() as u64 } else { 0 };
            let mut t = 0;
            for &order in &orders {
                let bounds = compute_bounds(ctx, n, k, order)?;
                for &loss in &losses {
                    let mut row = base_row(ctx, n, k, order, loss, &bounds);
                    attach_risk(&mut row, &risks[t]);
                    row.wall_clock_ms = elapsed;
                    rows.push(row);
                    t += 1;
                }
            }
        }
    }
    Ok(rows)
}

/// Column order of [`FisherRow`].
pub const FISHER_COLUMNS: [&str; 9] = ["p", "source", "k", "sensor", "theta", "per_coordinate", "value", "r", "notes"];

/// One information quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherRow {
    pub p: Option<f64>,
    /// `RAW_X`, `MESSAGE`, `PRIOR` or `ORLICZ`.
    pub source: String,
    pub k: Option<u32>,
    pub sensor: Option<usize>,
    pub theta: Option<String>,
    pub per_coordinate: Option<String>,
    /// `Ω^(p)` trace, or `I_0` for the Orlicz row.
    pub value: Option<f64>,
    pub r: Option<f64>,
    pub notes: String,
}

impl FisherRow {
    fn empty(source: &str) -> Self {
        Self {
            p: None,
            source: source.into(),
            k: None,
            sensor: None,
            theta: None,
            per_coordinate: None,
            value: None,
            r: None,
            notes: String::new(),
        }
    }
}

/// Information of `X`, of each sensor class's message, of the prior, and
/// the Orlicz certificate.
pub fn fisher_rows(ctx: &Context) -> Result<Vec<FisherRow>, ConfigError> {
    let cfg = &ctx.config;
    let model = ctx.model.as_ref();
    let (_, ks, orders, _) = ctx.sorted_points();
    let mut rows = Vec::new();
    for &order in &orders {
        let mut prior_row = FisherRow::empty("PRIOR");
        prior_row.p = Some(order.p());
        match prior_omega(ctx.prior.as_ref(), order) {
            Ok(r) => {
                prior_row.per_coordinate = Some(join_vector(&r.per_coordinate));
                prior_row.value = Some(r.trace);
            }
            Err(e) => prior_row.notes = e.to_string(),
        }
        rows.push(prior_row);
        for theta in &ctx.theta_grid {
            let mut row = FisherRow::empty("RAW_X");
            row.p = Some(order.p());
            row.theta = Some(join_vector(theta));
            match generalized_fisher_x(model, theta, order) {
                Ok(r) => {
                    row.per_coordinate = Some(join_vector(&r.per_coordinate));
                    row.value = Some(r.trace);
                }
                Err(e) => row.notes = e.to_string(),
            }
            rows.push(row);
            for &k in &ks {
                let estimator = cfg.estimator(k)?;
                for sensor in 1..=cfg.space.dim {
                    let mut row = FisherRow::empty("MESSAGE");
                    row.p = Some(order.p());
                    row.k = Some(k);
                    row.sensor = Some(sensor);
                    row.theta = Some(join_vector(theta));
                    match generalized_fisher_message(estimator.quantizer(), model, sensor, theta, order) {
                        Ok(r) => {
                            row.per_coordinate = Some(join_vector(&r.per_coordinate));
                            row.value = Some(r.trace);
                        }
                        Err(e) => row.notes = e.to_string(),
                    }
                    rows.push(row);
                }
            }
        }
    }
    let mut cert = FisherRow::empty("ORLICZ");
    cert.r = Some(cfg.orlicz.r);
    match &ctx.certificate {
        Ok(c) => {
            cert.value = Some(c.value);
            cert.theta = Some(join_vector(&c.argmax.0));
            cert.per_coordinate = Some(join_vector(&c.argmax.1));
            cert.notes = format!("{} grid points, {} directions", c.theta_grid.len(), c.directions.len());
        }
        Err(e) => cert.notes = e.clone(),
    }
    rows.push(cert);
    Ok(rows)
}
