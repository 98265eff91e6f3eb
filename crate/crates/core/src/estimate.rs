//! Fusion-center estimators: message tuples to `θ̂ ∈ Θ`.

use std::fmt;

use serde::Serialize;

use crate::error::{input, Result};
use crate::models::{ParameterSpace, ParametricModel};
use crate::quantize::{cell_mass, GridQuantizer, MessageRecord, Quantizer, SignQuantizer};

/// Maps the `n` received messages to a parameter estimate.
pub trait Estimator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// The quantizer the sensors run.
    fn quantizer(&self) -> &dyn Quantizer;

    /// Estimate before clipping to `Θ`.
    fn raw_estimate(&self, messages: &[MessageRecord], model: &dyn ParametricModel) -> Result<Vec<f64>>;

    /// Estimate clipped to `Θ`.
    fn estimate(&self, messages: &[MessageRecord], model: &dyn ParametricModel) -> Result<Vec<f64>> {
        let mut theta = self.raw_estimate(messages, model)?;
        model.space().clip(&mut theta);
        Ok(theta)
    }
}

fn check_dims(quantizer: &dyn Quantizer, model: &dyn ParametricModel) -> Result<()> {
    if quantizer.dim() != model.space().dim() {
        return Err(input(format!(
            "quantizer dimension {} differs from model dimension {}",
            quantizer.dim(),
            model.space().dim()
        )));
    }
    Ok(())
}

fn check_message(q: &dyn Quantizer, rec: &MessageRecord) -> Result<()> {
    if rec.sensor == 0 || rec.message == 0 || rec.message > q.alphabet_size() {
        return Err(input(format!("invalid message record {rec:?}")));
    }
    Ok(())
}

/// Inverts the empirical frequency of `X_i >= t` per coordinate.
///
/// For location families `θ̂_i = t - F_0^{-1}(1 - p̂_i)`; otherwise the
/// survival function is inverted in `θ` by bisection. Frequencies of 0 or 1
/// map to `-B` and `B`; coordinates no bit reads are estimated as 0.
#[derive(Debug, Clone)]
pub struct SignInversionEstimator {
    quantizer: SignQuantizer,
}

impl SignInversionEstimator {
    pub fn new(quantizer: SignQuantizer) -> Self {
        Self { quantizer }
    }

    /// Per-coordinate `(ones, total)` bit counts.
    pub fn bit_counts(&self, messages: &[MessageRecord]) -> Result<Vec<(u64, u64)>> {
        let q = &self.quantizer;
        let mut counts = vec![(0u64, 0u64); q.dim()];
        for rec in messages {
            check_message(q, rec)?;
            let code = rec.message - 1;
            for b in 0..q.bits() {
                let c = &mut counts[q.bit_coordinate(rec.sensor, b)];
                c.0 += u64::from(code >> b & 1);
                c.1 += 1;
            }
        }
        Ok(counts)
    }

    fn invert(&self, model: &dyn ParametricModel, p_hat: f64) -> f64 {
        let b = model.space().half_width();
        let t = self.quantizer.threshold();
        if p_hat <= 0.0 {
            return -b;
        }
        if p_hat >= 1.0 {
            return b;
        }
        if model.is_location_family() {
            return t - model.coordinate_quantile(1.0 - p_hat, 0.0);
        }
        // survival at t is nondecreasing in θ
        let (mut lo, mut hi) = (-b, b);
        if model.coordinate_sf(t, lo) >= p_hat {
            return lo;
        }
        if model.coordinate_sf(t, hi) <= p_hat {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if model.coordinate_sf(t, mid) < p_hat {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

impl Estimator for SignInversionEstimator {
    fn name(&self) -> &'static str {
        "sign_inversion"
    }

    fn quantizer(&self) -> &dyn Quantizer {
        &self.quantizer
    }

    fn raw_estimate(&self, messages: &[MessageRecord], model: &dyn ParametricModel) -> Result<Vec<f64>> {
        check_dims(&self.quantizer, model)?;
        let counts = self.bit_counts(messages)?;
        Ok(counts
            .iter()
            .map(|&(ones, total)| if total == 0 { 0.0 } else { self.invert(model, ones as f64 / total as f64) })
            .collect())
    }
}

const MLE_TOL: f64 = 1e-8;
const MLE_SCAN_POINTS: usize = 33;

/// Per-coordinate maximum likelihood over the grid cells, by a coarse scan
/// followed by golden-section refinement on `[-B, B]`.
#[derive(Debug, Clone)]
pub struct QuantizedMleEstimator {
    quantizer: GridQuantizer,
}

impl QuantizedMleEstimator {
    pub fn new(quantizer: GridQuantizer) -> Self {
        Self { quantizer }
    }

    /// Per-coordinate message counts, indexed by `m - 1`.
    pub fn cell_counts(&self, messages: &[MessageRecord]) -> Result<Vec<Vec<u64>>> {
        let q = &self.quantizer;
        let mut counts = vec![vec![0u64; q.alphabet_size() as usize]; q.dim()];
        for rec in messages {
            check_message(q, rec)?;
            counts[q.coordinate(rec.sensor)][(rec.message - 1) as usize] += 1;
        }
        Ok(counts)
    }

    fn log_likelihood(&self, model: &dyn ParametricModel, coord: usize, counts: &[u64], t: f64) -> f64 {
        counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(m, c)| {
                let cell = self.quantizer.cell(coord + 1, m as u32 + 1);
                *c as f64 * cell_mass(model, &cell, t).ln()
            })
            .sum()
    }

    fn maximize(&self, model: &dyn ParametricModel, coord: usize, counts: &[u64]) -> f64 {
        let space = model.space();
        let b = space.half_width();
        let occupied: Vec<usize> = counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(m, _)| m).collect();
        if occupied.is_empty() {
            return 0.0;
        }
        let last = counts.len() - 1;
        if occupied.len() == 1 && (occupied[0] == 0 || occupied[0] == last) {
            // only an overflow cell seen: the likelihood is monotone
            return if occupied[0] == 0 { -b } else { b };
        }
        let f = |t: f64| self.log_likelihood(model, coord, counts, t);
        let step = 2.0 * b / (MLE_SCAN_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..MLE_SCAN_POINTS).map(|j| -b + step * j as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        let best = values.iter().enumerate().fold(0, |acc, (j, v)| if *v > values[acc] { j } else { acc });
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(MLE_SCAN_POINTS - 1)];
        golden_section_max(f, lo, hi, MLE_TOL)
    }
}

/// Maximizer of a unimodal `f` on `[lo, hi]` to within `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

impl Estimator for QuantizedMleEstimator {
    fn name(&self) -> &'static str {
        "quantized_mle"
    }

    fn quantizer(&self) -> &dyn Quantizer {
        &self.quantizer
    }

    fn raw_estimate(&self, messages: &[MessageRecord], model: &dyn ParametricModel) -> Result<Vec<f64>> {
        check_dims(&self.quantizer, model)?;
        let counts = self.cell_counts(messages)?;
        Ok(counts.iter().enumerate().map(|(i, c)| self.maximize(model, i, c)).collect())
    }
}

/// Unquantized baseline: the coordinate-wise sample mean of the raw draws.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleMeanEstimator;

impl SampleMeanEstimator {
    pub fn name(&self) -> &'static str {
        "sample_mean"
    }

    pub fn estimate_from_samples(&self, samples: &[Vec<f64>], space: &ParameterSpace) -> Result<Vec<f64>> {
        if samples.is_empty() {
            return Err(input("no samples"));
        }
        let d = space.dim();
        let mut mean = vec![0.0; d];
        for x in samples {
            if x.len() != d {
                return Err(input("sample dimension mismatch"));
            }
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= samples.len() as f64;
        }
        space.clip(&mut mean);
        Ok(mean)
    }
}

/// Monte Carlo settings shared by every grid point of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationPlan {
    pub n: usize,
    pub k: u32,
    pub trials: usize,
    pub master_seed: u64,
    pub theta_grid: Vec<Vec<f64>>,
}

impl SimulationPlan {
    pub fn new(n: usize, k: u32, trials: usize, master_seed: u64, theta_grid: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || trials == 0 {
            return Err(input("n and trials must be at least 1"));
        }
        if theta_grid.is_empty() {
            return Err(input("theta grid must be nonempty"));
        }
        Ok(Self { n, k, trials, master_seed, theta_grid })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infogeom::fisher_trace_message;
    use crate::models::{GaussianLocation, LaplaceLocation};
    use crate::rng::from_seed;
    use crate::special::{normal_cdf, normal_pdf};

    fn space(d: usize, b: f64) -> ParameterSpace {
        ParameterSpace::new(d, b).unwrap()
    }

    fn messages(
        q: &dyn Quantizer,
        model: &dyn ParametricModel,
        theta: &[f64],
        n: usize,
        seed: u64,
    ) -> Vec<MessageRecord> {
        let mut rng = from_seed(seed);
        let xs = model.sample(theta, n, &mut rng).unwrap();
        xs.iter()
            .enumerate()
            .map(|(j, x)| MessageRecord { sensor: j + 1, message: q.encode(j + 1, x, &mut rng).unwrap() })
            .collect()
    }

    #[test]
    fn sign_inversion_edge_cases() {
        let g = GaussianLocation::new(1.0, space(2, 1.5)).unwrap();
        let est = SignInversionEstimator::new(SignQuantizer::new(1, 2).unwrap());
        // sensor 1 reads coordinate 0, sensor 2 coordinate 1
        let all_ones = [MessageRecord { sensor: 1, message: 2 }, MessageRecord { sensor: 3, message: 2 }];
        assert_eq!(est.estimate(&all_ones, &g).unwrap(), vec![1.5, 0.0]);
        let half = [
            MessageRecord { sensor: 1, message: 2 },
            MessageRecord { sensor: 3, message: 1 },
            MessageRecord { sensor: 2, message: 1 },
        ];
        let e = est.estimate(&half, &g).unwrap();
        assert!(e[0].abs() < 1e-15);
        assert_eq!(e[1], -1.5);
    }

    #[test]
    fn sign_inversion_is_consistent() {
        let g = GaussianLocation::new(1.0, space(1, 1.0)).unwrap();
        let q = SignQuantizer::new(1, 1).unwrap();
        let est = SignInversionEstimator::new(q.clone());
        let n = 100_000;
        let msgs = messages(&q, &g, &[0.5], n, 9);
        let se = (normal_cdf(0.5) * (1.0 - normal_cdf(0.5))).sqrt() / ((n as f64).sqrt() * normal_pdf(0.5));
        let e = est.estimate(&msgs, &g).unwrap();
        assert!((e[0] - 0.5).abs() < (4.0 * se).min(0.02), "{e:?}");
    }

    #[test]
    fn sign_inversion_non_location_path_agrees() {
        // Laplace through bisection must equal the closed-form inversion.
        #[derive(Debug)]
        struct Wrapped(LaplaceLocation);
        impl ParametricModel for Wrapped {
            fn space(&self) -> &ParameterSpace {
                self.0.space()
            }
            fn name(&self) -> &'static str {
                "wrapped"
            }
            fn scale(&self) -> f64 {
                self.0.scale()
            }
            fn coordinate_density(&self, x: f64, t: f64) -> f64 {
                self.0.coordinate_density(x, t)
            }
            fn coordinate_score(&self, x: f64, t: f64) -> f64 {
                self.0.coordinate_score(x, t)
            }
            fn coordinate_cdf(&self, x: f64, t: f64) -> f64 {
                self.0.coordinate_cdf(x, t)
            }
            fn coordinate_sf(&self, x: f64, t: f64) -> f64 {
                self.0.coordinate_sf(x, t)
            }
            fn coordinate_quantile(&self, u: f64, t: f64) -> f64 {
                self.0.coordinate_quantile(u, t)
            }
            fn sample_coordinate(&self, t: f64, rng: &mut crate::rng::SimRng) -> f64 {
                self.0.sample_coordinate(t, rng)
            }
            fn integration_breakpoints(&self, t: f64) -> Vec<f64> {
                self.0.integration_breakpoints(t)
            }
            fn score_projection_law(&self, t: &[f64], u: &[f64]) -> crate::infogeom::ScalarLaw {
                self.0.score_projection_law(t, u)
            }
        }
        let l = LaplaceLocation::new(0.8, space(1, 1.0)).unwrap();
        let w = Wrapped(l);
        let est = SignInversionEstimator::new(SignQuantizer::with_threshold(1, 1, 0.2).unwrap());
        for &p in &[0.2, 0.35, 0.5, 0.8] {
            let a = est.invert(&l, p);
            let b = est.invert(&w, p);
            assert!((a - b).abs() < 1e-10, "{p}: {a} vs {b}");
        }
    }

    #[test]
    fn mle_containment_and_symmetry() {
        let g = GaussianLocation::new(1.0, space(1, 1.0)).unwrap();
        let q = GridQuantizer::new(3, 1, 4.0).unwrap();
        let est = QuantizedMleEstimator::new(q.clone());
        let m0 = q.quantize_value(0.0);
        let e = est.estimate(&[MessageRecord { sensor: 1, message: m0 }], &g).unwrap();
        let (lo, hi) = q.cell_bounds(m0);
        assert!(e[0] >= lo && e[0] <= hi);

        let msgs = messages(&q, &g, &[0.4], 200, 5);
        let flipped: Vec<MessageRecord> = msgs
            .iter()
            .map(|r| MessageRecord { sensor: r.sensor, message: q.alphabet_size() + 1 - r.message })
            .collect();
        let a = est.estimate(&msgs, &g).unwrap()[0];
        let b = est.estimate(&flipped, &g).unwrap()[0];
        assert!((a + b).abs() < 1e-7, "{a} vs {b}");

        let top = [MessageRecord { sensor: 1, message: 8 }];
        assert_eq!(est.estimate(&top, &g).unwrap(), vec![1.0]);
    }

    #[test]
    fn mle_is_consistent() {
        let g = GaussianLocation::new(1.0, space(1, 1.0)).unwrap();
        let q = GridQuantizer::new(3, 1, 4.0).unwrap();
        let est = QuantizedMleEstimator::new(q.clone());
        let n = 10_000;
        let info = fisher_trace_message(&q, &g, 1, &[0.0]).unwrap();
        let envelope = 4.0 / (n as f64 * info).sqrt();
        let e = est.estimate(&messages(&q, &g, &[0.0], n, 77), &g).unwrap();
        assert!(e[0].abs() < envelope.min(0.05), "{e:?} envelope {envelope}");
    }

    #[test]
    fn equivariance_under_threshold_shift() {
        let g = GaussianLocation::new(1.0, space(1, 2.0)).unwrap();
        let theta = 0.2;
        for &delta in &[0.1, -0.3] {
            let sq = SignQuantizer::new(1, 1).unwrap();
            let sq_shift = SignQuantizer::with_threshold(1, 1, delta).unwrap();
            let se = SignInversionEstimator::new(sq.clone());
            let se_shift = SignInversionEstimator::new(sq_shift.clone());
            let a = se.raw_estimate(&messages(&sq, &g, &[theta], 500, 1), &g).unwrap()[0];
            let b = se_shift.raw_estimate(&messages(&sq_shift, &g, &[theta + delta], 500, 1), &g).unwrap()[0];
            assert!((b - a - delta).abs() < 1e-10);

            let gq = GridQuantizer::new(3, 1, 4.0).unwrap();
            let gq_shift = GridQuantizer::centered(3, 1, 4.0, delta).unwrap();
            let me = QuantizedMleEstimator::new(gq.clone());
            let me_shift = QuantizedMleEstimator::new(gq_shift.clone());
            let a = me.raw_estimate(&messages(&gq, &g, &[theta], 2000, 2), &g).unwrap()[0];
            let b = me_shift.raw_estimate(&messages(&gq_shift, &g, &[theta + delta], 2000, 2), &g).unwrap()[0];
            assert!((b - a - delta).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn mse_shrinks_with_n() {
        let g = GaussianLocation::new(1.0, space(1, 1.0)).unwrap();
        let q = SignQuantizer::new(1, 1).unwrap();
        let est = SignInversionEstimator::new(q.clone());
        let mse = |n: usize| -> f64 {
            (0..300)
                .map(|t| (est.estimate(&messages(&q, &g, &[0.3], n, 1000 + t), &g).unwrap()[0] - 0.3).powi(2))
                .sum::<f64>()
                / 300.0
        };
        assert!(mse(1000) / mse(10_000) > 5.0);
    }

    #[test]
    fn sample_mean_baseline() {
        let s = space(2, 1.0);
        let e = SampleMeanEstimator.estimate_from_samples(&[vec![0.5, 3.0], vec![0.1, 1.0]], &s).unwrap();
        assert!((e[0] - 0.3).abs() < 1e-15);
        assert_eq!(e[1], 1.0);
    }

    #[test]
    fn plan_validation() {
        assert!(SimulationPlan::new(0, 1, 10, 0, vec![vec![0.0]]).is_err());
        assert!(SimulationPlan::new(1, 1, 10, 0, vec![]).is_err());
        assert!(SimulationPlan::new(1, 1, 1, 0, vec![vec![0.0]]).is_ok());
    }
}
