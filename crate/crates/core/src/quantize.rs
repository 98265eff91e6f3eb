//! Per-sensor k-bit quantizers.
//!
//! A quantizer maps sensor `j`'s sample to a message in `1..=2^k` and exposes
//! the induced likelihood `p_j(m|θ)` and its score `∂ log p_j(m|θ) / ∂θ_i`.
//! Sensors are numbered from 1, coordinates from 0.
//!
//! Both shipped quantizers are deterministic threshold rules: every message
//! corresponds to a box `∏ [lower_i, upper_i)` over the coordinates the sensor
//! reads, so likelihoods are products of coordinate CDF differences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::models::ParametricModel;
use crate::rng::SimRng;

/// Upper limit on bits per sensor; message alphabets are enumerated.
pub const MAX_BITS: u32 = 20;

/// A message received at the fusion center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MessageRecord {
    /// Sensor index in `1..=n`.
    pub sensor: usize,
    /// Message in `1..=2^k`.
    pub message: u32,
}

pub trait Quantizer: Send + Sync + fmt::Debug {
    fn bits(&self) -> u32;

    /// Dimension of the samples the quantizer reads.
    fn dim(&self) -> usize;

    fn alphabet_size(&self) -> u32 {
        1 << self.bits()
    }

    /// Encode sensor `sensor`'s sample. Deterministic quantizers ignore `rng`.
    fn encode(&self, sensor: usize, x: &[f64], rng: &mut SimRng) -> Result<u32>;

    /// `p_sensor(m|θ)`.
    fn message_likelihood(&self, model: &dyn ParametricModel, sensor: usize, theta: &[f64], m: u32) -> Result<f64>;

    /// `∂/∂θ_i log p_sensor(m|θ)`.
    fn message_score(&self, model: &dyn ParametricModel, sensor: usize, theta: &[f64], m: u32, i: usize)
        -> Result<f64>;

    /// Likelihood of `m` together with the full score vector.
    fn message_likelihood_and_score(
        &self,
        model: &dyn ParametricModel,
        sensor: usize,
        theta: &[f64],
        m: u32,
    ) -> Result<(f64, Vec<f64>)> {
        let p = self.message_likelihood(model, sensor, theta, m)?;
        if p <= 0.0 {
            return Ok((0.0, vec![0.0; theta.len()]));
        }
        let score = (0..theta.len()).map(|i| self.message_score(model, sensor, theta, m, i)).collect::<Result<_>>()?;
        Ok((p, score))
    }

    /// Distinct coordinates whose value can change the message of `sensor`.
    fn touched_coordinates(&self, sensor: usize) -> Vec<usize>;

    /// Sensors with equal classes have identical message likelihoods.
    fn sensor_class(&self, sensor: usize) -> Vec<usize>;
}

/// Half-open box `[lower, upper)` on one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateCell {
    pub coord: usize,
    pub lower: f64,
    pub upper: f64,
}

/// `P(lower <= X_i < upper | θ_i)`.
pub fn cell_mass(model: &dyn ParametricModel, cell: &CoordinateCell, theta: f64) -> f64 {
    let (lo, hi) = (cell.lower, cell.upper);
    let mass = if lo == f64::NEG_INFINITY {
        model.coordinate_cdf(hi, theta)
    } else if hi == f64::INFINITY {
        model.coordinate_sf(lo, theta)
    } else if lo >= theta {
        model.coordinate_sf(lo, theta) - model.coordinate_sf(hi, theta)
    } else {
        model.coordinate_cdf(hi, theta) - model.coordinate_cdf(lo, theta)
    };
    mass.max(0.0)
}

/// `∂/∂θ_i P(lower <= X_i < upper | θ_i)`.
pub fn cell_mass_dtheta(model: &dyn ParametricModel, cell: &CoordinateCell, theta: f64) -> f64 {
    let edge = |x: f64| if x.is_infinite() { 0.0 } else { model.coordinate_cdf_dtheta(x, theta) };
    edge(cell.upper) - edge(cell.lower)
}

fn check_call(dim: usize, sensor: usize, theta: &[f64], model: &dyn ParametricModel) -> Result<()> {
    if sensor == 0 {
        return Err(input("sensor indices start at 1"));
    }
    if model.space().dim() != dim {
        return Err(input(format!(
            "quantizer reads {dim}-dimensional samples but the model has dimension {}",
            model.space().dim()
        )));
    }
    model.space().check(theta)
}

fn check_message(m: u32, bits: u32) -> Result<()> {
    if m == 0 || m > (1 << bits) {
        return Err(input(format!("message {m} outside the alphabet 1..={}", 1u32 << bits)));
    }
    Ok(())
}

fn boxes_likelihood(model: &dyn ParametricModel, cells: &[CoordinateCell], theta: &[f64]) -> f64 {
    cells.iter().map(|c| cell_mass(model, c, theta[c.coord])).product()
}

fn boxes_score(model: &dyn ParametricModel, cells: &[CoordinateCell], theta: &[f64], i: usize) -> f64 {
    cells
        .iter()
        .filter(|c| c.coord == i)
        .map(|c| cell_mass_dtheta(model, c, theta[i]) / cell_mass(model, c, theta[i]))
        .sum()
}

/// Each sensor sends the signs (relative to `threshold`) of `k` coordinates
/// assigned round-robin: sensor `j` reads coordinates
/// `((j-1)k + b) mod d` for `b = 0..k`.
///
/// Bit `b` of `m - 1` (least significant first) is 1 iff the `b`-th assigned
/// coordinate is `>= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignQuantizer {
    bits: u32,
    dim: usize,
    threshold: f64,
}

impl SignQuantizer {
    pub fn new(bits: u32, dim: usize) -> Result<Self> {
        Self::with_threshold(bits, dim, 0.0)
    }

    pub fn with_threshold(bits: u32, dim: usize, threshold: f64) -> Result<Self> {
        validate_bits(bits)?;
        if dim == 0 {
            return Err(input("quantizer dimension must be at least 1"));
        }
        if !threshold.is_finite() {
            return Err(input("threshold must be finite"));
        }
        Ok(Self { bits, dim, threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Coordinate read by bit `b` of sensor `sensor`.
    pub fn bit_coordinate(&self, sensor: usize, b: u32) -> usize {
        ((sensor - 1) * self.bits as usize + b as usize) % self.dim
    }

    /// The box of samples mapped to `m`, or `None` when the bit pattern is
    /// inconsistent (a coordinate read twice with different signs).
    pub fn cells(&self, sensor: usize, m: u32) -> Option<Vec<CoordinateCell>> {
        let code = m - 1;
        let mut cells: Vec<CoordinateCell> = Vec::new();
        for b in 0..self.bits {
            let coord = self.bit_coordinate(sensor, b);
            let positive = code >> b & 1 == 1;
            let cell = if positive {
                CoordinateCell { coord, lower: self.threshold, upper: f64::INFINITY }
            } else {
                CoordinateCell { coord, lower: f64::NEG_INFINITY, upper: self.threshold }
            };
            match cells.iter().find(|c| c.coord == coord) {
                Some(existing) if *existing != cell => return None,
                Some(_) => {}
                None => cells.push(cell),
            }
        }
        Some(cells)
    }
}

fn validate_bits(bits: u32) -> Result<()> {
    if bits == 0 || bits > MAX_BITS {
        return Err(input(format!("bits per sensor must be in 1..={MAX_BITS}, got {bits}")));
    }
    Ok(())
}

impl Quantizer for SignQuantizer {
    fn bits(&self) -> u32 {
        self.bits
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, sensor: usize, x: &[f64], _rng: &mut SimRng) -> Result<u32> {
        if sensor == 0 {
            return Err(input("sensor indices start at 1"));
        }
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return Err(input("sample must be finite with the quantizer's dimension"));
        }
        let mut code = 0u32;
        for b in 0..self.bits {
            if x[self.bit_coordinate(sensor, b)] >= self.threshold {
                code |= 1 << b;
            }
        }
        Ok(code + 1)
    }

    fn message_likelihood(&self, model: &dyn ParametricModel, sensor: usize, theta: &[f64], m: u32) -> Result<f64> {
        check_call(self.dim, sensor, theta, model)?;
        check_message(m, self.bits)?;
        Ok(self.cells(sensor, m).map_or(0.0, |cells| boxes_likelihood(model, &cells, theta)))
    }

    fn message_score(
        &self,
        model: &dyn ParametricModel,
        sensor: usize,
        theta: &[f64],
        m: u32,
        i: usize,
    ) -> Result<f64> {
        check_call(self.dim, sensor, theta, model)?;
        check_message(m, self.bits)?;
        let cells = self.cells(sensor, m).ok_or(Error::UndefinedScore { message: m })?;
        if boxes_likelihood(model, &cells, theta) <= 0.0 {
            return Err(Error::UndefinedScore { message: m });
        }
        Ok(boxes_score(model, &cells, theta, i))
    }

    fn message_likelihood_and_score(
        &self,
        model: &dyn ParametricModel,
        sensor: usize,
        theta: &[f64],
        m: u32,
    ) -> Result<(f64, Vec<f64>)> {
        check_call(self.dim, sensor, theta, model)?;
        check_message(m, self.bits)?;
        let Some(cells) = self.cells(sensor, m) else {
            return Ok((0.0, vec![0.0; theta.len()]));
        };
        let p = boxes_likelihood(model, &cells, theta);
        if p <= 0.0 {
            return Ok((0.0, vec![0.0; theta.len()]));
        }
        Ok((p, (0..theta.len()).map(|i| boxes_score(model, &cells, theta, i)).collect()))
    }

    fn touched_coordinates(&self, sensor: usize) -> Vec<usize> {
        let mut coords: Vec<usize> = (0..self.bits).map(|b| self.bit_coordinate(sensor, b)).collect();
        coords.sort_unstable();
        coords.dedup();
        coords
    }

    fn sensor_class(&self, sensor: usize) -> Vec<usize> {
        (0..self.bits).map(|b| self.bit_coordinate(sensor, b)).collect()
    }
}

/// Uniform scalar quantizer on one coordinate per sensor (round-robin,
/// sensor `j` reads coordinate `(j-1) mod d`).
///
/// `[c - L, c + L]` is split into `2^k - 2` equal interior cells; the two
/// remaining messages are the overflow cells below `c - L` and at or above
/// `c + L`. With `k = 1` there is a single threshold at `c`. A sample on a cell
/// edge goes to the upper cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridQuantizer {
    bits: u32,
    dim: usize,
    half_range: f64,
    center: f64,
    edges: Vec<f64>,
}

impl GridQuantizer {
    pub fn new(bits: u32, dim: usize, half_range: f64) -> Result<Self> {
        Self::centered(bits, dim, half_range, 0.0)
    }

    pub fn centered(bits: u32, dim: usize, half_range: f64, center: f64) -> Result<Self> {
        validate_bits(bits)?;
        if dim == 0 {
            return Err(input("quantizer dimension must be at least 1"));
        }
        if !(half_range > 0.0 && half_range.is_finite()) || !center.is_finite() {
            return Err(input(format!("grid half-range must be positive, got {half_range}")));
        }
        let interior = (1usize << bits) - 2;
        let edges = if interior == 0 {
            vec![center]
        } else {
            (0..=interior).map(|j| center - half_range + 2.0 * half_range * j as f64 / interior as f64).collect()
        };
        Ok(Self { bits, dim, half_range, center, edges })
    }

    /// Grid with `L = B + 3·scale`, so overflow mass stays small across the cube.
    pub fn for_model(bits: u32, model: &dyn ParametricModel) -> Result<Self> {
        let space = model.space();
        Self::new(bits, space.dim(), default_grid_half_range(space.half_width(), model.scale()))
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn coordinate(&self, sensor: usize) -> usize {
        (sensor - 1) % self.dim
    }

    /// Interval `[lower, upper)` of message `m`.
    pub fn cell_bounds(&self, m: u32) -> (f64, f64) {
        let m = m as usize;
        let lower = if m == 1 { f64::NEG_INFINITY } else { self.edges[m - 2] };
        let upper = if m > self.edges.len() { f64::INFINITY } else { self.edges[m - 1] };
        (lower, upper)
    }

    pub fn cell(&self, sensor: usize, m: u32) -> CoordinateCell {
        let (lower, upper) = self.cell_bounds(m);
        CoordinateCell { coord: self.coordinate(sensor), lower, upper }
    }

    /// Message of a scalar value on this grid.
    pub fn quantize_value(&self, v: f64) -> u32 {
        1 + self.edges.partition_point(|&e| e <= v) as u32
    }
}

pub fn default_grid_half_range(half_width: f64, scale: f64) -> f64 {
    half_width + 3.0 * scale
}

impl Quantizer for GridQuantizer {
    fn bits(&self) -> u32 {
        self.bits
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, sensor: usize, x: &[f64], _rng: &mut SimRng) -> Result<u32> {
        if sensor == 0 {
            return Err(input("sensor indices start at 1"));
        }
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return Err(input("sample must be finite with the quantizer's dimension"));
        }
        Ok(self.quantize_value(x[self.coordinate(sensor)]))
    }

    fn message_likelihood(&self, model: &dyn ParametricModel, sensor: usize, theta: &[f64], m: u32) -> Result<f64> {
        check_call(self.dim, sensor, theta, model)?;
        check_message(m, self.bits)?;
        let cell = self.cell(sensor, m);
        Ok(cell_mass(model, &cell, theta[cell.coord]))
    }

    fn message_score(
        &self,
        model: &dyn ParametricModel,
        sensor: usize,
        theta: &[f64],
        m: u32,
        i: usize,
    ) -> Result<f64> {
        check_call(self.dim, sensor, theta, model)?;
        check_message(m, self.bits)?;
        let cell = self.cell(sensor, m);
        let mass = cell_mass(model, &cell, theta[cell.coord]);
        if mass <= 0.0 {
            return Err(Error::UndefinedScore { message: m });
        }
        Ok(if cell.coord == i { cell_mass_dtheta(model, &cell, theta[i]) / mass } else { 0.0 })
    }

    fn message_likelihood_and_score(
        &self,
        model: &dyn ParametricModel,
        sensor: usize,
        theta: &[f64],
        m: u32,
    ) -> Result<(f64, Vec<f64>)> {
        check_call(self.dim, sensor, theta, model)?;
        check_message(m, self.bits)?;
        let cell = self.cell(sensor, m);
        let mass = cell_mass(model, &cell, theta[cell.coord]);
        let mut score = vec![0.0; theta.len()];
        if mass > 0.0 {
            score[cell.coord] = cell_mass_dtheta(model, &cell, theta[cell.coord]) / mass;
        }
        Ok((mass, score))
    }

    fn touched_coordinates(&self, sensor: usize) -> Vec<usize> {
        vec![self.coordinate(sensor)]
    }

    fn sensor_class(&self, sensor: usize) -> Vec<usize> {
        vec![self.coordinate(sensor)]
    }
}
