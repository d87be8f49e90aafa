//! First-principles geometric simulator used to validate the closed forms.
//!
//! Sensors are sampled as a Poisson field over a padded square window and
//! every coverage test is a raw point-to-sensor distance comparison, so the
//! estimators share no algebra with the analytic formulas they check.
//!
//! Replications draw from independent, counter-derived random streams: the
//! estimate for a fixed (seed, config) pair is bit-identical regardless of
//! how many worker threads run the replications.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::ScenarioParams;
use crate::error::{Error, Result};
use crate::model::EffectiveRadius;

/// Square observation window `[-L, L]^2` with sampling padding `P` on all
/// sides. Sensors are sampled over the padded square `[-(L+P), L+P]^2`;
/// test points stay inside the unpadded window, so any sensor that could
/// cover a test point is present as long as `P >= R(tau) + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationWindow {
    half_width: f64,
    padding: f64,
}

impl SimulationWindow {
    pub fn new(half_width: f64, padding: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter {
                name: "window half-width",
                requirement: "finite and > 0",
                value: half_width,
            });
        }
        if !(padding.is_finite() && padding >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "window padding",
                requirement: "finite and >= 0",
                value: padding,
            });
        }
        Ok(Self {
            half_width,
            padding,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn padding(&self) -> f64 {
        self.padding
    }

    pub fn padded_half_width(&self) -> f64 {
        self.half_width + self.padding
    }

    pub fn padded_area(&self) -> f64 {
        let side = 2.0 * self.padded_half_width();
        side * side
    }
}

/// Random stream for one replication, split off a master seed by stream
/// index. Streams with different indices are independent and their order
/// of use does not matter.
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
    index: u64,
}

impl RandomStream {
    pub fn replication(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        Self {
            rng,
            seed: master_seed,
            index,
        }
    }

    fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// One sampled sensor field: point locations within the padded window plus
/// the (seed, replication) pair that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRealization {
    points: Vec<[f64; 2]>,
    seed: u64,
    replication: u64,
}

impl SensorRealization {
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Poisson-distributed count: inversion by uniform products for small
/// means, rejection sampling with a Lorentzian envelope otherwise. Both
/// produce exact Poisson marginals; the split avoids underflow of
/// `e^{-mean}` for large means.
fn sample_poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    assert!(mean.is_finite() && mean >= 0.0);
    if mean == 0.0 {
        return 0;
    }
    if mean < 30.0 {
        let threshold = (-mean).exp();
        let mut count = 0u64;
        let mut product: f64 = rng.random();
        while product > threshold {
            count += 1;
            product *= rng.random::<f64>();
        }
        count
    } else {
        let sq = (2.0 * mean).sqrt();
        let log_mean = mean.ln();
        let g = mean * log_mean - libm::lgamma(mean + 1.0);
        loop {
            let mut y;
            let mut em;
            loop {
                y = (std::f64::consts::PI * rng.random::<f64>()).tan();
                em = sq * y + mean;
                if em >= 0.0 {
                    break;
                }
            }
            em = em.floor();
            let t = 0.9 * (1.0 + y * y) * (em * log_mean - libm::lgamma(em + 1.0) - g).exp();
            if rng.random::<f64>() <= t {
                return em as u64;
            }
        }
    }
}

/// Sample a homogeneous Poisson field over the padded window: the count is
/// Poisson with mean `density * padded area`, and given the count the
/// points are i.i.d. uniform. Deterministic for a fixed (seed, index).
pub fn sample_ppp(
    density: f64,
    window: &SimulationWindow,
    stream: &mut RandomStream,
) -> SensorRealization {
    assert!(
        density.is_finite() && density >= 0.0,
        "density must be finite and nonnegative, got {density}"
    );
    let count = sample_poisson_count(stream.rng(), density * window.padded_area());
    let half = window.padded_half_width();
    let points = (0..count)
        .map(|_| {
            let x = stream.rng().random_range(-half..half);
            let y = stream.rng().random_range(-half..half);
            [x, y]
        })
        .collect();
    SensorRealization {
        points,
        seed: stream.seed,
        replication: stream.index,
    }
}

/// Number of sensors whose extended zone covers `point`, by direct distance
/// test with the closed-disk convention (distance equal to the radius
/// counts as covered).
pub fn count_covering_sensors(
    point: [f64; 2],
    realization: &SensorRealization,
    radius: EffectiveRadius,
) -> usize {
    let r2 = radius.meters() * radius.meters();
    realization
        .points
        .iter()
        .filter(|p| squared_distance(point, **p) <= r2)
        .count()
}

fn squared_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Uniform-grid spatial index over a square extent, CSR layout. Cell size
/// is at least the query radius so a disk query touches at most a 3x3
/// block of cells.
struct PointGrid<'a> {
    points: &'a [[f64; 2]],
    order: Vec<u32>,
    starts: Vec<u32>,
    min: f64,
    cell: f64,
    cells_per_side: usize,
}

impl<'a> PointGrid<'a> {
    fn build(points: &'a [[f64; 2]], min: f64, max: f64, radius: f64) -> Self {
        let width = (max - min).max(f64::MIN_POSITIVE);
        let cell = radius.max(width / 512.0);
        let cells_per_side = ((width / cell).ceil() as usize).max(1);
        let n_cells = cells_per_side * cells_per_side;

        let bin = |x: f64| -> usize {
            (((x - min) / cell) as isize).clamp(0, cells_per_side as isize - 1) as usize
        };
        let cell_of = |p: &[f64; 2]| bin(p[1]) * cells_per_side + bin(p[0]);

        let mut counts = vec![0u32; n_cells + 1];
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 0..n_cells {
            counts[i + 1] += counts[i];
        }
        let starts = counts;
        let mut cursor = starts.clone();
        let mut order = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            order[cursor[c] as usize] = i as u32;
            cursor[c] += 1;
        }
        Self {
            points,
            order,
            starts,
            min,
            cell,
            cells_per_side,
        }
    }

    fn count_within(&self, z: [f64; 2], radius: f64) -> usize {
        let r2 = radius * radius;
        let side = self.cells_per_side as isize;
        let lo = |x: f64| ((((x - radius) - self.min) / self.cell).floor() as isize).max(0);
        let hi = |x: f64| ((((x + radius) - self.min) / self.cell).floor() as isize).min(side - 1);
        let (x0, x1) = (lo(z[0]), hi(z[0]));
        let (y0, y1) = (lo(z[1]), hi(z[1]));
        let mut count = 0;
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let c = (iy * side + ix) as usize;
                let range = self.starts[c] as usize..self.starts[c + 1] as usize;
                count += self.order[range]
                    .iter()
                    .filter(|&&i| squared_distance(z, self.points[i as usize]) <= r2)
                    .count();
            }
        }
        count
    }
}

/// Monte Carlo run configuration.
///
/// `test_points` is rounded down to a square stratified grid (one uniform
/// point per cell). `padding` defaults to `R(tau) + r + 1` plus any grid
/// offset, which removes window-edge bias entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub seed: u64,
    pub replications: usize,
    pub test_points: usize,
    pub half_width: f64,
    pub padding: Option<f64>,
    pub grid_offset: [f64; 2],
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 12345,
            replications: 200,
            test_points: 10_000,
            half_width: 5_000.0,
            padding: None,
            grid_offset: [0.0, 0.0],
        }
    }
}

impl SimulationConfig {
    fn grid_side(&self) -> usize {
        ((self.test_points as f64).sqrt().floor() as usize).max(1)
    }

    fn window_for(&self, params: &ScenarioParams) -> SimulationWindow {
        let offset = self.grid_offset[0].abs().max(self.grid_offset[1].abs());
        let padding = self.padding.unwrap_or_else(|| {
            params.effective_radius().meters() + params.region().radius() + 1.0 + offset
        });
        SimulationWindow::new(self.half_width, padding).expect("validated window dimensions")
    }

    fn assert_valid(&self) {
        assert!(self.replications >= 1, "need at least one replication");
        assert!(self.test_points >= 1, "need at least one test point");
        assert!(
            self.half_width.is_finite() && self.half_width > 0.0,
            "half_width must be finite and positive"
        );
    }
}

/// Expected sensors per replication for a configuration; lets callers
/// refuse runs that would materialize an unreasonable point count.
pub fn expected_sensor_count(params: &ScenarioParams, sim: &SimulationConfig) -> f64 {
    params.network().density() * sim.window_for(params).padded_area()
}

/// Monte Carlo estimate: mean across replications with the standard error
/// computed across replications (test points within a replication share a
/// realization and are correlated, so they do not enter the error).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub mean: f64,
    /// Across-replication standard error; `None` with fewer than two
    /// replications.
    pub standard_error: Option<f64>,
    pub replications: usize,
    pub samples_per_replication: usize,
}

impl MetricEstimate {
    fn from_replicates(values: &[f64], samples_per_replication: usize) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let standard_error = if n >= 2 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            Some((ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
        } else {
            None
        };
        Self {
            mean,
            standard_error,
            replications: n,
            samples_per_replication,
        }
    }

    /// `(mean - reference) / SE`; `None` when the standard error is
    /// undefined or zero.
    pub fn z_score(&self, reference: f64) -> Option<f64> {
        match self.standard_error {
            Some(se) if se > 0.0 => Some((self.mean - reference) / se),
            _ => None,
        }
    }
}

fn stratified_grid(
    rng: &mut ChaCha8Rng,
    side: usize,
    half_width: f64,
    offset: [f64; 2],
) -> Vec<[f64; 2]> {
    let step = 2.0 * half_width / side as f64;
    let mut points = Vec::with_capacity(side * side);
    for iy in 0..side {
        for ix in 0..side {
            let x = -half_width + (ix as f64 + rng.random::<f64>()) * step + offset[0];
            let y = -half_width + (iy as f64 + rng.random::<f64>()) * step + offset[1];
            points.push([x, y]);
        }
    }
    points
}

fn replicate<F>(params: &ScenarioParams, sim: &SimulationConfig, one_replication: F) -> Vec<f64>
where
    F: Fn(&SensorRealization, &mut RandomStream) -> f64 + Sync,
{
    sim.assert_valid();
    let window = sim.window_for(params);
    let density = params.network().density();
    (0..sim.replications as u64)
        .into_par_iter()
        .map(|index| {
            let mut stream = RandomStream::replication(sim.seed, index);
            let realization = sample_ppp(density, &window, &mut stream);
            one_replication(&realization, &mut stream)
        })
        .collect()
}

/// Fraction of stratified test points whose covering-sensor count satisfies
/// `accept`, estimated per replication and averaged.
fn fraction_estimate<F>(params: &ScenarioParams, sim: &SimulationConfig, accept: F) -> MetricEstimate
where
    F: Fn(usize) -> bool + Sync,
{
    let radius = params.effective_radius().meters();
    let window = sim.window_for(params);
    let side = sim.grid_side();
    let extent = window.padded_half_width();
    let values = replicate(params, sim, |realization, stream| {
        let points = stratified_grid(stream.rng(), side, sim.half_width, sim.grid_offset);
        let grid = PointGrid::build(realization.points(), -extent, extent, radius);
        let hits = points
            .iter()
            .filter(|z| accept(grid.count_within(**z, radius)))
            .count();
        hits as f64 / points.len() as f64
    });
    MetricEstimate::from_replicates(&values, side * side)
}

/// Fraction of the window covered by exactly `k` extended sensing zones.
pub fn estimate_exact_k_fraction(
    k: u64,
    params: &ScenarioParams,
    sim: &SimulationConfig,
) -> MetricEstimate {
    fraction_estimate(params, sim, |count| count as u64 == k)
}

/// Fraction covered by at least one and at most `m` zones.
pub fn estimate_at_most_m_fraction(
    m: u64,
    params: &ScenarioParams,
    sim: &SimulationConfig,
) -> MetricEstimate {
    assert!(m >= 1, "estimate_at_most_m_fraction requires m >= 1");
    fraction_estimate(params, sim, |count| count >= 1 && count as u64 <= m)
}

/// Fraction covered by at least one zone (sensed area fraction).
pub fn estimate_saf(params: &ScenarioParams, sim: &SimulationConfig) -> MetricEstimate {
    fraction_estimate(params, sim, |count| count >= 1)
}

fn intersection_count(params: &ScenarioParams, realization: &SensorRealization) -> usize {
    // a zone intersects the region iff the sensor lies within r + R(tau)
    let reach = params.region().radius() + params.effective_radius().meters();
    realization
        .points()
        .iter()
        .filter(|p| squared_distance([0.0, 0.0], **p) <= reach * reach)
        .count()
}

fn cover_count(params: &ScenarioParams, realization: &SensorRealization) -> usize {
    // containment tested by direct distance arithmetic, not by radius
    // subtraction: the sensor covers the region iff |X| + r <= R(tau)
    let radius = params.effective_radius().meters();
    let region = params.region().radius();
    realization
        .points()
        .iter()
        .filter(|p| squared_distance([0.0, 0.0], **p).sqrt() + region <= radius)
        .count()
}

fn event_estimate<F>(params: &ScenarioParams, sim: &SimulationConfig, event: F) -> MetricEstimate
where
    F: Fn(&ScenarioParams, &SensorRealization) -> bool + Sync,
{
    let values = replicate(params, sim, |realization, _| {
        event(params, realization) as u64 as f64
    });
    MetricEstimate::from_replicates(&values, 1)
}

/// Probability that exactly `m` zones intersect the region of interest.
pub fn estimate_m_intersection(
    m: u64,
    params: &ScenarioParams,
    sim: &SimulationConfig,
) -> MetricEstimate {
    event_estimate(params, sim, |p, real| {
        intersection_count(p, real) as u64 == m
    })
}

/// Probability that at least one zone intersects the region of interest.
pub fn estimate_intersection(params: &ScenarioParams, sim: &SimulationConfig) -> MetricEstimate {
    event_estimate(params, sim, |p, real| intersection_count(p, real) >= 1)
}

/// Probability that exactly `m` sensors each contain the whole region.
pub fn estimate_m_cover(
    m: u64,
    params: &ScenarioParams,
    sim: &SimulationConfig,
) -> MetricEstimate {
    event_estimate(params, sim, |p, real| cover_count(p, real) as u64 == m)
}

/// Probability that at least one sensor contains the whole region.
pub fn estimate_cover(params: &ScenarioParams, sim: &SimulationConfig) -> MetricEstimate {
    event_estimate(params, sim, |p, real| cover_count(p, real) >= 1)
}
