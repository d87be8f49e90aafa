//! Closed-form coverage metrics and inverse deployment-planning queries.
//!
//! Every metric reduces to a Poisson count over a disk whose radius is the
//! tolerance-extended sensing radius, possibly dilated or eroded by the
//! region of interest. The Monte Carlo estimators in [`crate::montecarlo`]
//! validate each formula from raw geometry.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    poisson_pmf, EffectiveRadius, NetworkModel, RegionOfInterest, ToleranceProfile,
};

/// Parameter set shared by all metrics: the network, the spatial profile,
/// the allowed sensing tolerance, and the region of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams {
    net: NetworkModel,
    profile: ToleranceProfile,
    tolerance: f64,
    region: RegionOfInterest,
}

impl ScenarioParams {
    pub fn new(
        net: NetworkModel,
        profile: ToleranceProfile,
        tolerance: f64,
        region: RegionOfInterest,
    ) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                requirement: "finite and >= 0",
                value: tolerance,
            });
        }
        Ok(Self {
            net,
            profile,
            tolerance,
            region,
        })
    }

    pub fn network(&self) -> &NetworkModel {
        &self.net
    }

    pub fn profile(&self) -> &ToleranceProfile {
        &self.profile
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn region(&self) -> &RegionOfInterest {
        &self.region
    }

    pub fn effective_radius(&self) -> EffectiveRadius {
        self.net.effective_radius(self.tolerance, &self.profile)
    }

    /// Same scenario with the tolerance forced to zero (native sensing only).
    pub fn without_tolerance(&self) -> Self {
        Self {
            tolerance: 0.0,
            ..*self
        }
    }

    /// Mean number of sensors whose extended zone covers a fixed point:
    /// `lambda * pi * R(tau)^2`.
    fn point_mean(&self) -> f64 {
        let r = self.effective_radius().meters();
        self.net.density() * PI * r * r
    }

    /// Mean number of sensors whose extended zone intersects the region:
    /// sensors within the dilated disk of radius `R(tau) + r`.
    fn intersection_mean(&self) -> f64 {
        let reach = self.effective_radius().meters() + self.region.radius();
        self.net.density() * PI * reach * reach
    }

    /// Mean number of sensors whose extended zone contains the whole region:
    /// sensors within the eroded disk of radius `R(tau) - r`, which is empty
    /// unless `R(tau) > r`.
    fn containment_mean(&self) -> Option<f64> {
        let slack = self.effective_radius().meters() - self.region.radius();
        if slack > 0.0 {
            Some(self.net.density() * PI * slack * slack)
        } else {
            None
        }
    }

    /// Probability that a point is covered by exactly `k` extended sensing
    /// zones: the Poisson pmf of the count of sensors within `R(tau)` of the
    /// point, with the (positive) mean `lambda * pi * R(tau)^2`.
    pub fn exact_k_coverage_prob(&self, k: u64) -> f64 {
        poisson_pmf(k, self.point_mean())
    }

    /// Expected fraction of the region covered by at least one and at most
    /// `m` extended sensing zones. The vacant event is excluded, so this is
    /// `P(1 <= N <= m)` for the point-coverage count `N`.
    pub fn at_most_m_saf(&self, m: u64) -> f64 {
        assert!(m >= 1, "at_most_m_saf requires m >= 1");
        let mean = self.point_mean();
        (1..=m).map(|k| poisson_pmf(k, mean)).sum()
    }

    /// Sensed area fraction: expected fraction of the region covered by at
    /// least one extended sensing zone, `1 - exp(-lambda pi R(tau)^2)`.
    pub fn saf(&self) -> f64 {
        -(-self.point_mean()).exp_m1()
    }

    /// Expected uncovered fraction, the complement of [`saf`](Self::saf).
    pub fn vacancy(&self) -> f64 {
        (-self.point_mean()).exp()
    }

    /// Coverage improvement factor: sensed area fraction with tolerance
    /// relative to the native (zero-tolerance) one. Undefined when the
    /// baseline fraction is zero.
    pub fn cif(&self) -> Result<f64> {
        if self.net.density() == 0.0 || self.net.sensing_radius() == 0.0 {
            return Err(Error::DegenerateBaseline);
        }
        let with_tolerance = (-self.point_mean()).exp_m1();
        let baseline = (-self.without_tolerance().point_mean()).exp_m1();
        Ok(with_tolerance / baseline)
    }

    /// Probability that exactly `m` extended sensing zones intersect the
    /// region: Poisson pmf with mean `lambda pi (R(tau) + r)^2`.
    pub fn m_intersection_prob(&self, m: u64) -> f64 {
        poisson_pmf(m, self.intersection_mean())
    }

    /// Probability that at least one extended sensing zone intersects the
    /// region.
    pub fn intersection_prob(&self) -> f64 {
        -(-self.intersection_mean()).exp_m1()
    }

    /// Probability that exactly `m` sensors each cover the entire region.
    /// A single sensor can contain the region only when `R(tau) > r`;
    /// otherwise the count is zero with probability one.
    pub fn m_cover_prob(&self, m: u64) -> f64 {
        match self.containment_mean() {
            Some(mean) => poisson_pmf(m, mean),
            None => {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Probability that at least one sensor covers the entire region.
    pub fn cover_prob(&self) -> f64 {
        match self.containment_mean() {
            Some(mean) => -(-mean).exp_m1(),
            None => 0.0,
        }
    }
}

/// Density maximizing the exact-`m` intersection probability, together with
/// the value of that maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityOptimum {
    /// Sensors per square meter.
    pub density: f64,
    /// Peak probability `m^m e^{-m} / m!`: the Poisson pmf with mean `m`
    /// evaluated at `m` (for `m = 1` this reduces to `e^{-1}`). The peak
    /// does not depend on the region radius, which only shifts the density
    /// at which it is reached.
    pub peak_probability: f64,
}

/// Density that maximizes the probability of exactly `m` extended sensing
/// zones intersecting the region: `m / (pi (R(tau) + r)^2)`.
pub fn optimal_density(
    m: u64,
    net: &NetworkModel,
    profile: &ToleranceProfile,
    tolerance: f64,
    region: &RegionOfInterest,
) -> DensityOptimum {
    assert!(m >= 1, "optimal_density requires m >= 1");
    let reach = net.effective_radius(tolerance, profile).meters() + region.radius();
    assert!(reach > 0.0, "optimal_density requires R(tau) + r > 0");
    DensityOptimum {
        density: m as f64 / (PI * reach * reach),
        peak_probability: poisson_pmf(m, m as f64),
    }
}

/// Density required to reach a target sensed area fraction. Exact inverse
/// of [`ScenarioParams::saf`]: `-ln(1 - target) / (pi R(tau)^2)`.
pub fn required_density(
    target_saf: f64,
    net: &NetworkModel,
    profile: &ToleranceProfile,
    tolerance: f64,
) -> Result<f64> {
    if !(target_saf.is_finite() && 0.0 < target_saf && target_saf < 1.0) {
        return Err(Error::TargetOutOfRange(target_saf));
    }
    let radius = net.effective_radius(tolerance, profile).meters();
    if radius <= 0.0 {
        return Err(Error::ZeroEffectiveRadius);
    }
    Ok(-(-target_saf).ln_1p() / (PI * radius * radius))
}

/// Density at which the coverage improvement factor equals `target`.
///
/// The factor decreases strictly in density from `(R(tau)/R_S)^2` toward 1,
/// so a unique solution exists whenever `1 < target < (R(tau)/R_S)^2`;
/// located by bisection over log-density.
pub fn density_for_cif(
    target: f64,
    net: &NetworkModel,
    profile: &ToleranceProfile,
    tolerance: f64,
) -> Result<f64> {
    if net.sensing_radius() == 0.0 {
        return Err(Error::DegenerateBaseline);
    }
    let extended = net.effective_radius(tolerance, profile).meters();
    let ratio = extended / net.sensing_radius();
    let limit = ratio * ratio;
    if !(target.is_finite() && target > 1.0 && target < limit) {
        return Err(Error::UnattainableImprovement { target, limit });
    }

    let region = RegionOfInterest::new(0.0).expect("zero radius is valid");
    let cif_at = |density: f64| -> f64 {
        let net = NetworkModel::new(density, net.sensing_radius()).expect("positive density");
        ScenarioParams::new(net, *profile, tolerance, region)
            .expect("validated tolerance")
            .cif()
            .expect("positive density and radius")
    };

    let mut lo = 1e-30_f64;
    let mut hi = 1e30_f64;
    debug_assert!(cif_at(lo) > target && cif_at(hi) < target);
    // bisect on log-density until the bracket collapses in relative terms
    for _ in 0..500 {
        let mid = (lo.ln() + hi.ln()) / 2.0;
        let mid = mid.exp();
        if cif_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) / lo < 1e-14 {
            break;
        }
    }
    Ok((lo.ln() / 2.0 + hi.ln() / 2.0).exp())
}
