//! Domain types for the sensing model: the spatial variation profile of the
//! sensed variable, the sensor network, the region of interest, and the
//! Poisson pmf shared by all closed-form metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial variation profile of the sensed environmental variable.
///
/// The profile bounds how much the variable can differ between two locations
/// a given distance apart. A bounded, invertible profile lets a sensor's
/// reading stand in for nearby unsensed points within a chosen tolerance,
/// which is what extends the usable sensing radius.
///
/// The exponential form is the only built-in; the enum is the extension
/// point for other invertible nondecreasing forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ToleranceProfile {
    /// Uncertainty `A * exp(w * d)` at distance `d > 0`, exactly zero at
    /// `d = 0`. `rate` is the spatial variation rate per meter; lower means
    /// a slower-varying field and a larger usable extension.
    Exponential { amplitude: f64, rate: f64 },
    /// No usable profile information (infinitely fast variation): the value
    /// is completely uncertain beyond the native sensing range, so no radius
    /// extension is possible at any tolerance.
    NoProfile,
}

impl ToleranceProfile {
    /// Exponential profile with amplitude `A > 0` and variation rate `w > 0`.
    pub fn exponential(amplitude: f64, rate: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                requirement: "finite and > 0",
                value: amplitude,
            });
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rate",
                requirement: "finite and > 0",
                value: rate,
            });
        }
        Ok(Self::Exponential { amplitude, rate })
    }

    /// Profile carrying no spatial information.
    pub const fn no_profile() -> Self {
        Self::NoProfile
    }

    /// Upper bound on the variable's change over `distance` meters.
    ///
    /// Zero at distance zero; the exponential form jumps to `A` as the
    /// distance leaves zero, which is why tolerances up to `A` buy no
    /// extra radius. Without a profile the bound is infinite beyond zero.
    pub fn tolerance_bound(&self, distance: f64) -> f64 {
        assert!(
            distance.is_finite() && distance >= 0.0,
            "distance must be finite and nonnegative, got {distance}"
        );
        if distance == 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { amplitude, rate } => amplitude * (rate * distance).exp(),
            Self::NoProfile => f64::INFINITY,
        }
    }

    /// Largest distance at which the variable is still known within
    /// `tolerance` of a measured value: the inverse of [`tolerance_bound`]
    /// in its first argument.
    ///
    /// For the exponential form this is `ln(tolerance / A) / w` when
    /// `tolerance > A` and zero otherwise; without a profile it is zero for
    /// every tolerance.
    ///
    /// [`tolerance_bound`]: Self::tolerance_bound
    pub fn tolerance_radius(&self, tolerance: f64) -> f64 {
        assert!(
            tolerance.is_finite() && tolerance >= 0.0,
            "tolerance must be finite and nonnegative, got {tolerance}"
        );
        match *self {
            Self::Exponential { amplitude, rate } if tolerance > amplitude => {
                (tolerance / amplitude).ln() / rate
            }
            _ => 0.0,
        }
    }
}

/// Sensor deployment: a stationary Poisson field of sensors with a common
/// circular sensing region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    density: f64,
    sensing_radius: f64,
}

impl NetworkModel {
    /// `density` in sensors per square meter, `sensing_radius` in meters.
    pub fn new(density: f64, sensing_radius: f64) -> Result<Self> {
        if !(density.is_finite() && density >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "density",
                requirement: "finite and >= 0",
                value: density,
            });
        }
        if !(sensing_radius.is_finite() && sensing_radius >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sensing_radius",
                requirement: "finite and >= 0",
                value: sensing_radius,
            });
        }
        Ok(Self {
            density,
            sensing_radius,
        })
    }

    /// Sensors per square meter.
    pub fn density(&self) -> f64 {
        self.density
    }

    /// Native sensing radius in meters.
    pub fn sensing_radius(&self) -> f64 {
        self.sensing_radius
    }

    /// Radius within which the variable is known to accuracy `tolerance`:
    /// the native radius plus the profile's tolerance radius.
    pub fn effective_radius(&self, tolerance: f64, profile: &ToleranceProfile) -> EffectiveRadius {
        EffectiveRadius(self.sensing_radius + profile.tolerance_radius(tolerance))
    }
}

/// Disk-shaped region of interest centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOfInterest {
    radius: f64,
}

impl RegionOfInterest {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "region radius",
                requirement: "finite and >= 0",
                value: radius,
            });
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Tolerance-extended sensing radius in meters. Never smaller than the
/// native radius; equal to it when the tolerance does not exceed the
/// profile amplitude or no profile is available.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EffectiveRadius(f64);

impl EffectiveRadius {
    pub fn meters(&self) -> f64 {
        self.0
    }
}

/// Poisson probability mass `e^{-mean} mean^k / k!`, computed in log space
/// so large means and counts do not overflow the intermediate power and
/// factorial terms.
pub fn poisson_pmf(count: u64, mean: f64) -> f64 {
    assert!(
        mean.is_finite() && mean >= 0.0,
        "mean must be finite and nonnegative, got {mean}"
    );
    if mean == 0.0 {
        return if count == 0 { 1.0 } else { 0.0 };
    }
    if count == 0 {
        return (-mean).exp();
    }
    let k = count as f64;
    (k * mean.ln() - mean - libm::lgamma(k + 1.0)).exp()
}

/// Count beyond which the Poisson tail mass is negligible (< 1e-12) for
/// sum-to-one identities: `mean + 50 sqrt(mean) + 50`.
pub fn poisson_tail_cap(mean: f64) -> u64 {
    assert!(mean.is_finite() && mean >= 0.0);
    (mean + 50.0 * mean.sqrt() + 50.0).ceil() as u64
}
