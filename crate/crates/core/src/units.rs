//! Unit bookkeeping between spectroscopic wavenumbers and picosecond rates.
//!
//! Energies are quoted in cm⁻¹ and converted once, when a model is built.
//! With ħ = 1 a wavenumber `e` corresponds to the angular frequency
//! `2π·c·e` in rad/ps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in cm/ps.
pub const SPEED_OF_LIGHT_CM_PER_PS: f64 = 0.029_979_245_8;

/// Angular frequency (rad/ps) per cm⁻¹, `2π·c`.
pub const ANGULAR_PER_WAVENUMBER: f64 = 2.0 * PI * SPEED_OF_LIGHT_CM_PER_PS;

/// Dephasing rates on the published γ axis are one tenth of the rate
/// that enters the generator (in physical ps⁻¹).
pub const PUBLISHED_DEPHASING_AXIS_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Wavenumber(pub f64);

impl Wavenumber {
    pub fn cm(self) -> f64 {
        self.0
    }
}

/// A nonnegative rate in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct RatePerPs(f64);

impl RatePerPs {
    pub const ZERO: RatePerPs = RatePerPs(0.0);

    pub fn new(value: f64) -> Result<Self> {
        Self::named("rate", value)
    }

    pub(crate) fn named(name: &'static str, value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NegativeRate { name, value });
        }
        Ok(RatePerPs(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `2π·c·e`, the angular frequency in rad/ps of a wavenumber `e`.
pub fn wavenumber_to_angular_ps(e: Wavenumber) -> f64 {
    ANGULAR_PER_WAVENUMBER * e.0
}

/// The time axis a model is propagated on.
///
/// `Angular` is the physical clock: t in ps, `ω = 2π·c·E`, all rates used
/// as given. `Published` is the clock behind the reference tables and
/// figures for this model: one unit of its time axis is `1/(2π)` physical
/// ps, so every physical rate is divided by `2π` (the Hamiltonian then
/// enters as `c·E`), and a dephasing label γ stands for a physical rate of
/// `10·γ` ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    #[default]
    Published,
    Angular,
}

impl Clock {
    /// Physical ps per unit of this clock's time axis, inverted: the factor
    /// that divides physical rates.
    pub fn time_scale(self) -> f64 {
        match self {
            Clock::Published => 2.0 * PI,
            Clock::Angular => 1.0,
        }
    }

    /// Generator frequency (per clock unit) of a wavenumber.
    pub fn wavenumber_rate(self, e: Wavenumber) -> f64 {
        wavenumber_to_angular_ps(e) / self.time_scale()
    }

    /// Generator rate (per clock unit) of a physical rate in ps⁻¹.
    pub fn physical_rate(self, r: RatePerPs) -> f64 {
        r.value() / self.time_scale()
    }

    /// Generator rate (per clock unit) of a dephasing label.
    pub fn dephasing_rate(self, gamma: RatePerPs) -> f64 {
        match self {
            Clock::Published => PUBLISHED_DEPHASING_AXIS_SCALE * gamma.value() / self.time_scale(),
            Clock::Angular => gamma.value(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Clock::Published => "published",
            Clock::Angular => "angular",
        }
    }

    pub fn parse(s: &str) -> Option<Clock> {
        match s {
            "published" => Some(Clock::Published),
            "angular" => Some(Clock::Angular),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sink_rate_is_about_six_per_ps() {
        let w = wavenumber_to_angular_ps(Wavenumber(62.8 / 1.88));
        assert!((w - 6.2925).abs() < 1e-3, "{w}");
    }

    #[test]
    fn recombination_rate_is_about_5e_minus_4() {
        let w = wavenumber_to_angular_ps(Wavenumber(1.0 / (2.0 * 188.0)));
        assert!((w - 5.01e-4).abs() < 1e-6, "{w}");
    }

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(wavenumber_to_angular_ps(Wavenumber(0.0)), 0.0);
    }

    #[test]
    fn factor_value() {
        assert!((ANGULAR_PER_WAVENUMBER - 0.188_365_156_7).abs() < 1e-10);
    }

    #[test]
    fn negative_rates_rejected() {
        assert!(RatePerPs::new(-1e-12).is_err());
        assert!(RatePerPs::new(f64::NAN).is_err());
        assert_eq!(RatePerPs::new(0.0).unwrap(), RatePerPs::ZERO);
    }

    #[test]
    fn published_clock_uses_c_for_energies() {
        let f = Clock::Published.wavenumber_rate(Wavenumber(1.0));
        assert!((f - SPEED_OF_LIGHT_CM_PER_PS).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn conversion_is_linear(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let lhs = wavenumber_to_angular_ps(Wavenumber(a + b));
            let rhs = wavenumber_to_angular_ps(Wavenumber(a)) + wavenumber_to_angular_ps(Wavenumber(b));
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
