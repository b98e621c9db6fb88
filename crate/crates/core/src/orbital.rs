//! Circular-orbit mechanics: J2 nodal precession, relative RAAN drift and the low-thrust
//! transfer between a parking orbit and an operational plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::TimeUnit;

/// Default floor on the relative drift magnitude, in rad per time unit.
pub const DEFAULT_DRIFT_FLOOR: f64 = 1e-12;

/// Inclinations of two orbits count as equal within this tolerance (rad).
pub const INCLINATION_TOLERANCE: f64 = 1e-9;

/// Gravitational and oblateness constants. Defaults are the WGS-84 values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarthConstants {
    /// km^3/s^2
    pub mu_km3_s2: f64,
    /// km
    pub radius_km: f64,
    pub j2: f64,
}

impl Default for EarthConstants {
    fn default() -> Self {
        EarthConstants {
            mu_km3_s2: 398_600.441_8,
            radius_km: 6_378.137,
            j2: 1.082_626_68e-3,
        }
    }
}

impl EarthConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_km3_s2 > 0.0 && self.radius_km > 0.0 && self.j2 > 0.0 && self.j2 < 1.0) {
            return Err(Error::config(format!("invalid Earth constants {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularOrbit {
    pub altitude_km: f64,
    pub inclination_rad: f64,
}

impl CircularOrbit {
    pub fn new(altitude_km: f64, inclination_rad: f64) -> Result<Self> {
        if !(altitude_km > 0.0) || !(0.0..=std::f64::consts::PI).contains(&inclination_rad) {
            return Err(Error::config(format!(
                "invalid circular orbit: altitude {altitude_km} km, inclination {inclination_rad} rad"
            )));
        }
        Ok(CircularOrbit { altitude_km, inclination_rad })
    }

    pub fn from_degrees(altitude_km: f64, inclination_deg: f64) -> Result<Self> {
        Self::new(altitude_km, inclination_deg.to_radians())
    }

    pub fn semi_major_axis(&self, consts: &EarthConstants) -> f64 {
        consts.radius_km + self.altitude_km
    }
}

/// Satellite propulsion for the parking-to-plane spiral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropulsionSpec {
    pub dry_mass_kg: f64,
    pub exhaust_velocity_km_s: f64,
    pub mass_flow_kg_s: f64,
}

impl PropulsionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dry_mass_kg > 0.0 && self.exhaust_velocity_km_s > 0.0 && self.mass_flow_kg_s > 0.0) {
            return Err(Error::config(format!("invalid propulsion spec {self:?}")));
        }
        Ok(())
    }
}

/// Secular RAAN rate of a circular orbit under J2, in rad per `unit`.
pub fn nodal_precession_rate(orbit: &CircularOrbit, consts: &EarthConstants, unit: TimeUnit) -> f64 {
    let a = orbit.semi_major_axis(consts);
    let n = (consts.mu_km3_s2 / (a * a * a)).sqrt();
    let ecc: f64 = 0.0;
    let p2 = (1.0 - ecc * ecc).powi(2);
    let rate_per_s = -1.5 * n * consts.radius_km.powi(2) / (a * a * p2) * consts.j2 * orbit.inclination_rad.cos();
    unit.per_second_to_per_unit(rate_per_s)
}

/// Magnitude of the drift of `parking` relative to `plane`, in rad per `unit`.
pub fn relative_raan_rate(
    parking: &CircularOrbit,
    plane: &CircularOrbit,
    consts: &EarthConstants,
    unit: TimeUnit,
    floor: f64,
) -> Result<f64> {
    if (parking.inclination_rad - plane.inclination_rad).abs() > INCLINATION_TOLERANCE {
        return Err(Error::config(format!(
            "parking inclination {} rad differs from plane inclination {} rad",
            parking.inclination_rad, plane.inclination_rad
        )));
    }
    let rate = (nodal_precession_rate(parking, consts, unit) - nodal_precession_rate(plane, consts, unit)).abs();
    if rate < floor {
        return Err(Error::DegenerateDrift { rate, floor });
    }
    Ok(rate)
}

/// Velocity increment of a continuous low-thrust transfer between circular radii (km/s).
/// Positive when raising the orbit.
pub fn low_thrust_delta_v(r_initial_km: f64, r_final_km: f64, consts: &EarthConstants) -> f64 {
    (consts.mu_km3_s2 / r_initial_km).sqrt() - (consts.mu_km3_s2 / r_final_km).sqrt()
}

/// Rocket-equation propellant mass (kg) for a velocity increment in km/s.
pub fn fuel_mass(delta_v_km_s: f64, prop: &PropulsionSpec) -> f64 {
    prop.dry_mass_kg * (delta_v_km_s / prop.exhaust_velocity_km_s).exp_m1()
}

/// Burn duration of the transfer in time units.
pub fn transfer_time(fuel_kg: f64, prop: &PropulsionSpec, unit: TimeUnit) -> f64 {
    unit.seconds_to_units(fuel_kg / prop.mass_flow_kg_s)
}

/// Fuel and duration of one parking-to-plane transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub delta_v_km_s: f64,
    pub fuel_kg: f64,
    pub duration: f64,
}

pub fn plan_transfer(
    parking: &CircularOrbit,
    plane: &CircularOrbit,
    consts: &EarthConstants,
    prop: &PropulsionSpec,
    unit: TimeUnit,
) -> Transfer {
    let dv = low_thrust_delta_v(parking.semi_major_axis(consts), plane.semi_major_axis(consts), consts).abs();
    let fuel_kg = fuel_mass(dv, prop);
    Transfer { delta_v_km_s: dv, fuel_kg, duration: transfer_time(fuel_kg, prop, unit) }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEEK: TimeUnit = TimeUnit::Week;

    fn orbit(h: f64, i_deg: f64) -> CircularOrbit {
        CircularOrbit::from_degrees(h, i_deg).unwrap()
    }

    #[test]
    fn polar_orbit_does_not_precess() {
        let c = EarthConstants::default();
        for h in [400.0, 650.0, 1200.0, 2000.0] {
            let scale = nodal_precession_rate(&orbit(h, 0.0), &c, WEEK).abs();
            assert!(nodal_precession_rate(&orbit(h, 90.0), &c, WEEK).abs() < 1e-15 * scale);
        }
    }

    #[test]
    fn precession_matches_hand_evaluation() {
        // 650 km, 60 deg: a = 7028.137 km
        let c = EarthConstants::default();
        let a: f64 = 7028.137;
        let n = (398_600.441_8 / a.powi(3)).sqrt();
        let expected_s = -1.5 * n * (6378.137_f64 / a).powi(2) * 1.082_626_68e-3 * 0.5;
        let got = nodal_precession_rate(&orbit(650.0, 60.0), &c, WEEK);
        assert!(got < 0.0);
        assert!((got - expected_s * 604_800.0).abs() < 1e-15);
        // rough magnitude: about -3.5 deg/day
        let deg_per_day = got.to_degrees() / 7.0;
        assert!((deg_per_day + 3.55).abs() < 0.05, "{deg_per_day}");
    }

    #[test]
    fn prograde_and_retrograde_rates_are_antisymmetric() {
        let c = EarthConstants::default();
        let pro = nodal_precession_rate(&orbit(800.0, 53.0), &c, WEEK);
        let retro = nodal_precession_rate(&CircularOrbit::new(800.0, std::f64::consts::PI - 53f64.to_radians()).unwrap(), &c, WEEK);
        assert!((pro + retro).abs() < 1e-15 * pro.abs().max(1.0));
    }

    #[test]
    fn precession_magnitude_decreases_with_altitude() {
        let c = EarthConstants::default();
        let mut prev = f64::INFINITY;
        for h in (400..=2000).step_by(50) {
            let r = nodal_precession_rate(&orbit(h as f64, 60.0), &c, WEEK).abs();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn identical_orbits_have_degenerate_drift() {
        let c = EarthConstants::default();
        let err = relative_raan_rate(&orbit(900.0, 60.0), &orbit(900.0, 60.0), &c, WEEK, DEFAULT_DRIFT_FLOOR);
        assert!(matches!(err, Err(Error::DegenerateDrift { .. })));
    }

    #[test]
    fn relative_rate_is_difference_of_rates() {
        let c = EarthConstants::default();
        let a = nodal_precession_rate(&orbit(650.0, 60.0), &c, WEEK);
        let b = nodal_precession_rate(&orbit(1200.0, 60.0), &c, WEEK);
        let rel = relative_raan_rate(&orbit(650.0, 60.0), &orbit(1200.0, 60.0), &c, WEEK, DEFAULT_DRIFT_FLOOR).unwrap();
        assert!(rel > 0.0);
        assert_eq!(rel, (a - b).abs());
        let lower = relative_raan_rate(&orbit(600.0, 60.0), &orbit(1200.0, 60.0), &c, WEEK, DEFAULT_DRIFT_FLOOR).unwrap();
        assert!(lower > rel);
    }

    #[test]
    fn mismatched_inclinations_are_rejected() {
        let c = EarthConstants::default();
        assert!(relative_raan_rate(&orbit(650.0, 60.0), &orbit(1200.0, 61.0), &c, WEEK, DEFAULT_DRIFT_FLOOR).is_err());
    }

    #[test]
    fn delta_v_signs_and_value() {
        let c = EarthConstants::default();
        assert_eq!(low_thrust_delta_v(7000.0, 7000.0, &c), 0.0);
        assert!(low_thrust_delta_v(7000.0, 7500.0, &c) > 0.0);
        // 650 -> 1200 km
        let dv = low_thrust_delta_v(7028.137, 7578.137, &c);
        let hand = (398_600.441_8_f64 / 7028.137).sqrt() - (398_600.441_8_f64 / 7578.137).sqrt();
        assert!((dv - hand).abs() < 1e-15);
        assert!((dv - 0.27843).abs() < 1e-5, "{dv}");
    }

    #[test]
    fn fuel_mass_substitution() {
        let prop = PropulsionSpec { dry_mass_kg: 150.0, exhaust_velocity_km_s: 11.77, mass_flow_kg_s: 0.0013 };
        assert_eq!(fuel_mass(0.0, &prop), 0.0);
        let m = fuel_mass(0.3, &prop);
        assert!((m - 150.0 * ((0.3_f64 / 11.77).exp() - 1.0)).abs() < 1e-12);
        // convex, increasing
        let (a, b, c) = (fuel_mass(0.1, &prop), fuel_mass(0.2, &prop), fuel_mass(0.3, &prop));
        assert!(a < b && b < c && (c - b) > (b - a));
    }

    #[test]
    fn transfer_time_chain_for_case_study_propulsion() {
        let c = EarthConstants::default();
        let prop = PropulsionSpec { dry_mass_kg: 150.0, exhaust_velocity_km_s: 11.77, mass_flow_kg_s: 0.0013 };
        assert_eq!(transfer_time(0.0, &prop, WEEK), 0.0);
        assert!((transfer_time(2.0, &prop, WEEK) - 2.0 * transfer_time(1.0, &prop, WEEK)).abs() < 1e-18);
        let t = plan_transfer(&orbit(650.0, 60.0), &orbit(1200.0, 60.0), &c, &prop, WEEK);
        let dv = (398_600.441_8_f64 / 7028.137).sqrt() - (398_600.441_8_f64 / 7578.137).sqrt();
        let fuel = 150.0 * ((dv / 11.77).exp() - 1.0);
        assert!((t.fuel_kg - fuel).abs() < 1e-12);
        assert!((t.duration - fuel / 0.0013 / 604_800.0).abs() < 1e-15);
        // about 46 minutes of thrusting
        assert!(t.duration > 0.004 && t.duration < 0.005, "{}", t.duration);
    }

    #[test]
    fn zero_fuel_iff_same_radius() {
        let c = EarthConstants::default();
        let prop = PropulsionSpec { dry_mass_kg: 150.0, exhaust_velocity_km_s: 11.77, mass_flow_kg_s: 0.0013 };
        assert_eq!(fuel_mass(low_thrust_delta_v(7100.0, 7100.0, &c).abs(), &prop), 0.0);
        assert!(fuel_mass(low_thrust_delta_v(7100.0, 7100.5, &c).abs(), &prop) > 0.0);
    }
}
