//! Versioned JSON scenario documents and validation suites.
//!
//! Lead times are written in weeks whatever the model time unit; they are converted on load.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inplane::DualPolicy;
use crate::optimizer::ProblemSpec;
use crate::orbital::{EarthConstants, PropulsionSpec};
use crate::parking::ParkingPolicy;
use crate::simulator::SimConfig;
use crate::system::{Constellation, Costs, LaunchChannel, ScenarioConfig, SystemPolicy};
use crate::units::TimeUnit;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSection {
    pub n_plane: u32,
    pub n_sats: u32,
    pub lambda_sat_per_year: f64,
    pub h_plane_km: f64,
    pub inclination_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParkingSection {
    pub n_parking: u32,
    pub h_parking_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaunchSpec {
    pub processing_weeks: f64,
    pub mean_wait_weeks: f64,
    pub capacity_sats: u32,
    pub cost_musd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaunchSection {
    pub primary: LaunchSpec,
    pub auxiliary: LaunchSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsSection {
    pub c_sat_musd: f64,
    pub h_s_musd_per_sat_year: f64,
    pub eps_fuel_musd_per_kg: f64,
}

/// In-plane and parking decision variables. The direct-channel fields may be omitted for
/// single-channel scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub r1: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<i32>,
    pub q1: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_w: Option<f64>,
    pub k_r: u32,
    pub k_q: u32,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub spec_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub time_unit: TimeUnit,
    pub constellation: ConstellationSection,
    pub parking: ParkingSection,
    pub propulsion: PropulsionSpec,
    pub launch: LaunchSection,
    pub costs: CostsSection,
    #[serde(default)]
    pub earth: EarthConstants,
    #[serde(default = "default_true")]
    pub dual_channel_enabled: bool,
    pub policy: PolicySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimConfig>,
}

fn weeks_to_units(weeks: f64, unit: TimeUnit) -> f64 {
    weeks * unit.per_year() as f64 / 52.0
}

impl ScenarioFile {
    pub fn config(&self) -> ScenarioConfig {
        let u = self.time_unit;
        let launch = |l: &LaunchSpec| LaunchChannel {
            processing: weeks_to_units(l.processing_weeks, u),
            mean_wait: weeks_to_units(l.mean_wait_weeks, u),
            capacity: l.capacity_sats,
            cost_musd: l.cost_musd,
        };
        let c = &self.constellation;
        ScenarioConfig {
            time_unit: u,
            constellation: Constellation {
                n_plane: c.n_plane,
                n_sats: c.n_sats,
                lambda_sat_per_year: c.lambda_sat_per_year,
                h_plane_km: c.h_plane_km,
                inclination_deg: c.inclination_deg,
            },
            propulsion: self.propulsion,
            primary: launch(&self.launch.primary),
            auxiliary: launch(&self.launch.auxiliary),
            costs: Costs {
                c_sat_musd: self.costs.c_sat_musd,
                h_s_musd: self.costs.h_s_musd_per_sat_year,
                eps_fuel_musd_per_kg: self.costs.eps_fuel_musd_per_kg,
            },
            earth: self.earth,
            dual_channel_enabled: self.dual_channel_enabled,
        }
    }

    pub fn policy(&self) -> SystemPolicy {
        let p = &self.policy;
        SystemPolicy {
            plane: DualPolicy {
                r1: p.r1,
                r2: p.r2.unwrap_or(p.r1 - 1),
                q1: p.q1,
                q2: p.q2.unwrap_or(1),
                alpha_w: p.alpha_w.unwrap_or(0.0),
            },
            parking: ParkingPolicy { k_r: p.k_r, k_q: p.k_q },
            n_parking: self.parking.n_parking,
            h_parking_km: self.parking.h_parking_km,
        }
    }

    /// Writes a policy back into the document, e.g. an optimizer result.
    pub fn set_policy(&mut self, policy: &SystemPolicy) {
        self.policy = PolicySection {
            r1: policy.plane.r1,
            r2: Some(policy.plane.r2),
            q1: policy.plane.q1,
            q2: Some(policy.plane.q2),
            alpha_w: Some(policy.plane.alpha_w),
            k_r: policy.parking.k_r,
            k_q: policy.parking.k_q,
        };
        self.parking = ParkingSection { n_parking: policy.n_parking, h_parking_km: policy.h_parking_km };
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::config(format!(
                "/spec_version: unsupported version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        let config = self.config();
        config.validate()?;
        self.policy().validate(&config)?;
        if let Some(p) = &self.problem {
            p.validate()?;
        }
        if let Some(s) = &self.simulation {
            s.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = parse_json(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents always serialize")
    }
}

/// A list of scenarios run through the simulator and compared with the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSuite {
    pub spec_version: u32,
    #[serde(default)]
    pub name: String,
    pub simulation: SimConfig,
    pub instances: Vec<ScenarioFile>,
}

impl ValidationSuite {
    pub fn from_json(text: &str) -> Result<Self> {
        let suite: ValidationSuite = parse_json(text)?;
        if suite.spec_version != SPEC_VERSION {
            return Err(Error::config(format!("/spec_version: unsupported version {}", suite.spec_version)));
        }
        if suite.instances.is_empty() {
            return Err(Error::config("/instances: the suite lists no instances"));
        }
        suite.simulation.validate()?;
        for (i, inst) in suite.instances.iter().enumerate() {
            inst.validate().map_err(|e| Error::config(format!("/instances/{i}: {e}")))?;
        }
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))
}

/// Deserializes with errors prefixed by the JSON pointer of the offending value.
fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer: String = e
            .path()
            .iter()
            .map(|seg| match seg {
                serde_path_to_error::Segment::Seq { index } => format!("/{index}"),
                serde_path_to_error::Segment::Map { key } => format!("/{}", key.replace('~', "~0").replace('/', "~1")),
                serde_path_to_error::Segment::Enum { variant } => format!("/{variant}"),
                serde_path_to_error::Segment::Unknown => "/?".to_string(),
            })
            .collect();
        let pointer = if pointer.is_empty() { "/".to_string() } else { pointer };
        Error::config(format!("{pointer}: {}", e.inner()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointer_names_the_bad_field() {
        let err = parse_json::<ParkingSection>(r#"{"n_parking": -3, "h_parking_km": 650}"#).unwrap_err();
        assert!(err.to_string().contains("/n_parking"), "{err}");
        let err = parse_json::<ParkingSection>(r#"{"n_parking": 3, "h_parking_km": 650, "x": 1}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn weeks_convert_to_days() {
        assert_eq!(weeks_to_units(2.0, TimeUnit::Week), 2.0);
        assert!((weeks_to_units(1.0, TimeUnit::Day) - 7.019_230_769).abs() < 1e-6);
    }
}
