#![allow(dead_code)]

pub mod oracle;

use constellation_spares::inplane::DualPolicy;
use constellation_spares::orbital::{EarthConstants, PropulsionSpec};
use constellation_spares::parking::ParkingPolicy;
use constellation_spares::system::{Constellation, Costs, LaunchChannel, ScenarioConfig, SystemPolicy};
use constellation_spares::units::TimeUnit;

pub fn case1() -> ScenarioConfig {
    ScenarioConfig {
        time_unit: TimeUnit::Week,
        constellation: Constellation {
            n_plane: 40,
            n_sats: 40,
            lambda_sat_per_year: 0.2,
            h_plane_km: 1200.0,
            inclination_deg: 60.0,
        },
        propulsion: PropulsionSpec { dry_mass_kg: 150.0, exhaust_velocity_km_s: 11.77, mass_flow_kg_s: 0.0013 },
        primary: LaunchChannel { processing: 12.0, mean_wait: 8.0, capacity: 40, cost_musd: 67.0 },
        auxiliary: LaunchChannel { processing: 2.0, mean_wait: 2.0, capacity: 2, cost_musd: 7.5 },
        costs: Costs { c_sat_musd: 0.5, h_s_musd: 0.5, eps_fuel_musd_per_kg: 0.01 },
        earth: EarthConstants::default(),
        dual_channel_enabled: true,
    }
}

pub fn case1_policy() -> SystemPolicy {
    SystemPolicy {
        plane: DualPolicy { r1: 3, r2: -2, q1: 5, q2: 2, alpha_w: 1.0 },
        parking: ParkingPolicy { k_r: 5, k_q: 8 },
        n_parking: 9,
        h_parking_km: 650.0,
    }
}

