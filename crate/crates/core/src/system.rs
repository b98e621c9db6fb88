//! Two-echelon coupling and the annual cost model.
//!
//! The parking fill rate shapes the transfer lead time, which sets the two-order cycle
//! probability of each plane, which sets the order rate seen by the parking orbits, which
//! in turn sets the parking fill rate. `evaluate` solves this loop by damped fixed-point
//! iteration using only the cheap quantities, then runs the full in-plane model once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inplane::{plane_failure_rate, DualPolicy, PlaneMetrics, PlaneModel};
use crate::orbital::{plan_transfer, relative_raan_rate, CircularOrbit, EarthConstants, PropulsionSpec, Transfer};
use crate::parking::{evaluate_parking, parking_demand_rate, ParkingMetrics, ParkingPolicy};
use crate::stochastic::{build_transfer_lead, ShiftedExponentialLead, TransferLead};
use crate::units::TimeUnit;

pub const FIXED_POINT_TOLERANCE: f64 = 1e-7;
pub const FIXED_POINT_MAX_ITERATIONS: usize = 200;
/// Iterations without residual improvement before the loop is declared divergent.
const STALL_LIMIT: usize = 20;
/// Smallest parking fill rate used to build the transfer lead time.
const MIN_LEAD_FILL_RATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub n_plane: u32,
    pub n_sats: u32,
    pub lambda_sat_per_year: f64,
    pub h_plane_km: f64,
    pub inclination_deg: f64,
}

/// One launch channel: the lead time is `processing + Exp(mean_wait)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchChannel {
    pub processing: f64,
    pub mean_wait: f64,
    /// Satellites per launch.
    pub capacity: u32,
    /// M$ per launch.
    pub cost_musd: f64,
}

impl LaunchChannel {
    pub fn lead(&self) -> Result<ShiftedExponentialLead> {
        ShiftedExponentialLead::new(self.mean_wait, self.processing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    /// M$ per satellite.
    pub c_sat_musd: f64,
    /// M$ per satellite per year.
    pub h_s_musd: f64,
    /// M$ per kg of propellant.
    pub eps_fuel_musd_per_kg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub time_unit: TimeUnit,
    pub constellation: Constellation,
    pub propulsion: PropulsionSpec,
    pub primary: LaunchChannel,
    pub auxiliary: LaunchChannel,
    pub costs: Costs,
    pub earth: EarthConstants,
    pub dual_channel_enabled: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let c = &self.constellation;
        if c.n_plane < 1 || c.n_sats < 1 {
            return Err(Error::config("the constellation needs at least one plane and one satellite per plane"));
        }
        if !(c.lambda_sat_per_year >= 0.0) || !c.lambda_sat_per_year.is_finite() {
            return Err(Error::config(format!("invalid satellite failure rate {}", c.lambda_sat_per_year)));
        }
        self.propulsion.validate()?;
        self.earth.validate()?;
        for (name, ch) in [("primary", &self.primary), ("auxiliary", &self.auxiliary)] {
            ch.lead().map_err(|e| Error::config(format!("{name} launch: {e}")))?;
            if ch.capacity < 1 || !(ch.cost_musd >= 0.0) {
                return Err(Error::config(format!("{name} launch needs capacity >= 1 and a non-negative cost")));
            }
        }
        let k = &self.costs;
        if !(k.c_sat_musd >= 0.0 && k.h_s_musd >= 0.0 && k.eps_fuel_musd_per_kg >= 0.0) {
            return Err(Error::config("cost coefficients must be non-negative"));
        }
        Ok(())
    }

    pub fn lambda_plane(&self) -> f64 {
        let c = &self.constellation;
        plane_failure_rate(c.n_sats, c.lambda_sat_per_year, self.time_unit.per_year())
    }

    pub fn plane_orbit(&self) -> Result<CircularOrbit> {
        CircularOrbit::from_degrees(self.constellation.h_plane_km, self.constellation.inclination_deg)
    }
}

/// Full decision vector of the two-echelon system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemPolicy {
    pub plane: DualPolicy,
    pub parking: ParkingPolicy,
    pub n_parking: u32,
    pub h_parking_km: f64,
}

impl SystemPolicy {
    pub fn validate(&self, config: &ScenarioConfig) -> Result<()> {
        self.parking.validate()?;
        if self.n_parking < 1 {
            return Err(Error::config("at least one parking orbit is required"));
        }
        if !(self.h_parking_km < config.constellation.h_plane_km) {
            return Err(Error::config(format!(
                "parking altitude {} km must lie below the plane altitude {} km",
                self.h_parking_km, config.constellation.h_plane_km
            )));
        }
        if config.dual_channel_enabled {
            self.plane.validate()?;
        } else if self.plane.q1 < 1 {
            return Err(Error::config("order quantity Q1 must be at least 1"));
        }
        Ok(())
    }
}

/// Decision vector of the single-channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleChannelPolicy {
    pub r1: i32,
    pub q1: u32,
    pub parking: ParkingPolicy,
    pub n_parking: u32,
    pub h_parking_km: f64,
}

impl SingleChannelPolicy {
    pub fn to_system(self) -> SystemPolicy {
        SystemPolicy {
            // R2, Q2 and alpha_w never enter the single-channel model
            plane: DualPolicy { r1: self.r1, r2: self.r1 - 1, q1: self.q1, q2: 1, alpha_w: 0.0 },
            parking: self.parking,
            n_parking: self.n_parking,
            h_parking_km: self.h_parking_km,
        }
    }
}

/// Annual order counts: O1 and O2 per plane, O3 per parking orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub o1: f64,
    pub o2: f64,
    pub o3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub manufacturing: f64,
    pub launch: f64,
    pub maneuvering: f64,
    pub holding: f64,
    pub tessac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointInfo {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateMetrics {
    pub lambda_plane: f64,
    pub relative_rate: f64,
    pub transfer: Transfer,
    pub t_w: f64,
    pub plane: PlaneMetrics,
    pub parking: ParkingMetrics,
    pub orders: Orders,
    pub cost: CostBreakdown,
    pub fixed_point: FixedPointInfo,
}

impl SteadyStateMetrics {
    /// Satellites held in orbit across both echelons, on average.
    pub fn total_mean_stock(&self, config: &ScenarioConfig, policy: &SystemPolicy) -> f64 {
        self.plane.sl_plane * config.constellation.n_plane as f64
            + self.parking.sl_parking * policy.n_parking as f64 * policy.plane.q1 as f64
    }

    /// Auxiliary launches per primary launch.
    pub fn relative_auxiliary_usage(&self, policy: &SystemPolicy) -> f64 {
        policy.parking.k_q as f64 * self.plane.p2
    }
}

pub fn annual_orders(
    lambda_plane: f64,
    lambda_parking: f64,
    p2: f64,
    q_plane: f64,
    k_q: u32,
    n_t: u32,
) -> Orders {
    let n_t = n_t as f64;
    Orders {
        o1: lambda_plane * n_t / q_plane,
        o2: lambda_plane * n_t * p2 / q_plane,
        o3: lambda_parking * n_t / k_q as f64,
    }
}

/// Inputs of the annual cost that do not come from the in-plane model.
pub struct CostInputs<'a> {
    pub config: &'a ScenarioConfig,
    pub policy: &'a SystemPolicy,
    pub lambda_plane: f64,
    pub orders: &'a Orders,
    pub sl_plane: f64,
    pub sl_parking: f64,
    /// Propellant per transferred satellite, kg.
    pub fuel_kg: f64,
}

pub fn tessac(inputs: &CostInputs<'_>) -> CostBreakdown {
    let CostInputs { config, policy, lambda_plane, orders, sl_plane, sl_parking, fuel_kg } = *inputs;
    let n_plane = config.constellation.n_plane as f64;
    let n_parking = policy.n_parking as f64;
    let q1 = policy.plane.q1 as f64;
    let k = &config.costs;
    let manufacturing = k.c_sat_musd * lambda_plane * n_plane * config.time_unit.per_year() as f64;
    let launch = config.auxiliary.cost_musd * orders.o2 * n_plane + config.primary.cost_musd * orders.o3 * n_parking;
    let maneuvering = k.eps_fuel_musd_per_kg * orders.o1 * n_plane * q1 * fuel_kg;
    let holding = k.h_s_musd * (sl_plane * n_plane + sl_parking * n_parking * q1);
    CostBreakdown { manufacturing, launch, maneuvering, holding, tessac: manufacturing + launch + maneuvering + holding }
}

/// Geometry shared by every evaluation of one (config, parking orbit) pair.
struct Geometry {
    relative_rate: f64,
    transfer: Transfer,
}

fn geometry(config: &ScenarioConfig, policy: &SystemPolicy) -> Result<Geometry> {
    let plane = config.plane_orbit()?;
    let parking = CircularOrbit::from_degrees(policy.h_parking_km, config.constellation.inclination_deg)?;
    let relative_rate = relative_raan_rate(
        &parking,
        &plane,
        &config.earth,
        config.time_unit,
        crate::orbital::DEFAULT_DRIFT_FLOOR,
    )?;
    Ok(Geometry { relative_rate, transfer: plan_transfer(&parking, &plane, &config.earth, &config.propulsion, config.time_unit) })
}

/// Result of the echelon fixed point, before the expensive in-plane integrals.
#[derive(Debug, Clone)]
pub struct Coupled {
    pub lead: TransferLead,
    pub t_w: f64,
    pub p2: f64,
    pub q_plane: f64,
    pub parking: ParkingMetrics,
    pub info: FixedPointInfo,
    pub relative_rate: f64,
    pub transfer: Transfer,
}

/// Solves the coupling between the parking fill rate and the plane cycle mix.
pub fn solve_coupling(config: &ScenarioConfig, policy: &SystemPolicy) -> Result<Coupled> {
    config.validate()?;
    policy.validate(config)?;
    let geo = geometry(config, policy)?;
    let lambda_plane = config.lambda_plane();
    let l3 = config.primary.lead()?;
    let l2 = config.auxiliary.lead()?;
    let dual = config.dual_channel_enabled;
    let n_plane = config.constellation.n_plane;

    let step = |rho: f64| -> Result<(TransferLead, f64, f64, f64, ParkingMetrics)> {
        let lead = build_transfer_lead(policy.n_parking, geo.relative_rate, geo.transfer.duration, rho.max(MIN_LEAD_FILL_RATE))?;
        let t_w = policy.plane.time_window(&lead);
        let p2 = if dual {
            PlaneModel::new(policy.plane, lambda_plane, &lead, Some(&l2), t_w)?.two_order_probability()?
        } else {
            0.0
        };
        let q_plane = policy.plane.q1 as f64 + if dual { policy.plane.q2 as f64 * p2 } else { 0.0 };
        let lambda_parking = parking_demand_rate(n_plane, lambda_plane, q_plane, policy.n_parking);
        let parking = evaluate_parking(&policy.parking, lambda_parking, &l3)?;
        Ok((lead, t_w, p2, q_plane, parking))
    };

    let mut rho = 1.0;
    let mut p2_prev: f64 = 0.0;
    let mut damping = 1.0;
    let mut prev_delta: f64 = 0.0;
    let mut best = f64::INFINITY;
    let mut stall = 0;
    let mut residual = f64::INFINITY;
    for iteration in 1..=FIXED_POINT_MAX_ITERATIONS {
        let (lead, t_w, p2, q_plane, parking) = step(rho)?;
        let delta = parking.rho_parking - rho;
        residual = delta.abs() + (p2 - p2_prev).abs();
        if residual < FIXED_POINT_TOLERANCE || lambda_plane == 0.0 {
            if parking.rho_parking < crate::stochastic::AVAILABILITY_WARNING_FILL_RATE {
                log::warn!("parking fill rate {:.3} is below the range the transfer lead model is built for", parking.rho_parking);
            }
            return Ok(Coupled {
                lead,
                t_w,
                p2,
                q_plane,
                parking,
                info: FixedPointInfo { iterations: iteration, residual },
                relative_rate: geo.relative_rate,
                transfer: geo.transfer,
            });
        }
        if residual < best {
            best = residual;
            stall = 0;
        } else {
            stall += 1;
            if stall >= STALL_LIMIT {
                return Err(Error::FixedPointDivergence { iterations: iteration, residual });
            }
        }
        if delta * prev_delta < 0.0 {
            damping = 0.5;
        }
        prev_delta = delta;
        rho += damping * delta;
        p2_prev = p2;
    }
    Err(Error::FixedPointDivergence { iterations: FIXED_POINT_MAX_ITERATIONS, residual })
}

/// Steady-state metrics and annual cost of a policy.
pub fn evaluate(config: &ScenarioConfig, policy: &SystemPolicy) -> Result<SteadyStateMetrics> {
    let coupled = solve_coupling(config, policy)?;
    finish(config, policy, coupled)
}

/// Completes an evaluation from a solved coupling.
pub fn finish(config: &ScenarioConfig, policy: &SystemPolicy, coupled: Coupled) -> Result<SteadyStateMetrics> {
    let lambda_plane = config.lambda_plane();
    let l2 = config.auxiliary.lead()?;
    let direct = if config.dual_channel_enabled { Some(&l2 as &dyn crate::stochastic::LeadTime) } else { None };
    let mut plane = PlaneModel::new(policy.plane, lambda_plane, &coupled.lead, direct, coupled.t_w)?.evaluate()?;
    // keep the exact p2 that the parking echelon was solved against
    plane.p2 = coupled.p2;
    plane.p1 = 1.0 - coupled.p2;
    let orders = annual_orders(
        lambda_plane,
        coupled.parking.lambda_parking,
        plane.p2,
        plane.q_plane,
        policy.parking.k_q,
        config.time_unit.per_year(),
    );
    let cost = tessac(&CostInputs {
        config,
        policy,
        lambda_plane,
        orders: &orders,
        sl_plane: plane.sl_plane,
        sl_parking: coupled.parking.sl_parking,
        fuel_kg: coupled.transfer.fuel_kg,
    });
    Ok(SteadyStateMetrics {
        lambda_plane,
        relative_rate: coupled.relative_rate,
        transfer: coupled.transfer,
        t_w: if config.dual_channel_enabled { coupled.t_w } else { f64::INFINITY },
        plane,
        parking: coupled.parking,
        orders,
        cost,
        fixed_point: coupled.info,
    })
}

/// Evaluation with the auxiliary channel switched off.
pub fn evaluate_single_channel(config: &ScenarioConfig, policy: &SingleChannelPolicy) -> Result<SteadyStateMetrics> {
    if config.dual_channel_enabled {
        return Err(Error::config("single-channel evaluation needs dual_channel_enabled = false"));
    }
    evaluate(config, &policy.to_system())
}
