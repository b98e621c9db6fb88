//! Discrete-time Monte Carlo simulation of the two-echelon system.
//!
//! One step is one model time unit. Within a step events happen in a fixed order:
//! deliveries, then failures, then reorder checks. Parking orbits and planes carry real RAAN
//! angles advanced by their J2 precession rates, so the alignment delay of a transfer comes
//! from the simulated geometry rather than from the analytic lead-time density.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbital::{nodal_precession_rate, plan_transfer, CircularOrbit};
use crate::system::{LaunchChannel, ScenarioConfig, SteadyStateMetrics, SystemPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub horizon_years: u32,
    pub replications: u32,
    pub master_seed: u64,
    /// Leading years excluded from every statistic.
    pub warmup_years: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { horizon_years: 30, replications: 100, master_seed: 0, warmup_years: 2 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::config("at least one replication is required"));
        }
        if self.horizon_years <= self.warmup_years {
            return Err(Error::config(format!(
                "horizon of {} years must exceed the warmup of {} years",
                self.horizon_years, self.warmup_years
            )));
        }
        Ok(())
    }
}

/// RNG of one replication: the master seed selects the key, the replication index the
/// ChaCha stream, so streams never overlap.
pub fn seed_stream(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

/// Time-averaged and rate statistics of one replication (or their mean).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimMetrics {
    /// Batch requests per parking orbit per time unit.
    pub lambda_parking: f64,
    pub sl_plane: f64,
    /// Batches.
    pub sl_parking: f64,
    pub rho_plane: f64,
    pub rho_parking: f64,
    pub p2: f64,
    pub manufacturing: f64,
    pub launch: f64,
    pub maneuvering: f64,
    pub holding: f64,
    pub tessac: f64,
}

impl SimMetrics {
    fn fields_mut(&mut self) -> [&mut f64; 11] {
        [
            &mut self.lambda_parking,
            &mut self.sl_plane,
            &mut self.sl_parking,
            &mut self.rho_plane,
            &mut self.rho_parking,
            &mut self.p2,
            &mut self.manufacturing,
            &mut self.launch,
            &mut self.maneuvering,
            &mut self.holding,
            &mut self.tessac,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventCounts {
    pub failures: u64,
    pub plane_cycles: u64,
    pub two_order_cycles: u64,
    pub batch_requests: u64,
    pub direct_orders: u64,
    pub ground_orders: u64,
    /// Satellites short at the moment of failure.
    pub shortage_units: u64,
    pub delivered_satellites: u64,
}

impl EventCounts {
    fn add(&mut self, o: &EventCounts) {
        self.failures += o.failures;
        self.plane_cycles += o.plane_cycles;
        self.two_order_cycles += o.two_order_cycles;
        self.batch_requests += o.batch_requests;
        self.direct_orders += o.direct_orders;
        self.ground_orders += o.ground_orders;
        self.shortage_units += o.shortage_units;
        self.delivered_satellites += o.delivered_satellites;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    pub index: u32,
    pub metrics: SimMetrics,
    /// Events after warmup.
    pub counts: EventCounts,
    /// Failures and deliveries over the whole horizon, warmup included.
    pub horizon_failures: u64,
    pub horizon_delivered: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub replications: Vec<ReplicationStats>,
    /// Mean over replications.
    pub pooled: SimMetrics,
    /// Sum over replications.
    pub total_counts: EventCounts,
}

/// Model-versus-simulation errors. Relative errors are in percent of the simulated value and
/// are `None` when that value is zero; absolute errors are in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub lambda_parking_rel: Option<f64>,
    pub sl_plane_rel: Option<f64>,
    pub sl_parking_rel: Option<f64>,
    pub tessac_rel: Option<f64>,
    pub rho_plane_abs: f64,
    pub rho_parking_abs: f64,
    pub p2_abs: f64,
}

fn relative_error(sim: f64, model: f64) -> Option<f64> {
    (sim != 0.0).then(|| (sim - model).abs() / sim.abs() * 100.0)
}

pub fn error_metrics(sim: &SimMetrics, model: &SteadyStateMetrics) -> ErrorReport {
    ErrorReport {
        lambda_parking_rel: relative_error(sim.lambda_parking, model.parking.lambda_parking),
        sl_plane_rel: relative_error(sim.sl_plane, model.plane.sl_plane),
        sl_parking_rel: relative_error(sim.sl_parking, model.parking.sl_parking),
        tessac_rel: relative_error(sim.tessac, model.cost.tessac),
        rho_plane_abs: (sim.rho_plane - model.plane.rho_plane).abs() * 100.0,
        rho_parking_abs: (sim.rho_parking - model.parking.rho_parking).abs() * 100.0,
        p2_abs: (sim.p2 - model.plane.p2).abs() * 100.0,
    }
}

/// Step at which something placed at `step` with a continuous `delay` becomes available.
/// Deliveries are processed at the start of a step, so the earliest is the next one.
fn arrival_step(step: u64, delay: f64) -> u64 {
    step + (delay.round() as u64).max(1)
}

struct LeadSampler {
    processing: f64,
    wait: Option<Exp<f64>>,
}

impl LeadSampler {
    fn new(ch: &LaunchChannel) -> Result<Self> {
        let wait = if ch.mean_wait > 0.0 {
            Some(Exp::new(1.0 / ch.mean_wait).map_err(|e| Error::config(format!("launch waiting time: {e}")))?)
        } else {
            None
        };
        Ok(LeadSampler { processing: ch.processing, wait })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.processing + self.wait.as_ref().map_or(0.0, |e| e.sample(rng))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Batch {
    Waiting,
    Due(u64),
    Delivered,
}

struct Cycle {
    opened: u64,
    batch: Batch,
    direct: Option<u64>,
    direct_delivered: bool,
}

struct PlaneState {
    raan0: f64,
    net: i64,
    cycle: Option<Cycle>,
}

struct ParkingState {
    raan0: f64,
    on_hand: i64,
    pipeline: Vec<u64>,
}

/// Everything fixed for the whole run.
struct Setup {
    n_t: u64,
    lambda_plane: f64,
    plane_rate: f64,
    parking_rate: f64,
    t_trans: f64,
    fuel_kg: f64,
    t_w: f64,
    dual: bool,
    l2: LeadSampler,
    l3: LeadSampler,
}

/// Counters that only advance after warmup.
#[derive(Default)]
struct Tally {
    counts: EventCounts,
    visits: u64,
    misses: u64,
    plane_area: f64,
    parking_area: f64,
}

/// Time until the parking orbit's RAAN lines up with the plane's, following the drift.
fn alignment_delay(parking_raan: f64, plane_raan: f64, relative_rate: f64) -> f64 {
    if relative_rate > 0.0 {
        (plane_raan - parking_raan).rem_euclid(TAU) / relative_rate
    } else {
        (parking_raan - plane_raan).rem_euclid(TAU) / -relative_rate
    }
}

fn raan(raan0: f64, rate: f64, t: f64) -> f64 {
    (raan0 + rate * t).rem_euclid(TAU)
}

/// Takes one batch from the nearest stocked parking orbit. `tally` is `None` on retries so a
/// waiting request is only counted once.
fn take_batch(
    setup: &Setup,
    parking: &mut [ParkingState],
    plane_raan: f64,
    step: u64,
    order: &mut Vec<(f64, usize)>,
    mut tally: Option<&mut Tally>,
) -> Option<u64> {
    let t = step as f64;
    let rel = setup.parking_rate - setup.plane_rate;
    order.clear();
    order.extend(
        parking
            .iter()
            .enumerate()
            .map(|(j, p)| (alignment_delay(raan(p.raan0, setup.parking_rate, t), plane_raan, rel), j)),
    );
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(delay, j) in order.iter() {
        if let Some(t) = tally.as_deref_mut() {
            t.visits += 1;
        }
        if parking[j].on_hand > 0 {
            parking[j].on_hand -= 1;
            return Some(arrival_step(step, delay + setup.t_trans));
        }
        if let Some(t) = tally.as_deref_mut() {
            t.misses += 1;
        }
    }
    None
}

fn replicate(
    config: &ScenarioConfig,
    policy: &SystemPolicy,
    sim: &SimConfig,
    setup: &Setup,
    index: u32,
) -> Result<ReplicationStats> {
    let mut rng = seed_stream(sim.master_seed, index as u64);
    let n_plane = config.constellation.n_plane as usize;
    let n_parking = policy.n_parking as usize;
    let (r1, r2) = (policy.plane.r1 as i64, policy.plane.r2 as i64);
    let (q1, q2) = (policy.plane.q1 as i64, policy.plane.q2 as i64);
    let (k_r, k_q) = (policy.parking.k_r as i64, policy.parking.k_q as i64);
    let demand = if setup.lambda_plane > 0.0 {
        Some(Poisson::new(setup.lambda_plane).map_err(|e| Error::config(format!("failure rate: {e}")))?)
    } else {
        None
    };

    let phase = rng.random::<f64>() * TAU;
    let mut planes: Vec<PlaneState> = (0..n_plane)
        .map(|p| PlaneState { raan0: TAU * p as f64 / n_plane as f64, net: r1 + q1, cycle: None })
        .collect();
    let mut parking: Vec<ParkingState> = (0..n_parking)
        .map(|j| ParkingState {
            raan0: (phase + TAU * j as f64 / n_parking as f64).rem_euclid(TAU),
            on_hand: k_r + k_q,
            pipeline: Vec::new(),
        })
        .collect();

    let warmup = sim.warmup_years as u64 * setup.n_t;
    let horizon = sim.horizon_years as u64 * setup.n_t;
    let mut tally = Tally::default();
    let mut horizon_failures = 0u64;
    let mut horizon_delivered = 0u64;
    let mut order = Vec::with_capacity(n_parking);
    let mut parking_start = vec![0i64; n_parking];

    for step in 0..horizon {
        let measuring = step >= warmup;
        let t = step as f64;

        // deliveries
        for orbit in parking.iter_mut() {
            let before = orbit.pipeline.len();
            orbit.pipeline.retain(|&due| due > step);
            orbit.on_hand += (before - orbit.pipeline.len()) as i64 * k_q;
        }
        for plane in planes.iter_mut() {
            let Some(cycle) = plane.cycle.as_mut() else { continue };
            let mut delivered = 0;
            if let Batch::Due(due) = cycle.batch {
                if due <= step {
                    cycle.batch = Batch::Delivered;
                    delivered += q1;
                }
            }
            if let Some(due) = cycle.direct {
                if !cycle.direct_delivered && due <= step {
                    cycle.direct_delivered = true;
                    delivered += q2;
                }
            }
            plane.net += delivered;
            horizon_delivered += delivered as u64;
            if measuring {
                tally.counts.delivered_satellites += delivered as u64;
            }
            if cycle.batch == Batch::Delivered && (cycle.direct.is_none() || cycle.direct_delivered) {
                if measuring {
                    tally.counts.plane_cycles += 1;
                    tally.counts.two_order_cycles += cycle.direct.is_some() as u64;
                }
                plane.cycle = None;
            }
        }
        // requests that found every parking orbit empty
        for plane in planes.iter_mut() {
            if let Some(cycle) = plane.cycle.as_mut() {
                if cycle.batch == Batch::Waiting {
                    let plane_raan = raan(plane.raan0, setup.plane_rate, t);
                    if let Some(due) = take_batch(setup, &mut parking, plane_raan, step, &mut order, None) {
                        cycle.batch = Batch::Due(due);
                    }
                }
            }
        }
        for (start, orbit) in parking_start.iter_mut().zip(&parking) {
            *start = orbit.on_hand;
        }

        // failures
        for plane in planes.iter_mut() {
            let d = demand.as_ref().map_or(0, |p| p.sample(&mut rng) as i64);
            horizon_failures += d as u64;
            if measuring {
                let on_hand = plane.net.max(0);
                tally.counts.failures += d as u64;
                tally.counts.shortage_units += (d - on_hand).max(0) as u64;
                // failures are spread uniformly over the step
                let area: i64 = (0..=d).map(|j| (plane.net - j).max(0)).sum();
                tally.plane_area += area as f64 / (d + 1) as f64;
            }
            plane.net -= d;
        }

        // reorder checks
        for plane in planes.iter_mut() {
            let plane_raan = raan(plane.raan0, setup.plane_rate, t);
            if plane.cycle.is_none() && plane.net <= r1 {
                let counted = if measuring { Some(&mut tally) } else { None };
                let batch = match take_batch(setup, &mut parking, plane_raan, step, &mut order, counted) {
                    Some(due) => Batch::Due(due),
                    None => Batch::Waiting,
                };
                if measuring {
                    tally.counts.batch_requests += 1;
                }
                plane.cycle = Some(Cycle { opened: step, batch, direct: None, direct_delivered: false });
            }
            if let Some(cycle) = plane.cycle.as_mut() {
                if setup.dual
                    && cycle.direct.is_none()
                    && cycle.batch != Batch::Delivered
                    && plane.net <= r2
                    && (step - cycle.opened) as f64 <= setup.t_w
                {
                    cycle.direct = Some(arrival_step(step, setup.l2.sample(&mut rng)));
                    if measuring {
                        tally.counts.direct_orders += 1;
                    }
                }
            }
        }
        for orbit in parking.iter_mut() {
            // inventory position: on hand plus everything on order
            while orbit.on_hand + orbit.pipeline.len() as i64 * k_q <= k_r {
                orbit.pipeline.push(arrival_step(step, setup.l3.sample(&mut rng)));
                if measuring {
                    tally.counts.ground_orders += 1;
                }
            }
        }
        if measuring {
            for (start, orbit) in parking_start.iter().zip(&parking) {
                tally.parking_area += 0.5 * (start + orbit.on_hand) as f64;
            }
        }
    }

    let steps = (horizon - warmup) as f64;
    let years = steps / setup.n_t as f64;
    let c = &tally.counts;
    let sl_plane = tally.plane_area / (steps * n_plane as f64);
    let sl_parking = tally.parking_area / (steps * n_parking as f64);
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let k = &config.costs;
    let manufacturing = k.c_sat_musd * c.failures as f64 / years;
    let launch = (config.auxiliary.cost_musd * c.direct_orders as f64 + config.primary.cost_musd * c.ground_orders as f64) / years;
    let maneuvering = k.eps_fuel_musd_per_kg * setup.fuel_kg * (q1 as u64 * c.batch_requests) as f64 / years;
    let holding = k.h_s_musd * (sl_plane * n_plane as f64 + sl_parking * n_parking as f64 * q1 as f64);
    let metrics = SimMetrics {
        lambda_parking: c.batch_requests as f64 / (steps * n_parking as f64),
        sl_plane,
        sl_parking,
        rho_plane: 1.0 - ratio(c.shortage_units, c.delivered_satellites).min(1.0),
        rho_parking: 1.0 - ratio(tally.misses, tally.visits),
        p2: ratio(c.two_order_cycles, c.plane_cycles),
        manufacturing,
        launch,
        maneuvering,
        holding,
        tessac: manufacturing + launch + maneuvering + holding,
    };
    Ok(ReplicationStats { index, metrics, counts: tally.counts, horizon_failures, horizon_delivered })
}

/// Runs all replications, in parallel, and pools them in index order.
pub fn run(config: &ScenarioConfig, policy: &SystemPolicy, sim: &SimConfig) -> Result<SimulationStats> {
    config.validate()?;
    policy.validate(config)?;
    sim.validate()?;
    let unit = config.time_unit;
    let plane_orbit = config.plane_orbit()?;
    let parking_orbit = CircularOrbit::from_degrees(policy.h_parking_km, config.constellation.inclination_deg)?;
    let plane_rate = nodal_precession_rate(&plane_orbit, &config.earth, unit);
    let parking_rate = nodal_precession_rate(&parking_orbit, &config.earth, unit);
    let rel = (parking_rate - plane_rate).abs();
    if rel < crate::orbital::DEFAULT_DRIFT_FLOOR {
        return Err(Error::DegenerateDrift { rate: rel, floor: crate::orbital::DEFAULT_DRIFT_FLOOR });
    }
    let transfer = plan_transfer(&parking_orbit, &plane_orbit, &config.earth, &config.propulsion, unit);
    let width = TAU / policy.n_parking as f64 / rel;
    let setup = Setup {
        n_t: unit.per_year() as u64,
        lambda_plane: config.lambda_plane(),
        plane_rate,
        parking_rate,
        t_trans: transfer.duration,
        fuel_kg: transfer.fuel_kg,
        t_w: transfer.duration + policy.plane.alpha_w * width,
        dual: config.dual_channel_enabled,
        l2: LeadSampler::new(&config.auxiliary)?,
        l3: LeadSampler::new(&config.primary)?,
    };
    let replications = (0..sim.replications)
        .into_par_iter()
        .map(|i| replicate(config, policy, sim, &setup, i))
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = SimMetrics::default();
    let mut total_counts = EventCounts::default();
    for r in &replications {
        let mut m = r.metrics;
        for (acc, v) in pooled.fields_mut().into_iter().zip(m.fields_mut()) {
            *acc += *v;
        }
        total_counts.add(&r.counts);
    }
    let n = replications.len() as f64;
    for v in pooled.fields_mut() {
        *v /= n;
    }
    Ok(SimulationStats { replications, pooled, total_counts })
}
