//! (R, Q) policy of one parking orbit, counted in batches of Q1 satellites.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::stochastic::{PoissonTable, ShiftedExponentialLead};

/// Below this many planes the superposition of plane orders is a poor Poisson process.
pub const SUPERPOSITION_MIN_PLANES: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParkingPolicy {
    /// Reorder point, in batches.
    pub k_r: u32,
    /// Order quantity, in batches.
    pub k_q: u32,
}

impl ParkingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.k_q < 1 {
            return Err(Error::config("parking order quantity k_Q must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParkingMetrics {
    /// Batch orders per time unit arriving at one parking orbit.
    pub lambda_parking: f64,
    pub es_parking: f64,
    pub sl_parking: f64,
    pub rho_parking: f64,
    pub rho_clamped: bool,
}

/// Order rate seen by one parking orbit when all planes share the parking echelon evenly.
pub fn parking_demand_rate(n_plane: u32, lambda_plane: f64, q_plane: f64, n_parking: u32) -> f64 {
    if n_plane < SUPERPOSITION_MIN_PLANES {
        log::warn!("only {n_plane} planes feed the parking echelon; the Poisson superposition is approximate");
    }
    n_plane as f64 * lambda_plane / (q_plane * n_parking as f64)
}

/// Expected batch shortage per replenishment cycle, averaged over the ground lead time.
pub fn expected_shortage_parking(policy: &ParkingPolicy, lambda_parking: f64, l3: &ShiftedExponentialLead) -> Result<f64> {
    if lambda_parking == 0.0 {
        return Ok(0.0);
    }
    let mut table = PoissonTable::new(0.0);
    let k_r = policy.k_r as i64;
    let panels = [(l3.processing, f64::INFINITY)];
    let total = quadrature::refine_panels("parking expected shortage", &panels, 1, |_, _, order, out| {
        let rule = quadrature::laguerre(order);
        for (s, w) in rule.nodes.iter().zip(&rule.weights) {
            table.reset(lambda_parking * (l3.processing + l3.mean_wait * s));
            out[0] += w * table.expected_shortage(k_r);
        }
    })?;
    Ok(total[0].max(0.0))
}

/// Mean on-hand stock in batches: the deterministic-lead formula averaged over the lead time.
pub fn mean_stock_level_parking(policy: &ParkingPolicy, lambda_parking: f64, l3: &ShiftedExponentialLead) -> f64 {
    policy.k_r as f64 - lambda_parking * (l3.processing + l3.mean_wait) + policy.k_q as f64 / 2.0 + 0.5
}

pub fn fill_rate_parking(es_parking: f64, k_q: u32) -> (f64, bool) {
    let raw = 1.0 - es_parking / k_q as f64;
    let clamped = raw.clamp(0.0, 1.0);
    (clamped, clamped != raw)
}

pub fn evaluate_parking(policy: &ParkingPolicy, lambda_parking: f64, l3: &ShiftedExponentialLead) -> Result<ParkingMetrics> {
    policy.validate()?;
    let es_parking = expected_shortage_parking(policy, lambda_parking, l3)?;
    let (rho_parking, rho_clamped) = fill_rate_parking(es_parking, policy.k_q);
    Ok(ParkingMetrics {
        lambda_parking,
        es_parking,
        sl_parking: mean_stock_level_parking(policy, lambda_parking, l3),
        rho_parking,
        rho_clamped,
    })
}
