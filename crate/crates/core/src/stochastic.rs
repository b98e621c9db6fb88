//! Demand and lead-time distributions of the two-echelon model.
//!
//! Demand is Poisson. Launch lead times are shifted exponentials (mean-parameterised). The
//! parking-to-plane lead time is piecewise uniform over the alignment windows of the
//! j-th closest parking orbit, weighted by the geometric availability of each orbit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Mass left out when a Poisson table is truncated.
const POISSON_TRUNCATION: f64 = 1e-15;

/// ln(k!) without overflow.
pub fn ln_factorial(k: u64) -> f64 {
    const TABLE_LEN: usize = 32;
    static TABLE: std::sync::OnceLock<[f64; TABLE_LEN]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for i in 1..TABLE_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if (k as usize) < TABLE_LEN {
        return table[k as usize];
    }
    // Stirling series for ln Gamma(k + 1)
    let n = k as f64;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    n * n.ln() - n + 0.5 * (2.0 * PI * n).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Poisson demand with a rate in events per time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonDemand {
    pub rate: f64,
}

impl PoissonDemand {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::config(format!("Poisson rate must be positive, got {rate}")));
        }
        Ok(PoissonDemand { rate })
    }
}

/// P(N(tau) = k) for a Poisson process, evaluated in log space.
pub fn poisson_pmf(demand: &PoissonDemand, k: u64, tau: f64) -> f64 {
    pmf_with_mean(k, demand.rate * tau)
}

pub(crate) fn pmf_with_mean(k: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_factorial(k)).exp()
}

/// P(X >= k) for X ~ Poisson(mean), summing whichever side avoids cancellation.
pub fn poisson_upper_tail(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    if mean < k as f64 {
        let mut p = pmf_with_mean(k, mean);
        let mut sum = 0.0;
        let mut j = k;
        while p > 1e-18 * sum || sum == 0.0 {
            sum += p;
            j += 1;
            p *= mean / j as f64;
            if p == 0.0 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        let mut p = pmf_with_mean(k - 1, mean);
        let mut lower = 0.0;
        let mut j = k - 1;
        loop {
            lower += p;
            if j == 0 || p < 1e-18 * lower {
                break;
            }
            p *= j as f64 / mean;
            j -= 1;
        }
        (1.0 - lower).max(0.0)
    }
}

/// Truncated Poisson distribution with prefix and suffix sums, for repeated tail and
/// expected-shortage queries at a single mean.
#[derive(Debug, Clone)]
pub struct PoissonTable {
    mean: f64,
    lo: usize,
    pmf: Vec<f64>,
    /// cdf[i] = P(X <= lo + i)
    cdf: Vec<f64>,
    /// tail[i] = P(X > lo + i)
    tail: Vec<f64>,
}

impl PoissonTable {
    pub fn new(mean: f64) -> Self {
        let mut table = PoissonTable { mean: 0.0, lo: 0, pmf: Vec::new(), cdf: Vec::new(), tail: Vec::new() };
        table.reset(mean);
        table
    }

    /// Rebuilds the table in place for a new mean, reusing its buffers.
    pub fn reset(&mut self, mean: f64) {
        let mean = mean.max(0.0);
        self.mean = mean;
        self.pmf.clear();
        self.cdf.clear();
        self.tail.clear();
        if mean == 0.0 {
            self.lo = 0;
            self.pmf.push(1.0);
        } else {
            let mode = mean.floor() as u64;
            let p_mode = pmf_with_mean(mode, mean);
            // walk down from the mode
            let mut below = Vec::new();
            let mut p = p_mode;
            let mut k = mode;
            let mut acc = 0.0;
            while k > 0 {
                p *= k as f64 / mean;
                k -= 1;
                acc += p;
                below.push(p);
                if p < POISSON_TRUNCATION * 1e-3 && acc > 0.0 && p / acc < POISSON_TRUNCATION {
                    break;
                }
            }
            self.lo = k as usize;
            self.pmf.extend(below.iter().rev());
            self.pmf.push(p_mode);
            let mut p = p_mode;
            let mut k = mode;
            loop {
                k += 1;
                p *= mean / k as f64;
                self.pmf.push(p);
                if p < POISSON_TRUNCATION && (k as f64) > mean {
                    break;
                }
            }
        }
        let mut acc = 0.0;
        for &p in &self.pmf {
            acc += p;
            self.cdf.push(acc.min(1.0));
        }
        self.tail.resize(self.pmf.len(), 0.0);
        let mut acc = 0.0;
        for i in (0..self.pmf.len()).rev() {
            self.tail[i] = acc;
            acc += self.pmf[i];
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Smallest and largest k stored (everything outside has negligible mass).
    pub fn support(&self) -> (i64, i64) {
        (self.lo as i64, (self.lo + self.pmf.len() - 1) as i64)
    }

    pub fn pmf(&self, k: i64) -> f64 {
        if k < self.lo as i64 {
            return 0.0;
        }
        self.pmf.get(k as usize - self.lo).copied().unwrap_or(0.0)
    }

    /// P(X <= k)
    pub fn cdf(&self, k: i64) -> f64 {
        if k < self.lo as i64 {
            return 0.0;
        }
        self.cdf.get(k as usize - self.lo).copied().unwrap_or(1.0)
    }

    /// P(X > k)
    pub fn tail(&self, k: i64) -> f64 {
        if k < self.lo as i64 {
            // mass below lo is negligible
            return 1.0;
        }
        self.tail.get(k as usize - self.lo).copied().unwrap_or(0.0)
    }

    /// E[(X - s)^+] with the backorder continuation E[X] - s for s < 0.
    pub fn expected_shortage(&self, s: i64) -> f64 {
        if s <= 0 {
            return self.mean - s as f64;
        }
        self.mean * self.tail(s - 1) - s as f64 * self.tail(s)
    }

    /// Iterates (k, P(X = k)) over the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.pmf.iter().enumerate().map(move |(i, &p)| ((self.lo + i) as i64, p))
    }
}

/// Expected shortage E[(N(tau) - s)^+] of Poisson demand over a lead time `tau`.
/// For a negative reorder point all demand plus the existing deficit is short.
pub fn expected_shortage_poisson(s: i64, demand: &PoissonDemand, tau: f64) -> f64 {
    PoissonTable::new(demand.rate * tau).expected_shortage(s)
}

/// Mean stock level of an (s, Q) policy for a deterministic lead time.
pub fn mean_stock_level_sq(s: i64, q: u32, demand: &PoissonDemand, tau: f64) -> f64 {
    s as f64 - demand.rate * tau + q as f64 / 2.0 + 0.5
}

/// Time between the first and the second reorder point of the dual policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangInterOrder {
    pub shape: u32,
    pub rate: f64,
}

impl ErlangInterOrder {
    pub fn new(shape: u32, rate: f64) -> Result<Self> {
        if shape < 1 || !(rate > 0.0) {
            return Err(Error::config(format!("Erlang needs shape >= 1 and rate > 0, got ({shape}, {rate})")));
        }
        Ok(ErlangInterOrder { shape, rate })
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if self.shape == 1 {
            return self.rate * (-self.rate * t).exp();
        }
        if t == 0.0 {
            return 0.0;
        }
        let k = self.shape as u64;
        (k as f64 * self.rate.ln() + (k - 1) as f64 * t.ln() - self.rate * t - ln_factorial(k - 1)).exp()
    }

    /// P(T <= t) = P(N(t) >= shape).
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        poisson_upper_tail(self.shape as u64, self.rate * t)
    }

    pub fn mean(&self) -> f64 {
        self.shape as f64 / self.rate
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let mut hi = self.mean().max(1.0 / self.rate);
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A lead time that can be integrated against by the panel quadrature of the in-plane model.
pub trait LeadTime: Send + Sync {
    fn support_start(&self) -> f64;

    /// Points where the density jumps or carries an atom, sorted ascending.
    fn breakpoints(&self) -> Vec<f64>;

    fn cdf(&self, x: f64) -> f64;

    fn mean(&self) -> f64;

    /// Appends quadrature nodes over the half-open range (lo, hi] as (point, probability mass)
    /// pairs. `hi` may be infinite. `order` is the Gauss rule order per smooth panel.
    fn push_nodes(&self, lo: f64, hi: f64, order: usize, out: &mut Vec<(f64, f64)>);
}

/// Shifted exponential: z = t0 + Exp(mean_wait). Used for both launch channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedExponentialLead {
    pub mean_wait: f64,
    pub processing: f64,
}

impl ShiftedExponentialLead {
    pub fn new(mean_wait: f64, processing: f64) -> Result<Self> {
        if !(mean_wait > 0.0) || !(processing >= 0.0) {
            return Err(Error::config(format!(
                "shifted exponential needs mean wait > 0 and processing >= 0, got ({mean_wait}, {processing})"
            )));
        }
        Ok(ShiftedExponentialLead { mean_wait, processing })
    }

    pub fn pdf(&self, z: f64) -> f64 {
        if z < self.processing {
            return 0.0;
        }
        (-(z - self.processing) / self.mean_wait).exp() / self.mean_wait
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.processing - self.mean_wait * (-p).ln_1p()
    }
}

impl LeadTime for ShiftedExponentialLead {
    fn support_start(&self) -> f64 {
        self.processing
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.processing]
    }

    fn cdf(&self, z: f64) -> f64 {
        if z <= self.processing {
            0.0
        } else {
            -(-(z - self.processing) / self.mean_wait).exp_m1()
        }
    }

    fn mean(&self) -> f64 {
        self.processing + self.mean_wait
    }

    fn push_nodes(&self, lo: f64, hi: f64, order: usize, out: &mut Vec<(f64, f64)>) {
        let start = lo.max(self.processing);
        if hi <= start {
            return;
        }
        if hi.is_finite() {
            let norm = 1.0 / self.mean_wait;
            let rule = quadrature::legendre(order);
            let half = 0.5 * (hi - start);
            let mid = 0.5 * (hi + start);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let z = mid + half * x;
                out.push((z, w * half * norm * (-(z - self.processing) / self.mean_wait).exp()));
            }
        } else {
            // memoryless tail: z = start + mean_wait * s with s ~ Exp(1)
            let survival = (-(start - self.processing) / self.mean_wait).exp();
            let rule = quadrature::laguerre(order);
            for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                out.push((start + self.mean_wait * s, w * survival));
            }
        }
    }
}

/// Lead time from the parking echelon to a plane: alignment drift plus the transfer burn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferLead {
    /// [lower, upper) time bounds of the alignment window of the j-th closest orbit.
    pub intervals: Vec<(f64, f64)>,
    /// Normalised availability probability of the j-th closest orbit.
    pub weights: Vec<f64>,
    pub relative_rate: f64,
    pub t_trans: f64,
    pub n_parking: u32,
}

/// Parking fill rates below this make the "some orbit is always available" premise shaky.
pub const AVAILABILITY_WARNING_FILL_RATE: f64 = 0.9;

pub fn build_transfer_lead(n_parking: u32, relative_rate: f64, t_trans: f64, rho_parking: f64) -> Result<TransferLead> {
    if n_parking < 1 {
        return Err(Error::config("at least one parking orbit is required"));
    }
    if !(relative_rate > 0.0) || !relative_rate.is_finite() {
        return Err(Error::DegenerateDrift { rate: relative_rate, floor: crate::orbital::DEFAULT_DRIFT_FLOOR });
    }
    if !(rho_parking > 0.0 && rho_parking <= 1.0) {
        return Err(Error::config(format!("parking fill rate must lie in (0, 1], got {rho_parking}")));
    }
    if !(t_trans >= 0.0) {
        return Err(Error::config(format!("transfer time must be non-negative, got {t_trans}")));
    }
    if rho_parking < AVAILABILITY_WARNING_FILL_RATE {
        log::warn!("parking fill rate {rho_parking:.3} is low; the transfer lead time ignores all-orbits-empty events");
    }
    let width = 2.0 * PI / n_parking as f64 / relative_rate;
    let intervals = (0..n_parking)
        .map(|j| (j as f64 * width + t_trans, (j + 1) as f64 * width + t_trans))
        .collect();
    let raw: Vec<f64> = (0..n_parking as i32).map(|j| (1.0 - rho_parking).powi(j) * rho_parking).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    Ok(TransferLead { intervals, weights, relative_rate, t_trans, n_parking })
}

impl TransferLead {
    pub fn window_width(&self) -> f64 {
        2.0 * PI / self.n_parking as f64 / self.relative_rate
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let width = self.window_width();
        if y < self.t_trans {
            return 0.0;
        }
        let j = ((y - self.t_trans) / width).floor() as usize;
        self.weights.get(j).map_or(0.0, |w| w / width)
    }
}

impl LeadTime for TransferLead {
    fn support_start(&self) -> f64 {
        self.t_trans
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.intervals.iter().map(|iv| iv.0).collect();
        if let Some(last) = self.intervals.last() {
            b.push(last.1);
        }
        b
    }

    fn cdf(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for (&(a, b), &w) in self.intervals.iter().zip(&self.weights) {
            if y >= b {
                acc += w;
            } else if y > a {
                acc += w * (y - a) / (b - a);
            }
        }
        acc.min(1.0)
    }

    fn mean(&self) -> f64 {
        self.intervals.iter().zip(&self.weights).map(|(&(a, b), w)| w * 0.5 * (a + b)).sum()
    }

    fn push_nodes(&self, lo: f64, hi: f64, order: usize, out: &mut Vec<(f64, f64)>) {
        for (&(a, b), &w) in self.intervals.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let (s, e) = (a.max(lo), b.min(hi));
            if e > s {
                quadrature::push_legendre_nodes(s, e, order, w / (b - a), out);
            }
        }
    }
}

/// Finite set of atoms. Used for hand-checkable instances and for brute-force oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLead {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLead {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || (total - 1.0).abs() > 1e-12 || atoms.iter().any(|a| a.1 < 0.0 || a.0 < 0.0) {
            return Err(Error::config("discrete lead time needs non-negative atoms with probabilities summing to 1"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DiscreteLead { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

impl LeadTime for DiscreteLead {
    fn support_start(&self) -> f64 {
        self.atoms[0].0
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum()
    }

    fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.0 * a.1).sum()
    }

    fn push_nodes(&self, lo: f64, hi: f64, _order: usize, out: &mut Vec<(f64, f64)>) {
        out.extend(self.atoms.iter().filter(|a| a.0 > lo && a.0 <= hi).copied());
    }
}
