//! Dual-sourcing (R1, R2, Q1, Q2) policy with a trigger window for one orbital plane.
//!
//! A cycle opens when the net stock hits R1: a batch Q1 is requested from the parking
//! echelon (lead time `y ~ l1`). If demand drives the stock down to R2 within `t_w` of the
//! first trigger and before the batch arrives, a direct order of Q2 is placed (lead time
//! `z ~ l2`). The inter-order time `t` is Erlang(R1 - R2, lambda).
//!
//! Two-order kernels depend on `y` and `t` only through `u = y - t`, plus a stock-area term
//! linear in `t`. The triple integral over (y, t, z) is therefore evaluated as a single
//! integral over `u` whose weight, the Erlang mass compatible with `y = u + t`, has a closed
//! form for piecewise-uniform `l1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::stochastic::{
    poisson_upper_tail, DiscreteLead, ErlangInterOrder, LeadTime, PoissonTable, TransferLead,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualPolicy {
    pub r1: i32,
    pub r2: i32,
    pub q1: u32,
    pub q2: u32,
    pub alpha_w: f64,
}

impl DualPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.r1 - self.r2 < 1 {
            return Err(Error::config(format!("R1 - R2 must be at least 1, got R1={} R2={}", self.r1, self.r2)));
        }
        if self.q1 < 1 || self.q2 < 1 {
            return Err(Error::config("order quantities Q1 and Q2 must be at least 1"));
        }
        if !(self.alpha_w >= 0.0) || !self.alpha_w.is_finite() {
            return Err(Error::config(format!("alpha_w must be finite and non-negative, got {}", self.alpha_w)));
        }
        Ok(())
    }

    /// Length of the window in which the direct order may be placed.
    pub fn time_window(&self, l1: &TransferLead) -> f64 {
        l1.t_trans + self.alpha_w * l1.window_width()
    }

    fn gap(&self) -> u32 {
        (self.r1 - self.r2) as u32
    }
}

/// Failure rate of one plane, per time unit.
pub fn plane_failure_rate(n_sats: u32, lambda_sat_per_year: f64, n_t: u32) -> f64 {
    n_sats as f64 * lambda_sat_per_year / n_t as f64
}

/// Per-case contributions. Cases: 1/2 one-order cycle with the batch arriving inside/after
/// the window; 3/4 two-order cycle inside the window with the batch arriving first/last;
/// 5/6 the same with the batch arriving after the window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CaseBreakdown {
    pub es: [f64; 6],
    pub cs: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneMetrics {
    pub es_plane: f64,
    pub cs_plane: f64,
    pub sl_plane: f64,
    pub q_plane: f64,
    pub t_cycle: f64,
    pub p1: f64,
    pub p2: f64,
    pub rho_plane: f64,
    /// The raw fill rate fell outside [0, 1] and was clamped.
    pub rho_clamped: bool,
    pub case_breakdown: CaseBreakdown,
}

/// First-order lead times the in-plane engine can integrate against.
pub trait FirstOrderLead: LeadTime {
    /// Largest possible lead time.
    fn support_end(&self) -> f64;

    /// Returns `(m0, m1)` = integral over t in (0, t_max] with y = u + t in the requested
    /// side of `t_w` of `(1, t) * g(t) * l1(u + t) dt`.
    fn window_moments(&self, g: &ErlangInterOrder, u: f64, t_w: f64, beyond_window: bool) -> (f64, f64);
}

fn erlang_cdf(shape: u32, rate: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        poisson_upper_tail(shape as u64, rate * t)
    }
}

impl FirstOrderLead for TransferLead {
    fn support_end(&self) -> f64 {
        self.intervals.last().map_or(self.t_trans, |iv| iv.1)
    }

    fn window_moments(&self, g: &ErlangInterOrder, u: f64, t_w: f64, beyond_window: bool) -> (f64, f64) {
        let (mut m0, mut m1) = (0.0, 0.0);
        for (&(a, b), &w) in self.intervals.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let (ya, yb) = if beyond_window { (a.max(t_w), b) } else { (a, b.min(t_w)) };
            if yb <= ya {
                continue;
            }
            let t1 = (ya - u).max(0.0);
            let t2 = (yb - u).min(t_w);
            if t2 <= t1 {
                continue;
            }
            let dens = w / (b - a);
            m0 += dens * (erlang_cdf(g.shape, g.rate, t2) - erlang_cdf(g.shape, g.rate, t1));
            m1 += dens * g.shape as f64 / g.rate
                * (erlang_cdf(g.shape + 1, g.rate, t2) - erlang_cdf(g.shape + 1, g.rate, t1));
        }
        (m0, m1)
    }
}

impl FirstOrderLead for DiscreteLead {
    fn support_end(&self) -> f64 {
        self.atoms().last().map_or(0.0, |a| a.0)
    }

    fn window_moments(&self, g: &ErlangInterOrder, u: f64, t_w: f64, beyond_window: bool) -> (f64, f64) {
        let (mut m0, mut m1) = (0.0, 0.0);
        for &(y, p) in self.atoms() {
            if (y > t_w) != beyond_window {
                continue;
            }
            let t = y - u;
            if t > 0.0 && t <= t_w {
                let d = p * g.pdf(t);
                m0 += d;
                m1 += d * t;
            }
        }
        (m0, m1)
    }
}

/// Time-integral of on-hand stock over `d` while the level falls linearly from `a` by `k`,
/// floored at zero.
fn pos_area(d: f64, a: i64, k: i64) -> f64 {
    if a <= 0 {
        0.0
    } else if a >= k {
        d * (a as f64 - k as f64 / 2.0)
    } else {
        d * (a * a) as f64 / (2.0 * k as f64)
    }
}

/// Poisson table with the extra prefix sums needed for expected stock areas.
struct DemandTable {
    t: PoissonTable,
    /// m1[i] = sum_{j <= lo+i} j pmf(j)
    m1: Vec<f64>,
    /// inv[i] = sum_{j > lo+i} pmf(j)/j
    inv: Vec<f64>,
    inv_total: f64,
}

impl DemandTable {
    fn new() -> Self {
        DemandTable { t: PoissonTable::new(0.0), m1: Vec::new(), inv: Vec::new(), inv_total: 0.0 }
    }

    fn reset(&mut self, mean: f64) -> &Self {
        self.t.reset(mean);
        self.m1.clear();
        self.inv.clear();
        let mut acc = 0.0;
        for (k, p) in self.t.iter() {
            acc += k as f64 * p;
            self.m1.push(acc);
        }
        let n = self.m1.len();
        self.inv.resize(n, 0.0);
        let mut acc = 0.0;
        let lo = self.t.support().0;
        for i in (0..n).rev() {
            self.inv[i] = acc;
            let k = lo + i as i64;
            if k > 0 {
                acc += self.t.pmf(k) / k as f64;
            }
        }
        self.inv_total = acc;
        self
    }

    fn idx(&self, k: i64) -> Option<usize> {
        let lo = self.t.support().0;
        if k < lo {
            None
        } else {
            Some((k - lo) as usize)
        }
    }

    /// E[area] of a linear fall from level `s` by a Poisson amount over duration `d`.
    fn mean_area(&self, d: f64, s: i64) -> f64 {
        if s <= 0 {
            return 0.0;
        }
        let (cdf, m1, inv) = match self.idx(s) {
            None => (0.0, 0.0, self.inv_total),
            Some(i) if i < self.m1.len() => (self.t.cdf(s), self.m1[i], self.inv[i]),
            Some(_) => (1.0, *self.m1.last().unwrap_or(&0.0), 0.0),
        };
        d * (s as f64 * cdf - 0.5 * m1 + 0.5 * (s * s) as f64 * inv)
    }
}

/// Evaluation context for one plane.
pub struct PlaneModel<'a> {
    policy: DualPolicy,
    lambda: f64,
    l1: &'a dyn FirstOrderLead,
    /// None selects the single-channel model.
    l2: Option<&'a dyn LeadTime>,
    t_w: f64,
    g: Option<ErlangInterOrder>,
}

struct Scratch {
    a: DemandTable,
    b: DemandTable,
    c: DemandTable,
    nodes: Vec<(f64, f64)>,
    inner: Vec<(f64, f64)>,
}

impl Scratch {
    fn new() -> Self {
        Scratch { a: DemandTable::new(), b: DemandTable::new(), c: DemandTable::new(), nodes: Vec::new(), inner: Vec::new() }
    }
}

impl<'a> PlaneModel<'a> {
    pub fn new(
        policy: DualPolicy,
        lambda: f64,
        l1: &'a dyn FirstOrderLead,
        l2: Option<&'a dyn LeadTime>,
        t_w: f64,
    ) -> Result<Self> {
        policy.validate()?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::config(format!("plane failure rate must be finite and non-negative, got {lambda}")));
        }
        if l2.is_some() && !(t_w >= 0.0) {
            return Err(Error::config(format!("time window must be non-negative, got {t_w}")));
        }
        let g = if lambda > 0.0 { Some(ErlangInterOrder::new(policy.gap(), lambda)?) } else { None };
        Ok(PlaneModel { policy, lambda, l1, l2, t_w: if l2.is_some() { t_w } else { f64::INFINITY }, g })
    }

    fn r1(&self) -> i64 {
        self.policy.r1 as i64
    }

    fn r2(&self) -> i64 {
        self.policy.r2 as i64
    }

    fn gap(&self) -> i64 {
        self.policy.gap() as i64
    }

    /// Stock area of the final linear drain from `level` back down to R1.
    fn drain(&self, level: i64) -> f64 {
        let floor = self.r1().max(0);
        if level <= floor {
            return 0.0;
        }
        ((level * level - floor * floor) as f64) / (2.0 * self.lambda)
    }

    /// Expected drain area when the level before draining is `top - N(mean)`.
    fn mean_drain(&self, top: i64, mean: f64) -> f64 {
        let floor = self.r1().max(0);
        if top <= floor {
            return 0.0;
        }
        let mut p = (-mean).exp();
        if p == 0.0 {
            // demand over the interval dwarfs the level: no positive drain left
            return 0.0;
        }
        let mut acc = 0.0;
        for n in 0..(top - floor) {
            let l = top - n;
            acc += p * (l * l - floor * floor) as f64;
            p *= mean / (n + 1) as f64;
        }
        acc / (2.0 * self.lambda)
    }

    fn y_panels(&self) -> Vec<(f64, f64)> {
        let mut edges = self.l1.breakpoints();
        if self.t_w.is_finite() {
            edges.push(self.t_w);
        }
        sort_dedup(&mut edges);
        let mut panels = Vec::with_capacity(edges.len() + 1);
        let mut lo = f64::NEG_INFINITY;
        for &e in &edges {
            panels.push((lo, e));
            lo = e;
        }
        panels.push((lo, f64::INFINITY));
        panels
    }

    /// Probability of a two-order cycle.
    pub fn two_order_probability(&self) -> Result<f64> {
        let Some(g) = self.g else { return Ok(0.0) };
        if self.l2.is_none() {
            return Ok(0.0);
        }
        let panels = self.y_panels();
        let l1 = self.l1;
        let t_w = self.t_w;
        let mut nodes = Vec::new();
        let total = quadrature::refine_panels("p2", &panels, 1, |lo, hi, order, out| {
            nodes.clear();
            l1.push_nodes(lo, hi, order, &mut nodes);
            for &(y, w) in &nodes {
                out[0] += w * erlang_cdf(g.shape, g.rate, y.min(t_w));
            }
        })?;
        Ok(total[0].clamp(0.0, 1.0))
    }

    /// One-order cases 1 and 2: [ES1, ES2, CS1, CS2].
    fn one_order_cases(&self, scratch: &mut Scratch) -> Result<[f64; 4]> {
        let panels = self.y_panels();
        let (r1, gap, q1) = (self.r1(), self.gap(), self.policy.q1 as i64);
        let lambda = self.lambda;
        let t_w = self.t_w;
        let single = self.l2.is_none();
        let Scratch { a: window, b: rest, nodes, .. } = scratch;
        if !single {
            window.reset(lambda * t_w);
        }
        let window = &*window;
        let l1 = self.l1;
        let total = quadrature::refine_panels("one-order cycle", &panels, 4, |lo, hi, order, out| {
            nodes.clear();
            l1.push_nodes(lo, hi, order, nodes);
            for &(y, w) in nodes.iter() {
                if single {
                    let tab = rest.reset(lambda * y);
                    out[0] += w * tab.t.expected_shortage(r1);
                    let (klo, khi) = tab.t.support();
                    let mut cs = 0.0;
                    for x in klo..=khi {
                        cs += tab.t.pmf(x) * (pos_area(y, r1, x) + self.drain(r1 - x + q1));
                    }
                    out[2] += w * cs;
                } else if y <= t_w {
                    let tab = rest.reset(lambda * y);
                    let (mut es, mut cs) = (0.0, 0.0);
                    for x in 0..gap {
                        let p = tab.t.pmf(x);
                        if x > r1 {
                            es += (x - r1) as f64 * p;
                        }
                        cs += p * (pos_area(y, r1, x) + self.drain(r1 - x + q1));
                    }
                    out[0] += w * es;
                    out[2] += w * cs;
                } else {
                    let v = y - t_w;
                    let tab = rest.reset(lambda * v);
                    let (mut es, mut cs) = (0.0, 0.0);
                    for x in 0..gap {
                        let p = window.t.pmf(x);
                        if p == 0.0 {
                            continue;
                        }
                        let s = r1 - x;
                        es += p * tab.t.expected_shortage(s);
                        cs += p * (pos_area(t_w, r1, x) + tab.mean_area(v, s) + self.mean_drain(s + q1, lambda * v));
                    }
                    out[1] += w * es;
                    out[3] += w * cs;
                }
            }
        })?;
        Ok([total[0], total[1], total[2], total[3]])
    }

    /// Two-order cases 3..6: [ES3, ES4, ES5, ES6, CS3, CS4, CS5, CS6, P_within, P_beyond].
    fn two_order_cases(&self, scratch: &mut Scratch) -> Result<[f64; 10]> {
        let (Some(g), Some(l2)) = (self.g, self.l2) else { return Ok([0.0; 10]) };
        let y_end = self.l1.support_end();
        let t_w = self.t_w;
        let u_lo = (self.l1.support_start() - t_w).max(0.0);
        if !(y_end > u_lo) {
            return Ok([0.0; 10]);
        }
        let mut edges = vec![u_lo, y_end];
        for b in self.l1.breakpoints().into_iter().chain(std::iter::once(t_w)) {
            edges.push(b);
            edges.push(b - t_w);
        }
        edges.extend(l2.breakpoints());
        edges.retain(|&e| e >= u_lo && e <= y_end);
        sort_dedup(&mut edges);
        let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();

        let (r1, r2) = (self.r1(), self.r2());
        let (q1, q2) = (self.policy.q1 as i64, self.policy.q2 as i64);
        let lambda = self.lambda;
        let c_t = pos_area(1.0, r1, self.gap());
        let l1 = self.l1;
        let total = quadrature::refine_panels("two-order cycle", &panels, 10, |lo, hi, order, out| {
            let rule = quadrature::legendre(order);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
                let u = mid + half * xi;
                let w = wi * half;
                let (m0_in, m1_in) = l1.window_moments(&g, u, t_w, false);
                let (m0_out, m1_out) = l1.window_moments(&g, u, t_w, true);
                if m0_in == 0.0 && m0_out == 0.0 {
                    continue;
                }
                let k = self.inner_kernels(u, order, l2, r2, q1, q2, lambda, scratch);
                let p21 = l2.cdf(u);
                let p12 = 1.0 - p21;
                out[0] += w * m0_in * k.es12;
                out[1] += w * m0_in * k.es21;
                out[2] += w * m0_out * k.es12;
                out[3] += w * m0_out * k.es21;
                out[4] += w * (m0_in * k.cs12 + c_t * m1_in * p12);
                out[5] += w * (m0_in * k.cs21 + c_t * m1_in * p21);
                out[6] += w * (m0_out * k.cs12 + c_t * m1_out * p12);
                out[7] += w * (m0_out * k.cs21 + c_t * m1_out * p21);
                out[8] += w * m0_in;
                out[9] += w * m0_out;
            }
        })?;
        let mut res = [0.0; 10];
        res.copy_from_slice(&total);
        Ok(res)
    }

    /// Integrals over the direct-order lead time at fixed u = y - t.
    #[allow(clippy::too_many_arguments)]
    fn inner_kernels(
        &self,
        u: f64,
        order: usize,
        l2: &dyn LeadTime,
        r2: i64,
        q1: i64,
        q2: i64,
        lambda: f64,
        scratch: &mut Scratch,
    ) -> InnerKernels {
        let Scratch { a: tu, b: tz, c: tv, inner, .. } = scratch;
        let tu = tu.reset(lambda * u);
        let mut k = InnerKernels::default();

        // batch arrives first (z > u): demand x over u, then x' over v = z - u
        inner.clear();
        l2.push_nodes(u, f64::INFINITY, order, inner);
        let s1 = r2 + q1;
        let mut mass12 = 0.0;
        for &(z, w) in inner.iter() {
            mass12 += w;
            let v = z - u;
            let tab = tv.reset(lambda * v);
            let (mut es, mut cs) = (0.0, 0.0);
            for x in tu.t.support().0.max(0)..s1 {
                let p = tu.t.pmf(x);
                es += p * tab.t.expected_shortage(s1 - x);
                cs += p * tab.mean_area(v, s1 - x);
            }
            es += tab.t.mean() * tu.t.tail(s1 - 1);
            cs += self.mean_drain(r2 + q1 + q2, lambda * z);
            k.es12 += w * es;
            k.cs12 += w * cs;
        }
        k.es12 += mass12 * tu.t.expected_shortage(r2);
        k.cs12 += mass12 * tu.mean_area(u, r2);

        // direct order arrives first (z <= u): demand x over z, then x' over u - z
        inner.clear();
        l2.push_nodes(f64::NEG_INFINITY, u, order, inner);
        let s2 = r2 + q2;
        let mut mass21 = 0.0;
        for &(z, w) in inner.iter() {
            mass21 += w;
            let v = u - z;
            let zt = tz.reset(lambda * z);
            let tab = tv.reset(lambda * v);
            let mut es = zt.t.expected_shortage(r2);
            let mut cs = zt.mean_area(z, r2);
            for x in zt.t.support().0.max(0)..s2 {
                let p = zt.t.pmf(x);
                es += p * tab.t.expected_shortage(s2 - x);
                cs += p * tab.mean_area(v, s2 - x);
            }
            es += tab.t.mean() * zt.t.tail(s2 - 1);
            k.es21 += w * es;
            k.cs21 += w * cs;
        }
        k.cs21 += mass21 * self.mean_drain(r2 + q1 + q2, lambda * u);
        k
    }

    /// Full metrics for the plane.
    pub fn evaluate(&self) -> Result<PlaneMetrics> {
        let (q1, q2) = (self.policy.q1 as f64, self.policy.q2 as f64);
        if self.lambda == 0.0 {
            let top = (self.r1() + self.policy.q1 as i64).max(0);
            let floor = self.r1().max(0);
            let sl = ((top * top - floor * floor) as f64) / (2.0 * q1) + 0.5;
            return Ok(PlaneMetrics {
                es_plane: 0.0,
                cs_plane: f64::INFINITY,
                sl_plane: sl,
                q_plane: q1,
                t_cycle: f64::INFINITY,
                p1: 1.0,
                p2: 0.0,
                rho_plane: 1.0,
                rho_clamped: false,
                case_breakdown: CaseBreakdown::default(),
            });
        }
        let mut scratch = Scratch::new();
        let p2 = self.two_order_probability()?;
        let one = self.one_order_cases(&mut scratch)?;
        let two = self.two_order_cases(&mut scratch)?;
        let breakdown = CaseBreakdown {
            es: [one[0], one[1], two[0], two[1], two[2], two[3]],
            cs: [one[2], one[3], two[4], two[5], two[6], two[7]],
        };
        let es_plane: f64 = breakdown.es.iter().sum();
        let cs_plane: f64 = breakdown.cs.iter().sum();
        let q_plane = q1 + q2 * p2;
        let (rho_plane, rho_clamped) = fill_rate_plane(es_plane, q_plane);
        Ok(PlaneMetrics {
            es_plane,
            cs_plane,
            sl_plane: mean_stock_level_plane(cs_plane, q_plane, self.lambda),
            q_plane,
            t_cycle: q_plane / self.lambda,
            p1: 1.0 - p2,
            p2,
            rho_plane,
            rho_clamped,
            case_breakdown: breakdown,
        })
    }
}

#[derive(Debug, Default)]
struct InnerKernels {
    es12: f64,
    es21: f64,
    cs12: f64,
    cs21: f64,
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.retain(|x| x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
}

/// `(p1, p2)` of the dual policy.
pub fn order_cycle_probabilities(
    policy: &DualPolicy,
    lambda_plane: f64,
    l1: &dyn FirstOrderLead,
    t_w: f64,
) -> Result<(f64, f64)> {
    // l2 is irrelevant for the cycle type; any direct lead will do
    let dummy = DiscreteLead::new(vec![(0.0, 1.0)])?;
    let p2 = PlaneModel::new(*policy, lambda_plane, l1, Some(&dummy), t_w)?.two_order_probability()?;
    Ok((1.0 - p2, p2))
}

pub fn expected_shortage_plane(model: &PlaneModel<'_>) -> Result<(f64, CaseBreakdown)> {
    let m = model.evaluate()?;
    Ok((m.es_plane, m.case_breakdown))
}

pub fn average_cycle_stock_plane(model: &PlaneModel<'_>) -> Result<(f64, CaseBreakdown)> {
    let m = model.evaluate()?;
    Ok((m.cs_plane, m.case_breakdown))
}

pub fn mean_stock_level_plane(cs_plane: f64, q_plane: f64, lambda_plane: f64) -> f64 {
    cs_plane * lambda_plane / q_plane + 0.5
}

/// Fill rate and whether it had to be clamped into [0, 1].
pub fn fill_rate_plane(es_plane: f64, q_plane: f64) -> (f64, bool) {
    let raw = 1.0 - es_plane / q_plane;
    let clamped = raw.clamp(0.0, 1.0);
    (clamped, clamped != raw)
}
