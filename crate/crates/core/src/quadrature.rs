//! Gauss-Legendre and Gauss-Laguerre rules.
//!
//! Rules are generated once per order by Newton iteration on the orthogonal polynomial
//! recurrences and cached for the life of the process. Only power-of-two orders between
//! 2 and 256 are supported, which is what the panel-doubling refinement needs.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule on its reference domain.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub const MAX_ORDER: usize = 256;
const SLOTS: usize = 8; // 2, 4, ..., 256

fn slot(order: usize) -> usize {
    assert!(
        order.is_power_of_two() && (2..=MAX_ORDER).contains(&order),
        "unsupported quadrature order {order}"
    );
    order.trailing_zeros() as usize - 1
}

/// Gauss-Legendre rule on [-1, 1].
pub fn legendre(order: usize) -> &'static Rule {
    static RULES: [OnceLock<Rule>; SLOTS] = [const { OnceLock::new() }; SLOTS];
    RULES[slot(order)].get_or_init(|| legendre_rule(order))
}

/// Gauss-Laguerre rule for the weight e^{-x} on [0, inf).
pub fn laguerre(order: usize) -> &'static Rule {
    static RULES: [OnceLock<Rule>; SLOTS] = [const { OnceLock::new() }; SLOTS];
    RULES[slot(order)].get_or_init(|| laguerre_rule(order))
}

fn legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Returns (P_n(z), P_n'(z)).
fn legendre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
    }
    let dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, dp)
}

fn laguerre_rule(n: usize) -> Rule {
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut p2 = 0.0;
        for _ in 0..200 {
            let (p1, prev) = laguerre_eval(n, z);
            p2 = prev;
            let pp = nf * (p1 - p2) / z;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-14 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, prev) = laguerre_eval(n, z);
        if prev.is_finite() {
            p2 = prev;
        }
        nodes[i] = z;
        // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2) = 1 / (x_i L_n'(x_i)^2); use the
        // n L_{n-1} form to avoid a second derivative evaluation.
        let pp = nf * (laguerre_eval(n, z).0 - p2) / z;
        weights[i] = -1.0 / (pp * nf * p2);
    }
    Rule { nodes, weights }
}

/// Returns (L_n(z), L_{n-1}(z)).
fn laguerre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, p2)
}

/// Integrates `f` over the bounded interval [a, b] with a Gauss-Legendre rule.
pub fn integrate(a: f64, b: f64, order: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Pushes the Gauss-Legendre nodes of [a, b] (scaled weights) onto `out`.
pub fn push_legendre_nodes(a: f64, b: f64, order: usize, scale: f64, out: &mut Vec<(f64, f64)>) {
    if b <= a {
        return;
    }
    let rule = legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        out.push((mid + half * x, w * half * scale));
    }
}

/// Relative tolerance between two refinement levels of every integrated total.
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;
const START_ORDER: usize = 8;
const ABS_FLOOR: f64 = 1e-12;

/// Panel-wise integration with order doubling until two successive levels agree.
pub(crate) fn refine_panels<F>(quantity: &'static str, panels: &[(f64, f64)], dim: usize, mut eval: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, f64, usize, &mut [f64]),
{
    let mut coarse = vec![vec![0.0; dim]; panels.len()];
    let mut fine = vec![vec![0.0; dim]; panels.len()];
    let mut scale = vec![0.0; dim];
    for (i, &(lo, hi)) in panels.iter().enumerate() {
        eval(lo, hi, START_ORDER, &mut coarse[i]);
        eval(lo, hi, 2 * START_ORDER, &mut fine[i]);
        for (s, f) in scale.iter_mut().zip(&fine[i]) {
            *s += f.abs();
        }
    }
    let share = (panels.len().max(1) as f64).sqrt();
    let mut total = vec![0.0; dim];
    for (i, &(lo, hi)) in panels.iter().enumerate() {
        let mut order = 2 * START_ORDER;
        loop {
            let worst = coarse[i]
                .iter()
                .zip(&fine[i])
                .zip(&scale)
                .map(|((c, f), s)| (f - c).abs() / (REFINEMENT_TOLERANCE * s / share).max(ABS_FLOOR))
                .fold(0.0, f64::max);
            if worst <= 1.0 {
                break;
            }
            if order >= MAX_ORDER {
                let rel = coarse[i]
                    .iter()
                    .zip(&fine[i])
                    .zip(&scale)
                    .map(|((c, f), s)| (f - c).abs() / s.max(ABS_FLOOR))
                    .fold(0.0, f64::max);
                return Err(Error::NumericalNonConvergence { quantity, rel_change: rel, order });
            }
            order *= 2;
            coarse[i] = std::mem::replace(&mut fine[i], vec![0.0; dim]);
            eval(lo, hi, order, &mut fine[i]);
        }
        for (t, f) in total.iter_mut().zip(&fine[i]) {
            *t += f;
        }
    }
    Ok(total)
}
