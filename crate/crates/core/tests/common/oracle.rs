//! Brute-force reference for the in-plane analytics on small instances with atomic lead times.
//!
//! The walker enumerates demand counts per segment of the cycle, integrates the inter-order
//! time on a fine midpoint grid, and tracks the stock level segment by segment. It shares no
//! code with the library beyond the policy type.

use constellation_spares::inplane::DualPolicy;

const MAX_DEMAND: u64 = 8;
const T_STEPS: usize = 4000;

fn pmf(k: u64, m: f64) -> f64 {
    let mut p = (-m).exp();
    for j in 1..=k {
        p *= m / j as f64;
    }
    p
}

fn erlang(k: u32, rate: f64, t: f64) -> f64 {
    let mut f = rate * (-rate * t).exp();
    for j in 1..k {
        f *= rate * t / j as f64;
    }
    f
}

/// Stock level and running totals of one cycle path.
#[derive(Clone, Copy)]
struct Walk {
    level: i64,
    short: f64,
    area: f64,
}

impl Walk {
    fn fall(mut self, d: f64, k: i64) -> Walk {
        let a = self.level;
        self.short += (k - a.max(0)).max(0) as f64;
        self.area += if a <= 0 {
            0.0
        } else if a >= k {
            d * (a as f64 - k as f64 / 2.0)
        } else {
            d * (a * a) as f64 / (2.0 * k as f64)
        };
        self.level -= k;
        self
    }

    fn arrive(mut self, q: i64) -> Walk {
        self.level += q;
        self
    }

    fn drain(mut self, r1: i64, lambda: f64) -> Walk {
        if self.level > r1 {
            let top = self.level.max(0);
            let bottom = r1.max(0);
            self.area += ((top * top - bottom * bottom) as f64) / (2.0 * lambda);
        }
        self
    }
}

pub struct Oracle {
    pub es: f64,
    pub cs: f64,
    pub p2: f64,
}

pub fn enumerate(pol: DualPolicy, lambda: f64, t_w: f64, l1: &[(f64, f64)], l2: &[(f64, f64)]) -> Oracle {
    let (r1, r2, q1, q2) = (pol.r1 as i64, pol.r2 as i64, pol.q1 as i64, pol.q2 as i64);
    let gap = (r1 - r2) as u32;
    let mut out = Oracle { es: 0.0, cs: 0.0, p2: 0.0 };
    let mut add = |w: f64, walk: Walk| {
        out.es += w * walk.short;
        out.cs += w * walk.area;
    };
    for &(y, py) in l1 {
        let start = Walk { level: r1, short: 0.0, area: 0.0 };
        // one-order cycle: fewer than `gap` demands before min(y, t_w)
        let s1 = y.min(t_w);
        for x in 0..gap as u64 {
            let px = pmf(x, lambda * s1);
            let w = start.fall(s1, x as i64);
            if y > t_w {
                for x2 in 0..=MAX_DEMAND {
                    let px2 = pmf(x2, lambda * (y - t_w));
                    add(py * px * px2, w.fall(y - t_w, x2 as i64).arrive(q1).drain(r1, lambda));
                }
            } else {
                add(py * px, w.arrive(q1).drain(r1, lambda));
            }
        }
        // two-order cycle: the direct order is placed at t <= min(y, t_w)
        let h = s1 / T_STEPS as f64;
        for i in 0..T_STEPS {
            let t = (i as f64 + 0.5) * h;
            let pt = erlang(gap, lambda, t) * h;
            out.p2 += py * pt;
            let at_t = start.fall(t, gap as i64);
            for &(z, pz) in l2 {
                let w0 = py * pt * pz;
                if t + z > y {
                    for a in 0..=MAX_DEMAND {
                        let pa = pmf(a, lambda * (y - t));
                        let mid = at_t.fall(y - t, a as i64).arrive(q1);
                        for b in 0..=MAX_DEMAND {
                            let pb = pmf(b, lambda * (t + z - y));
                            add(w0 * pa * pb, mid.fall(t + z - y, b as i64).arrive(q2).drain(r1, lambda));
                        }
                    }
                } else {
                    for a in 0..=MAX_DEMAND {
                        let pa = pmf(a, lambda * z);
                        let mid = at_t.fall(z, a as i64).arrive(q2);
                        for b in 0..=MAX_DEMAND {
                            let pb = pmf(b, lambda * (y - t - z));
                            add(w0 * pa * pb, mid.fall(y - t - z, b as i64).arrive(q1).drain(r1, lambda));
                        }
                    }
                }
            }
        }
    }
    out
}
