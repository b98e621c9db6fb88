//! Analytic in-plane metrics against the brute-force walker on micro instances.

mod common;

use common::oracle::enumerate;
use constellation_spares::inplane::{DualPolicy, PlaneModel};
use constellation_spares::stochastic::DiscreteLead;

fn check(pol: DualPolicy, lambda: f64, t_w: f64, l1: Vec<(f64, f64)>, l2: Vec<(f64, f64)>) {
    let oracle = enumerate(pol, lambda, t_w, &l1, &l2);
    let d1 = DiscreteLead::new(l1).unwrap();
    let d2 = DiscreteLead::new(l2).unwrap();
    let m = PlaneModel::new(pol, lambda, &d1, Some(&d2), t_w).unwrap().evaluate().unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    assert!(rel(m.p2, oracle.p2) < 1e-3, "p2 {} vs oracle {}", m.p2, oracle.p2);
    assert!(rel(m.es_plane, oracle.es) < 1e-3, "ES {} vs oracle {}", m.es_plane, oracle.es);
    assert!(rel(m.cs_plane, oracle.cs) < 1e-3, "CS {} vs oracle {}", m.cs_plane, oracle.cs);
    let es_sum: f64 = m.case_breakdown.es.iter().sum();
    let cs_sum: f64 = m.case_breakdown.cs.iter().sum();
    assert_eq!(es_sum, m.es_plane);
    assert_eq!(cs_sum, m.cs_plane);
    assert!(m.case_breakdown.es.iter().chain(&m.case_breakdown.cs).all(|&c| c >= 0.0));
}

#[test]
fn unit_policy_micro_instance() {
    let pol = DualPolicy { r1: 1, r2: 0, q1: 1, q2: 1, alpha_w: 0.0 };
    check(pol, 0.02, 2.0, vec![(1.0, 0.5), (2.5, 0.3), (4.0, 0.2)], vec![(0.5, 0.2), (1.5, 0.5), (3.0, 0.3)]);
}

#[test]
fn wide_window_micro_instance() {
    let pol = DualPolicy { r1: 1, r2: 0, q1: 1, q2: 1, alpha_w: 0.0 };
    check(pol, 0.03, 5.0, vec![(0.8, 0.3), (1.6, 0.4), (2.4, 0.3)], vec![(0.2, 0.6), (0.9, 0.3), (2.0, 0.1)]);
}

#[test]
fn erlang_two_micro_instance() {
    let pol = DualPolicy { r1: 2, r2: 0, q1: 2, q2: 1, alpha_w: 0.0 };
    check(pol, 0.08, 1.5, vec![(0.5, 0.2), (1.2, 0.5), (3.0, 0.3)], vec![(0.3, 0.3), (1.0, 0.4), (2.2, 0.3)]);
}

#[test]
fn high_demand_instance_with_shortage() {
    // enough demand that every case carries weight
    let pol = DualPolicy { r1: 1, r2: 0, q1: 2, q2: 1, alpha_w: 0.0 };
    check(pol, 0.15, 1.0, vec![(0.4, 0.3), (1.5, 0.4), (2.5, 0.3)], vec![(0.2, 0.3), (0.7, 0.4), (1.8, 0.3)]);
}
