use constellation_spares::inplane::{
    fill_rate_plane, order_cycle_probabilities, plane_failure_rate, DualPolicy, PlaneMetrics, PlaneModel,
};
use constellation_spares::quadrature::integrate;
use constellation_spares::stochastic::{
    build_transfer_lead, mean_stock_level_sq, ErlangInterOrder, LeadTime, PoissonDemand, ShiftedExponentialLead,
    TransferLead,
};
use proptest::prelude::*;

const LAMBDA: f64 = 8.0 / 52.0;

fn l1() -> TransferLead {
    build_transfer_lead(9, 0.1005, 0.0046, 0.98).unwrap()
}

fn l2() -> ShiftedExponentialLead {
    ShiftedExponentialLead::new(2.0, 2.0).unwrap()
}

fn metrics(pol: DualPolicy, lambda: f64) -> PlaneMetrics {
    let (a, b) = (l1(), l2());
    PlaneModel::new(pol, lambda, &a, Some(&b), pol.time_window(&a)).unwrap().evaluate().unwrap()
}

fn policy(r1: i32, r2: i32, q1: u32) -> DualPolicy {
    DualPolicy { r1, r2, q1, q2: 2, alpha_w: 1.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cycle_probabilities_sum_to_one(r1 in -2i32..8, gap in 1i32..6, q1 in 1u32..8, alpha in 0.0f64..2.0) {
        let pol = DualPolicy { r1, r2: r1 - gap, q1, q2: 2, alpha_w: alpha };
        let lead = l1();
        let (p1, p2) = order_cycle_probabilities(&pol, LAMBDA, &lead, pol.time_window(&lead)).unwrap();
        prop_assert!((p1 + p2 - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p2));
    }

    #[test]
    fn shortage_non_increasing_in_first_reorder_point(r1 in -1i32..6, gap in 1i32..5, q1 in 1u32..7) {
        let lo = metrics(policy(r1, r1 - gap, q1), LAMBDA).es_plane;
        let hi = metrics(policy(r1 + 1, r1 - gap, q1), LAMBDA).es_plane;
        prop_assert!(hi <= lo * (1.0 + 1e-6) + 1e-12, "ES {} -> {}", lo, hi);
    }

    #[test]
    fn two_order_probability_falls_with_gap(r1 in 0i32..6, gap in 1i32..6) {
        let lead = l1();
        let t_w = policy(r1, r1 - gap, 3).time_window(&lead);
        let (_, near) = order_cycle_probabilities(&policy(r1, r1 - gap, 3), LAMBDA, &lead, t_w).unwrap();
        let (_, far) = order_cycle_probabilities(&policy(r1, r1 - gap - 1, 3), LAMBDA, &lead, t_w).unwrap();
        prop_assert!(far <= near);
    }

    #[test]
    fn case_breakdown_is_consistent(r1 in -2i32..6, gap in 1i32..5, q1 in 1u32..6) {
        let m = metrics(policy(r1, r1 - gap, q1), LAMBDA);
        prop_assert_eq!(m.case_breakdown.es.iter().sum::<f64>(), m.es_plane);
        prop_assert_eq!(m.case_breakdown.cs.iter().sum::<f64>(), m.cs_plane);
        prop_assert!(m.case_breakdown.es.iter().chain(&m.case_breakdown.cs).all(|&c| c >= 0.0));
        prop_assert!((0.0..=1.0).contains(&m.rho_plane));
    }
}

#[test]
fn large_reorder_point_has_negligible_shortage() {
    assert!(metrics(policy(30, 25, 5), LAMBDA).es_plane < 1e-6);
}

#[test]
fn stock_level_approaches_idle_limit() {
    let pol = policy(3, -2, 5);
    let idle = metrics(pol, 0.0);
    assert_eq!(idle.es_plane, 0.0);
    assert_eq!(idle.p2, 0.0);
    assert!((idle.sl_plane - 6.0).abs() < 1e-12);
    let slow = metrics(pol, 1e-7);
    assert!((slow.sl_plane - idle.sl_plane).abs() < 1e-4, "{} vs {}", slow.sl_plane, idle.sl_plane);
}

#[test]
fn single_channel_stock_level_near_mean_lead_formula() {
    let lead = l1();
    for (r1, q1) in [(3, 5), (5, 3), (8, 10)] {
        let pol = policy(r1, r1 - 1, q1);
        let m = PlaneModel::new(pol, LAMBDA, &lead, None, f64::INFINITY).unwrap().evaluate().unwrap();
        assert_eq!(m.p2, 0.0);
        let demand = PoissonDemand::new(LAMBDA).unwrap();
        let approx = mean_stock_level_sq(r1 as i64, q1, &demand, lead.mean());
        assert!((m.sl_plane - approx).abs() < 0.05 * approx, "SL {} vs {}", m.sl_plane, approx);
    }
}

#[test]
fn fill_rate_clamp_is_flagged() {
    assert_eq!(fill_rate_plane(0.0, 5.0), (1.0, false));
    assert_eq!(fill_rate_plane(6.0, 5.0), (0.0, true));
    let (rho, clamped) = fill_rate_plane(0.1, 5.0);
    assert!((rho - 0.98).abs() < 1e-15 && !clamped);
}

#[test]
fn plane_failure_rate_examples() {
    assert!((plane_failure_rate(40, 0.2, 52) - 8.0 / 52.0).abs() < 1e-15);
    assert!((plane_failure_rate(40, 0.2, 365) - 8.0 / 365.0).abs() < 1e-15);
    assert_eq!(plane_failure_rate(40, 0.0, 52), 0.0);
}

fn total_mass(lead: &dyn LeadTime) -> f64 {
    let mut nodes = Vec::new();
    lead.push_nodes(lead.support_start(), f64::INFINITY, 64, &mut nodes);
    nodes.iter().map(|(_, w)| w).sum()
}

#[test]
fn densities_normalise() {
    for rho in [0.5, 0.9, 0.98, 1.0] {
        let lead = build_transfer_lead(7, 0.08, 0.01, rho).unwrap();
        let exact: f64 = lead.intervals.iter().map(|&(a, b)| lead.pdf(0.5 * (a + b)) * (b - a)).sum();
        assert!((exact - 1.0).abs() < 1e-8);
        assert!((total_mass(&lead) - 1.0).abs() < 1e-8);
        assert!((lead.cdf(lead.intervals[6].1) - 1.0).abs() < 1e-12);
    }
    for (mean, shift) in [(8.0, 12.0), (2.0, 2.0), (0.5, 0.0)] {
        assert!((total_mass(&ShiftedExponentialLead::new(mean, shift).unwrap()) - 1.0).abs() < 1e-8);
    }
    for shape in [1, 3, 9] {
        let g = ErlangInterOrder::new(shape, LAMBDA).unwrap();
        let hi = g.quantile(1.0 - 1e-14);
        let n = 200;
        let h = hi / n as f64;
        let mass: f64 = (0..n).map(|i| integrate(i as f64 * h, (i + 1) as f64 * h, 32, |t| g.pdf(t))).sum();
        assert!((mass - 1.0).abs() < 1e-8, "shape {shape}: {mass}");
    }
}
