mod common;

use common::{case1, case1_policy};
use constellation_spares::system::{evaluate, evaluate_single_channel, Costs, SingleChannelPolicy, SystemPolicy};

fn single(policy: &SystemPolicy) -> SingleChannelPolicy {
    SingleChannelPolicy {
        r1: policy.plane.r1,
        q1: policy.plane.q1,
        parking: policy.parking,
        n_parking: policy.n_parking,
        h_parking_km: policy.h_parking_km,
    }
}

#[test]
fn tessac_is_sum_of_components() {
    let m = evaluate(&case1(), &case1_policy()).unwrap();
    let c = m.cost;
    assert_eq!(c.tessac, c.manufacturing + c.launch + c.maneuvering + c.holding);
    assert!([c.manufacturing, c.launch, c.maneuvering, c.holding].iter().all(|&x| x >= 0.0));
    assert!((c.manufacturing - 160.0).abs() < 1e-9);
    assert!(m.fixed_point.residual < 1e-7);
}

#[test]
fn orders_balance_failures() {
    let m = evaluate(&case1(), &case1_policy()).unwrap();
    assert!((m.orders.o1 * m.plane.q_plane - m.lambda_plane * 52.0).abs() < 1e-9);
    assert!((m.orders.o2 - m.orders.o1 * m.plane.p2).abs() < 1e-12);
    assert!((m.plane.p1 + m.plane.p2 - 1.0).abs() < 1e-12);
}

#[test]
fn no_failures_leaves_only_holding_cost() {
    let mut cfg = case1();
    cfg.constellation.lambda_sat_per_year = 0.0;
    let pol = case1_policy();
    let m = evaluate(&cfg, &pol).unwrap();
    assert_eq!(m.cost.manufacturing, 0.0);
    assert_eq!(m.cost.launch, 0.0);
    assert_eq!(m.cost.maneuvering, 0.0);
    assert_eq!(m.parking.rho_parking, 1.0);
    // idle stock levels: R1 + Q1/2 + 1/2 in plane, k_R + k_Q/2 + 1/2 batches at parking
    let sl_plane = 3.0 + 2.5 + 0.5;
    let sl_parking = 5.0 + 4.0 + 0.5;
    assert!((m.plane.sl_plane - sl_plane).abs() < 1e-12);
    assert!((m.parking.sl_parking - sl_parking).abs() < 1e-12);
    assert!((m.cost.holding - 0.5 * (sl_plane * 40.0 + sl_parking * 9.0 * 5.0)).abs() < 1e-9);
}

#[test]
fn all_cost_coefficients_zero_give_zero_cost() {
    let mut cfg = case1();
    cfg.costs = Costs { c_sat_musd: 0.0, h_s_musd: 0.0, eps_fuel_musd_per_kg: 0.0 };
    cfg.primary.cost_musd = 0.0;
    cfg.auxiliary.cost_musd = 0.0;
    assert_eq!(evaluate(&cfg, &case1_policy()).unwrap().cost.tessac, 0.0);
}

#[test]
fn holding_cost_is_linear_in_h_s() {
    let pol = case1_policy();
    let base = evaluate(&case1(), &pol).unwrap();
    let stock = base.total_mean_stock(&case1(), &pol);
    for dh in [0.1, 0.4, 1.0] {
        let mut cfg = case1();
        cfg.costs.h_s_musd += dh;
        let m = evaluate(&cfg, &pol).unwrap();
        assert!((m.cost.tessac - base.cost.tessac - dh * stock).abs() < 1e-9 * m.cost.tessac);
    }
}

#[test]
fn evaluation_is_deterministic() {
    let a = evaluate(&case1(), &case1_policy()).unwrap();
    let b = evaluate(&case1(), &case1_policy()).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn suppressed_auxiliary_mode_matches_single_channel() {
    let mut pol = case1_policy();
    pol.plane.r2 = pol.plane.r1 - 1000;
    pol.plane.alpha_w = 0.0;
    let dual = evaluate(&case1(), &pol).unwrap();
    let mut cfg = case1();
    cfg.dual_channel_enabled = false;
    let one = evaluate_single_channel(&cfg, &single(&pol)).unwrap();
    assert!(dual.plane.p2 < 1e-6);
    assert_eq!(one.plane.p2, 0.0);
    assert_eq!(one.orders.o2, 0.0);
    assert!((dual.cost.tessac - one.cost.tessac).abs() < 1e-3 * one.cost.tessac);
}

#[test]
fn single_channel_rejects_dual_config() {
    assert!(evaluate_single_channel(&case1(), &single(&case1_policy())).is_err());
}

#[test]
fn parking_above_plane_is_rejected() {
    let mut pol = case1_policy();
    pol.h_parking_km = 1300.0;
    assert!(evaluate(&case1(), &pol).is_err());
}

#[test]
fn fixed_point_settles_quickly() {
    let m = evaluate(&case1(), &case1_policy()).unwrap();
    assert!(m.fixed_point.iterations < 30, "{} iterations", m.fixed_point.iterations);
}
