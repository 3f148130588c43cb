use horobcz_core::section::SectionDynamics;
use horobcz_core::weakmix::{
    check_condition4, condition4_beta_scaling, correlation_diagnostic, Condition4Setup, Observable, ReturnWindow,
};
use horobcz_core::{QuadVal, SurfaceModel};

#[test]
fn intersection_measure_is_roughly_linear_in_beta() {
    let dynamics = SectionDynamics::<f64>::new(&SurfaceModel::torus(), &QuadVal::int(16)).unwrap();
    let window = ReturnWindow::calibrated(std::f64::consts::PI.powi(2) / 3.0).unwrap();
    let scaling = condition4_beta_scaling(&dynamics, 0.99, 0.5, &window, &[0.025, 0.05, 0.1, 0.2], 20_000, 11).unwrap();
    assert!(scaling.measures.iter().all(|m| m.mean > 0.0));
    let exponent = scaling.exponent.unwrap();
    assert!((exponent - 1.0).abs() <= 0.3, "exponent {exponent}, {scaling:?}");
}

#[test]
fn excursions_agree_on_golden_l() {
    let dynamics = SectionDynamics::<f64>::new(&SurfaceModel::golden_l(), &QuadVal::int(16)).unwrap();
    let setup = Condition4Setup { a: 0.98, beta: 0.1, s0: 0.4, windows: vec![ReturnWindow::calibrated(3.66).unwrap()] };
    let c = check_condition4(&dynamics, &setup, 5000, 12).unwrap();
    assert_eq!(c.n_returns, 5);
    assert_eq!(c.lemma_disagreements, 0);
    assert_eq!(c.time_disagreements, 0);
    assert_eq!(c.outcomes[0].implication_violations, 0);
    assert!(c.outcomes[0].intersection.mean > 0.0);
}

#[test]
fn exact_excursion_profile_matches_float() {
    let exact = SectionDynamics::<QuadVal>::new(&SurfaceModel::torus(), &QuadVal::int(16)).unwrap();
    let float = SectionDynamics::<f64>::new(&SurfaceModel::torus(), &QuadVal::int(16)).unwrap();
    for (s, t) in [(QuadVal::ratio(3, 5), QuadVal::ratio(7, 11)), (QuadVal::ratio(9, 10), QuadVal::ratio(1, 3))] {
        let p = exact.point(s, t, QuadVal::one()).unwrap();
        let h = QuadVal::ratio(19, 20);
        let e = exact.excursion_profile(&p, 6, &h).unwrap();
        let f = float.excursion_profile(&p.to_f64(), 6, &0.95).unwrap();
        assert!(e.counts_agree() && e.times_agree);
        assert_eq!((e.orbit_count, e.box_count), (f.orbit_count, f.box_count));
    }
}

#[test]
fn coordinate_correlations_decay_on_torus() {
    let dynamics = SectionDynamics::<f64>::new(&SurfaceModel::torus(), &QuadVal::int(16)).unwrap();
    let d = correlation_diagnostic(&dynamics, Observable::CoordT, 5000, &[10, 100, 1000], 4).unwrap();
    assert!(d.decreasing, "{d:?}");
}
