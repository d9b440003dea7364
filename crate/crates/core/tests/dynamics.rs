//! Documented examples of the dynamical constructions, through the public API.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;

use erasing_dyn::catalog::{sigma2, sigma3, sigma4};
use erasing_dyn::dynamics::{
    almost_fixed_witness, dense_orbit_point, eval_f, fiber_samples, iterate_f, lift_prefix, lift_through, membership,
    mixing_witness, preimage_point, scrambled_pair, sensitivity_witness, strip_eps, xi_insert, DynError,
    PairEventKind, Schedule,
};
use erasing_dyn::entropy::{d_n, entropy_lower_bound, max_vanishing_order, separated_family};
use erasing_dyn::{Exec, FiniteWord, PeriodicWord, UnitReal};

fn w(t: &str) -> FiniteWord {
    t.parse().unwrap()
}

fn q(t: &str) -> UnitReal {
    t.parse().unwrap()
}

fn half() -> Ratio<BigUint> {
    Ratio::new(BigUint::one(), BigUint::from(2u8))
}

#[test]
fn evaluation_and_preimages() {
    let s = sigma3();
    assert_eq!(eval_f(&s, &q("1")), q("1/3"));
    assert_eq!(eval_f(&s, &q("1/3")), q("1"));
    assert!(eval_f(&sigma2(), &q("1/3")).is_zero());
    for (y, x) in [("1/3", "1"), ("1", "1/3"), ("0", "2/3")] {
        let found = preimage_point(&s, &q(y)).unwrap();
        assert_eq!(found, q(x), "preimage of {y}");
    }
    assert!(matches!(preimage_point(&sigma4(), &q("1/2")), Err(DynError::NotOptimal)));
}

#[test]
fn membership_flags() {
    let s = sigma3();
    let m = membership(&s, &q("1/3"));
    assert!(!m.in_q2 && !m.in_e && !m.in_f && m.in_c);
    let m = membership(&s, &q("1/2"));
    assert!(m.in_q2 && !m.in_e);
    assert!(membership(&sigma2(), &q("1/3")).in_e);
}

#[test]
fn fibers_and_insertions() {
    let s = sigma3();
    let u = PeriodicWord::pure(w("11"));
    let x = xi_insert(&s, &u, &Schedule { prefix: vec![2], cycle: vec![] }).unwrap();
    assert!(x.tilde().as_word().take(8) == w("00001111"));
    assert_eq!(eval_f(&s, &x), q("1/3"));
    let y = UnitReal::from_expansion(&PeriodicWord::new(w("0110"), w("1001")));
    assert_eq!(strip_eps(&sigma2(), &y).unwrap(), UnitReal::from_expansion(&PeriodicWord::pure(w("10"))));
    let xs = fiber_samples(&s, &q("1"), 3, 0).unwrap();
    assert_eq!(xs.len(), 3);
    assert!(xs.iter().all(|x| eval_f(&s, x) == q("1")));
}

#[test]
fn lifting() {
    let s = sigma3();
    assert_eq!(lift_prefix(&s, &w("0")).unwrap(), w("10"));
    assert!(lift_prefix(&s, &FiniteWord::empty()).unwrap().is_empty());
    let l = lift_through(&s, &w("11"), &w("1"), &[]).unwrap();
    assert_eq!(l.h, 4);
    assert!(l.verified);
}

#[test]
fn dense_orbit_visits_six_cylinders() {
    let s = sigma3();
    let targets: Vec<FiniteWord> = FiniteWord::all_up_to(2).filter(|t| !t.is_empty()).collect();
    let d = dense_orbit_point(&s, &targets).unwrap();
    assert_eq!(d.schedule.len(), 6);
    assert!(d.point.all_checks_hold());
    let whole = d.point.realized_word().unwrap();
    for (t, &h) in targets.iter().zip(&d.schedule) {
        assert!(s.iterate(&whole, h, erasing_dyn::ApplyMode::Auto).starts_with(t));
    }
}

#[test]
fn sensitivity_and_mixing() {
    let s = sigma3();
    let delta = q("1/16");
    let (z, n) = sensitivity_witness(&s, &q("1"), &delta).unwrap();
    assert!(q("1").dist(&z) < *delta.ratio());
    assert!(iterate_f(&s, &q("1"), n).dist(&iterate_f(&s, &z, n)) >= half());

    let (h, x) = mixing_witness(&s, &w("00"), &q("1/3")).unwrap();
    assert_eq!(h, 1);
    assert!(x.tilde().as_word().take(2) == w("00"));
    assert_eq!(eval_f(&s, &x), q("1/3"));
    let (h, x) = mixing_witness(&s, &FiniteWord::empty(), &q("2/7")).unwrap();
    assert_eq!(h, 1);
    assert_eq!(eval_f(&s, &x), q("2/7"));
}

#[test]
fn scrambled_pair_separates_at_every_stage() {
    let s = sigma3();
    let alpha = PeriodicWord::pure(w("1"));
    let beta = PeriodicWord::pure(w("0"));
    let targets: Vec<FiniteWord> = (1..=6).map(|n| PeriodicWord::pure(w("10")).take(n)).collect();
    let p = scrambled_pair(&s, &alpha, &beta, &targets).unwrap();
    let sep = p.events.iter().filter(|e| e.kind == PairEventKind::Separation && e.holds).count();
    assert_eq!(sep, 6);
    assert!(p.events.iter().all(|e| e.holds));
    assert!(scrambled_pair(&s, &alpha, &alpha, &targets).is_err());
}

#[test]
fn almost_fixed_points() {
    let s = sigma3();
    let a = almost_fixed_witness(&s, 10).unwrap();
    assert!(a.x0.is_zero());
    assert!(a.z.dist(&a.x0) < Ratio::new(BigUint::one(), BigUint::one() << 10));
    let fz = eval_f(&s, &a.z);
    assert!(fz.tilde().as_word().take(a.cylinder.len()) == a.cylinder);
}

#[test]
fn entropy_quantities() {
    let s = sigma3();
    assert_eq!(d_n(&s, &q("1"), &q("1/3"), 1), Ratio::new(BigUint::from(2u8), BigUint::from(3u8)));
    let b = entropy_lower_bound(&s, 2, Exec::Sequential).unwrap();
    assert_eq!((b.k_len, b.f), (2, 4));
    assert!((b.value() - 0.5 * std::f64::consts::LN_2).abs() < 1e-12);
    let (f4, _) = max_vanishing_order(&sigma4(), 3, Exec::Sequential).unwrap();
    assert!(f4 <= 8);
    assert!(max_vanishing_order(&sigma2(), 2, Exec::Sequential).is_err());

    let fam = separated_family(&s, 2, 2, Exec::Parallel).unwrap();
    assert_eq!(fam.points.len(), 64);
    assert!(fam.itinerary_holds.iter().all(|&h| h));
    let mut pts = fam.points.clone();
    pts.sort_by(|a, b| a.ratio().cmp(b.ratio()));
    pts.dedup();
    assert_eq!(pts.len(), 64);
}
