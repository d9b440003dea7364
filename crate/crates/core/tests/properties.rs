use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use proptest::prelude::*;

use erasing_dyn::catalog::{sigma1, sigma2, sigma3, sigma4};
use erasing_dyn::classifier::{check_optimality, classify, vanishing_order, Budget, Vanishing};
use erasing_dyn::dynamics::{eval_f, orbit, preimage_point, xi_insert, Schedule};
use erasing_dyn::oracle::{brute_eval, brute_factor_coverage};
use erasing_dyn::substitution::PeriodicImage;
use erasing_dyn::words::Expansion;
use erasing_dyn::{ApplyMode, Exec, FiniteWord, PeriodicWord, Substitution, UnitReal};

fn word(max: usize) -> impl Strategy<Value = FiniteWord> {
    prop::collection::vec(0u8..=1, 0..=max).prop_map(FiniteWord::new)
}

fn nonempty_word(max: usize) -> impl Strategy<Value = FiniteWord> {
    prop::collection::vec(0u8..=1, 1..=max).prop_map(FiniteWord::new)
}

fn point(max_den: u64) -> impl Strategy<Value = UnitReal> {
    (1..=max_den).prop_flat_map(|q| (1..=q).prop_map(move |p| UnitReal::from_u64(p, q).unwrap()))
}

fn catalog(i: usize) -> Substitution {
    [sigma1, sigma2, sigma3, sigma4][i % 4]()
}

/// A k-block table (k = 2 or 3) with one erased block that is not 1^k.
fn table() -> impl Strategy<Value = Substitution> {
    (2usize..=3).prop_flat_map(|k| {
        let n = 1usize << k;
        (0..n - 1, prop::collection::vec(nonempty_word(3), n)).prop_map(move |(eps, mut images)| {
            images[eps] = FiniteWord::empty();
            Substitution::from_table(k, images).unwrap()
        })
    })
}

fn alternating() -> impl Strategy<Value = Substitution> {
    prop_oneof![Just(sigma3()), Just(sigma4())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tilde_round_trips(x in point(1000)) {
        let w = x.tilde().as_word();
        prop_assert_eq!(&UnitReal::from_expansion(&w), &x);
        if let Expansion::Word(p) = x.tilde() {
            prop_assert!(!p.cycle().is_all(0));
        }
    }

    #[test]
    fn block_align_keeps_the_word(p in word(6), c in nonempty_word(5), k in 2usize..=4) {
        let w = PeriodicWord::new(p, c);
        let a = w.block_align(k);
        let n = w.prefix().len() + 4 * k * w.cycle().len();
        prop_assert_eq!(a.take(n), w.take(n));
        prop_assert_eq!(a.prefix().len() % k, 0);
        prop_assert_eq!(a.cycle().len() % k, 0);
    }

    #[test]
    fn canonical_form_is_unique(p in word(5), c in nonempty_word(4), rot in 0usize..4, reps in 1usize..3) {
        let w = PeriodicWord::new(p.clone(), c.clone());
        prop_assert!(w.is_canonical());
        prop_assert_eq!(w.canonical(), w.clone());
        let j = rot % c.len();
        let shifted = PeriodicWord::raw(p.concat(&c.prefix(j)), c.suffix_from(j).concat(&c.prefix(j)).repeat(reps));
        prop_assert_eq!(shifted.canonical(), w);
    }

    #[test]
    fn block_aligned_morphism_law(i in 0usize..4, u in word(12), v in word(12)) {
        let s = catalog(i);
        let k = s.k();
        let u = u.prefix(u.len() - u.len() % k);
        prop_assert_eq!(s.apply_finite(&u.concat(&v)), s.apply_finite(&u).concat(&s.apply_finite(&v)));
        if s.is_alternating() {
            let u2 = u.concat(&v.prefix(v.len().min(1)));
            let rest = v.suffix_from(v.len().min(1));
            let phase = u2.len() % k;
            let joined = s.apply_alternating(&u2, 0).unwrap().concat(&s.apply_alternating(&rest, phase).unwrap());
            prop_assert_eq!(s.apply_finite(&u2.concat(&rest)), joined);
        }
    }

    #[test]
    fn periodic_application_matches_streaming(i in 0usize..4, p in word(6), c in nonempty_word(6)) {
        let s = catalog(i);
        let w = PeriodicWord::new(p, c);
        let n = 256 * s.k();
        let streamed = s.apply_strict(&w.take(n));
        match s.apply_periodic(&w) {
            PeriodicImage::Infinite(img) => prop_assert_eq!(img.take(streamed.len()), streamed),
            PeriodicImage::Stalled(img) => prop_assert_eq!(img, streamed),
        }
    }

    #[test]
    fn decomposition_reconstructs_table(s in table()) {
        if let Ok(d) = s.alternating_decomposition() {
            let k = s.k();
            for (idx, image) in s.images().iter().enumerate() {
                let block = FiniteWord::from_index(idx, k);
                let mut rebuilt = FiniteWord::empty();
                for (j, &b) in block.bits().iter().enumerate() {
                    rebuilt.extend_from(&d.simple[j][b as usize]);
                }
                prop_assert_eq!(&rebuilt, image);
            }
            for (j, &b) in s.w_eps().bits().iter().enumerate() {
                prop_assert!(d.simple[j][b as usize].is_empty());
            }
        }
    }

    #[test]
    fn relative_image_consistency(s in alternating(), u in word(8), v in word(8), n in 0usize..=4) {
        let r = s.relative_image(&u, n, &v, ApplyMode::Auto).unwrap();
        let head = s.iterate(&u, n, ApplyMode::Auto);
        let mut whole = u.concat(&v);
        for _ in 0..n {
            whole = s.apply(&whole, ApplyMode::Auto);
        }
        prop_assert_eq!(head.concat(&r.word), whole);
    }

    #[test]
    fn vanishing_order_is_minimal(s in alternating(), w in word(12)) {
        let budget = Budget { max_len: 12, max_steps: 10_000, max_inter: usize::MAX };
        if let Ok(Vanishing::Order(e)) = vanishing_order(&s, &w, &budget) {
            let mut cur = w.clone();
            for step in 1..=e {
                cur = s.apply_alternating(&cur, 0).unwrap();
                prop_assert_eq!(cur.is_empty(), step == e);
            }
        }
    }

    #[test]
    fn eval_matches_streaming_oracle(i in 0usize..4, x in point(1_000_000)) {
        let s = catalog(i);
        let stream = brute_eval(&s, &x, 256);
        match s.apply_periodic(&x.tilde().as_word()) {
            PeriodicImage::Infinite(img) => {
                prop_assert!(!stream.stalled);
                prop_assert_eq!(img.take(256), stream.produced.prefix(256));
            }
            PeriodicImage::Stalled(img) => {
                prop_assert!(stream.stalled);
                prop_assert_eq!(&UnitReal::from_finite(&img), &eval_f(&s, &x));
            }
        }
    }

    #[test]
    fn functional_equation(i in 1usize..4, x in point(10_000)) {
        let s = catalog(i);
        let shift = Ratio::from_integer(s.w_eps().as_integer());
        let scale = Ratio::from_integer(BigUint::one() << s.k());
        let y = UnitReal::from_ratio(&((x.ratio() + shift) / scale)).unwrap();
        prop_assert_eq!(eval_f(&s, &x), eval_f(&s, &y));
    }

    #[test]
    fn orbit_steps_are_exact(x in point(10_000), n in 0usize..6) {
        let s = sigma3();
        let o = orbit(&s, &x, n);
        prop_assert_eq!(o.points.len(), n + 1);
        for pair in o.points.windows(2) {
            prop_assert_eq!(&eval_f(&s, &pair[0]), &pair[1]);
        }
    }

    #[test]
    fn preimages_hit_the_target(y in point(100_000)) {
        let s = sigma3();
        let x = preimage_point(&s, &y).unwrap();
        prop_assert_eq!(eval_f(&s, &x), y);
    }

    #[test]
    fn xi_preserves_the_image(
        p in word(6),
        c in nonempty_word(4),
        prefix in prop::collection::vec(0usize..4, 0..5),
        cycle in prop::collection::vec(0usize..3, 0..3),
    ) {
        let s = sigma3();
        let u = PeriodicWord::new(p, c);
        let base = UnitReal::from_expansion(&u);
        if let Ok(x) = xi_insert(&s, &u, &Schedule { prefix, cycle }) {
            prop_assert_eq!(eval_f(&s, &x), eval_f(&s, &base));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimality_agrees_with_coverage(s in table()) {
        // Coverage up to a finite length is necessary for the condition.
        let brute = brute_factor_coverage(s.images(), 14).is_ok();
        let yes = check_optimality(&s).is_yes();
        if yes {
            prop_assert!(brute);
        }
        if !brute {
            prop_assert!(check_optimality(&s).is_no());
        }
    }

    #[test]
    fn reports_respect_the_hierarchy(s in table()) {
        let b = Budget { max_len: 8, max_steps: 32, max_inter: 1024 };
        let r = classify(&s, &b, Exec::Sequential);
        if r.boundedly().is_yes() {
            prop_assert!(r.completely().is_positive());
            prop_assert!(r.oc().is_no());
        }
        if r.completely().is_positive() {
            prop_assert!(r.strongly().is_positive());
        }
    }
}
