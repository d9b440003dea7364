//! The frozen constants file is reproduced by the oracle, and the engine
//! agrees with every entry it can compute on its own.

use std::collections::BTreeMap;

use erasing_dyn::catalog::{sigma1, sigma2, sigma3, sigma4};
use erasing_dyn::classifier::{check_optimality, vanishing_order, Budget, Vanishing};
use erasing_dyn::dynamics::{eval_f, lift_prefix};
use erasing_dyn::entropy::max_vanishing_order;
use erasing_dyn::oracle::{derived_constants, render_constants};
use erasing_dyn::{ApplyMode, Exec, FiniteWord, UnitReal};

const FROZEN: &str = include_str!("data/derived_constants.txt");

fn frozen() -> BTreeMap<String, String> {
    FROZEN
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn w(t: &str) -> FiniteWord {
    t.parse().unwrap()
}

fn q(t: &str) -> UnitReal {
    t.parse().unwrap()
}

#[test]
fn oracle_reproduces_frozen_file() {
    assert_eq!(render_constants(&derived_constants()), FROZEN);
}

#[test]
fn engine_matches_frozen_values() {
    let c = frozen();
    let s3 = sigma3();
    let s4 = sigma4();
    let budget = Budget::default();
    let get = |k: &str| c.get(k).unwrap_or_else(|| panic!("missing {k}")).clone();

    assert_eq!(q("1/3").tilde().as_word().take(12).to_string(), get("tilde.1/3.first12"));
    assert_eq!(q("1/2").tilde().as_word().take(6).to_string(), get("tilde.1/2.first6"));
    assert_eq!(s3.apply(&w("1101"), ApplyMode::Strict).to_string(), get("sigma3.strict.1101"));
    assert_eq!(s3.apply(&w("111"), ApplyMode::Auto).to_string(), get("sigma3.alternating.111"));
    assert_eq!(sigma2().is_alternating().to_string(), get("sigma2.alternating"));
    let d = s4.alternating_decomposition().unwrap();
    let ones: Vec<String> = d.simple.iter().map(|m| m[1].to_string()).collect();
    assert_eq!(ones.join(","), get("sigma4.split.ones"));

    for (u, n, v) in [("1", 1, "1"), ("11", 2, "11")] {
        let r = s3.relative_image(&w(u), n, &w(v), ApplyMode::Auto).unwrap();
        assert_eq!(r.word.to_string(), get(&format!("sigma3.relative.{u}.{n}.{v}")));
    }
    for word in ["0", "1", "00", "01", "10", "11", "0101010101"] {
        let Ok(Vanishing::Order(n)) = vanishing_order(&s3, &w(word), &budget) else {
            panic!("{word} does not vanish")
        };
        assert_eq!(n.to_string(), get(&format!("sigma3.vanishing.{word}")));
    }
    for len in [1usize, 2, 4, 8, 16] {
        let (f, _) = max_vanishing_order(&s3, len, Exec::Parallel).unwrap();
        assert_eq!(f.to_string(), get(&format!("sigma3.F.{len}")));
    }
    assert_eq!(max_vanishing_order(&s4, 3, Exec::Sequential).unwrap().0.to_string(), get("sigma4.F.3"));
    let max4 = (1..=12).map(|l| max_vanishing_order(&s4, l, Exec::Parallel).unwrap().0).max().unwrap();
    assert_eq!(max4.to_string(), get("sigma4.max_vanishing.upto12"));

    for (x, bits) in [("1", 8), ("1/2", 4), ("1/3", 8)] {
        let y = eval_f(&s3, &q(x));
        assert_eq!(y.tilde().as_word().take(bits).to_string(), get(&format!("sigma3.stream.{x}.{bits}")));
    }
    for x in ["1", "1/3", "2/3", "1/2"] {
        assert_eq!(eval_f(&s3, &q(x)).to_string(), get(&format!("sigma3.f.{x}")));
    }
    assert!(eval_f(&sigma2(), &q("1/3")).is_zero());
    assert!(get("sigma2.stream.1/3.stalled").starts_with("true"));

    assert_eq!(lift_prefix(&s3, &w("10")).unwrap().to_string(), get("sigma3.lift.10"));
    assert_eq!(lift_prefix(&s3, &w("0")).unwrap().to_string(), get("sigma3.lift.0"));

    assert_eq!(get("coverage.sigma1.12"), "covered");
    assert!(check_optimality(&sigma1()).is_yes());
    assert!(check_optimality(&s3).is_yes());
    assert!(get("coverage.sigma4.1").starts_with("fails"));
    assert!(check_optimality(&s4).is_no());
}
