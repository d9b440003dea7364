//! The interval map f_σ on rational points, and constructive versions of
//! its dynamical properties.

pub(crate) mod lifting;
mod periodic;
mod preimage;
mod staged;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::check_optimality;
use crate::substitution::{PeriodicImage, Substitution};
use crate::words::{Expansion, FiniteWord, PeriodicWord, UnitReal};

pub use lifting::{
    dense_orbit_point, erasing_steps, lift_through, mixing_witness, scrambled_pair, sensitivity_witness, Chain,
    DenseOrbit, Lift, PairEvent, PairEventKind, ScrambledPair,
};
pub use periodic::{periodic_point, PeriodicPoint, PeriodicSearch};
pub use preimage::{
    almost_fixed_witness, exact_factorization, factorization_count, fiber_samples, lift_prefix, limit_point_check,
    preimage_point, strip_eps, xi_insert, AlmostFixed, LimitCheck, Schedule, Side,
};
pub use staged::{StageCheck, StagedPoint, Stages};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynError {
    #[error("the optimality condition does not hold")]
    NotOptimal,
    #[error("no factorization of the target over the nonempty images")]
    NoFactorization,
    #[error("block {index} of u equals w_ε")]
    HasEpsilonFactor { index: usize },
    #[error("the word ends in w_ε^∞ at block boundaries")]
    EpsilonTail,
    #[error("the resulting word ends in 0^∞")]
    ZeroTail,
    #[error("the point has no preimage")]
    NotInRange,
    #[error("no erasing chain found for {word}")]
    NotStronglyErasing { word: FiniteWord },
    #[error("classification does not permit this construction: {0}")]
    ClassificationUnsatisfied(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub(crate) fn require_oc(s: &Substitution) -> Result<(), DynError> {
    if check_optimality(s).is_yes() {
        Ok(())
    } else {
        Err(DynError::NotOptimal)
    }
}

/// f_σ(x).
pub fn eval_f(s: &Substitution, x: &UnitReal) -> UnitReal {
    let w = match x.tilde() {
        Expansion::Zero => return UnitReal::zero(),
        Expansion::Word(w) => w,
    };
    match s.apply_periodic(w) {
        PeriodicImage::Infinite(img) => UnitReal::from_expansion(&img),
        PeriodicImage::Stalled(head) => UnitReal::from_finite(&head),
    }
}

/// Membership of a point in the exceptional sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Membership {
    /// Dyadic, including 0 and 1.
    pub in_q2: bool,
    /// x̃ ends in w_ε^∞ at block boundaries (0 counts when w_ε = 0^k).
    pub in_e: bool,
    /// Some expansion is w·σ(0^k)^∞ with w a product of images.
    pub in_f: bool,
    /// Outside the dyadics other than 1 and outside E.
    pub in_c: bool,
}

impl Membership {
    pub fn render(&self) -> String {
        let mut tags = Vec::new();
        for (on, name) in [(self.in_q2, "Q2"), (self.in_e, "E"), (self.in_f, "F"), (self.in_c, "C")] {
            if on {
                tags.push(name);
            }
        }
        if tags.is_empty() {
            "-".into()
        } else {
            tags.join(",")
        }
    }
}

pub fn membership(s: &Substitution, x: &UnitReal) -> Membership {
    let in_q2 = x.is_dyadic();
    let in_e = match x.tilde() {
        Expansion::Zero => s.w_eps().is_all(0),
        Expansion::Word(w) => matches!(s.apply_periodic(w), PeriodicImage::Stalled(_)),
    };
    let in_f = in_f(s, x);
    let in_c = !(in_q2 && !x.is_one()) && !in_e;
    Membership {
        in_q2,
        in_e,
        in_f,
        in_c,
    }
}

/// Both binary expansions of a point: x̃, and the terminating one for
/// dyadics in (0,1).
fn expansions(x: &UnitReal) -> Vec<PeriodicWord> {
    match x.tilde() {
        Expansion::Zero => vec![PeriodicWord::pure(FiniteWord::zeros(1))],
        Expansion::Word(w) => {
            let mut out = vec![w.clone()];
            if x.is_dyadic() && !w.prefix().is_empty() {
                let mut p = w.prefix().prefix(w.prefix().len() - 1);
                p.push(1);
                out.push(PeriodicWord::new(p, FiniteWord::zeros(1)));
            }
            out
        }
    }
}

fn in_f(s: &Substitution, y: &UnitReal) -> bool {
    let v0 = s.image(&FiniteWord::zeros(s.k())).clone();
    let root = if v0.is_empty() {
        FiniteWord::zeros(1)
    } else {
        PeriodicWord::pure(v0).cycle().clone()
    };
    let target = PeriodicWord::pure(root.clone());
    let auto = crate::classifier::FactorizationAutomaton::for_substitution(s);
    for e in expansions(y) {
        let bound = e.prefix().len() + e.cycle().len();
        let Some(start) = (0..=bound).find(|&m| e.drop_prefix(m).same_word(&target)) else {
            continue;
        };
        let mut state = auto.run(&e.take(start));
        let mut seen = std::collections::HashSet::new();
        loop {
            if state.contains(&0) {
                return true;
            }
            if state.is_empty() || !seen.insert(state.clone()) {
                break;
            }
            for &b in root.bits() {
                state = auto.step(&state, b);
            }
        }
    }
    false
}

/// x, f(x), …, fⁿ(x) with per-point membership flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub points: Vec<UnitReal>,
    pub flags: Vec<Membership>,
}

pub fn orbit(s: &Substitution, x: &UnitReal, n: usize) -> OrbitRecord {
    let mut points = vec![x.clone()];
    for i in 0..n {
        let next = eval_f(s, &points[i]);
        points.push(next);
    }
    let flags = points.iter().map(|p| membership(s, p)).collect();
    OrbitRecord { points, flags }
}

/// fⁿ(x).
pub fn iterate_f(s: &Substitution, x: &UnitReal, n: usize) -> UnitReal {
    let mut cur = x.clone();
    for _ in 0..n {
        cur = eval_f(s, &cur);
    }
    cur
}

/// Exact distance between the closed cylinders [a] and [b] (0 if they meet).
pub fn cylinder_gap(a: &FiniteWord, b: &FiniteWord) -> num_rational::Ratio<num_bigint::BigUint> {
    use num_bigint::BigUint;
    use num_rational::Ratio;
    use num_traits::{One, Zero};
    let lo = |w: &FiniteWord| Ratio::new(w.as_integer(), BigUint::one() << w.len());
    let hi = |w: &FiniteWord| Ratio::new(w.as_integer() + BigUint::one(), BigUint::one() << w.len());
    let (la, ha, lb, hb) = (lo(a), hi(a), lo(b), hi(b));
    if ha < lb {
        lb - ha
    } else if hb < la {
        la - hb
    } else {
        Ratio::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{sigma2, sigma3};

    fn r(s: &str) -> UnitReal {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        let s3 = sigma3();
        assert_eq!(eval_f(&s3, &r("1")), r("1/3"));
        assert_eq!(eval_f(&s3, &r("1/3")), r("1"));
        assert_eq!(eval_f(&s3, &r("1/2")), r("2/3"));
        assert_eq!(eval_f(&sigma2(), &r("1/3")), r("0"));
    }

    #[test]
    fn orbit_of_one() {
        let o = orbit(&sigma3(), &r("1"), 4);
        let shown: Vec<String> = o.points.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["1", "1/3", "1", "1/3", "1"]);
        assert!(orbit(&sigma3(), &r("0"), 5).points.iter().all(|p| p.is_zero()));
    }

    #[test]
    fn membership_examples() {
        let m = membership(&sigma2(), &r("1/3"));
        assert!(m.in_e);
        let m = membership(&sigma3(), &r("1/2"));
        assert!(m.in_q2 && !m.in_e);
        let m = membership(&sigma3(), &r("1/3"));
        assert_eq!(
            m,
            Membership {
                in_c: true,
                ..Default::default()
            }
        );
        // σ(00) = ε, so F is the set of dyadics reachable as 0.σ(a).
        assert!(membership(&sigma3(), &r("1/2")).in_f);
        assert!(membership(&sigma3(), &r("0")).in_f);
    }

    #[test]
    fn gaps() {
        let w = |t: &str| t.parse::<FiniteWord>().unwrap();
        assert_eq!(cylinder_gap(&w("0000"), &w("0101")).to_string(), "1/4");
        assert_eq!(cylinder_gap(&w("01"), &w("10")).to_string(), "0");
    }
}
