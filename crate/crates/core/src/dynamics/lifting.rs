//! Prefix lifting through erasing chains, and the constructions built on
//! it: mixing, sensitivity, dense orbits and scrambled pairs.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::preimage::{image_blocks, lift_prefix_unchecked, preimage_word};
use super::{iterate_f, require_oc, DynError, StageCheck, StagedPoint};
use crate::classifier::{erasing_chain, vanishing_order, Budget, ChainSearch, Vanishing};
use crate::substitution::{ApplyMode, Substitution};
use crate::words::{FiniteWord, PeriodicWord, UnitReal};

/// w_0 = w, w_{j+1} = σ(w_j e_j), ending at ε after `len()` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub words: Vec<FiniteWord>,
    pub exts: Vec<FiniteWord>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.exts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exts.is_empty()
    }

    /// The same chain padded with trivial steps up to `h` steps.
    pub fn extended(&self, h: usize) -> Chain {
        let mut c = self.clone();
        while c.exts.len() < h {
            c.words.push(FiniteWord::empty());
            c.exts.push(FiniteWord::empty());
        }
        c
    }
}

pub(crate) fn long_budget() -> Budget {
    Budget {
        max_len: usize::MAX,
        max_steps: 4096,
        max_inter: usize::MAX,
    }
}

/// An erasing chain for w. For alternating substitutions with a vanishing
/// order the extensions are the w_ε digits completing the last block, so the
/// length is ε(w); otherwise the breadth-first chain search is used.
pub fn erasing_steps(s: &Substitution, w: &FiniteWord, budget: &Budget) -> Result<Chain, DynError> {
    let k = s.k();
    if let Ok(Vanishing::Order(h)) = vanishing_order(s, w, budget) {
        let eps = s.w_eps();
        let mut words = Vec::with_capacity(h);
        let mut exts = Vec::with_capacity(h);
        let mut cur = w.clone();
        for _ in 0..h {
            let m = cur.len() % k;
            let e = if m == 0 { FiniteWord::empty() } else { eps.suffix_from(m) };
            let next = s.apply_strict(&cur.concat(&e));
            words.push(cur);
            exts.push(e);
            cur = next;
        }
        debug_assert!(cur.is_empty());
        return Ok(Chain { words, exts });
    }
    match erasing_chain(s, w, budget) {
        ChainSearch::Found(exts) => {
            let mut words = Vec::with_capacity(exts.len());
            let mut cur = w.clone();
            for e in &exts {
                let next = s.apply_strict(&cur.concat(e));
                words.push(cur);
                cur = next;
            }
            Ok(Chain { words, exts })
        }
        _ => Err(DynError::NotStronglyErasing { word: w.clone() }),
    }
}

/// v = e_0 w_ε^{n_0} p_(h-1), with p_(0) = lift(u) and
/// p_(i) = lift(e_(h-i) w_ε^{n_(h-i)} p_(i-1)).
pub(crate) fn lift_with_chain(s: &Substitution, chain: &Chain, u: &FiniteWord, pads: &[usize]) -> Result<FiniteWord, DynError> {
    let eps = s.w_eps();
    let pad = |j: usize| eps.repeat(pads.get(j).copied().unwrap_or(0));
    let h = chain.len();
    let mut p = lift_prefix_unchecked(s, u)?;
    for j in (1..h).rev() {
        let target = chain.exts[j].concat(&pad(j)).concat(&p);
        p = lift_prefix_unchecked(s, &target)?;
    }
    if h == 0 {
        return Ok(p);
    }
    Ok(chain.exts[0].concat(&pad(0)).concat(&p))
}

/// σ^j(w v) starts with w_j e_j w_ε^{n_j} for j < h, and σ^h(w v) with u.
fn verify_lift(s: &Substitution, chain: &Chain, w: &FiniteWord, v: &FiniteWord, u: &FiniteWord, pads: &[usize]) -> bool {
    let eps = s.w_eps();
    let mut cur = w.concat(v);
    for j in 0..chain.len() {
        let need = chain.words[j]
            .concat(&chain.exts[j])
            .concat(&eps.repeat(pads.get(j).copied().unwrap_or(0)));
        if !cur.starts_with(&need) {
            return false;
        }
        cur = s.apply(&cur, ApplyMode::Auto);
    }
    cur.starts_with(u)
}

/// Result of lifting u through the erasing chain of w.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    pub h: usize,
    pub v: FiniteWord,
    pub chain: Chain,
    pub verified: bool,
}

/// v with σ^h(w v) ⊒ u, where h is the length of the erasing chain of w.
pub fn lift_through(s: &Substitution, w: &FiniteWord, u: &FiniteWord, pads: &[usize]) -> Result<Lift, DynError> {
    require_oc(s)?;
    let chain = erasing_steps(s, w, &long_budget())?;
    let v = lift_with_chain(s, &chain, u, pads)?;
    let verified = verify_lift(s, &chain, w, &v, u, pads);
    Ok(Lift {
        h: chain.len(),
        v,
        chain,
        verified,
    })
}

/// V_0 with σ^h(w V_0) = T as infinite words; each V_j avoids a 0^∞ tail.
fn lift_infinite(s: &Substitution, chain: &Chain, target: &PeriodicWord) -> Result<PeriodicWord, DynError> {
    let mut v = target.clone();
    for j in (0..chain.len()).rev() {
        let q = preimage_word(s, &v)?;
        v = q.prepend(&chain.exts[j]);
    }
    Ok(v)
}

/// x ∈ [w] with f^h(x) = y, h the length of the erasing chain of w
/// (ε(w) for completely erasing substitutions; 1 for w = ε).
pub fn mixing_witness(s: &Substitution, w: &FiniteWord, y: &UnitReal) -> Result<(usize, UnitReal), DynError> {
    require_oc(s)?;
    let chain = erasing_steps(s, w, &long_budget())?;
    let v = lift_infinite(s, &chain, &y.tilde().as_word())?;
    let x = UnitReal::from_expansion(&v.prepend(w));
    let h = chain.len();
    let inside = x.tilde().as_word().take(w.len()) == *w;
    if !inside || iterate_f(s, &x, h) != *y {
        return Err(DynError::NotInRange);
    }
    Ok((h, x))
}

/// (z, n) with |x − z| < δ and |fⁿ(x) − fⁿ(z)| ≥ 1/2.
pub fn sensitivity_witness(s: &Substitution, x: &UnitReal, delta: &UnitReal) -> Result<(UnitReal, usize), DynError> {
    require_oc(s)?;
    if delta.is_zero() {
        return Err(DynError::InvalidInput("delta must be positive".into()));
    }
    let d = delta.ratio().clone();
    let mut ell = 0usize;
    while Ratio::new(BigUint::one(), BigUint::one() << ell) > d {
        ell += 1;
    }
    let p = x.tilde().as_word().take(ell);
    let chain = erasing_steps(s, &p, &long_budget())?;
    let n = chain.len();
    let fx = iterate_f(s, x, n);
    let half = Ratio::new(BigUint::one(), BigUint::from(2u8));
    let bit = if *fx.ratio() > half { 0 } else { 1 };
    let target = PeriodicWord::pure(FiniteWord::new(vec![bit]));
    let v = lift_infinite(s, &chain, &target)?;
    let z = UnitReal::from_expansion(&v.prepend(&p));
    let fz = iterate_f(s, &z, n);
    if x.dist(&z) >= d || fx.dist(&fz) < half {
        return Err(DynError::InvalidInput(format!("witness check failed for x = {x}")));
    }
    Ok((z, n))
}

/// Least block with a nonempty image containing a 1; appended to stages that
/// would otherwise be all zeros.
fn one_block(s: &Substitution) -> FiniteWord {
    let k = s.k();
    image_blocks(s)
        .into_iter()
        .map(|(b, _)| FiniteWord::from_index(b, k))
        .find(|w| !w.is_all(0))
        .unwrap_or_else(|| FiniteWord::ones(k))
}

/// A staged point visiting the given cylinders, with its visit times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseOrbit {
    pub point: StagedPoint,
    /// h_n: the nth relative image starts with targets[n] (h_0 = 0).
    pub schedule: Vec<usize>,
}

pub fn dense_orbit_point(s: &Substitution, targets: &[FiniteWord]) -> Result<DenseOrbit, DynError> {
    require_oc(s)?;
    let mut stages = Vec::with_capacity(targets.len());
    let mut checks = Vec::new();
    let mut schedule = Vec::new();
    if targets.is_empty() {
        return Ok(DenseOrbit {
            point: StagedPoint::explicit(stages),
            schedule,
        });
    }
    let filler = one_block(s);
    let mut prefix = targets[0].clone();
    stages.push(targets[0].clone());
    schedule.push(0);
    checks.push(StageCheck {
        stage: 0,
        time: 0,
        holds: true,
        detail: format!("starts with {}", targets[0]),
    });
    let mut last_h = 0;
    for (n, t) in targets.iter().enumerate().skip(1) {
        let chain = erasing_steps(s, &prefix, &long_budget())?;
        let h = chain.len().max(last_h);
        let chain = chain.extended(h);
        let mut v = lift_with_chain(s, &chain, t, &[])?;
        if v.is_all(0) {
            v.extend_from(&filler);
        }
        let whole = prefix.concat(&v);
        let holds = s.iterate(&whole, h, ApplyMode::Auto).starts_with(t);
        checks.push(StageCheck {
            stage: n,
            time: h,
            holds,
            detail: format!("σ^{h} has prefix {t}"),
        });
        schedule.push(h);
        last_h = h;
        prefix = whole;
        stages.push(v);
    }
    let mut point = StagedPoint::explicit(stages);
    point.checks = checks;
    Ok(DenseOrbit { point, schedule })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairEventKind {
    Proximity,
    Separation,
}

/// A word-level distance check between the two points at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEvent {
    pub stage: usize,
    pub time: usize,
    pub kind: PairEventKind,
    /// Proximity: width of the cylinder holding both images. Separation:
    /// distance between the cylinders of their first 2k symbols.
    pub gap: Ratio<BigUint>,
    /// Proximity: 2^-|target|. Separation: 2^-2k.
    pub bound: Ratio<BigUint>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrambledPair {
    pub alpha: StagedPoint,
    pub beta: StagedPoint,
    pub events: Vec<PairEvent>,
}

fn ultimately_equal(a: &PeriodicWord, b: &PeriodicWord) -> bool {
    use num_integer::Integer;
    let start = a.prefix().len().max(b.prefix().len());
    let span = a.cycle().len().lcm(&b.cycle().len());
    (start..start + span).all(|i| a.bit(i) == b.bit(i))
}

fn pow2_inv(e: usize) -> Ratio<BigUint> {
    Ratio::new(BigUint::one(), BigUint::one() << e)
}

/// Two staged points following the same targets at common times, where the
/// stage before each visit carries u (bit 1) or w_ε²u (bit 0).
/// Cap on the explicit prefix of either point. The lift time at each stage
/// exceeds the vanishing order of everything built so far, so targets with
/// large vanishing orders make the stages grow quickly.
pub const SCRAMBLED_MAX_BITS: usize = 1 << 26;

pub fn scrambled_pair(
    s: &Substitution,
    alpha: &PeriodicWord,
    beta: &PeriodicWord,
    targets: &[FiniteWord],
) -> Result<ScrambledPair, DynError> {
    require_oc(s)?;
    if !s.is_alternating() {
        return Err(DynError::ClassificationUnsatisfied("not alternating".into()));
    }
    if ultimately_equal(alpha, beta) {
        return Err(DynError::InvalidInput("alpha and beta are ultimately equal".into()));
    }
    let k = s.k();
    let eps = s.w_eps();
    let filler = one_block(s);
    let budget = long_budget();
    let mut prefixes = [FiniteWord::empty(), FiniteWord::empty()];
    let mut stages: [Vec<FiniteWord>; 2] = [Vec::new(), Vec::new()];
    let mut checks: [Vec<StageCheck>; 2] = [Vec::new(), Vec::new()];
    let mut events = Vec::new();
    for (n, t) in targets.iter().enumerate() {
        let mut u = lift_prefix_unchecked(s, t)?;
        while u.len() < 2 * k {
            u.extend_from(&filler);
        }
        let chains = [
            erasing_steps(s, &prefixes[0], &budget)?,
            erasing_steps(s, &prefixes[1], &budget)?,
        ];
        let h = chains[0].len().max(chains[1].len()) + 1;
        let bits = [alpha.bit(n), beta.bit(n)];
        let mut images = Vec::new();
        for side in 0..2 {
            let r = if bits[side] == 1 { u.clone() } else { eps.repeat(2).concat(&u) };
            let chain = chains[side].extended(h - 1);
            let mut v = lift_with_chain(s, &chain, &r, &[])?;
            if v.is_all(0) {
                v.extend_from(&filler);
            }
            let whole = prefixes[side].concat(&v);
            if whole.len() > SCRAMBLED_MAX_BITS {
                return Err(DynError::BudgetExceeded(format!("stage {n} needs {} bits", whole.len())));
            }
            let before = s.iterate(&whole, h - 1, ApplyMode::Auto);
            let at = s.apply(&before, ApplyMode::Auto);
            let holds = before.starts_with(&r) && at.starts_with(t);
            checks[side].push(StageCheck {
                stage: n,
                time: h,
                holds,
                detail: format!("σ^{} ⊒ {}, σ^{h} ⊒ {t}", h - 1, r),
            });
            prefixes[side] = whole;
            stages[side].push(v);
            images.push((before, at));
        }
        let (a, b) = (&images[0].1, &images[1].1);
        let common = a.bits().iter().zip(b.bits()).take_while(|(x, y)| x == y).count();
        let bound = pow2_inv(t.len());
        let gap = pow2_inv(common);
        events.push(PairEvent {
            stage: n,
            time: h,
            kind: PairEventKind::Proximity,
            holds: gap <= bound,
            gap,
            bound,
        });
        if bits[0] != bits[1] {
            let gap = super::cylinder_gap(&images[0].0.prefix(2 * k), &images[1].0.prefix(2 * k));
            let bound = pow2_inv(2 * k);
            events.push(PairEvent {
                stage: n,
                time: h - 1,
                kind: PairEventKind::Separation,
                holds: gap >= bound,
                gap,
                bound,
            });
        }
    }
    let [sa, sb] = stages;
    let [ca, cb] = checks;
    let mut pa = StagedPoint::explicit(sa);
    pa.checks = ca;
    let mut pb = StagedPoint::explicit(sb);
    pb.checks = cb;
    Ok(ScrambledPair {
        alpha: pa,
        beta: pb,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{sigma2, sigma3};
    use crate::dynamics::eval_f;

    fn w(t: &str) -> FiniteWord {
        t.parse().unwrap()
    }
    fn r(t: &str) -> UnitReal {
        t.parse().unwrap()
    }

    #[test]
    fn lift_through_examples() {
        let s = sigma3();
        let l = lift_through(&s, &w("11"), &w("1"), &[]).unwrap();
        assert_eq!(l.h, 4);
        assert!(l.verified);
        let l = lift_through(&s, &w("00"), &w("0"), &[1]).unwrap();
        assert_eq!(l.h, 1);
        assert!(l.verified);
        assert!(l.v.starts_with(&w("00")));
        let l = lift_through(&sigma2(), &w("1"), &w("101"), &[]).unwrap();
        assert!(l.verified);
    }

    #[test]
    fn mixing_examples() {
        let s = sigma3();
        let (h, x) = mixing_witness(&s, &w("11"), &r("1/2")).unwrap();
        assert_eq!(h, 4);
        assert_eq!(iterate_f(&s, &x, 4), r("1/2"));
        let (h, x) = mixing_witness(&s, &w("00"), &r("1/3")).unwrap();
        assert_eq!(h, 1);
        assert_eq!(eval_f(&s, &x), r("1/3"));
        let (h, _) = mixing_witness(&s, &FiniteWord::empty(), &r("2/5")).unwrap();
        assert_eq!(h, 1);
    }

    #[test]
    fn sensitivity_examples() {
        let s = sigma3();
        let (_, n) = sensitivity_witness(&s, &r("1/3"), &r("1/1024")).unwrap();
        assert_eq!(n, 7);
        sensitivity_witness(&s, &r("1"), &r("1/16")).unwrap();
    }

    #[test]
    fn dense_orbit_visits_targets() {
        let targets: Vec<FiniteWord> = FiniteWord::all_up_to(2).take(6).collect();
        let d = dense_orbit_point(&sigma3(), &targets).unwrap();
        assert!(d.point.all_checks_hold());
        assert!(d.schedule.windows(2).all(|p| p[0] <= p[1]));
        let same = vec![w("101"); 4];
        assert!(dense_orbit_point(&sigma3(), &same).unwrap().point.all_checks_hold());
    }

    #[test]
    fn scrambled_pair_events() {
        let s = sigma3();
        let alpha = PeriodicWord::pure(w("10"));
        let beta = PeriodicWord::pure(w("01"));
        let targets: Vec<FiniteWord> = (1..=10).map(|n| "10".repeat(n).parse::<FiniteWord>().unwrap().prefix(n)).collect();
        let p = scrambled_pair(&s, &alpha, &beta, &targets).unwrap();
        let prox = p.events.iter().filter(|e| e.kind == PairEventKind::Proximity && e.holds).count();
        let sep = p.events.iter().filter(|e| e.kind == PairEventKind::Separation && e.holds).count();
        assert_eq!((prox, sep), (10, 10));
        assert!(scrambled_pair(&s, &alpha, &PeriodicWord::new(w("1"), w("01")), &targets).is_err());
    }
}
