//! Periodic points in a cylinder [u0], as staged points with
//! σ^P(W_{i+1}) = W_i, P = ε(u0).

use serde::{Deserialize, Serialize};

use super::preimage::exact_factorization;
use super::{require_oc, DynError, StageCheck, StagedPoint, Stages};
use crate::classifier::{vanishing_order, Budget, Vanishing};
use crate::substitution::{ApplyMode, PeriodicImage, Substitution};
use crate::words::{FiniteWord, PeriodicWord, PowerWord};

/// How the stages were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodicSearch {
    /// Cuts of an eventually periodic σ^P-fixed word found by search.
    Rational,
    /// Stage-by-stage exact lifting.
    Lifted,
    /// Stages generated by a composite of per-phase letter lifts.
    Morphic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicPoint {
    pub period: usize,
    pub search: PeriodicSearch,
    pub point: StagedPoint,
}

/// σ(w) for a word given in power form, alternating from phase 0.
pub fn apply_power(s: &Substitution, w: &PowerWord) -> PowerWord {
    let a = w.aligned(s.k());
    if a.root.is_empty() || a.reps == 0 {
        return PowerWord::finite(s.apply(&a.to_finite(), ApplyMode::Auto));
    }
    let head = s.apply_strict(&a.head);
    let root = s.apply_strict(&a.root);
    let tail = s.apply(&a.tail, ApplyMode::Auto);
    if root.is_empty() {
        return PowerWord::finite(head.concat(&tail));
    }
    PowerWord {
        head,
        root,
        reps: a.reps,
        tail,
    }
}

fn apply_power_n(s: &Substitution, w: &PowerWord, n: usize) -> PowerWord {
    let mut cur = w.clone();
    for _ in 0..n {
        cur = apply_power(s, &cur);
    }
    cur
}

/// Longest combined length |q| + |c| tried in the rational search.
const RATIONAL_SEARCH_LEN: usize = 12;

/// W = u0 q c^∞ with σ^P(W) = W and no iterate ending in 0^∞, shortest
/// (q, c) first.
fn rational_fixed_word(s: &Substitution, u0: &FiniteWord, period: usize) -> Option<PeriodicWord> {
    for total in 1..=RATIONAL_SEARCH_LEN {
        for qlen in 0..total.min(5) {
            let clen = total - qlen;
            for q in FiniteWord::all_of_length(qlen) {
                for c in FiniteWord::all_of_length(clen) {
                    let w = PeriodicWord::new(u0.concat(&q), c);
                    if w.cycle().len() != clen || w.ends_in_zeros() {
                        continue;
                    }
                    let mut cur = w.clone();
                    let mut ok = true;
                    for _ in 0..period {
                        match s.apply_periodic(&cur) {
                            PeriodicImage::Infinite(img) if !img.ends_in_zeros() => cur = img,
                            _ => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok && cur.same_word(&w) {
                        return Some(w);
                    }
                }
            }
        }
    }
    None
}

/// Staged periodic point in [u0] with `stage_count` verified identities.
/// Explicit stages stop once the realized prefix would exceed `max_bits`.
pub fn periodic_point(
    s: &Substitution,
    u0: &FiniteWord,
    stage_count: usize,
    max_bits: usize,
) -> Result<PeriodicPoint, DynError> {
    require_oc(s)?;
    if !s.is_alternating() {
        return Err(DynError::ClassificationUnsatisfied("not alternating".into()));
    }
    if u0.len() < s.k() {
        return Err(DynError::InvalidInput(format!("|u0| must be at least {}", s.k())));
    }
    let budget = Budget {
        max_len: u0.len(),
        max_steps: 4096,
        max_inter: usize::MAX,
    };
    let period = match vanishing_order(s, u0, &budget) {
        Ok(Vanishing::Order(p)) => p,
        _ => return Err(DynError::ClassificationUnsatisfied(format!("ε({u0}) is undefined"))),
    };
    if let Some(w) = rational_fixed_word(s, u0, period) {
        return Ok(PeriodicPoint {
            period,
            search: PeriodicSearch::Rational,
            point: rational_stages(s, w, u0.len() as u128, period, stage_count),
        });
    }
    if let Some(lifts) = letter_lifts(s) {
        return Ok(PeriodicPoint {
            period,
            search: PeriodicSearch::Morphic,
            point: morphic_stages(s, u0, period, stage_count, max_bits, &lifts),
        });
    }
    Ok(PeriodicPoint {
        period,
        search: PeriodicSearch::Lifted,
        point: lifted_stages(s, u0, period, stage_count, max_bits)?,
    })
}

fn rational_stages(s: &Substitution, w: PeriodicWord, first: u128, period: usize, stage_count: usize) -> StagedPoint {
    let image_len = |l: u128| apply_power_n(s, &PowerWord::prefix_of(&w, l), period).len();
    let mut cuts = vec![first];
    let mut checks = Vec::new();
    let mut exhausted = None;
    for i in 0..stage_count {
        let target = *cuts.last().unwrap();
        let mut hi = target.max(1);
        while image_len(hi) < target {
            hi = match hi.checked_mul(2) {
                Some(h) if h < 1u128 << 120 => h,
                _ => break,
            };
        }
        if image_len(hi) < target {
            exhausted = Some(format!("stage {} exceeds 2^120 symbols", i + 1));
            break;
        }
        let mut lo = 0u128;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if image_len(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let next = hi;
        let img = apply_power_n(s, &PowerWord::prefix_of(&w, next), period);
        let holds = img.same_word(&PowerWord::prefix_of(&w, target));
        checks.push(StageCheck {
            stage: i,
            time: period,
            holds,
            detail: format!("σ^{period}(W[..{next}]) = W[..{target}]"),
        });
        cuts.push(next);
    }
    StagedPoint {
        stages: Stages::Cuts { word: w, cuts },
        checks,
        exhausted,
    }
}

/// Longest letter lift tried, in blocks.
const LETTER_LIFT_BLOCKS: usize = 3;

/// For each phase p and letter a, the least word z of length a multiple of
/// k with σ(z) = a when read from phase p.
fn letter_lifts(s: &Substitution) -> Option<Vec<[FiniteWord; 2]>> {
    let k = s.k();
    (0..k)
        .map(|p| {
            let find = |a: u8| {
                (1..=LETTER_LIFT_BLOCKS).find_map(|blocks| {
                    FiniteWord::all_of_length(blocks * k)
                        .find(|z| s.apply_alternating(z, p).is_some_and(|img| img.bits() == [a]))
                })
            };
            Some([find(0)?, find(1)?])
        })
        .collect()
}

fn morph(images: &[FiniteWord; 2], w: &FiniteWord) -> FiniteWord {
    let mut out = FiniteWord::empty();
    for &b in w.bits() {
        out.extend_from(&images[b as usize]);
    }
    out
}

/// W_{i+1} = W_i Mⁱ⁺¹(u0), where M lifts through the P phases met by the
/// stage boundaries. Letter lifts have length ≡ 0 mod k, so those phases
/// never change and one letter-level check covers every stage; stages that
/// fit in `max_bits` are also checked directly.
fn morphic_stages(
    s: &Substitution,
    u0: &FiniteWord,
    period: usize,
    stage_count: usize,
    max_bits: usize,
    lifts: &[[FiniteWord; 2]],
) -> StagedPoint {
    let k = s.k();
    let mut phases = Vec::with_capacity(period);
    let mut cur = u0.clone();
    for _ in 0..period {
        phases.push(cur.len() % k);
        cur = s.apply(&cur, ApplyMode::Auto);
    }
    let images: [FiniteWord; 2] = [0u8, 1].map(|a| {
        let mut y = FiniteWord::new(vec![a]);
        for &p in phases.iter().rev() {
            y = morph(&lifts[p], &y);
        }
        y
    });
    let certificate = (0..k).all(|p| {
        (0..2u8).all(|a| {
            let z = &lifts[p][a as usize];
            z.len() % k == 0 && s.apply_alternating(z, p).is_some_and(|img| img.bits() == [a])
        })
    });
    let point = StagedPoint {
        stages: Stages::Morphic {
            seed: u0.clone(),
            images: images.clone(),
            count: stage_count + 1,
        },
        checks: Vec::new(),
        exhausted: None,
    };
    let mut checks = Vec::with_capacity(stage_count);
    let mut whole = Some(u0.clone());
    let mut piece = u0.clone();
    for i in 0..stage_count {
        let next_len = (0..=i + 1).fold(0u128, |a, j| a.saturating_add(point.stage_len(j)));
        let direct = match whole.take() {
            Some(w) if next_len <= max_bits as u128 => {
                piece = morph(&images, &piece);
                let next = w.concat(&piece);
                let ok = s.iterate(&next, period, ApplyMode::Auto) == w;
                whole = Some(next);
                Some(ok)
            }
            _ => None,
        };
        let (holds, how) = match direct {
            Some(ok) => (ok && certificate, "direct"),
            None => (certificate, "letter lifts"),
        };
        checks.push(StageCheck {
            stage: i,
            time: period,
            holds,
            detail: format!("σ^{period}(W_{}) = W_{i}, |W_{}| = {next_len} ({how})", i + 1, i + 1),
        });
    }
    StagedPoint { checks, ..point }
}

fn lifted_stages(
    s: &Substitution,
    u0: &FiniteWord,
    period: usize,
    stage_count: usize,
    max_bits: usize,
) -> Result<StagedPoint, DynError> {
    let k = s.k();
    let eps = s.w_eps();
    let mut whole = u0.clone();
    let mut lens: Vec<usize> = Vec::with_capacity(period + 1);
    let mut cur = u0.clone();
    for _ in 0..=period {
        lens.push(cur.len());
        cur = s.apply(&cur, ApplyMode::Auto);
    }
    let mut stages = vec![u0.clone()];
    let mut checks = Vec::new();
    let mut exhausted = None;
    for i in 0..stage_count {
        let prev = stages.last().unwrap().clone();
        let mut pieces = vec![FiniteWord::empty(); period + 1];
        pieces[period] = prev;
        for j in (0..period).rev() {
            let phase = lens[j] % k;
            let pad = if phase == 0 { FiniteWord::empty() } else { eps.suffix_from(phase) };
            let blocks = exact_factorization(s, &pieces[j + 1]).ok_or(DynError::NoFactorization)?;
            let mut piece = pad;
            for b in blocks {
                piece.extend_from(&FiniteWord::from_index(b, k));
            }
            pieces[j] = piece;
        }
        if whole.len() + pieces[0].len() > max_bits {
            exhausted = Some(format!(
                "stage {} needs {} symbols, over the budget of {max_bits}",
                i + 1,
                whole.len() + pieces[0].len()
            ));
            break;
        }
        for j in 0..=period {
            lens[j] += pieces[j].len();
        }
        let next = whole.concat(&pieces[0]);
        let holds = s.iterate(&next, period, ApplyMode::Auto) == whole;
        checks.push(StageCheck {
            stage: i,
            time: period,
            holds,
            detail: format!("σ^{period}(W_{}) = W_{i}, |W_{}| = {}", i + 1, i + 1, next.len()),
        });
        whole = next;
        stages.push(pieces.swap_remove(0));
    }
    Ok(StagedPoint {
        stages: Stages::Explicit(stages),
        checks,
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::sigma3;
    use crate::dynamics::iterate_f;

    fn w(t: &str) -> FiniteWord {
        t.parse().unwrap()
    }

    #[test]
    fn period_four_in_11() {
        let s = sigma3();
        let p = periodic_point(&s, &w("11"), 20, 1 << 20).unwrap();
        assert_eq!(p.period, 4);
        assert_eq!(p.search, PeriodicSearch::Rational);
        assert_eq!(p.point.checks.len(), 20);
        assert!(p.point.all_checks_hold());
        let x = p.point.limit().unwrap();
        assert_eq!(iterate_f(&s, &x, 4), x);
    }

    #[test]
    fn fixed_point_stages_in_0000() {
        let s = sigma3();
        let p = periodic_point(&s, &w("0000"), 20, 1 << 16).unwrap();
        assert_eq!(p.period, 1);
        assert_eq!(p.search, PeriodicSearch::Morphic);
        assert!(p.point.all_checks_hold());
        assert_eq!(p.point.checks.len(), 20);
        assert!(p.point.prefix_bits(40).starts_with(&w("0000")));
        let lifted = lifted_stages(&s, &w("0000"), 1, 8, 1 << 20).unwrap();
        assert!(lifted.all_checks_hold());
        assert_eq!(lifted.checks.len(), 8);
        assert!(lifted.realized_prefix(3).to_finite().starts_with(&w("0000")));
    }

    #[test]
    fn period_three_in_01() {
        let s = sigma3();
        let p = periodic_point(&s, &w("01"), 20, 1 << 20).unwrap();
        assert_eq!(p.period, 3);
        assert_eq!(p.search, PeriodicSearch::Morphic);
        assert_eq!(p.point.checks.len(), 20);
        assert!(p.point.all_checks_hold());
        assert!(p.point.checks[0].detail.ends_with("(direct)"));
        assert!(p.point.checks[19].detail.ends_with("(letter lifts)"));
        // σ³ of a long prefix reproduces a shorter prefix.
        let long = p.point.realized_prefix(7).to_finite();
        let short = p.point.realized_prefix(6).to_finite();
        assert_eq!(s.iterate(&long, 3, ApplyMode::Auto), short);
    }

    #[test]
    fn power_application_matches_expansion() {
        let s = sigma3();
        let word = PeriodicWord::new(w("110"), w("01101"));
        for n in [0u128, 1, 7, 20, 33] {
            let pw = PowerWord::prefix_of(&word, n);
            let direct = s.apply(&pw.to_finite(), ApplyMode::Auto);
            assert_eq!(apply_power(&s, &pw).to_finite(), direct, "n = {n}");
        }
    }
}
