//! Maximal vanishing orders, separated sets for the d_n metric, and the
//! resulting entropy lower bounds.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{vanishing_order, Budget, Vanishing};
use crate::dynamics::lifting::{lift_with_chain, long_budget};
use crate::dynamics::{erasing_steps, eval_f, orbit, require_oc, DynError};
use crate::exec::Exec;
use crate::substitution::Substitution;
use crate::words::{FiniteWord, PeriodicWord, UnitReal};

/// F(k_len) = max ε(u) over words of length k_len, with a word attaining it.
pub fn max_vanishing_order(s: &Substitution, k_len: usize, exec: Exec) -> Result<(usize, FiniteWord), DynError> {
    if !s.is_alternating() {
        return Err(DynError::ClassificationUnsatisfied("not alternating".into()));
    }
    let budget = Budget {
        max_len: k_len,
        max_steps: 4096,
        max_inter: usize::MAX,
    };
    let orders = exec.map_range(1usize << k_len, |i| {
        let w = FiniteWord::from_index(i, k_len);
        match vanishing_order(s, &w, &budget) {
            Ok(Vanishing::Order(n)) => Ok(n),
            _ => Err(w),
        }
    });
    let mut best = (0, FiniteWord::empty());
    for (i, o) in orders.into_iter().enumerate() {
        match o {
            Ok(n) if n > best.0 => best = (n, FiniteWord::from_index(i, k_len)),
            Ok(_) => {}
            Err(w) => return Err(DynError::BudgetExceeded(format!("ε({w}) not reached"))),
        }
    }
    Ok(best)
}

/// max over 0 ≤ i ≤ n of |fⁱ(x) − fⁱ(y)|.
pub fn d_n(s: &Substitution, x: &UnitReal, y: &UnitReal, n: usize) -> Ratio<BigUint> {
    let (a, b) = (orbit(s, x, n).points, orbit(s, y, n).points);
    max_gap(&a, &b)
}

fn max_gap(a: &[UnitReal], b: &[UnitReal]) -> Ratio<BigUint> {
    a.iter().zip(b).map(|(p, q)| p.dist(q)).max().unwrap_or_else(Ratio::zero)
}

/// How the pairwise separation was checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairCheck {
    All { pairs: usize },
    Sampled { pairs: usize },
}

/// 2^{(n+1)k_len} points whose orbits at times 0, t, …, nt follow their
/// itineraries through the padded cylinders [w_(i) w̄_ε].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatedFamily {
    pub k_len: usize,
    pub n: usize,
    pub t: usize,
    pub epsilon: Ratio<BigUint>,
    pub points: Vec<UnitReal>,
    pub itineraries: Vec<Vec<usize>>,
    pub itinerary_holds: Vec<bool>,
    pub min_distance: Ratio<BigUint>,
    pub pair_check: PairCheck,
}

impl SeparatedFamily {
    pub fn separated(&self) -> bool {
        self.min_distance >= self.epsilon
    }

    pub fn verified(&self) -> bool {
        self.separated() && self.itinerary_holds.iter().all(|&b| b)
    }

    /// One line per point: itinerary, point, verification status.
    pub fn export_lines(&self) -> Vec<String> {
        let status = match (&self.pair_check, self.verified()) {
            (_, false) => "no",
            (PairCheck::All { .. }, true) => "yes",
            (PairCheck::Sampled { .. }, true) => "sampled",
        };
        self.points
            .iter()
            .zip(&self.itineraries)
            .map(|(p, it)| {
                let it: Vec<String> = it.iter().map(|i| FiniteWord::from_index(*i, self.k_len).to_string()).collect();
                format!("{}  {}  verified:{status}", it.join("."), p)
            })
            .collect()
    }
}

/// Points above this count get a sampled pairwise check.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 1 << 12;
pub const SAMPLED_PAIRS: usize = 100_000;
const MAX_POINTS: usize = 1 << 16;

/// Candidate tails appended after the constructed prefix; the first whose
/// orbit keeps every iterate infinite and nonzero-tailed is used.
const TAILS: [&str; 6] = ["1", "01", "10", "011", "001", "0111"];

pub fn separated_family(s: &Substitution, k_len: usize, n: usize, exec: Exec) -> Result<SeparatedFamily, DynError> {
    require_oc(s)?;
    if k_len == 0 {
        return Err(DynError::InvalidInput("k_len must be positive".into()));
    }
    let count = 1usize
        .checked_shl(((n + 1) * k_len) as u32)
        .filter(|&c| c <= MAX_POINTS)
        .ok_or_else(|| DynError::BudgetExceeded(format!("2^{} points", (n + 1) * k_len)))?;
    let (t, _) = max_vanishing_order(s, k_len, exec)?;
    let k = s.k();
    let eps = s.w_eps();
    let bar: FiniteWord = FiniteWord::new((k_len..k_len + k).map(|j| eps.bit(j % k)).collect());
    let cyl: Vec<FiniteWord> = (0..1usize << k_len)
        .map(|i| FiniteWord::from_index(i, k_len).concat(&bar))
        .collect();
    let mut chains = Vec::with_capacity(cyl.len());
    for c in &cyl {
        let ch = erasing_steps(s, c, &long_budget())?;
        if ch.len() > t {
            return Err(DynError::ClassificationUnsatisfied(format!("ε({c}) exceeds F({k_len})")));
        }
        chains.push(ch.extended(t));
    }
    let base = 1usize << k_len;
    let itineraries: Vec<Vec<usize>> = (0..count)
        .map(|mut idx| {
            let mut it = vec![0; n + 1];
            for slot in it.iter_mut().rev() {
                *slot = idx % base;
                idx /= base;
            }
            it
        })
        .collect();
    // Backward construction, shared between itineraries with a common suffix.
    let mut memo: HashMap<Vec<usize>, FiniteWord> = HashMap::new();
    let mut prefix_for = |it: &[usize]| -> Result<FiniteWord, DynError> {
        let mut q = cyl[it[n]].clone();
        for j in (0..n).rev() {
            let key = it[j..].to_vec();
            if let Some(w) = memo.get(&key) {
                q = w.clone();
                continue;
            }
            let v = lift_with_chain(s, &chains[it[j]], &q, &[])?;
            q = cyl[it[j]].concat(&v);
            memo.insert(key, q.clone());
        }
        Ok(q)
    };
    let prefixes: Vec<FiniteWord> = itineraries.iter().map(|it| prefix_for(it)).collect::<Result<_, _>>()?;
    let horizon = n * t;
    let built = exec.map(prefixes, |q| realize(s, &q, horizon));
    let mut points = Vec::with_capacity(count);
    let mut orbits = Vec::with_capacity(count);
    for b in built {
        let (x, o) = b.ok_or(DynError::ZeroTail)?;
        points.push(x);
        orbits.push(o);
    }
    let itinerary_holds: Vec<bool> = itineraries
        .iter()
        .zip(&orbits)
        .map(|(it, o)| (0..=n).all(|j| o[j * t].tilde().as_word().take(cyl[it[j]].len()) == cyl[it[j]]))
        .collect();
    let epsilon = Ratio::new(BigUint::one(), BigUint::one() << (k_len + 1));
    let pairs: Vec<(usize, usize)> = if count <= EXHAUSTIVE_PAIR_LIMIT {
        (0..count).flat_map(|a| (a + 1..count).map(move |b| (a, b))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p: Vec<(usize, usize)> = (0..SAMPLED_PAIRS)
            .map(|_| {
                let a = rng.gen_range(0..count);
                let mut b = rng.gen_range(0..count - 1);
                if b >= a {
                    b += 1;
                }
                (a.min(b), a.max(b))
            })
            .collect();
        let per = count / base;
        for c in 0..base {
            for a in c * per..(c + 1) * per {
                p.extend((a + 1..(c + 1) * per).map(|b| (a, b)));
            }
        }
        p
    };
    let npairs = pairs.len();
    let dists = exec.map(pairs, |(a, b)| max_gap(&orbits[a], &orbits[b]));
    let min_distance = dists.into_iter().min().unwrap_or_else(|| Ratio::from_integer(BigUint::one()));
    let pair_check = if count <= EXHAUSTIVE_PAIR_LIMIT {
        PairCheck::All { pairs: npairs }
    } else {
        PairCheck::Sampled { pairs: npairs }
    };
    Ok(SeparatedFamily {
        k_len,
        n,
        t,
        epsilon,
        points,
        itineraries,
        itinerary_holds,
        min_distance,
        pair_check,
    })
}

/// The point 0.q T for the first candidate tail T whose iterates up to
/// `horizon` stay infinite with no 0^∞ tail, with its orbit.
fn realize(s: &Substitution, q: &FiniteWord, horizon: usize) -> Option<(UnitReal, Vec<UnitReal>)> {
    for tail in TAILS {
        let word = PeriodicWord::new(q.clone(), tail.parse().unwrap());
        let x = UnitReal::from_expansion(&word);
        let mut cur = word;
        let mut ok = true;
        for _ in 0..horizon {
            match s.apply_periodic(&cur) {
                crate::substitution::PeriodicImage::Infinite(w) if !w.ends_in_zeros() => cur = w,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut o = vec![x.clone()];
            for i in 0..horizon {
                let next = eval_f(s, &o[i]);
                o.push(next);
            }
            return Some((x, o));
        }
    }
    None
}

/// k_len·log 2 / (F(k_len) + extra), kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyBound {
    pub k_len: usize,
    pub f: usize,
    /// ε(w) for the localized bound on a cylinder [w]; 0 otherwise.
    pub extra: usize,
}

impl EntropyBound {
    pub fn value(&self) -> f64 {
        self.k_len as f64 * std::f64::consts::LN_2 / (self.f + self.extra) as f64
    }

    pub fn render(&self) -> String {
        let den = if self.extra == 0 {
            self.f.to_string()
        } else {
            format!("({}+{})", self.f, self.extra)
        };
        format!(
            "F({})={}, bound = {}·log2/{} ≈ {:.6}",
            self.k_len,
            self.f,
            self.k_len,
            den,
            self.value()
        )
    }
}

pub fn entropy_lower_bound(s: &Substitution, k_len: usize, exec: Exec) -> Result<EntropyBound, DynError> {
    let (f, _) = max_vanishing_order(s, k_len, exec)?;
    Ok(EntropyBound { k_len, f, extra: 0 })
}

/// The bound restricted to the cylinder [w].
pub fn local_entropy_bound(s: &Substitution, k_len: usize, w: &FiniteWord, exec: Exec) -> Result<EntropyBound, DynError> {
    let (f, _) = max_vanishing_order(s, k_len, exec)?;
    let extra = match vanishing_order(s, w, &long_budget()) {
        Ok(Vanishing::Order(e)) => e,
        _ => return Err(DynError::BudgetExceeded(format!("ε({w}) not reached"))),
    };
    Ok(EntropyBound { k_len, f, extra })
}
