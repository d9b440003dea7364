//! Preimages: factorizations over the images, ξ-insertion, fibers and
//! prefix lifts.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eval_f, require_oc, DynError};
use crate::substitution::Substitution;
use crate::words::{FiniteWord, PeriodicWord, UnitReal};

/// Blocks with nonempty images, one per distinct image (the least block).
pub(crate) fn image_blocks(s: &Substitution) -> Vec<(usize, FiniteWord)> {
    let mut out: Vec<(usize, FiniteWord)> = Vec::new();
    for (b, img) in s.images().iter().enumerate() {
        if !img.is_empty() && !out.iter().any(|(_, w)| w == img) {
            out.push((b, img.clone()));
        }
    }
    out
}

fn blocks_word(s: &Substitution, blocks: &[usize]) -> FiniteWord {
    let mut w = FiniteWord::empty();
    for &b in blocks {
        w.extend_from(&FiniteWord::from_index(b, s.k()));
    }
    w
}

/// Shortest p (in blocks) with σ(p) ⊒ t; among those, the one whose first
/// block is least, then recursively.
pub fn lift_prefix(s: &Substitution, t: &FiniteWord) -> Result<FiniteWord, DynError> {
    require_oc(s)?;
    lift_prefix_unchecked(s, t)
}

pub(crate) fn lift_prefix_unchecked(s: &Substitution, t: &FiniteWord) -> Result<FiniteWord, DynError> {
    factor_dp(s, t, true).map(|b| blocks_word(s, &b)).ok_or(DynError::NoFactorization)
}

/// Blocks whose images concatenate to exactly `t`, fewest first.
pub fn exact_factorization(s: &Substitution, t: &FiniteWord) -> Option<Vec<usize>> {
    factor_dp(s, t, false)
}

fn factor_dp(s: &Substitution, t: &FiniteWord, overhang: bool) -> Option<Vec<usize>> {
    let cands = image_blocks(s);
    let bits = t.bits();
    let n = bits.len();
    let mut cost = vec![usize::MAX; n + 1];
    let mut choice = vec![usize::MAX; n + 1];
    cost[n] = 0;
    for i in (0..n).rev() {
        let rem = n - i;
        for (b, img) in &cands {
            let ib = img.bits();
            let c = if ib.len() <= rem {
                if &bits[i..i + ib.len()] != ib || cost[i + ib.len()] == usize::MAX {
                    continue;
                }
                cost[i + ib.len()] + 1
            } else if overhang && ib[..rem] == bits[i..] {
                1
            } else {
                continue;
            };
            if c < cost[i] {
                cost[i] = c;
                choice[i] = *b;
            }
        }
    }
    if cost[0] == usize::MAX {
        return None;
    }
    let mut out = Vec::with_capacity(cost[0]);
    let mut i = 0;
    while i < n {
        let b = choice[i];
        out.push(b);
        i += s.images()[b].len();
    }
    Some(out)
}

/// Number of block sequences (over distinct nonempty images) whose image has
/// `t` as a prefix and whose last image is needed to reach |t|.
pub fn factorization_count(s: &Substitution, t: &FiniteWord) -> BigUint {
    let cands = image_blocks(s);
    let bits = t.bits();
    let n = bits.len();
    let mut ways = vec![BigUint::from(0u8); n + 1];
    ways[n] = BigUint::one();
    for i in (0..n).rev() {
        let rem = n - i;
        let mut acc = BigUint::from(0u8);
        for (_, img) in &cands {
            let ib = img.bits();
            if ib.len() <= rem {
                if &bits[i..i + ib.len()] == ib {
                    acc += &ways[i + ib.len()];
                }
            } else if ib[..rem] == bits[i..] {
                acc += 1u8;
            }
        }
        ways[i] = acc;
    }
    ways[0].clone()
}

/// A rational x with f_σ(x) = y.
///
/// The expansion of y (0^∞ for y = 0) is factored over the nonempty images
/// along an eventually periodic path of the position graph: least lag first,
/// then the shortest cycle, then lexicographically least blocks. A cycle
/// made of 0^k blocks gets a w_ε block appended.
pub fn preimage_point(s: &Substitution, y: &UnitReal) -> Result<UnitReal, DynError> {
    require_oc(s)?;
    let x = preimage_word(s, &y.tilde().as_word())?;
    Ok(UnitReal::from_expansion(&x))
}

pub(crate) fn preimage_word(s: &Substitution, word: &PeriodicWord) -> Result<PeriodicWord, DynError> {
    let a = word.prefix().len();
    let c = word.cycle().len();
    let n = a + c;
    let norm = |p: usize| if p < n { p } else { a + (p - a) % c };
    let cands = image_blocks(s);
    let edges: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            cands
                .iter()
                .filter(|(_, img)| img.bits().iter().enumerate().all(|(j, &b)| word.bit(i + j) == b))
                .map(|(b, img)| (*b, norm(i + img.len())))
                .collect()
        })
        .collect();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if alive[i] && !edges[i].iter().any(|&(_, j)| alive[j]) {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !alive[0] {
        return Err(DynError::NoFactorization);
    }
    let bfs = |from: usize| {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut dist = vec![usize::MAX; n];
        let mut order = Vec::new();
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(b, j) in &edges[v] {
                if alive[j] && dist[j] == usize::MAX {
                    dist[j] = dist[v] + 1;
                    parent[j] = Some((v, b));
                    queue.push_back(j);
                }
            }
        }
        (dist, parent, order)
    };
    let path_to = |parent: &[Option<(usize, usize)>], from: usize, to: usize| {
        let mut blocks = Vec::new();
        let mut at = to;
        while at != from {
            let (p, b) = parent[at].unwrap();
            blocks.push(b);
            at = p;
        }
        blocks.reverse();
        blocks
    };
    // Shortest cycle through v: a first edge, then a BFS path back.
    let cycle_at = |v: usize| -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for &(b, j) in &edges[v] {
            if !alive[j] {
                continue;
            }
            let (dist, parent, _) = bfs(j);
            if dist[v] == usize::MAX {
                continue;
            }
            let mut cyc = vec![b];
            cyc.extend(path_to(&parent, j, v));
            let better = match &best {
                None => true,
                Some(cur) => (cyc.len(), &cyc) < (cur.len(), cur),
            };
            if better {
                best = Some(cyc);
            }
        }
        best
    };
    let (dist, parent, order) = bfs(0);
    let mut chosen: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    for &v in &order {
        if let Some((lag, _, _)) = &chosen {
            if dist[v] > *lag {
                break;
            }
        }
        if v < a {
            continue;
        }
        if let Some(cyc) = cycle_at(v) {
            let lead = path_to(&parent, 0, v);
            let better = match &chosen {
                None => true,
                Some((_, l, c)) => (cyc.len(), &lead, &cyc) < (c.len(), l, c),
            };
            if better {
                chosen = Some((dist[v], lead, cyc));
            }
        }
    }
    let (_, lead, mut cyc) = chosen.ok_or(DynError::NoFactorization)?;
    let zero_block = 0usize;
    if cyc.iter().all(|&b| b == zero_block) {
        cyc.push(s.eps_index());
    }
    Ok(PeriodicWord::new(blocks_word(s, &lead), blocks_word(s, &cyc)))
}

/// An insertion sequence a_1, a_2, …: `prefix` then `cycle` repeated; an
/// empty cycle stands for zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Schedule {
    pub fn zeros() -> Self {
        Schedule::default()
    }

    /// a_{i+1} (0-based index).
    pub fn at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else if self.cycle.is_empty() {
            0
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn ultimately_zero(&self) -> bool {
        self.cycle.iter().all(|&x| x == 0)
    }
}

/// 0.∏ w_ε^{a_i} u_(i) over the k-blocks u_(i) of u.
pub fn xi_insert(s: &Substitution, u: &PeriodicWord, a: &Schedule) -> Result<UnitReal, DynError> {
    let k = s.k();
    let eps = s.w_eps();
    let ua = u.block_align(k);
    let m = ua.prefix().len() / k;
    let c = ua.cycle().len() / k;
    let block = |i: usize| {
        if i < m {
            ua.prefix().slice(i * k, (i + 1) * k)
        } else {
            let j = (i - m) % c;
            ua.cycle().slice(j * k, (j + 1) * k)
        }
    };
    if let Some(index) = (0..m + c).find(|&i| block(i) == eps) {
        return Err(DynError::HasEpsilonFactor { index });
    }
    let n0 = m.max(a.prefix.len());
    let period = c.lcm(&a.cycle.len().max(1));
    let piece = |i: usize| eps.repeat(a.at(i)).concat(&block(i));
    let mut prefix = FiniteWord::empty();
    for i in 0..n0 {
        prefix.extend_from(&piece(i));
    }
    let mut cycle = FiniteWord::empty();
    for i in n0..n0 + period {
        cycle.extend_from(&piece(i));
    }
    let w = PeriodicWord::new(prefix, cycle);
    if w.ends_in_zeros() {
        return Err(DynError::ZeroTail);
    }
    Ok(UnitReal::from_expansion(&w))
}

/// The w_ε blocks of ỹ removed (y°).
pub fn strip_eps(s: &Substitution, y: &UnitReal) -> Result<UnitReal, DynError> {
    let word = y.tilde().as_word();
    match strip_word(s, &word)? {
        None => Ok(y.clone()),
        Some(w) => Ok(UnitReal::from_expansion(&w)),
    }
}

/// `None` when there is nothing to remove.
fn strip_word(s: &Substitution, word: &PeriodicWord) -> Result<Option<PeriodicWord>, DynError> {
    let k = s.k();
    let eps = s.w_eps();
    let wa = word.block_align(k);
    let keep = |w: &FiniteWord| {
        let mut out = FiniteWord::empty();
        let mut removed = false;
        for i in 0..w.len() / k {
            let b = w.slice(i * k, (i + 1) * k);
            if b == eps {
                removed = true;
            } else {
                out.extend_from(&b);
            }
        }
        (out, removed)
    };
    let (p, rp) = keep(wa.prefix());
    let (c, rc) = keep(wa.cycle());
    if c.is_empty() {
        return Err(DynError::EpsilonTail);
    }
    if !rp && !rc {
        return Ok(None);
    }
    let w = PeriodicWord::new(p, c);
    if w.ends_in_zeros() {
        return Err(DynError::ZeroTail);
    }
    Ok(Some(w))
}

/// `count` distinct preimages of y, as ξ-images of seeded insertion schedules
/// over the w_ε-free part of a base preimage. When that part ends in 0^∞ only
/// schedules that are not ultimately 0 are used.
pub fn fiber_samples(s: &Substitution, y: &UnitReal, count: usize, seed: u64) -> Result<Vec<UnitReal>, DynError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    require_oc(s)?;
    let base = preimage_word(s, &y.tilde().as_word()).map_err(|e| match e {
        DynError::NoFactorization => DynError::NotInRange,
        e => e,
    })?;
    let u = base_word(s, &base);
    let plus = u.ends_in_zeros();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 100 + 100 {
        let a = if attempts == 0 && !plus {
            Schedule::zeros()
        } else {
            random_schedule(&mut rng, plus)
        };
        attempts += 1;
        match xi_insert(s, &u, &a) {
            Ok(x) => {
                if seen.insert(x.ratio().clone()) {
                    out.push(x);
                }
            }
            Err(DynError::ZeroTail) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.len() < count {
        return Err(DynError::BudgetExceeded(format!("{} of {count} samples", out.len())));
    }
    if let Some(bad) = out.iter().find(|x| eval_f(s, x) != *y) {
        return Err(DynError::InvalidInput(format!("sample {bad} does not map to {y}")));
    }
    Ok(out)
}

/// The preimage word with its w_ε blocks removed, possibly ending in 0^∞.
fn base_word(s: &Substitution, base: &PeriodicWord) -> PeriodicWord {
    let k = s.k();
    let eps = s.w_eps();
    let wa = base.block_align(k);
    let keep = |w: &FiniteWord| {
        let mut out = FiniteWord::empty();
        for i in 0..w.len() / k {
            let b = w.slice(i * k, (i + 1) * k);
            if b != eps {
                out.extend_from(&b);
            }
        }
        out
    };
    PeriodicWord::new(keep(wa.prefix()), keep(wa.cycle()))
}

fn random_schedule(rng: &mut ChaCha8Rng, plus: bool) -> Schedule {
    let plen = rng.gen_range(0..=6);
    let prefix = (0..plen).map(|_| rng.gen_range(0..=3)).collect();
    let clen = rng.gen_range(1..=3);
    let mut cycle: Vec<usize> = (0..clen).map(|_| rng.gen_range(0..=2)).collect();
    if plus && cycle.iter().all(|&x| x == 0) {
        cycle[0] = 1;
    }
    Schedule { prefix, cycle }
}

/// Finite-depth look at the accumulation points of a fiber: samples with a
/// long w_ε run inserted after the first block approach 0.u_(1)w_ε^∞, which
/// lies outside the fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitCheck {
    /// Whether ỹ[..depth] has a single covering factorization.
    pub unique: bool,
    pub depths_checked: usize,
    pub holds: bool,
}

pub fn limit_point_check(s: &Substitution, y: &UnitReal, depth: usize) -> Result<LimitCheck, DynError> {
    require_oc(s)?;
    let yw = y.tilde().as_word();
    let unique = factorization_count(s, &yw.take(depth)) == BigUint::one();
    let base = preimage_word(s, &yw).map_err(|_| DynError::NotInRange)?;
    let u = base_word(s, &base);
    let k = s.k();
    let eps = s.w_eps();
    let head = u.take(k);
    let limit_word = PeriodicWord::new(head.clone(), eps.clone());
    let limit = UnitReal::from_expansion(&limit_word);
    let mut holds = eval_f(s, &limit) != *y;
    for m in 1..=depth {
        let reps = m.div_ceil(k);
        let a = Schedule {
            prefix: vec![0, reps],
            cycle: Vec::new(),
        };
        let x = xi_insert(s, &u, &a)?;
        let close = x.dist(&limit) <= Ratio::new(BigUint::one(), BigUint::one() << m);
        // Word-level agreement with v·w_ε^∞; the limit's own canonical
        // expansion may avoid the 0^∞ tail.
        let shape = x.tilde().as_word().take(m) == limit_word.take(m);
        holds &= close && shape && eval_f(s, &x) == *y;
    }
    Ok(LimitCheck {
        unique,
        depths_checked: depth,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A point near x₀ = 0.w_ε^∞ whose image lies in a fixed cylinder that is
/// covered by images of points arbitrarily close to x₀ on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlmostFixed {
    pub x0: UnitReal,
    pub z: UnitReal,
    pub side: Side,
    /// σ(v_1…v_k) for the first block of the factorization v of w_ε^∞.
    pub cylinder: FiniteWord,
    pub reps: usize,
    lead: FiniteWord,
}

impl AlmostFixed {
    /// A point on the same side, equally close to x₀, mapped onto y ∈ [cylinder].
    pub fn hit(&self, s: &Substitution, y: &UnitReal) -> Result<UnitReal, DynError> {
        let yw = y.tilde().as_word();
        if yw.take(self.cylinder.len()) != self.cylinder {
            return Err(DynError::NotInRange);
        }
        let rest = preimage_word(s, &yw.drop_prefix(self.cylinder.len()))?;
        let w = rest.prepend(&self.lead);
        if w.ends_in_zeros() {
            return Err(DynError::ZeroTail);
        }
        Ok(UnitReal::from_expansion(&w))
    }
}

pub fn almost_fixed_witness(s: &Substitution, j: usize) -> Result<AlmostFixed, DynError> {
    require_oc(s)?;
    let k = s.k();
    let eps = s.w_eps();
    let x0 = UnitReal::from_expansion(&PeriodicWord::pure(eps.clone()));
    let v = preimage_word(s, &PeriodicWord::pure(eps.clone()))?;
    let first = v.take(k);
    let side = if first > eps { Side::Right } else { Side::Left };
    let reps = (j + 1).div_ceil(k);
    let lead = eps.repeat(reps).concat(&first);
    let z = UnitReal::from_expansion(&v.prepend(&eps.repeat(reps)));
    let cylinder = s.image(&first).clone();
    Ok(AlmostFixed {
        x0,
        z,
        side,
        cylinder,
        reps,
        lead,
    })
}
