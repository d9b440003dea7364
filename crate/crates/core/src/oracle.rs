//! Slow reference implementations, written without the engine's algorithms.
//! Only the word types and the substitution table are shared.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::substitution::Substitution;
use crate::words::{FiniteWord, UnitReal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamEvaluation {
    pub requested_bits: usize,
    pub produced: FiniteWord,
    pub consumed_input_bits: usize,
    pub stalled: bool,
}

/// Digits of the expansion of num/den not ending in 0^∞: emit 1 exactly
/// when twice the remainder exceeds the denominator.
#[derive(Debug, Clone)]
enum Remainder {
    Small { r: u128, q: u128 },
    Big { r: BigUint, q: BigUint },
}

impl Remainder {
    fn new(x: &UnitReal) -> Self {
        match (x.numer().to_u64(), x.denom().to_u64()) {
            (Some(r), Some(q)) => Remainder::Small {
                r: r as u128,
                q: q as u128,
            },
            _ => Remainder::Big {
                r: x.numer().clone(),
                q: x.denom().clone(),
            },
        }
    }

    fn next_digit(&mut self) -> u8 {
        match self {
            Remainder::Small { r, q } => {
                let t = *r * 2;
                if t > *q {
                    *r = t - *q;
                    1
                } else {
                    *r = t;
                    0
                }
            }
            Remainder::Big { r, q } => {
                let t = &*r << 1u32;
                if t > *q {
                    *r = t - &*q;
                    1
                } else {
                    *r = t;
                    0
                }
            }
        }
    }

    fn key(&self) -> Vec<u8> {
        match self {
            Remainder::Small { r, .. } => r.to_le_bytes().to_vec(),
            Remainder::Big { r, .. } => r.to_bytes_le(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Remainder::Small { r, .. } => *r == 0,
            Remainder::Big { r, .. } => r.is_zero(),
        }
    }
}

/// The first `bits` digits of 0.σ(x̃), read block by block from a lazy long
/// division. Stalls when the remainder at a block boundary repeats without
/// new output in between.
pub fn brute_eval(s: &Substitution, x: &UnitReal, bits: usize) -> StreamEvaluation {
    let k = s.k();
    let mut rem = Remainder::new(x);
    let mut out: Vec<u8> = Vec::new();
    let mut consumed = 0;
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    if rem.is_zero() {
        return StreamEvaluation {
            requested_bits: bits,
            produced: FiniteWord::empty(),
            consumed_input_bits: 0,
            stalled: true,
        };
    }
    while out.len() < bits {
        let key = rem.key();
        if let Some(&len) = seen.get(&key) {
            if len == out.len() {
                return StreamEvaluation {
                    requested_bits: bits,
                    produced: FiniteWord::new(out),
                    consumed_input_bits: consumed,
                    stalled: true,
                };
            }
        }
        seen.insert(key, out.len());
        let mut idx = 0usize;
        for _ in 0..k {
            idx = (idx << 1) | rem.next_digit() as usize;
        }
        consumed += k;
        out.extend_from_slice(s.images()[idx].bits());
    }
    StreamEvaluation {
        requested_bits: bits,
        produced: FiniteWord::new(out),
        consumed_input_bits: consumed,
        stalled: false,
    }
}

/// Per-position single-letter images found by backtracking over all ways of
/// splitting each block image into k consecutive pieces.
pub fn brute_alternating_split(s: &Substitution) -> Option<Vec<[Option<FiniteWord>; 2]>> {
    let k = s.k();
    let mut assign: Vec<[Option<FiniteWord>; 2]> = vec![[None, None]; k];
    fn go(
        s: &Substitution,
        block: usize,
        assign: &mut Vec<[Option<FiniteWord>; 2]>,
    ) -> bool {
        let k = s.k();
        if block == s.images().len() {
            return true;
        }
        let b = FiniteWord::from_index(block, k);
        let image = s.images()[block].clone();
        fn split(
            s: &Substitution,
            block: usize,
            b: &FiniteWord,
            image: &FiniteWord,
            pos: usize,
            at: usize,
            assign: &mut Vec<[Option<FiniteWord>; 2]>,
        ) -> bool {
            let k = s.k();
            if pos == k {
                return at == image.len() && go(s, block + 1, assign);
            }
            let bit = b.bit(pos) as usize;
            for end in at..=image.len() {
                let piece = image.slice(at, end);
                match &assign[pos][bit] {
                    Some(p) if *p != piece => continue,
                    Some(_) => {
                        if split(s, block, b, image, pos + 1, end, assign) {
                            return true;
                        }
                    }
                    None => {
                        assign[pos][bit] = Some(piece);
                        if split(s, block, b, image, pos + 1, end, assign) {
                            return true;
                        }
                        assign[pos][bit] = None;
                    }
                }
            }
            false
        }
        split(s, block, &b, &image, 0, 0, assign)
    }
    go(s, 0, &mut assign).then_some(assign)
}

/// σ(w) for an alternating σ: pad w with the tail of w_ε up to a block
/// boundary and apply the table.
pub fn brute_apply_padded(s: &Substitution, w: &FiniteWord) -> FiniteWord {
    let k = s.k();
    let eps = FiniteWord::from_index(s.eps_index(), k);
    let m = w.len() % k;
    let padded = if m == 0 { w.clone() } else { w.concat(&eps.suffix_from(m)) };
    let mut out = Vec::new();
    for i in (0..padded.len()).step_by(k) {
        out.extend_from_slice(s.images()[padded.slice(i, i + k).to_index()].bits());
    }
    FiniteWord::new(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteVanishing {
    Order(usize),
    NoVanish { repeated: FiniteWord },
    NotAlternating,
    StepLimit,
}

/// Direct iteration with the full history kept for recurrence detection.
pub fn brute_vanishing(s: &Substitution, w: &FiniteWord, max_steps: usize) -> BruteVanishing {
    if brute_alternating_split(s).is_none() {
        return BruteVanishing::NotAlternating;
    }
    let mut history: Vec<FiniteWord> = Vec::new();
    let mut cur = w.clone();
    for n in 1..=max_steps {
        if !cur.is_empty() {
            if history.contains(&cur) {
                return BruteVanishing::NoVanish { repeated: cur };
            }
            history.push(cur.clone());
        }
        cur = brute_apply_padded(s, &cur);
        if cur.is_empty() {
            return BruteVanishing::Order(n);
        }
    }
    BruteVanishing::StepLimit
}

/// Every word up to length `max_len` is a prefix of a concatenation of the
/// images; otherwise the first failure in length-lexicographic order.
pub fn brute_factor_coverage(images: &[FiniteWord], max_len: usize) -> Result<(), FiniteWord> {
    let images: Vec<&FiniteWord> = images.iter().filter(|w| !w.is_empty()).collect();
    fn covered(w: &[u8], images: &[&FiniteWord]) -> bool {
        if w.is_empty() {
            return true;
        }
        images.iter().any(|v| {
            let v = v.bits();
            if v.len() >= w.len() {
                v.starts_with(w)
            } else {
                w.starts_with(v) && covered(&w[v.len()..], images)
            }
        })
    }
    for len in 0..=max_len {
        for i in 0..1usize << len {
            let w = FiniteWord::from_index(i, len);
            if !covered(w.bits(), &images) {
                return Err(w);
            }
        }
    }
    Ok(())
}

/// Shortest block word p, least in lexicographic order, whose block image
/// starts with t. Exhaustive over block counts up to `max_blocks`.
pub fn brute_shortest_lift(s: &Substitution, t: &FiniteWord, max_blocks: usize) -> Option<FiniteWord> {
    let k = s.k();
    for n in 0..=max_blocks {
        for i in 0..1usize << (n * k) {
            let p = FiniteWord::from_index(i, n * k);
            let mut img = FiniteWord::empty();
            for j in 0..n {
                img.extend_from(&s.images()[p.slice(j * k, j * k + k).to_index()]);
            }
            if img.starts_with(t) {
                return Some(p);
            }
        }
    }
    None
}

/// max ε(u) over all u of length `len`, by brute iteration.
pub fn brute_max_vanishing(s: &Substitution, len: usize) -> Option<usize> {
    let mut best = 0;
    for i in 0..1usize << len {
        match brute_vanishing(s, &FiniteWord::from_index(i, len), 10_000) {
            BruteVanishing::Order(n) => best = best.max(n),
            _ => return None,
        }
    }
    Some(best)
}

/// Smallest eventually periodic word consistent with all of `bits`,
/// preferring short prefixes and then short cycles, with the cycle seen at
/// least twice. Returns the point it denotes.
pub fn reconstruct_rational(bits: &FiniteWord) -> Option<UnitReal> {
    let n = bits.len();
    for total in 1..=n / 2 {
        for c in 1..=total {
            let a = total - c;
            if a + 2 * c > n {
                continue;
            }
            if (a + c..n).all(|i| bits.bit(i) == bits.bit(i - c)) {
                let pw = crate::words::PeriodicWord::new(bits.prefix(a), bits.slice(a, a + c));
                return Some(UnitReal::from_expansion(&pw));
            }
        }
    }
    None
}

/// The value of an oracle stream, when it pins the value down.
pub fn stream_value(e: &StreamEvaluation) -> Option<UnitReal> {
    if e.stalled {
        Some(UnitReal::from_finite(&e.produced))
    } else {
        reconstruct_rational(&e.produced)
    }
}

/// Every derived constant used by the examples and acceptance checks,
/// as `name = value` pairs in a fixed order.
pub fn derived_constants() -> Vec<(String, String)> {
    use crate::catalog::{sigma1, sigma3, sigma4};
    let s3 = sigma3();
    let s4 = sigma4();
    let w = |t: &str| -> FiniteWord { t.parse().unwrap() };
    let q = |t: &str| -> UnitReal { t.parse().unwrap() };
    let mut out: Vec<(String, String)> = Vec::new();
    let mut put = |name: &str, value: String| out.push((name.to_string(), value));

    let mut third = Remainder::new(&q("1/3"));
    let digits: FiniteWord = FiniteWord::new((0..12).map(|_| third.next_digit()).collect());
    put("tilde.1/3.first12", digits.to_string());
    let mut half = Remainder::new(&q("1/2"));
    let digits: FiniteWord = FiniteWord::new((0..6).map(|_| half.next_digit()).collect());
    put("tilde.1/2.first6", digits.to_string());

    put("sigma3.strict.1101", brute_apply_padded(&s3, &w("1101")).to_string());
    put("sigma3.alternating.111", brute_apply_padded(&s3, &w("111")).to_string());
    let split = brute_alternating_split(&s3).unwrap();
    let render = |m: &Option<FiniteWord>| m.as_ref().map(|x| x.to_string()).unwrap_or("?".into());
    put(
        "sigma3.split",
        split
            .iter()
            .map(|p| format!("0:{},1:{}", render(&p[0]), render(&p[1])))
            .collect::<Vec<_>>()
            .join(" | "),
    );
    put("sigma2.alternating", brute_alternating_split(&crate::catalog::sigma2()).is_some().to_string());
    let split4 = brute_alternating_split(&s4).unwrap();
    put(
        "sigma4.split.ones",
        split4.iter().map(|p| render(&p[1])).collect::<Vec<_>>().join(","),
    );

    let iterate = |u: &FiniteWord, n: usize| {
        let mut c = u.clone();
        for _ in 0..n {
            c = brute_apply_padded(&s3, &c);
        }
        c
    };
    for (u, n, v) in [("1", 1, "1"), ("11", 2, "11")] {
        let whole = iterate(&w(u).concat(&w(v)), n);
        let head = iterate(&w(u), n);
        assert!(whole.starts_with(&head));
        put(&format!("sigma3.relative.{u}.{n}.{v}"), whole.suffix_from(head.len()).to_string());
    }

    for word in ["0", "1", "00", "01", "10", "11", "0101010101"] {
        let e = match brute_vanishing(&s3, &w(word), 10_000) {
            BruteVanishing::Order(n) => n.to_string(),
            other => format!("{other:?}"),
        };
        put(&format!("sigma3.vanishing.{word}"), e);
    }
    for len in [1usize, 2, 4, 8, 16] {
        put(&format!("sigma3.F.{len}"), brute_max_vanishing(&s3, len).unwrap().to_string());
    }
    put("sigma4.F.3", brute_max_vanishing(&s4, 3).unwrap().to_string());
    let max4 = (1..=12).map(|l| brute_max_vanishing(&s4, l).unwrap()).max().unwrap();
    put("sigma4.max_vanishing.upto12", max4.to_string());

    for (x, bits) in [("1", 8), ("1/2", 4), ("1/3", 8)] {
        let e = brute_eval(&s3, &q(x), bits);
        put(&format!("sigma3.stream.{x}.{bits}"), e.produced.prefix(bits).to_string());
    }
    let e = brute_eval(&crate::catalog::sigma2(), &q("1/3"), 8);
    put("sigma2.stream.1/3.stalled", format!("{} {}", e.stalled, e.produced));
    for x in ["1", "1/3", "2/3", "1/2"] {
        let e = brute_eval(&s3, &q(x), 256);
        put(&format!("sigma3.f.{x}"), stream_value(&e).map(|v| v.to_string()).unwrap_or("?".into()));
    }

    put("sigma3.lift.10", brute_shortest_lift(&s3, &w("10"), 6).unwrap().to_string());
    put("sigma3.lift.0", brute_shortest_lift(&s3, &w("0"), 6).unwrap().to_string());

    let cov = |imgs: &[FiniteWord], l: usize| match brute_factor_coverage(imgs, l) {
        Ok(()) => "covered".to_string(),
        Err(w) => format!("fails at {w}"),
    };
    put("coverage.sigma1.12", cov(sigma1().images(), 12));
    put("coverage.sigma3.12", cov(s3.images(), 12));
    put("coverage.sigma4.1", cov(s4.images(), 1));
    out
}

/// `name = value` lines for the checked-in constants file.
pub fn render_constants(constants: &[(String, String)]) -> String {
    constants.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn stream_examples() {
        let s3 = catalog::sigma3();
        let e = brute_eval(&s3, &UnitReal::one(), 8);
        assert_eq!(e.produced.prefix(8).to_string(), "01010101");
        assert!(!e.stalled);
        let e = brute_eval(&catalog::sigma2(), &"1/3".parse().unwrap(), 8);
        assert!(e.stalled);
        assert!(e.produced.is_empty());
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(brute_factor_coverage(catalog::sigma4().images(), 1), Err("1".parse().unwrap()));
        assert_eq!(brute_factor_coverage(catalog::sigma3().images(), 12), Ok(()));
    }

    #[test]
    fn split_matches_known_cases() {
        assert!(brute_alternating_split(&catalog::sigma1()).is_none());
        assert!(brute_alternating_split(&catalog::sigma3()).is_some());
        assert_eq!(
            brute_vanishing(&catalog::sigma1(), &"1".parse().unwrap(), 10),
            BruteVanishing::NotAlternating
        );
    }

    #[test]
    #[ignore]
    fn print_constants() {
        print!("{}", render_constants(&derived_constants()));
    }
}
