//! Finite and eventually periodic binary words, and rational points of the
//! unit interval through their canonical expansion.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("bad symbol {0:?} (expected 0 or 1)")]
    BadSymbol(char),
    #[error("empty cycle")]
    EmptyCycle,
    #[error("malformed rational literal {0:?}")]
    BadLiteral(String),
    #[error("value {0} is outside [0,1]")]
    OutOfRange(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// A finite word over {0,1}. Symbols are stored one per byte.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteWord(Vec<u8>);

impl FiniteWord {
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "binary symbols only");
        FiniteWord(bits)
    }

    pub fn empty() -> Self {
        FiniteWord(Vec::new())
    }

    pub fn zeros(n: usize) -> Self {
        FiniteWord(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        FiniteWord(vec![1; n])
    }

    /// The block of length `len` at position `index` in the lexicographic
    /// enumeration of {0,1}^len.
    pub fn from_index(index: usize, len: usize) -> Self {
        FiniteWord((0..len).map(|i| ((index >> (len - 1 - i)) & 1) as u8).collect())
    }

    /// Inverse of [`FiniteWord::from_index`].
    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn push(&mut self, b: u8) {
        assert!(b <= 1);
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &FiniteWord) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &FiniteWord) -> FiniteWord {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        FiniteWord(v)
    }

    pub fn slice(&self, from: usize, to: usize) -> FiniteWord {
        FiniteWord(self.0[from..to].to_vec())
    }

    pub fn prefix(&self, n: usize) -> FiniteWord {
        self.slice(0, n.min(self.len()))
    }

    pub fn suffix_from(&self, n: usize) -> FiniteWord {
        self.slice(n.min(self.len()), self.len())
    }

    pub fn starts_with(&self, p: &FiniteWord) -> bool {
        self.0.starts_with(&p.0)
    }

    pub fn repeat(&self, n: usize) -> FiniteWord {
        FiniteWord(self.0.repeat(n))
    }

    pub fn is_all(&self, b: u8) -> bool {
        self.0.iter().all(|&x| x == b)
    }

    /// Value of 0.w as an exact fraction numerator over 2^|w|.
    pub fn as_integer(&self) -> BigUint {
        let mut n = BigUint::zero();
        for &b in &self.0 {
            n <<= 1u32;
            if b == 1 {
                n += 1u32;
            }
        }
        n
    }

    /// All words of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = FiniteWord> {
        (0..1usize << len).map(move |i| FiniteWord::from_index(i, len))
    }

    /// All words of length at most `max_len`, by length then lexicographically.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = FiniteWord> {
        (0..=max_len).flat_map(FiniteWord::all_of_length)
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteWord({self})")
    }
}

impl FromStr for FiniteWord {
    type Err = WordError;

    /// Accepts a string over {0,1}; the empty string, "ε" and "-" denote ε.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s == "-" {
            return Ok(FiniteWord::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(WordError::BadSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(FiniteWord)
    }
}

impl Serialize for FiniteWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self.0.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for FiniteWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Length of the shortest period of `w` that divides |w|.
fn primitive_root_len(w: &[u8]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n];
    let mut j = 0;
    for i in 1..n {
        while j > 0 && w[i] != w[j] {
            j = fail[j - 1];
        }
        if w[i] == w[j] {
            j += 1;
        }
        fail[i] = j;
    }
    let p = n - fail[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

/// An eventually periodic infinite word `prefix · cycle^∞`.
///
/// Values built with [`PeriodicWord::new`] are canonical: the cycle is
/// primitive and the prefix cannot be shortened by rotating the cycle.
/// [`PeriodicWord::block_align`] deliberately produces non-canonical
/// representatives, so structural equality is not word equality; use
/// [`PeriodicWord::same_word`] for the latter.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicWord {
    prefix: FiniteWord,
    cycle: FiniteWord,
}

impl PeriodicWord {
    /// Canonical form of `prefix · cycle^∞`. Panics on an empty cycle.
    pub fn new(prefix: FiniteWord, cycle: FiniteWord) -> Self {
        Self::try_new(prefix, cycle).expect("cycle must be nonempty")
    }

    pub fn try_new(prefix: FiniteWord, cycle: FiniteWord) -> Result<Self, WordError> {
        if cycle.is_empty() {
            return Err(WordError::EmptyCycle);
        }
        Ok(PeriodicWord { prefix, cycle }.canonical())
    }

    /// Keeps the given representation as is.
    pub fn raw(prefix: FiniteWord, cycle: FiniteWord) -> Self {
        assert!(!cycle.is_empty(), "cycle must be nonempty");
        PeriodicWord { prefix, cycle }
    }

    /// `c^∞` for a nonempty word `c`.
    pub fn pure(cycle: FiniteWord) -> Self {
        Self::new(FiniteWord::empty(), cycle)
    }

    pub fn prefix(&self) -> &FiniteWord {
        &self.prefix
    }

    pub fn cycle(&self) -> &FiniteWord {
        &self.cycle
    }

    pub fn canonical(&self) -> PeriodicWord {
        let root = primitive_root_len(self.cycle.bits());
        let mut cycle: Vec<u8> = self.cycle.bits()[..root].to_vec();
        let mut prefix: Vec<u8> = self.prefix.bits().to_vec();
        while let (Some(&p), Some(&c)) = (prefix.last(), cycle.last()) {
            if p != c {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        PeriodicWord {
            prefix: FiniteWord(prefix),
            cycle: FiniteWord(cycle),
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// True iff both denote the same infinite word.
    pub fn same_word(&self, other: &PeriodicWord) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn bit(&self, i: usize) -> u8 {
        let p = self.prefix.len();
        if i < p {
            self.prefix.bit(i)
        } else {
            self.cycle.bit((i - p) % self.cycle.len())
        }
    }

    /// The first `n` symbols.
    pub fn take(&self, n: usize) -> FiniteWord {
        FiniteWord((0..n).map(|i| self.bit(i)).collect())
    }

    /// The suffix starting at position `n`.
    pub fn drop_prefix(&self, n: usize) -> PeriodicWord {
        let p = self.prefix.len();
        if n <= p {
            return PeriodicWord::raw(self.prefix.suffix_from(n), self.cycle.clone());
        }
        let shift = (n - p) % self.cycle.len();
        let mut c = self.cycle.bits().to_vec();
        c.rotate_left(shift);
        PeriodicWord::raw(FiniteWord::empty(), FiniteWord(c))
    }

    /// `w · self`.
    pub fn prepend(&self, w: &FiniteWord) -> PeriodicWord {
        PeriodicWord::raw(w.concat(&self.prefix), self.cycle.clone())
    }

    /// Representation whose prefix and cycle lengths are multiples of `k`:
    /// the prefix is the least multiple of k not shorter than the original
    /// and the cycle has length lcm(|cycle|, k).
    pub fn block_align(&self, k: usize) -> PeriodicWord {
        assert!(k >= 1);
        let p = self.prefix.len();
        let new_p = p.div_ceil(k) * k;
        let c = self.cycle.len();
        let new_c = c.lcm(&k);
        let prefix = self.take(new_p);
        let cycle = FiniteWord((new_p..new_p + new_c).map(|i| self.bit(i)).collect());
        PeriodicWord { prefix, cycle }
    }

    /// True iff the word ends in 0^∞.
    pub fn ends_in_zeros(&self) -> bool {
        self.cycle.is_all(0)
    }

    /// Exact value of 0.self as an unreduced fraction.
    pub fn value_unreduced(&self) -> (BigUint, BigUint) {
        let a = self.prefix.len();
        let c = self.cycle.len();
        let period = (BigUint::one() << c) - BigUint::one();
        let num = self.prefix.as_integer() * &period + self.cycle.as_integer();
        let den = (BigUint::one() << a) * period;
        (num, den)
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: String = self.prefix.bits().iter().map(|&b| (b'0' + b) as char).collect();
        let c: String = self.cycle.bits().iter().map(|&b| (b'0' + b) as char).collect();
        write!(f, "{p}({c})")
    }
}

impl fmt::Debug for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeriodicWord({self})")
    }
}

/// Either a finite or an eventually periodic word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyWord {
    Finite(FiniteWord),
    Periodic(PeriodicWord),
}

/// Whether `u` occurs in `w` at an offset that is a multiple of `k`.
pub fn has_k_factor(w: &AnyWord, u: &FiniteWord, k: usize) -> bool {
    assert!(k >= 1 && !u.is_empty());
    match w {
        AnyWord::Finite(w) => (0..)
            .map(|n| n * k)
            .take_while(|&off| off + u.len() <= w.len())
            .any(|off| w.bits()[off..off + u.len()] == *u.bits()),
        AnyWord::Periodic(w) => {
            // Past the prefix, offsets repeat with period lcm(|cycle|, k).
            let limit = w.prefix().len() + k * w.cycle().len() + k;
            (0..)
                .map(|n| n * k)
                .take_while(|&off| off <= limit)
                .any(|off| (0..u.len()).all(|i| w.bit(off + i) == u.bit(i)))
        }
    }
}

/// The k-roundings of `w`, in lexicographic order of their extensions.
pub fn k_roundings(w: &FiniteWord, k: usize) -> Vec<FiniteWord> {
    k_extensions(w, k).into_iter().map(|e| w.concat(&e)).collect()
}

/// The k-extensions e(w): words v of minimal length making |wv| a multiple
/// of k, in lexicographic order.
pub fn k_extensions(w: &FiniteWord, k: usize) -> Vec<FiniteWord> {
    assert!(k >= 1);
    let m = w.len() % k;
    if m == 0 {
        return vec![FiniteWord::empty()];
    }
    FiniteWord::all_of_length(k - m).collect()
}

/// The exact binary expansion of a point: 0 is special-cased, every other
/// point uses the expansion not ending in 0^∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expansion {
    Zero,
    Word(PeriodicWord),
}

impl Expansion {
    /// The expansion as an infinite word (0^∞ for zero).
    pub fn as_word(&self) -> PeriodicWord {
        match self {
            Expansion::Zero => PeriodicWord::pure(FiniteWord::zeros(1)),
            Expansion::Word(w) => w.clone(),
        }
    }
}

/// A rational point of [0,1], held through its canonical expansion x̃.
///
/// The reduced fraction is computed on demand; equality and hashing use the
/// expansion, which is exact.
#[derive(Clone)]
pub struct UnitReal {
    tilde: Expansion,
    ratio: OnceLock<Ratio<BigUint>>,
}

impl PartialEq for UnitReal {
    fn eq(&self, other: &Self) -> bool {
        self.tilde == other.tilde
    }
}

impl Eq for UnitReal {}

impl Hash for UnitReal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tilde.hash(state);
    }
}

impl PartialOrd for UnitReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UnitReal {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let (a, b) = self.unreduced();
        let (c, d) = other.unreduced();
        (a * d).cmp(&(c * b))
    }
}

impl UnitReal {
    pub fn zero() -> Self {
        UnitReal {
            tilde: Expansion::Zero,
            ratio: OnceLock::new(),
        }
    }

    pub fn one() -> Self {
        UnitReal::from_expansion(&PeriodicWord::pure(FiniteWord::ones(1)))
    }

    pub fn new(num: BigUint, den: BigUint) -> Result<Self, WordError> {
        if den.is_zero() {
            return Err(WordError::ZeroDenominator);
        }
        if num > den {
            return Err(WordError::OutOfRange(format!("{num}/{den}")));
        }
        let r = Ratio::new(num, den);
        let tilde = expand(r.numer(), r.denom());
        let cell = OnceLock::new();
        let _ = cell.set(r);
        Ok(UnitReal { tilde, ratio: cell })
    }

    pub fn from_u64(num: u64, den: u64) -> Result<Self, WordError> {
        Self::new(BigUint::from(num), BigUint::from(den))
    }

    pub fn from_ratio(r: &Ratio<BigUint>) -> Result<Self, WordError> {
        Self::new(r.numer().clone(), r.denom().clone())
    }

    /// The point 0.w for an arbitrary infinite word w; a 0^∞ tail is
    /// rewritten to the canonical 1^∞ tail.
    pub fn from_expansion(w: &PeriodicWord) -> Self {
        let w = w.canonical();
        let tilde = if w.ends_in_zeros() {
            match w.prefix().bits().iter().rposition(|&b| b == 1) {
                None => Expansion::Zero,
                Some(j) => {
                    let mut p = w.prefix().prefix(j);
                    p.push(0);
                    Expansion::Word(PeriodicWord::new(p, FiniteWord::ones(1)))
                }
            }
        } else {
            Expansion::Word(w)
        };
        UnitReal {
            tilde,
            ratio: OnceLock::new(),
        }
    }

    /// The dyadic point 0.w.
    pub fn from_finite(w: &FiniteWord) -> Self {
        Self::from_expansion(&PeriodicWord::raw(w.clone(), FiniteWord::zeros(1)))
    }

    pub fn tilde(&self) -> &Expansion {
        &self.tilde
    }

    pub fn is_zero(&self) -> bool {
        self.tilde == Expansion::Zero
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.tilde, Expansion::Word(w) if w.prefix().is_empty() && w.cycle().is_all(1))
    }

    /// Dyadic rationals, including 0 and 1.
    pub fn is_dyadic(&self) -> bool {
        match &self.tilde {
            Expansion::Zero => true,
            Expansion::Word(w) => w.cycle().len() == 1 && w.cycle().bit(0) == 1,
        }
    }

    fn unreduced(&self) -> (BigUint, BigUint) {
        match self.ratio.get() {
            Some(r) => (r.numer().clone(), r.denom().clone()),
            None => match &self.tilde {
                Expansion::Zero => (BigUint::zero(), BigUint::one()),
                Expansion::Word(w) => w.value_unreduced(),
            },
        }
    }

    /// The value as a reduced fraction.
    pub fn ratio(&self) -> &Ratio<BigUint> {
        self.ratio.get_or_init(|| {
            let (n, d) = self.unreduced();
            Ratio::new(n, d)
        })
    }

    pub fn numer(&self) -> &BigUint {
        self.ratio().numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.ratio().denom()
    }

    /// |self − other|, exactly.
    pub fn dist(&self, other: &UnitReal) -> Ratio<BigUint> {
        let (a, b) = (self.ratio(), other.ratio());
        if a >= b {
            a - b
        } else {
            b - a
        }
    }

    /// Binary literal `0b0.PREFIX(CYCLE)` of x̃ (0 renders as `0b0.(0)`).
    pub fn binary(&self) -> String {
        match &self.tilde {
            Expansion::Zero => "0b0.(0)".to_string(),
            Expansion::Word(w) => format!("0b0.{w}"),
        }
    }

    /// Lossy conversion for display only.
    pub fn to_f64(&self) -> f64 {
        let r = self.ratio();
        let shift = r.denom().bits().saturating_sub(60);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

impl fmt::Display for UnitReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.ratio();
        if r.denom().is_one() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

impl fmt::Debug for UnitReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitReal({} = {})", self, self.binary())
    }
}

impl FromStr for UnitReal {
    type Err = WordError;

    /// Parses `p/q`, a bare integer 0 or 1, or `0b0.PREFIX(CYCLE)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || WordError::BadLiteral(s.to_string());
        if let Some(rest) = s.strip_prefix("0b0.") {
            let open = rest.find('(').ok_or_else(bad)?;
            let body = rest.strip_suffix(')').ok_or_else(bad)?;
            let prefix: FiniteWord = rest[..open].parse()?;
            let cycle: FiniteWord = body[open + 1..].parse()?;
            if cycle.is_empty() {
                return Err(WordError::EmptyCycle);
            }
            return Ok(UnitReal::from_expansion(&PeriodicWord::new(prefix, cycle)));
        }
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigUint = n.parse().map_err(|_| bad())?;
        let d: BigUint = d.parse().map_err(|_| bad())?;
        UnitReal::new(n, d)
    }
}

impl Serialize for UnitReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for UnitReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// x̃ for a reduced fraction num/den in [0,1].
fn expand(num: &BigUint, den: &BigUint) -> Expansion {
    if num.is_zero() {
        return Expansion::Zero;
    }
    if num == den {
        return Expansion::Word(PeriodicWord::pure(FiniteWord::ones(1)));
    }
    let twos = den.trailing_zeros().unwrap_or(0) as usize;
    let (prefix, cycle) = match (num.to_u64(), den.to_u64()) {
        (Some(n), Some(d)) if d < 1 << 62 => long_division_u64(n, d, twos),
        _ => long_division_big(num, den, twos),
    };
    let pw = match cycle {
        Some(c) => PeriodicWord::new(prefix, c),
        None => {
            // Terminating expansion w1·0^∞ becomes w0·1^∞.
            let mut p = prefix.into_bits();
            let last = p.len() - 1;
            debug_assert_eq!(p[last], 1);
            p[last] = 0;
            PeriodicWord::new(FiniteWord(p), FiniteWord::ones(1))
        }
    };
    Expansion::Word(pw)
}

/// Greedy base-2 long division: `twos` preperiod digits, then digits until
/// the remainder recurs. `None` cycle means the expansion terminated.
fn long_division_u64(num: u64, den: u64, twos: usize) -> (FiniteWord, Option<FiniteWord>) {
    let mut r = num;
    let mut prefix = Vec::with_capacity(twos);
    for _ in 0..twos {
        r <<= 1;
        let d = (r >= den) as u8;
        if d == 1 {
            r -= den;
        }
        prefix.push(d);
    }
    if r == 0 {
        return (FiniteWord(prefix), None);
    }
    let start = r;
    let mut cycle = Vec::new();
    loop {
        r <<= 1;
        let d = (r >= den) as u8;
        if d == 1 {
            r -= den;
        }
        cycle.push(d);
        if r == start {
            break;
        }
    }
    (FiniteWord(prefix), Some(FiniteWord(cycle)))
}

fn long_division_big(num: &BigUint, den: &BigUint, twos: usize) -> (FiniteWord, Option<FiniteWord>) {
    let mut r = num.clone();
    let mut prefix = Vec::with_capacity(twos);
    let step = |r: &mut BigUint| -> u8 {
        *r <<= 1u32;
        if &*r >= den {
            *r -= den;
            1
        } else {
            0
        }
    };
    for _ in 0..twos {
        prefix.push(step(&mut r));
    }
    if r.is_zero() {
        return (FiniteWord(prefix), None);
    }
    let start = r.clone();
    let mut cycle = Vec::new();
    loop {
        cycle.push(step(&mut r));
        if r == start {
            break;
        }
    }
    (FiniteWord(prefix), Some(FiniteWord(cycle)))
}

/// The canonical expansion x̃ of `x`.
pub fn to_tilde(x: &UnitReal) -> Expansion {
    x.tilde().clone()
}

/// A finite word written as `head · root^reps · tail`, for words too long to
/// store symbol by symbol. Lengths are counted in `u128`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerWord {
    pub head: FiniteWord,
    pub root: FiniteWord,
    pub reps: u128,
    pub tail: FiniteWord,
}

impl PowerWord {
    pub fn finite(w: FiniteWord) -> Self {
        PowerWord {
            head: w,
            root: FiniteWord::empty(),
            reps: 0,
            tail: FiniteWord::empty(),
        }
    }

    /// The first `n` symbols of an eventually periodic word.
    pub fn prefix_of(w: &PeriodicWord, n: u128) -> Self {
        let p = w.prefix().len() as u128;
        if n <= p {
            return PowerWord::finite(w.prefix().prefix(n as usize));
        }
        let c = w.cycle().len() as u128;
        let rest = n - p;
        PowerWord {
            head: w.prefix().clone(),
            root: w.cycle().clone(),
            reps: rest / c,
            tail: w.cycle().prefix((rest % c) as usize),
        }
    }

    pub fn len(&self) -> u128 {
        self.head.len() as u128 + self.root.len() as u128 * self.reps + self.tail.len() as u128
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bit(&self, i: u128) -> u8 {
        let h = self.head.len() as u128;
        if i < h {
            return self.head.bit(i as usize);
        }
        let mid = self.root.len() as u128 * self.reps;
        if i < h + mid {
            return self.root.bit(((i - h) % self.root.len() as u128) as usize);
        }
        self.tail.bit((i - h - mid) as usize)
    }

    /// Expands the word; only for short words.
    pub fn to_finite(&self) -> FiniteWord {
        let n = usize::try_from(self.len()).expect("word too long to expand");
        FiniteWord((0..n as u128).map(|i| self.bit(i)).collect())
    }

    /// Rewrites so that |head| and |root| are multiples of `k`.
    pub fn aligned(&self, k: usize) -> PowerWord {
        let mut w = self.clone();
        if w.reps == 0 || w.root.is_empty() {
            return PowerWord::finite(w.to_finite_small());
        }
        let r = w.root.len();
        if r % k != 0 {
            let m = k / r.gcd(&k);
            let extra = (w.reps % m as u128) as usize;
            w.tail = w.root.repeat(extra).concat(&w.tail);
            w.root = w.root.repeat(m);
            w.reps /= m as u128;
            if w.reps == 0 {
                return PowerWord::finite(w.to_finite_small());
            }
        }
        let off = w.head.len() % k;
        if off != 0 {
            let j = k - off;
            let mut rotated = w.root.bits().to_vec();
            w.head = w.head.concat(&w.root.prefix(j));
            w.tail = w.root.suffix_from(j).concat(&w.tail);
            rotated.rotate_left(j);
            w.root = FiniteWord(rotated);
            w.reps -= 1;
            if w.reps == 0 {
                return PowerWord::finite(w.to_finite_small());
            }
        }
        w
    }

    fn to_finite_small(&self) -> FiniteWord {
        let mut out = self.head.clone();
        for _ in 0..self.reps {
            out.extend_from(&self.root);
        }
        out.extend_from(&self.tail);
        out
    }

    /// Exact equality as words, without expanding the periodic middle.
    pub fn same_word(&self, other: &PowerWord) -> bool {
        let n = self.len();
        if n != other.len() {
            return false;
        }
        let cuts = |w: &PowerWord| {
            let h = w.head.len() as u128;
            [h, h + w.root.len() as u128 * w.reps]
        };
        let mut points = vec![0u128, n];
        points.extend(cuts(self));
        points.extend(cuts(other));
        points.sort_unstable();
        points.dedup();
        for win in points.windows(2) {
            let (s, e) = (win[0], win[1]);
            if s >= e {
                continue;
            }
            let periods = [self.period_at(s, e), other.period_at(s, e)];
            let check = match periods {
                [Some(p), Some(q)] => (p + q).min(e - s),
                _ => e - s,
            };
            if (s..s + check).any(|i| self.bit(i) != other.bit(i)) {
                return false;
            }
        }
        true
    }

    /// The root length when [s, e) lies inside the periodic middle.
    fn period_at(&self, s: u128, e: u128) -> Option<u128> {
        let h = self.head.len() as u128;
        let end = h + self.root.len() as u128 * self.reps;
        (self.reps > 0 && s >= h && e <= end).then_some(self.root.len() as u128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FiniteWord {
        s.parse().unwrap()
    }

    fn pw(p: &str, c: &str) -> PeriodicWord {
        PeriodicWord::new(w(p), w(c))
    }

    #[test]
    fn tilde_examples() {
        let third = UnitReal::from_u64(1, 3).unwrap();
        assert_eq!(to_tilde(&third), Expansion::Word(pw("", "01")));
        let half = UnitReal::from_u64(1, 2).unwrap();
        assert_eq!(to_tilde(&half), Expansion::Word(pw("0", "1")));
        assert_eq!(to_tilde(&UnitReal::zero()), Expansion::Zero);
        assert_eq!(to_tilde(&UnitReal::one()), Expansion::Word(pw("", "1")));
    }

    #[test]
    fn canonical_form_absorbs_rotations() {
        let a = PeriodicWord::new(w("1101"), w("0101"));
        assert_eq!(a.prefix(), &w("1"));
        assert_eq!(a.cycle(), &w("10"));
        assert!(a.same_word(&PeriodicWord::raw(w("11"), w("01"))));
    }

    #[test]
    fn block_align_examples() {
        let a = pw("0", "1").block_align(2);
        assert_eq!(a.prefix(), &w("01"));
        assert_eq!(a.cycle(), &w("11"));
        let b = pw("", "01").block_align(2);
        assert_eq!((b.prefix(), b.cycle()), (&w(""), &w("01")));
        let raw = PeriodicWord::raw(w("1"), w("011"));
        let c = raw.block_align(2);
        assert_eq!(c.prefix(), &w("10"));
        assert_eq!(c.cycle().len(), 6);
        assert_eq!(c.take(12), raw.take(12));
        assert!(c.same_word(&raw));
    }

    #[test]
    fn k_factor_examples() {
        let p = |a: &str, b: &str| AnyWord::Periodic(pw(a, b));
        assert!(has_k_factor(&p("", "0001"), &w("01"), 2));
        assert!(!has_k_factor(&p("", "01"), &w("10"), 2));
        assert!(has_k_factor(&p("11", "00"), &w("00"), 2));
        assert!(has_k_factor(&AnyWord::Finite(w("1101")), &w("01"), 2));
        assert!(!has_k_factor(&AnyWord::Finite(w("1011")), &w("01"), 2));
    }

    #[test]
    fn roundings() {
        assert_eq!(k_roundings(&w("0"), 2), vec![w("00"), w("01")]);
        assert_eq!(k_roundings(&w("01"), 2), vec![w("01")]);
        assert_eq!(k_roundings(&w("1"), 3), vec![w("100"), w("101"), w("110"), w("111")]);
    }

    #[test]
    fn literals() {
        let x: UnitReal = "0b0.(01)".parse().unwrap();
        assert_eq!(x, UnitReal::from_u64(1, 3).unwrap());
        let y: UnitReal = "0b0.1(0)".parse().unwrap();
        assert_eq!(y.to_string(), "1/2");
        assert_eq!(y.binary(), "0b0.0(1)");
        assert_eq!("1".parse::<UnitReal>().unwrap(), UnitReal::one());
        assert!("3/2".parse::<UnitReal>().is_err());
        assert!("0b0.1()".parse::<UnitReal>().is_err());
    }

    #[test]
    fn ordering_uses_values() {
        let a = UnitReal::from_u64(1, 3).unwrap();
        let b = UnitReal::from_u64(1, 2).unwrap();
        assert!(a < b);
        assert!(UnitReal::zero() < a);
        assert!(b < UnitReal::one());
    }

    #[test]
    fn power_word_alignment_and_equality() {
        let base = pw("1", "011");
        let a = PowerWord::prefix_of(&base, 1000);
        let b = a.aligned(2);
        assert_eq!(b.head.len() % 2, 0);
        assert_eq!(b.root.len() % 2, 0);
        assert!(a.same_word(&b));
        assert_eq!(a.to_finite(), base.take(1000));
        let c = PowerWord::prefix_of(&pw("1", "011"), 999);
        assert!(!a.same_word(&c));
        let d = PowerWord::prefix_of(&pw("10", "110"), 1000);
        assert!(a.same_word(&d));
    }
}
