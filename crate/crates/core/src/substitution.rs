//! Erasing k-block substitutions: parsing, application and relative maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{FiniteWord, PeriodicWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: expected `k = <int>` before any block")]
    MissingHeader { line: usize },
    #[error("line {line}: block size must be an integer between 2 and 16")]
    BadK { line: usize },
    #[error("line {line}: malformed entry, expected `BLOCK -> IMAGE`")]
    Malformed { line: usize },
    #[error("line {line}: bad symbol {symbol:?}")]
    BadSymbol { line: usize, symbol: char },
    #[error("line {line}: block {block} does not have length {k}")]
    BadBlockLength { line: usize, block: String, k: usize },
    #[error("line {line}: block {block} listed twice")]
    DuplicateBlock { line: usize, block: String },
    #[error("block {block} is missing")]
    MissingBlock { block: String },
    #[error("no block is mapped to the empty word")]
    NoEmptyImage,
    #[error("blocks {first} and {second} are both mapped to the empty word")]
    MultipleEmptyImages { first: String, second: String },
    #[error("the erased block is 1^k")]
    ErasedBlockIsAllOnes,
    #[error("empty specification")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("exact relative images need an alternating substitution")]
    NotAlternatingRequired,
    #[error("stage {stage}: needed {needed} digits of v, only {available} left")]
    InsufficientInput {
        stage: usize,
        needed: usize,
        available: usize,
    },
}

/// σ restricted to position i of a block: the images of 0 and 1.
pub type SimpleMap = [FiniteWord; 2];

/// Position-indexed simple substitutions σ_1..σ_k reconstructing the table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingDecomposition {
    pub simple: Vec<SimpleMap>,
}

/// Why no decomposition exists: the block whose image disagrees with the
/// one forced by the erased block and its one-bit neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotAlternating {
    pub block: FiniteWord,
    pub image: FiniteWord,
    pub reconstructed: FiniteWord,
}

/// How a substitution is applied to words whose length is not a multiple of k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplyMode {
    /// Alternating application when a decomposition exists, else truncation.
    #[default]
    Auto,
    /// Block by block, dropping the trailing |w| mod k digits.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PeriodicImage {
    Infinite(PeriodicWord),
    /// The cycle was erased; only the image of the prefix remains.
    Stalled(FiniteWord),
}

/// σ_uⁿ(v) together with the digits of v used at each stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeImage {
    pub word: FiniteWord,
    /// Length of the k-extension u^(i) taken from the remaining input at
    /// stage i (strict mode only).
    pub consumed: Vec<usize>,
    /// Digits dropped by truncation at stage i (strict mode only).
    pub dropped: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Substitution {
    k: usize,
    images: Vec<FiniteWord>,
    eps_index: usize,
    alternating: Result<AlternatingDecomposition, NotAlternating>,
}

impl Substitution {
    /// Builds a substitution from its table, indexed lexicographically.
    pub fn from_table(k: usize, images: Vec<FiniteWord>) -> Result<Self, ParseError> {
        if !(2..=16).contains(&k) {
            return Err(ParseError::BadK { line: 0 });
        }
        assert_eq!(images.len(), 1 << k, "table must have 2^k entries");
        let empties: Vec<usize> = (0..images.len()).filter(|&i| images[i].is_empty()).collect();
        let eps_index = match empties.as_slice() {
            [] => return Err(ParseError::NoEmptyImage),
            [i] => *i,
            [a, b, ..] => {
                return Err(ParseError::MultipleEmptyImages {
                    first: FiniteWord::from_index(*a, k).to_string(),
                    second: FiniteWord::from_index(*b, k).to_string(),
                })
            }
        };
        if eps_index == images.len() - 1 {
            return Err(ParseError::ErasedBlockIsAllOnes);
        }
        let alternating = decompose(k, &images, eps_index);
        Ok(Substitution {
            k,
            images,
            eps_index,
            alternating,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut k: Option<usize> = None;
        let mut table: Vec<Option<(FiniteWord, usize)>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some(k) = k else {
                let value = line
                    .strip_prefix('k')
                    .and_then(|r| r.trim_start().strip_prefix('='))
                    .ok_or(ParseError::MissingHeader { line: line_no })?;
                let value: usize = value.trim().parse().map_err(|_| ParseError::BadK { line: line_no })?;
                if !(2..=16).contains(&value) {
                    return Err(ParseError::BadK { line: line_no });
                }
                k = Some(value);
                table = vec![None; 1 << value];
                continue;
            };
            let (block, image) = line.split_once("->").ok_or(ParseError::Malformed { line: line_no })?;
            let (block, image) = (block.trim(), image.trim());
            let block_w = parse_bits(block, line_no)?;
            if block_w.len() != k {
                return Err(ParseError::BadBlockLength {
                    line: line_no,
                    block: block.to_string(),
                    k,
                });
            }
            let image_w = if image == "-" {
                FiniteWord::empty()
            } else if image.is_empty() {
                return Err(ParseError::Malformed { line: line_no });
            } else {
                parse_bits(image, line_no)?
            };
            let slot = &mut table[block_w.to_index()];
            if slot.is_some() {
                return Err(ParseError::DuplicateBlock {
                    line: line_no,
                    block: block.to_string(),
                });
            }
            *slot = Some((image_w, line_no));
        }
        let k = k.ok_or(ParseError::Empty)?;
        let mut images = Vec::with_capacity(table.len());
        for (i, slot) in table.into_iter().enumerate() {
            match slot {
                Some((w, _)) => images.push(w),
                None => {
                    return Err(ParseError::MissingBlock {
                        block: FiniteWord::from_index(i, k).to_string(),
                    })
                }
            }
        }
        Substitution::from_table(k, images)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn images(&self) -> &[FiniteWord] {
        &self.images
    }

    pub fn image(&self, block: &FiniteWord) -> &FiniteWord {
        assert_eq!(block.len(), self.k);
        &self.images[block.to_index()]
    }

    pub fn eps_index(&self) -> usize {
        self.eps_index
    }

    /// The erased block w_ε.
    pub fn w_eps(&self) -> FiniteWord {
        FiniteWord::from_index(self.eps_index, self.k)
    }

    /// The distinct nonempty images, in lexicographic block order.
    pub fn nonempty_images(&self) -> Vec<FiniteWord> {
        let mut out: Vec<FiniteWord> = Vec::new();
        for w in &self.images {
            if !w.is_empty() && !out.contains(w) {
                out.push(w.clone());
            }
        }
        out
    }

    pub fn alternating_decomposition(&self) -> Result<&AlternatingDecomposition, &NotAlternating> {
        self.alternating.as_ref()
    }

    pub fn is_alternating(&self) -> bool {
        self.alternating.is_ok()
    }

    /// Block-by-block image of the first k⌊|w|/k⌋ symbols.
    pub fn apply_strict(&self, w: &FiniteWord) -> FiniteWord {
        let mut out = Vec::new();
        for block in w.bits().chunks_exact(self.k) {
            let idx = block.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
            out.extend_from_slice(self.images[idx].bits());
        }
        FiniteWord::new(out)
    }

    /// Alternating image of `w` read from position `phase` of a block.
    /// `None` when the substitution is not alternating.
    pub fn apply_alternating(&self, w: &FiniteWord, phase: usize) -> Option<FiniteWord> {
        let d = self.alternating.as_ref().ok()?;
        let mut out = Vec::new();
        for (j, &b) in w.bits().iter().enumerate() {
            out.extend_from_slice(d.simple[(phase + j) % self.k][b as usize].bits());
        }
        Some(FiniteWord::new(out))
    }

    pub fn apply(&self, w: &FiniteWord, mode: ApplyMode) -> FiniteWord {
        match mode {
            ApplyMode::Auto if self.is_alternating() => self.apply_alternating(w, 0).unwrap(),
            _ => self.apply_strict(w),
        }
    }

    /// σ(w) in the default mode.
    pub fn apply_finite(&self, w: &FiniteWord) -> FiniteWord {
        self.apply(w, ApplyMode::Auto)
    }

    /// σⁿ(w) in the given mode.
    pub fn iterate(&self, w: &FiniteWord, n: usize, mode: ApplyMode) -> FiniteWord {
        let mut cur = w.clone();
        for _ in 0..n {
            if cur.is_empty() {
                break;
            }
            cur = self.apply(&cur, mode);
        }
        cur
    }

    pub fn apply_periodic(&self, w: &PeriodicWord) -> PeriodicImage {
        let aligned = w.block_align(self.k);
        let head = self.apply_strict(aligned.prefix());
        let cycle = self.apply_strict(aligned.cycle());
        if cycle.is_empty() {
            PeriodicImage::Stalled(head)
        } else {
            PeriodicImage::Infinite(PeriodicWord::new(head, cycle))
        }
    }

    /// σ_uⁿ(v): exact for alternating substitutions in `Auto` mode, by the
    /// staged k-extension rule with truncation otherwise.
    pub fn relative_image(
        &self,
        u: &FiniteWord,
        n: usize,
        v: &FiniteWord,
        mode: ApplyMode,
    ) -> Result<RelativeImage, SubstError> {
        if mode == ApplyMode::Auto && self.is_alternating() {
            let mut pu = u.clone();
            let mut pv = v.clone();
            for _ in 0..n {
                let phase = pu.len() % self.k;
                let next_u = self.apply_alternating(&pu, 0).unwrap();
                pv = self.apply_alternating(&pv, phase).unwrap();
                pu = next_u;
            }
            return Ok(RelativeImage {
                word: pv,
                consumed: Vec::new(),
                dropped: Vec::new(),
            });
        }
        let mut p = u.clone();
        let mut rest = v.clone();
        let mut consumed = Vec::with_capacity(n);
        let mut dropped = Vec::with_capacity(n);
        for stage in 1..=n {
            let need = (self.k - p.len() % self.k) % self.k;
            if rest.len() < need {
                return Err(SubstError::InsufficientInput {
                    stage,
                    needed: need,
                    available: rest.len(),
                });
            }
            let ext = rest.prefix(need);
            let tail = rest.suffix_from(need);
            p = self.apply_strict(&p.concat(&ext));
            consumed.push(need);
            dropped.push(tail.len() % self.k);
            rest = self.apply_strict(&tail);
        }
        Ok(RelativeImage {
            word: rest,
            consumed,
            dropped,
        })
    }

    /// The specification file text for this substitution.
    pub fn to_spec_text(&self) -> String {
        let mut s = format!("k = {}\n", self.k);
        for (i, img) in self.images.iter().enumerate() {
            let img = if img.is_empty() { "-".to_string() } else { img.to_string() };
            s.push_str(&format!("{} -> {}\n", FiniteWord::from_index(i, self.k), img));
        }
        s
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Substitution(k={}, w_eps={})", self.k, self.w_eps())
    }
}

impl FromStr for Substitution {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Substitution::parse(s)
    }
}

fn parse_bits(s: &str, line: usize) -> Result<FiniteWord, ParseError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(ParseError::BadSymbol { line, symbol: other }),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(FiniteWord::new)
}

/// The decomposition is forced: σ_i((w_ε)_i) = ε, and the image of w_ε with
/// bit i flipped is σ_i of the flipped bit. All other blocks must agree.
fn decompose(
    k: usize,
    images: &[FiniteWord],
    eps_index: usize,
) -> Result<AlternatingDecomposition, NotAlternating> {
    let eps = FiniteWord::from_index(eps_index, k);
    let simple: Vec<SimpleMap> = (0..k)
        .map(|i| {
            let b = eps.bit(i);
            let flipped = eps_index ^ (1 << (k - 1 - i));
            let mut m: SimpleMap = [FiniteWord::empty(), FiniteWord::empty()];
            m[1 - b as usize] = images[flipped].clone();
            m
        })
        .collect();
    for (idx, image) in images.iter().enumerate() {
        let block = FiniteWord::from_index(idx, k);
        let mut rec = FiniteWord::empty();
        for i in 0..k {
            rec.extend_from(&simple[i][block.bit(i) as usize]);
        }
        if rec != *image {
            return Err(NotAlternating {
                block,
                image: image.clone(),
                reconstructed: rec,
            });
        }
    }
    Ok(AlternatingDecomposition { simple })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn w(s: &str) -> FiniteWord {
        s.parse().unwrap()
    }

    #[test]
    fn parses_catalog() {
        let s3 = catalog::sigma3();
        assert_eq!(s3.k(), 2);
        assert_eq!(s3.w_eps(), w("00"));
        let s4 = catalog::sigma4();
        assert_eq!(s4.image(&w("111")), &w("010001000"));
        assert_eq!(s4.w_eps(), w("000"));
    }

    #[test]
    fn parse_errors() {
        let two_empty = "k = 2\n00 -> -\n01 -> -\n10 -> 0\n11 -> 1\n";
        assert!(matches!(
            Substitution::parse(two_empty),
            Err(ParseError::MultipleEmptyImages { .. })
        ));
        let missing = "k = 2\n00 -> -\n01 -> 1\n10 -> 0\n";
        assert_eq!(
            Substitution::parse(missing),
            Err(ParseError::MissingBlock { block: "11".into() })
        );
        let dup = "k = 2\n00 -> -\n00 -> 1\n";
        assert_eq!(
            Substitution::parse(dup),
            Err(ParseError::DuplicateBlock { line: 3, block: "00".into() })
        );
        let ones = "k = 2\n00 -> 1\n01 -> 1\n10 -> 0\n11 -> -\n";
        assert_eq!(Substitution::parse(ones), Err(ParseError::ErasedBlockIsAllOnes));
        let none = "k = 2\n00 -> 1\n01 -> 1\n10 -> 0\n11 -> 0\n";
        assert_eq!(Substitution::parse(none), Err(ParseError::NoEmptyImage));
        let bad = "k = 2\n00 -> -\n01 -> 2\n";
        assert_eq!(
            Substitution::parse(bad),
            Err(ParseError::BadSymbol { line: 3, symbol: '2' })
        );
    }

    #[test]
    fn application_examples() {
        let s3 = catalog::sigma3();
        assert_eq!(s3.apply_strict(&w("1101")), w("011"));
        assert_eq!(s3.apply_finite(&w("111")), w("010"));
        assert_eq!(s3.apply_finite(&FiniteWord::empty()), FiniteWord::empty());
    }

    #[test]
    fn periodic_examples() {
        let s3 = catalog::sigma3();
        let img = s3.apply_periodic(&PeriodicWord::new(w("01"), w("11")));
        assert_eq!(img, PeriodicImage::Infinite(PeriodicWord::new(w("1"), w("01"))));
        let img = s3.apply_periodic(&PeriodicWord::pure(w("10")));
        assert_eq!(img, PeriodicImage::Infinite(PeriodicWord::pure(w("0"))));
        let s2 = catalog::sigma2();
        let img = s2.apply_periodic(&PeriodicWord::pure(w("01")));
        assert_eq!(img, PeriodicImage::Stalled(FiniteWord::empty()));
    }

    #[test]
    fn decompositions() {
        let d = catalog::sigma3();
        let d = d.alternating_decomposition().unwrap();
        assert_eq!(d.simple[0], [FiniteWord::empty(), w("0")]);
        assert_eq!(d.simple[1], [FiniteWord::empty(), w("1")]);
        assert!(!catalog::sigma2().is_alternating());
        assert!(!catalog::sigma1().is_alternating());
        let s4 = catalog::sigma4();
        let d = s4.alternating_decomposition().unwrap();
        assert_eq!(d.simple[0][1], w("010"));
        assert_eq!(d.simple[1][1], w("001"));
        assert_eq!(d.simple[2][1], w("000"));
    }

    #[test]
    fn relative_examples() {
        let s3 = catalog::sigma3();
        let r = s3.relative_image(&w("1"), 1, &w("1"), ApplyMode::Auto).unwrap();
        assert_eq!(r.word, w("1"));
        let r = s3.relative_image(&w("11"), 2, &w("11"), ApplyMode::Auto).unwrap();
        assert_eq!(r.word, w("1"));
        let v = w("0110");
        let r = s3.relative_image(&FiniteWord::empty(), 1, &v, ApplyMode::Auto).unwrap();
        assert_eq!(r.word, s3.apply_finite(&v));
    }

    #[test]
    fn strict_relative_reports_bookkeeping() {
        let s2 = catalog::sigma2();
        let r = s2.relative_image(&w("1"), 1, &w("0110"), ApplyMode::Auto).unwrap();
        // u·u^(1) = 10, rest 110: one digit dropped.
        assert_eq!(r.consumed, vec![1]);
        assert_eq!(r.dropped, vec![1]);
        assert_eq!(r.word, w("0"));
        let err = s2.relative_image(&w("1"), 3, &w("0"), ApplyMode::Auto).unwrap_err();
        assert!(matches!(err, SubstError::InsufficientInput { stage: 2, .. }));
    }
}
