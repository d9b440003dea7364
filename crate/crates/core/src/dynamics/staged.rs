use serde::{Deserialize, Serialize};

use crate::words::{FiniteWord, PeriodicWord, PowerWord, UnitReal};

/// One verified property of a stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCheck {
    pub stage: usize,
    /// Number of applications of σ involved.
    pub time: usize,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stages {
    /// The stage words w^(0), w^(1), … themselves.
    Explicit(Vec<FiniteWord>),
    /// Stages cut from a known eventually periodic word at increasing lengths.
    Cuts { word: PeriodicWord, cuts: Vec<u128> },
    /// Stage i is Mⁱ(seed) for the morphism 0 ↦ images[0], 1 ↦ images[1].
    Morphic {
        seed: FiniteWord,
        images: [FiniteWord; 2],
        count: usize,
    },
}

fn apply_morphism(images: &[FiniteWord; 2], w: &FiniteWord) -> FiniteWord {
    let mut out = FiniteWord::empty();
    for &b in w.bits() {
        out.extend_from(&images[b as usize]);
    }
    out
}

/// Letter counts of Mⁱ(seed), saturating at u128::MAX.
fn morphic_counts(seed: &FiniteWord, images: &[FiniteWord; 2], i: usize) -> [u128; 2] {
    let count = |w: &FiniteWord| {
        let ones = w.bits().iter().filter(|&&b| b == 1).count() as u128;
        [w.len() as u128 - ones, ones]
    };
    let m = [count(&images[0]), count(&images[1])];
    let mut c = count(seed);
    for _ in 0..i {
        c = [
            c[0].saturating_mul(m[0][0]).saturating_add(c[1].saturating_mul(m[1][0])),
            c[0].saturating_mul(m[0][1]).saturating_add(c[1].saturating_mul(m[1][1])),
        ];
    }
    c
}

/// A point given by the first stages w^(0) w^(1) … of its expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedPoint {
    pub stages: Stages,
    pub checks: Vec<StageCheck>,
    /// Why production stopped before the requested stage count, if it did.
    pub exhausted: Option<String>,
}

impl StagedPoint {
    pub fn explicit(stages: Vec<FiniteWord>) -> Self {
        StagedPoint {
            stages: Stages::Explicit(stages),
            checks: Vec::new(),
            exhausted: None,
        }
    }

    pub fn stage_count(&self) -> usize {
        match &self.stages {
            Stages::Explicit(v) => v.len(),
            Stages::Cuts { cuts, .. } => cuts.len(),
            Stages::Morphic { count, .. } => *count,
        }
    }

    pub fn stage_len(&self, i: usize) -> u128 {
        match &self.stages {
            Stages::Explicit(v) => v[i].len() as u128,
            Stages::Cuts { cuts, .. } => cuts[i] - if i == 0 { 0 } else { cuts[i - 1] },
            Stages::Morphic { seed, images, .. } => {
                let [a, b] = morphic_counts(seed, images, i);
                a.saturating_add(b)
            }
        }
    }

    /// The first `n` symbols of the realized word, or fewer if the stages
    /// run out.
    pub fn prefix_bits(&self, n: usize) -> FiniteWord {
        match &self.stages {
            Stages::Cuts { word, cuts } => word.take(n.min(cuts.last().copied().unwrap_or(0) as usize)),
            Stages::Explicit(v) => {
                let mut out = FiniteWord::empty();
                for w in v {
                    if out.len() >= n {
                        break;
                    }
                    out.extend_from(w);
                }
                out.prefix(n.min(out.len()))
            }
            Stages::Morphic { seed, images, count } => {
                // Every image is nonempty, so n symbols of a stage only
                // need n symbols of the previous one.
                let mut out = FiniteWord::empty();
                let mut cur = seed.clone();
                for _ in 0..*count {
                    if out.len() >= n {
                        break;
                    }
                    out.extend_from(&cur);
                    cur = apply_morphism(images, &cur.prefix(n.min(cur.len())));
                }
                out.prefix(n.min(out.len()))
            }
        }
    }

    /// w^(0) … w^(n-1).
    pub fn realized_prefix(&self, n: usize) -> PowerWord {
        match &self.stages {
            Stages::Explicit(v) => {
                let mut out = FiniteWord::empty();
                for w in &v[..n] {
                    out.extend_from(w);
                }
                PowerWord::finite(out)
            }
            Stages::Cuts { word, cuts } => PowerWord::prefix_of(word, if n == 0 { 0 } else { cuts[n - 1] }),
            Stages::Morphic { seed, images, .. } => {
                let mut out = FiniteWord::empty();
                let mut cur = seed.clone();
                for _ in 0..n {
                    out.extend_from(&cur);
                    cur = apply_morphism(images, &cur);
                }
                PowerWord::finite(out)
            }
        }
    }

    /// All stages joined; only for explicit stages.
    pub fn realized_word(&self) -> Option<FiniteWord> {
        match &self.stages {
            Stages::Explicit(v) => {
                let mut out = FiniteWord::empty();
                for w in v {
                    out.extend_from(w);
                }
                Some(out)
            }
            Stages::Cuts { .. } | Stages::Morphic { .. } => None,
        }
    }

    /// The limit point when the construction produced a rational one.
    pub fn limit(&self) -> Option<UnitReal> {
        match &self.stages {
            Stages::Cuts { word, .. } => Some(UnitReal::from_expansion(word)),
            Stages::Explicit(_) | Stages::Morphic { .. } => None,
        }
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    /// One line per check: stage, time, status, detail.
    pub fn render_table(&self) -> String {
        let mut out = String::from("stage  length  time  verified  detail\n");
        for c in &self.checks {
            let len = if c.stage < self.stage_count() {
                self.stage_len(c.stage).to_string()
            } else {
                "-".into()
            };
            out.push_str(&format!(
                "{:>5}  {:>6}  {:>4}  {:>8}  {}\n",
                c.stage,
                len,
                c.time,
                if c.holds { "yes" } else { "NO" },
                c.detail
            ));
        }
        if let Some(why) = &self.exhausted {
            out.push_str(&format!("stopped: {why}\n"));
        }
        out
    }
}
