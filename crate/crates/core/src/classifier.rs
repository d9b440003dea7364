//! Position of a substitution in the erasing hierarchy, and the optimality
//! condition, as tri-state verdicts with certificates.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::substitution::{NotAlternating, Substitution};
use crate::words::{k_extensions, FiniteWord};

/// Search limits shared by the budgeted checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Longest input word examined.
    pub max_len: usize,
    /// Longest chain of applications.
    pub max_steps: usize,
    /// Longest intermediate word.
    pub max_inter: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_len: 12,
            max_steps: 64,
            max_inter: 4096,
        }
    }
}

/// Subset construction over the proper prefixes of the nonempty images:
/// a state is the set of partial image prefixes still alive after reading
/// a word, with ε marking a completed image.
#[derive(Debug, Clone)]
pub struct FactorizationAutomaton {
    prefixes: Vec<FiniteWord>,
    images: Vec<FiniteWord>,
    index: HashMap<FiniteWord, usize>,
}

pub type StateSet = Vec<usize>;

impl FactorizationAutomaton {
    pub fn new(images: &[FiniteWord]) -> Self {
        let mut prefixes = vec![FiniteWord::empty()];
        let mut index = HashMap::new();
        index.insert(FiniteWord::empty(), 0);
        for img in images.iter().filter(|w| !w.is_empty()) {
            for n in 1..img.len() {
                let p = img.prefix(n);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), prefixes.len());
                    prefixes.push(p);
                }
            }
        }
        FactorizationAutomaton {
            prefixes,
            images: images.iter().filter(|w| !w.is_empty()).cloned().collect(),
            index,
        }
    }

    pub fn for_substitution(s: &Substitution) -> Self {
        Self::new(&s.nonempty_images())
    }

    pub fn initial(&self) -> StateSet {
        vec![0]
    }

    pub fn prefix(&self, i: usize) -> &FiniteWord {
        &self.prefixes[i]
    }

    pub fn step(&self, state: &[usize], b: u8) -> StateSet {
        let mut out = Vec::new();
        for &i in state {
            let mut pb = self.prefixes[i].clone();
            pb.push(b);
            if let Some(&j) = self.index.get(&pb) {
                out.push(j);
            }
            if self.images.contains(&pb) {
                out.push(0);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn run(&self, w: &FiniteWord) -> StateSet {
        let mut s = self.initial();
        for &b in w.bits() {
            s = self.step(&s, b);
            if s.is_empty() {
                break;
            }
        }
        s
    }

    /// BFS over reachable states. Returns the state count, or the shortest
    /// word (lexicographically least among those) whose survivor set is empty.
    pub fn explore(&self) -> Result<usize, FiniteWord> {
        let start = self.initial();
        let mut seen: HashMap<StateSet, FiniteWord> = HashMap::new();
        seen.insert(start.clone(), FiniteWord::empty());
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            let w = seen[&s].clone();
            for b in 0..2u8 {
                let t = self.step(&s, b);
                let mut tw = w.clone();
                tw.push(b);
                if t.is_empty() {
                    return Err(tw);
                }
                if !seen.contains_key(&t) {
                    seen.insert(t.clone(), tw);
                    queue.push_back(t);
                }
            }
        }
        Ok(seen.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Every reachable survivor set is nonempty.
    TotalAutomaton { states: usize },
    /// No concatenation of nonempty images begins with this word.
    EmptySurvivors { word: FiniteWord },
    /// Deterministic cycles avoiding ε; each is listed from its least word.
    DeterministicCycles { cycles: Vec<Vec<FiniteWord>> },
    /// All chains from `word` were explored without reaching ε.
    ClosedSearch { word: FiniteWord, explored: usize },
    /// Every word up to `max_len` reaches ε by some chain of roundings.
    ErasingChains {
        max_len: usize,
        longest: usize,
        worst: FiniteWord,
    },
    NotAlternating(NotAlternating),
    /// σ_i((w_ε)_i) ≠ ε.
    EpsilonPositionNotErased { position: usize },
    /// The orbit of `word` returns to `repeated` after `period` steps.
    Divergence {
        word: FiniteWord,
        repeated: FiniteWord,
        period: usize,
    },
    /// Every word up to `max_len` vanishes, at most after `max_order` steps.
    AllVanish {
        max_len: usize,
        max_order: usize,
        worst: FiniteWord,
    },
    /// Acyclic block graph whose only sink is w_ε.
    BlockDag {
        edges: Vec<(FiniteWord, Vec<FiniteWord>)>,
        longest_path: usize,
        bound: usize,
    },
    /// Orders of 1^len for increasing len.
    GrowingFamily { family: Vec<(usize, usize)> },
    /// Follows from another verdict of the same report.
    Implied { by: String },
}

impl Evidence {
    pub fn summary(&self) -> String {
        match self {
            Evidence::TotalAutomaton { states } => format!("total automaton, {states} states"),
            Evidence::EmptySurvivors { word } => format!("witness: {word}"),
            Evidence::DeterministicCycles { cycles } => {
                let parts: Vec<String> = cycles
                    .iter()
                    .map(|c| {
                        let mut s: Vec<String> = c.iter().map(|w| w.to_string()).collect();
                        s.push(c[0].to_string());
                        s.join(" -> ")
                    })
                    .collect();
                format!("cycle: {}", parts.join("; "))
            }
            Evidence::ClosedSearch { word, explored } => {
                format!("no chain from {word} reaches ε ({explored} words explored)")
            }
            Evidence::ErasingChains { max_len, longest, worst } => {
                format!("erasing chains for |w| <= {max_len}, longest {longest} (w = {worst})")
            }
            Evidence::NotAlternating(n) => format!(
                "not alternating: block {} has image {}, decomposition gives {}",
                n.block, n.image, n.reconstructed
            ),
            Evidence::EpsilonPositionNotErased { position } => {
                format!("position {position} of w_ε is not erased")
            }
            Evidence::Divergence { word, repeated, period } => {
                format!("{word} enters a cycle of length {period} at {repeated}")
            }
            Evidence::AllVanish { max_len, max_order, worst } => {
                format!("all |w| <= {max_len} vanish, max order {max_order} (w = {worst})")
            }
            Evidence::BlockDag { longest_path, bound, .. } => {
                format!("block DAG, longest path {longest_path}, ε(w) <= {bound}")
            }
            Evidence::GrowingFamily { family } => {
                let parts: Vec<String> = family.iter().map(|(n, e)| format!("ε(1^{n})={e}")).collect();
                format!("heuristic: {}", parts.join(", "))
            }
            Evidence::Implied { by } => format!("implied by {by}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Yes { evidence: Evidence },
    /// Verified for every word up to `up_to` symbols only.
    YesBounded { up_to: usize, evidence: Evidence },
    No { evidence: Evidence },
    /// Supported by a growing family; not a proof.
    NoEmpirical { evidence: Evidence },
    Unknown { budget: Budget },
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, Verdict::Yes { .. } | Verdict::YesBounded { .. })
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No { .. })
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Verdict::No { .. } | Verdict::NoEmpirical { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Verdict::Yes { .. } => "Yes".into(),
            Verdict::YesBounded { up_to, .. } => format!("YesBounded({up_to})"),
            Verdict::No { .. } => "No".into(),
            Verdict::NoEmpirical { .. } => "NoEmpirical".into(),
            Verdict::Unknown { .. } => "Unknown".into(),
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Verdict::Yes { evidence }
            | Verdict::YesBounded { evidence, .. }
            | Verdict::No { evidence }
            | Verdict::NoEmpirical { evidence } => evidence.summary(),
            Verdict::Unknown { budget } => format!(
                "budget L={}, steps={}, inter={}",
                budget.max_len, budget.max_steps, budget.max_inter
            ),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.summary())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("{stronger} is positive but {weaker} is not")]
    NotMonotone {
        stronger: &'static str,
        weaker: &'static str,
    },
    #[error("boundedly erasing substitutions cannot satisfy the optimality condition")]
    BoundedWithOptimality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawReport")]
pub struct ClassificationReport {
    oc: Verdict,
    strongly: Verdict,
    completely: Verdict,
    boundedly: Verdict,
}

#[derive(Deserialize)]
struct RawReport {
    oc: Verdict,
    strongly: Verdict,
    completely: Verdict,
    boundedly: Verdict,
}

impl TryFrom<RawReport> for ClassificationReport {
    type Error = ReportError;

    fn try_from(r: RawReport) -> Result<Self, Self::Error> {
        ClassificationReport::new(r.oc, r.strongly, r.completely, r.boundedly)
    }
}

impl ClassificationReport {
    pub fn new(
        oc: Verdict,
        strongly: Verdict,
        completely: Verdict,
        boundedly: Verdict,
    ) -> Result<Self, ReportError> {
        if boundedly.is_positive() && !completely.is_positive() {
            return Err(ReportError::NotMonotone {
                stronger: "boundedly",
                weaker: "completely",
            });
        }
        if completely.is_positive() && !strongly.is_positive() {
            return Err(ReportError::NotMonotone {
                stronger: "completely",
                weaker: "strongly",
            });
        }
        if boundedly.is_positive() && !oc.is_no() {
            return Err(ReportError::BoundedWithOptimality);
        }
        Ok(ClassificationReport {
            oc,
            strongly,
            completely,
            boundedly,
        })
    }

    pub fn oc(&self) -> &Verdict {
        &self.oc
    }

    pub fn strongly(&self) -> &Verdict {
        &self.strongly
    }

    pub fn completely(&self) -> &Verdict {
        &self.completely
    }

    pub fn boundedly(&self) -> &Verdict {
        &self.boundedly
    }

    /// One `key: verdict (summary)` line per check.
    pub fn render_lines(&self) -> String {
        [
            ("oc", &self.oc),
            ("strongly", &self.strongly),
            ("completely", &self.completely),
            ("boundedly", &self.boundedly),
        ]
        .iter()
        .map(|(k, v)| format!("{k}: {v}\n"))
        .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn check_optimality(s: &Substitution) -> Verdict {
    match FactorizationAutomaton::for_substitution(s).explore() {
        Ok(states) => Verdict::Yes {
            evidence: Evidence::TotalAutomaton { states },
        },
        Err(word) => Verdict::No {
            evidence: Evidence::EmptySurvivors { word },
        },
    }
}

/// Outcome of iterating an alternating substitution on one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Vanishing {
    Order(usize),
    Diverged { repeated: FiniteWord, period: usize },
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("the substitution is not alternating")]
    NotAlternatingRequired,
}

/// ε(w): the least n ≥ 1 with σⁿ(w) = ε (so ε(ε) = 1).
pub fn vanishing_order(s: &Substitution, w: &FiniteWord, budget: &Budget) -> Result<Vanishing, ClassifyError> {
    if !s.is_alternating() {
        return Err(ClassifyError::NotAlternatingRequired);
    }
    let mut seen: HashMap<FiniteWord, usize> = HashMap::new();
    let mut cur = w.clone();
    for n in 1..=budget.max_steps {
        if !cur.is_empty() {
            if let Some(&at) = seen.get(&cur) {
                return Ok(Vanishing::Diverged {
                    repeated: cur,
                    period: n - 1 - at,
                });
            }
            seen.insert(cur.clone(), n - 1);
        }
        cur = s.apply_alternating(&cur, 0).unwrap();
        if cur.is_empty() {
            return Ok(Vanishing::Order(n));
        }
        if cur.len() > budget.max_inter {
            return Ok(Vanishing::BudgetExceeded);
        }
    }
    Ok(Vanishing::BudgetExceeded)
}

/// Deterministic cycles: words of length divisible by k whose iterates keep
/// that property and recur without reaching ε. Only cycles through the
/// shortest such words are listed.
pub fn deterministic_cycles(s: &Substitution, budget: &Budget) -> Vec<Vec<FiniteWord>> {
    let k = s.k();
    let mut found: Vec<Vec<FiniteWord>> = Vec::new();
    let mut known: HashSet<FiniteWord> = HashSet::new();
    for len in (k..=budget.max_len).step_by(k) {
        if !found.is_empty() {
            break;
        }
        for w in FiniteWord::all_of_length(len) {
            let mut path: Vec<FiniteWord> = Vec::new();
            let mut pos: HashMap<FiniteWord, usize> = HashMap::new();
            let mut cur = w;
            for _ in 0..=budget.max_steps {
                if cur.is_empty() || cur.len() % k != 0 || cur.len() > budget.max_inter || known.contains(&cur) {
                    break;
                }
                if let Some(&i) = pos.get(&cur) {
                    let mut cycle = path[i..].to_vec();
                    let least = (0..cycle.len()).min_by_key(|&j| &cycle[j]).unwrap();
                    cycle.rotate_left(least);
                    known.extend(cycle.iter().cloned());
                    found.push(cycle);
                    break;
                }
                pos.insert(cur.clone(), path.len());
                path.push(cur.clone());
                cur = s.apply_strict(&cur);
            }
        }
    }
    found.sort();
    found
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainSearch {
    /// k-extensions e_0..e_{n-1}: w_0 = w, w_{j+1} = σ(w_j e_j), w_n = ε.
    Found(Vec<FiniteWord>),
    /// Every reachable word was explored.
    Closed { explored: usize },
    Budget,
}

/// Breadth-first search for a chain of k-roundings erasing `w`, trying
/// extensions in lexicographic order.
pub fn erasing_chain(s: &Substitution, w: &FiniteWord, budget: &Budget) -> ChainSearch {
    let mut parent: HashMap<FiniteWord, (FiniteWord, FiniteWord)> = HashMap::new();
    let mut depth: HashMap<FiniteWord, usize> = HashMap::new();
    depth.insert(w.clone(), 0);
    let mut queue = VecDeque::from([w.clone()]);
    let mut truncated = false;
    let goal = FiniteWord::empty();
    while let Some(cur) = queue.pop_front() {
        let d = depth[&cur];
        if d >= budget.max_steps {
            truncated = true;
            continue;
        }
        for e in k_extensions(&cur, s.k()) {
            let next = s.apply_strict(&cur.concat(&e));
            if next == goal {
                let mut chain = vec![e];
                let mut at = cur.clone();
                while let Some((prev, ext)) = parent.get(&at) {
                    chain.push(ext.clone());
                    at = prev.clone();
                }
                chain.reverse();
                return ChainSearch::Found(chain);
            }
            if next.len() > budget.max_inter {
                truncated = true;
                continue;
            }
            if !depth.contains_key(&next) {
                depth.insert(next.clone(), d + 1);
                parent.insert(next.clone(), (cur.clone(), e.clone()));
                queue.push_back(next);
            }
        }
    }
    if truncated {
        ChainSearch::Budget
    } else {
        ChainSearch::Closed { explored: depth.len() }
    }
}

pub fn check_strongly_erasing(s: &Substitution, budget: &Budget, exec: Exec) -> Verdict {
    let cycles = deterministic_cycles(s, budget);
    if !cycles.is_empty() {
        return Verdict::No {
            evidence: Evidence::DeterministicCycles { cycles },
        };
    }
    let words: Vec<FiniteWord> = FiniteWord::all_up_to(budget.max_len).collect();
    let results = exec.map(words, |w| {
        let r = erasing_chain(s, &w, budget);
        (w, r)
    });
    let mut longest = 0;
    let mut worst = FiniteWord::empty();
    let mut unknown = false;
    for (w, r) in results {
        match r {
            ChainSearch::Found(chain) => {
                if chain.len() > longest {
                    longest = chain.len();
                    worst = w;
                }
            }
            ChainSearch::Closed { explored } => {
                return Verdict::No {
                    evidence: Evidence::ClosedSearch { word: w, explored },
                }
            }
            ChainSearch::Budget => unknown = true,
        }
    }
    if unknown {
        return Verdict::Unknown { budget: *budget };
    }
    Verdict::Yes {
        evidence: Evidence::ErasingChains {
            max_len: budget.max_len,
            longest,
            worst,
        },
    }
}

/// Scan of ε over all words up to `max_len`.
pub fn check_completely_erasing(s: &Substitution, budget: &Budget, exec: Exec) -> Verdict {
    let d = match s.alternating_decomposition() {
        Ok(d) => d,
        Err(n) => {
            return Verdict::No {
                evidence: Evidence::NotAlternating(n.clone()),
            }
        }
    };
    let eps = s.w_eps();
    if let Some(position) = (0..s.k()).find(|&i| !d.simple[i][eps.bit(i) as usize].is_empty()) {
        return Verdict::No {
            evidence: Evidence::EpsilonPositionNotErased { position },
        };
    }
    let words: Vec<FiniteWord> = FiniteWord::all_up_to(budget.max_len).collect();
    let results = exec.map(words, |w| {
        let v = vanishing_order(s, &w, budget).unwrap();
        (w, v)
    });
    let mut max_order = 0;
    let mut worst = FiniteWord::empty();
    let mut unknown = false;
    for (w, v) in results {
        match v {
            Vanishing::Order(n) => {
                if n > max_order {
                    max_order = n;
                    worst = w;
                }
            }
            Vanishing::Diverged { repeated, period } => {
                return Verdict::No {
                    evidence: Evidence::Divergence {
                        word: w,
                        repeated,
                        period,
                    },
                }
            }
            Vanishing::BudgetExceeded => unknown = true,
        }
    }
    if unknown {
        return Verdict::Unknown { budget: *budget };
    }
    Verdict::YesBounded {
        up_to: budget.max_len,
        evidence: Evidence::AllVanish {
            max_len: budget.max_len,
            max_order,
            worst,
        },
    }
}

/// The block graph certificate, if it applies.
pub fn block_dag(s: &Substitution) -> Option<Evidence> {
    let k = s.k();
    s.alternating_decomposition().ok()?;
    if s.images().iter().any(|w| w.len() % k != 0) {
        return None;
    }
    let n = s.images().len();
    let children: Vec<Vec<usize>> = s
        .images()
        .iter()
        .map(|img| {
            let mut c: Vec<usize> = img
                .bits()
                .chunks(k)
                .map(|b| b.iter().fold(0usize, |a, &x| (a << 1) | x as usize))
                .collect();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    // Longest path lengths by memoised DFS; a grey node means a cycle.
    let mut state = vec![0u8; n];
    let mut longest = vec![0usize; n];
    fn visit(v: usize, ch: &[Vec<usize>], state: &mut [u8], longest: &mut [usize]) -> bool {
        match state[v] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        state[v] = 1;
        let mut best = 0;
        for &c in &ch[v] {
            if !visit(c, ch, state, longest) {
                return false;
            }
            best = best.max(longest[c] + 1);
        }
        state[v] = 2;
        longest[v] = best;
        true
    }
    for v in 0..n {
        if !visit(v, &children, &mut state, &mut longest) {
            return None;
        }
    }
    let longest_path = *longest.iter().max().unwrap();
    let edges = children
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_empty())
        .map(|(i, c)| {
            (
                FiniteWord::from_index(i, k),
                c.iter().map(|&j| FiniteWord::from_index(j, k)).collect(),
            )
        })
        .collect();
    Some(Evidence::BlockDag {
        edges,
        longest_path,
        bound: longest_path + 1,
    })
}

/// Orders of 1^{k·2^j} while within budget, and whether they strictly grow.
fn growing_family(s: &Substitution, budget: &Budget) -> Option<Vec<(usize, usize)>> {
    let mut family = Vec::new();
    let mut len = s.k();
    while len <= budget.max_inter {
        match vanishing_order(s, &FiniteWord::ones(len), budget).ok()? {
            Vanishing::Order(e) => family.push((len, e)),
            _ => break,
        }
        len *= 2;
    }
    let growing = family.len() >= 4 && family.windows(2).all(|p| p[1].1 > p[0].1);
    growing.then_some(family)
}

pub fn check_boundedly_erasing(s: &Substitution, budget: &Budget, completely: &Verdict) -> Verdict {
    if let Some(evidence) = block_dag(s) {
        return Verdict::Yes { evidence };
    }
    if completely.is_no() {
        return Verdict::No {
            evidence: Evidence::Implied {
                by: "completely: No".into(),
            },
        };
    }
    match growing_family(s, budget) {
        Some(family) => Verdict::NoEmpirical {
            evidence: Evidence::GrowingFamily { family },
        },
        None => Verdict::Unknown { budget: *budget },
    }
}

pub fn classify(s: &Substitution, budget: &Budget, exec: Exec) -> ClassificationReport {
    let oc = check_optimality(s);
    let completely0 = check_completely_erasing(s, budget, exec);
    let boundedly = check_boundedly_erasing(s, budget, &completely0);
    let (strongly, completely) = if boundedly.is_yes() {
        let by = Evidence::Implied {
            by: "boundedly: Yes".into(),
        };
        (
            Verdict::Yes { evidence: by.clone() },
            Verdict::Yes { evidence: by },
        )
    } else {
        (check_strongly_erasing(s, budget, exec), completely0)
    };
    ClassificationReport::new(oc, strongly, completely, boundedly).expect("checks are mutually consistent")
}
