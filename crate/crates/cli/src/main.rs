use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use serde_json::{json, Value};

use erasing_dyn::catalog;
use erasing_dyn::classifier::{classify, Budget};
use erasing_dyn::dynamics::{
    dense_orbit_point, eval_f, fiber_samples, iterate_f, membership, mixing_witness, orbit, periodic_point,
    preimage_point, scrambled_pair, sensitivity_witness, PairEventKind, StagedPoint,
};
use erasing_dyn::entropy::{entropy_lower_bound, local_entropy_bound, separated_family, PairCheck};
use erasing_dyn::oracle::{derived_constants, render_constants};
use erasing_dyn::substitution::PeriodicImage;
use erasing_dyn::words::Expansion;
use erasing_dyn::{Exec, FiniteWord, PeriodicWord, Substitution, UnitReal};

#[derive(Parser)]
#[command(name = "erasing-dyn", version, about = "Erasing block substitutions and their interval maps")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Worker threads for exhaustive scans; 1 runs sequentially, 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Structured (JSON) output.
    #[arg(long, global = true)]
    json: bool,
    /// Longest word examined by budgeted checks.
    #[arg(long, global = true, env = "ERASING_DYN_BUDGET_L", default_value_t = 12)]
    max_len: usize,
    /// Longest chain of applications in budgeted checks.
    #[arg(long, global = true, default_value_t = 64)]
    max_steps: usize,
    /// Longest intermediate word in budgeted checks.
    #[arg(long, global = true, default_value_t = 4096)]
    max_inter: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Place a substitution in the erasing hierarchy.
    Classify { file: PathBuf },
    /// Evaluate f at a rational point.
    Eval { file: PathBuf, x: String },
    /// The first n iterates of a point.
    Orbit {
        file: PathBuf,
        x: String,
        #[arg(short, default_value_t = 8)]
        n: usize,
    },
    /// A preimage of a rational point.
    Preimage { file: PathBuf, y: String },
    /// A periodic point in the cylinder [u0].
    Periodic {
        file: PathBuf,
        u0: String,
        #[arg(long, default_value_t = 20)]
        stages: usize,
        /// Largest explicitly checked prefix.
        #[arg(long, default_value_t = 1 << 20)]
        max_bits: usize,
    },
    /// A point whose orbit visits each target cylinder in turn.
    Dense {
        file: PathBuf,
        /// Target words; all words of length 1 and 2 when omitted.
        targets: Vec<String>,
    },
    /// A nearby point whose orbit separates by at least 1/2.
    Sensitivity {
        file: PathBuf,
        x: String,
        /// δ = 2^-delta_bits.
        #[arg(long, default_value_t = 24)]
        delta_bits: usize,
    },
    /// A point of [w] mapped exactly onto y.
    Mixing { file: PathBuf, w: String, y: String },
    /// Distinct preimages of y.
    Fiber {
        file: PathBuf,
        y: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Entropy lower bound from F(k).
    Entropy {
        file: PathBuf,
        #[arg(short, default_value_t = 2)]
        k: usize,
        /// Localize the bound to the cylinder [w].
        #[arg(long)]
        at: Option<String>,
    },
    /// A separated family for d_{n·F(k)}.
    Separated {
        file: PathBuf,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[arg(short, default_value_t = 1)]
        n: usize,
        /// One line per point instead of the summary.
        #[arg(long)]
        export: bool,
    },
    /// Two staged points with alternating proximity and separation.
    Scrambled {
        file: PathBuf,
        #[arg(long, default_value = "(10)")]
        alpha: String,
        #[arg(long, default_value = "(01)")]
        beta: String,
        /// Targets are the prefixes of (10)^∞ of lengths 1..=stages.
        #[arg(long, default_value_t = 10)]
        stages: usize,
    },
    /// Regenerate the derived constants, or compare them with a file.
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

enum Failure {
    /// Unreadable or malformed input.
    Input(String),
    /// A library operation refused or failed.
    Op(String),
}

type Run = Result<String, Failure>;

fn input<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{what}: {e}"))
}

fn op<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Op(e.to_string())
}

/// A substitution file, or one of the bundled names sigma1..sigma4.
fn load(path: &Path) -> Result<Substitution, Failure> {
    if !path.exists() {
        if let Some((_, s)) = catalog::all().into_iter().find(|(n, _)| Path::new(n) == path) {
            return Ok(s);
        }
    }
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(input(&name))?;
    Substitution::parse(&text).map_err(input(&name))
}

fn point(text: &str) -> Result<UnitReal, Failure> {
    text.parse().map_err(input(text))
}

fn word(text: &str) -> Result<FiniteWord, Failure> {
    text.parse().map_err(input(text))
}

/// `PREFIX(CYCLE)`.
fn periodic_word(text: &str) -> Result<PeriodicWord, Failure> {
    let bad = || Failure::Input(format!("{text}: expected PREFIX(CYCLE)"));
    let (prefix, rest) = text.split_once('(').ok_or_else(bad)?;
    let cycle = rest.strip_suffix(')').ok_or_else(bad)?;
    let cycle = word(cycle)?;
    if cycle.is_empty() {
        return Err(bad());
    }
    Ok(PeriodicWord::new(word(prefix)?, cycle))
}

fn show(x: &UnitReal) -> String {
    format!("{x} = {}", x.binary())
}

fn show_ratio(r: &Ratio<BigUint>) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "NO"
    }
}

fn pretty(v: Value) -> String {
    serde_json::to_string_pretty(&v).expect("json value")
}

fn staged_json(p: &StagedPoint, bits: usize) -> Value {
    json!({
        "stages": p.stage_count(),
        "prefix": p.prefix_bits(bits).to_string(),
        "checks": p.checks.iter().map(|c| json!({
            "stage": c.stage, "time": c.time, "holds": c.holds, "detail": c.detail,
        })).collect::<Vec<_>>(),
        "exhausted": p.exhausted,
    })
}

fn run(cli: Cli) -> Run {
    let o = &cli.opts;
    if o.max_len == 0 || o.max_steps == 0 || o.max_inter == 0 {
        return Err(Failure::Input("budgets must be positive".into()));
    }
    let budget = Budget {
        max_len: o.max_len,
        max_steps: o.max_steps,
        max_inter: o.max_inter,
    };
    let exec = if o.jobs == 1 { Exec::Sequential } else { Exec::Parallel };
    match &cli.cmd {
        Cmd::Classify { file } => {
            let s = load(file)?;
            let r = classify(&s, &budget, exec);
            Ok(if o.json { r.to_json() } else { r.render_lines() })
        }
        Cmd::Eval { file, x } => {
            let s = load(file)?;
            let x = point(x)?;
            let y = eval_f(&s, &x);
            let m = membership(&s, &x);
            let note = match x.tilde() {
                Expansion::Zero => Some("x = 0".to_string()),
                Expansion::Word(w) => match s.apply_periodic(w) {
                    PeriodicImage::Stalled(_) => {
                        let head = w.block_align(s.k()).prefix().clone();
                        Some(if head.is_empty() {
                            "x̃ = w_ε^∞".to_string()
                        } else {
                            format!("x̃ = {head}·w_ε^∞")
                        })
                    }
                    PeriodicImage::Infinite(_) => None,
                },
            };
            if o.json {
                return Ok(pretty(json!({
                    "x": x.to_string(), "x_binary": x.binary(),
                    "f": y.to_string(), "f_binary": y.binary(),
                    "note": note, "membership": m.render(),
                })));
            }
            let image = match &note {
                Some(n) => format!("{y} ({n})"),
                None => show(&y),
            };
            Ok(format!("x = {}\nf(x) = {image}\nmembership: {}\n", show(&x), m.render()))
        }
        Cmd::Orbit { file, x, n } => {
            let s = load(file)?;
            let rec = orbit(&s, &point(x)?, *n);
            if o.json {
                return Ok(pretty(json!({
                    "points": rec.points.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "flags": rec.flags.iter().map(|f| f.render()).collect::<Vec<_>>(),
                })));
            }
            let list: Vec<String> = rec.points.iter().map(|p| p.to_string()).collect();
            let mut out = format!("{}\n", list.join(", "));
            for (i, (p, f)) in rec.points.iter().zip(&rec.flags).enumerate() {
                out.push_str(&format!("{i:>4}  {:<24}  {}\n", show(p), f.render()));
            }
            Ok(out)
        }
        Cmd::Preimage { file, y } => {
            let s = load(file)?;
            let y = point(y)?;
            let x = preimage_point(&s, &y).map_err(op)?;
            let ok = eval_f(&s, &x) == y;
            if o.json {
                return Ok(pretty(json!({ "y": y.to_string(), "x": x.to_string(), "x_binary": x.binary(), "verified": ok })));
            }
            Ok(format!("y = {}\nx = {}\nf(x) = y verified: {}\n", show(&y), show(&x), yes(ok)))
        }
        Cmd::Periodic {
            file,
            u0,
            stages,
            max_bits,
        } => {
            let s = load(file)?;
            let p = periodic_point(&s, &word(u0)?, *stages, *max_bits).map_err(op)?;
            let limit = p.point.limit();
            if o.json {
                let mut v = staged_json(&p.point, 64);
                v["period"] = json!(p.period);
                v["search"] = json!(format!("{:?}", p.search));
                v["limit"] = json!(limit.map(|x| x.to_string()));
                return Ok(pretty(v));
            }
            let mut out = format!("period {} ({:?})\n", p.period, p.search);
            if let Some(x) = limit {
                let back = iterate_f(&s, &x, p.period) == x;
                out.push_str(&format!("point = {}\nf^{}(x) = x verified: {}\n", show(&x), p.period, yes(back)));
            }
            out.push_str(&format!("prefix: {}\n", p.point.prefix_bits(64)));
            out.push_str(&p.point.render_table());
            Ok(out)
        }
        Cmd::Dense { file, targets } => {
            let s = load(file)?;
            let targets: Vec<FiniteWord> = if targets.is_empty() {
                FiniteWord::all_up_to(2).filter(|w| !w.is_empty()).collect()
            } else {
                targets.iter().map(|t| word(t)).collect::<Result<_, _>>()?
            };
            let d = dense_orbit_point(&s, &targets).map_err(op)?;
            if o.json {
                let mut v = staged_json(&d.point, 64);
                v["schedule"] = json!(d.schedule);
                return Ok(pretty(v));
            }
            let times: Vec<String> = d.schedule.iter().map(|h| h.to_string()).collect();
            let mut out = format!("visit times: {}\nprefix: {}\n", times.join(", "), d.point.prefix_bits(64));
            out.push_str(&d.point.render_table());
            Ok(out)
        }
        Cmd::Sensitivity { file, x, delta_bits } => {
            let s = load(file)?;
            let x = point(x)?;
            let delta = UnitReal::new(BigUint::one(), BigUint::one() << *delta_bits).map_err(op)?;
            let (z, n) = sensitivity_witness(&s, &x, &delta).map_err(op)?;
            let near = x.dist(&z);
            let gap = iterate_f(&s, &x, n).dist(&iterate_f(&s, &z, n));
            let ok = near < *delta.ratio() && gap >= Ratio::new(BigUint::one(), BigUint::from(2u8));
            if o.json {
                return Ok(pretty(json!({
                    "x": x.to_string(), "z": z.to_string(), "n": n,
                    "distance": show_ratio(&near), "gap": show_ratio(&gap), "verified": ok,
                })));
            }
            Ok(format!(
                "x = {}\nz = {}\n|x − z| = {} < 2^-{delta_bits}\nn = {n}, |fⁿ(x) − fⁿ(z)| = {} ≥ 1/2\nverified: {}\n",
                show(&x),
                show(&z),
                show_ratio(&near),
                show_ratio(&gap),
                yes(ok)
            ))
        }
        Cmd::Mixing { file, w, y } => {
            let s = load(file)?;
            let (w, y) = (word(w)?, point(y)?);
            let (h, x) = mixing_witness(&s, &w, &y).map_err(op)?;
            let inside = x.tilde().as_word().take(w.len()) == w;
            let hits = iterate_f(&s, &x, h) == y;
            if o.json {
                return Ok(pretty(json!({
                    "w": w.to_string(), "y": y.to_string(), "h": h, "x": x.to_string(),
                    "in_cylinder": inside, "verified": hits,
                })));
            }
            Ok(format!(
                "h = {h}\nx = {}\nx ∈ [{w}]: {}\nf^{h}(x) = {y} verified: {}\n",
                show(&x),
                yes(inside),
                yes(hits)
            ))
        }
        Cmd::Fiber { file, y, count } => {
            let s = load(file)?;
            let y = point(y)?;
            let xs = fiber_samples(&s, &y, *count, o.seed).map_err(op)?;
            let checks: Vec<bool> = xs.iter().map(|x| eval_f(&s, x) == y).collect();
            if o.json {
                return Ok(pretty(json!({
                    "y": y.to_string(),
                    "samples": xs.iter().zip(&checks).map(|(x, c)| json!({"x": x.to_string(), "verified": c})).collect::<Vec<_>>(),
                })));
            }
            let mut out = format!("y = {}\n", show(&y));
            for (x, c) in xs.iter().zip(&checks) {
                out.push_str(&format!("{}  verified: {}\n", show(x), yes(*c)));
            }
            Ok(out)
        }
        Cmd::Entropy { file, k, at } => {
            let s = load(file)?;
            let b = match at {
                Some(w) => local_entropy_bound(&s, *k, &word(w)?, exec),
                None => entropy_lower_bound(&s, *k, exec),
            }
            .map_err(op)?;
            if o.json {
                return Ok(pretty(json!({ "k": b.k_len, "F": b.f, "extra": b.extra, "bound": b.value() })));
            }
            Ok(format!("{}\n", b.render()))
        }
        Cmd::Separated { file, k, n, export } => {
            let s = load(file)?;
            let f = separated_family(&s, *k, *n, exec).map_err(op)?;
            if *export {
                return Ok(f.export_lines().iter().map(|l| format!("{l}\n")).collect());
            }
            let check = match f.pair_check {
                PairCheck::All { pairs } => format!("all {pairs} pairs"),
                PairCheck::Sampled { pairs } => format!("{pairs} sampled pairs"),
            };
            if o.json {
                return Ok(pretty(json!({
                    "k": f.k_len, "n": f.n, "t": f.t, "points": f.points.len(),
                    "epsilon": show_ratio(&f.epsilon), "min_distance": show_ratio(&f.min_distance),
                    "pairs": check, "verified": f.verified(),
                })));
            }
            Ok(format!(
                "{} points, t = F({}) = {}, ε = {}\nmin d_{} = {} over {check}\nitineraries hold: {}\nverified: {}\n",
                f.points.len(),
                f.k_len,
                f.t,
                show_ratio(&f.epsilon),
                f.n * f.t,
                show_ratio(&f.min_distance),
                yes(f.itinerary_holds.iter().all(|&b| b)),
                yes(f.verified())
            ))
        }
        Cmd::Scrambled {
            file,
            alpha,
            beta,
            stages,
        } => {
            let s = load(file)?;
            let (a, b) = (periodic_word(alpha)?, periodic_word(beta)?);
            let base = PeriodicWord::pure(FiniteWord::new(vec![1, 0]));
            let targets: Vec<FiniteWord> = (1..=*stages).map(|n| base.take(n)).collect();
            let p = scrambled_pair(&s, &a, &b, &targets).map_err(op)?;
            let rows: Vec<(String, &erasing_dyn::dynamics::PairEvent)> = p
                .events
                .iter()
                .map(|e| {
                    let kind = match e.kind {
                        PairEventKind::Proximity => "proximity",
                        PairEventKind::Separation => "separation",
                    };
                    (kind.to_string(), e)
                })
                .collect();
            if o.json {
                return Ok(pretty(json!({
                    "events": rows.iter().map(|(k, e)| json!({
                        "stage": e.stage, "time": e.time, "kind": k,
                        "gap": show_ratio(&e.gap), "bound": show_ratio(&e.bound), "holds": e.holds,
                    })).collect::<Vec<_>>(),
                    "alpha": staged_json(&p.alpha, 64),
                    "beta": staged_json(&p.beta, 64),
                })));
            }
            let mut out = String::from("stage  time  kind        gap        bound      holds\n");
            for (k, e) in rows {
                out.push_str(&format!(
                    "{:>5}  {:>4}  {:<10}  {:<9}  {:<9}  {}\n",
                    e.stage,
                    e.time,
                    k,
                    show_ratio(&e.gap),
                    show_ratio(&e.bound),
                    yes(e.holds)
                ));
            }
            Ok(out)
        }
        Cmd::Oracle { check } => {
            let text = render_constants(&derived_constants());
            match check {
                None => Ok(text),
                Some(path) => {
                    let name = path.display().to_string();
                    let frozen = std::fs::read_to_string(path).map_err(input(&name))?;
                    if frozen == text {
                        Ok(format!("{name}: {} constants match\n", text.lines().count()))
                    } else {
                        Err(Failure::Op(format!("{name} differs from the regenerated constants")))
                    }
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if cli.opts.jobs > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.opts.jobs)
            .build_global()
            .expect("thread pool is configured once");
    }
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Op(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
