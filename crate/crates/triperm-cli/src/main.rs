//! Command-line surface over the triperm library.
//!
//! Every subcommand is a pure function of its inputs: identical invocations
//! produce identical bytes. Output is JSON on stdout (or to `--out`), except
//! `render`, which emits SVG. Exit codes: 0 success, 1 for domain-negative
//! results (non-member, no witness, no solution, untileable window), 2 for
//! usage and I/O errors.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use triperm::classes::{
    check_membership_with_budget, enumerate_forbidden, ClassDescriptor, ClassSpec, ConstraintId,
};
use triperm::gadgets::Variant;
use triperm::jep::{brute_force_jep, extract_tiling, jep_less1, jep_q, BruteMode, JepError};
use triperm::matcher;
use triperm::render::{render_svg, RenderSpec};
use triperm::semantics::{detect_copies, DEFAULT_COPY_BUDGET};
use triperm::structure::MultiPerm;
use triperm::tiling::{
    self, encode_wang_as_string, solve_periodic, solve_window, ProblemFile, Tiling,
};

#[derive(Parser)]
#[command(
    name = "triperm",
    version,
    about = "Three-order structures, compiled classes, canonical models, joint embedding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a class descriptor from a tiling problem.
    Compile(CompileArgs),
    /// Check class membership of a structure.
    Check(CheckArgs),
    /// Dump detected copies, predicates, intervals and weak coordinates.
    Explain(CheckArgs),
    /// Generate a canonical model.
    GenCanonical(GenCanonicalArgs),
    /// Solve a string tiling problem within bounds.
    SolveTiling(SolveTilingArgs),
    /// Encode a Wang problem as a string tiling problem plus block codec.
    EncodeWang(EncodeWangArgs),
    /// Tiling-driven joint embedding of two members.
    Jep(JepArgs),
    /// Exhaustive joint-embedding search for small factors.
    JepBrute(JepBruteArgs),
    /// Extract a tiling from a joint structure.
    Extract(ExtractArgs),
    /// Render a structure as SVG.
    Render(RenderArgs),
    /// Materialize forbidden configurations as JSON lines.
    Forbidden(ForbiddenArgs),
    /// Pattern containment between two structures.
    Match(MatchArgs),
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long, value_enum, default_value = "p", ignore_case = true)]
    variant: VariantArg,
    #[arg(long, default_value_t = 7)]
    gadget_size: usize,
    /// Offset into the qualifying-shape enumeration.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// String tiling problem file (.stp).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    P,
    Q,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    class: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Cap on the number of detected copies.
    #[arg(long, default_value_t = DEFAULT_COPY_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenCanonicalArgs {
    #[arg(long)]
    class: PathBuf,
    #[arg(long, value_enum, ignore_case = true)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the placement ledger.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    A,
    B,
    Qa,
    Qb,
}

#[derive(Args)]
struct SolveTilingArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Periodic search bound (table side).
    #[arg(long, default_value_t = 3)]
    max_period: usize,
    /// Solve a finite window instead of a periodic table.
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    window: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeWangArgs {
    /// Wang problem file (.wang).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    out_problem: Option<PathBuf>,
    #[arg(long)]
    out_codec: Option<PathBuf>,
}

#[derive(Args)]
struct JepArgs {
    #[arg(long)]
    class: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    tiling: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JepBruteArgs {
    #[arg(long)]
    class: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, value_enum, default_value = "disjoint", ignore_case = true)]
    mode: ModeArg,
    /// Hard cap on |A| + |B|.
    #[arg(long, default_value_t = triperm::jep::DEFAULT_SEARCH_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Disjoint,
    Identify,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    class: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Window as WxH, e.g. 2x2.
    #[arg(long)]
    window: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Tag the structure against this class's gadget family first.
    #[arg(long)]
    class: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    scale: u32,
    /// Annotate each point with its order-3 rank.
    #[arg(long)]
    order3: bool,
    #[arg(long)]
    labels: bool,
}

#[derive(Args)]
struct ForbiddenArgs {
    #[arg(long)]
    class: PathBuf,
    /// Comma-separated constraint ids (e.g. 2,6).
    #[arg(long)]
    constraints: String,
    #[arg(long, default_value_t = 15)]
    cap: usize,
    /// Stop after this many patterns.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    host: PathBuf,
    /// Enumerate all copies instead of the first embedding.
    #[arg(long)]
    enumerate: bool,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_structure(path: &Path) -> Result<MultiPerm> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    MultiPerm::parse_mperm(&bytes).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn read_class(path: &Path) -> Result<ClassDescriptor> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: ClassSpec =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    spec.compile().map_err(|e| anyhow!("compiling {}: {e}", path.display()))
}

fn read_string_problem(path: &Path) -> Result<tiling::StringTilingProblem> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    match tiling::parse_problem(&bytes)? {
        ProblemFile::String(p) => Ok(p),
        ProblemFile::Wang(_) => {
            Err(anyhow!("{} holds a wang problem, expected string", path.display()))
        }
    }
}

fn read_tiling(path: &Path) -> Result<Tiling> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    emit(out, &serde_json::to_vec(value)?)
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile(args) => {
            let problem = read_string_problem(&args.problem)?;
            let spec = ClassSpec {
                variant: match args.variant {
                    VariantArg::P => Variant::P,
                    VariantArg::Q => Variant::Q,
                },
                gadget_size: args.gadget_size,
                gadget_seed: args.seed,
                problem,
            };
            // Compiling verifies the family; fail loudly before writing.
            spec.compile().map_err(|e| anyhow!("{e}"))?;
            emit_json(&args.out, &spec)?;
            Ok(0)
        }
        Command::Check(args) => {
            let class = read_class(&args.class)?;
            let s = read_structure(&args.input)?;
            let verdict = check_membership_with_budget(&s, &class, args.budget)
                .map_err(|e| anyhow!("{e}"))?;
            emit_json(&args.out, &verdict)?;
            Ok(if verdict.member { 0 } else { 1 })
        }
        Command::Explain(args) => {
            let class = read_class(&args.class)?;
            let s = read_structure(&args.input)?;
            let tagged =
                detect_copies(&s, &class.gadgets, args.budget).map_err(|e| anyhow!("{e}"))?;
            #[derive(Serialize)]
            struct Explain<'a> {
                points: usize,
                copies: &'a [triperm::semantics::GadgetCopy],
                intervals: &'a [triperm::semantics::SpecialInterval],
                path_points: &'a [BTreeSet<usize>; 4],
                origin_points: &'a [BTreeSet<usize>; 4],
                grid_points: &'a [BTreeSet<usize>; 4],
                tile1_points: &'a [BTreeSet<usize>; 4],
                tile2_points: &'a [BTreeSet<usize>; 4],
                weak_coordinates: Vec<(String, triperm::semantics::WeakCoordinateMap)>,
            }
            let weak_coordinates = class
                .gadgets
                .pairings()
                .into_iter()
                .map(|p| (format!("{}/{}", p.0, p.1), tagged.weak_coordinates(p)))
                .collect();
            let explain = Explain {
                points: s.len(),
                copies: &tagged.copies,
                intervals: &tagged.intervals,
                path_points: &tagged.path_points,
                origin_points: &tagged.origin_points,
                grid_points: &tagged.grid_points,
                tile1_points: &tagged.tile1_points,
                tile2_points: &tagged.tile2_points,
                weak_coordinates,
            };
            emit_json(&args.out, &explain)?;
            Ok(0)
        }
        Command::GenCanonical(args) => {
            let class = read_class(&args.class)?;
            let build = match args.model {
                ModelArg::A => triperm::canonical::canonical_a(args.n, &class.gadgets),
                ModelArg::B => triperm::canonical::canonical_b(args.n, &class.gadgets),
                ModelArg::Qa => triperm::canonical::canonical_q_a(args.n, &class.gadgets),
                ModelArg::Qb => triperm::canonical::canonical_q_b(args.n, &class.gadgets),
            }
            .map_err(|e| anyhow!("{e}"))?;
            emit(&args.out, &build.structure.serialize_mperm())?;
            if let Some(ledger_path) = &args.ledger {
                std::fs::write(ledger_path, serde_json::to_vec(&build.ledger)?)
                    .with_context(|| format!("writing {}", ledger_path.display()))?;
            }
            Ok(0)
        }
        Command::SolveTiling(args) => {
            let problem = read_string_problem(&args.problem)?;
            let solution = match &args.window {
                Some(dims) => solve_window(&problem, dims[0], dims[1]),
                None => solve_periodic(&problem, args.max_period),
            };
            match solution {
                Some(t) => {
                    emit_json(&args.out, &t)?;
                    Ok(0)
                }
                None => {
                    emit_json(&args.out, &serde_json::json!({ "solution": null }))?;
                    Ok(1)
                }
            }
        }
        Command::EncodeWang(args) => {
            let bytes = std::fs::read(&args.problem)
                .with_context(|| format!("reading {}", args.problem.display()))?;
            let wang = match tiling::parse_problem(&bytes)? {
                ProblemFile::Wang(w) => w,
                ProblemFile::String(_) => {
                    return Err(anyhow!("expected a wang problem"));
                }
            };
            let (string, codec) = encode_wang_as_string(&wang).map_err(|e| anyhow!("{e}"))?;
            emit_json(&args.out_problem, &ProblemFile::String(string))?;
            emit_json(&args.out_codec, &codec)?;
            Ok(0)
        }
        Command::Jep(args) => {
            let class = read_class(&args.class)?;
            let a = read_structure(&args.a)?;
            let b = read_structure(&args.b)?;
            let theta = read_tiling(&args.tiling)?;
            let result = match class.variant {
                Variant::P => jep_less1(&a, &b, &theta, &class),
                Variant::Q => jep_q(&a, &b, &theta, &class),
            };
            match result {
                Ok(out) => {
                    emit(&args.out, &out.structure.serialize_mperm())?;
                    Ok(0)
                }
                Err(
                    e @ (JepError::NotAMember { .. }
                    | JepError::InvalidTiling { .. }
                    | JepError::SplitNotFound { .. }),
                ) => {
                    eprintln!("no joint embedding produced: {e}");
                    Ok(1)
                }
                Err(e) => Err(anyhow!("{e}")),
            }
        }
        Command::JepBrute(args) => {
            let class = read_class(&args.class)?;
            let a = read_structure(&args.a)?;
            let b = read_structure(&args.b)?;
            let mode = match args.mode {
                ModeArg::Disjoint => BruteMode::Disjoint,
                ModeArg::Identify => BruteMode::Identify,
            };
            match brute_force_jep(&a, &b, &class, mode, args.budget) {
                Ok(Some(w)) => {
                    #[derive(Serialize)]
                    struct Out {
                        witness: serde_json::Value,
                        matching: Vec<(usize, usize)>,
                    }
                    let witness = serde_json::from_slice(&w.structure.serialize_mperm())?;
                    emit_json(&args.out, &Out { witness, matching: w.matching })?;
                    Ok(0)
                }
                Ok(None) => {
                    emit_json(&args.out, &serde_json::json!({ "witness": null }))?;
                    Ok(1)
                }
                Err(e) => Err(anyhow!("{e}")),
            }
        }
        Command::Extract(args) => {
            let class = read_class(&args.class)?;
            let s = read_structure(&args.input)?;
            let (w, h) = parse_window(&args.window)?;
            match extract_tiling(&s, &class, w, h) {
                Ok(t) => {
                    emit_json(&args.out, &t)?;
                    Ok(0)
                }
                Err(e @ JepError::UntiledCell { .. }) => {
                    eprintln!("extraction failed: {e}");
                    Ok(1)
                }
                Err(e) => Err(anyhow!("{e}")),
            }
        }
        Command::Render(args) => {
            let s = read_structure(&args.input)?;
            let tagged = match &args.class {
                Some(path) => {
                    let class = read_class(path)?;
                    Some(
                        detect_copies(&s, &class.gadgets, DEFAULT_COPY_BUDGET)
                            .map_err(|e| anyhow!("{e}"))?,
                    )
                }
                None => None,
            };
            let spec = RenderSpec {
                scale: args.scale,
                show_order3: args.order3,
                show_labels: args.labels,
                ..RenderSpec::default()
            };
            let svg = render_svg(&s, tagged.as_ref(), &spec);
            emit(&args.svg, svg.as_bytes())?;
            Ok(0)
        }
        Command::Forbidden(args) => {
            let class = read_class(&args.class)?;
            let constraints = parse_constraints(&args.constraints)?;
            let mut lines: Vec<u8> = Vec::new();
            let mut count = 0usize;
            enumerate_forbidden(&class, &constraints, args.cap, &mut |m| {
                if args.limit.is_none_or(|l| count < l) {
                    lines.extend_from_slice(&m.serialize_mperm());
                    lines.push(b'\n');
                    count += 1;
                }
            })
            .map_err(|e| anyhow!("{e}"))?;
            emit(&args.out, &lines)?;
            Ok(0)
        }
        Command::Match(args) => {
            let pattern = read_structure(&args.pattern)?;
            let host = read_structure(&args.host)?;
            if args.enumerate {
                let copies = matcher::enumerate_copies(&pattern, &host, args.limit)
                    .map_err(|e| anyhow!("{e}"))?;
                #[derive(Serialize)]
                struct Out {
                    count: usize,
                    complete: bool,
                    copies: Vec<Vec<usize>>,
                }
                let out = Out {
                    count: copies.copies.len(),
                    complete: copies.complete,
                    copies: copies.copies.into_iter().map(|e| e.map).collect(),
                };
                let found = out.count > 0;
                emit_json(&args.out, &out)?;
                Ok(if found { 0 } else { 1 })
            } else {
                let emb = matcher::find_embedding(&pattern, &host).map_err(|e| anyhow!("{e}"))?;
                let found = emb.is_some();
                emit_json(&args.out, &serde_json::json!({ "embedding": emb.map(|e| e.map) }))?;
                Ok(if found { 0 } else { 1 })
            }
        }
    }
}

fn parse_window(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("window must look like 2x2, got {s}"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn parse_constraints(s: &str) -> Result<BTreeSet<ConstraintId>> {
    let mut out = BTreeSet::new();
    for token in s.split(',') {
        let c = match token.trim() {
            "1" => ConstraintId::C1,
            "2" => ConstraintId::C2,
            "3" => ConstraintId::C3,
            "4" => ConstraintId::C4,
            "5" => ConstraintId::C5,
            "6" => ConstraintId::C6,
            "7" => ConstraintId::C7,
            "8" => ConstraintId::C8,
            "9" => ConstraintId::C9,
            "10" => ConstraintId::C10,
            "11" => ConstraintId::C11,
            "12" => ConstraintId::C12,
            "6*" => ConstraintId::C6Star,
            "13" => ConstraintId::C13,
            other => return Err(anyhow!("unknown constraint id {other}")),
        };
        out.insert(c);
    }
    Ok(out)
}
