use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rulegen::chr::{self, VarNaming};
use rulegen::propagate::{Firing, Schedule};
use rulegen::{catalogue, native, parse, search};
use rulegen::rules::PremiseRule;
use rulegen::{generate_inclusion_rules, generate_rules, merge_by_premise, MergedGroup, Mode, Propagators, Relation};

mod verify;

/// Generate propagation rules from constraint tables and run them.
#[derive(Parser)]
#[command(name = "rulegen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the minimal rules of a relation.
    Gen(GenArgs),
    /// Propagate a problem to its fixpoint and print the domains.
    Propagate(PropagateArgs),
    /// Enumerate solutions with propagation and labeling.
    Solve(SolveArgs),
    /// Check the generators and propagators against exhaustive oracles.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Rules,
    Inclusion,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Native,
    Chr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Naming {
    Sequential,
    ByColumn,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(alias = "membership")]
    Rules,
    Inclusion,
    Gac,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Rules => Mode::Membership,
            ModeArg::Inclusion => Mode::Inclusion,
            ModeArg::Gac => Mode::Gac,
        }
    }
}

#[derive(Args)]
struct Source {
    /// Relation file.
    #[arg(conflicts_with = "builtin")]
    file: Option<PathBuf>,
    /// Relation to take from FILE (optional when it defines only one).
    #[arg(long, requires = "file")]
    relation: Option<String>,
    /// Built-in relation instead of a file.
    #[arg(long)]
    builtin: Option<String>,
}

impl Source {
    fn load(&self) -> Result<(Relation, bool), Failure> {
        match (&self.file, &self.builtin) {
            (Some(f), None) => Ok((parse::load_relation(f, self.relation.as_deref())?, false)),
            (None, Some(b)) => Ok((catalogue::builtin(b)?, true)),
            _ => Err(Failure::Usage("give a relation FILE or --builtin NAME".into())),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    kind: Kind,
    #[command(flatten)]
    source: Source,
    /// Largest premise size (default: arity - 1).
    #[arg(long)]
    max_premise: Option<usize>,
    #[arg(long, value_enum, default_value = "native")]
    emit: Emit,
    /// Group rules with identical premises (default for chr).
    #[arg(long, overrides_with = "no_merge")]
    merge: bool,
    #[arg(long, overrides_with = "merge")]
    no_merge: bool,
    /// Print raw and merged rule counts and elapsed time to stderr.
    #[arg(long)]
    stats: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Head variable naming for chr output (default: sequential for
    /// built-ins, by-column for files).
    #[arg(long, value_enum)]
    naming: Option<Naming>,
}

#[derive(Args)]
struct PropagateArgs {
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "rules")]
    mode: ModeArg,
    /// Print every domain change.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    max_premise: Option<usize>,
    /// Process the worklist in a random order from this seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "rules")]
    mode: ModeArg,
    /// Enumerate all solutions (the default).
    #[arg(long, conflicts_with = "limit")]
    all: bool,
    /// Stop after N solutions.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    max_premise: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Random domain restrictions per property.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    /// Bad input or arguments: exit 2.
    Usage(String),
    /// Inconsistent problem, no solutions or a failed check: exit 1.
    Negative,
}

impl From<rulegen::Error> for Failure {
    fn from(e: rulegen::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Propagate(a) => propagate(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => a
            .source
            .load()
            .and_then(|(rel, _)| verify::run(rel, a.trials, a.seed)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let (rel, builtin) = a.source.load()?;
    let top = rel.arity() - 1;
    let k = match a.max_premise {
        Some(k) if k > top => {
            return Err(Failure::Usage(format!(
                "--max-premise {k} exceeds arity - 1 = {top} for {}",
                rel.name()
            )))
        }
        Some(k) => k,
        None => top,
    };
    if rel.is_empty() {
        eprintln!("warning: relation {} has no tuples", rel.name());
    }
    let merge = match a.emit {
        Emit::Chr => !a.no_merge,
        Emit::Native => a.merge,
    };
    let naming = match a.naming {
        Some(Naming::Sequential) => VarNaming::Sequential,
        Some(Naming::ByColumn) => VarNaming::ByColumn,
        None if builtin => VarNaming::Sequential,
        None => VarNaming::ByColumn,
    };
    let started = Instant::now();
    let (text, raw, merged, label) = match a.kind {
        Kind::Rules => {
            let rs = generate_rules(&rel, k);
            let groups = merge_by_premise(&rel, &rs.rules);
            let text = match a.emit {
                Emit::Native => native::render_rules(&rel, &rs.rules, merge),
                Emit::Chr if merge => {
                    chr::chr_header(&rel, "membership rules", rs.len(), groups.len(), false)
                        + &chr::emit_chr_membership(&rel, &groups, naming)?
                }
                Emit::Chr => {
                    chr::chr_header(&rel, "membership rules", rs.len(), groups.len(), false)
                        + &chr::emit_chr_membership(&rel, &unmerged(&rs.rules), naming)?
                }
            };
            (text, rs.len(), groups.len(), "membership")
        }
        Kind::Inclusion => {
            let rs = generate_inclusion_rules(&rel, k)?;
            let groups = merge_by_premise(&rel, &rs.rules);
            let text = match a.emit {
                Emit::Native => native::render_inclusion_rules(&rel, &rs.rules, merge),
                Emit::Chr if merge => {
                    chr::chr_header(&rel, "inclusion rules", rs.len(), groups.len(), true)
                        + &chr::emit_chr_inclusion(&rel, &groups, naming)?
                }
                Emit::Chr => {
                    chr::chr_header(&rel, "inclusion rules", rs.len(), groups.len(), true)
                        + &chr::emit_chr_inclusion(&rel, &unmerged(&rs.rules), naming)?
                }
            };
            (text, rs.len(), groups.len(), "inclusion")
        }
    };
    let elapsed = started.elapsed();
    write_output(a.out.as_deref(), &text)?;
    if a.stats {
        eprintln!(
            "relation={} kind={label} max_premise={k} raw={raw} merged={merged} elapsed={:.3}s",
            rel.name(),
            elapsed.as_secs_f64()
        );
    }
    Ok(())
}

fn load_problem(path: &Path) -> Result<rulegen::Problem, Failure> {
    let p = parse::load_problem(path)?;
    let mut seen = Vec::new();
    for s in p.scopes().iter().filter(|s| s.relation.is_empty()) {
        if !seen.contains(&s.relation.name()) {
            seen.push(s.relation.name());
            eprintln!("warning: relation {} has no tuples", s.relation.name());
        }
    }
    Ok(p)
}

fn propagate(a: PropagateArgs) -> Result<(), Failure> {
    let problem = load_problem(&a.problem)?;
    let props = Propagators::with_max_premise(&problem, a.mode.into(), a.max_premise)?;
    let mut store = rulegen::DomainStore::new(&problem);
    let schedule = a.seed.map_or(Schedule::Fifo, Schedule::Shuffled);
    let mut out = String::new();
    if a.trace {
        let mut log = |f: &Firing| {
            out.push_str(&props.describe(&problem, f));
            out.push('\n');
        };
        props.fixpoint_with(&mut store, schedule, Some(&mut log));
    } else {
        props.fixpoint_with(&mut store, schedule, None);
    }
    if store.is_inconsistent() {
        out.push_str("INCONSISTENT\n");
    } else {
        for (i, v) in problem.variables().iter().enumerate() {
            out.push_str(&format!("{} in {}\n", v.name, store.domain(&problem, i)));
        }
    }
    io::stdout().write_all(out.as_bytes())?;
    if store.is_inconsistent() {
        Err(Failure::Negative)
    } else {
        Ok(())
    }
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let problem = load_problem(&a.problem)?;
    let props = Propagators::with_max_premise(&problem, a.mode.into(), a.max_premise)?;
    let result = search::solve_all(&problem, &props, a.limit);
    let mut out = String::new();
    for s in &result.solutions {
        out.push_str(&s.render(&problem));
        out.push('\n');
    }
    out.push_str(&result.summary());
    out.push('\n');
    io::stdout().write_all(out.as_bytes())?;
    if result.solutions.is_empty() {
        Err(Failure::Negative)
    } else {
        Ok(())
    }
}

/// One group per rule, for line-per-rule CHR output.
fn unmerged<R: PremiseRule>(rules: &[R]) -> Vec<MergedGroup<R::Premise>> {
    rules
        .iter()
        .map(|r| {
            let (c, v) = r.conclusion();
            MergedGroup {
                premise: r.premise().clone(),
                conclusions: vec![(c, v.clone())],
            }
        })
        .collect()
}
