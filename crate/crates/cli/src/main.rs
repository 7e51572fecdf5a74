use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fes_core::checker::{self, Family, GenConfig, Mutation};
use fes_core::depgraph::{build_graph, GraphMode};
use fes_core::eqs::VarName;
use fes_core::gauss::{gauss_solve, scc_solve};
use fes_core::semantics::{sem_with_limit, Fes, DEFAULT_MAX_EVALS};
use fes_core::syntax::{parse, parse_spec_list, print, print_valuation, Document};
use fes_core::transforms::{
    apply_migrate, apply_partial, apply_sign_flip, apply_split, apply_swap, apply_unfold,
    reduce_alternations, TransformError, TransformOptions, TransformReport,
};

#[derive(Parser)]
#[command(
    name = "fes",
    version,
    about = "Fixpoint equation systems over finite lattices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a system and print one `name = value` line per spec variable.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Sem)]
        method: Method,
        /// Replace the spec, e.g. "mu X, nu Y".
        #[arg(long)]
        spec: Option<String>,
    },
    /// Same as `solve --method sem`.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        spec: Option<String>,
    },
    /// Apply one transformation and print the result.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Spec position for swap and signflip.
        #[arg(long)]
        at: Option<usize>,
        /// Two adjacent blocks for migrate, e.g. "0..2,2..3".
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        allow_ineq: bool,
        #[arg(long, default_value = "syntactic")]
        graph_mode: GraphMode,
        /// For split: put the dependencies of X first.
        #[arg(long)]
        deps_first: bool,
        #[arg(long)]
        spec: Option<String>,
    },
    /// Print the dependency graph in DOT format.
    Graph {
        file: PathBuf,
        #[arg(long, default_value = "syntactic")]
        graph_mode: GraphMode,
        /// List strongly connected components instead.
        #[arg(long)]
        sccs: bool,
        #[arg(long)]
        spec: Option<String>,
    },
    /// Run the randomized theorem checker.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value = "all")]
        props: String,
        #[arg(long, default_value = "bool,chain3,diamond,powerset2")]
        lattices: String,
        #[arg(long, default_value = "syntactic")]
        graph_mode: GraphMode,
        #[arg(long, default_value_t = 5)]
        max_vars: usize,
        /// Deliberately weaken one property to test the checker itself.
        #[arg(long, value_enum)]
        mutate: Option<Mutate>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sem,
    Gauss,
    Scc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Unfold,
    Partial,
    Swap,
    Migrate,
    Signflip,
    Split,
    ReduceAlt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutate {
    MigrationNoIndep,
    ForcedUnfold,
}

/// A failure with its exit code.
struct Fail(u8, String);

fn usage(msg: impl std::fmt::Display) -> Fail {
    Fail(2, msg.to_string())
}

fn failed(msg: impl std::fmt::Display) -> Fail {
    Fail(1, msg.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(file: &PathBuf, spec: Option<&str>) -> Result<Document, Fail> {
    let text =
        std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let mut doc = parse(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    if let Some(s) = spec {
        let spec = parse_spec_list(s, &doc.fes.es).map_err(usage)?;
        doc.fes = doc.fes.with_spec(spec);
    }
    Ok(doc)
}

fn max_evals() -> Result<u128, Fail> {
    match std::env::var("FES_MAX_EVALS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("FES_MAX_EVALS: not a number: {v}"))),
        Err(_) => Ok(DEFAULT_MAX_EVALS),
    }
}

fn run(cmd: Cmd) -> Result<String, Fail> {
    match cmd {
        Cmd::Solve { file, method, spec } => solve(&load(&file, spec.as_deref())?, method),
        Cmd::Oracle { file, spec } => solve(&load(&file, spec.as_deref())?, Method::Sem),
        Cmd::Transform {
            file,
            op,
            x,
            y,
            at,
            range,
            force,
            allow_ineq,
            graph_mode,
            deps_first,
            spec,
        } => {
            let doc = load(&file, spec.as_deref())?;
            let opts = TransformOptions {
                mode: graph_mode,
                force,
                allow_ineq,
            };
            let var = |v: Option<String>, flag: &str| {
                v.map(|s| VarName::new(&s))
                    .ok_or_else(|| usage(format!("--op needs --{flag}")))
            };
            let pos = || at.ok_or_else(|| usage("--op needs --at"));
            let fes = &doc.fes;
            let r = match op {
                Op::Unfold => apply_unfold(fes, &var(x, "x")?, &var(y, "y")?, opts),
                Op::Partial => apply_partial(fes, &var(x, "x")?, &doc.eta, opts),
                Op::Swap => apply_swap(fes, pos()?, opts),
                Op::Signflip => apply_sign_flip(fes, pos()?, opts),
                Op::Migrate => {
                    let (r1, r2) = parse_ranges(
                        range
                            .as_deref()
                            .ok_or_else(|| usage("--op migrate needs --range"))?,
                    )?;
                    apply_migrate(fes, r1, r2, opts)
                }
                Op::Split => apply_split(fes, &var(x, "x")?, deps_first, opts),
                Op::ReduceAlt => reduce_alternations(fes, opts),
            };
            transform_output(&doc, r)
        }
        Cmd::Graph {
            file,
            graph_mode,
            sccs,
            spec,
        } => {
            let doc = load(&file, spec.as_deref())?;
            let g = build_graph(&doc.fes, graph_mode).map_err(failed)?;
            if sccs {
                let mut out = String::new();
                for c in g.sccs() {
                    let names: Vec<&str> = c.iter().map(|v| v.as_str()).collect();
                    let _ = writeln!(out, "{{{}}}", names.join(", "));
                }
                Ok(out)
            } else {
                Ok(g.to_dot())
            }
        }
        Cmd::Check {
            seed,
            cases,
            props,
            lattices,
            graph_mode,
            max_vars,
            mutate,
        } => {
            let cfg = GenConfig {
                seed,
                cases,
                max_vars,
                families: Family::parse_list(&lattices).map_err(usage)?,
                graph_mode,
                mutation: mutate.map(|m| match m {
                    Mutate::MigrationNoIndep => Mutation::MigrationNoIndep,
                    Mutate::ForcedUnfold => Mutation::ForcedUnfold,
                }),
            };
            let props = checker::parse_props(&props).map_err(usage)?;
            let results = checker::run_suite(&cfg, &props).map_err(usage)?;
            let mut out = String::new();
            let mut bad = 0;
            for r in &results {
                let _ = writeln!(out, "{}", r.summary());
            }
            for r in &results {
                if let Some(cx) = &r.counterexample {
                    bad += 1;
                    let _ = writeln!(out, "\n# counterexample for {}: {}", r.id, cx.detail);
                    out.push_str(&cx.text);
                }
            }
            let _ = writeln!(
                out,
                "{} properties, {bad} with counterexamples",
                results.len()
            );
            if bad > 0 {
                print!("{out}");
                return Err(failed(format!("{bad} properties have counterexamples")));
            }
            Ok(out)
        }
    }
}

fn solve(doc: &Document, method: Method) -> Result<String, Fail> {
    let fes: &Fes = &doc.fes;
    let v = match method {
        Method::Sem => {
            sem_with_limit(&fes.es, &fes.spec, &doc.eta, max_evals()?).map_err(failed)?
        }
        Method::Gauss => gauss_solve(fes).map_err(failed)?.valuation,
        Method::Scc => scc_solve(fes, &doc.eta).map_err(failed)?,
    };
    Ok(print_valuation(fes, &v))
}

fn parse_ranges(s: &str) -> Result<(std::ops::Range<usize>, std::ops::Range<usize>), Fail> {
    let bad = || usage(format!("--range: expected A..B,B..C, got `{s}`"));
    let one = |t: &str| -> Result<std::ops::Range<usize>, Fail> {
        let (a, b) = t.trim().split_once("..").ok_or_else(bad)?;
        Ok(a.trim().parse().map_err(|_| bad())?..b.trim().parse().map_err(|_| bad())?)
    };
    let (r1, r2) = s.split_once(',').ok_or_else(bad)?;
    Ok((one(r1)?, one(r2)?))
}

fn transform_output(
    doc: &Document,
    r: Result<TransformReport, TransformError>,
) -> Result<String, Fail> {
    let rep = match r {
        Ok(rep) => rep,
        Err(e @ TransformError::InvalidPosition(_)) | Err(e @ TransformError::InvalidRange(_)) => {
            return Err(usage(e))
        }
        Err(e @ TransformError::UnknownVariable(_)) => return Err(usage(e)),
        Err(e) => return Err(failed(e)),
    };
    let mut out = String::new();
    if rep.steps.is_empty() {
        let _ = writeln!(out, "# justification: none (no step applies)");
    }
    for s in &rep.steps {
        let _ = writeln!(out, "# justification: {} ({})", s.theorem, s.detail);
    }
    let _ = writeln!(out, "# relation: {}", rep.relation);
    out.push_str(&print(&Document {
        fes: rep.result,
        eta: doc.eta.clone(),
    }));
    Ok(out)
}
