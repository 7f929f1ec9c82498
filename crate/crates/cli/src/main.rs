use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde_json::{json, Value};

use sigma2x_core::catalog::{list_entries, lookup, CatalogEntry, Domain};
use sigma2x_core::chain::{
    chain_steps, emit_report, run_chain, write_report, ChainOptions, ReportFormat, StepStatus,
    Verdict,
};
use sigma2x_core::compute::{compute, Computation, Method, Settings};
use sigma2x_core::constants::{
    closed_forms, consistency_audit, constants, format_sig17, matching_digits,
};
use sigma2x_core::quad1d::{Bounds, Interval1D};
use sigma2x_core::Error;

/// Exit code when every step passed or carries a documented factor.
const EXIT_PASS: u8 = 0;
/// Exit code for a failed step or an evaluation error.
const EXIT_FAIL: u8 = 1;
/// Exit code when an integral missed its tolerance.
const EXIT_NOT_CONVERGED: u8 = 2;
/// Exit code for an unknown catalog id or step id.
const EXIT_UNKNOWN_ID: u8 = 3;
/// Exit code for malformed command lines.
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "sigma2x")]
#[command(about = "Quadrature and verification of the second-order exchange self-energy integrals")]
#[command(version)]
struct Cli {
    /// Maximum number of worker threads (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the integrand catalog and the verification steps
    List {
        /// Print a JSON array instead of a table
        #[arg(long)]
        json: bool,

        /// Keep only rows whose id contains this string
        #[arg(long)]
        filter: Option<String>,
    },

    /// Integrate one catalog entry
    Compute {
        /// Catalog id, e.g. E23_A
        id: String,

        /// Absolute tolerance
        #[arg(long)]
        tol: Option<f64>,

        /// Relative tolerance
        #[arg(long)]
        rel_tol: Option<f64>,

        /// gk | ts (1D), iterated | adaptive | mc (2D/3D)
        #[arg(long)]
        method: Option<Method>,

        /// Monte Carlo sample count
        #[arg(long)]
        mc_samples: Option<u64>,

        /// Monte Carlo seed (required with --method mc)
        #[arg(long)]
        seed: Option<u64>,

        /// Evaluation budget
        #[arg(long)]
        max_evals: Option<u64>,

        /// Parameter of a parametric entry (a or c)
        #[arg(long)]
        param: Option<f64>,

        /// Write the result as JSON to this file
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },

    /// Run verification steps and report
    #[command(group(ArgGroup::new("selection").required(true).args(["steps", "all"])))]
    Verify {
        /// Comma-separated step ids or groups (S_inner, S_f, S_5, S_consts)
        #[arg(long, value_delimiter = ',')]
        steps: Vec<String>,

        /// Every step of the chain
        #[arg(long)]
        all: bool,

        /// Replace every step tolerance
        #[arg(long)]
        rel_tol: Option<f64>,

        /// Write the schema-1 JSON report to this file
        #[arg(long, value_name = "PATH", conflicts_with = "text")]
        json: Option<PathBuf>,

        /// Write the text report to this file
        #[arg(long, value_name = "PATH")]
        text: Option<PathBuf>,
    },

    /// Print constants, closed forms and the constant-level audit
    Constants,
}

fn domain_label(domain: &Domain) -> String {
    fn bound(x: f64) -> String {
        if x == std::f64::consts::FRAC_PI_2 {
            "pi/2".into()
        } else {
            x.to_string()
        }
    }
    fn axis(i: &Interval1D) -> String {
        match i.bounds() {
            Bounds::Finite { lo, hi } => format!("[{}, {}]", bound(lo), bound(hi)),
            Bounds::SemiInfinite { lo } => format!("[{}, inf)", bound(lo)),
        }
    }
    domain.axes().iter().map(axis).collect::<Vec<_>>().join(" x ")
}

fn cmd_list(json: bool, filter: Option<&str>) -> u8 {
    let keep = |id: &str| filter.is_none_or(|f| id.contains(f));
    let entries: Vec<&CatalogEntry> = list_entries().iter().filter(|e| keep(e.id.as_str())).collect();
    let steps: Vec<_> = chain_steps().iter().filter(|s| keep(&s.id)).collect();
    if json {
        let mut rows: Vec<Value> = entries
            .iter()
            .map(|e| {
                let mut v = serde_json::to_value(e).expect("entry serializes");
                v["kind"] = json!("entry");
                v
            })
            .collect();
        rows.extend(steps.iter().map(|s| {
            json!({
                "kind": "step",
                "id": s.id,
                "group": s.group,
                "paper_ref": s.paper_ref,
                "computed": s.computed_expression,
                "expected": s.expected_expression,
                "tolerance": s.tolerance,
                "requires": s.requires,
            })
        }));
        println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
        return EXIT_PASS;
    }
    for e in &entries {
        let param = e
            .parameter
            .map(|p| format!(" ({}={})", p.name, p.default))
            .unwrap_or_default();
        println!(
            "{:<10} {}D  {:<34} {}{}",
            e.id.as_str(),
            e.dimension,
            domain_label(&e.domain),
            e.anchor,
            param
        );
    }
    for s in &steps {
        println!(
            "{:<18} {} vs {}  (tol {:e})  {}",
            s.id, s.computed_expression, s.expected_expression, s.tolerance, s.paper_ref
        );
    }
    EXIT_PASS
}

fn print_computation(c: &Computation) {
    println!("id: {}", c.id);
    if let Some(p) = c.parameter {
        println!("parameter: {}", format_sig17(p));
    }
    println!("method: {}", c.method);
    println!("value: {}", format_sig17(c.value));
    println!("error_estimate: {}", format_sig17(c.error_estimate));
    if let Some(s) = c.std_error {
        println!("std_error: {}", format_sig17(s));
    }
    if let Some(s) = c.seed {
        println!("seed: {s}");
    }
    if let Some(r) = c.rejected {
        println!("rejected: {r}");
    }
    println!("n_evals: {}", c.n_evals);
    println!("status: {}", c.status.as_str());
    println!("wall_ms: {}", c.wall_ms);
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::UnknownEntry(_) | Error::UnknownStep(_) => EXIT_UNKNOWN_ID,
        Error::Step { source, .. } => error_code(source),
        _ => EXIT_FAIL,
    }
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    error_code(e)
}

#[allow(clippy::too_many_arguments)]
fn cmd_compute(
    id: &str,
    tol: Option<f64>,
    rel_tol: Option<f64>,
    method: Option<Method>,
    mc_samples: Option<u64>,
    seed: Option<u64>,
    max_evals: Option<u64>,
    param: Option<f64>,
    json: Option<PathBuf>,
) -> u8 {
    let entry = match lookup(id) {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    if method == Some(Method::Mc) && seed.is_none() {
        eprintln!("error: --method mc requires --seed");
        return EXIT_USAGE;
    }
    let mut settings = Settings::for_dimension(entry.dimension);
    if tol.is_some() || rel_tol.is_some() {
        settings.abs_tol = tol.unwrap_or(0.0);
        settings.rel_tol = rel_tol.unwrap_or(0.0);
    }
    if let Some(n) = max_evals {
        settings.max_evals = n;
    }
    if let Some(n) = mc_samples {
        settings.mc_samples = n;
    }
    settings.seed = seed;
    let c = match compute(entry, param, method, &settings) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    print_computation(&c);
    if let Some(path) = json {
        let doc = serde_json::to_string_pretty(&c).expect("computation serializes") + "\n";
        if let Err(e) = std::fs::write(&path, doc) {
            return fail(&Error::from(e));
        }
    }
    if c.status.is_converged() {
        EXIT_PASS
    } else {
        eprintln!("warning: {} did not converge ({})", c.id, c.status.as_str());
        EXIT_NOT_CONVERGED
    }
}

fn cmd_verify(
    steps: Vec<String>,
    all: bool,
    rel_tol: Option<f64>,
    json: Option<PathBuf>,
    text: Option<PathBuf>,
) -> u8 {
    let selection: Vec<String> = if all {
        chain_steps().iter().map(|s| s.id.clone()).collect()
    } else {
        steps
    };
    let options = ChainOptions {
        tolerance: rel_tol,
        ..ChainOptions::default()
    };
    let report = match run_chain(&selection, &options) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let summary = emit_report(&report, ReportFormat::Text).expect("text report");
    print!("{summary}");
    for o in &report.steps {
        if o.status == StepStatus::Discrepancy {
            println!(
                "warning: {} is a documented discrepancy with factor {}",
                o.id, o.probe.best_factor
            );
        }
    }
    let written = match (json, text) {
        (Some(path), _) => write_report(&report, &path),
        (_, Some(path)) => std::fs::write(&path, &summary).map_err(Error::from),
        _ => Ok(()),
    };
    if let Err(e) = written {
        return fail(&e);
    }
    match report.verdict {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
    }
}

fn cmd_constants() -> u8 {
    for c in constants() {
        println!("{:<10} {}", c.name.as_str(), format_sig17(c.value));
    }
    for f in closed_forms() {
        let rendered = format_sig17(f.value);
        let digits = f
            .paper_digits
            .map(|d| format!("  matches paper digits: {}", matching_digits(&rendered, d)))
            .unwrap_or_default();
        println!("{:<10} {}  = {}{}", f.id.as_str(), rendered, f.expression, digits);
    }
    for row in consistency_audit() {
        println!(
            "audit {:<22} lhs={} rhs={} deviation={:.3e} factor={} residual={:.3e}",
            row.relation.as_str(),
            format_sig17(row.lhs),
            format_sig17(row.rhs),
            row.deviation,
            row.best_factor,
            row.residual
        );
    }
    EXIT_PASS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let code = match cli.command {
        Command::List { json, filter } => cmd_list(json, filter.as_deref()),
        Command::Compute {
            id,
            tol,
            rel_tol,
            method,
            mc_samples,
            seed,
            max_evals,
            param,
            json,
        } => cmd_compute(&id, tol, rel_tol, method, mc_samples, seed, max_evals, param, json),
        Command::Verify {
            steps,
            all,
            rel_tol,
            json,
            text,
        } => cmd_verify(steps, all, rel_tol, json, text),
        Command::Constants => cmd_constants(),
    };
    ExitCode::from(code)
}
