use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levy_chaos::config::{RunConfig, Suite};
use levy_chaos::exact;
use levy_chaos::levy_models::{levy_total_mass, meixner_model, DEFAULT_EPS};
use levy_chaos::multiindex::coefficient_csv;
use levy_chaos::orthopoly::{from_meixner, from_model};
use levy_chaos::simulate::{seeded_realization, Executor, MCReport, Pathwise};
use levy_chaos::verify::run_suite;
use levy_chaos::Error;

/// Chaotic decompositions for Meixner-type Lévy noise: tables, dumps and
/// verification suites.
#[derive(Parser, Debug)]
#[command(name = "levy-chaos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recurrence table from exact moments, cross-checked against the
    /// Meixner closed form.
    Ortho(Common),
    /// R, K and C constants for all multi-indices up to weight max-order.
    Coeffs(Common),
    /// Seeded realizations and per-replicate functionals.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also dump every atom as replicate,s,x.
        #[arg(long)]
        atoms_out: Option<PathBuf>,
    },
    /// Run one verification suite and emit its JSON records.
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// key = value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    /// Comma-separated σ-mass per cell.
    #[arg(long)]
    masses: Option<String>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    sigma_delta: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Exit 1: a check did not hold.
    Check(String),
    /// Exit 2: bad input.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Config(_) | Error::Domain(_) | Error::Range(_) | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

impl Common {
    fn run_config(&self) -> std::result::Result<RunConfig, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let mut set = |key: &str, v: Option<String>| -> std::result::Result<(), Failure> {
            match v {
                Some(v) => Ok(cfg.set(key, &v)?),
                None => Ok(()),
            }
        };
        set("lambda", self.lambda.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("replicates", self.replicates.map(|v| v.to_string()))?;
        set("eps", self.eps.map(|v| v.to_string()))?;
        set("cells", self.cells.map(|v| v.to_string()))?;
        set("masses", self.masses.clone())?;
        set("suite", self.suite.clone())?;
        set("max_order", self.max_order.map(|v| v.to_string()))?;
        set("workers", self.workers.map(|v| v.to_string()))?;
        set("sigma_delta", self.sigma_delta.map(|v| v.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> CmdResult {
        write_to(self.out.as_ref(), text)
    }
}

fn write_to(path: Option<&PathBuf>, text: &str) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ortho(c: &Common) -> CmdResult {
    let cfg = c.run_config()?;
    let n = cfg.max_order;
    let model = meixner_model(cfg.lambda)?;
    let table = from_model(&model, n)?;
    let reference = from_meixner(cfg.lambda, n)?;
    c.emit(&table.to_csv())?;
    let mut problems = Vec::new();
    for k in 0..n {
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        if rel(table.a[k], reference.a[k]) > 1e-8 {
            problems.push(format!("a_{k} = {} vs {}", table.a[k], reference.a[k]));
        }
        if k > 0 && rel(table.b[k], reference.b[k]) > 1e-8 {
            problems.push(format!("b_{k} = {} vs {}", table.b[k], reference.b[k]));
        }
        let norm = exact::factorial_rat(k) * exact::factorial_rat(k + 1);
        if *reference.norm_sq_exact(k + 1) != norm {
            problems.push(format!("‖P̃_{k}‖² is not {k}!({k}+1)!"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(problems.join("; ")))
    }
}

fn coeffs(c: &Common) -> CmdResult {
    let cfg = c.run_config()?;
    let table = from_meixner(cfg.lambda, cfg.max_order)?;
    c.emit(&coefficient_csv(cfg.max_order, &table.norms_sq_exact)?)
}

fn simulate(c: &Common, atoms_out: Option<&PathBuf>) -> CmdResult {
    let cfg = c.run_config()?;
    let model = cfg.model(DEFAULT_EPS)?;
    let domain = cfg.domain()?;
    let table = from_meixner(cfg.lambda, 2)?;
    let pw = Pathwise::new(&model, &table, &domain)?;
    let exec = Executor::from_workers(cfg.workers);
    let all: Vec<usize> = (0..domain.cells()).collect();
    let rows = exec.map(cfg.replicates, |i| {
        let real = seeded_realization(&model, &domain, cfg.seed, i as u64)?;
        let x1 = pw.teugels_measure(&real, 1, &all)?;
        let y2 = pw.ortho_measure(&real, 2, &all)?;
        Ok::<_, Error>((real, x1, y2))
    });
    let mut csv = String::from("replicate,atoms,jump_sum,x1,y2\n");
    let mut atoms = String::from("replicate,s,x\n");
    let mut counts = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let (real, x1, y2) = row?;
        let sum: f64 = real.atoms.iter().map(|a| a.s).sum();
        let _ = writeln!(csv, "{i},{},{sum},{x1},{y2}", real.atoms.len());
        for a in &real.atoms {
            let _ = writeln!(atoms, "{i},{},{}", a.s, a.x);
        }
        counts.push(real.atoms.len() as f64);
    }
    c.emit(&csv)?;
    if let Some(p) = atoms_out {
        write_to(Some(p), &atoms)?;
    }
    let eps = model.truncation_eps;
    let expected = levy_total_mass(&model, eps)? * domain.total_mass();
    let report = MCReport::from_samples(&counts, Some(expected))?;
    eprintln!("atom count {}", report.to_json());
    if eps > 0.0 {
        let b = model.bias_bound(eps)?;
        eprintln!(
            "truncation eps = {eps}: bias bound ∫_{{|s|≤ε}}|s|ν(ds) = {} per unit σ, L² error² = {}",
            b.l1, b.l2_sq
        );
    }
    Ok(())
}

fn verify(c: &Common) -> CmdResult {
    let cfg = c.run_config()?;
    let suite: Suite = cfg
        .suite
        .ok_or_else(|| Failure::Usage("verify needs --suite or suite = … in the config".into()))?;
    let report = run_suite(suite, &cfg)?;
    c.emit(&report.to_jsonl())?;
    let failures = report.failures();
    if failures.is_empty() {
        Ok(())
    } else {
        let names: Vec<&str> = failures.iter().map(|r| r.name.as_str()).collect();
        Err(Failure::Check(format!("{} failed: {}", suite, names.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ortho(c) => ortho(c),
        Command::Coeffs(c) => coeffs(c),
        Command::Simulate { common, atoms_out } => simulate(common, atoms_out.as_ref()),
        Command::Verify(c) => verify(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
