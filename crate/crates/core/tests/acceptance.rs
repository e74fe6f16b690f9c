//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! that the lines come out in order; exits nonzero if any criterion fails.

use std::time::Instant;

use levy_chaos::config::{RunConfig, Suite};
use levy_chaos::exact;
use levy_chaos::levy_models::meixner_model;
use levy_chaos::orthopoly::{from_meixner, from_moments};
use levy_chaos::verify::{run_suite, CheckRecord, SuiteReport};
use levy_chaos::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_reports(reports: &[SuiteReport]) -> Outcome {
    let checks: usize = reports.iter().map(|r| r.records.len()).sum();
    let failed: Vec<&CheckRecord> = reports.iter().flat_map(|r| r.failures()).collect();
    let detail = match failed.first() {
        None => format!("{checks} checks"),
        Some(f) => format!(
            "{} of {checks} checks failed, first: {} estimate {} target {} tol {}",
            failed.len(),
            f.name,
            f.estimate,
            f.target,
            f.tolerance
        ),
    };
    Outcome { pass: failed.is_empty(), detail }
}

fn config(lambda: f64) -> RunConfig {
    RunConfig {
        lambda,
        ..RunConfig::default()
    }
}

fn suites(runs: &[(Suite, RunConfig)]) -> Result<Outcome> {
    let reports = runs
        .iter()
        .map(|(s, c)| run_suite(*s, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(from_reports(&reports))
}

fn recurrence_recovery() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 1.0, 2.0, 3.0] {
        let moments = meixner_model(lambda)?.exact_tilted_moments(23)?;
        let t = from_moments(&moments, 11)?;
        for n in 0..=10 {
            let a = lambda * (n + 1) as f64;
            worst = worst.max((t.a[n] - a).abs() / a.abs().max(1.0));
            if n > 0 {
                let b = (n * (n + 1)) as f64;
                worst = worst.max((t.b[n] - b).abs() / b);
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative error {worst:.3e}"),
    })
}

fn norms() -> Result<Outcome> {
    let mut bad = 0;
    for lambda in [0.0, 1.0, 2.0, 3.0] {
        let t = from_meixner(lambda, 11)?;
        // ‖P̃_n‖² = ‖P_{n+1}‖²
        for n in 0..=10 {
            let expect = exact::factorial_rat(n) * exact::factorial_rat(n + 1);
            if *t.norm_sq_exact(n + 1) != expect || !exact::is_integer(&expect) {
                bad += 1;
            }
        }
    }
    Ok(Outcome {
        pass: bad == 0,
        detail: format!("{bad} mismatches over 44 norms"),
    })
}

fn marginal_config(lambda: f64) -> RunConfig {
    RunConfig {
        sigma_delta: 1.0,
        replicates: 100_000,
        ..config(lambda)
    }
}

fn determinism() -> Result<Outcome> {
    let mut mismatched = Vec::new();
    for suite in Suite::ALL {
        let base = RunConfig {
            replicates: 2_000,
            ..config(3.0)
        };
        let mut outputs = Vec::new();
        for workers in [1, 2, 8] {
            let mut first = None;
            for _ in 0..2 {
                let cfg = RunConfig { workers, ..base.clone() };
                let text = run_suite(suite, &cfg)?.to_jsonl();
                if let Some(ref f) = first {
                    if *f != text {
                        mismatched.push(format!("{suite} repeat w={workers}"));
                    }
                }
                first = Some(text);
            }
            outputs.push(first.unwrap());
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            mismatched.push(suite.to_string());
        }
    }
    Ok(Outcome {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} suites identical across 1, 2, 8 workers", Suite::ALL.len())
        } else {
            format!("differing: {}", mismatched.join(", "))
        },
    })
}

fn main() {
    // libtest passes flags such as --nocapture or a filter; nothing to do with them.
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome>>)> = vec![
        ("recurrence recovery from exact moments", Box::new(recurrence_recovery)),
        ("Meixner norms are n!(n+1)!", Box::new(norms)),
        (
            "partition counts, sector counts and Bell sums",
            Box::new(|| suites(&[(Suite::Coefficients, config(3.0))])),
        ),
        (
            "marginal laws (KS for gamma, chi-square for Pascal)",
            Box::new(|| {
                suites(&[
                    (Suite::Marginals, marginal_config(2.0)),
                    (Suite::Marginals, marginal_config(3.0)),
                ])
            }),
        ),
        (
            "isometry and orthogonality by Monte Carlo",
            Box::new(|| {
                let cfg = RunConfig {
                    replicates: 100_000,
                    workers: 8,
                    ..config(3.0)
                };
                suites(&[(Suite::Isometry, cfg.clone()), (Suite::Orthogonality, cfg)])
            }),
        ),
        (
            "generating function partial sums",
            Box::new(|| {
                suites(&[0.0, 1.0, 2.0, 3.0].map(|l| (Suite::Genfun, config(l))))
            }),
        ),
        (
            "pathwise Wick expansion",
            Box::new(|| suites(&[(Suite::WickPathwise, RunConfig { workers: 8, ..config(3.0) })])),
        ),
        (
            "Jacobi field consistency and product formula",
            Box::new(|| {
                let mut runs: Vec<(Suite, RunConfig)> =
                    [0.0, 2.0, 3.0].map(|l| (Suite::Jacobi, RunConfig { workers: 8, ..config(l) })).into();
                runs.push((
                    Suite::ProductFormula,
                    RunConfig {
                        workers: 8,
                        replicates: 20_000,
                        ..config(3.0)
                    },
                ));
                suites(&runs)
            }),
        ),
        ("determinism across worker counts", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} ({detail}; {:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
