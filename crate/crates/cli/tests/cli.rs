use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-chaos"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("levy-chaos-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn ortho_gamma_column() {
    let o = run(&["ortho", "--lambda", "2", "--max-order", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,a_n,b_n,norm_sq_n"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (n, row) in rows.iter().enumerate() {
        let a: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(a, 2.0 * (n + 1) as f64);
    }
}

#[test]
fn ortho_pascal_passes() {
    assert_eq!(run(&["ortho", "--lambda", "3", "--max-order", "10"]).status.code(), Some(0));
}

#[test]
fn malformed_config_exits_two() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, "lambda = 3\ncolour = blue\n").unwrap();
    let o = run(&["ortho", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
    assert_eq!(run(&["verify", "--suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["ortho", "--cells", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_and_flags_combine() {
    let path = scratch("ok.cfg");
    std::fs::write(&path, "# gamma\nlambda = 2\nsuite = coefficients\nmax_order = 4\n").unwrap();
    let o = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // flags override the file
    let o = run(&["ortho", "--config", path.to_str().unwrap(), "--lambda", "0"]);
    let first = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(first.starts_with("0,0,"), "{first}");
}

#[test]
fn verify_coefficients() {
    let o = run(&["verify", "--suite", "coefficients"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for line in text.lines() {
        for key in ["\"name\"", "\"target\"", "\"estimate\"", "\"tolerance\"", "\"pass\":true"] {
            assert!(line.contains(key), "{line}");
        }
    }
    assert!(text.lines().any(|l| l.starts_with("{\"name\":\"bell8\"")));
}

#[test]
fn verify_marginals_gamma() {
    let o = run(&["verify", "--suite", "marginals", "--lambda", "2", "--workers", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("\"name\":\"ks statistic\""));
}

#[test]
fn verify_genfun_symmetric() {
    let o = run(&["verify", "--suite", "genfun", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn failed_check_exits_one() {
    // dropping every jump below 1.5 visibly distorts the λ = 0 marginal
    let o = run(&["verify", "--suite", "marginals", "--lambda", "0", "--eps", "1.5"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("\"pass\":false"));
}

#[test]
fn suite_outside_its_domain_is_a_config_error() {
    assert_eq!(run(&["verify", "--suite", "isometry", "--lambda", "1"]).status.code(), Some(2));
}

#[test]
fn verify_is_byte_stable_across_workers() {
    let a = run(&["verify", "--suite", "wick-pathwise", "--workers", "1"]);
    let b = run(&["verify", "--suite", "wick-pathwise", "--workers", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_is_reproducible() {
    let (p, q) = (scratch("sim1.csv"), scratch("sim2.csv"));
    let (ap, aq) = (scratch("atoms1.csv"), scratch("atoms2.csv"));
    for (out, atoms, w) in [(&p, &ap, "1"), (&q, &aq, "3")] {
        let o = run(&[
            "simulate",
            "--lambda",
            "3",
            "--replicates",
            "500",
            "--workers",
            w,
            "--out",
            out.to_str().unwrap(),
            "--atoms-out",
            atoms.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    assert_eq!(std::fs::read(&ap).unwrap(), std::fs::read(&aq).unwrap());
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("replicate,atoms,jump_sum,x1,y2\n"));
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn simulate_pascal_atom_count() {
    // σ(X) = 1, so the mean count is −log(1−p_3)
    let o = run(&["simulate", "--lambda", "3", "--replicates", "10000", "--cells", "4", "--masses", "0.25,0.25,0.25,0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("\"pass\":true"), "{err}");
    assert!(err.contains("\"target\":0.1577"), "{err}");
}

#[test]
fn simulate_gamma_prints_bias_bound() {
    let o = run(&["simulate", "--lambda", "2", "--eps", "0.01", "--replicates", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("bias bound"), "{}", stderr(&o));
}
