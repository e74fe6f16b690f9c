use levy_chaos::chaos::{marginal_gof, pair, wick_kernels, Centering};
use levy_chaos::jacobi::multiply_first_order;
use levy_chaos::lattice::{inner_product, Domain, StepKernel};
use levy_chaos::levy_models::{levy_total_mass, meixner_model, meixner_model_with, pascal_p, DEFAULT_MAX_MOMENT_ORDER};
use levy_chaos::multiindex::MultiIndex;
use levy_chaos::orthopoly::from_meixner;
use levy_chaos::simulate::{
    marginal_samples, mc_estimate, replicate_map, sample_realization, stream_rng, Executor, MCReport, Pathwise,
};
use rand::Rng;

const PAR: Executor = Executor::Parallel { workers: 4 };

fn unit_grid() -> Domain {
    Domain::uniform(1.0, vec![0.25; 4]).unwrap()
}

fn assert_within(r: &MCReport, what: &str) {
    assert!(r.within(4.0), "{what}: {} ± {} vs {:?}", r.estimate, r.std_error, r.target);
}

#[test]
fn pascal_atom_count() {
    let model = meixner_model(3.0).unwrap();
    let target = levy_total_mass(&model, 0.0).unwrap();
    assert!((target + (-pascal_p(3.0)).ln_1p()).abs() < 1e-12);
    let r = mc_estimate(&model, &unit_grid(), 100_000, 1, PAR, Some(target), |r| r.atoms.len() as f64).unwrap();
    assert_within(&r, "atom count");
}

#[test]
fn gamma_atom_count_above_one() {
    let model = meixner_model_with(2.0, 1.0, DEFAULT_MAX_MOMENT_ORDER).unwrap();
    let r = mc_estimate(&model, &unit_grid(), 100_000, 2, PAR, Some(0.21938), |r| r.atoms.len() as f64).unwrap();
    assert_within(&r, "atom count");
}

#[test]
fn orthogonalized_measure_moments() {
    let model = meixner_model(3.0).unwrap();
    let table = from_meixner(3.0, 4).unwrap();
    let domain = Domain::uniform(1.0, vec![1.0, 1.5]).unwrap();
    let pw = Pathwise::new(&model, &table, &domain).unwrap();
    let rows = replicate_map(PAR, 100_000, 3, |rng, _| {
        let real = sample_realization(&model, &domain, rng).unwrap();
        let y1 = pw.ortho_measure(&real, 1, &[0, 1]).unwrap();
        let y2 = pw.ortho_measure(&real, 2, &[0, 1]).unwrap();
        (y1, y2)
    });
    let col = |f: &dyn Fn(&(f64, f64)) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let sigma = 2.5;
    assert_within(&MCReport::from_samples(&col(&|r| r.0), Some(0.0)).unwrap(), "E[Y1]");
    assert_within(&MCReport::from_samples(&col(&|r| r.0 * r.1), Some(0.0)).unwrap(), "E[Y1 Y2]");
    // ‖P_1‖² = 1, ‖P_2‖² = 2
    assert_within(&MCReport::from_samples(&col(&|r| r.0 * r.0), Some(sigma)).unwrap(), "E[Y1²]");
    assert_within(&MCReport::from_samples(&col(&|r| r.1 * r.1), Some(2.0 * sigma)).unwrap(), "E[Y2²]");
}

fn mean_and_var(xs: &[f64]) -> (MCReport, f64) {
    let r = MCReport::from_samples(xs, None).unwrap();
    let var = xs.iter().map(|x| (x - r.estimate).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (r, var)
}

#[test]
fn gamma_marginal_means() {
    let model = meixner_model(2.0).unwrap();
    for sigma in [1.0, 2.0] {
        let xs = marginal_samples(&model, sigma, 50_000, 4, PAR).unwrap();
        let (mut r, var) = mean_and_var(&xs);
        r.target = Some(sigma);
        assert_within(&r, "gamma mean");
        assert!((var / sigma - 1.0).abs() < 0.05, "σ={sigma}: var {var}");
    }
}

#[test]
fn symmetric_marginal_is_centered_with_variance_sigma() {
    let model = meixner_model_with(0.0, 1e-3, DEFAULT_MAX_MOMENT_ORDER).unwrap();
    let xs = marginal_samples(&model, 1.5, 50_000, 5, PAR).unwrap();
    let (mut r, var) = mean_and_var(&xs);
    r.target = Some(0.0);
    assert_within(&r, "mean");
    assert!((var / 1.5 - 1.0).abs() < 0.05, "var {var}");
}

#[test]
fn meixner_marginal_passes_ks() {
    let model = meixner_model_with(1.0, 1e-3, DEFAULT_MAX_MOMENT_ORDER).unwrap();
    let xs = marginal_samples(&model, 1.0, 100_000, 6, PAR).unwrap();
    let g = marginal_gof(&model, 1.0, &xs).unwrap();
    assert!(g.pass, "{g:?}");
    assert_eq!(g.test, "ks");
}

#[test]
fn pascal_marginal_passes_chi_square() {
    let model = meixner_model(3.0).unwrap();
    let xs = marginal_samples(&model, 1.0, 100_000, 7, PAR).unwrap();
    let g = marginal_gof(&model, 1.0, &xs).unwrap();
    assert!(g.pass, "{g:?}");
    assert!(g.dof.unwrap() >= 1);
}

#[test]
fn wick_powers_of_different_order_are_orthogonal() {
    let model = meixner_model(3.0).unwrap();
    let domain = Domain::uniform(1.0, vec![1.0, 1.0, 1.0]).unwrap();
    let cen = Centering::for_model(&model).unwrap();
    let mut rng = stream_rng(8, u64::MAX);
    let f1 = StepKernel::from_fn(1, 3, |_| rng.random_range(-1.0..1.0));
    let f2 = StepKernel::from_fn(2, 3, |_| rng.random_range(-1.0..1.0)).symmetrize();
    let rows = replicate_map(PAR, 100_000, 8, |rng, _| {
        let real = sample_realization(&model, &domain, rng).unwrap();
        let w = wick_kernels(&real, &cen, 2).unwrap();
        (pair(&w[1], &f1, &real, &domain).unwrap(), pair(&w[2], &f2, &real, &domain).unwrap())
    });
    let prod: Vec<f64> = rows.iter().map(|r| r.0 * r.1).collect();
    let first: Vec<f64> = rows.iter().map(|r| r.0).collect();
    assert_within(&MCReport::from_samples(&prod, Some(0.0)).unwrap(), "E[W1 W2]");
    assert_within(&MCReport::from_samples(&first, Some(0.0)).unwrap(), "E[W1]");
}

#[test]
fn product_expectation_is_the_constant_term() {
    let model = meixner_model(3.0).unwrap();
    let table = from_meixner(3.0, 6).unwrap();
    let domain = Domain::uniform(1.0, vec![0.8, 1.2]).unwrap();
    let pw = Pathwise::new(&model, &table, &domain).unwrap();
    let phi = StepKernel::from_fn(1, 2, |c| [0.7, -0.4][c[0]]);
    for alpha in [MultiIndex::unit(1), MultiIndex::unit(2)] {
        let f = StepKernel::from_fn(1, 2, |c| [0.5, 1.1][c[0]]);
        let constant = multiply_first_order(&phi, &alpha, &f, &pw)
            .unwrap()
            .components
            .get(&MultiIndex::empty())
            .map(|k| k.scalar_value())
            .unwrap_or(0.0);
        // E[Y1(φ) Y_k(f)] = δ_{k1}‖P_1‖²⟨φ,f⟩
        let oracle = if alpha == MultiIndex::unit(1) { inner_product(&phi, &f, &domain).unwrap() } else { 0.0 };
        assert!((constant - oracle).abs() < 1e-12, "{alpha}: {constant} vs {oracle}");
        let r = mc_estimate(&model, &domain, 100_000, 9, PAR, Some(oracle), |real| {
            pw.ito_integral(real, &MultiIndex::unit(1), &phi).unwrap() * pw.ito_integral(real, &alpha, &f).unwrap()
        })
        .unwrap();
        assert_within(&r, &alpha.to_string());
    }
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let model = meixner_model(2.0).unwrap();
    let domain = unit_grid();
    let run = |exec| {
        mc_estimate(&model, &domain, 5_000, 10, exec, None, |r| r.atoms.iter().map(|a| a.s * a.x).sum()).unwrap()
    };
    let base = run(Executor::Sequential);
    for workers in [2, 3, 8] {
        let r = run(Executor::Parallel { workers });
        assert_eq!(r.estimate.to_bits(), base.estimate.to_bits());
        assert_eq!(r.std_error.to_bits(), base.std_error.to_bits());
    }
}
