use levy_chaos::chaos::Centering;
use levy_chaos::jacobi::{
    create, fock_inner_product, jacobi_apply, multiply_first_order, operator_csv, vacuum_consistency, KernelVector,
};
use levy_chaos::lattice::{Domain, StepKernel};
use levy_chaos::levy_models::{meixner_model, meixner_model_with};
use levy_chaos::multiindex::{enumerate_up_to, MultiIndex};
use levy_chaos::orthopoly::from_meixner;
use levy_chaos::simulate::{seeded_realization, stream_rng, Pathwise, Realization};
use proptest::prelude::*;
use rand::Rng;

fn rand_kernel<R: Rng>(order: usize, cells: usize, rng: &mut R) -> StepKernel {
    StepKernel::from_fn(order, cells, |_| rng.random_range(-1.0..1.0))
}

fn rand_vector<R: Rng>(cells: usize, top: usize, max_order: usize, rng: &mut R) -> KernelVector {
    let mut v = KernelVector::zero(cells, max_order);
    for n in 0..=top {
        v.insert(rand_kernel(n, cells, rng)).unwrap();
    }
    v
}

#[test]
fn vacuum_iteration_is_multiplication() {
    let domain = Domain::uniform(1.0, vec![0.3, 0.5, 0.2]).unwrap();
    let phi = StepKernel::from_values(1, 3, vec![0.7, -0.4, 1.1]).unwrap();
    for (lambda, eps) in [(0.0, 0.4), (2.0, 0.3), (3.0, 0.0), (1.0, 0.4)] {
        let model = meixner_model_with(lambda, eps, 40).unwrap();
        let cen = Centering::for_model(&model).unwrap();
        for rep in 0..10 {
            let real = seeded_realization(&model, &domain, 31, rep).unwrap();
            for n in 1..=4 {
                let r = vacuum_consistency(&cen, &phi, n, &real, &domain, 1e-9).unwrap();
                assert!(r.pass, "λ={lambda} n={n}: {r:?}");
            }
        }
    }
    // single atom, λ=3
    let model = meixner_model(3.0).unwrap();
    let cen = Centering::for_model(&model).unwrap();
    let real = Realization::from_pairs(&[(5f64.sqrt() * 2.0, 0.4)], &domain);
    let r = vacuum_consistency(&cen, &phi, 2, &real, &domain, 1e-10).unwrap();
    assert!(r.residual <= 1e-10 * r.rhs.abs().max(1.0));
}

#[test]
fn operators_are_three_diagonal() {
    let domain = Domain::uniform(1.0, vec![0.3, 0.5, 0.2]).unwrap();
    let mut rng = stream_rng(3, 0);
    let phi = rand_kernel(1, 3, &mut rng);
    for n in 0..5 {
        let mut v = KernelVector::zero(3, 6);
        v.insert(rand_kernel(n, 3, &mut rng)).unwrap();
        let img = jacobi_apply(1.5, &phi, &v, &domain).unwrap();
        for (&m, f) in &img.components {
            if f.max_abs() > 0.0 {
                assert!(m + 1 >= n && m <= n + 1, "order {n} reached {m}");
            }
        }
    }
    let mut full = KernelVector::zero(3, 2);
    full.insert(rand_kernel(2, 3, &mut rng)).unwrap();
    assert!(jacobi_apply(1.0, &phi, &full, &domain).is_err());
}

#[test]
fn operators_commute() {
    let domain = Domain::uniform(1.0, vec![0.3, 0.5, 0.2]).unwrap();
    let mut rng = stream_rng(4, 0);
    for lambda in [0.0, 1.0, 2.0, 3.0] {
        for _ in 0..4 {
            let p1 = rand_kernel(1, 3, &mut rng);
            let p2 = rand_kernel(1, 3, &mut rng);
            let v = rand_vector(3, 3, 5, &mut rng);
            let a = jacobi_apply(lambda, &p1, &jacobi_apply(lambda, &p2, &v, &domain).unwrap(), &domain).unwrap();
            let b = jacobi_apply(lambda, &p2, &jacobi_apply(lambda, &p1, &v, &domain).unwrap(), &domain).unwrap();
            let scale = a.max_abs().max(1.0);
            assert!(a.max_abs_diff(&b) <= 1e-12 * scale, "λ={lambda}: {}", a.max_abs_diff(&b));
        }
    }
}

#[test]
fn operators_are_symmetric_in_the_fock_product() {
    let domain = Domain::uniform(1.0, vec![0.3, 0.5, 0.2]).unwrap();
    let mut rng = stream_rng(5, 0);
    for lambda in [0.0, 2.0, 3.0] {
        let table = from_meixner(lambda, 6).unwrap();
        let phi = rand_kernel(1, 3, &mut rng);
        let u = rand_vector(3, 2, 4, &mut rng);
        let v = rand_vector(3, 2, 4, &mut rng);
        let au = jacobi_apply(lambda, &phi, &u, &domain).unwrap();
        let av = jacobi_apply(lambda, &phi, &v, &domain).unwrap();
        let l = fock_inner_product(&au, &v, &table, &domain).unwrap();
        let r = fock_inner_product(&u, &av, &table, &domain).unwrap();
        assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0), "λ={lambda}: {l} vs {r}");
    }
}

#[test]
fn extra_factorial_weight_breaks_symmetry() {
    // Σ n!·⟨f_n, g_n⟩ on top of the Wick product is not the right weight
    let domain = Domain::uniform(1.0, vec![0.3, 0.5, 0.2]).unwrap();
    let table = from_meixner(2.0, 6).unwrap();
    let mut rng = stream_rng(11, 0);
    let phi = rand_kernel(1, 3, &mut rng);
    let weighted = |u: &KernelVector, v: &KernelVector| -> f64 {
        u.components
            .iter()
            .filter_map(|(n, f)| v.get(*n).map(|g| (n, f, g)))
            .map(|(n, f, g)| {
                let fact: f64 = (1..=*n).map(|i| i as f64).product();
                fact * levy_chaos::chaos::wick_inner_product(f, g, &table, &domain).unwrap()
            })
            .sum()
    };
    let u = rand_vector(3, 2, 4, &mut rng);
    let v = rand_vector(3, 2, 4, &mut rng);
    let l = weighted(&jacobi_apply(2.0, &phi, &u, &domain).unwrap(), &v);
    let r = weighted(&u, &jacobi_apply(2.0, &phi, &v, &domain).unwrap());
    assert!((l - r).abs() > 1e-3 * l.abs().max(1.0), "{l} vs {r}");
}

#[test]
fn creation_is_bilinear() {
    let mut rng = stream_rng(6, 0);
    let phi = rand_kernel(1, 3, &mut rng);
    let f = rand_kernel(2, 3, &mut rng);
    let g = rand_kernel(2, 3, &mut rng);
    let mut h = f.clone();
    h.axpy(-0.7, &g);
    let mut expect = create(&phi, &f).unwrap();
    expect.axpy(-0.7, &create(&phi, &g).unwrap());
    let got = create(&phi, &h).unwrap();
    for (a, b) in got.values.iter().zip(&expect.values) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn first_order_product_example() {
    let model = meixner_model(3.0).unwrap();
    let table = from_meixner(3.0, 6).unwrap();
    let domain = Domain::uniform(1.0, vec![2.0, 3.0]).unwrap();
    let pw = Pathwise::new(&model, &table, &domain).unwrap();
    let chi = StepKernel::indicator(0, 2);
    let out = multiply_first_order(&chi, &MultiIndex::unit(1), &chi, &pw).unwrap();
    let keys: Vec<String> = out.components.keys().map(|a| a.to_string()).collect();
    assert_eq!(keys, vec!["()", "(0,1)", "(1)", "(2)"]);
    assert!((out.components[&MultiIndex::empty()].scalar_value() - 2.0).abs() < 1e-12);
    assert_eq!(out.components[&MultiIndex::unit(1)], chi.scale(3.0));
    assert_eq!(out.components[&MultiIndex::new(vec![0, 1])], chi);
    assert_eq!(out.components[&MultiIndex::new(vec![2])], chi.tensor(&chi));

    let one = multiply_first_order(&chi, &MultiIndex::empty(), &StepKernel::scalar(1.0, 2), &pw).unwrap();
    assert_eq!(one.components.len(), 1);
    assert_eq!(one.components[&MultiIndex::unit(1)], chi);
}

#[test]
fn first_order_product_is_pathwise_exact_for_pascal() {
    let model = meixner_model(3.0).unwrap();
    let table = from_meixner(3.0, 6).unwrap();
    let domain = Domain::uniform(1.0, vec![5.0, 4.0, 6.0]).unwrap();
    let pw = Pathwise::new(&model, &table, &domain).unwrap();
    let mut rng = stream_rng(8, 0);
    for rep in 0..20 {
        let real = seeded_realization(&model, &domain, 41, rep).unwrap();
        let phi = rand_kernel(1, 3, &mut rng);
        for alpha in enumerate_up_to(4) {
            let f = rand_kernel(alpha.length(), 3, &mut rng);
            let out = multiply_first_order(&phi, &alpha, &f, &pw).unwrap();
            let lhs = pw.ito_integral(&real, &MultiIndex::unit(1), &phi).unwrap()
                * pw.ito_integral(&real, &alpha, &f).unwrap();
            let rhs = out.ito_sum(&real, &pw).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "α={alpha}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn first_order_product_holds_under_truncation() {
    let model = meixner_model_with(1.0, 0.4, 40).unwrap();
    let table = from_meixner(1.0, 6).unwrap();
    let domain = Domain::uniform(1.0, vec![0.3, 0.4]).unwrap();
    let pw = Pathwise::new(&model, &table, &domain).unwrap();
    let mut rng = stream_rng(9, 0);
    for rep in 0..5 {
        let real = seeded_realization(&model, &domain, 43, rep).unwrap();
        let phi = rand_kernel(1, 2, &mut rng);
        for alpha in enumerate_up_to(3) {
            let f = rand_kernel(alpha.length(), 2, &mut rng);
            let out = multiply_first_order(&phi, &alpha, &f, &pw).unwrap();
            let lhs = pw.ito_integral(&real, &MultiIndex::unit(1), &phi).unwrap()
                * pw.ito_integral(&real, &alpha, &f).unwrap();
            let rhs = out.ito_sum(&real, &pw).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "α={alpha}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn operator_dump_has_header_and_symmetric_pattern() {
    let domain = Domain::uniform(1.0, vec![0.5, 0.5]).unwrap();
    let phi = StepKernel::from_values(1, 2, vec![1.0, 0.5]).unwrap();
    let csv = operator_csv(2.0, &phi, &domain, 3).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("order_out,index_out,order_in,index_in,value"));
    assert!(csv.contains("\n1,0,0,,1e0\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn commutativity_on_random_vectors(seed in 0u64..10_000, lambda in 0.0f64..4.0) {
        let domain = Domain::uniform(1.0, vec![0.4, 0.6]).unwrap();
        let mut rng = stream_rng(seed, 0);
        let p1 = rand_kernel(1, 2, &mut rng);
        let p2 = rand_kernel(1, 2, &mut rng);
        let v = rand_vector(2, 2, 4, &mut rng);
        let a = jacobi_apply(lambda, &p1, &jacobi_apply(lambda, &p2, &v, &domain).unwrap(), &domain).unwrap();
        let b = jacobi_apply(lambda, &p2, &jacobi_apply(lambda, &p1, &v, &domain).unwrap(), &domain).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * a.max_abs().max(1.0));
    }
}
