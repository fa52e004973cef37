use nalgebra::DMatrix;
use num_complex::Complex64;
use preserver_core::linalg::{
    eig_hermitian, is_product_pure, partial_trace, partial_transpose, permute_factors, random_hermitian, random_pure,
    seeded_rng, swap_theta, tensor, trace_norm, CMatrix, HermitianOperator,
};
use preserver_core::FactorIndex;
use proptest::prelude::*;
use rand::Rng;

fn herm_defect(a: &HermitianOperator) -> f64 {
    let m = a.matrix();
    (m - m.adjoint()).norm()
}

fn with_dims(a: HermitianOperator, dims: &[usize]) -> HermitianOperator {
    a.set_dims(dims.to_vec()).unwrap()
}

fn rel_err(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Reduction onto factor `keep` of a bipartite `[m, n]` matrix by raw index sums.
fn raw_reduction(a: &CMatrix, m: usize, n: usize, keep: usize) -> CMatrix {
    if keep == 1 {
        DMatrix::from_fn(m, m, |i, j| (0..n).map(|k| a[(i * n + k, j * n + k)]).sum())
    } else {
        DMatrix::from_fn(n, n, |k, l| (0..m).map(|i| a[(i * n + k, i * n + l)]).sum())
    }
}

fn rank_one_projector(a: &CMatrix, tol: f64) -> bool {
    let tr: Complex64 = a.trace();
    (tr.re - 1.0).abs() <= tol && tr.im.abs() <= tol && (a * a - a).norm() <= tol
}

fn brute_product_pure(a: &CMatrix, m: usize, n: usize) -> bool {
    let tol = 1e-7;
    rank_one_projector(a, tol)
        && rank_one_projector(&raw_reduction(a, m, n, 1), tol)
        && rank_one_projector(&raw_reduction(a, m, n, 2), tol)
}

#[test]
fn product_purity_matches_index_sum_oracle() {
    let mut rng = seeded_rng(0x0b5e);
    let (mut yes, mut no) = (0, 0);
    for trial in 0..1000 {
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let a = match trial % 4 {
            0 => tensor(random_pure(m, &mut rng).unwrap().projection(), random_pure(n, &mut rng).unwrap().projection()),
            1 => random_pure(m * n, &mut rng).unwrap().projection().clone(),
            2 => {
                let p = random_pure(m * n, &mut rng).unwrap();
                let q = random_pure(m * n, &mut rng).unwrap();
                p.projection().lin_comb(0.7, q.projection(), 0.3).unwrap()
            }
            _ => {
                let x = tensor(random_pure(m, &mut rng).unwrap().projection(), random_pure(n, &mut rng).unwrap().projection());
                let y = tensor(random_pure(m, &mut rng).unwrap().projection(), random_pure(n, &mut rng).unwrap().projection());
                x.lin_comb(0.6, &y, 0.4).unwrap()
            }
        };
        let a = with_dims(a.without_dims(), &[m, n]);
        let got = is_product_pure(&a, 1e-8).unwrap();
        let want = brute_product_pure(a.matrix(), m, n);
        assert_eq!(got.is_some(), want, "trial {trial} dims [{m},{n}]");
        if let Some(factors) = got {
            yes += 1;
            let rebuilt = tensor(factors[0].projection(), factors[1].projection());
            assert!(rel_err(rebuilt.matrix(), a.matrix()) < 1e-7);
        } else {
            no += 1;
        }
    }
    // both branches must actually be exercised
    assert!(yes > 200 && no > 200, "yes {yes}, no {no}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn structural_ops_keep_hermiticity_and_trace(seed in any::<u64>(), m in 1usize..=2, n in 1usize..=2) {
        let mut rng = seeded_rng(seed);
        let a = with_dims(random_hermitian(m * n, &mut rng).unwrap(), &[m, n]);
        let tr = a.trace();
        let tol = 1e-10 * a.frobenius_norm().max(1.0);
        for which in 1..=2 {
            let idx = FactorIndex::new(which).unwrap();
            let pt = partial_trace(&a, idx).unwrap();
            prop_assert!(herm_defect(&pt) <= tol);
            prop_assert!((pt.trace() - tr).abs() <= tol);
            let tp = partial_transpose(&a, idx).unwrap();
            prop_assert!(herm_defect(&tp) <= tol);
            prop_assert!((tp.trace() - tr).abs() <= tol);
            prop_assert!(partial_transpose(&tp, idx).unwrap().distance(&a) <= tol);
        }
        let sw = swap_theta(&a).unwrap();
        prop_assert!(herm_defect(&sw) <= tol);
        prop_assert!((sw.trace() - tr).abs() <= tol);
        let b = with_dims(random_hermitian(m, &mut rng).unwrap(), &[m]);
        let c = with_dims(random_hermitian(n, &mut rng).unwrap(), &[n]);
        let t = tensor(&b, &c);
        prop_assert!(herm_defect(&t) <= tol * 10.0);
        prop_assert!((t.trace() - b.trace() * c.trace()).abs() <= 1e-10 * t.frobenius_norm().max(1.0));
    }

    #[test]
    fn permutations_keep_trace_and_compose(seed in any::<u64>(), d in proptest::collection::vec(1usize..=2, 3)) {
        let mut rng = seeded_rng(seed);
        let parts: Vec<HermitianOperator> =
            d.iter().map(|&k| with_dims(random_hermitian(k, &mut rng).unwrap(), &[k])).collect();
        let prod = tensor(&tensor(&parts[0], &parts[1]), &parts[2]);
        let pi = [2usize, 3, 1];
        let sigma = [3usize, 1, 2];
        let once = permute_factors(&prod, &pi).unwrap();
        prop_assert!(herm_defect(&once) <= 1e-12);
        prop_assert!((once.trace() - prod.trace()).abs() <= 1e-10 * prod.frobenius_norm().max(1.0));
        let expect = tensor(&tensor(&parts[1], &parts[2]), &parts[0]);
        prop_assert!(once.distance(&expect) <= 1e-12);
        // θ_π ∘ θ_σ = θ_{σ∘π}, with (σ∘π)_j = σ_{π_j}
        let composed: Vec<usize> = pi.iter().map(|&p| sigma[p - 1]).collect();
        let two = permute_factors(&permute_factors(&prod, &sigma).unwrap(), &pi).unwrap();
        prop_assert!(two.distance(&permute_factors(&prod, &composed).unwrap()) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), m in 1usize..=4, n in 1usize..=4) {
        let mut rng = seeded_rng(seed);
        let a = with_dims(random_hermitian(m, &mut rng).unwrap(), &[m]);
        let b = with_dims(random_hermitian(n, &mut rng).unwrap(), &[n]);
        let ab = tensor(&a, &b);
        let first = partial_trace(&ab, FactorIndex::new(1).unwrap()).unwrap();
        prop_assert!(rel_err(first.matrix(), &b.scale(a.trace()).into_matrix()) <= 1e-10);
        let second = partial_trace(&ab, FactorIndex::new(2).unwrap()).unwrap();
        prop_assert!(rel_err(second.matrix(), &a.scale(b.trace()).into_matrix()) <= 1e-10);
    }

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), d in 1usize..=12) {
        let a = random_hermitian(d, &mut seeded_rng(seed)).unwrap();
        let e = eig_hermitian(&a).unwrap();
        prop_assert!((e.reconstruct() - a.matrix()).norm() <= 1e-10 * a.frobenius_norm().max(1.0));
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let gram = e.vectors.adjoint() * &e.vectors;
        prop_assert!((gram - CMatrix::identity(d, d)).norm() <= 1e-10);
    }

    #[test]
    fn trace_norm_is_subadditive(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = seeded_rng(seed);
        let a = random_hermitian(d, &mut rng).unwrap();
        let b = random_hermitian(d, &mut rng).unwrap();
        let sum = trace_norm(&a.lin_comb(1.0, &b, 1.0).unwrap()).unwrap();
        let bound = trace_norm(&a).unwrap() + trace_norm(&b).unwrap();
        prop_assert!(sum <= bound * (1.0 + 1e-12));
        prop_assert!(trace_norm(&a).unwrap() + 1e-12 >= a.trace().abs());
    }
}
