use nalgebra::DMatrix;
use preserver_core::linalg::{eig_hermitian, random_hermitian, random_pure, seeded_rng, trace_norm};
use preserver_core::superop::{
    canonical_sep, conjugation, random_flag, superop_equal, trace_replacer, EQUAL_TOL,
};
use preserver_core::{ConjFlag, Isometry, SepForm, SuperOperator};
use proptest::prelude::*;
use rand::Rng;

fn random_superop(din: usize, dout: usize, seed: u64) -> SuperOperator {
    let mut rng = seeded_rng(seed);
    let coeff = DMatrix::from_fn(dout * dout, din * din, |_, _| rng.random_range(-1.0..1.0));
    SuperOperator::new(vec![din], vec![dout], coeff).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn apply_is_linear(seed in any::<u64>(), din in 1usize..=4, dout in 1usize..=4, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let phi = random_superop(din, dout, seed);
        let mut rng = seeded_rng(seed ^ 1);
        let x = random_hermitian(din, &mut rng).unwrap();
        let y = random_hermitian(din, &mut rng).unwrap();
        let lhs = phi.apply(&x.lin_comb(a, &y, b).unwrap()).unwrap();
        let rhs = phi.apply(&x).unwrap().lin_comb(a, &phi.apply(&y).unwrap(), b).unwrap();
        prop_assert!(lhs.distance(&rhs) <= 1e-10 * rhs.frobenius_norm().max(1.0));
    }

    #[test]
    fn sampling_the_action_recovers_coefficients(seed in any::<u64>(), din in 1usize..=4, dout in 1usize..=4) {
        let phi = random_superop(din, dout, seed);
        let again = SuperOperator::from_action(&[din], &[dout], |a| phi.apply(a)).unwrap();
        prop_assert!((again.coeff() - phi.coeff()).amax() <= 1e-12);
    }

    #[test]
    fn pure_preservers_contract_trace_norm(seed in any::<u64>(), m in 1usize..=3, extra in 0usize..=2, replace in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let n = m + extra;
        let phi = if replace {
            trace_replacer(&random_pure(n, &mut rng).unwrap(), &[m]).unwrap()
        } else {
            let flag = random_flag(&mut rng);
            conjugation(&Isometry::random(n, m, flag, &mut rng).unwrap()).unwrap()
        };
        let a = random_hermitian(m, &mut rng).unwrap();
        let image = trace_norm(&phi.apply(&a).unwrap()).unwrap();
        prop_assert!(image <= trace_norm(&a).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn isometric_conjugation_keeps_spectrum(seed in any::<u64>(), conj in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let flag = if conj { ConjFlag::ConjugateLinear } else { ConjFlag::Linear };
        let phi = conjugation(&Isometry::random(3, 2, flag, &mut rng).unwrap()).unwrap();
        let a = random_hermitian(2, &mut rng).unwrap();
        let mut want = eig_hermitian(&a).unwrap().values;
        want.push(0.0);
        want.sort_by(|x, y| y.total_cmp(x));
        let got = eig_hermitian(&phi.apply(&a).unwrap()).unwrap().values;
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-10);
        }
    }

    #[test]
    fn unitary_product_form_inverts(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3) {
        let mut rng = seeded_rng(seed);
        let form = SepForm::random(6, [m, n], &[], &mut rng).unwrap();
        let phi = canonical_sep(&form, [m, n]).unwrap();
        let inv = canonical_sep(&form.inverse().unwrap(), [m, n]).unwrap();
        let id = SuperOperator::identity(&[m, n]).unwrap();
        prop_assert!(superop_equal(&inv.compose(&phi).unwrap(), &id, EQUAL_TOL).unwrap().equal);
        prop_assert!(superop_equal(&phi.compose(&inv).unwrap(), &id, EQUAL_TOL).unwrap().equal);
    }
}
