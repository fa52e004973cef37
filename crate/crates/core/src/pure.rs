//! Single-factor pure-state preservers: every such map is either a trace
//! replacer `A ↦ Tr(A)R` or an isometric conjugation `A ↦ VAV*` / `A ↦ VAᵗV*`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{check_tol, Error, Result};
use crate::linalg::{is_pure, random_pure, seeded_rng, CMatrix, CVector, HermitianOperator, PureState, PURITY_TOL};
use crate::superop::{
    conjugation, superop_equal, trace_replacer, BasisLabel, ConjFlag, HermitianBasis, Isometry, SuperOperator,
};

/// Random pure states tried after the deterministic witness family.
pub const RANDOM_WITNESS_TRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Tolerance for purity tests and for the final coefficient comparison.
    pub tol: f64,
    /// Seed for the random part of witness searches.
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol: PURITY_TOL, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PureClassification {
    TraceReplacer { r: PureState, residual: f64 },
    Conjugation { u: Isometry, residual: f64 },
    /// `witness` is pure, its image is not.
    NotPreserver { witness: PureState },
}

impl PureClassification {
    pub fn kind(&self) -> &'static str {
        match self {
            PureClassification::TraceReplacer { .. } => "trace_replacer",
            PureClassification::Conjugation { .. } => "conjugation",
            PureClassification::NotPreserver { .. } => "not_preserver",
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self {
            PureClassification::TraceReplacer { residual, .. } | PureClassification::Conjugation { residual, .. } => {
                Some(*residual)
            }
            PureClassification::NotPreserver { .. } => None,
        }
    }

    /// Canonical superoperator of a positive verdict.
    pub fn reconstruct(&self, in_dim: usize) -> Result<SuperOperator> {
        match self {
            PureClassification::TraceReplacer { r, .. } => trace_replacer(r, &[in_dim]),
            PureClassification::Conjugation { u, .. } => conjugation(u),
            PureClassification::NotPreserver { .. } => {
                Err(Error::Contract("a non-preserver has no canonical form".into()))
            }
        }
    }
}

/// Classifies a map between single factors `[m] -> [n]`.
///
/// Positive answers are always backed by a coefficient-level comparison with
/// the reconstructed canonical map. Negative answers carry a pure state whose
/// image fails the purity test; if no witness is found among the deterministic
/// family and the seeded random states, the result is [`Error::Inconclusive`].
pub fn classify_pure_preserver(phi: &SuperOperator, opts: &ClassifyOptions) -> Result<PureClassification> {
    check_tol(opts.tol)?;
    if phi.in_dims().len() != 1 || phi.out_dims().len() != 1 {
        return Err(Error::Structure(format!(
            "single-factor classifier given {:?} -> {:?}; use the separable classifier",
            phi.in_dims(),
            phi.out_dims()
        )));
    }
    let m = phi.in_dim();
    let images: Vec<HermitianOperator> = (0..m)
        .map(|k| phi.apply(&HermitianOperator::diagonal_unit(m, k)))
        .collect::<Result<_>>()?;

    if let Some(r) = is_pure(&images[0], opts.tol)? {
        let cand = trace_replacer(&r, &[m])?.with_dims(vec![m], phi.out_dims().to_vec())?;
        let cmp = superop_equal(&cand, phi, opts.tol)?;
        if cmp.equal {
            return Ok(PureClassification::TraceReplacer { r, residual: cmp.max_deviation });
        }
    }

    if let Some(u) = extract_isometry(phi, &images, opts.tol)? {
        let cand = conjugation(&u)?.with_dims(vec![m], phi.out_dims().to_vec())?;
        let cmp = superop_equal(&cand, phi, opts.tol)?;
        if cmp.equal {
            return Ok(PureClassification::Conjugation { u, residual: cmp.max_deviation });
        }
    }

    match find_pure_witness(phi, opts)? {
        Some(witness) => Ok(PureClassification::NotPreserver { witness }),
        None => Err(Error::Inconclusive(format!(
            "no canonical form matched within {:e} and no witness found",
            opts.tol
        ))),
    }
}

fn extract_isometry(phi: &SuperOperator, images: &[HermitianOperator], tol: f64) -> Result<Option<Isometry>> {
    let m = phi.in_dim();
    let n = phi.out_dim();
    if m > n {
        return Ok(None);
    }
    let mut qs = Vec::with_capacity(m);
    for img in images {
        match is_pure(img, tol)? {
            Some(q) => qs.push(q.vector().clone()),
            None => return Ok(None),
        }
    }
    let basis = HermitianBasis::new(m);
    let i_unit = Complex64::new(0.0, 1.0);
    let mut v = CMatrix::zeros(n, m);
    v.set_column(0, &qs[0]);
    let mut flag = None;
    for j in 1..m {
        let x = phi.apply(&basis.element(basis.index_of(BasisLabel::Symmetric(0, j))))?;
        let mx = x.matrix().scale(SQRT_2);
        // for orthonormal q0, qj and vj = e^{iφ} qj: q0† (√2 Φ(X_0j)) qj = e^{-iφ}
        let c = qs[0].dotc(&(&mx * &qs[j]));
        if c.norm() < 0.5 {
            return Ok(None);
        }
        let phase = c.conj() / c.norm();
        let vj: CVector = &qs[j] * phase;
        v.set_column(j, &vj);

        let y = phi.apply(&basis.element(basis.index_of(BasisLabel::Antisymmetric(0, j))))?;
        let v0 = v.column(0).into_owned();
        let expected = (&v0 * vj.adjoint() - &vj * v0.adjoint()).map(|z| z * i_unit);
        let my = y.matrix().scale(SQRT_2);
        let s = (&expected * &my).trace().re / (&expected * &expected).trace().re;
        let this = if s > 0.5 {
            ConjFlag::Linear
        } else if s < -0.5 {
            ConjFlag::ConjugateLinear
        } else {
            return Ok(None);
        };
        if flag.is_some_and(|f| f != this) {
            return Ok(None);
        }
        flag = Some(this);
    }
    match Isometry::new(v, flag.unwrap_or(ConjFlag::Linear)) {
        Ok(u) => Ok(Some(u)),
        Err(Error::NotIsometry(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Deterministic witness candidates on dimension `d`: `E_kk`, then
/// `½(e_k+e_l)(e_k+e_l)*`, then `½(e_k+ie_l)(e_k+ie_l)*`.
pub fn witness_family(d: usize) -> Vec<PureState> {
    let mut out: Vec<PureState> = (0..d).map(|k| PureState::basis(d, k)).collect();
    for phase in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
        for k in 0..d {
            for l in (k + 1)..d {
                let mut v = CVector::zeros(d);
                v[k] = Complex64::new(1.0, 0.0);
                v[l] = phase;
                out.push(PureState::from_vector(v).expect("nonzero vector"));
            }
        }
    }
    out
}

fn find_pure_witness(phi: &SuperOperator, opts: &ClassifyOptions) -> Result<Option<PureState>> {
    let m = phi.in_dim();
    let fails = |p: &PureState| -> Result<bool> { Ok(is_pure(&phi.apply(p.projection())?, opts.tol)?.is_none()) };
    for p in witness_family(m) {
        if fails(&p)? {
            return Ok(Some(p));
        }
    }
    let mut rng = seeded_rng(opts.seed);
    for _ in 0..RANDOM_WITNESS_TRIES {
        let p = random_pure(m, &mut rng)?;
        if fails(&p)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub enum McOutcome {
    Pass,
    Fail { witness: PureState },
}

impl McOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, McOutcome::Pass)
    }
}

/// Monte-Carlo purity check on `samples` Haar-random pure inputs.
pub fn mc_verify_pure(phi: &SuperOperator, samples: usize, seed: u64, tol: f64) -> Result<McOutcome> {
    check_tol(tol)?;
    let m = phi.in_dim();
    let mut rng = seeded_rng(seed);
    for _ in 0..samples {
        let p = random_pure(m, &mut rng)?;
        if is_pure(&phi.apply(p.projection())?, tol)?.is_none() {
            return Ok(McOutcome::Fail { witness: p });
        }
    }
    Ok(McOutcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_pure_seeded;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    #[test]
    fn trace_replacer_round_trip() {
        let r = random_pure_seeded(3, 21).unwrap();
        let phi = trace_replacer(&r, &[2]).unwrap();
        match classify_pure_preserver(&phi, &opts()).unwrap() {
            PureClassification::TraceReplacer { r: got, residual } => {
                assert!(got.infidelity(&r) < 1e-12);
                assert!(residual <= 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transpose_is_conjugate_linear_identity() {
        let phi = conjugation(&Isometry::identity(3, ConjFlag::ConjugateLinear)).unwrap();
        match classify_pure_preserver(&phi, &opts()).unwrap() {
            PureClassification::Conjugation { u, .. } => {
                assert_eq!(u.flag(), ConjFlag::ConjugateLinear);
                assert!((u.matrix() - CMatrix::identity(3, 3)).norm() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetrized_transpose_is_rejected_with_sigma_y_witness() {
        let phi = SuperOperator::from_action(&[2], &[2], |a| {
            Ok(a.lin_comb(0.5, &a.transpose(), 0.5)?)
        })
        .unwrap();
        match classify_pure_preserver(&phi, &opts()).unwrap() {
            PureClassification::NotPreserver { witness } => {
                // ½(e_0 + i e_1)(…)* = ½(I + σ_y), image ½I
                let img = phi.apply(witness.projection()).unwrap();
                assert!(img.distance(&HermitianOperator::identity(2).scale(0.5)) < 1e-12);
                assert!(is_pure(&img, 1e-8).unwrap().is_none());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(!mc_verify_pure(&phi, 100, 0, 1e-8).unwrap().passed());
    }

    #[test]
    fn recovers_random_isometries() {
        let mut rng = seeded_rng(22);
        for (m, n) in [(2, 2), (2, 4), (3, 5), (4, 4)] {
            for flag in [ConjFlag::Linear, ConjFlag::ConjugateLinear] {
                let u = Isometry::random(n, m, flag, &mut rng).unwrap();
                let phi = conjugation(&u).unwrap();
                let c = classify_pure_preserver(&phi, &opts()).unwrap();
                match &c {
                    PureClassification::Conjugation { u: got, residual } => {
                        assert_eq!(got.flag(), flag);
                        assert!(*residual <= 1e-9);
                        assert!(got.isometry_defect() <= 1e-8);
                    }
                    other => panic!("unexpected {other:?}"),
                }
                assert!(superop_equal(&c.reconstruct(m).unwrap(), &phi, 1e-9).unwrap().equal);
            }
        }
    }

    #[test]
    fn single_dimension_input_is_a_trace_replacer() {
        let mut rng = seeded_rng(23);
        let u = Isometry::random(3, 1, ConjFlag::Linear, &mut rng).unwrap();
        let c = classify_pure_preserver(&conjugation(&u).unwrap(), &opts()).unwrap();
        assert_eq!(c.kind(), "trace_replacer");
    }

    #[test]
    fn monte_carlo_passes_on_preservers() {
        let mut rng = seeded_rng(24);
        let u = Isometry::random(3, 2, ConjFlag::ConjugateLinear, &mut rng).unwrap();
        assert!(mc_verify_pure(&conjugation(&u).unwrap(), 500, 1, 1e-8).unwrap().passed());
        let r = random_pure_seeded(2, 3).unwrap();
        assert!(mc_verify_pure(&trace_replacer(&r, &[3]).unwrap(), 500, 1, 1e-8).unwrap().passed());
    }

    #[test]
    fn rejects_bad_arguments() {
        let id = SuperOperator::identity(&[2, 2]).unwrap();
        assert!(matches!(classify_pure_preserver(&id, &opts()), Err(Error::Structure(_))));
        let id = SuperOperator::identity(&[2]).unwrap();
        let bad = ClassifyOptions { tol: 0.0, seed: 0 };
        assert!(matches!(classify_pure_preserver(&id, &bad), Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn witness_family_order() {
        let fam = witness_family(3);
        assert_eq!(fam.len(), 3 + 3 + 3);
        assert!(fam[3].vector()[1].re > 0.7);
        assert!(fam[6].vector()[1].im > 0.7);
    }
}
