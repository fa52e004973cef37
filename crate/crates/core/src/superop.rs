//! Real-linear maps on Hermitian operator spaces.
//!
//! A [`SuperOperator`] is stored as the real matrix of its action on the
//! coordinates of a fixed orthonormal Hermitian basis ([`HermitianBasis`]).
//! Conjugate-linear pieces such as the transpose are real-linear on this space,
//! so every canonical preserver form has the same representation.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_tol, Error, Result};
use crate::linalg::{
    partial_trace, partial_transpose, permute_factors, random_isometry_matrix, random_pure, seeded_rng,
    swap_theta, CMatrix, FactorIndex, HermitianOperator, PureState,
};

/// Tag written to and required from serialized superoperators.
pub const BASIS_TAG: &str = "gellmann-v1";
/// Default absolute tolerance on coefficients for [`superop_equal`].
pub const EQUAL_TOL: f64 = 1e-9;

const AFFINE_CHECK_SEED: u64 = 0xaff1_2e5d;
const AFFINE_CHECK_STATES: usize = 20;
const AFFINE_CHECK_TOL: f64 = 1e-9;

/// Which basis element a coordinate index refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    /// `E_kk`
    Diagonal(usize),
    /// `(E_ij + E_ji)/√2`
    Symmetric(usize, usize),
    /// `i(E_ij - E_ji)/√2`
    Antisymmetric(usize, usize),
}

/// Orthonormal basis of the `d x d` Hermitian matrices: `E_kk` for `k < d`,
/// then for each pair `i < j` in lexicographic order `X_ij` followed by `Y_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianBasis {
    dim: usize,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    pub fn label(&self, k: usize) -> BasisLabel {
        let d = self.dim;
        if k < d {
            return BasisLabel::Diagonal(k);
        }
        let pair = (k - d) / 2;
        let (i, j) = pair_from_index(d, pair);
        if (k - d) % 2 == 0 {
            BasisLabel::Symmetric(i, j)
        } else {
            BasisLabel::Antisymmetric(i, j)
        }
    }

    pub fn index_of(&self, label: BasisLabel) -> usize {
        let d = self.dim;
        match label {
            BasisLabel::Diagonal(k) => k,
            BasisLabel::Symmetric(i, j) => d + 2 * pair_index(d, i, j),
            BasisLabel::Antisymmetric(i, j) => d + 2 * pair_index(d, i, j) + 1,
        }
    }

    pub fn element_matrix(&self, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        let s = 1.0 / SQRT_2;
        match self.label(k) {
            BasisLabel::Diagonal(k) => m[(k, k)] = Complex64::new(1.0, 0.0),
            BasisLabel::Symmetric(i, j) => {
                m[(i, j)] = Complex64::new(s, 0.0);
                m[(j, i)] = Complex64::new(s, 0.0);
            }
            BasisLabel::Antisymmetric(i, j) => {
                m[(i, j)] = Complex64::new(0.0, s);
                m[(j, i)] = Complex64::new(0.0, -s);
            }
        }
        m
    }

    pub fn element(&self, k: usize) -> HermitianOperator {
        HermitianOperator::from_parts(self.element_matrix(k), None)
    }

    /// Coordinates `Tr(B_k A)` of a Hermitian matrix.
    pub fn coordinates(&self, a: &CMatrix) -> DVector<f64> {
        let d = self.dim;
        let mut out = DVector::zeros(d * d);
        for k in 0..d {
            out[k] = a[(k, k)].re;
        }
        let mut idx = d;
        for i in 0..d {
            for j in (i + 1)..d {
                out[idx] = SQRT_2 * a[(i, j)].re;
                out[idx + 1] = SQRT_2 * a[(i, j)].im;
                idx += 2;
            }
        }
        out
    }

    pub fn from_coordinates(&self, c: &DVector<f64>) -> CMatrix {
        let d = self.dim;
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[(k, k)] = Complex64::new(c[k], 0.0);
        }
        let mut idx = d;
        for i in 0..d {
            for j in (i + 1)..d {
                let z = Complex64::new(c[idx], c[idx + 1]) / SQRT_2;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                idx += 2;
            }
        }
        m
    }
}

fn pair_index(d: usize, i: usize, j: usize) -> usize {
    // number of pairs (a, b) with a < i, plus offset within row i
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

fn pair_from_index(d: usize, mut p: usize) -> (usize, usize) {
    for i in 0..d {
        let row = d - i - 1;
        if p < row {
            return (i, i + 1 + p);
        }
        p -= row;
    }
    unreachable!("pair index out of range")
}

/// A real-linear map between Hermitian operator spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    coeff: DMatrix<f64>,
}

impl SuperOperator {
    pub fn new(in_dims: Vec<usize>, out_dims: Vec<usize>, coeff: DMatrix<f64>) -> Result<Self> {
        let din = checked_product(&in_dims)?;
        let dout = checked_product(&out_dims)?;
        if coeff.nrows() != dout * dout || coeff.ncols() != din * din {
            return Err(Error::Structure(format!(
                "coefficient matrix is {}x{}, expected {}x{}",
                coeff.nrows(),
                coeff.ncols(),
                dout * dout,
                din * din
            )));
        }
        if coeff.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { in_dims, out_dims, coeff })
    }

    /// Samples `action` on every input basis element. The action must be
    /// real-linear; outputs must have dimension `∏ out_dims`.
    pub fn from_action<F>(in_dims: &[usize], out_dims: &[usize], mut action: F) -> Result<Self>
    where
        F: FnMut(&HermitianOperator) -> Result<HermitianOperator>,
    {
        let din = checked_product(in_dims)?;
        let dout = checked_product(out_dims)?;
        let bin = HermitianBasis::new(din);
        let bout = HermitianBasis::new(dout);
        let mut coeff = DMatrix::zeros(dout * dout, din * din);
        for k in 0..bin.len() {
            let e = bin.element(k).set_dims(in_dims.to_vec())?;
            let img = action(&e)?;
            if img.dim() != dout {
                return Err(Error::DimensionMismatch { expected: dout, found: img.dim() });
            }
            coeff.set_column(k, &bout.coordinates(img.matrix()));
        }
        Self::new(in_dims.to_vec(), out_dims.to_vec(), coeff)
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let d = checked_product(dims)?;
        Self::new(dims.to_vec(), dims.to_vec(), DMatrix::identity(d * d, d * d))
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dim(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn coeff(&self) -> &DMatrix<f64> {
        &self.coeff
    }

    pub fn apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        let din = self.in_dim();
        if a.dim() != din {
            return Err(Error::DimensionMismatch { expected: din, found: a.dim() });
        }
        let c = HermitianBasis::new(din).coordinates(a.matrix());
        let out = &self.coeff * c;
        let m = HermitianBasis::new(self.out_dim()).from_coordinates(&out);
        Ok(HermitianOperator::from_parts(m, Some(self.out_dims.clone())))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SuperOperator) -> Result<SuperOperator> {
        if inner.out_dim() != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), found: inner.out_dim() });
        }
        Self::new(inner.in_dims.clone(), self.out_dims.clone(), &self.coeff * &inner.coeff)
    }

    /// Same coefficients with new factor labels (products must agree).
    pub fn with_dims(&self, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        if checked_product(&in_dims)? != self.in_dim() || checked_product(&out_dims)? != self.out_dim() {
            return Err(Error::Structure("relabelled dimensions change the space".into()));
        }
        Self::new(in_dims, out_dims, self.coeff.clone())
    }

    /// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij)` of the complex-linear extension.
    /// For interchange only; the coefficient matrix is authoritative.
    pub fn to_choi(&self) -> Result<CMatrix> {
        let din = self.in_dim();
        let dout = self.out_dim();
        let bin = HermitianBasis::new(din);
        let image = |k: usize| -> Result<CMatrix> { Ok(self.apply(&bin.element(k))?.into_matrix()) };
        let mut choi = CMatrix::zeros(din * dout, din * dout);
        let mut place = |i: usize, j: usize, blk: &CMatrix| {
            choi.view_mut((i * dout, j * dout), (dout, dout)).copy_from(blk);
        };
        for k in 0..din {
            place(k, k, &image(k)?);
        }
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..din {
            for j in (i + 1)..din {
                let x = image(bin.index_of(BasisLabel::Symmetric(i, j)))?;
                let y = image(bin.index_of(BasisLabel::Antisymmetric(i, j)))?;
                // E_ij = (X - iY)/√2, E_ji = (X + iY)/√2
                let yi = y.map(|z| z * i_unit);
                place(i, j, &(&x - &yi).unscale(SQRT_2));
                place(j, i, &(&x + &yi).unscale(SQRT_2));
            }
        }
        Ok(choi)
    }
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Structure(format!("invalid factor dimensions {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Result of comparing two superoperators coefficient by coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub equal: bool,
    pub max_deviation: f64,
    /// Input basis index of the column holding the largest deviation.
    pub worst_input: usize,
}

/// `‖Φ.coeff − Ψ.coeff‖_max ≤ tol` on identical dimensions.
pub fn superop_equal(phi: &SuperOperator, psi: &SuperOperator, tol: f64) -> Result<Comparison> {
    check_tol(tol)?;
    if phi.in_dims != psi.in_dims || phi.out_dims != psi.out_dims {
        return Err(Error::Structure(format!(
            "cannot compare maps {:?}->{:?} and {:?}->{:?}",
            phi.in_dims, phi.out_dims, psi.in_dims, psi.out_dims
        )));
    }
    let mut max_deviation = 0.0f64;
    let mut worst_input = 0;
    for (col, (a, b)) in phi.coeff.column_iter().zip(psi.coeff.column_iter()).enumerate() {
        let dev = (a - b).amax();
        if dev > max_deviation {
            max_deviation = dev;
            worst_input = col;
        }
    }
    Ok(Comparison { equal: max_deviation <= tol, max_deviation, worst_input })
}

/// Whether an isometry acts linearly (`A ↦ VAV*`) or conjugate-linearly (`A ↦ VAᵗV*`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjFlag {
    Linear,
    #[serde(rename = "conjugate")]
    ConjugateLinear,
}

/// Tolerance on `‖V*V − I‖_F` for accepting an isometry.
pub const ISOMETRY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
    flag: ConjFlag,
}

impl Isometry {
    pub fn new(matrix: CMatrix, flag: ConjFlag) -> Result<Self> {
        let n = matrix.ncols();
        if n == 0 || matrix.nrows() < n {
            return Err(Error::Structure(format!(
                "no isometry with shape {}x{}",
                matrix.nrows(),
                n
            )));
        }
        let dev = (matrix.adjoint() * &matrix - CMatrix::identity(n, n)).norm();
        if !(dev <= ISOMETRY_TOL) {
            return Err(Error::NotIsometry(dev));
        }
        Ok(Self { matrix, flag })
    }

    pub fn identity(dim: usize, flag: ConjFlag) -> Self {
        Self { matrix: CMatrix::identity(dim, dim), flag }
    }

    pub fn random<R: Rng + ?Sized>(out_dim: usize, in_dim: usize, flag: ConjFlag, rng: &mut R) -> Result<Self> {
        Ok(Self { matrix: random_isometry_matrix(out_dim, in_dim, rng)?, flag })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn flag(&self) -> ConjFlag {
        self.flag
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }

    pub fn isometry_defect(&self) -> f64 {
        let n = self.in_dim();
        (self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)).norm()
    }

    /// `VAV*` or `VAᵗV*` according to the flag.
    pub fn act(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), found: a.dim() });
        }
        let inner = match self.flag {
            ConjFlag::Linear => a.matrix().clone(),
            ConjFlag::ConjugateLinear => a.matrix().transpose(),
        };
        let out = &self.matrix * inner * self.matrix.adjoint();
        let d = out.nrows();
        Ok(HermitianOperator::from_parts(out, Some(vec![d])))
    }

    /// Inverse of a square (unitary or conjugate-unitary) isometry.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Structure("only square isometries are invertible".into()));
        }
        let matrix = match self.flag {
            ConjFlag::Linear => self.matrix.adjoint(),
            // B = V Aᵗ V*  ⇒  A = Vᵗ Bᵗ conj(V)
            ConjFlag::ConjugateLinear => self.matrix.transpose(),
        };
        Ok(Self { matrix, flag: self.flag })
    }
}

/// `A ↦ Tr(A)·R`.
pub fn trace_replacer(r: &PureState, in_dims: &[usize]) -> Result<SuperOperator> {
    let out_dims = [r.dim()];
    SuperOperator::from_action(in_dims, &out_dims, |a| Ok(r.projection().scale(a.trace())))
}

/// `A ↦ VAV*` or `A ↦ VAᵗV*`.
pub fn conjugation(u: &Isometry) -> Result<SuperOperator> {
    SuperOperator::from_action(&[u.in_dim()], &[u.out_dim()], |a| u.act(a))
}

/// `(V_1 ⊗ ... ⊗ V_n) Λ(F) (V_1 ⊗ ... ⊗ V_n)*` where Λ transposes exactly the
/// factors whose isometry is conjugate-linear.
pub fn product_conjugation(isos: &[&Isometry], f: &HermitianOperator) -> Result<HermitianOperator> {
    let dims = f.factor_dims()?;
    let expected: Vec<usize> = isos.iter().map(|u| u.in_dim()).collect();
    if dims != expected.as_slice() {
        return Err(Error::Structure(format!("operator factors {dims:?}, isometries expect {expected:?}")));
    }
    let mut g = f.clone();
    for (k, u) in isos.iter().enumerate() {
        if u.flag() == ConjFlag::ConjugateLinear && u.in_dim() > 1 {
            g = partial_transpose(&g, FactorIndex::new(k + 1)?)?;
        }
    }
    let v = isos
        .iter()
        .skip(1)
        .fold(isos[0].matrix().clone(), |acc, u| acc.kronecker(u.matrix()));
    let out = &v * g.matrix() * v.adjoint();
    Ok(HermitianOperator::from_parts(out, Some(isos.iter().map(|u| u.out_dim()).collect())))
}

/// One recorded image of a product pure state under a map of pattern (8)/(9).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledImage {
    pub p: PureState,
    pub q: PureState,
    /// The non-constant output factor.
    pub factor: PureState,
}

/// Canonical forms of bipartite separable-pure-state preservers on `H ⊗ K`
/// with `dim H = m`, `dim K = n`.
#[derive(Clone, Debug, PartialEq)]
pub enum SepForm {
    /// `Tr(F) R1 ⊗ R2`
    Form1 { r1: PureState, r2: PureState },
    /// `U1[Tr_2 F]U1* ⊗ R2`, `U1: H → H`
    Form2 { u1: Isometry, r2: PureState },
    /// `R1 ⊗ U2[Tr_1 F]U2*`, `U2: K → K`
    Form3 { r1: PureState, u2: Isometry },
    /// `U1[Tr_1 F]U1* ⊗ R2`, `U1: K → H`, needs `m ≥ n`
    Form4 { u1: Isometry, r2: PureState },
    /// `R1 ⊗ U2[Tr_2 F]U2*`, `U2: H → K`, needs `m ≤ n`
    Form5 { r1: PureState, u2: Isometry },
    /// `(U1 ⊗ U2) F (U1 ⊗ U2)*`
    Form6 { u1: Isometry, u2: Isometry },
    /// `(U1 ⊗ U2) θ(F) (U1 ⊗ U2)*`, `U1: K → H`, `U2: H → K`, needs `m = n`
    Form7 { u1: Isometry, u2: Isometry },
    /// `φ1(F) ⊗ R2` with sampled images of `φ1`; no constructor exists.
    Form8 { r2: PureState, family: Vec<SampledImage> },
    /// `R1 ⊗ φ2(F)` with sampled images of `φ2`; no constructor exists.
    Form9 { r1: PureState, family: Vec<SampledImage> },
}

impl SepForm {
    pub fn tag(&self) -> u8 {
        match self {
            SepForm::Form1 { .. } => 1,
            SepForm::Form2 { .. } => 2,
            SepForm::Form3 { .. } => 3,
            SepForm::Form4 { .. } => 4,
            SepForm::Form5 { .. } => 5,
            SepForm::Form6 { .. } => 6,
            SepForm::Form7 { .. } => 7,
            SepForm::Form8 { .. } => 8,
            SepForm::Form9 { .. } => 9,
        }
    }

    pub fn isometries(&self) -> Vec<&Isometry> {
        match self {
            SepForm::Form2 { u1, .. } | SepForm::Form4 { u1, .. } => vec![u1],
            SepForm::Form3 { u2, .. } | SepForm::Form5 { u2, .. } => vec![u2],
            SepForm::Form6 { u1, u2 } | SepForm::Form7 { u1, u2 } => vec![u1, u2],
            _ => Vec::new(),
        }
    }

    /// Dimension constraint of form `tag` on `dims = [m, n]`, independent of parameters.
    pub fn check_dims(tag: u8, dims: [usize; 2]) -> Result<()> {
        let [m, n] = dims;
        if m == 0 || n == 0 {
            return Err(Error::Structure(format!("invalid factor dimensions {dims:?}")));
        }
        let violated = match tag {
            1..=3 | 6 => None,
            4 | 8 if m < n => Some(format!("form {tag} requires dim H >= dim K, got {m} < {n}")),
            5 | 9 if m > n => Some(format!("form {tag} requires dim H <= dim K, got {m} > {n}")),
            7 if m != n => Some(format!("form 7 requires dim H = dim K, got {m} != {n}")),
            4 | 5 | 7 | 8 | 9 => None,
            _ => Some(format!("no canonical form {tag}")),
        };
        violated.map_or(Ok(()), |msg| Err(Error::Structure(msg)))
    }

    /// Checks every dimension constraint of the form against `dims = [m, n]`.
    pub fn validate(&self, dims: [usize; 2]) -> Result<()> {
        let [m, n] = dims;
        Self::check_dims(self.tag(), dims)?;
        let state = |name: &str, r: &PureState, d: usize| -> Result<()> {
            if r.dim() != d {
                return Err(Error::Structure(format!("{name} has dimension {}, expected {d}", r.dim())));
            }
            Ok(())
        };
        let iso = |name: &str, u: &Isometry, from: usize, to: usize| -> Result<()> {
            if u.in_dim() != from || u.out_dim() != to {
                return Err(Error::Structure(format!(
                    "{name} maps {} -> {}, form needs {from} -> {to}",
                    u.in_dim(),
                    u.out_dim()
                )));
            }
            Ok(())
        };
        match self {
            SepForm::Form1 { r1, r2 } => {
                state("R1", r1, m)?;
                state("R2", r2, n)
            }
            SepForm::Form2 { u1, r2 } => {
                iso("U1", u1, m, m)?;
                state("R2", r2, n)
            }
            SepForm::Form3 { r1, u2 } => {
                state("R1", r1, m)?;
                iso("U2", u2, n, n)
            }
            SepForm::Form4 { u1, r2 } => {
                iso("U1", u1, n, m)?;
                state("R2", r2, n)
            }
            SepForm::Form5 { r1, u2 } => {
                state("R1", r1, m)?;
                iso("U2", u2, m, n)
            }
            SepForm::Form6 { u1, u2 } => {
                iso("U1", u1, m, m)?;
                iso("U2", u2, n, n)
            }
            SepForm::Form7 { u1, u2 } => {
                iso("U1", u1, n, m)?;
                iso("U2", u2, m, n)
            }
            SepForm::Form8 { r2, .. } => state("R2", r2, n),
            SepForm::Form9 { r1, .. } => state("R1", r1, m),
        }
    }

    /// Form `tag` (1-7) on `dims` with Haar-random states and isometries.
    /// `flags` fixes the conjugation flags of the form's isometries in order;
    /// missing entries are drawn uniformly.
    pub fn random<R: Rng + ?Sized>(tag: u8, dims: [usize; 2], flags: &[ConjFlag], rng: &mut R) -> Result<SepForm> {
        if matches!(tag, 8 | 9) {
            return Err(Error::Unsupported(format!("form {tag} has no constructor (open in source theorem)")));
        }
        Self::check_dims(tag, dims)?;
        let [m, n] = dims;
        let mut next_flag = flags.iter().copied();
        let mut iso = |from: usize, to: usize, rng: &mut R| -> Result<Isometry> {
            let flag = next_flag.next().unwrap_or_else(|| random_flag(rng));
            Isometry::random(to, from, flag, rng)
        };
        Ok(match tag {
            1 => SepForm::Form1 { r1: random_pure(m, rng)?, r2: random_pure(n, rng)? },
            2 => SepForm::Form2 { u1: iso(m, m, rng)?, r2: random_pure(n, rng)? },
            3 => SepForm::Form3 { r1: random_pure(m, rng)?, u2: iso(n, n, rng)? },
            4 => SepForm::Form4 { u1: iso(n, m, rng)?, r2: random_pure(n, rng)? },
            5 => SepForm::Form5 { r1: random_pure(m, rng)?, u2: iso(m, n, rng)? },
            6 => SepForm::Form6 { u1: iso(m, m, rng)?, u2: iso(n, n, rng)? },
            _ => SepForm::Form7 { u1: iso(n, m, rng)?, u2: iso(m, n, rng)? },
        })
    }

    /// Evaluates the form's formula on a two-factor operator `F`.
    pub fn evaluate(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        let tr1 = || partial_trace(f, FactorIndex::new(1)?);
        let tr2 = || partial_trace(f, FactorIndex::new(2)?);
        let out = match self {
            SepForm::Form1 { r1, r2 } => crate::linalg::tensor(r1.projection(), r2.projection()).scale(f.trace()),
            SepForm::Form2 { u1, r2 } => crate::linalg::tensor(&u1.act(&tr2()?)?, r2.projection()),
            SepForm::Form3 { r1, u2 } => crate::linalg::tensor(r1.projection(), &u2.act(&tr1()?)?),
            SepForm::Form4 { u1, r2 } => crate::linalg::tensor(&u1.act(&tr1()?)?, r2.projection()),
            SepForm::Form5 { r1, u2 } => crate::linalg::tensor(r1.projection(), &u2.act(&tr2()?)?),
            SepForm::Form6 { u1, u2 } => product_conjugation(&[u1, u2], f)?,
            SepForm::Form7 { u1, u2 } => product_conjugation(&[u1, u2], &swap_theta(f)?)?,
            SepForm::Form8 { .. } | SepForm::Form9 { .. } => {
                return Err(Error::Unsupported(format!(
                    "form {} has no constructor (open in source theorem)",
                    self.tag()
                )))
            }
        };
        Ok(out)
    }

    /// The inverse map of a form 6/7 preserver whose isometries are square.
    pub fn inverse(&self) -> Result<SepForm> {
        match self {
            SepForm::Form6 { u1, u2 } => Ok(SepForm::Form6 { u1: u1.inverse()?, u2: u2.inverse()? }),
            // X ⊗ Y ↦ U2⁻¹(Y) ⊗ U1⁻¹(X) is again a swap form
            SepForm::Form7 { u1, u2 } => Ok(SepForm::Form7 { u1: u2.inverse()?, u2: u1.inverse()? }),
            other => Err(Error::Unsupported(format!("form {} is not invertible", other.tag()))),
        }
    }
}

/// Superoperator of a bipartite canonical form (1-7).
pub fn canonical_sep(form: &SepForm, dims: [usize; 2]) -> Result<SuperOperator> {
    if matches!(form, SepForm::Form8 { .. } | SepForm::Form9 { .. }) {
        return Err(Error::Unsupported(format!(
            "form {} has no constructor (open in source theorem)",
            form.tag()
        )));
    }
    form.validate(dims)?;
    SuperOperator::from_action(&dims, &dims, |f| form.evaluate(f))
}

pub fn random_flag<R: Rng + ?Sized>(rng: &mut R) -> ConjFlag {
    if rng.random::<bool>() {
        ConjFlag::ConjugateLinear
    } else {
        ConjFlag::Linear
    }
}

/// `F ↦ (U_1 ⊗ ... ⊗ U_n) θ_π(F) (U_1 ⊗ ... ⊗ U_n)*` with `U_j: H_{p_j} → H_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiForm {
    /// `(p_1, ..., p_n)`, 1-based.
    pub perm: Vec<usize>,
    pub isometries: Vec<Isometry>,
}

impl MultiForm {
    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        crate::linalg::validate_permutation(&self.perm, dims.len())?;
        if self.isometries.len() != dims.len() {
            return Err(Error::Structure(format!(
                "{} isometries for {} factors",
                self.isometries.len(),
                dims.len()
            )));
        }
        for (j, (u, &p)) in self.isometries.iter().zip(&self.perm).enumerate() {
            let (from, to) = (dims[p - 1], dims[j]);
            if u.in_dim() != from || u.out_dim() != to {
                return Err(Error::Structure(format!(
                    "U_{} maps {} -> {}, needs H_{p} -> H_{} ({from} -> {to})",
                    j + 1,
                    u.in_dim(),
                    u.out_dim(),
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Random isometries `U_j: H_{p_j} → H_j`; `flags` as in [`SepForm::random`].
    pub fn random<R: Rng + ?Sized>(perm: Vec<usize>, dims: &[usize], flags: &[ConjFlag], rng: &mut R) -> Result<Self> {
        crate::linalg::validate_permutation(&perm, dims.len())?;
        let mut isometries = Vec::with_capacity(dims.len());
        for (j, &p) in perm.iter().enumerate() {
            let (from, to) = (dims[p - 1], dims[j]);
            if from > to {
                return Err(Error::Structure(format!(
                    "U_{} would map H_{p} (dim {from}) into H_{} (dim {to}); needs dim H_{p} <= dim H_{}",
                    j + 1,
                    j + 1,
                    j + 1
                )));
            }
            let flag = flags.get(j).copied().unwrap_or_else(|| random_flag(rng));
            isometries.push(Isometry::random(to, from, flag, rng)?);
        }
        let form = Self { perm, isometries };
        form.validate(dims)?;
        Ok(form)
    }

    pub fn evaluate(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        let permuted = permute_factors(f, &self.perm)?;
        let isos: Vec<&Isometry> = self.isometries.iter().collect();
        product_conjugation(&isos, &permuted)
    }
}

pub fn canonical_multi(form: &MultiForm, dims: &[usize]) -> Result<SuperOperator> {
    form.validate(dims)?;
    SuperOperator::from_action(dims, dims, |f| form.evaluate(f))
}

/// Extends an affine action on density matrices of dimension `dim` to the
/// real-linear map agreeing with it on the spanning states `E_kk`,
/// `½(e_k+e_l)(e_k+e_l)*` and `½(e_k+ie_l)(e_k+ie_l)*`. The extension is then
/// re-checked on 20 seeded random states; disagreement is reported as a
/// contract error.
pub fn affine_to_linear<F>(mut state_action: F, dim: usize) -> Result<SuperOperator>
where
    F: FnMut(&HermitianOperator) -> Result<HermitianOperator>,
{
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let basis = HermitianBasis::new(dim);
    let diag: Vec<HermitianOperator> = (0..dim)
        .map(|k| state_action(PureState::basis(dim, k).projection()))
        .collect::<Result<_>>()?;
    let out_dims = diag[0].dims().map(<[usize]>::to_vec).unwrap_or_else(|| vec![diag[0].dim()]);
    let dout = diag[0].dim();
    let bout = HermitianBasis::new(dout);
    let mut coeff = DMatrix::zeros(dout * dout, dim * dim);
    for (k, img) in diag.iter().enumerate() {
        if img.dim() != dout {
            return Err(Error::DimensionMismatch { expected: dout, found: img.dim() });
        }
        coeff.set_column(k, &bout.coordinates(img.matrix()));
    }
    let one = Complex64::new(1.0, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);
    for k in 0..dim {
        for l in (k + 1)..dim {
            let mut v = crate::linalg::CVector::zeros(dim);
            v[k] = one;
            v[l] = one;
            let s = state_action(PureState::from_vector(v.clone())?.projection())?;
            v[l] = i_unit;
            let t = state_action(PureState::from_vector(v)?.projection())?;
            let mid = diag[k].lin_comb(0.5, &diag[l], 0.5)?;
            // S_kl = ½(E_kk + E_ll) + X_kl/√2,  T_kl = ½(E_kk + E_ll) − Y_kl/√2
            let x = s.lin_comb(SQRT_2, &mid, -SQRT_2)?;
            let y = t.lin_comb(-SQRT_2, &mid, SQRT_2)?;
            coeff.set_column(basis.index_of(BasisLabel::Symmetric(k, l)), &bout.coordinates(x.matrix()));
            coeff.set_column(basis.index_of(BasisLabel::Antisymmetric(k, l)), &bout.coordinates(y.matrix()));
        }
    }
    let map = SuperOperator::new(vec![dim], out_dims, coeff)?;
    let mut rng = seeded_rng(AFFINE_CHECK_SEED);
    for _ in 0..AFFINE_CHECK_STATES {
        let rho = random_state(dim, &mut rng)?;
        let direct = state_action(&rho)?;
        let linear = map.apply(&rho)?;
        let dev = direct.distance(&linear);
        if dev > AFFINE_CHECK_TOL * direct.frobenius_norm().max(1.0) {
            return Err(Error::Contract(format!(
                "state action is not affine: linear extension deviates by {dev:e}"
            )));
        }
    }
    Ok(map)
}

/// Random density matrix: a Dirichlet-weighted mixture of `dim` Haar pure states.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<HermitianOperator> {
    let weights: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = HermitianOperator::zeros(dim);
    for w in weights {
        let p = random_pure(dim, rng)?;
        acc = acc.lin_comb(1.0, p.projection(), w / total)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        is_product_pure, random_hermitian, random_pure_seeded, tensor, PURITY_TOL,
    };

    fn transpose_map(d: usize) -> SuperOperator {
        SuperOperator::from_action(&[d], &[d], |a| Ok(a.transpose())).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        for d in 1..=4 {
            let b = HermitianBasis::new(d);
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let ip = (b.element_matrix(i) * b.element_matrix(j)).trace();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip.re - expected).abs() < 1e-14 && ip.im.abs() < 1e-14);
                }
                assert_eq!(b.index_of(b.label(i)), i);
            }
        }
        let b = HermitianBasis::new(2);
        assert_eq!(b.label(2), BasisLabel::Symmetric(0, 1));
        assert_eq!(b.label(3), BasisLabel::Antisymmetric(0, 1));
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = seeded_rng(7);
        let a = random_hermitian(4, &mut rng).unwrap();
        let b = HermitianBasis::new(4);
        let back = b.from_coordinates(&b.coordinates(a.matrix()));
        assert!((back - a.matrix()).norm() < 1e-14);
    }

    #[test]
    fn from_action_examples() {
        let id = SuperOperator::from_action(&[3], &[3], |a| Ok(a.clone())).unwrap();
        assert_eq!(id.coeff(), &DMatrix::identity(9, 9));
        let t = transpose_map(2);
        assert_eq!(t.coeff(), &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0])));
        let e00 = PureState::basis(2, 0);
        let rank_one = trace_replacer(&e00, &[2]).unwrap();
        assert_eq!(rank_one.coeff().rank(1e-12), 1);
        let bad = SuperOperator::from_action(&[2], &[3], |a| Ok(a.clone()));
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn apply_matches_action() {
        let mut rng = seeded_rng(8);
        let w = random_hermitian(3, &mut rng).unwrap();
        let f = |a: &HermitianOperator| -> Result<HermitianOperator> {
            let m = w.matrix() * a.matrix() * w.matrix() + a.matrix().transpose().scale(0.5);
            Ok(HermitianOperator::from_parts(m, None))
        };
        let phi = SuperOperator::from_action(&[3], &[3], f).unwrap();
        for _ in 0..100 {
            let a = random_hermitian(3, &mut rng).unwrap();
            assert!(phi.apply(&a).unwrap().distance(&f(&a).unwrap()) < 1e-12);
        }
        let id = SuperOperator::identity(&[3]).unwrap();
        let a = random_hermitian(3, &mut rng).unwrap();
        assert!(id.apply(&a).unwrap().distance(&a) < 1e-14);
        assert_eq!(phi.apply(&HermitianOperator::zeros(3)).unwrap().frobenius_norm(), 0.0);
        assert!(phi.apply(&HermitianOperator::zeros(2)).is_err());
    }

    #[test]
    fn trace_replacer_examples() {
        let r = random_pure_seeded(3, 1).unwrap();
        let phi = trace_replacer(&r, &[2]).unwrap();
        let p = random_pure_seeded(2, 2).unwrap();
        assert!(phi.apply(p.projection()).unwrap().distance(r.projection()) < 1e-14);
        let a0 = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        assert!(phi.apply(&a0).unwrap().frobenius_norm() < 1e-14);
        let three_p = p.projection().scale(3.0);
        assert!(phi.apply(&three_p).unwrap().distance(&r.projection().scale(3.0)) < 1e-13);
    }

    #[test]
    fn conjugation_examples() {
        let id = conjugation(&Isometry::identity(3, ConjFlag::Linear)).unwrap();
        assert!(superop_equal(&id, &SuperOperator::identity(&[3]).unwrap(), 1e-14).unwrap().equal);
        let t = conjugation(&Isometry::identity(3, ConjFlag::ConjugateLinear)).unwrap();
        assert!(superop_equal(&t, &transpose_map(3), 1e-14).unwrap().equal);

        let mut v = CMatrix::zeros(3, 2);
        v[(0, 0)] = Complex64::new(1.0, 0.0);
        v[(1, 1)] = Complex64::new(1.0, 0.0);
        let u = Isometry::new(v, ConjFlag::Linear).unwrap();
        let img = conjugation(&u).unwrap().apply(&HermitianOperator::diagonal_unit(2, 0)).unwrap();
        assert!(img.distance(&HermitianOperator::diagonal_unit(3, 0)) < 1e-14);
        assert!(Isometry::new(CMatrix::identity(2, 2).scale(2.0), ConjFlag::Linear).is_err());
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let mut rng = seeded_rng(10);
        for flag in [ConjFlag::Linear, ConjFlag::ConjugateLinear] {
            let u = Isometry::random(3, 2, flag, &mut rng).unwrap();
            let a = random_hermitian(2, &mut rng).unwrap();
            let img = conjugation(&u).unwrap().apply(&a).unwrap();
            let mut before = crate::linalg::eig_hermitian(&a).unwrap().values;
            before.push(0.0);
            before.sort_by(|x, y| y.total_cmp(x));
            let after = crate::linalg::eig_hermitian(&img).unwrap().values;
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equality_reports_witness() {
        let id = SuperOperator::identity(&[2]).unwrap();
        let cmp = superop_equal(&id, &transpose_map(2), EQUAL_TOL).unwrap();
        assert!(!cmp.equal);
        assert_eq!(HermitianBasis::new(2).label(cmp.worst_input), BasisLabel::Antisymmetric(0, 1));
        assert!(superop_equal(&id, &id, EQUAL_TOL).unwrap().equal);
        assert!(superop_equal(&id, &SuperOperator::identity(&[3]).unwrap(), EQUAL_TOL).is_err());
    }

    #[test]
    fn form6_two_construction_paths_agree() {
        let mut rng = seeded_rng(11);
        let u1 = Isometry::random(2, 2, ConjFlag::ConjugateLinear, &mut rng).unwrap();
        let u2 = Isometry::random(3, 3, ConjFlag::Linear, &mut rng).unwrap();
        let canon = canonical_sep(&SepForm::Form6 { u1: u1.clone(), u2: u2.clone() }, [2, 3]).unwrap();
        // independent path: partial transpose of factor 1, then an explicit kron conjugation
        let v = u1.matrix().kronecker(u2.matrix());
        let direct = SuperOperator::from_action(&[2, 3], &[2, 3], |f| {
            let g = partial_transpose(f, FactorIndex::new(1)?)?;
            Ok(HermitianOperator::from_parts(&v * g.matrix() * v.adjoint(), None))
        })
        .unwrap();
        assert!(superop_equal(&canon, &direct, EQUAL_TOL).unwrap().equal);
    }

    #[test]
    fn canonical_sep_examples() {
        let mut rng = seeded_rng(12);
        let r1 = random_pure(2, &mut rng).unwrap();
        let r2 = random_pure(3, &mut rng).unwrap();
        let p = random_pure(2, &mut rng).unwrap();
        let q = random_pure(3, &mut rng).unwrap();
        let pq = tensor(p.projection(), q.projection());

        let f1 = canonical_sep(&SepForm::Form1 { r1: r1.clone(), r2: r2.clone() }, [2, 3]).unwrap();
        let img = f1.apply(&pq).unwrap();
        assert!(img.distance(&tensor(r1.projection(), r2.projection())) < 1e-13);

        let f2 = canonical_sep(
            &SepForm::Form2 { u1: Isometry::identity(2, ConjFlag::Linear), r2: r2.clone() },
            [2, 3],
        )
        .unwrap();
        assert!(f2.apply(&pq).unwrap().distance(&tensor(p.projection(), r2.projection())) < 1e-13);

        let q2 = random_pure(2, &mut rng).unwrap();
        let pq2 = tensor(p.projection(), q2.projection());
        let id = Isometry::identity(2, ConjFlag::Linear);
        let f7 = canonical_sep(&SepForm::Form7 { u1: id.clone(), u2: id }, [2, 2]).unwrap();
        assert!(f7.apply(&pq2).unwrap().distance(&tensor(q2.projection(), p.projection())) < 1e-13);
    }

    #[test]
    fn canonical_sep_rejects_bad_dimensions() {
        let id2 = Isometry::identity(2, ConjFlag::Linear);
        let id3 = Isometry::identity(3, ConjFlag::Linear);
        let err = canonical_sep(&SepForm::Form7 { u1: id2.clone(), u2: id3.clone() }, [2, 3]);
        assert!(matches!(err, Err(Error::Structure(_))));
        let r = PureState::basis(3, 0);
        let err = canonical_sep(&SepForm::Form8 { r2: r.clone(), family: vec![] }, [3, 3]);
        assert!(matches!(err, Err(Error::Unsupported(_))));
        let mut rng = seeded_rng(1);
        let u = Isometry::random(2, 3, ConjFlag::Linear, &mut rng);
        assert!(u.is_err());
        let u1 = Isometry::random(3, 2, ConjFlag::Linear, &mut rng).unwrap();
        // form 4 needs U1: K -> H with m >= n
        let err = canonical_sep(&SepForm::Form4 { u1, r2: PureState::basis(3, 0) }, [2, 3]);
        assert!(err.is_err());
    }

    #[test]
    fn every_constructible_form_preserves_product_pure_states() {
        let mut rng = seeded_rng(13);
        let (m, n) = (2, 3);
        let lin = ConjFlag::Linear;
        let conj = ConjFlag::ConjugateLinear;
        let forms = vec![
            SepForm::Form1 { r1: random_pure(m, &mut rng).unwrap(), r2: random_pure(n, &mut rng).unwrap() },
            SepForm::Form2 { u1: Isometry::random(m, m, conj, &mut rng).unwrap(), r2: random_pure(n, &mut rng).unwrap() },
            SepForm::Form3 { r1: random_pure(m, &mut rng).unwrap(), u2: Isometry::random(n, n, lin, &mut rng).unwrap() },
            SepForm::Form5 { r1: random_pure(m, &mut rng).unwrap(), u2: Isometry::random(n, m, conj, &mut rng).unwrap() },
            SepForm::Form6 {
                u1: Isometry::random(m, m, lin, &mut rng).unwrap(),
                u2: Isometry::random(n, n, conj, &mut rng).unwrap(),
            },
        ];
        for form in &forms {
            let phi = canonical_sep(form, [m, n]).unwrap();
            for _ in 0..200 {
                let p = random_pure(m, &mut rng).unwrap();
                let q = random_pure(n, &mut rng).unwrap();
                let img = phi.apply(&tensor(p.projection(), q.projection())).unwrap();
                assert!(is_product_pure(&img, PURITY_TOL).unwrap().is_some(), "form {}", form.tag());
            }
        }
    }

    #[test]
    fn unitary_form6_composes_with_inverse_to_identity() {
        let mut rng = seeded_rng(14);
        let form = SepForm::Form6 {
            u1: Isometry::random(3, 3, ConjFlag::ConjugateLinear, &mut rng).unwrap(),
            u2: Isometry::random(2, 2, ConjFlag::Linear, &mut rng).unwrap(),
        };
        let phi = canonical_sep(&form, [3, 2]).unwrap();
        let inv = canonical_sep(&form.inverse().unwrap(), [3, 2]).unwrap();
        let id = SuperOperator::identity(&[3, 2]).unwrap();
        assert!(superop_equal(&inv.compose(&phi).unwrap(), &id, 1e-9).unwrap().equal);
    }

    #[test]
    fn canonical_multi_examples() {
        let dims = [2, 2, 2];
        let ids: Vec<Isometry> = (0..3).map(|_| Isometry::identity(2, ConjFlag::Linear)).collect();
        let id_form = MultiForm { perm: vec![1, 2, 3], isometries: ids.clone() };
        let phi = canonical_multi(&id_form, &dims).unwrap();
        assert!(superop_equal(&phi, &SuperOperator::identity(&dims).unwrap(), 1e-14).unwrap().equal);

        let rot = MultiForm { perm: vec![2, 3, 1], isometries: ids };
        let phi = canonical_multi(&rot, &dims).unwrap();
        let q = random_pure_seeded(2, 5).unwrap();
        let e11 = PureState::basis(2, 0);
        let e22 = PureState::basis(2, 1);
        let input = crate::linalg::tensor_all(&[e11.projection(), e22.projection(), q.projection()]);
        let expected = permute_factors(&input, &[2, 3, 1]).unwrap();
        assert!(phi.apply(&input).unwrap().distance(&expected) < 1e-13);
    }

    #[test]
    fn multi_with_two_factors_matches_sep_forms() {
        let mut rng = seeded_rng(15);
        let u1 = Isometry::random(2, 2, ConjFlag::Linear, &mut rng).unwrap();
        let u2 = Isometry::random(2, 2, ConjFlag::ConjugateLinear, &mut rng).unwrap();
        let six = canonical_sep(&SepForm::Form6 { u1: u1.clone(), u2: u2.clone() }, [2, 2]).unwrap();
        let m6 = canonical_multi(&MultiForm { perm: vec![1, 2], isometries: vec![u1.clone(), u2.clone()] }, &[2, 2]).unwrap();
        assert!(superop_equal(&six, &m6, 1e-12).unwrap().equal);
        let seven = canonical_sep(&SepForm::Form7 { u1: u1.clone(), u2: u2.clone() }, [2, 2]).unwrap();
        let m7 = canonical_multi(&MultiForm { perm: vec![2, 1], isometries: vec![u1, u2] }, &[2, 2]).unwrap();
        assert!(superop_equal(&seven, &m7, 1e-12).unwrap().equal);
    }

    #[test]
    fn affine_extension_examples() {
        let id = affine_to_linear(|rho| Ok(rho.clone()), 3).unwrap();
        assert!(superop_equal(&id, &SuperOperator::identity(&[3]).unwrap(), 1e-12).unwrap().equal);

        let r = random_pure_seeded(2, 3).unwrap();
        let constant = affine_to_linear(|_| Ok(r.projection().clone()), 3).unwrap();
        let expected = trace_replacer(&r, &[3]).unwrap();
        assert!(superop_equal(&constant, &expected, 1e-12).unwrap().equal);

        let mut rng = seeded_rng(4);
        let u = Isometry::random(4, 2, ConjFlag::Linear, &mut rng).unwrap();
        let conj = affine_to_linear(|rho| u.act(rho), 2).unwrap();
        assert!(superop_equal(&conj, &conjugation(&u).unwrap(), 1e-12).unwrap().equal);

        // ρ ↦ ρ² is not affine
        let err = affine_to_linear(|rho| Ok(HermitianOperator::from_parts(rho.matrix() * rho.matrix(), None)), 2);
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn choi_of_identity_and_transpose() {
        let d = 2;
        let choi = SuperOperator::identity(&[d]).unwrap().to_choi().unwrap();
        // |Ω⟩⟨Ω| with Ω = Σ e_i ⊗ e_i
        let mut omega = crate::linalg::CVector::zeros(d * d);
        for i in 0..d {
            omega[i * d + i] = Complex64::new(1.0, 0.0);
        }
        assert!((&choi - &omega * omega.adjoint()).norm() < 1e-14);
        // transpose map: Choi is the swap operator
        let choi_t = transpose_map(d).to_choi().unwrap();
        let swap = CMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, j) = (r / d, r % d);
            if c == j * d + i { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        assert!((choi_t - swap).norm() < 1e-14);
    }
}
