//! Dense complex kernel for Hermitian operators on tensor-product spaces.
//!
//! Factor ordering is row-major throughout: the leftmost factor is the slowest
//! index, so the product basis vector `e_i ⊗ u_j` of `H ⊗ K` sits at
//! `i * dim K + j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_tol, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Frobenius tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Relative reconstruction tolerance promised by [`eig_hermitian`].
pub const EIG_TOL: f64 = 1e-10;
/// Default purity tolerance (deviation of the spectrum from `(1, 0, ..., 0)`).
pub const PURITY_TOL: f64 = 1e-8;
/// Sweep cap for the cyclic Jacobi eigensolver.
pub const MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// An element of the real vector space of `d x d` Hermitian matrices,
/// optionally carrying the tensor-factor dimensions of its underlying space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
    dims: Option<Vec<usize>>,
}

impl HermitianOperator {
    /// Accepts `mat` if it is Hermitian up to [`HERMITIAN_TOL`] (relative to
    /// `max(1, ||mat||_F)`) and stores its Hermitian part `(A + A*)/2`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare(mat.nrows(), mat.ncols()));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let adj = mat.adjoint();
        let dev = (&mat - &adj).norm() / mat.norm().max(1.0);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let mat = (mat + adj).unscale(2.0);
        Ok(Self { mat, dims: None })
    }

    /// Like [`HermitianOperator::new`], additionally attaching factor dimensions.
    pub fn with_dims(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::new(mat)?.set_dims(dims)
    }

    /// Internal constructor for results that are Hermitian by construction.
    pub(crate) fn from_parts(mat: CMatrix, dims: Option<Vec<usize>>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat, dims }
    }

    pub fn set_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        self.dims = Some(dims);
        Ok(self)
    }

    pub fn without_dims(mut self) -> Self {
        self.dims = None;
        self
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_parts(CMatrix::zeros(dim, dim), None)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(CMatrix::identity(dim, dim), None)
    }

    /// The diagonal matrix unit `E_kk`.
    pub fn diagonal_unit(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = ONE;
        Self::from_parts(m, None)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::from_parts(CMatrix::from_diagonal(&d), None)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dims(&self) -> Option<&[usize]> {
        self.dims.as_deref()
    }

    /// Factor dimensions, or a structure error when none are attached.
    pub fn factor_dims(&self) -> Result<&[usize]> {
        self.dims
            .as_deref()
            .ok_or_else(|| Error::Structure("operator carries no factor dimensions".into()))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Full transpose (equivalently, entrywise conjugation).
    pub fn transpose(&self) -> Self {
        Self::from_parts(self.mat.transpose(), self.dims.clone())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(self.mat.scale(s), self.dims.clone())
    }

    /// `a * self + b * other`; keeps the factor dimensions of `self`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self::from_parts(self.mat.scale(a) + other.mat.scale(b), self.dims.clone()))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }
}

fn check_dims(dims: &[usize], dim: usize) -> Result<()> {
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::Structure(format!("zero factor dimension in {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != dim {
        return Err(Error::Structure(format!(
            "factor dimensions {dims:?} multiply to {prod}, operator dimension is {dim}"
        )));
    }
    Ok(())
}

/// A rank-one projection with unit trace, stored together with a
/// representative unit vector whose first nonzero component is real positive.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: CVector,
    projection: HermitianOperator,
}

/// Components below this magnitude are skipped when fixing the canonical phase.
const PHASE_CUTOFF: f64 = 1e-8;

impl PureState {
    pub fn from_vector(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if v.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("pure state needs a nonzero finite vector".into()));
        }
        let mut v = v.unscale(norm);
        if let Some(z) = v.iter().copied().find(|z| z.norm() > PHASE_CUTOFF) {
            let phase = z.conj() / z.norm();
            for c in v.iter_mut() {
                *c *= phase;
            }
        }
        let dim = v.len();
        let proj = &v * v.adjoint();
        Ok(Self { projection: HermitianOperator::from_parts(proj, Some(vec![dim])), vector: v })
    }

    /// The basis projection `e_k e_k*`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[k] = ONE;
        Self::from_vector(v).expect("basis vector is nonzero")
    }

    /// The normalized uniform superposition of all basis vectors.
    pub fn uniform(dim: usize) -> Self {
        Self::from_vector(CVector::from_element(dim, ONE)).expect("nonzero")
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn projection(&self) -> &HermitianOperator {
        &self.projection
    }

    /// Fidelity-based distance `1 - |<x, y>|^2` between the two states.
    pub fn infidelity(&self, other: &Self) -> f64 {
        1.0 - self.vector.dotc(&other.vector).norm_sqr()
    }
}

/// 1-based selector of a tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorIndex(usize);

impl FactorIndex {
    pub fn new(which: usize) -> Result<Self> {
        if which == 0 {
            return Err(Error::Structure("factor indices are 1-based".into()));
        }
        Ok(Self(which))
    }

    pub fn get(self) -> usize {
        self.0
    }

    fn position(self, n: usize) -> Result<usize> {
        if self.0 > n {
            return Err(Error::Structure(format!("factor {} out of range for {n} factors", self.0)));
        }
        Ok(self.0 - 1)
    }
}

fn dims_or_single(a: &HermitianOperator) -> Vec<usize> {
    a.dims().map(<[usize]>::to_vec).unwrap_or_else(|| vec![a.dim()])
}

/// Kronecker product; factor dimensions concatenate (an operator without
/// attached dimensions counts as a single factor).
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let mut dims = dims_or_single(a);
    dims.extend(dims_or_single(b));
    HermitianOperator::from_parts(a.matrix().kronecker(b.matrix()), Some(dims))
}

/// Tensor product of several operators, left to right.
pub fn tensor_all(ops: &[&HermitianOperator]) -> HermitianOperator {
    let mut iter = ops.iter();
    let first = (*iter.next().expect("at least one operator")).clone();
    let first = if first.dims().is_none() {
        let d = first.dim();
        HermitianOperator::from_parts(first.into_matrix(), Some(vec![d]))
    } else {
        first
    };
    iter.fold(first, |acc, op| tensor(&acc, op))
}

/// Splits the factor list around position `pos` into (left size, factor size, right size).
fn split_strides(dims: &[usize], pos: usize) -> (usize, usize, usize) {
    let left = dims[..pos].iter().product();
    let right = dims[pos + 1..].iter().product();
    (left, dims[pos], right)
}

/// Traces out factor `which`, keeping the remaining factors in order.
pub fn partial_trace(a: &HermitianOperator, which: FactorIndex) -> Result<HermitianOperator> {
    let dims = a.factor_dims()?;
    let pos = which.position(dims.len())?;
    let (left, mid, right) = split_strides(dims, pos);
    let out_dim = left * right;
    let m = a.matrix();
    let out = CMatrix::from_fn(out_dim, out_dim, |r, c| {
        let (rl, rr) = (r / right, r % right);
        let (cl, cr) = (c / right, c % right);
        (0..mid).fold(ZERO, |acc, t| {
            acc + m[((rl * mid + t) * right + rr, (cl * mid + t) * right + cr)]
        })
    });
    let mut rest = dims.to_vec();
    rest.remove(pos);
    Ok(HermitianOperator::from_parts(out, Some(rest)))
}

/// Reduction of `a` onto the single factor `which` (all other factors traced out).
pub fn reduce_to_factor(a: &HermitianOperator, which: FactorIndex) -> Result<HermitianOperator> {
    let dims = a.factor_dims()?;
    let pos = which.position(dims.len())?;
    let (left, mid, right) = split_strides(dims, pos);
    let m = a.matrix();
    let out = CMatrix::from_fn(mid, mid, |r, c| {
        let mut acc = ZERO;
        for l in 0..left {
            for t in 0..right {
                acc += m[((l * mid + r) * right + t, (l * mid + c) * right + t)];
            }
        }
        acc
    });
    Ok(HermitianOperator::from_parts(out, Some(vec![mid])))
}

/// Transposes factor `which` in the fixed product basis: `A ⊗ B ↦ Aᵗ ⊗ B` for `which = 1`.
pub fn partial_transpose(a: &HermitianOperator, which: FactorIndex) -> Result<HermitianOperator> {
    let dims = a.factor_dims()?;
    let pos = which.position(dims.len())?;
    let (_, mid, right) = split_strides(dims, pos);
    let m = a.matrix();
    let d = a.dim();
    let split = |i: usize| {
        let r = i % right;
        let t = (i / right) % mid;
        let l = i / (right * mid);
        (l, t, r)
    };
    let out = CMatrix::from_fn(d, d, |i, j| {
        let (li, ti, ri) = split(i);
        let (lj, tj, rj) = split(j);
        m[((li * mid + tj) * right + ri, (lj * mid + ti) * right + rj)]
    });
    Ok(HermitianOperator::from_parts(out, a.dims.clone()))
}

/// Checks that `perm` is a 1-based permutation of `1..=n`.
pub fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p == 0 || p > n || seen[p - 1] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p - 1] = true;
    }
    Ok(())
}

/// For each output basis index, the input basis index it is read from under
/// the factor permutation `perm` (1-based, output slot `j` reads input slot `perm[j]`).
pub(crate) fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p - 1]).collect();
    let mut in_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        in_strides[k] = in_strides[k + 1] * dims[k + 1];
    }
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let idx = digits
            .iter()
            .zip(perm)
            .map(|(&o, &p)| o * in_strides[p - 1])
            .sum();
        map.push(idx);
        // advance the output multi-index, last digit fastest
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < out_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

/// `θ_π(A_1 ⊗ ... ⊗ A_n) = A_{p_1} ⊗ ... ⊗ A_{p_n}` with `perm = (p_1, ..., p_n)`, 1-based.
pub fn permute_factors(a: &HermitianOperator, perm: &[usize]) -> Result<HermitianOperator> {
    let dims = a.factor_dims()?;
    validate_permutation(perm, dims.len())?;
    let map = permutation_index_map(dims, perm);
    let m = a.matrix();
    let d = a.dim();
    let out = CMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])]);
    let out_dims = perm.iter().map(|&p| dims[p - 1]).collect();
    Ok(HermitianOperator::from_parts(out, Some(out_dims)))
}

/// The swap `θ(A ⊗ B) = B ⊗ A` on a two-factor operator.
pub fn swap_theta(a: &HermitianOperator) -> Result<HermitianOperator> {
    let n = a.factor_dims()?.len();
    if n != 2 {
        return Err(Error::Structure(format!("swap needs exactly two factors, found {n}")));
    }
    permute_factors(a, &[2, 1])
}

/// Spectral decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.values.len();
        let mut out = CMatrix::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            out += (&v * v.adjoint()).scale(lam);
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver.
pub fn eig_hermitian(a: &HermitianOperator) -> Result<Eigen> {
    let d = a.dim();
    let mut m = a.matrix().clone();
    let mut v = CMatrix::identity(d, d);
    let scale = m.norm();
    let off_norm = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let target = 1e-14 * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let g = m[(p, q)];
                let g_abs = g.norm();
                if g_abs <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = g / g_abs; // e^{iα}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g_abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W acts on the (p, q) plane: W_pp = c, W_pq = s,
                // W_qp = -s e^{-iα}, W_qq = c e^{-iα}.
                let w_qp = -phase.conj() * s;
                let w_qq = phase.conj() * c;
                for k in 0..d {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c + mkq * w_qp;
                    m[(k, q)] = mkp * s + mkq * w_qq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * w_qp;
                    v[(k, q)] = vkp * s + vkq * w_qq;
                }
                for k in 0..d {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c + mqk * w_qp.conj();
                    m[(q, k)] = mpk * s + mqk * w_qq.conj();
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged && off_norm(&m) > target {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(a: &HermitianOperator) -> Result<f64> {
    Ok(eig_hermitian(a)?.values.iter().map(|l| l.abs()).sum())
}

/// Returns the pure state `A` represents when its spectrum is `(1, 0, ..., 0)`
/// within `tol`; `None` otherwise.
pub fn is_pure(a: &HermitianOperator, tol: f64) -> Result<Option<PureState>> {
    check_tol(tol)?;
    let eig = eig_hermitian(a)?;
    let ok = (eig.values[0] - 1.0).abs() <= tol && eig.values[1..].iter().all(|l| l.abs() <= tol);
    if !ok {
        return Ok(None);
    }
    Ok(Some(PureState::from_vector(eig.vectors.column(0).into_owned())?))
}

/// Membership test for product pure states. On success returns one pure state
/// per factor (an operator without factor dimensions counts as one factor).
pub fn is_product_pure(a: &HermitianOperator, tol: f64) -> Result<Option<Vec<PureState>>> {
    if is_pure(a, tol)?.is_none() {
        return Ok(None);
    }
    let dims = dims_or_single(a);
    let a = if a.dims().is_none() { a.clone().set_dims(dims.clone())? } else { a.clone() };
    let n = dims.len();
    let mut factors = Vec::with_capacity(n);
    for i in 1..=n {
        let red = reduce_to_factor(&a, FactorIndex(i))?;
        match is_pure(&red, tol)? {
            Some(p) => factors.push(p),
            None => return Ok(None),
        }
    }
    let projections: Vec<&HermitianOperator> = factors.iter().map(|p| p.projection()).collect();
    let recon = tensor_all(&projections);
    // A pure state with marginals that are pure up to δ is within sqrt(2 n δ) of the product.
    let recon_tol = (2.0 * n as f64 * tol).sqrt() + tol * a.dim() as f64;
    if recon.distance(&a) > recon_tol {
        return Ok(None);
    }
    Ok(Some(factors))
}

/// Deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: a normalized standard complex Gaussian vector.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
        if v.norm() > 1e-12 {
            return PureState::from_vector(v);
        }
    }
}

pub fn random_pure_seeded(dim: usize, seed: u64) -> Result<PureState> {
    random_pure(dim, &mut seeded_rng(seed))
}

/// Random Hermitian matrix `(G + G*)/2` with standard complex Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let h = (&g + g.adjoint()).unscale(2.0);
    Ok(HermitianOperator::from_parts(h, None))
}

pub fn random_hermitian_seeded(dim: usize, seed: u64) -> Result<HermitianOperator> {
    random_hermitian(dim, &mut seeded_rng(seed))
}

/// Random `rows x cols` matrix with orthonormal columns (Gram-Schmidt on a
/// complex Gaussian matrix). Square outputs are Haar unitaries.
pub fn random_isometry_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<CMatrix> {
    if cols == 0 || rows < cols {
        return Err(Error::Structure(format!("no isometry from dimension {cols} into {rows}")));
    }
    'retry: loop {
        let mut m = CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng));
        for j in 0..cols {
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for k in 0..j {
                    let proj = m.column(k).dotc(&m.column(j));
                    let ck = m.column(k).into_owned();
                    let mut cj = m.column_mut(j);
                    cj -= ck * proj;
                }
            }
            let n = m.column(j).norm();
            if n < 1e-10 {
                continue 'retry;
            }
            m.column_mut(j).unscale_mut(n);
        }
        return Ok(m);
    }
}
