//! Separable states as convex combinations of product pure states, and
//! classified bipartite preservers used as separability-preserving filters.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, is_product_pure, partial_transpose, random_pure, seeded_rng, tensor_all, FactorIndex,
    HermitianOperator, PureState, PURITY_TOL,
};
use crate::sep::{form_both_directions, SepClassification};
use crate::superop::{canonical_sep, SepForm, SuperOperator};

/// Allowed deviation of the weight sum from 1.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Eigenvalues below `-PPT_TOL` make the partial transpose non-positive.
pub const PPT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm {
    pub weight: f64,
    pub factors: Vec<PureState>,
}

/// `Σ p_i ψ_i^(1) ⊗ ... ⊗ ψ_i^(n)` with positive weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableState {
    dims: Vec<usize>,
    terms: Vec<SeparableTerm>,
    density: HermitianOperator,
}

impl SeparableState {
    pub fn new(dims: Vec<usize>, terms: Vec<SeparableTerm>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Structure(format!("invalid factor dimensions {dims:?}")));
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("a separable state needs at least one term".into()));
        }
        let mut total = 0.0;
        for t in &terms {
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::InvalidInput(format!("term weight {} is not positive", t.weight)));
            }
            let fd: Vec<usize> = t.factors.iter().map(PureState::dim).collect();
            if fd != dims {
                return Err(Error::Structure(format!("term factors {fd:?} do not match {dims:?}")));
            }
            total += t.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        let d: usize = dims.iter().product();
        let mut density = HermitianOperator::zeros(d);
        for t in &terms {
            let projections: Vec<&HermitianOperator> = t.factors.iter().map(PureState::projection).collect();
            density = density.lin_comb(1.0, &tensor_all(&projections), t.weight)?;
        }
        let density = density.set_dims(dims.clone())?;
        Ok(Self { dims, terms, density })
    }

    /// Expands `Σ p_i ρ_i^(1) ⊗ ... ⊗ ρ_i^(n)` with mixed factors into pure
    /// product terms via the eigendecomposition of every factor.
    pub fn from_mixed_terms(dims: Vec<usize>, terms: &[(f64, Vec<HermitianOperator>)]) -> Result<Self> {
        let mut out = Vec::new();
        for (w, factors) in terms {
            if factors.len() != dims.len() {
                return Err(Error::Structure(format!("{} factors for {} slots", factors.len(), dims.len())));
            }
            let mut partial = vec![(*w, Vec::<PureState>::new())];
            for rho in factors {
                let eig = eig_hermitian(rho)?;
                if (rho.trace() - 1.0).abs() > 1e-10 || eig.values.iter().any(|&l| l < -PPT_TOL) {
                    return Err(Error::InvalidInput("factor is not a density matrix".into()));
                }
                let mut next = Vec::new();
                for (k, &l) in eig.values.iter().enumerate() {
                    if l <= PPT_TOL {
                        continue;
                    }
                    let psi = PureState::from_vector(eig.vectors.column(k).into_owned())?;
                    for (pw, fs) in &partial {
                        let mut fs = fs.clone();
                        fs.push(psi.clone());
                        next.push((pw * l, fs));
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(|(weight, factors)| SeparableTerm { weight, factors }));
        }
        // dropped tiny eigenvalues leave a small defect in the weight sum
        let total: f64 = out.iter().map(|t| t.weight).sum();
        for t in &mut out {
            t.weight /= total;
        }
        Self::new(dims, out)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn density(&self) -> &HermitianOperator {
        &self.density
    }
}

/// `k_terms` Haar-random product pure terms with Dirichlet(1, ..., 1) weights.
pub fn sample_separable(dims: &[usize], k_terms: usize, seed: u64) -> Result<SeparableState> {
    sample_separable_with(dims, k_terms, &mut seeded_rng(seed))
}

pub fn sample_separable_with<R: Rng + ?Sized>(dims: &[usize], k_terms: usize, rng: &mut R) -> Result<SeparableState> {
    if k_terms == 0 {
        return Err(Error::InvalidInput("need at least one term".into()));
    }
    let raw: Vec<f64> = (0..k_terms).map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE)).collect();
    let total: f64 = raw.iter().sum();
    let mut terms = Vec::with_capacity(k_terms);
    for w in raw {
        let factors = dims.iter().map(|&d| random_pure(d, rng)).collect::<Result<_>>()?;
        terms.push(SeparableTerm { weight: w / total, factors });
    }
    SeparableState::new(dims.to_vec(), terms)
}

/// `t·a + (1−t)·b` as a separable state (terms concatenated).
pub fn convex_mix(a: &SeparableState, b: &SeparableState, t: f64) -> Result<SeparableState> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("mixing parameter {t} outside [0, 1]")));
    }
    if a.dims != b.dims {
        return Err(Error::Structure("cannot mix states on different spaces".into()));
    }
    let mut terms = Vec::with_capacity(a.terms.len() + b.terms.len());
    for (s, f) in [(a, t), (b, 1.0 - t)] {
        if f > 0.0 {
            terms.extend(s.terms.iter().map(|x| SeparableTerm { weight: x.weight * f, factors: x.factors.clone() }));
        }
    }
    SeparableState::new(a.dims.clone(), terms)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ppt {
    Positive,
    Negative { min_eigenvalue: f64 },
}

/// Positivity of the partial transpose on the first factor. A negative result
/// certifies entanglement; a positive one proves nothing in general.
pub fn ppt_check(rho: &HermitianOperator) -> Result<Ppt> {
    let dims = rho.factor_dims()?;
    if dims.len() != 2 {
        return Err(Error::Structure(format!("partial transpose test needs two factors, got {dims:?}")));
    }
    let eig = eig_hermitian(&partial_transpose(rho, FactorIndex::new(1)?)?)?;
    let min = *eig.values.last().expect("nonempty spectrum");
    Ok(if min < -PPT_TOL { Ppt::Negative { min_eigenvalue: min } } else { Ppt::Positive })
}

/// A bipartite map with a verified form 1-7 classification.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityFilter {
    form: SepForm,
    dims: [usize; 2],
    map: SuperOperator,
}

impl SeparabilityFilter {
    pub fn from_classification(c: &SepClassification, dims: [usize; 2]) -> Result<Self> {
        match c {
            SepClassification::Form { form, .. } => Self::from_form(form.clone(), dims),
            SepClassification::Pattern89 { .. } => {
                Err(Error::Contract("forms 8/9 are not verified and cannot be used as filters".into()))
            }
            SepClassification::NotPreserver { .. } => {
                Err(Error::Contract("a non-preserver cannot be used as a filter".into()))
            }
        }
    }

    pub fn from_form(form: SepForm, dims: [usize; 2]) -> Result<Self> {
        let map = canonical_sep(&form, dims)?;
        Ok(Self { form, dims, map })
    }

    pub fn form(&self) -> &SepForm {
        &self.form
    }

    pub fn map(&self) -> &SuperOperator {
        &self.map
    }

    /// Inverse filter of a form 6/7 filter with square isometries.
    pub fn inverse(&self) -> Result<Self> {
        if !form_both_directions(&self.form, self.dims) {
            return Err(Error::Unsupported(format!("form {} filter is not invertible", self.form.tag())));
        }
        Self::from_form(self.form.inverse()?, self.dims)
    }
}

/// Applies the filter term by term; each product pure term maps to a product
/// pure term with the same weight.
pub fn filter_apply(filter: &SeparabilityFilter, rho: &SeparableState) -> Result<SeparableState> {
    if rho.dims != filter.dims {
        return Err(Error::Structure(format!("state on {:?}, filter on {:?}", rho.dims, filter.dims)));
    }
    let mut terms = Vec::with_capacity(rho.terms.len());
    for t in &rho.terms {
        let projections: Vec<&HermitianOperator> = t.factors.iter().map(PureState::projection).collect();
        let img = filter.map.apply(&tensor_all(&projections))?;
        let factors = is_product_pure(&img, PURITY_TOL)?.ok_or_else(|| {
            Error::Contract("filter sent a product pure term outside the product pure states".into())
        })?;
        terms.push(SeparableTerm { weight: t.weight, factors });
    }
    SeparableState::new(rho.dims.clone(), terms)
}
