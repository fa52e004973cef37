//! Separable-pure-state preservers on `H ⊗ K` and on `H_1 ⊗ ... ⊗ H_n`.
//!
//! The bipartite classifier reads the behaviour of the slice maps
//! `φ1(A, B) = Tr_2 Φ(A ⊗ B)` and `φ2(A, B) = Tr_1 Φ(A ⊗ B)` at fixed anchors,
//! places it in a 3 x 3 grid of cases and reads off the canonical form.
//! Every positive verdict is checked against the reconstructed map on the full
//! product Hermitian basis; at finite dimension product pure states span the
//! whole Hermitian space, so that check is total.

use std::fmt;

use crate::error::{check_tol, Error, Result};
use crate::linalg::{
    is_product_pure, partial_trace, random_pure, reduce_to_factor, seeded_rng, tensor, tensor_all, FactorIndex,
    HermitianOperator, PureState,
};
use crate::pure::{classify_pure_preserver, witness_family, ClassifyOptions, PureClassification, RANDOM_WITNESS_TRIES};
use crate::superop::{canonical_multi, canonical_sep, superop_equal, Isometry, MultiForm, SampledImage, SepForm, SuperOperator};

/// Number of random product states recorded for a form 8/9 pattern.
pub const PATTERN_SAMPLES: usize = 200;
/// Cap on the deterministic product witness family.
pub const MAX_PRODUCT_FAMILY: usize = 4096;
/// Two image factors closer than this (infidelity) count as the same pure state.
pub const FACTOR_TOL: f64 = 1e-6;

/// Behaviour of `φ1(·, Q)`, `φ2(·, Q)` at a fixed second factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowCase {
    /// both trace replacers
    A,
    /// `φ1` a trace replacer, `φ2` a conjugation
    B,
    /// `φ1` a conjugation, `φ2` a trace replacer
    C,
}

/// Behaviour of `φ1(P, ·)`, `φ2(P, ·)` at a fixed first factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColCase {
    A,
    B,
    C,
}

impl RowCase {
    pub fn label(self) -> &'static str {
        match self {
            RowCase::A => "a",
            RowCase::B => "b",
            RowCase::C => "c",
        }
    }
}

impl ColCase {
    pub fn label(self) -> &'static str {
        match self {
            ColCase::A => "a\u{2032}",
            ColCase::B => "b\u{2032}",
            ColCase::C => "c\u{2032}",
        }
    }
}

/// A cell of the case grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    pub row: RowCase,
    pub col: ColCase,
}

impl Grid {
    /// Canonical form tag of the cell.
    pub fn form_tag(self) -> u8 {
        use ColCase as K;
        use RowCase as R;
        match (self.row, self.col) {
            (R::A, K::A) => 1,
            (R::A, K::B) => 3,
            (R::A, K::C) => 4,
            (R::B, K::A) => 5,
            (R::B, K::B) => 9,
            (R::B, K::C) => 7,
            (R::C, K::A) => 2,
            (R::C, K::B) => 6,
            (R::C, K::C) => 8,
        }
    }

    pub fn labels(self) -> [&'static str; 2] {
        [self.row.label(), self.col.label()]
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row.label(), self.col.label())
    }
}

/// Grid cell together with the slice classifications it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceProfile {
    pub grid: Grid,
    pub p0: PureState,
    pub q0: PureState,
    /// `A ↦ φ1(A, Q0)` and `A ↦ φ2(A, Q0)`.
    pub row_slices: [PureClassification; 2],
    /// `B ↦ φ1(P0, B)` and `B ↦ φ2(P0, B)`.
    pub col_slices: [PureClassification; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub enum SepClassification {
    Form { form: SepForm, grid: Grid, residual: f64 },
    /// Grid cell (b,b′) or (c,c′) with consistent sampled data; `form` is
    /// `Form8`/`Form9` carrying the fixed factor and the recorded images.
    Pattern89 { form: SepForm, grid: Grid },
    /// `Φ(p ⊗ q)` is not a product pure state.
    NotPreserver { p: PureState, q: PureState },
}

impl SepClassification {
    pub fn tag(&self) -> Option<u8> {
        match self {
            SepClassification::Form { form, .. } | SepClassification::Pattern89 { form, .. } => Some(form.tag()),
            SepClassification::NotPreserver { .. } => None,
        }
    }

    pub fn grid(&self) -> Option<Grid> {
        match self {
            SepClassification::Form { grid, .. } | SepClassification::Pattern89 { grid, .. } => Some(*grid),
            SepClassification::NotPreserver { .. } => None,
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self {
            SepClassification::Form { residual, .. } => Some(*residual),
            _ => None,
        }
    }
}

fn check_bipartite(phi: &SuperOperator, dims: [usize; 2]) -> Result<()> {
    if phi.in_dims() != dims || phi.out_dims() != dims {
        return Err(Error::Structure(format!(
            "bipartite classifier expects a map {dims:?} -> {dims:?}, got {:?} -> {:?}",
            phi.in_dims(),
            phi.out_dims()
        )));
    }
    Ok(())
}

/// `φ1(A, B) = Tr_2 Φ(A ⊗ B)` for `which = 1`, `φ2(A, B) = Tr_1 Φ(A ⊗ B)` for `which = 2`.
pub fn slice_phi(
    phi: &SuperOperator,
    a: &HermitianOperator,
    b: &HermitianOperator,
    which: FactorIndex,
) -> Result<HermitianOperator> {
    if phi.out_dims().len() != 2 {
        return Err(Error::Structure("slice maps need a two-factor output".into()));
    }
    let a = a.clone().set_dims(vec![a.dim()])?;
    let b = b.clone().set_dims(vec![b.dim()])?;
    let img = phi.apply(&tensor(&a, &b))?;
    let other = match which.get() {
        1 => 2,
        2 => 1,
        k => return Err(Error::Structure(format!("no factor {k} in a bipartite system"))),
    };
    partial_trace(&img, FactorIndex::new(other)?)
}

/// `A ↦ φ_which(A, Q)` as a single-factor superoperator.
pub fn row_slice(phi: &SuperOperator, q: &PureState, which: FactorIndex) -> Result<SuperOperator> {
    let m = phi.in_dims()[0];
    let out = phi.out_dims()[which.get() - 1];
    SuperOperator::from_action(&[m], &[out], |a| slice_phi(phi, a, q.projection(), which))
}

/// `B ↦ φ_which(P, B)` as a single-factor superoperator.
pub fn col_slice(phi: &SuperOperator, p: &PureState, which: FactorIndex) -> Result<SuperOperator> {
    let n = phi.in_dims()[1];
    let out = phi.out_dims()[which.get() - 1];
    SuperOperator::from_action(&[n], &[out], |b| slice_phi(phi, p.projection(), b, which))
}

/// Classifies a slice; `None` when it is not a pure-state preserver (or
/// the single-factor classifier cannot decide).
fn classify_slice(slice: &SuperOperator, opts: &ClassifyOptions) -> Result<Option<PureClassification>> {
    match classify_pure_preserver(slice, opts) {
        Ok(PureClassification::NotPreserver { .. }) | Err(Error::Inconclusive(_)) => Ok(None),
        Ok(c) => Ok(Some(c)),
        Err(e) => Err(e),
    }
}

fn is_trace_replacer(c: &PureClassification) -> bool {
    matches!(c, PureClassification::TraceReplacer { .. })
}

fn case_of(first: &PureClassification, second: &PureClassification) -> Option<u8> {
    match (is_trace_replacer(first), is_trace_replacer(second)) {
        (true, true) => Some(0),
        (true, false) => Some(1),
        (false, true) => Some(2),
        // two conjugations at once cannot happen for a preserver
        (false, false) => None,
    }
}

fn row_slices_at(phi: &SuperOperator, q: &PureState, opts: &ClassifyOptions) -> Result<Option<[PureClassification; 2]>> {
    let Some(s1) = classify_slice(&row_slice(phi, q, FactorIndex::new(1)?)?, opts)? else { return Ok(None) };
    let Some(s2) = classify_slice(&row_slice(phi, q, FactorIndex::new(2)?)?, opts)? else { return Ok(None) };
    Ok(Some([s1, s2]))
}

fn col_slices_at(phi: &SuperOperator, p: &PureState, opts: &ClassifyOptions) -> Result<Option<[PureClassification; 2]>> {
    let Some(s1) = classify_slice(&col_slice(phi, p, FactorIndex::new(1)?)?, opts)? else { return Ok(None) };
    let Some(s2) = classify_slice(&col_slice(phi, p, FactorIndex::new(2)?)?, opts)? else { return Ok(None) };
    Ok(Some([s1, s2]))
}

/// Row case at a fixed second factor `q`; `None` if a slice is not a preserver
/// or both slices are conjugations.
pub fn row_case_at(phi: &SuperOperator, q: &PureState, opts: &ClassifyOptions) -> Result<Option<RowCase>> {
    Ok(row_slices_at(phi, q, opts)?
        .and_then(|[a, b]| case_of(&a, &b))
        .map(|c| [RowCase::A, RowCase::B, RowCase::C][c as usize]))
}

/// Column case at a fixed first factor `p`.
pub fn col_case_at(phi: &SuperOperator, p: &PureState, opts: &ClassifyOptions) -> Result<Option<ColCase>> {
    Ok(col_slices_at(phi, p, opts)?
        .and_then(|[a, b]| case_of(&a, &b))
        .map(|c| [ColCase::A, ColCase::B, ColCase::C][c as usize]))
}

/// Slice profile at the anchors `P0 = e_1e_1*`, `Q0 = u_1u_1*`.
pub fn slice_profile(phi: &SuperOperator, dims: [usize; 2], opts: &ClassifyOptions) -> Result<Option<SliceProfile>> {
    check_tol(opts.tol)?;
    check_bipartite(phi, dims)?;
    let p0 = PureState::basis(dims[0], 0);
    let q0 = PureState::basis(dims[1], 0);
    let Some(row_slices) = row_slices_at(phi, &q0, opts)? else { return Ok(None) };
    let Some(col_slices) = col_slices_at(phi, &p0, opts)? else { return Ok(None) };
    let (Some(r), Some(c)) = (case_of(&row_slices[0], &row_slices[1]), case_of(&col_slices[0], &col_slices[1])) else {
        return Ok(None);
    };
    let grid = Grid { row: [RowCase::A, RowCase::B, RowCase::C][r as usize], col: [ColCase::A, ColCase::B, ColCase::C][c as usize] };
    Ok(Some(SliceProfile { grid, p0, q0, row_slices, col_slices }))
}

fn extra_anchors(d: usize) -> Vec<PureState> {
    if d < 2 {
        Vec::new()
    } else {
        vec![PureState::basis(d, 1), PureState::uniform(d)]
    }
}

fn trace_state(c: &PureClassification) -> PureState {
    match c {
        PureClassification::TraceReplacer { r, .. } => r.clone(),
        _ => unreachable!("grid case guarantees a trace replacer"),
    }
}

fn conj_iso(c: &PureClassification) -> Isometry {
    match c {
        PureClassification::Conjugation { u, .. } => u.clone(),
        _ => unreachable!("grid case guarantees a conjugation"),
    }
}

/// Classifies a separable-pure-state preserver candidate on `[m, n]`.
pub fn classify_sep_preserver(phi: &SuperOperator, dims: [usize; 2], opts: &ClassifyOptions) -> Result<SepClassification> {
    check_tol(opts.tol)?;
    check_bipartite(phi, dims)?;
    match classify_positive(phi, dims, opts)? {
        Some(c) => Ok(c),
        None => sep_witness(phi, dims, opts),
    }
}

fn classify_positive(phi: &SuperOperator, dims: [usize; 2], opts: &ClassifyOptions) -> Result<Option<SepClassification>> {
    let Some(profile) = slice_profile(phi, dims, opts)? else { return Ok(None) };
    let grid = profile.grid;
    for q in extra_anchors(dims[1]) {
        if row_case_at(phi, &q, opts)? != Some(grid.row) {
            return Ok(None);
        }
    }
    for p in extra_anchors(dims[0]) {
        if col_case_at(phi, &p, opts)? != Some(grid.col) {
            return Ok(None);
        }
    }
    let [row1, row2] = &profile.row_slices;
    let [col1, col2] = &profile.col_slices;
    let form = match grid.form_tag() {
        1 => SepForm::Form1 { r1: trace_state(row1), r2: trace_state(row2) },
        2 => SepForm::Form2 { u1: conj_iso(row1), r2: trace_state(row2) },
        3 => SepForm::Form3 { r1: trace_state(row1), u2: conj_iso(col2) },
        4 => SepForm::Form4 { u1: conj_iso(col1), r2: trace_state(row2) },
        5 => SepForm::Form5 { r1: trace_state(row1), u2: conj_iso(row2) },
        6 => SepForm::Form6 { u1: conj_iso(row1), u2: conj_iso(col2) },
        7 => SepForm::Form7 { u1: conj_iso(col1), u2: conj_iso(row2) },
        9 => {
            let r1 = trace_state(row1);
            return Ok(verify_pattern89(phi, dims, 9, &r1, opts)?
                .map(|family| SepClassification::Pattern89 { form: SepForm::Form9 { r1, family }, grid }));
        }
        _ => {
            let r2 = trace_state(row2);
            return Ok(verify_pattern89(phi, dims, 8, &r2, opts)?
                .map(|family| SepClassification::Pattern89 { form: SepForm::Form8 { r2, family }, grid }));
        }
    };
    if form.validate(dims).is_err() {
        return Ok(None);
    }
    let cmp = superop_equal(&canonical_sep(&form, dims)?, phi, opts.tol)?;
    Ok(cmp.equal.then_some(SepClassification::Form { form, grid, residual: cmp.max_deviation }))
}

/// The image of the pure state `x` under a classified slice.
fn slice_image(c: &PureClassification, x: &PureState) -> Result<Option<HermitianOperator>> {
    match c {
        PureClassification::Conjugation { u, .. } => Ok(Some(u.act(x.projection())?)),
        // on a one-dimensional input both canonical forms coincide
        PureClassification::TraceReplacer { r, .. } if x.dim() == 1 => Ok(Some(r.projection().clone())),
        _ => Ok(None),
    }
}

fn same_state(a: &HermitianOperator, b: &HermitianOperator) -> bool {
    a.distance(b) <= FACTOR_TOL.sqrt()
}

/// Records `Φ(P ⊗ Q)` on seeded random product pure states and checks the
/// (8)/(9) pattern: tag 9 requires every image to be `R ⊗ X`, tag 8 `X ⊗ R`,
/// with the varying factor `X` equal to both `U_P Q U_P*` (slice at fixed `P`)
/// and `V_Q P V_Q*` (slice at fixed `Q`). Returns the recorded family, or
/// `None` if any check fails.
pub fn verify_pattern89(
    phi: &SuperOperator,
    dims: [usize; 2],
    tag: u8,
    r: &PureState,
    opts: &ClassifyOptions,
) -> Result<Option<Vec<SampledImage>>> {
    check_tol(opts.tol)?;
    check_bipartite(phi, dims)?;
    let (fixed, varying) = match tag {
        9 => (0, 1),
        8 => (1, 0),
        _ => return Err(Error::InvalidInput(format!("no (8)/(9) pattern with tag {tag}"))),
    };
    if r.dim() != dims[fixed] {
        return Err(Error::DimensionMismatch { expected: dims[fixed], found: r.dim() });
    }
    let which = FactorIndex::new(varying + 1)?;
    let mut rng = seeded_rng(opts.seed);
    let mut family = Vec::with_capacity(PATTERN_SAMPLES);
    for _ in 0..PATTERN_SAMPLES {
        let p = random_pure(dims[0], &mut rng)?;
        let q = random_pure(dims[1], &mut rng)?;
        let img = phi.apply(&tensor(p.projection(), q.projection()))?;
        let Some(factors) = is_product_pure(&img, opts.tol)? else { return Ok(None) };
        if factors[fixed].infidelity(r) > FACTOR_TOL {
            return Ok(None);
        }
        let x = factors[varying].clone();
        let Some(u_p) = classify_slice(&col_slice(phi, &p, which)?, opts)? else { return Ok(None) };
        let Some(v_q) = classify_slice(&row_slice(phi, &q, which)?, opts)? else { return Ok(None) };
        let (Some(from_q), Some(from_p)) = (slice_image(&u_p, &q)?, slice_image(&v_q, &p)?) else {
            return Ok(None);
        };
        if !same_state(&from_q, x.projection()) || !same_state(&from_p, x.projection()) {
            return Ok(None);
        }
        family.push(SampledImage { p, q, factor: x });
    }
    Ok(Some(family))
}

fn sep_witness(phi: &SuperOperator, dims: [usize; 2], opts: &ClassifyOptions) -> Result<SepClassification> {
    match find_product_witness(phi, &dims, opts)? {
        Some(mut w) => {
            let q = w.pop().expect("two factors");
            let p = w.pop().expect("two factors");
            Ok(SepClassification::NotPreserver { p, q })
        }
        None => Err(Error::Inconclusive(format!(
            "no canonical form matched within {:e} and no product witness found",
            opts.tol
        ))),
    }
}

fn product_of(states: &[&PureState]) -> HermitianOperator {
    let projections: Vec<&HermitianOperator> = states.iter().map(|s| s.projection()).collect();
    tensor_all(&projections)
}

/// First product pure state whose image is not a product pure state: the
/// product of the per-factor deterministic families (at most
/// [`MAX_PRODUCT_FAMILY`] candidates, in lexicographic order), then seeded
/// random products.
pub fn find_product_witness(phi: &SuperOperator, dims: &[usize], opts: &ClassifyOptions) -> Result<Option<Vec<PureState>>> {
    let fails = |states: &[&PureState]| -> Result<bool> {
        Ok(is_product_pure(&phi.apply(&product_of(states))?, opts.tol)?.is_none())
    };
    let families: Vec<Vec<PureState>> = dims.iter().map(|&d| witness_family(d)).collect();
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..MAX_PRODUCT_FAMILY {
        let pick: Vec<&PureState> = idx.iter().zip(&families).map(|(&i, f)| &f[i]).collect();
        if fails(&pick)? {
            return Ok(Some(pick.into_iter().cloned().collect()));
        }
        // odometer increment, last factor fastest
        let mut k = dims.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < families[k].len() {
                break;
            }
            idx[k] = 0;
        }
        if k == 0 && idx[0] == 0 {
            break;
        }
    }
    let mut rng = seeded_rng(opts.seed);
    for _ in 0..RANDOM_WITNESS_TRIES {
        let states: Vec<PureState> = dims.iter().map(|&d| random_pure(d, &mut rng)).collect::<Result<_>>()?;
        let refs: Vec<&PureState> = states.iter().collect();
        if fails(&refs)? {
            return Ok(Some(states));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProductMcOutcome {
    Pass,
    Fail { witness: Vec<PureState> },
}

impl ProductMcOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ProductMcOutcome::Pass)
    }
}

/// Monte-Carlo check that random product pure inputs have product pure images.
pub fn mc_verify_product_pure(phi: &SuperOperator, samples: usize, seed: u64, tol: f64) -> Result<ProductMcOutcome> {
    check_tol(tol)?;
    let mut rng = seeded_rng(seed);
    for _ in 0..samples {
        let states: Vec<PureState> = phi.in_dims().iter().map(|&d| random_pure(d, &mut rng)).collect::<Result<_>>()?;
        let refs: Vec<&PureState> = states.iter().collect();
        let img = phi.apply(&product_of(&refs))?;
        if is_product_pure(&img, tol)?.is_none() {
            return Ok(ProductMcOutcome::Fail { witness: states });
        }
    }
    Ok(ProductMcOutcome::Pass)
}

/// True iff the verdict is form 6 or 7 with square isometries, i.e. the map
/// sends product pure states onto product pure states.
pub fn check_both_directions(c: &SepClassification, dims: [usize; 2]) -> bool {
    match c {
        SepClassification::Form { form, .. } => form_both_directions(form, dims),
        _ => false,
    }
}

/// The form-level test behind [`check_both_directions`].
pub fn form_both_directions(form: &SepForm, dims: [usize; 2]) -> bool {
    matches!(form.tag(), 6 | 7) && form.validate(dims).is_ok() && form.isometries().iter().all(|u| u.is_square())
}

/// Deviations behind the doubling obstruction: with `P1 = E11`, `P2 = E22`,
/// `P3`, `P4` the projections onto `(e1 ± e2)/√2` (embedded in dimension `m`),
/// returns `(‖P1+P2−P3−P4‖_F, ‖P1⊗P1+P2⊗P2−P3⊗P3−P4⊗P4‖_F)`.
pub fn doubling_obstruction(m: usize) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("doubling obstruction needs m >= 2, got {m}")));
    }
    let p1 = PureState::basis(m, 0);
    let p2 = PureState::basis(m, 1);
    let mut plus = crate::linalg::CVector::zeros(m);
    plus[0] = num_complex::Complex64::new(1.0, 0.0);
    plus[1] = num_complex::Complex64::new(1.0, 0.0);
    let mut minus = plus.clone();
    minus[1] = -minus[1];
    let p3 = PureState::from_vector(plus)?;
    let p4 = PureState::from_vector(minus)?;
    let sum = |a: &PureState, b: &PureState| a.projection().lin_comb(1.0, b.projection(), 1.0);
    let lin = sum(&p1, &p2)?.distance(&sum(&p3, &p4)?);
    let sq = |p: &PureState| tensor(p.projection(), p.projection());
    let left = sq(&p1).lin_comb(1.0, &sq(&p2), 1.0)?;
    let right = sq(&p3).lin_comb(1.0, &sq(&p4), 1.0)?;
    Ok((lin, left.distance(&right)))
}

/// `P1 + P2 = P3 + P4` within `1e-12` while the tensor squares differ by more than `0.5`.
pub fn doubling_obstruction_check(m: usize) -> Result<bool> {
    let (lin, gap) = doubling_obstruction(m)?;
    Ok(lin <= 1e-12 && gap > 0.5)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MultiClassification {
    Form { form: MultiForm, residual: f64 },
    NotPreserver { witness: Vec<PureState> },
    /// The probe images coincide in output slot `slot` (1-based), so the
    /// linear-independence hypothesis behind the multipartite classification fails.
    InsufficientRichness { slot: usize },
}

fn check_square(phi: &SuperOperator, dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Structure(format!("multipartite classifier needs at least two factors, got {dims:?}")));
    }
    if phi.in_dims() != dims || phi.out_dims() != dims {
        return Err(Error::Structure(format!(
            "expected a map {dims:?} -> {dims:?}, got {:?} -> {:?}",
            phi.in_dims(),
            phi.out_dims()
        )));
    }
    Ok(())
}

fn multi_witness(phi: &SuperOperator, dims: &[usize], opts: &ClassifyOptions) -> Result<MultiClassification> {
    match find_product_witness(phi, dims, opts)? {
        Some(witness) => Ok(MultiClassification::NotPreserver { witness }),
        None => Err(Error::Inconclusive(format!(
            "no permutation/isometry form matched within {:e} and no product witness found",
            opts.tol
        ))),
    }
}

/// Image factors of a product input, or the input itself as a witness.
fn image_factors(phi: &SuperOperator, states: &[PureState], tol: f64) -> Result<std::result::Result<Vec<PureState>, Vec<PureState>>> {
    let refs: Vec<&PureState> = states.iter().collect();
    match is_product_pure(&phi.apply(&product_of(&refs))?, tol)? {
        Some(f) => Ok(Ok(f)),
        None => Ok(Err(states.to_vec())),
    }
}

fn variations(d: usize) -> Vec<PureState> {
    let mut half_i = crate::linalg::CVector::zeros(d);
    half_i[0] = num_complex::Complex64::new(1.0, 0.0);
    half_i[1] = num_complex::Complex64::new(0.0, 1.0);
    vec![PureState::basis(d, 1), PureState::uniform(d), PureState::from_vector(half_i).expect("nonzero vector")]
}

/// Classifies a map on `H_1 ⊗ ... ⊗ H_n` as `F ↦ (⊗U_j) θ_π(F) (⊗U_j)*`.
pub fn classify_multi_preserver(phi: &SuperOperator, dims: &[usize], opts: &ClassifyOptions) -> Result<MultiClassification> {
    check_tol(opts.tol)?;
    check_square(phi, dims)?;
    let n = dims.len();

    // richness probe
    if let Some(k) = dims.iter().position(|&d| d < 2) {
        return Ok(MultiClassification::InsufficientRichness { slot: k + 1 });
    }
    let base: Vec<PureState> = dims.iter().map(|&d| PureState::basis(d, 0)).collect();
    let spread: Vec<PureState> = dims.iter().map(|&d| PureState::uniform(d)).collect();
    let base_img = match image_factors(phi, &base, opts.tol)? {
        Ok(f) => f,
        Err(witness) => return Ok(MultiClassification::NotPreserver { witness }),
    };
    let spread_img = match image_factors(phi, &spread, opts.tol)? {
        Ok(f) => f,
        Err(witness) => return Ok(MultiClassification::NotPreserver { witness }),
    };
    for j in 0..n {
        if base_img[j].infidelity(&spread_img[j]) <= FACTOR_TOL {
            return Ok(MultiClassification::InsufficientRichness { slot: j + 1 });
        }
    }

    // permutation discovery: output slot j moves when input slot p_j varies
    let mut perm = vec![0usize; n];
    for k in 0..n {
        let mut moved = vec![false; n];
        for v in variations(dims[k]) {
            let mut input = base.clone();
            input[k] = v;
            let img = match image_factors(phi, &input, opts.tol)? {
                Ok(f) => f,
                Err(witness) => return Ok(MultiClassification::NotPreserver { witness }),
            };
            for j in 0..n {
                moved[j] |= img[j].infidelity(&base_img[j]) > FACTOR_TOL;
            }
        }
        let slots: Vec<usize> = (0..n).filter(|&j| moved[j]).collect();
        if slots.len() != 1 || perm[slots[0]] != 0 {
            return multi_witness(phi, dims, opts);
        }
        perm[slots[0]] = k + 1;
    }

    // per-slot isometries
    let mut isometries = Vec::with_capacity(n);
    for j in 0..n {
        let k = perm[j] - 1;
        let slot = SuperOperator::from_action(&[dims[k]], &[dims[j]], |a| {
            let mut ops: Vec<&HermitianOperator> = base.iter().map(|s| s.projection()).collect();
            ops[k] = a;
            reduce_to_factor(&phi.apply(&tensor_all(&ops))?, FactorIndex::new(j + 1)?)
        })?;
        match classify_slice(&slot, opts)? {
            Some(PureClassification::Conjugation { u, .. }) => isometries.push(u),
            _ => return multi_witness(phi, dims, opts),
        }
    }
    let form = MultiForm { perm, isometries };
    if form.validate(dims).is_err() {
        return multi_witness(phi, dims, opts);
    }
    let cmp = superop_equal(&canonical_multi(&form, dims)?, phi, opts.tol)?;
    if cmp.equal {
        Ok(MultiClassification::Form { form, residual: cmp.max_deviation })
    } else {
        multi_witness(phi, dims, opts)
    }
}
