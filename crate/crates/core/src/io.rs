//! JSON formats for superoperators, separable states and map specifications.
//!
//! Complex numbers are `[re, im]` pairs; complex matrices are split into
//! `"re"` and `"im"` row lists. Parse errors carry the path of the offending
//! field.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, PureState};
use crate::states::{SeparableState, SeparableTerm};
use crate::superop::{ConjFlag, Isometry, MultiForm, SepForm, SuperOperator, BASIS_TAG};

/// Deserializes `text`, reporting failures as [`Error::Json`] with a field path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Json { path, message: e.into_inner().to_string() }
    })
}

pub type ComplexJson = [f64; 2];

pub fn vector_to_json(v: &CVector) -> Vec<ComplexJson> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[ComplexJson]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|[re, im]| Complex64::new(*re, *im)))
}

pub fn state_to_json(p: &PureState) -> Vec<ComplexJson> {
    vector_to_json(p.vector())
}

pub fn state_from_json(v: &[ComplexJson]) -> Result<PureState> {
    if v.is_empty() {
        return Err(Error::InvalidInput("empty state vector".into()));
    }
    PureState::from_vector(vector_from_json(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| (0..m.nrows()).map(|r| m.row(r).iter().map(f).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let nrows = self.re.len();
        let ncols = self.re.first().map_or(0, Vec::len);
        let shape_ok = self.im.len() == nrows
            && self.re.iter().chain(&self.im).all(|row| row.len() == ncols)
            && nrows > 0
            && ncols > 0;
        if !shape_ok {
            return Err(Error::Structure("matrix \"re\"/\"im\" rows are ragged or mismatched".into()));
        }
        Ok(CMatrix::from_fn(nrows, ncols, |r, c| Complex64::new(self.re[r][c], self.im[r][c])))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometryJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub flag: ConjFlag,
}

impl IsometryJson {
    pub fn from_isometry(u: &Isometry) -> Self {
        let m = MatrixJson::from_matrix(u.matrix());
        Self { re: m.re, im: m.im, flag: u.flag() }
    }

    pub fn to_isometry(&self) -> Result<Isometry> {
        let m = MatrixJson { re: self.re.clone(), im: self.im.clone() }.to_matrix()?;
        Isometry::new(m, self.flag)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperOperatorJson {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub basis: String,
    pub coeff: Vec<Vec<f64>>,
}

impl SuperOperatorJson {
    pub fn from_superop(phi: &SuperOperator) -> Self {
        let c = phi.coeff();
        Self {
            in_dims: phi.in_dims().to_vec(),
            out_dims: phi.out_dims().to_vec(),
            basis: BASIS_TAG.to_string(),
            coeff: (0..c.nrows()).map(|r| c.row(r).iter().copied().collect()).collect(),
        }
    }

    pub fn to_superop(&self) -> Result<SuperOperator> {
        if self.basis != BASIS_TAG {
            return Err(Error::Json {
                path: "basis".into(),
                message: format!("unknown basis tag {:?}, expected {BASIS_TAG:?}", self.basis),
            });
        }
        let nrows = self.coeff.len();
        let ncols = self.coeff.first().map_or(0, Vec::len);
        if let Some(r) = self.coeff.iter().position(|row| row.len() != ncols) {
            return Err(Error::Json { path: format!("coeff[{r}]"), message: format!("expected {ncols} entries") });
        }
        let m = DMatrix::from_fn(nrows, ncols, |r, c| self.coeff[r][c]);
        SuperOperator::new(self.in_dims.clone(), self.out_dims.clone(), m)
    }
}

pub fn superop_to_string(phi: &SuperOperator) -> String {
    serde_json::to_string(&SuperOperatorJson::from_superop(phi)).expect("finite coefficients serialize")
}

pub fn superop_from_str(text: &str) -> Result<SuperOperator> {
    parse_json::<SuperOperatorJson>(text)?.to_superop()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub p: f64,
    pub factors: Vec<Vec<ComplexJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub terms: Vec<TermJson>,
}

impl StateJson {
    pub fn from_state(s: &SeparableState) -> Self {
        Self {
            dims: s.dims().to_vec(),
            terms: s
                .terms()
                .iter()
                .map(|t| TermJson { p: t.weight, factors: t.factors.iter().map(state_to_json).collect() })
                .collect(),
        }
    }

    pub fn to_state(&self) -> Result<SeparableState> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(SeparableTerm {
                    weight: t.p,
                    factors: t.factors.iter().map(|f| state_from_json(f)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        SeparableState::new(self.dims.clone(), terms)
    }
}

/// Parameters of a bipartite canonical form; only the fields the form uses are present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SepParamsJson {
    #[serde(rename = "R1", default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<Vec<ComplexJson>>,
    #[serde(rename = "R2", default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<Vec<ComplexJson>>,
    #[serde(rename = "U1", default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<IsometryJson>,
    #[serde(rename = "U2", default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<IsometryJson>,
}

impl SepParamsJson {
    pub fn from_form(form: &SepForm) -> Self {
        let s = |p: &PureState| Some(state_to_json(p));
        let u = |v: &Isometry| Some(IsometryJson::from_isometry(v));
        let mut out = Self::default();
        match form {
            SepForm::Form1 { r1, r2 } => (out.r1, out.r2) = (s(r1), s(r2)),
            SepForm::Form2 { u1, r2 } | SepForm::Form4 { u1, r2 } => (out.u1, out.r2) = (u(u1), s(r2)),
            SepForm::Form3 { r1, u2 } | SepForm::Form5 { r1, u2 } => (out.r1, out.u2) = (s(r1), u(u2)),
            SepForm::Form6 { u1, u2 } | SepForm::Form7 { u1, u2 } => (out.u1, out.u2) = (u(u1), u(u2)),
            SepForm::Form8 { r2, .. } => out.r2 = s(r2),
            SepForm::Form9 { r1, .. } => out.r1 = s(r1),
        }
        out
    }

    pub fn to_form(&self, tag: u8) -> Result<SepForm> {
        fn need<T: Clone>(v: &Option<T>, name: &str, tag: u8) -> Result<T> {
            v.clone().ok_or_else(|| Error::Json {
                path: format!("params.{name}"),
                message: format!("form {tag} requires parameter {name}"),
            })
        }
        let r1 = || state_from_json(&need(&self.r1, "R1", tag)?);
        let r2 = || state_from_json(&need(&self.r2, "R2", tag)?);
        let u1 = || need(&self.u1, "U1", tag)?.to_isometry();
        let u2 = || need(&self.u2, "U2", tag)?.to_isometry();
        Ok(match tag {
            1 => SepForm::Form1 { r1: r1()?, r2: r2()? },
            2 => SepForm::Form2 { u1: u1()?, r2: r2()? },
            3 => SepForm::Form3 { r1: r1()?, u2: u2()? },
            4 => SepForm::Form4 { u1: u1()?, r2: r2()? },
            5 => SepForm::Form5 { r1: r1()?, u2: u2()? },
            6 => SepForm::Form6 { u1: u1()?, u2: u2()? },
            7 => SepForm::Form7 { u1: u1()?, u2: u2()? },
            8 | 9 => {
                return Err(Error::Unsupported(format!("form {tag} has no constructor (open in source theorem)")))
            }
            _ => return Err(Error::InvalidInput(format!("no canonical form {tag}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiParamsJson {
    pub perm: Vec<usize>,
    #[serde(rename = "U")]
    pub isometries: Vec<IsometryJson>,
}

impl MultiParamsJson {
    pub fn from_form(form: &MultiForm) -> Self {
        Self { perm: form.perm.clone(), isometries: form.isometries.iter().map(IsometryJson::from_isometry).collect() }
    }

    pub fn to_form(&self) -> Result<MultiForm> {
        Ok(MultiForm {
            perm: self.perm.clone(),
            isometries: self.isometries.iter().map(IsometryJson::to_isometry).collect::<Result<_>>()?,
        })
    }
}

/// A map specification accepted by `make --spec`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpecJson {
    TraceReplacer {
        in_dim: usize,
        #[serde(rename = "R")]
        r: Vec<ComplexJson>,
    },
    Conjugation {
        #[serde(rename = "V")]
        v: IsometryJson,
    },
    Sep {
        form: u8,
        dims: [usize; 2],
        params: SepParamsJson,
    },
    Multi {
        dims: Vec<usize>,
        params: MultiParamsJson,
    },
}

impl MapSpecJson {
    pub fn build(&self) -> Result<SuperOperator> {
        match self {
            MapSpecJson::TraceReplacer { in_dim, r } => crate::superop::trace_replacer(&state_from_json(r)?, &[*in_dim]),
            MapSpecJson::Conjugation { v } => crate::superop::conjugation(&v.to_isometry()?),
            MapSpecJson::Sep { form, dims, params } => crate::superop::canonical_sep(&params.to_form(*form)?, *dims),
            MapSpecJson::Multi { dims, params } => crate::superop::canonical_multi(&params.to_form()?, dims),
        }
    }
}
