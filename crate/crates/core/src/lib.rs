//! Construction, application and classification of real-linear maps on
//! finite-dimensional Hermitian operator spaces that send pure states to pure
//! states, or product pure states to product pure states.
//!
//! - [`linalg`]: dense Hermitian kernel (tensor structure, partial trace and
//!   transpose, factor permutations, Jacobi eigensolver, purity tests).
//! - [`superop`]: maps stored as real matrices in a fixed orthonormal
//!   Hermitian basis, plus constructors for every canonical preserver form.
//! - [`pure`]: single-system classifier (trace replacer vs. isometric conjugation).
//! - [`sep`]: bipartite classifier driven by slice maps, and the
//!   multipartite permutation/isometry classifier.
//! - [`states`]: separable states and their use with classified preservers.
//! - [`io`], [`report`]: JSON formats.

pub mod error;
pub mod io;
pub mod linalg;
pub mod pure;
pub mod report;
pub mod sep;
pub mod states;
pub mod superop;

pub use error::{Error, Result};
pub use linalg::{FactorIndex, HermitianOperator, PureState};
pub use superop::{ConjFlag, Isometry, MultiForm, SepForm, SuperOperator};
