//! Exact arithmetic for multilinear polynomials and read-once formulas.
//!
//! The crate covers four concerns:
//!
//! * [`numfield`] and [`mpoly`]: exact scalars (rationals, prime fields) and
//!   sparse polynomials with restriction, partial derivatives and the
//!   commutator.
//! * [`rof`]: normal-form read-once formulas, expansion and the structural
//!   tests on multiplicative formulas.
//! * [`decompose`] and [`analyze`]: explicit sum-of-read-once constructions
//!   and the condition systems that decide or refute membership in the
//!   two-summand class.
//! * [`oracle`]: exhaustive enumeration of read-once polynomials over small
//!   prime fields, used as independent ground truth.

pub mod analyze;
pub mod decompose;
pub mod error;
pub mod mpoly;
pub mod numfield;
pub mod oracle;
pub mod rof;

pub use error::{Error, Result};
pub use mpoly::{gen_f, gen_m, gen_symmetric, Monomial, Poly, VarSet};
pub use numfield::{FieldCtx, FieldElem, FieldKind, SquareRoot};
pub use rof::Rof;
