//! Weak actions of finite plain operads on finite categories, and their
//! strictification.
//!
//! The crate works entirely with finite tables so that every law (operad
//! associativity, functoriality, naturality, coherence) is checked by
//! exhaustive sweeps rather than trusted. The main layers:
//!
//! * [`operad`]: plain operads tabulated up to an arity cap.
//! * [`tree`]: formal composites (planar trees), grafting, evaluation, and
//!   the two-cells connecting composites with equal evaluation.
//! * [`fincat`]: finite categories, table-backed functors out of finite
//!   products, natural transformations.
//! * [`weak`]: weak operad actions on a finite category, their functors and
//!   transformations, plus the validators.
//! * [`strictify`]: the strict replacement of a weak action, the comparison
//!   equivalence, and the factorization of strict maps through it.
//! * [`theory`]: strongly regular equational presentations compiled to
//!   operad tables by congruence closure.

pub mod error;
pub mod fincat;
pub mod fixtures;
pub mod format;
pub mod operad;
pub mod report;
pub mod strictify;
pub mod theory;
pub mod tree;
pub mod weak;

pub use error::{Error, Result};
pub use fincat::{FinCategory, Functor, MorId, NatTransformation, ObjId};
pub use operad::{OpId, TabulatedOperad};
pub use report::{CheckReport, Failure};
pub use tree::{Tree, TwoCell};
