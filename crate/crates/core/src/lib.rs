//! Desk-scale numerics for Carleson measures on circular and conformally
//! presented domains: exact box suprema for atomic measures, harmonic measure,
//! rational test-function estimates of the embedding constant, and the
//! weighted criterion on multi-component open sets.

// `!(x < y)` guards are written that way to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxes;
pub mod conformal;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod harmonic;
pub mod measure;
pub mod norms;
pub mod open_set;
pub mod quadrature;
pub mod suite;
pub mod trend;

pub use boxes::{box_ratio_circular, box_ratio_disk, BoxReport};
pub use conformal::{ConformalMap, PresentedDomain};
pub use error::{CarlesonError, Result};
pub use geometry::{CarlesonSquare, Circle, CircularDomain, MobiusMap};
pub use harmonic::{BoundaryPartition, HarmonicEstimate};
pub use measure::{Atom, AtomicMeasure};
pub use norms::{estimate_constant, ConstantEstimate, RationalFunction};
pub use open_set::OpenSetDomain;
pub use trend::{TrendClass, TrendReport};
