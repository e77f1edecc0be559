//! Aggregation clones on finite bounded lattices.
//!
//! * [`lattice`]: bounded lattices from cover relations, chains, Boolean
//!   lattices, products and duals.
//! * [`table`]: function tables, the aggregation predicate, enumeration
//!   and sampling.
//! * [`basis`]: the generating functions `chi`, `mu`, `oplus`, the
//!   per-tuple functions `h_a`/`g_a`, and join/meet decompositions.
//! * [`term`]: a small term language with an evaluator, parser, printer and
//!   a synthesizer producing a generating term for any aggregation function.
//! * [`clone`]: relation preservation, bounded-arity composition closure,
//!   and the unary-insufficiency witness.
//! * [`median`]: the hypercube median and the `f_v` family.

pub mod basis;
pub mod clone;
pub mod error;
pub mod lattice;
pub mod limits;
pub mod median;
pub mod table;
pub mod term;

pub use error::{Error, Result};
pub use lattice::{Elem, Lattice, LatticeSpec};
pub use limits::SizeLimits;
pub use table::FnTable;
