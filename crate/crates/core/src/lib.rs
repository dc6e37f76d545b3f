//! Katětov functors on small Fraïssé classes.
//!
//! A Katětov functor sends a finite structure `A` to a structure `K(A)` realizing every
//! one-point extension of `A` over a natural embedding `η: A ↪ K(A)`. Iterating it gives
//! a tower `A ↪ K(A) ↪ K²(A) ↪ …` whose union is the Fraïssé limit of the class. This
//! crate computes the functors for graphs, `Kn`-free graphs, oriented graphs, linear and
//! partial orders, tournaments, Boolean algebras and grid-valued metric spaces, expands
//! towers lazily, and checks the limit's extension, homogeneity and universality
//! properties at finite depth.

pub mod bergman;
pub mod classes;
pub mod error;
pub mod limits;
pub mod metric;
pub mod par;
pub mod pushout;
pub mod structures;
pub mod tower;

pub use error::{Error, Result, Violation};
pub use par::Execution;
