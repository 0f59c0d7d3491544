//! Counting logic, logspace recursion and their compilation on finite structures.

pub mod clogic;
pub mod error;
pub mod sexpr;
pub mod structure;

pub use error::{Error, Result};
pub mod balancer;
pub mod corpus;
pub mod dagstats;
pub mod fixtures;
pub mod intervals;
pub mod lrec;
pub mod wl;
pub mod wlcompile;
pub mod xfix;
