//! Finite relational structures, monadic second-order logic and transductions,
//! tree decompositions of bounded height, and the encodings that place graph
//! classes in the incidence transduction hierarchy.

pub mod decomposition;
pub mod dot;
pub mod encodings;
pub mod error;
pub mod graph;
pub mod hierarchy;
pub mod incidence;
pub mod iso;
pub mod logic;
pub mod minor;
pub mod partition;
pub mod random;
pub mod structure;
pub mod transduction;
pub mod tree;

pub use error::{Error, Result};
pub use graph::Graph;
pub use incidence::{from_incidence, to_incidence, IncidenceStructure};
pub use iso::{canonical_form, isomorphic};
pub use structure::{Signature, Structure, Symbol};
pub use tree::{ColouredTree, TreeDomain, TreeMode};
pub use logic::Formula;
