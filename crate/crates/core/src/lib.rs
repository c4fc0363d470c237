//! Higher-dimensional-automata semantics of process algebra: synchronization
//! algebras, process terms and their operational semantics, labelled
//! precubical sets, the synchronized tensor product, the denotational
//! semantics built from them, path categories and order-complex homology.

pub mod flows;
pub mod homology;
pub mod limits;
pub mod pcset;
pub mod proc;
pub mod semantics;
pub mod sos;
pub mod syncalg;
pub mod tensor;

/// Version tag carried by every JSON document this crate writes.
pub const FORMAT: &str = "hda-sem/1";
