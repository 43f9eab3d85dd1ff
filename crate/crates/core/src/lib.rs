//! Validation of common graphs against SHACL, ShEx and PG-Schema cores, the
//! common fragment shared by all three, and translations between them.

pub mod cogsl;
pub mod fixtures;
pub mod harness;
pub mod model;
pub mod pgschema;
pub mod report;
pub mod shacl;
pub mod shex;

pub use model::{CommonGraph, Direction, EdgeTriple, Focus, Name, NodeId, PropTriple, Triple, Value, ValueType};
pub use report::{ValidationReport, Violation};
