//! The classical algebra of segments as a compiler: expressions over a unit
//! segment become ruler-and-compass construction programs, which are
//! interpreted under float, interval or exact constructible-number backends
//! and swept into function-graph loci.

pub mod compile;
pub mod construct;
pub mod emit;
pub mod expr;
pub mod kernel;
pub mod locus;
pub mod registry;
