//! Point-free topology over exact rational data.
//!
//! Formal topologies with certified cover checks, localic completions of
//! generalised metric spaces, formal points and their distances.

pub mod completion;
pub mod deciders;
pub mod ftop;
pub mod gus;
pub mod job;
pub mod numeric;
pub mod points;
pub mod uniform;
pub mod verdict;
