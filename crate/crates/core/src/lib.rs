//! Hypergraph-product code switching: code construction, algebraic
//! verification, decoders and Pauli-frame Monte-Carlo simulation.

pub mod bundle;
pub mod ccz;
pub mod codes;
pub mod complex;
pub mod decoders;
pub mod gf2;
pub mod graphs;
pub mod hgp;
pub mod homomorphic;
pub mod noise;
pub mod protocol;
pub mod scans;
pub mod search;
pub mod stats;
