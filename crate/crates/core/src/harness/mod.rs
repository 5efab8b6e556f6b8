//! Seeded corpora, samplers, JSON interchange and the acceptance criteria.

pub mod corpus;
pub mod criteria;
pub mod io;
pub mod rng;
pub mod sample;
pub mod suites;
