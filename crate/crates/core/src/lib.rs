//! Finite principaloid bundles and numeric connections on matrix-group
//! action groupoids.

pub mod atiyah;
pub mod automorphism;
pub mod bisection;
pub mod bundle;
pub mod connection;
pub mod groupoid;
pub mod report;
