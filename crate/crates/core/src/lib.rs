//! Exact-arithmetic engine for the rank-4 elliptic root system of type D4:
//! truncated q-series with rational coefficients, lattice-graded forms over
//! the D4 weight lattice, the five-generator algebra of invariant forms, and
//! the flat (Frobenius) structure carried by its spectral variety.
//!
//! Everything is verified as an equality of truncated series with exact
//! rational coefficients; there are no floating-point numbers anywhere.

pub mod frobenius;
pub mod jacobi;
pub mod modforms;
pub mod report;
pub mod qseries;
pub mod render;
pub mod spoly;
pub mod weyl;
