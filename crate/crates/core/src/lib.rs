//! Exact search, analysis and composition of repeat-until-success circuits
//! over the Clifford+T gate set.
//!
//! The exact layers (`ring`, `gates`, `clifford`) are generic over the
//! backing integer; the aliases below fix the default backend used by the
//! higher layers.

pub mod canonical;
pub mod clifford;
pub mod database;
pub mod decompose;
pub mod gates;
pub mod ring;
pub mod rus;
pub mod search;
pub mod verifier;

pub use num_bigint::BigInt;

/// Default backing integer for exact arithmetic.
pub type Int = i128;
pub type Scalar = ring::RingScalar<Int>;
pub type Real = ring::QuadReal<Int>;
pub type Ratio = ring::QuadRatio<Int>;
pub type Matrix = gates::RingMatrix<Int>;
pub type Key = clifford::EquivKey<Int>;
