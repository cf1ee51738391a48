//! dimlab: exact-arithmetic covering numbers, mass distributions and
//! dimension profiles for four families of Cantor-type compact subsets of
//! [0,1] and their union.
//!
//! All scale and length arithmetic is exact (big rationals over base-2
//! exponents); interval positions are exact symbolic sums of powers of two
//! with certified dyadic enclosures derived on demand.  Counting runs in two
//! regimes: geometric greedy covering at enumerable depths, and exact
//! combinatorial index arithmetic at deep designed scales.

pub mod exact;
pub mod construct;
pub mod cover;
pub mod params;
pub mod words;

pub use exact::{ExactReal, Rat, ScaleExponent};
