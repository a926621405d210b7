//! Desk-scale algorithms for Boolean formulas whose leaves are gates with
//! low communication complexity.
//!
//! The library revolves around one syntactic object, [`formula::Formula`]: a
//! de Morgan tree whose leaves evaluate gates from a small class (parities,
//! linear threshold functions, symmetric functions, raw truth tables).  On
//! top of it sit:
//!
//! * [`polynomial`] — exact-rational multilinear polynomials that approximate
//!   a formula pointwise, built from an LP-certified base construction,
//!   majority amplification and shift/scale composition.
//! * [`protocols`] — explicit two-party and number-in-hand protocol trees for
//!   the leaf gates, with transcript and rectangle enumeration.
//! * [`counting`] — exact #SAT for formulas over protocol-equipped leaves,
//!   deterministic and randomized, validated against brute force.
//! * [`prg`] — three pseudorandom generator families (small-bias powering,
//!   extractor-based recursion, inner-product stretch) plus fooling-gap
//!   measurement.
//! * [`hardness`] — generalized inner product, correlation measurement,
//!   best-parity search and the lower-bound calculators.
//! * [`learning`] — an exhaustive weak parity learner boosted into a PAC
//!   learner for formulas over parities.
//!
//! Everything that a test asserts is computed in exact rational arithmetic;
//! floating point appears only inside solvers whose output is re-certified
//! exactly.

pub mod counting;
pub mod formula;
pub mod hardness;
pub mod learning;
pub mod polynomial;
pub mod prg;
pub mod protocols;
pub mod rng;

#[cfg(doctest)]
mod book {
    //! Every code block in the guide runs as a doctest, so `cargo test`
    //! keeps the book in sync with the library.
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(formulas, "../../../book/src/formulas.md");
    chapter!(polynomials, "../../../book/src/polynomials.md");
    chapter!(protocols, "../../../book/src/protocols.md");
    chapter!(counting, "../../../book/src/counting.md");
    chapter!(prg, "../../../book/src/prg.md");
    chapter!(hardness, "../../../book/src/hardness.md");
    chapter!(learning, "../../../book/src/learning.md");
    chapter!(cli, "../../../book/src/cli.md");
}
