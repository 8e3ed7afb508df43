//! Exact arithmetic over GF(2)[D] and GF(2)(D).

mod parse;
mod poly;
mod rational;
mod series;

pub use parse::{parse_poly, parse_rational};
pub use poly::Gf2Poly;
pub use rational::Gf2Rational;
pub use series::{series_expand, CausalSeries};

use thiserror::Error;

/// Default ceiling on intermediate polynomial degrees.
pub const DEFAULT_DEGREE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("gcd of two zero polynomials is undefined")]
    GcdOfZeros,
    #[error("degree {degree} exceeds the configured limit {cap}")]
    DegreeLimit { degree: usize, cap: usize },
    #[error("{0} has no causal expansion (denominator divisible by D)")]
    NonCausal(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Least common multiple of the denominators of `values`, or 1 when empty.
pub fn lcm_of_denominators<'a, I>(values: I) -> Gf2Poly
where
    I: IntoIterator<Item = &'a Gf2Rational>,
{
    values.into_iter().fold(Gf2Poly::one(), |acc, v| {
        acc.lcm(v.denominator()).expect("denominators are nonzero")
    })
}
