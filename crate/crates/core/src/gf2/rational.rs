//! Rational functions in `D` over GF(2), always kept in lowest terms.

use std::fmt;
use std::ops::{Add, Mul};

use super::{AlgebraError, Gf2Poly};

/// A reduced fraction `numerator / denominator` of binary polynomials.
///
/// The denominator is nonzero and coprime to the numerator; zero is stored as
/// `0/1`. Over GF(2) every nonzero polynomial is monic, so the representation
/// is unique and structural equality is field equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Rational {
    num: Gf2Poly,
    den: Gf2Poly,
}

impl Gf2Rational {
    pub fn zero() -> Self {
        Self::from_poly(Gf2Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Gf2Poly::one())
    }

    /// `D^k` as a rational value.
    pub fn monomial(k: usize) -> Self {
        Self::from_poly(Gf2Poly::monomial(k))
    }

    pub fn from_poly(p: Gf2Poly) -> Self {
        Self {
            num: p,
            den: Gf2Poly::one(),
        }
    }

    /// Reduces `num / den` to lowest terms.
    pub fn new(num: Gf2Poly, den: Gf2Poly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den)?;
        if g.is_one() {
            return Ok(Self { num, den });
        }
        Ok(Self {
            num: num.exact_div(&g),
            den: den.exact_div(&g),
        })
    }

    pub fn numerator(&self) -> &Gf2Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Gf2Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Realizable by a causal filter: the denominator has a nonzero constant
    /// term (zero counts as causal).
    pub fn is_causal(&self) -> bool {
        self.den.constant_term()
    }

    /// Largest degree among numerator and denominator.
    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn ensure_degree(&self, cap: usize) -> Result<(), AlgebraError> {
        let degree = self.degree();
        if degree > cap {
            return Err(AlgebraError::DegreeLimit { degree, cap });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        if rhs.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(self * &rhs.inverse()?)
    }

    /// Multiplication by `D^k`.
    pub fn shl(&self, k: usize) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        // Only the D-power part of the denominator can cancel.
        let cancel = self.den.ord().unwrap_or(0).min(k);
        Self {
            num: self.num.shl(k - cancel),
            den: self.den.shr(cancel),
        }
    }

    /// Splits `self = D^-advance * causal`, where `advance` is how far ahead of
    /// the current time a decoder must look to apply `self`.
    pub fn causal_split(&self) -> (usize, Gf2Rational) {
        if self.is_zero() {
            return (0, Self::zero());
        }
        let num_ord = self.num.ord().unwrap_or(0);
        let den_ord = self.den.ord().unwrap_or(0);
        let advance = den_ord.saturating_sub(num_ord);
        (advance, self.shl(advance))
    }
}

impl Default for Gf2Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<Gf2Poly> for Gf2Rational {
    fn from(p: Gf2Poly) -> Self {
        Self::from_poly(p)
    }
}

impl Add<&Gf2Rational> for &Gf2Rational {
    type Output = Gf2Rational;

    fn add(self, rhs: &Gf2Rational) -> Gf2Rational {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return Gf2Rational::new(&self.num + &rhs.num, self.den.clone())
                .expect("nonzero denominator");
        }
        // a/b + c/d over the lcm of b and d keeps intermediate degrees down.
        let g = self.den.gcd(&rhs.den).expect("nonzero denominators");
        let bl = self.den.exact_div(&g);
        let dl = rhs.den.exact_div(&g);
        let num = &(&self.num * &dl) + &(&rhs.num * &bl);
        Gf2Rational::new(num, &bl * &rhs.den).expect("nonzero denominator")
    }
}

impl Add for Gf2Rational {
    type Output = Gf2Rational;

    fn add(self, rhs: Gf2Rational) -> Gf2Rational {
        &self + &rhs
    }
}

impl Mul<&Gf2Rational> for &Gf2Rational {
    type Output = Gf2Rational;

    fn mul(self, rhs: &Gf2Rational) -> Gf2Rational {
        if self.is_zero() || rhs.is_zero() {
            return Gf2Rational::zero();
        }
        // Cross-cancel first so the products are already nearly reduced.
        let g1 = self.num.gcd(&rhs.den).expect("nonzero");
        let g2 = rhs.num.gcd(&self.den).expect("nonzero");
        let num = &self.num.exact_div(&g1) * &rhs.num.exact_div(&g2);
        let den = &self.den.exact_div(&g2) * &rhs.den.exact_div(&g1);
        Gf2Rational { num, den }
    }
}

impl Mul for Gf2Rational {
    type Output = Gf2Rational;

    fn mul(self, rhs: Gf2Rational) -> Gf2Rational {
        &self * &rhs
    }
}

impl fmt::Display for Gf2Rational {
    /// `num/(den)`, with the numerator parenthesised when it has several
    /// terms so that the rendering parses back unambiguously.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.weight() > 1 {
            write!(f, "({})/({})", self.num, self.den)
        } else {
            write!(f, "{}/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for Gf2Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Rational({self})")
    }
}

impl std::str::FromStr for Gf2Rational {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse::parse_rational(s)
    }
}
