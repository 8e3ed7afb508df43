//! Polynomials in the delay operator `D` with binary coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use super::AlgebraError;

/// A polynomial over GF(2) in the delay operator `D`.
///
/// Coefficients are packed 64 to a word, least significant bit first, so bit
/// `k` of the sequence is the coefficient of `D^k`. The top word is never zero;
/// the zero polynomial has no words at all.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    /// `D^k`.
    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0u64; k / 64 + 1];
        words[k / 64] = 1u64 << (k % 64);
        Self { words }
    }

    /// Sum of `D^k` over the given exponents; repeated exponents cancel.
    pub fn from_exponents<I: IntoIterator<Item = usize>>(exps: I) -> Self {
        let mut p = Self::zero();
        for k in exps {
            p.flip(k);
        }
        p
    }

    /// Builds a polynomial from a coefficient sequence, index `k` being the
    /// coefficient of `D^k`.
    pub fn from_bits(bits: &[bool]) -> Self {
        Self::from_exponents(bits.iter().enumerate().filter(|(_, b)| **b).map(|(k, _)| k))
    }

    fn from_words(mut words: Vec<u64>) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        Self { words }
    }

    fn flip(&mut self, k: usize) {
        let w = k / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1u64 << (k % 64);
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words.len() == 1 && self.words[0] == 1
    }

    /// Degree, or `None` for the zero polynomial (degree minus infinity).
    pub fn degree(&self) -> Option<usize> {
        let top = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + (63 - top.leading_zeros() as usize))
    }

    /// Coefficient of `D^k`.
    pub fn coeff(&self, k: usize) -> bool {
        self.words
            .get(k / 64)
            .is_some_and(|w| (w >> (k % 64)) & 1 == 1)
    }

    pub fn constant_term(&self) -> bool {
        self.coeff(0)
    }

    /// Multiplicity of the root `D = 0`, i.e. the number of trailing zero
    /// coefficients. `None` for the zero polynomial.
    pub fn ord(&self) -> Option<usize> {
        self.words
            .iter()
            .position(|w| *w != 0)
            .map(|i| i * 64 + self.words[i].trailing_zeros() as usize)
    }

    /// Exponents with a nonzero coefficient, ascending.
    pub fn exponents(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_monomial(&self) -> bool {
        self.weight() == 1
    }

    /// Multiplication by `D^k`.
    pub fn shl(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let (ws, bs) = (k / 64, k % 64);
        let mut words = vec![0u64; self.words.len() + ws + 1];
        for (i, &w) in self.words.iter().enumerate() {
            words[i + ws] |= w << bs;
            if bs != 0 {
                words[i + ws + 1] |= w >> (64 - bs);
            }
        }
        Self::from_words(words)
    }

    /// Division by `D^k`, discarding the coefficients below `D^k`.
    pub fn shr(&self, k: usize) -> Self {
        let (ws, bs) = (k / 64, k % 64);
        if ws >= self.words.len() {
            return Self::zero();
        }
        let src = &self.words[ws..];
        let mut words = vec![0u64; src.len()];
        for i in 0..src.len() {
            words[i] = src[i] >> bs;
            if bs != 0 {
                if let Some(next) = src.get(i + 1) {
                    words[i] |= next << (64 - bs);
                }
            }
        }
        Self::from_words(words)
    }

    /// Keeps only the coefficients of `D^0..D^(n-1)`.
    pub fn truncate(&self, n: usize) -> Self {
        let mut words: Vec<u64> = self.words.iter().take(n.div_ceil(64)).copied().collect();
        if n % 64 != 0 {
            if let Some(last) = words.get_mut(n / 64) {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        Self::from_words(words)
    }

    /// Product with a degree limit.
    pub fn checked_mul(&self, rhs: &Self, cap: usize) -> Result<Self, AlgebraError> {
        if let (Some(a), Some(b)) = (self.degree(), rhs.degree()) {
            if a + b > cap {
                return Err(AlgebraError::DegreeLimit { degree: a + b, cap });
            }
        }
        Ok(self * rhs)
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), AlgebraError> {
        let db = divisor.degree().ok_or(AlgebraError::DivisionByZero)?;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(dr) = rem.degree() {
            if dr < db {
                break;
            }
            let shift = dr - db;
            quot.flip(shift);
            rem += &divisor.shl(shift);
        }
        Ok((quot, rem))
    }

    /// Exact quotient; panics if the division leaves a remainder.
    pub(crate) fn exact_div(&self, divisor: &Self) -> Self {
        let (q, r) = self.div_rem(divisor).expect("exact division by zero");
        debug_assert!(r.is_zero(), "inexact division {self} / {divisor}");
        q
    }

    /// Greatest common divisor. Over GF(2) every nonzero polynomial is monic,
    /// so the result is unique; `gcd(p, 0) = p`.
    pub fn gcd(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.is_zero() && other.is_zero() {
            return Err(AlgebraError::GcdOfZeros);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b)?.1;
            a = b;
            b = r;
        }
        Ok(a)
    }

    /// Least common multiple of two nonzero polynomials.
    pub fn lcm(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.is_zero() || other.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let g = self.gcd(other)?;
        Ok(&self.exact_div(&g) * other)
    }

    /// Integer-coefficient-free rendering used by `Display`.
    fn render(&self, out: &mut impl fmt::Write) -> fmt::Result {
        if self.is_zero() {
            return out.write_str("0");
        }
        for (i, k) in self.exponents().enumerate() {
            if i > 0 {
                out.write_char('+')?;
            }
            match k {
                0 => out.write_char('1')?,
                1 => out.write_char('D')?,
                _ => write!(out, "D^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f)
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl std::str::FromStr for Gf2Poly {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse::parse_poly(s)
    }
}

impl PartialOrd for Gf2Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by degree, then by coefficients from the top down.
impl Ord for Gf2Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl AddAssign<&Gf2Poly> for Gf2Poly {
    fn add_assign(&mut self, rhs: &Gf2Poly) {
        if self.words.len() < rhs.words.len() {
            self.words.resize(rhs.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl Add<&Gf2Poly> for &Gf2Poly {
    type Output = Gf2Poly;

    fn add(self, rhs: &Gf2Poly) -> Gf2Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Gf2Poly {
    type Output = Gf2Poly;

    fn add(mut self, rhs: Gf2Poly) -> Gf2Poly {
        self += &rhs;
        self
    }
}

/// Carry-less 64x64 -> 128 bit product.
fn clmul(a: u64, b: u64) -> (u64, u64) {
    let (mut lo, mut hi) = (0u64, 0u64);
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        lo ^= a << i;
        if i != 0 {
            hi ^= a >> (64 - i);
        }
        b &= b - 1;
    }
    (lo, hi)
}

impl Mul<&Gf2Poly> for &Gf2Poly {
    type Output = Gf2Poly;

    fn mul(self, rhs: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || rhs.is_zero() {
            return Gf2Poly::zero();
        }
        let mut words = vec![0u64; self.words.len() + rhs.words.len()];
        for (i, &a) in self.words.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.words.iter().enumerate() {
                let (lo, hi) = clmul(a, b);
                words[i + j] ^= lo;
                words[i + j + 1] ^= hi;
            }
        }
        Gf2Poly::from_words(words)
    }
}

impl Mul for Gf2Poly {
    type Output = Gf2Poly;

    fn mul(self, rhs: Gf2Poly) -> Gf2Poly {
        &self * &rhs
    }
}
