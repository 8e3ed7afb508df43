use super::{AlgebraError, Gf2Rational};

/// Power-series expansion `c_0 + c_1 D + ... + c_horizon D^horizon` of a
/// causal rational function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalSeries {
    source: Gf2Rational,
    bits: Vec<bool>,
}

impl CausalSeries {
    /// Expands `r` by long division up to and including `D^horizon`.
    ///
    /// The coefficients satisfy the recurrence set by the denominator:
    /// `c_k = n_k + sum_{j>=1} d_j c_{k-j}`.
    pub fn expand(r: &Gf2Rational, horizon: usize) -> Result<Self, AlgebraError> {
        if !r.is_causal() {
            return Err(AlgebraError::NonCausal(r.to_string()));
        }
        let taps: Vec<usize> = r.denominator().exponents().filter(|&j| j > 0).collect();
        let num = r.numerator();
        let mut bits = Vec::with_capacity(horizon + 1);
        for k in 0..=horizon {
            let mut c = num.coeff(k);
            for &j in &taps {
                if j <= k {
                    c ^= bits[k - j];
                }
            }
            bits.push(c);
        }
        Ok(Self {
            source: r.clone(),
            bits,
        })
    }

    pub fn source(&self) -> &Gf2Rational {
        &self.source
    }

    pub fn horizon(&self) -> usize {
        self.bits.len() - 1
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn coeff(&self, k: usize) -> bool {
        self.bits[k]
    }
}

pub fn series_expand(r: &Gf2Rational, horizon: usize) -> Result<CausalSeries, AlgebraError> {
    CausalSeries::expand(r, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Gf2Poly;

    fn r(s: &str) -> Gf2Rational {
        s.parse().unwrap()
    }

    fn as_bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn expansion_of_feedback_term() {
        // Long division of D by 1+D^3 done by hand: D + D^4 + D^7 + ...
        let s = series_expand(&r("D/(1+D^3)"), 9).unwrap();
        assert_eq!(s.bits(), as_bits("0100100100"));
    }

    #[test]
    fn polynomial_expands_to_its_coefficients() {
        let s = series_expand(&r("1+D^2+D^5"), 7).unwrap();
        assert_eq!(s.bits(), as_bits("10100100"));
    }

    #[test]
    fn linearity_cancels() {
        let a = series_expand(&r("D^2/(1+D^3)"), 40).unwrap();
        let b = series_expand(&r("1/(1+D^3)"), 40).unwrap();
        let shifted: Vec<bool> = (0..=40).map(|k| k >= 2 && b.coeff(k - 2)).collect();
        assert!(a.bits().iter().zip(&shifted).all(|(x, y)| x == y));
    }

    #[test]
    fn non_causal_is_rejected() {
        let x = Gf2Rational::new(Gf2Poly::one(), Gf2Poly::monomial(2)).unwrap();
        assert!(matches!(series_expand(&x, 4), Err(AlgebraError::NonCausal(_))));
    }
}
