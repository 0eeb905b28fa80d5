use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::Rational;

/// Scalar used for additive bundle utilities.
pub trait Utility: Signed + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync {
    /// `num / den`; `den` must be non-zero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Utility for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Utility for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
}
