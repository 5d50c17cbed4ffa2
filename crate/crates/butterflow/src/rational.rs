//! Exact rational scalars for capacities and rates.
//!
//! `i128` components give ample headroom: inputs are small fractions and every
//! computation in the crate multiplies at most a handful of them.

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::Error;

pub type Rational = Ratio<i128>;

/// Shorthand constructor, mostly for tests and table literals.
pub fn rat(numer: i128, denom: i128) -> Rational {
    Ratio::new(numer, denom)
}

/// Parses an exact rational from `"p"` or `"p/q"` decimal-free notation.
/// Rejects zero denominators, empty parts, and anything else `i128` will not
/// parse losslessly.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let bad = |_| Error::InvalidConfig(format!("not an exact rational: {s:?}"));
    match s.split_once('/') {
        None => {
            let n: i128 = s.trim().parse().map_err(bad)?;
            Ok(Rational::from_integer(n))
        }
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(bad)?;
            let d: i128 = d.trim().parse().map_err(bad)?;
            if d == 0 {
                return Err(Error::InvalidConfig(format!(
                    "zero denominator in rational: {s:?}"
                )));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Least common multiple of the denominators, as a positive integer.
/// Returns 1 for an empty input.
pub fn denominator_lcm<I: IntoIterator<Item = Rational>>(values: I) -> i128 {
    values
        .into_iter()
        .fold(1i128, |acc, v| num_integer::lcm(acc, *v.denom()))
}

/// Converts a known-integer rational to `u64`, failing loudly otherwise.
pub fn to_count(v: Rational) -> Result<u64, Error> {
    if !v.is_integer() || v < Rational::zero() {
        return Err(Error::Internal(format!(
            "expected a non-negative integer count, got {v}"
        )));
    }
    u64::try_from(v.to_integer())
        .map_err(|_| Error::Internal(format!("count {v} does not fit in u64")))
}
