//! Exact rational scalars: thin helpers over `num_rational::BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational; always stored reduced with positive
/// denominator (the backing type normalizes on construction).
pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse canonical fraction syntax: an optional sign, an integer, and an
/// optional `/denominator`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num: BigInt = num_str
        .trim()
        .parse()
        .map_err(|_| format!("invalid integer {num_str:?}"))?;
    let den: BigInt = match den_str {
        Some(d) => d.trim().parse().map_err(|_| format!("invalid integer {d:?}"))?,
        None => BigInt::from(1),
    };
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical fraction form: `p` when the denominator is one, else `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_zero() {
        unreachable!("denominator is never zero");
    }
    if *r.denom() == BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest double; exact big ratios are handled by the backing conversion.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["0", "1", "-1", "1/2", "-1/4", "1/80", "7/60", "-23/6"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
    }

    #[test]
    fn parse_normalizes() {
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("3/-6").unwrap()), "-1/2");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn big_ratio_to_f64() {
        // 10^40 / (3 * 10^39) = 10/3 even though both sides overflow i64.
        let num: BigInt = "10000000000000000000000000000000000000000".parse().unwrap();
        let den: BigInt = "3000000000000000000000000000000000000000".parse().unwrap();
        let r = Rational::new(num, den);
        assert!((rational_to_f64(&r) - 10.0 / 3.0).abs() < 1e-14);
    }
}
