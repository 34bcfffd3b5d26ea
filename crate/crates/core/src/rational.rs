//! Exact rational helpers shared by the file formats and the engines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `a/b`, an integer, or a plain decimal such as `0.125` or `-3.5e-2`.
/// Decimals are converted exactly (no binary rounding).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{whole}{frac}");
    let mut numer: BigInt = if joined.is_empty() { BigInt::zero() } else { joined.parse().ok()? };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    if scale.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn fmt_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Exact conversion of a finite float.
pub fn from_f64(value: f64) -> Rational {
    Rational::from_float(value).unwrap_or_else(Rational::zero)
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 gives up on huge numerators and denominators.
        let n = value.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = value.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("6/8"), Some(rat(3, 4)));
        assert_eq!(parse_rational("1"), Some(int(1)));
        assert_eq!(parse_rational("0.05"), Some(rat(1, 20)));
        assert_eq!(parse_rational(".5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-2.5e-1"), Some(rat(-1, 4)));
        assert_eq!(parse_rational("1e2"), Some(int(100)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn formats_with_denominator() {
        assert_eq!(fmt_rational(&int(1)), "1/1");
        assert_eq!(fmt_rational(&rat(-2, 6)), "-1/3");
    }

    #[test]
    fn float_round_trip_is_exact() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(to_f64(&from_f64(v)), v);
        }
    }
}
