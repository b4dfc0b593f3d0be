//! Exact rational arithmetic helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Durations (seconds), flows (megabits) and rates (Mbps) are all exact.
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rounds half away from zero to `places` decimals and renders with a fixed
/// number of fractional digits, e.g. `22/7` at 3 places is `3.143`.
pub fn format_decimal(value: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = value.abs() * Rational::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = r * 2u32;
    let rounded = if &twice >= scaled.denom() { q + 1u32 } else { q };
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if value.is_negative() && !(whole.is_zero() && frac.is_zero()) {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>width$}", width = places as usize)
    }
}

/// Always renders as `p/q`, including integers (`2/1`).
pub fn format_fraction(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `p`, `p/q` or a finite decimal such as `5.5`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((w, f)) = text.split_once('.') {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = w.starts_with('-');
        let w: BigInt = if w.is_empty() || w == "-" {
            BigInt::zero()
        } else {
            w.parse().ok()?
        };
        let f_val: BigInt = f.parse().ok()?;
        let den = BigInt::from(10u32).pow(f.len() as u32);
        let frac = Rational::new(f_val, den);
        let whole = Rational::from_integer(w.abs());
        let v = whole + frac;
        return Some(if negative { -v } else { v });
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_decimal_display() {
        assert_eq!(format_decimal(&ratio(11, 5), 3), "2.200");
        assert_eq!(format_decimal(&ratio(22, 7), 3), "3.143");
        assert_eq!(format_decimal(&int(11), 3), "11.000");
        assert_eq!(format_decimal(&ratio(1, 2000), 3), "0.001");
        assert_eq!(format_decimal(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(format_decimal(&int(0), 3), "0.000");
    }

    #[test]
    fn fractions() {
        assert_eq!(format_fraction(&int(2)), "2/1");
        assert_eq!(format_fraction(&ratio(6, 4)), "3/2");
        assert_eq!(parse_rational("3/2"), Some(ratio(3, 2)));
        assert_eq!(parse_rational("5.5"), Some(ratio(11, 2)));
        assert_eq!(parse_rational("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_rational("12"), Some(int(12)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
