//! Exact rational numbers used for every coordinate and cost in this crate.
//!
//! All arithmetic is performed over arbitrary-precision rationals; floating
//! point appears only in presentation layers (reports render an `f64` next to
//! the exact string). Parsing accepts integers (`"42"`), decimals (`"2.75"`,
//! scaled exactly, never truncated), scientific notation (`"25e-1"`), and
//! fractions (`"7/2"`). Formatting is canonical: `"p"` for integers, `"p/q"`
//! otherwise, so every formatted value re-parses to the same rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Build a rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Build a rational from a numerator/denominator pair. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a rational from text. Accepted forms: `[+-]digits`,
/// `[+-]digits.digits`, either with an optional `e`/`E` integer exponent,
/// and `int/int` fractions with a nonzero denominator.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("invalid fraction numerator {num:?}"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("invalid fraction denominator {den:?}"))?;
        if d.is_zero() {
            return Err("fraction has zero denominator".to_string());
        }
        return Ok(Rational::new(n, d));
    }
    // Split off an optional decimal exponent.
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| format!("invalid exponent in {s:?}"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("no digits in {text:?}"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid number {text:?}"));
    }
    let mut numer: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().expect("digit-checked integer part")
    };
    let ten = BigInt::from(10);
    for b in frac_part.bytes() {
        numer = numer * &ten + BigInt::from(b - b'0');
    }
    let scale = frac_part.len() as i64 - exponent;
    let mut value = Rational::from_integer(numer * BigInt::from(sign));
    if scale > 0 {
        value /= Rational::from_integer(ten.pow(scale as u32));
    } else if scale < 0 {
        value *= Rational::from_integer(ten.pow((-scale) as u32));
    }
    Ok(value)
}

/// Canonical exact rendering: `"p"` when the value is an integer, `"p/q"`
/// otherwise (`q > 0`, fraction fully reduced).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact decimal rendering when the denominator divides a power of ten,
/// e.g. `7/4` becomes `"1.75"`. Returns `None` for values like `1/3`.
pub fn format_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    if places == 0 {
        return Some(r.numer().to_string());
    }
    let scaled = (r.numer() * BigInt::from(10).pow(places) / r.denom()).abs();
    let digits = scaled.to_string();
    let digits = format!("{:0>width$}", digits, width = places as usize + 1);
    let split = digits.len() - places as usize;
    let sign = if r.is_negative() { "-" } else { "" };
    Some(format!("{sign}{}.{}", &digits[..split], &digits[split..]))
}

/// Nearest `f64`, for presentation only.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
