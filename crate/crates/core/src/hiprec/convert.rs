//! Exact conversions between component expansions, rationals and decimal
//! strings.  Everything routes through `BigRational`, so printing and
//! parsing are correctly rounded and bit-reproducible.

use super::HiprecError;
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact value of a component expansion as a rational.
pub fn components_to_rational(parts: &[f64]) -> BigRational {
    let mut acc = BigRational::zero();
    for &p in parts {
        if p != 0.0 {
            acc += BigRational::from_float(p).expect("finite component");
        }
    }
    acc
}

/// Nearest binary64 to a rational (round to nearest, ties to even).
pub fn rational_to_f64_nearest(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Find e with 2^e <= a < 2^(e+1).
    let mut e = (a.numer().bits() as i64) - (a.denom().bits() as i64);
    loop {
        let p = pow2_rational(e);
        if a < p {
            e -= 1;
        } else if a >= pow2_rational(e + 1) {
            e += 1;
        } else {
            break;
        }
    }
    // Want n = round(a * 2^(52 - e)), n in [2^52, 2^53].
    let shift = 52 - e;
    let scaled = &a * pow2_rational(shift);
    let n = round_half_even(&scaled);
    let mut exp = (e - 52) as i32;
    let mut mant = n;
    let two53 = BigInt::one() << 53u32;
    if mant == two53 {
        mant >>= 1u32;
        exp += 1;
    }
    let m = bigint_to_f64_exact(&mant);
    let v = m * 2f64.powi(exp);
    if neg {
        -v
    } else {
        v
    }
}

/// Rounds the `len` leading components of a rational (greedy residual
/// extraction; the result is the nearest expansion).
pub fn rational_to_components(r: &BigRational, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut rem = r.clone();
    for _ in 0..len {
        let c = rational_to_f64_nearest(&rem);
        out.push(c);
        if c == 0.0 {
            continue;
        }
        rem -= BigRational::from_float(c).expect("finite");
    }
    out
}

fn pow2_rational(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as u64))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    }
}

fn round_half_even(x: &BigRational) -> BigInt {
    let fl = x.floor().to_integer();
    let frac = x - BigRational::from_integer(fl.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    match frac.cmp(&half) {
        std::cmp::Ordering::Less => fl,
        std::cmp::Ordering::Greater => fl + 1,
        std::cmp::Ordering::Equal => {
            if (&fl % 2) == BigInt::zero() {
                fl
            } else {
                fl + 1
            }
        }
    }
}

fn bigint_to_f64_exact(n: &BigInt) -> f64 {
    // n has at most 53 bits here.
    let (sign, digits) = n.to_u64_digits();
    let v = match digits.len() {
        0 => 0.0,
        1 => digits[0] as f64,
        _ => panic!("mantissa wider than 53 bits"),
    };
    if sign == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Decimal string with `digits` significant digits, exact rounding of the
/// represented value, format `[-]d.ddd...e[+-]dd`.
pub fn to_decimal_components(parts: &[f64], digits: usize) -> String {
    if parts.iter().any(|p| !p.is_finite()) {
        return "nan".to_string();
    }
    let r = components_to_rational(parts);
    to_decimal_rational(&r, digits)
}

pub fn to_decimal_rational(r: &BigRational, digits: usize) -> String {
    assert!(digits >= 1);
    if r.is_zero() {
        return format!("0.{}e+00", "0".repeat(digits.saturating_sub(1)));
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Decimal exponent d with 10^d <= a < 10^(d+1).
    let mut d = approx_log10(&a);
    loop {
        if a < pow10_rational(d) {
            d -= 1;
        } else if a >= pow10_rational(d + 1) {
            d += 1;
        } else {
            break;
        }
    }
    let scaled = &a * pow10_rational(digits as i64 - 1 - d);
    let mut n = round_half_even(&scaled);
    let limit = BigInt::from(10).pow(digits as u32);
    if n >= limit {
        n /= 10;
        d += 1;
    }
    let s = n.to_string();
    debug_assert_eq!(s.len(), digits);
    let mantissa = if digits == 1 {
        s
    } else {
        format!("{}.{}", &s[..1], &s[1..])
    };
    format!(
        "{}{}e{}{:02}",
        if neg { "-" } else { "" },
        mantissa,
        if d < 0 { "-" } else { "+" },
        d.abs()
    )
}

fn approx_log10(a: &BigRational) -> i64 {
    let bits = (a.numer().bits() as i64) - (a.denom().bits() as i64);
    ((bits as f64) * std::f64::consts::LN_2 / std::f64::consts::LN_10).floor() as i64
}

fn pow10_rational(e: i64) -> BigRational {
    let p = BigInt::from(10).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Parses `[+-]ddd[.ddd][eE[+-]ddd]` into an exact rational.
pub fn parse_decimal_rational(s: &str) -> Result<BigRational, HiprecError> {
    let s = s.trim();
    let bad = |m: &str| HiprecError::Parse(format!("{m}: {s:?}"));
    if s.is_empty() {
        return Err(bad("empty number"));
    }
    let bytes = s.as_bytes();
    let mut i = 0;
    let neg = match bytes[0] {
        b'-' => {
            i = 1;
            true
        }
        b'+' => {
            i = 1;
            false
        }
        _ => false,
    };
    let mut int_digits = String::new();
    let mut frac_digits = String::new();
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        int_digits.push(bytes[i] as char);
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            frac_digits.push(bytes[i] as char);
            i += 1;
        }
    }
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(bad("no digits"));
    }
    let mut exp: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        let rest = &s[i..];
        exp = rest.parse::<i64>().map_err(|_| bad("bad exponent"))?;
        i = bytes.len();
    }
    if i != bytes.len() {
        return Err(bad("trailing characters"));
    }
    let all = format!("{int_digits}{frac_digits}");
    let mant: BigInt = all.parse().map_err(|_| bad("bad mantissa"))?;
    let mut r = BigRational::from_integer(mant) * pow10_rational(exp - frac_digits.len() as i64);
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Bit-exact dump: `tag:hex:hex:...` with one 16-digit hex word per component.
pub fn hex_dump(tag: &str, parts: &[f64]) -> String {
    let mut s = String::from(tag);
    for p in parts {
        s.push(':');
        s.push_str(&format!("{:016x}", p.to_bits()));
    }
    s
}

/// Parses the [`hex_dump`] format back into components.
pub fn hex_parse(s: &str, tag: &str, len: usize) -> Result<Vec<f64>, HiprecError> {
    let mut it = s.trim().split(':');
    let bad = |m: &str| HiprecError::Parse(format!("{m}: {s:?}"));
    if it.next() != Some(tag) {
        return Err(bad("wrong tag"));
    }
    let mut out = Vec::with_capacity(len);
    for part in it {
        let bits = u64::from_str_radix(part, 16).map_err(|_| bad("bad hex word"))?;
        out.push(f64::from_bits(bits));
    }
    if out.len() != len {
        return Err(bad("wrong component count"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_f64_halfway() {
        // 1 + 2^-53 is exactly halfway between 1 and the next float; ties-to-even gives 1.
        let r = BigRational::one() + pow2_rational(-53);
        assert_eq!(rational_to_f64_nearest(&r), 1.0);
        let r2 = BigRational::one() + pow2_rational(-52);
        assert_eq!(rational_to_f64_nearest(&r2), 1.0 + 2f64.powi(-52));
    }

    #[test]
    fn decimal_roundtrip_f64() {
        for v in [0.1, -3.25, 1e-30, 12345.6789, 2f64.powi(-40)] {
            let s = to_decimal_components(&[v], 25);
            let r = parse_decimal_rational(&s).unwrap();
            assert_eq!(rational_to_f64_nearest(&r), v, "{s}");
        }
    }

    #[test]
    fn parse_rejects_junk() {
        assert!(parse_decimal_rational("1.2.3").is_err());
        assert!(parse_decimal_rational("abc").is_err());
        assert!(parse_decimal_rational("").is_err());
    }
}
