//! Fixed-point lengths.
//!
//! Every coordinate is an integer count of micro-units (1e-6 of the input
//! unit), so contour comparisons and contact tests are exact.

/// A length in micro-units.
pub type Len = i64;

/// Micro-units per input unit.
pub const SCALE: i64 = 1_000_000;
const DECIMALS: usize = 6;

pub fn from_units(v: f64) -> Len {
    (v * SCALE as f64).round() as Len
}

pub fn to_units(v: Len) -> f64 {
    v as f64 / SCALE as f64
}

/// Area in squared input units.
pub fn area_units(w: Len, h: Len) -> f64 {
    (w as i128 * h as i128) as f64 / (SCALE as f64 * SCALE as f64)
}

/// Parses a plain decimal (`12`, `-0.5`, `3.125`) exactly. More than six
/// fractional digits is rejected rather than rounded.
pub fn parse_decimal(s: &str) -> Option<Len> {
    let s = s.trim();
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || frac_part.len() > DECIMALS
    {
        return None;
    }
    let whole: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut frac: i64 = 0;
    for (k, c) in frac_part.chars().enumerate() {
        frac += (c as i64 - '0' as i64) * 10i64.pow((DECIMALS - 1 - k) as u32);
    }
    let v = whole.checked_mul(SCALE)?.checked_add(frac)?;
    Some(if neg { -v } else { v })
}

/// Shortest exact decimal rendering of a micro-unit length.
pub fn format_decimal(v: Len) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    let whole = a / SCALE as u64;
    let frac = a % SCALE as u64;
    if frac == 0 {
        format!("{sign}{whole}")
    } else {
        let f = format!("{frac:06}");
        format!("{sign}{whole}.{}", f.trim_end_matches('0'))
    }
}

/// Serde adapter writing lengths as JSON numbers in input units.
pub mod serde_len {
    use super::{from_units, to_units, Len};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Len, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(to_units(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Len, D::Error> {
        Ok(from_units(f64::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_exact_decimals() {
        assert_eq!(parse_decimal("5"), Some(5 * SCALE));
        assert_eq!(parse_decimal("2.5"), Some(2_500_000));
        assert_eq!(parse_decimal("-1"), Some(-SCALE));
        assert_eq!(parse_decimal(".25"), Some(250_000));
        assert_eq!(parse_decimal("0.0000001"), None);
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("1e3"), None);
    }

    proptest! {
        #[test]
        fn decimal_roundtrip(v in -10_000_000_000i64..10_000_000_000i64) {
            prop_assert_eq!(parse_decimal(&format_decimal(v)), Some(v));
        }
    }
}
