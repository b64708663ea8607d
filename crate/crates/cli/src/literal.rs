//! Numeric literals for step sizes and end times.
//!
//! Besides plain decimals, a literal may be a multiple of π divided by a
//! number, written `2pi/1600`, `2*pi/1600`, `pi/3` or `pi`. These are
//! evaluated in double-double arithmetic and rounded once, so `2pi/N`
//! is the double nearest to the real number 2π/N.

/// π as an unevaluated sum of two doubles.
const PI_HI: f64 = std::f64::consts::PI;
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

fn plain(text: &str) -> Result<f64, String> {
    let value: f64 = text
        .parse()
        .map_err(|_| format!("`{text}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(value)
}

/// Parses `[c][*]pi[/d]` or `c[/d]`.
pub fn parse_literal(text: &str) -> Result<f64, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    if lower.is_empty() {
        return Err("empty numeric literal".into());
    }
    let (numerator, denominator) = match lower.split_once('/') {
        Some((n, d)) => (n, Some(plain(d)?)),
        None => (lower.as_str(), None),
    };
    if denominator == Some(0.0) {
        return Err(format!("`{text}` divides by zero"));
    }
    // Numerator as a double-double (hi, lo).
    let (hi, lo) = match numerator.strip_suffix("pi") {
        Some(coefficient) => {
            let coefficient = coefficient.strip_suffix('*').unwrap_or(coefficient);
            let c = if coefficient.is_empty() {
                1.0
            } else {
                plain(coefficient)?
            };
            let hi = c * PI_HI;
            let lo = c.mul_add(PI_HI, -hi) + c * PI_LO;
            (hi, lo)
        }
        None => (plain(numerator)?, 0.0),
    };
    let value = match denominator {
        None => hi + lo,
        Some(d) => {
            let q = hi / d;
            let remainder = (-q).mul_add(d, hi) + lo;
            q + remainder / d
        }
    };
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(value)
}

/// Parses a comma-separated list of literals.
pub fn parse_literal_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_literal)
        .collect()
}
