//! Exact rational numbers: parsing from decimal text and exact decimal rendering.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Exact rational scalar used for every cost, demand and capacity.
pub type Rational = Ratio<i128>;

/// Digits printed after the point when a value has no finite decimal expansion.
const REPEATING_DIGITS: usize = 12;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(value as i128)
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num as i128, den as i128)
}

/// Parses `"12"`, `"-0.5"`, `"1.25"` or `"3/8"` without going through floating point.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: i128 = num.trim().parse().ok()?;
        let den: i128 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if frac.len() > 30 {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let num: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let den = 10i128.checked_pow(frac.len() as u32)?;
    let value = Rational::new(num, den);
    Some(if negative { -value } else { value })
}

/// Renders a rational as the shortest exact decimal when one exists
/// (denominator of the form 2^a·5^b), otherwise rounded to 12 places
/// and prefixed with `~`.
pub fn to_decimal(value: &Rational) -> String {
    let mut den = *value.denom();
    let mut places = 0usize;
    let mut twos = 0usize;
    let mut fives = 0usize;
    while den.is_even() {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    let terminating = den == 1;
    if terminating {
        places = twos.max(fives);
    }
    let sign = if value.is_negative() { "-" } else { "" };
    let abs = value.abs();
    if terminating {
        let scaled = abs * Rational::from_integer(10i128.pow(places as u32));
        render_scaled(sign, scaled.to_integer(), places, "")
    } else {
        let factor = Rational::from_integer(10i128.pow(REPEATING_DIGITS as u32));
        let scaled = (abs * factor).round().to_integer();
        let text = render_scaled(sign, scaled, REPEATING_DIGITS, "~");
        let trimmed = text.trim_end_matches('0');
        trimmed.trim_end_matches('.').to_string()
    }
}

fn render_scaled(sign: &str, scaled: i128, places: usize, marker: &str) -> String {
    if places == 0 {
        return format!("{marker}{sign}{scaled}");
    }
    let pow = 10i128.pow(places as u32);
    let (whole, frac) = scaled.div_rem(&pow);
    format!("{marker}{sign}{whole}.{frac:0places$}")
}

/// Least common multiple of the denominators, used to move a set of rationals onto integers.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    values.into_iter().fold(1i128, |acc, v| acc.lcm(v.denom()))
}

/// `value · scale` as an integer; `scale` must be a multiple of the denominator.
pub fn scaled_integer(value: &Rational, scale: i128) -> i128 {
    let scaled = value * Rational::from_integer(scale);
    debug_assert!(scaled.is_integer());
    scaled.to_integer()
}

pub fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative() || value.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("1.2"), Some(ratio(6, 5)));
        assert_eq!(parse_rational("1.25"), Some(ratio(5, 4)));
        assert_eq!(parse_rational("0.5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("-3"), Some(int(-3)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("7/21"), Some(ratio(1, 3)));
        assert_eq!(parse_rational("1e3"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn renders_shortest_exact_decimal() {
        assert_eq!(to_decimal(&ratio(1279, 20)), "63.95");
        assert_eq!(to_decimal(&ratio(114, 5)), "22.8");
        assert_eq!(to_decimal(&int(46)), "46");
        assert_eq!(to_decimal(&ratio(-3, 8)), "-0.375");
        assert_eq!(to_decimal(&ratio(1, 3)), "~0.333333333333");
        assert_eq!(to_decimal(&int(0)), "0");
    }

    #[test]
    fn common_denominator_covers_all() {
        let values = [ratio(6, 5), ratio(5, 4), int(3)];
        let scale = common_denominator(&values);
        assert_eq!(scale, 20);
        assert_eq!(scaled_integer(&values[0], scale), 24);
    }
}
