//! Display rounding shared by the JSON `display` strings and the Markdown
//! renderer: ratios to 2 decimals, percents whole, forecast units to 1 decimal.

use alloc::format;
use alloc::string::String;

fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    // "-0", "-0.0", ... read as zero
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        String::from(&s[1..])
    } else {
        s
    }
}

/// Accuracy ratios and multipliers: `0.59`.
pub fn ratio(x: f64) -> String {
    fixed(x, 2)
}

/// Percent value already scaled by 100: `69%`.
pub fn percent(x: f64) -> String {
    format!("{}%", fixed(x, 0))
}

/// Fraction shown as a whole percent: 0.0912 → `9%`. Use [`percent_1dp`] where
/// the extra digit matters.
pub fn fraction_pct(x: f64) -> String {
    percent(100.0 * x)
}

/// Fraction as a percent with one decimal: 0.0912 → `9.1%`.
pub fn percent_1dp(x: f64) -> String {
    format!("{}%", fixed(100.0 * x, 1))
}

/// Values in the forecast's unit: `8.3`.
pub fn value(x: f64) -> String {
    fixed(x, 1)
}

/// Probabilities and confidence levels: `90%`.
pub fn level(x: f64) -> String {
    fraction_pct(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(ratio(0.5921), "0.59");
        assert_eq!(value(14.1 * 0.15), "2.1");
        assert_eq!(value(14.1 * 0.78), "11.0");
        assert_eq!(percent(69.49), "69%");
        assert_eq!(percent(-0.2), "0%");
        assert_eq!(percent_1dp(0.0912), "9.1%");
        assert_eq!(fraction_pct(0.8033), "80%");
        assert_eq!(ratio(-0.001), "0.00");
    }
}
