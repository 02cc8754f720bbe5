//! Locale-independent number rendering.
//!
//! Displayed cells are rounded half away from zero on the shortest decimal
//! representation of the binary64 value, so a value that prints as `0.125`
//! renders as `0.13` at two decimals regardless of how the binary value sits
//! relative to the tie.

/// Rounds `x` half away from zero to `decimals` fractional digits.
///
/// Non-finite values render as `NaN`, `inf` or `-inf`. A result that rounds to
/// zero is printed without a sign.
pub fn fixed(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("`{:e}` always has an exponent");
    let exp: i64 = exp.parse().expect("`{:e}` exponent is an integer");
    let digits: Vec<u8> = mantissa
        .bytes()
        .filter(u8::is_ascii_digit)
        .map(|b| b - b'0')
        .collect();

    // digits[i] carries weight 10^(exp - i); keep those with weight >= 10^-decimals.
    let keep = exp + 1 + decimals as i64;
    let mut kept: Vec<u8> = if keep <= 0 {
        Vec::new()
    } else {
        let keep = keep as usize;
        let mut v: Vec<u8> = digits.iter().copied().take(keep).collect();
        v.resize(keep, 0);
        v
    };
    let next = if keep < 0 {
        0
    } else {
        digits.get(keep as usize).copied().unwrap_or(0)
    };
    if next >= 5 {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }

    while kept.len() < decimals + 1 {
        kept.insert(0, 0);
    }
    let split = kept.len() - decimals;
    let int_part: String = kept[..split].iter().map(|d| char::from(b'0' + d)).collect();
    let frac_part: String = kept[split..].iter().map(|d| char::from(b'0' + d)).collect();
    let is_zero = kept.iter().all(|&d| d == 0);
    let sign = if x < 0.0 && !is_zero { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Shortest representation that parses back to the identical binary64 value.
pub fn full(x: f64) -> String {
    format!("{x}")
}
