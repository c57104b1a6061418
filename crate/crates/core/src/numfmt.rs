/// Format `v` with exactly `digits` significant digits, positional notation
/// for moderate exponents and scientific otherwise.
pub fn significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-7..21).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let body: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let text = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), body)
    } else if point as usize >= body.len() {
        format!("{}{}", body, "0".repeat(point as usize - body.len()))
    } else {
        let (int, frac) = body.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{text}")
}

/// Number of significant digits to which `value` agrees with `reference`,
/// `floor(-log10(|value - reference| / |reference|))`, clamped to `0..=17`.
pub fn agreement_digits(value: f64, reference: f64) -> u32 {
    if !value.is_finite() || !reference.is_finite() {
        return 0;
    }
    if value == reference {
        return 17;
    }
    let scale = if reference == 0.0 {
        1.0
    } else {
        reference.abs()
    };
    let rel = (value - reference).abs() / scale;
    (-rel.log10()).floor().clamp(0.0, 17.0) as u32
}
