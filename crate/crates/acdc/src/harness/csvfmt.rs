//! Deterministic CSV number formatting: six significant digits, plain
//! decimal notation inside a sane exponent range, scientific outside it,
//! trailing zeros stripped. Identical inputs always produce identical bytes.

pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp10 = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp10) {
        let decimals = (5 - exp10).max(0) as usize;
        let s = format!("{x:.decimals$}");
        strip_zeros(&s)
    } else {
        let s = format!("{x:.5e}");
        // "9.47000e-1" -> "9.47e-1"
        match s.split_once('e') {
            Some((mantissa, exponent)) => format!("{}e{exponent}", strip_zeros(mantissa)),
            None => s,
        }
    }
}

fn strip_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_range() {
        assert_eq!(fmt_g6(0.947), "0.947");
        assert_eq!(fmt_g6(0.162), "0.162");
        assert_eq!(fmt_g6(2.56), "2.56");
        assert_eq!(fmt_g6(123456.0), "123456");
        assert_eq!(fmt_g6(-0.0185185), "-0.0185185");
        assert_eq!(fmt_g6(-0.01851853), "-0.0185185");
        assert_eq!(fmt_g6(1.0), "1");
        assert_eq!(fmt_g6(0.0), "0");
    }

    #[test]
    fn scientific_range() {
        assert_eq!(fmt_g6(1.25e-7), "1.25e-7");
        assert_eq!(fmt_g6(3.0e9), "3e9");
        assert_eq!(fmt_g6(-4.20001e12), "-4.20001e12");
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_g6(0.123456789), "0.123457");
        assert_eq!(fmt_g6(987654.321), "987654");
    }
}
