//! Scalar helpers that stay finite over the whole real line.

/// Logistic sigmoid `1 / (1 + e^{-z})`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `log sigmoid(z)` without overflow for large `|z|`.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -libm::log1p(libm::exp(-z))
    } else {
        z - libm::log1p(libm::exp(z))
    }
}

/// `log(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_symmetry() {
        for &z in &[-800.0, -30.0, -1.5, 0.0, 0.3, 12.0, 800.0] {
            assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
            assert!(log_sigmoid(z).is_finite() || z < -700.0);
        }
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn log_sigmoid_matches_naive_in_safe_range() {
        for &z in &[-10.0f64, -1.0, 0.0, 2.0, 10.0] {
            let naive = (1.0 / (1.0 + (-z).exp())).ln();
            assert!((log_sigmoid(z) - naive).abs() < 1e-12);
        }
        assert!((log_sigmoid(-1000.0) + 1000.0).abs() < 1e-9);
    }

    #[test]
    fn log_add_exp_basic() {
        assert!((log_add_exp(0.0, 0.0) - core::f64::consts::LN_2).abs() < 1e-15);
        assert!((log_add_exp(-1000.0, -1000.0) - (-1000.0 + core::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert!((LN_2PI - (2.0 * core::f64::consts::PI).ln()).abs() < 1e-15);
    }
}
