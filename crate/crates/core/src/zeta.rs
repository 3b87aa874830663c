//! Riemann zeta values and tails for real s > 1.
//!
//! ζ(s) is a compensated partial sum up to [`PARTIAL_TERMS`] plus an
//! Euler–Maclaurin tail. [`tail_upper_bound`] is the rigorous integral bound
//! Σ_{m>N} m^{−s} ≤ ∫_N^∞ x^{−s} dx.

use crate::error::{invalid, Result};

pub const PARTIAL_TERMS: u64 = 10_000;

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Σ_{m=1}^{n} m^{−s}, summed from the small end.
pub fn partial_sum(s: f64, n: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    for m in (1..=n).rev() {
        acc.add((m as f64).powf(-s));
    }
    acc.value()
}

/// Σ_{m>n} m^{−s} by Euler–Maclaurin through the B₆ term, n ≥ 1.
pub fn tail(s: f64, n: u64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(invalid(format!("zeta tail needs s > 1, got {s}")));
    }
    if n == 0 {
        return Err(invalid("zeta tail needs n >= 1"));
    }
    let x = n as f64;
    let xs = x.powf(-s);
    let integral = x * xs / (s - 1.0);
    let t1 = -0.5 * xs;
    let t2 = s / 12.0 * xs / x;
    let t3 = -s * (s + 1.0) * (s + 2.0) / 720.0 * xs / x.powi(3);
    let t4 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * xs / x.powi(5);
    Ok(integral + t1 + t2 + t3 + t4)
}

/// ∫_n^∞ x^{−s} dx = n^{1−s}/(s−1) ≥ Σ_{m>n} m^{−s}.
pub fn tail_upper_bound(s: f64, n: u64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(invalid(format!("zeta tail bound needs s > 1, got {s}")));
    }
    if n == 0 {
        return Err(invalid("zeta tail bound needs n >= 1"));
    }
    Ok((n as f64).powf(1.0 - s) / (s - 1.0))
}

/// ζ(s), s > 1.
pub fn zeta(s: f64) -> Result<f64> {
    let t = tail(s, PARTIAL_TERMS)?;
    Ok(partial_sum(s, PARTIAL_TERMS) + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn known_values() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn tail_lies_inside_integral_bracket() {
        for &s in &[1.1, 1.5, 2.0, 3.7] {
            for &n in &[1u64, 5, 100, 10_000] {
                let t = tail(s, n).unwrap();
                let upper = tail_upper_bound(s, n).unwrap();
                let lower = tail_upper_bound(s, n + 1).unwrap();
                if n >= 5 {
                    assert!(lower <= t && t <= upper, "s = {s}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn rejects_divergent_exponents() {
        assert!(zeta(1.0).is_err());
        assert!(tail(0.5, 10).is_err());
        assert!(tail_upper_bound(1.0, 10).is_err());
    }
}
