//! ℓᵖ norms, distribution functions and weak-ℓ^{p,∞} quasinorms.
//!
//! Everything weak goes through the decreasing rearrangement: with
//! f*_1 ≥ f*_2 ≥ … the magnitudes of f,
//!
//!   sup_{α>0} α·μ{|f| > α}^{1/p} = max_j j^{1/p} f*_j,
//!
//! and the seminorm supremum over finite sets E is attained on prefixes.

use crate::error::{invalid, Result};
use crate::lattice::LatticeSequence;

/// Magnitudes of a sequence sorted into nonincreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct RearrangementProfile {
    sorted: Vec<f64>,
}

impl RearrangementProfile {
    pub fn of(f: &LatticeSequence) -> Self {
        Self::from_magnitudes(f.magnitudes())
    }

    pub fn from_magnitudes(mut magnitudes: Vec<f64>) -> Self {
        magnitudes.sort_by(|a, b| b.total_cmp(a));
        RearrangementProfile { sorted: magnitudes }
    }

    pub fn sorted_magnitudes(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// μ{|f| > α}: the profile is sorted, so this is a partition point.
    pub fn distribution(&self, alpha: f64) -> usize {
        self.sorted.partition_point(|&v| v > alpha)
    }

    pub fn weak_norm(&self, p: f64) -> f64 {
        let inv_p = 1.0 / p;
        self.sorted
            .iter()
            .enumerate()
            .map(|(j, v)| ((j + 1) as f64).powf(inv_p) * v)
            .fold(0.0, f64::max)
    }

    pub fn seminorm(&self, p: f64, r: f64) -> f64 {
        let mut acc = 0.0;
        let mut best: f64 = 0.0;
        let exponent = 1.0 / p - 1.0 / r;
        for (s, v) in self.sorted.iter().enumerate() {
            acc += v.powf(r);
            let size = (s + 1) as f64;
            best = best.max(size.powf(exponent) * acc.powf(1.0 / r));
        }
        best
    }
}

/// (Σ |f(n′)|ᵖ)^{1/p}, p ≥ 1.
pub fn lp_norm(f: &LatticeSequence, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("lp exponent must lie in [1, inf), got {p}")));
    }
    if p == 1.0 {
        return Ok(f.iter().map(|(_, v)| v.norm()).sum());
    }
    let s: f64 = f.iter().map(|(_, v)| v.norm().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// μ{n′ : |f(n′)| > α}, strict inequality, α > 0.
pub fn distribution(f: &LatticeSequence, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0) {
        return Err(invalid(format!("distribution level must be positive, got {alpha}")));
    }
    Ok(f.iter().filter(|(_, v)| v.norm() > alpha).count())
}

/// ‖f‖_{ℓ^{p,∞}} = max_j j^{1/p} f*_j, p > 0.
pub fn weak_norm(f: &LatticeSequence, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid(format!("weak-norm exponent must be positive, got {p}")));
    }
    Ok(RearrangementProfile::of(f).weak_norm(p))
}

/// sup over finite E of μ(E)^{1/p−1/r} (Σ_E |f|^r)^{1/r}, 0 < r < p.
///
/// Satisfies ‖f‖_{ℓ^{p,∞}} ≤ ‖f‖′ ≤ (p/(p−r))^{1/r} ‖f‖_{ℓ^{p,∞}}.
pub fn equivalent_seminorm(f: &LatticeSequence, p: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < p) || !p.is_finite() {
        return Err(invalid(format!("seminorm needs 0 < r < p, got r = {r}, p = {p}")));
    }
    Ok(RearrangementProfile::of(f).seminorm(p, r))
}

/// The default inner exponent r = p/2.
pub fn default_seminorm_exponent(p: f64) -> f64 {
    p / 2.0
}

/// (p/(p−r))^{1/r}.
pub fn sandwich_constant(p: f64, r: f64) -> f64 {
    (p / (p - r)).powf(1.0 / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{delta, MultiIndex};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn real_seq(values: &[f64]) -> LatticeSequence {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        LatticeSequence::from_slice_1d(0, &v)
    }

    #[test]
    fn delta_norms_are_one() {
        let d = delta(MultiIndex::zeros(2));
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert_eq!(lp_norm(&d, p).unwrap(), 1.0);
            assert_eq!(weak_norm(&d, p).unwrap(), 1.0);
        }
        assert_eq!(equivalent_seminorm(&d, 2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn three_four_five() {
        assert_eq!(lp_norm(&real_seq(&[3.0, 4.0]), 2.0).unwrap(), 5.0);
    }

    #[test]
    fn distribution_is_strict() {
        let d = delta(MultiIndex::zeros(1));
        assert_eq!(distribution(&d, 0.5).unwrap(), 1);
        assert_eq!(distribution(&d, 1.0).unwrap(), 0);
        let f = real_seq(&[1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(distribution(&f, 0.4).unwrap(), 2);
        assert!(distribution(&f, 0.0).is_err());
    }

    #[test]
    fn parameter_domains() {
        let f = real_seq(&[1.0]);
        assert!(lp_norm(&f, 0.5).is_err());
        assert!(weak_norm(&f, 0.0).is_err());
        assert!(weak_norm(&f, 0.5).is_ok());
        assert!(equivalent_seminorm(&f, 2.0, 2.0).is_err());
        assert!(equivalent_seminorm(&f, 2.0, 0.0).is_err());
    }

    #[test]
    fn empty_sequence_norms_vanish() {
        let z = LatticeSequence::zero(1);
        assert_eq!(lp_norm(&z, 2.0).unwrap(), 0.0);
        assert_eq!(weak_norm(&z, 2.0).unwrap(), 0.0);
        assert_eq!(equivalent_seminorm(&z, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(distribution(&z, 1.0).unwrap(), 0);
    }

    #[test]
    fn power_profile_has_unit_weak_norm() {
        for p in [1.5, 2.0, 3.0] {
            let vals: Vec<f64> = (1..=500).map(|j| (j as f64).powf(-1.0 / p)).collect();
            let w = weak_norm(&real_seq(&vals), p).unwrap();
            assert!((w - 1.0).abs() < 1e-14, "p = {p}: {w}");
        }
    }

    #[test]
    fn two_equal_values() {
        let c = 0.7;
        for p in [1.5, 2.0, 4.0] {
            let s = equivalent_seminorm(&real_seq(&[c, c]), p, p / 2.0).unwrap();
            let expect = 2f64.powf(1.0 / p) * c;
            assert!((s - expect).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn scaling(vals in proptest::collection::vec(0.001f64..10.0, 1..30), c in 0.01f64..5.0, p in 0.5f64..4.0) {
            let f = real_seq(&vals);
            let scaled = f.scale(Complex64::new(0.0, -c));
            let lhs = weak_norm(&scaled, p).unwrap();
            let rhs = c * weak_norm(&f, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn weak_below_strong(vals in proptest::collection::vec(-10.0f64..10.0, 1..30), p in 1.0f64..5.0) {
            let f = real_seq(&vals);
            prop_assert!(weak_norm(&f, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn profile_distribution_matches_scan(vals in proptest::collection::vec(-10.0f64..10.0, 0..30), alpha in 0.001f64..12.0) {
            let f = real_seq(&vals);
            let profile = RearrangementProfile::of(&f);
            prop_assert_eq!(profile.distribution(alpha), distribution(&f, alpha).unwrap());
        }
    }
}
