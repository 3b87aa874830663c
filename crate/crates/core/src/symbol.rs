//! Symbol evaluators.
//!
//! * [`MultiplierSymbol`]: ξ ↦ m(ξ) on 𝕋ⁿ.
//! * [`PdoSymbol`]: (n′, ξ) ↦ m(n′, ξ) on ℤⁿ × 𝕋ⁿ.
//! * [`ToroidalSymbol`]: (x, ξ) ↦ a(x, ξ) on 𝕋ⁿ × ℤⁿ, the symbol of a periodic operator.
//!
//! The last two are related by m(n′, ξ) = conj(a(ξ, −n′)).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::lattice::MultiIndex;
use crate::torus::{TorusGrid, TorusSamples};

pub trait MultiplierSymbol: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, xi: &[f64]) -> Complex64;

    fn sample(&self, grid: &TorusGrid) -> Result<TorusSamples> {
        if grid.dim() != self.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: self.dim(),
                found: grid.dim(),
            });
        }
        Ok(TorusSamples::from_fn(*grid, |xi| self.eval(xi)))
    }
}

pub trait PdoSymbol: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, point: &MultiIndex, xi: &[f64]) -> Complex64;
}

pub trait ToroidalSymbol: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], xi: &MultiIndex) -> Complex64;
}

impl<T: MultiplierSymbol + ?Sized> MultiplierSymbol for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (**self).eval(xi)
    }
    fn sample(&self, grid: &TorusGrid) -> Result<TorusSamples> {
        (**self).sample(grid)
    }
}

impl<T: PdoSymbol + ?Sized> PdoSymbol for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, point: &MultiIndex, xi: &[f64]) -> Complex64 {
        (**self).eval(point, xi)
    }
}

impl<T: PdoSymbol + ?Sized> PdoSymbol for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, point: &MultiIndex, xi: &[f64]) -> Complex64 {
        (**self).eval(point, xi)
    }
}

impl<T: ToroidalSymbol + ?Sized> ToroidalSymbol for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], xi: &MultiIndex) -> Complex64 {
        (**self).eval(x, xi)
    }
}

/// Closure-backed multiplier.
pub struct FnMultiplier<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Complex64 + Sync> FnMultiplier<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnMultiplier { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Complex64 + Sync> MultiplierSymbol for FnMultiplier<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.f)(xi)
    }
}

/// Closure-backed pseudo-differential symbol.
pub struct FnPdo<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&MultiIndex, &[f64]) -> Complex64 + Sync> FnPdo<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnPdo { dim, f }
    }
}

impl<F: Fn(&MultiIndex, &[f64]) -> Complex64 + Sync> PdoSymbol for FnPdo<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, point: &MultiIndex, xi: &[f64]) -> Complex64 {
        (self.f)(point, xi)
    }
}

/// Closure-backed toroidal symbol.
pub struct FnToroidal<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &MultiIndex) -> Complex64 + Sync> FnToroidal<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnToroidal { dim, f }
    }
}

impl<F: Fn(&[f64], &MultiIndex) -> Complex64 + Sync> ToroidalSymbol for FnToroidal<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], xi: &MultiIndex) -> Complex64 {
        (self.f)(x, xi)
    }
}

/// m ≡ 1.
#[derive(Clone, Copy, Debug)]
pub struct Identity {
    pub dim: usize,
}

impl MultiplierSymbol for Identity {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _xi: &[f64]) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

/// m(ξ) = e^{−2πi a·ξ}; the operator is translation by `a`.
#[derive(Clone, Debug)]
pub struct Modulation {
    pub shift: MultiIndex,
}

impl MultiplierSymbol for Modulation {
    fn dim(&self) -> usize {
        self.shift.dim()
    }
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let phase: f64 = self
            .shift
            .coords()
            .iter()
            .zip(xi)
            .map(|(&a, &x)| a as f64 * x)
            .sum();
        Complex64::from_polar(1.0, -2.0 * PI * phase)
    }
}

/// Multiplier known only through its samples on one grid.
///
/// Off-grid evaluation uses the nearest node.
#[derive(Clone, Debug)]
pub struct SampledMultiplier {
    samples: TorusSamples,
}

impl SampledMultiplier {
    pub fn new(samples: TorusSamples) -> Self {
        SampledMultiplier { samples }
    }

    pub fn samples(&self) -> &TorusSamples {
        &self.samples
    }
}

impl MultiplierSymbol for SampledMultiplier {
    fn dim(&self) -> usize {
        self.samples.grid().dim()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let grid = self.samples.grid();
        let m = grid.resolution() as f64;
        let node: Vec<i64> = xi.iter().map(|x| (x * m).round() as i64).collect();
        self.samples.values()[grid.position(&node)]
    }

    fn sample(&self, grid: &TorusGrid) -> Result<TorusSamples> {
        if grid == self.samples.grid() {
            Ok(self.samples.clone())
        } else {
            Err(invalid(format!(
                "sampled symbol lives on resolution {}, requested {}",
                self.samples.grid().resolution(),
                grid.resolution()
            )))
        }
    }
}

/// A multiplier viewed as a pseudo-differential symbol independent of n′.
pub struct MultiplierAsPdo<M>(pub M);

impl<M: MultiplierSymbol> PdoSymbol for MultiplierAsPdo<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, _point: &MultiIndex, xi: &[f64]) -> Complex64 {
        self.0.eval(xi)
    }
}

/// m(n′, ξ) = conj(a(ξ, −n′)) for a periodic symbol a.
pub struct LatticeFromToroidal<A>(pub A);

impl<A: ToroidalSymbol> PdoSymbol for LatticeFromToroidal<A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, point: &MultiIndex, xi: &[f64]) -> Complex64 {
        self.0.eval(xi, &-point).conj()
    }
}

/// ã(x, ν) = conj(m(−ν, x)), the inverse of [`LatticeFromToroidal`].
pub struct ToroidalFromLattice<M>(pub M);

impl<M: PdoSymbol> ToroidalSymbol for ToroidalFromLattice<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, x: &[f64], xi: &MultiIndex) -> Complex64 {
        self.0.eval(&-xi, x).conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_adapters_are_inverse() {
        let a = FnToroidal::new(1, |x: &[f64], xi: &MultiIndex| {
            Complex64::new(x[0] * 3.0 + xi.coords()[0] as f64, x[0] - 0.5 * xi.coords()[0] as f64)
        });
        let round = ToroidalFromLattice(LatticeFromToroidal(&a));
        for &x in &[0.0, 0.25, 0.7] {
            for k in -3..=3 {
                let xi = MultiIndex::new(&[k]);
                assert_eq!(round.eval(&[x], &xi), a.eval(&[x], &xi));
            }
        }
    }

    #[test]
    fn sampled_multiplier_reads_nodes() {
        let grid = TorusGrid::new(1, 4).unwrap();
        let s = TorusSamples::new(
            grid,
            (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect(),
        )
        .unwrap();
        let m = SampledMultiplier::new(s.clone());
        assert_eq!(m.eval(&[0.5]), Complex64::new(2.0, 0.0));
        assert_eq!(m.sample(&grid).unwrap(), s);
        assert!(m.sample(&TorusGrid::new(1, 8).unwrap()).is_err());
    }
}
