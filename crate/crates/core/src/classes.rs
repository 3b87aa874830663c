//! Symbol-class calculus on 𝕋ⁿ × ℤⁿ: forward differences in the lattice
//! variable, spectral derivatives in the torus variable, observed class
//! constants, and Gohberg decay diagnostics.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, invalid, Result};
use crate::lattice::{MultiIndex, Window};
use crate::matrix::{top_singular_values, OperatorMatrix, PowerIteration};
use crate::symbol::{PdoSymbol, ToroidalFromLattice, ToroidalSymbol};
use crate::torus::{unit_roots, TorusGrid, TorusSamples};

fn binomial(n: i64, k: i64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All multi-indices 0 ≤ β ≤ α componentwise, lexicographic.
fn below(alpha: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &a in alpha.coords() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (0..=a).map(move |b| {
                    let mut v = prefix.clone();
                    v.push(b);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(MultiIndex::from).collect()
}

/// Multi-indices γ ≥ 0 in `dim` variables with |γ| ≤ `order`.
pub fn multi_indices_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
    below(&MultiIndex::new(&vec![order as i64; dim]))
        .into_iter()
        .filter(|g| g.l1() <= order as i64)
        .collect()
}

fn check_nonnegative(alpha: &MultiIndex) -> Result<()> {
    if alpha.coords().iter().any(|&a| a < 0) {
        return Err(invalid(format!("order {alpha} has a negative component")));
    }
    Ok(())
}

/// Δ^α σ(ξ) = Σ_{0≤β≤α} (−1)^{|α−β|} ∏ binom(αᵢ, βᵢ) σ(ξ + β).
pub fn difference<F>(sigma: F, alpha: &MultiIndex, xi: &MultiIndex) -> Result<Complex64>
where
    F: Fn(&MultiIndex) -> Complex64,
{
    check_dim(alpha.dim(), xi.dim())?;
    check_nonnegative(alpha)?;
    Ok(difference_weights(alpha)
        .into_iter()
        .map(|(beta, w)| sigma(&(xi + &beta)) * w)
        .sum())
}

fn difference_weights(alpha: &MultiIndex) -> Vec<(MultiIndex, f64)> {
    below(alpha)
        .into_iter()
        .map(|beta| {
            let mut w = if (alpha.l1() - beta.l1()) % 2 == 0 { 1.0 } else { -1.0 };
            for (&a, &b) in alpha.coords().iter().zip(beta.coords()) {
                w *= binomial(a, b);
            }
            (beta, w)
        })
        .collect()
}

/// ∂^β F by spectral differentiation along each axis. Frequencies are taken
/// in the symmetric range; for even M the Nyquist mode is dropped.
pub fn torus_derivative(f: &TorusSamples, beta: &MultiIndex) -> Result<TorusSamples> {
    let grid = *f.grid();
    check_dim(grid.dim(), beta.dim())?;
    check_nonnegative(beta)?;
    let m = grid.resolution();
    let roots = unit_roots(m);
    let mut values = f.values().to_vec();
    let two_pi = 2.0 * std::f64::consts::PI;
    for (axis, &order) in beta.coords().iter().enumerate() {
        if order == 0 {
            continue;
        }
        let factors: Vec<Complex64> = (0..m)
            .map(|k| {
                let freq = if 2 * k < m {
                    k as f64
                } else if 2 * k == m {
                    return Complex64::default();
                } else {
                    k as f64 - m as f64
                };
                Complex64::new(0.0, two_pi * freq).powi(order as i32)
            })
            .collect();
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        let block = stride * m;
        let mut next = vec![Complex64::default(); values.len()];
        for start in (0..values.len()).filter(|i| i % block < stride) {
            let line: Vec<Complex64> = (0..m).map(|j| values[start + j * stride]).collect();
            let coeffs: Vec<Complex64> = (0..m)
                .map(|k| {
                    let c: Complex64 = line
                        .iter()
                        .enumerate()
                        .map(|(j, v)| v * roots[(j * k) % m].conj())
                        .sum();
                    c * factors[k] / m as f64
                })
                .collect();
            for j in 0..m {
                next[start + j * stride] = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * roots[(j * k) % m])
                    .sum();
            }
        }
        values = next;
    }
    TorusSamples::new(grid, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightStyle {
    /// ⟨ξ⟩ = (1 + |ξ|²)^{1/2}
    JapaneseBracket,
    /// 1 + |ξ|
    OnePlusNorm,
}

impl WeightStyle {
    pub fn weight(self, xi: &MultiIndex) -> f64 {
        let r = xi.euclidean_norm();
        match self {
            WeightStyle::JapaneseBracket => (1.0 + r * r).sqrt(),
            WeightStyle::OnePlusNorm => 1.0 + r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Unbounded,
}

/// Class parameters: order m, type (ρ, δ), difference/derivative depths, weight and tolerance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassParams {
    pub order: f64,
    pub rho: f64,
    pub delta: f64,
    pub n1: u32,
    pub n2: u32,
    pub weight: WeightStyle,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantRow {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub constant: f64,
    pub weight_exponent: f64,
}

/// Observed constants sup |Δ^α ∂^β a(x, ξ)| · w(ξ)^{−e(α,β)} over the probe
/// window and the grid nodes. A finite-domain certificate only.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub rows: Vec<ConstantRow>,
    pub verdict: Verdict,
    pub params: ClassParams,
    pub probe_lo: Vec<i64>,
    pub probe_hi: Vec<i64>,
    pub grid_resolution: usize,
}

impl ClassReport {
    pub fn constant(&self, alpha: &[i64], beta: &[i64]) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.alpha == alpha && r.beta == beta)
            .map(|r| r.constant)
    }

    pub fn max_constant(&self) -> f64 {
        self.rows.iter().map(|r| r.constant).fold(0.0, f64::max)
    }
}

/// Weight exponent order − ρ|α| + δ|β| for the (α, β) row.
fn class_exponent(params: &ClassParams, alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
    params.order - params.rho * alpha.l1() as f64 + params.delta * beta.l1() as f64
}

pub fn class_check<A: ToroidalSymbol + ?Sized>(
    a: &A,
    params: ClassParams,
    probe: &Window,
    grid: &TorusGrid,
) -> Result<ClassReport> {
    check_dim(grid.dim(), a.dim())?;
    check_dim(grid.dim(), probe.dim())?;
    if !(params.rho >= 0.0 && params.rho < 1.0) {
        return Err(invalid(format!("rho must lie in [0, 1), got {}", params.rho)));
    }
    if !(params.delta >= 0.0 && params.delta <= 1.0) {
        return Err(invalid(format!("delta must lie in [0, 1], got {}", params.delta)));
    }
    if !(params.tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let dim = grid.dim();
    let alphas = multi_indices_up_to(dim, params.n1);
    let betas = multi_indices_up_to(dim, params.n2);

    // samples of a(·, ξ) for every lattice point any difference touches
    let reach = Window::new(
        probe.lo().clone(),
        probe.hi() + &MultiIndex::new(&vec![params.n1 as i64; dim]),
    )?;
    let samples: HashMap<MultiIndex, TorusSamples> = reach
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|xi| {
            let s = TorusSamples::from_fn(*grid, |x| a.eval(x, &xi));
            (xi, s)
        })
        .collect();

    let probe_points: Vec<MultiIndex> = probe.points().collect();
    let pairs: Vec<(MultiIndex, MultiIndex)> = alphas
        .iter()
        .flat_map(|al| betas.iter().map(move |be| (al.clone(), be.clone())))
        .collect();
    let rows: Vec<ConstantRow> = pairs
        .into_par_iter()
        .map(|(alpha, beta)| {
            let weights = difference_weights(&alpha);
            let exponent = class_exponent(&params, &alpha, &beta);
            let mut constant: f64 = 0.0;
            for xi in &probe_points {
                let mut diff = vec![Complex64::default(); grid.len()];
                for (shift, w) in &weights {
                    let s = &samples[&(xi + shift)];
                    for (d, v) in diff.iter_mut().zip(s.values()) {
                        *d += v * w;
                    }
                }
                let diff = TorusSamples::new(*grid, diff)?;
                let deriv = if beta.l1() == 0 {
                    diff
                } else {
                    torus_derivative(&diff, &beta)?
                };
                let scale = params.weight.weight(xi).powf(-exponent);
                let sup = deriv.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
                constant = constant.max(sup * scale);
            }
            Ok(ConstantRow {
                alpha: alpha.coords().to_vec(),
                beta: beta.coords().to_vec(),
                constant,
                weight_exponent: exponent,
            })
        })
        .collect::<Result<_>>()?;
    let verdict = if rows.iter().all(|r| r.constant <= params.tolerance) {
        Verdict::Bounded
    } else {
        Verdict::Unbounded
    };
    Ok(ClassReport {
        rows,
        verdict,
        params,
        probe_lo: probe.lo().coords().to_vec(),
        probe_hi: probe.hi().coords().to_vec(),
        grid_resolution: grid.resolution(),
    })
}

/// Discrete Calderón–Vaillancourt condition
/// |∂_x^β Δ_ν^α ã(x, ν)| ≤ C (1 + |ν|)^{(|β|−|α|)ρ} for ã(x, ν) = conj(m(−ν, x)).
pub fn cv_check<M: PdoSymbol + ?Sized>(
    m: &M,
    rho: f64,
    n1: u32,
    n2: u32,
    probe: &Window,
    grid: &TorusGrid,
    tolerance: f64,
) -> Result<ClassReport> {
    let params = ClassParams {
        order: 0.0,
        rho,
        delta: rho,
        n1,
        n2,
        weight: WeightStyle::OnePlusNorm,
        tolerance,
    };
    class_check(&ToroidalFromLattice(m), params, probe, grid)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompactnessVerdict {
    Consistent,
    NotCompact,
}

#[derive(Clone, Debug, Serialize)]
pub struct GohbergReport {
    pub radii: Vec<u64>,
    pub decay: Vec<f64>,
    pub tolerance: f64,
    pub verdict: CompactnessVerdict,
}

/// d(R) = max over |n′|_∞ = R and grid nodes ξ of |m(n′, ξ)|. The verdict is
/// `Consistent` when d is nonincreasing over the radii and its last value is below `tolerance`.
pub fn gohberg_decay<M: PdoSymbol + ?Sized>(
    m: &M,
    grid: &TorusGrid,
    radii: &[u64],
    tolerance: f64,
) -> Result<GohbergReport> {
    check_dim(grid.dim(), m.dim())?;
    if radii.is_empty() {
        return Err(invalid("no radii given"));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("radii must be strictly increasing"));
    }
    let coords: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let dim = grid.dim();
    let decay: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let r = i64::try_from(r).map_err(|_| invalid("radius too large"))?;
            let points = shell(dim, r);
            Ok(points
                .iter()
                .flat_map(|p| coords.iter().map(move |xi| m.eval(p, xi).norm()))
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let monotone = decay.windows(2).all(|w| w[1] <= w[0]);
    let verdict = if monotone && *decay.last().unwrap() < tolerance {
        CompactnessVerdict::Consistent
    } else {
        CompactnessVerdict::NotCompact
    };
    Ok(GohbergReport {
        radii: radii.to_vec(),
        decay,
        tolerance,
        verdict,
    })
}

/// Lattice points with max-norm exactly r.
fn shell(dim: usize, r: i64) -> Vec<MultiIndex> {
    if r == 0 {
        return vec![MultiIndex::zeros(dim)];
    }
    Window::cube(dim, r)
        .expect("cube of a valid radius")
        .points()
        .filter(|p| p.max_norm() == r)
        .collect()
}

/// Top `count` singular values of a finite section, nonincreasing.
pub fn singular_tail(a: &OperatorMatrix, count: usize) -> Result<Vec<f64>> {
    top_singular_values(a, count, PowerIteration::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::FnToroidal;
    use std::f64::consts::PI;

    fn mi(c: &[i64]) -> MultiIndex {
        MultiIndex::new(c)
    }

    #[test]
    fn differences_of_polynomials() {
        let constant = |_: &MultiIndex| Complex64::new(3.0, -1.0);
        assert_eq!(difference(constant, &mi(&[2]), &mi(&[5])).unwrap(), Complex64::default());
        let linear = |x: &MultiIndex| Complex64::new(x.coords()[0] as f64, 0.0);
        assert_eq!(difference(linear, &mi(&[1]), &mi(&[-4])).unwrap().re, 1.0);
        assert_eq!(difference(linear, &mi(&[2]), &mi(&[-4])).unwrap().re, 0.0);
        let square = |x: &MultiIndex| Complex64::new((x.coords()[0] * x.coords()[0]) as f64, 0.0);
        for x in -5..5 {
            assert_eq!(difference(square, &mi(&[2]), &mi(&[x])).unwrap().re, 2.0);
        }
        assert!(difference(square, &mi(&[-1]), &mi(&[0])).is_err());
    }

    #[test]
    fn mixed_difference_in_two_variables() {
        let f = |x: &MultiIndex| Complex64::new((x.coords()[0] * x.coords()[1]) as f64, 0.0);
        assert_eq!(difference(f, &mi(&[1, 1]), &mi(&[3, -7])).unwrap().re, 1.0);
    }

    #[test]
    fn spectral_derivatives() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let e = TorusSamples::from_fn(grid, |x| Complex64::from_polar(1.0, 2.0 * PI * x[0]));
        let de = torus_derivative(&e, &mi(&[1])).unwrap();
        for (d, v) in de.values().iter().zip(e.values()) {
            assert!((d - v * Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
        }
        let s = TorusSamples::from_fn(grid, |x| Complex64::new((4.0 * PI * x[0]).sin(), 0.0));
        let ds = torus_derivative(&s, &mi(&[2])).unwrap();
        for (d, v) in ds.values().iter().zip(s.values()) {
            assert!((d + v * 16.0 * PI * PI).norm() < 1e-10);
        }
        // roundoff in the coefficients is amplified by up to (πM)^3
        let c = TorusSamples::from_fn(grid, |_| Complex64::new(2.0, 1.0));
        let bound = f64::EPSILON * 32.0 * (PI * 32.0).powi(3) * 5f64.sqrt();
        assert!(torus_derivative(&c, &mi(&[3])).unwrap().values().iter().all(|v| v.norm() < bound));
    }

    #[test]
    fn spectral_derivative_along_second_axis() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let f = TorusSamples::from_fn(grid, |x| Complex64::from_polar(1.0, 2.0 * PI * (x[0] + 3.0 * x[1])));
        let d = torus_derivative(&f, &mi(&[0, 1])).unwrap();
        for (dv, v) in d.values().iter().zip(f.values()) {
            assert!((dv - v * Complex64::new(0.0, 6.0 * PI)).norm() < 1e-11);
        }
    }

    fn params(order: f64, rho: f64, delta: f64, tol: f64) -> ClassParams {
        ClassParams {
            order,
            rho,
            delta,
            n1: 2,
            n2: 2,
            weight: WeightStyle::JapaneseBracket,
            tolerance: tol,
        }
    }

    #[test]
    fn bracket_power_has_unit_zeroth_constant() {
        let m0 = 1.5;
        let a = FnToroidal::new(1, move |_: &[f64], xi: &MultiIndex| {
            Complex64::new(WeightStyle::JapaneseBracket.weight(xi).powf(m0), 0.0)
        });
        let grid = TorusGrid::new(1, 8).unwrap();
        let r = class_check(&a, params(m0, 1.0 - 1e-12, 0.0, 10.0), &Window::cube(1, 20).unwrap(), &grid).unwrap();
        assert!((r.constant(&[0], &[0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_exponential_constants() {
        let a = FnToroidal::new(1, |x: &[f64], _: &MultiIndex| Complex64::from_polar(1.0, 2.0 * PI * x[0]));
        let grid = TorusGrid::new(1, 16).unwrap();
        let r = class_check(&a, params(0.0, 0.0, 0.0, 100.0), &Window::cube(1, 5).unwrap(), &grid).unwrap();
        for b in 0..=2 {
            let c = r.constant(&[0], &[b]).unwrap();
            assert!((c - (2.0 * PI).powi(b as i32)).abs() < 1e-9, "beta = {b}: {c}");
            for al in 1..=2 {
                assert!(r.constant(&[al], &[b]).unwrap() < 1e-12);
            }
        }
        assert_eq!(r.rows.len(), 9);
        assert_eq!(r.verdict, Verdict::Bounded);
    }

    #[test]
    fn linear_symbol_is_unbounded() {
        let a = FnToroidal::new(1, |_: &[f64], xi: &MultiIndex| Complex64::new(xi.coords()[0] as f64, 0.0));
        let grid = TorusGrid::new(1, 4).unwrap();
        let r = class_check(&a, params(0.0, 0.0, 0.0, 10.0), &Window::cube(1, 50).unwrap(), &grid).unwrap();
        assert_eq!(r.constant(&[0], &[0]).unwrap(), 50.0);
        assert_eq!(r.verdict, Verdict::Unbounded);
    }

    #[test]
    fn domain_errors() {
        let a = FnToroidal::new(1, |_: &[f64], _: &MultiIndex| Complex64::new(1.0, 0.0));
        let grid = TorusGrid::new(1, 4).unwrap();
        let w = Window::cube(1, 2).unwrap();
        assert!(class_check(&a, params(0.0, 1.0, 0.0, 1.0), &w, &grid).is_err());
        assert!(class_check(&a, params(0.0, 0.5, 1.5, 1.0), &w, &grid).is_err());
    }

    #[test]
    fn shells() {
        assert_eq!(shell(1, 0).len(), 1);
        assert_eq!(shell(1, 3).len(), 2);
        assert_eq!(shell(2, 2).len(), 16);
    }
}
