//! Fourier multipliers and pseudo-differential operators on ℤⁿ.
//!
//! Frequency-side application evaluates the ξ-integral by the grid quadrature
//! of [`crate::torus`]; kernel-side application is exact convolution. The
//! ℓ¹-source operator norms are read off the kernel k = 𝓕⁻¹m:
//! ‖t_m‖_{ℓ¹→ℓ^{p,∞}} = ‖k‖_{ℓ^{p,∞}} and ‖t_m‖_{ℓ¹→ℓᵖ} = ‖k‖_{ℓᵖ}.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, invalid, Result};
use crate::lattice::{convolve, LatticeSequence, MultiIndex, Window};
use crate::matrix::{assemble, OperatorMatrix};
use crate::norms::{lp_norm, weak_norm};
use crate::symbol::{LatticeFromToroidal, MultiplierSymbol, PdoSymbol, ToroidalSymbol};
use crate::torus::{dft, inverse_dft, TorusGrid, TorusSamples};

/// Relative ℓ¹ mass allowed outside the requested window before a norm is
/// reported as a lower bound only.
pub const TRUNCATION_THRESHOLD: f64 = 1e-9;

/// t_m f(n′) = (1/Mⁿ) Σ_j e^{2πi n′·ξ_j} m(ξ_j) 𝓕f(ξ_j) for n′ ∈ `out`.
pub fn apply_multiplier<M: MultiplierSymbol + ?Sized>(
    m: &M,
    f: &LatticeSequence,
    grid: &TorusGrid,
    out: &Window,
) -> Result<LatticeSequence> {
    check_dim(grid.dim(), f.dim())?;
    check_dim(grid.dim(), m.dim())?;
    check_dim(grid.dim(), out.dim())?;
    let spectrum = dft(f, grid)?.mul(&m.sample(grid)?)?;
    inverse_dft(&spectrum, out)
}

/// t f(n′) = Σ_m k(n′ − m) f(m).
pub fn apply_by_kernel(k: &LatticeSequence, f: &LatticeSequence) -> Result<LatticeSequence> {
    convolve(k, f)
}

/// t_a f(n′) = (1/Mⁿ) Σ_j e^{2πi n′·ξ_j} a(n′, ξ_j) 𝓕f(ξ_j) for n′ ∈ `out`.
pub fn apply_pdo<A: PdoSymbol + ?Sized>(
    a: &A,
    f: &LatticeSequence,
    grid: &TorusGrid,
    out: &Window,
) -> Result<LatticeSequence> {
    check_dim(grid.dim(), f.dim())?;
    check_dim(grid.dim(), a.dim())?;
    check_dim(grid.dim(), out.dim())?;
    let spectrum = dft(f, grid)?;
    let roots = grid.roots();
    let nodes = grid.all_nodes();
    let coords: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let scale = 1.0 / grid.len() as f64;
    let values: Vec<Complex64> = (0..out.len())
        .into_par_iter()
        .map(|i| {
            let x = out.point_at(i);
            let s: Complex64 = nodes
                .iter()
                .zip(&coords)
                .zip(spectrum.values())
                .map(|((node, xi), fv)| roots[grid.phase_index(&x, node)] * a.eval(&x, xi) * fv)
                .sum();
            s * scale
        })
        .collect();
    Ok(LatticeSequence::from_dense(out, &values))
}

/// Finite section with entries (1/Mⁿ) Σ_j e^{2πi(n′−n″)·ξ_j} a(n′, ξ_j).
pub fn pdo_matrix<A: PdoSymbol + ?Sized>(
    a: &A,
    window: &Window,
    grid: &TorusGrid,
    cap: usize,
) -> Result<OperatorMatrix> {
    check_dim(grid.dim(), a.dim())?;
    check_dim(grid.dim(), window.dim())?;
    if window.len() > cap {
        return Err(crate::Error::CapExceeded {
            side: window.len(),
            cap,
        });
    }
    let roots = grid.roots();
    let nodes = grid.all_nodes();
    let coords: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let scale = 1.0 / grid.len() as f64;
    let points: Vec<MultiIndex> = window.points().collect();
    Ok(assemble(window.clone(), |r| {
        let x = &points[r];
        let symbol: Vec<Complex64> = coords.iter().map(|xi| a.eval(x, xi)).collect();
        points
            .iter()
            .map(|y| {
                let d = x - y;
                let s: Complex64 = nodes
                    .iter()
                    .zip(&symbol)
                    .map(|(node, sv)| roots[grid.phase_index(&d, node)] * sv)
                    .sum();
                s * scale
            })
            .collect()
    }))
}

/// Result of an ℓ¹-source operator norm computed from a truncated kernel.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OpNormEstimate {
    pub value: f64,
    /// ℓ¹ mass of the kernel in the margin shell divided by the total.
    pub discarded_ratio: f64,
    /// True when the discarded ratio exceeds [`TRUNCATION_THRESHOLD`]; the value is then only a lower bound.
    pub lower_bound_only: bool,
}

/// Window three times as wide around the same center, clipped to at most M points per axis.
fn margin_window(window: &Window, grid: &TorusGrid) -> Result<Window> {
    let m = grid.resolution() as i64;
    let mut lo = Vec::with_capacity(window.dim());
    let mut hi = Vec::with_capacity(window.dim());
    for axis in 0..window.dim() {
        let (l, h) = (window.lo().coords()[axis], window.hi().coords()[axis]);
        let side = h - l + 1;
        if side > m {
            return Err(invalid(format!(
                "window side {side} exceeds the grid resolution {m}; the kernel would alias"
            )));
        }
        let center = l + (h - l) / 2;
        let radius = (h - center).max(center - l);
        let mut el = (center - 3 * radius).min(l);
        let mut eh = (center + 3 * radius).max(h);
        // keep the extended window alias-free
        let spare = m - side;
        if eh - el + 1 > m {
            let left = (spare / 2).min(l - el);
            let right = (spare - left).min(eh - h);
            el = l - left;
            eh = h + right;
        }
        lo.push(el);
        hi.push(eh);
    }
    Window::new(lo.into(), hi.into())
}

/// Kernel k = 𝓕⁻¹m on `window`, with the truncation certificate.
fn certified_kernel<M: MultiplierSymbol + ?Sized>(
    m: &M,
    grid: &TorusGrid,
    window: &Window,
) -> Result<(LatticeSequence, f64)> {
    check_dim(grid.dim(), window.dim())?;
    check_dim(grid.dim(), m.dim())?;
    let wide = margin_window(window, grid)?;
    let kernel = inverse_dft(&m.sample(grid)?, &wide)?;
    let total: f64 = kernel.iter().map(|(_, v)| v.norm()).sum();
    let shell: f64 = kernel
        .iter()
        .filter(|(k, _)| !window.contains(k))
        .map(|(_, v)| v.norm())
        .sum();
    let ratio = if total == 0.0 { 0.0 } else { shell / total };
    Ok((kernel.restrict(window), ratio))
}

/// ‖t_m‖_{ℓ¹→ℓ^{p,∞}} = ‖𝓕⁻¹m‖_{ℓ^{p,∞}}.
pub fn opnorm_l1_weakp<M: MultiplierSymbol + ?Sized>(
    m: &M,
    p: f64,
    grid: &TorusGrid,
    window: &Window,
) -> Result<OpNormEstimate> {
    let (kernel, ratio) = certified_kernel(m, grid, window)?;
    Ok(OpNormEstimate {
        value: weak_norm(&kernel, p)?,
        discarded_ratio: ratio,
        lower_bound_only: ratio >= TRUNCATION_THRESHOLD,
    })
}

/// ‖t_m‖_{ℓ¹→ℓᵖ} = ‖𝓕⁻¹m‖_{ℓᵖ}.
pub fn opnorm_l1_lp<M: MultiplierSymbol + ?Sized>(
    m: &M,
    p: f64,
    grid: &TorusGrid,
    window: &Window,
) -> Result<OpNormEstimate> {
    let (kernel, ratio) = certified_kernel(m, grid, window)?;
    Ok(OpNormEstimate {
        value: lp_norm(&kernel, p)?,
        discarded_ratio: ratio,
        lower_bound_only: ratio >= TRUNCATION_THRESHOLD,
    })
}

/// Kernel-side form of [`opnorm_l1_weakp`] for an explicitly known finitely supported kernel.
pub fn kernel_opnorm_l1_weakp(kernel: &LatticeSequence, p: f64) -> Result<f64> {
    weak_norm(kernel, p)
}

/// Kernel-side form of [`opnorm_l1_lp`].
pub fn kernel_opnorm_l1_lp(kernel: &LatticeSequence, p: f64) -> Result<f64> {
    lp_norm(kernel, p)
}

/// Matrix of the periodic operator A f(x) = Σ_ξ e^{2πi x·ξ} a(x, ξ) 𝓕_𝕋 f(ξ) in the
/// Fourier basis {e^{2πi x·ξ}}, ξ ∈ `freqs`: entry (l, k) = ⟨A e_k, e_l⟩ by quadrature.
fn periodic_fourier_matrix<A: ToroidalSymbol + ?Sized>(
    a: &A,
    freqs: &[MultiIndex],
    grid: &TorusGrid,
) -> Vec<Vec<Complex64>> {
    let roots = grid.roots();
    let nodes = grid.all_nodes();
    let coords: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let scale = 1.0 / grid.len() as f64;
    // columns: input frequency k; sample a(·, k) once per column
    let columns: Vec<Vec<Complex64>> = freqs
        .par_iter()
        .map(|k| {
            let symbol: Vec<Complex64> = coords.iter().map(|x| a.eval(x, k)).collect();
            freqs
                .iter()
                .map(|l| {
                    let d = k - l;
                    let s: Complex64 = nodes
                        .iter()
                        .zip(&symbol)
                        .map(|(node, sv)| roots[grid.phase_index(&d, node)] * sv)
                        .sum();
                    s * scale
                })
                .collect()
        })
        .collect();
    (0..freqs.len())
        .map(|l| (0..freqs.len()).map(|k| columns[k][l]).collect())
        .collect()
}

/// Largest entrywise deviation between the finite section of t_m, with
/// m(n′, ξ) = conj(a(ξ, −n′)), and 𝓕⁻¹A*𝓕 for the periodic operator A of `a`.
///
/// 𝓕 sends δ_n to e_{−n}, so the lattice entry (n′, n″) of 𝓕⁻¹A*𝓕 is the
/// Fourier entry (−n′, −n″) of A*, the conjugate transpose of A.
pub fn conjugation_residual<A: ToroidalSymbol + ?Sized>(
    a: &A,
    grid: &TorusGrid,
    window: &Window,
) -> Result<f64> {
    check_dim(grid.dim(), a.dim())?;
    check_dim(grid.dim(), window.dim())?;
    let lattice_side = pdo_matrix(&LatticeFromToroidal(a), window, grid, usize::MAX)?;
    let points: Vec<MultiIndex> = window.points().collect();
    let freqs: Vec<MultiIndex> = points.iter().map(|p| -p).collect();
    let fourier = periodic_fourier_matrix(a, &freqs, grid);
    let mut worst: f64 = 0.0;
    for r in 0..points.len() {
        for c in 0..points.len() {
            // (A*)_{r,c} = conj(A_{c,r}); freqs[i] = −points[i]
            let conj_side = fourier[c][r].conj();
            worst = worst.max((lattice_side.get(r, c) - conj_side).norm());
        }
    }
    Ok(worst)
}

/// Samples of m = 𝓕k for a finitely supported kernel.
pub fn multiplier_of_kernel(k: &LatticeSequence, grid: &TorusGrid) -> Result<TorusSamples> {
    dft(k, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{delta, translate};
    use crate::symbol::{FnPdo, Identity, Modulation, MultiplierAsPdo, SampledMultiplier};
    use crate::torus::check_alias_free;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_f() -> LatticeSequence {
        LatticeSequence::from_slice_1d(-2, &[c(1.0, 0.5), c(-0.25, 2.0), c(0.0, -1.0), c(3.0, 0.0), c(0.5, 0.5)])
    }

    #[test]
    fn identity_multiplier_restricts() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let out = Window::interval(-1, 10).unwrap();
        let f = sample_f();
        let g = apply_multiplier(&Identity { dim: 1 }, &f, &grid, &out).unwrap();
        assert!(g.max_abs_diff(&f.restrict(&out)) < 1e-12);
    }

    #[test]
    fn modulation_translates() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let out = Window::interval(-12, 12).unwrap();
        let a = MultiIndex::new(&[3]);
        let g = apply_multiplier(&Modulation { shift: a.clone() }, &sample_f(), &grid, &out).unwrap();
        assert!(g.max_abs_diff(&translate(&sample_f(), &a).unwrap()) < 1e-12);
    }

    #[test]
    fn band_limited_multiplier_matches_convolution() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let k = LatticeSequence::from_entries(
            2,
            [
                (MultiIndex::new(&[-2, 1]), c(0.3, -0.1)),
                (MultiIndex::new(&[0, 0]), c(1.0, 0.0)),
                (MultiIndex::new(&[2, 2]), c(-0.5, 0.25)),
                (MultiIndex::new(&[1, -2]), c(0.0, 0.75)),
            ],
        )
        .unwrap();
        let f = LatticeSequence::from_entries(
            2,
            [
                (MultiIndex::new(&[0, 1]), c(1.0, 1.0)),
                (MultiIndex::new(&[-1, 0]), c(2.0, 0.0)),
            ],
        )
        .unwrap();
        let m = SampledMultiplier::new(multiplier_of_kernel(&k, &grid).unwrap());
        let out = Window::cube(2, 5).unwrap();
        let got = apply_multiplier(&m, &f, &grid, &out).unwrap();
        let expect = convolve(&k, &f).unwrap().restrict(&out);
        assert!(got.max_abs_diff(&expect) < 1e-11);
    }

    #[test]
    fn kernel_application_of_delta() {
        let k = sample_f();
        assert_eq!(apply_by_kernel(&k, &delta(MultiIndex::zeros(1))).unwrap(), k);
    }

    #[test]
    fn pdo_reduces_to_multiplier() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let out = Window::interval(-4, 4).unwrap();
        let m = Modulation { shift: MultiIndex::new(&[1]) };
        let a = apply_pdo(&MultiplierAsPdo(&m), &sample_f(), &grid, &out).unwrap();
        let b = apply_multiplier(&m, &sample_f(), &grid, &out).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn xi_independent_pdo_is_pointwise() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let out = Window::interval(-5, 5).unwrap();
        let weight = |n: &MultiIndex| c(1.0 + n.coords()[0] as f64, -0.5);
        let a = FnPdo::new(1, move |n: &MultiIndex, _xi: &[f64]| weight(n));
        let f = sample_f();
        let got = apply_pdo(&a, &f, &grid, &out).unwrap();
        for p in out.points() {
            let expect = weight(&p) * f.get(&p);
            assert!((got.get(&p) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn pdo_matrix_matches_pdo_application() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let window = Window::interval(-6, 6).unwrap();
        let a = FnPdo::new(1, |n: &MultiIndex, xi: &[f64]| {
            let r = n.euclidean_norm();
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * xi[0]) / (1.0 + r * r)
        });
        let f = sample_f();
        check_alias_free(f.support().chain(window.points().collect::<Vec<_>>().iter()), &grid).unwrap();
        let mat = pdo_matrix(&a, &window, &grid, 4096).unwrap();
        let direct = apply_pdo(&a, &f, &grid, &window).unwrap();
        assert!(mat.apply_sequence(&f).max_abs_diff(&direct) < 1e-11);
    }

    #[test]
    fn multiplier_matrix_is_toeplitz() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let window = Window::interval(-4, 4).unwrap();
        let m = FnPdo::new(1, |_n: &MultiIndex, xi: &[f64]| c((2.0 * std::f64::consts::PI * xi[0]).cos(), 0.3));
        let mat = pdo_matrix(&m, &window, &grid, 4096).unwrap();
        for r in 1..mat.side() {
            for col in 1..mat.side() {
                assert!((mat.get(r, col) - mat.get(r - 1, col - 1)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_symbol_matrix() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let window = Window::interval(-3, 3).unwrap();
        let mat = pdo_matrix(&MultiplierAsPdo(Identity { dim: 1 }), &window, &grid, 4096).unwrap();
        assert!(mat.max_abs_diff(&OperatorMatrix::identity(window)) < 1e-15);
    }

    #[test]
    fn matrix_cap_is_enforced() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let window = Window::interval(0, 9).unwrap();
        let r = pdo_matrix(&MultiplierAsPdo(Identity { dim: 1 }), &window, &grid, 5);
        assert!(matches!(r, Err(crate::Error::CapExceeded { side: 10, cap: 5 })));
    }

    #[test]
    fn identity_opnorms() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let window = Window::interval(-4, 4).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let w = opnorm_l1_weakp(&Identity { dim: 1 }, p, &grid, &window).unwrap();
            assert!((w.value - 1.0).abs() < 1e-12);
            assert!(!w.lower_bound_only);
            let s = opnorm_l1_lp(&Identity { dim: 1 }, p, &grid, &window).unwrap();
            assert!((s.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_kernel_is_flagged() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let k = LatticeSequence::from_slice_1d(0, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]);
        let m = SampledMultiplier::new(multiplier_of_kernel(&k, &grid).unwrap());
        let full = opnorm_l1_lp(&m, 2.0, &grid, &Window::interval(-6, 6).unwrap()).unwrap();
        assert!((full.value - 5.0).abs() < 1e-12);
        assert!(!full.lower_bound_only);
        let cut = opnorm_l1_lp(&m, 2.0, &grid, &Window::interval(-2, 2).unwrap()).unwrap();
        assert!(cut.lower_bound_only);
        assert!((cut.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn conjugation_identity_for_identity_symbol() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let a = crate::symbol::FnToroidal::new(1, |_x: &[f64], _xi: &MultiIndex| c(1.0, 0.0));
        let r = conjugation_residual(&a, &grid, &Window::interval(-5, 5).unwrap()).unwrap();
        assert!(r < 1e-13, "{r}");
    }
}
