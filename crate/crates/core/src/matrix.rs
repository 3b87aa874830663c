//! Dense finite sections of operators and power-iteration singular values.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeSequence, Window};
use crate::torus::fmt_f64;

/// Default cap on the window cardinality of an assembled matrix.
pub const DEFAULT_MATRIX_CAP: usize = 4096;

/// Square matrix indexed by (output point, input point) in lexicographic window order.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    window: Window,
    side: usize,
    entries: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn from_rows(window: Window, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let side = window.len();
        if rows.len() != side || rows.iter().any(|r| r.len() != side) {
            return Err(invalid("matrix rows do not match the window cardinality"));
        }
        Ok(OperatorMatrix {
            window,
            side,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(window: Window) -> Self {
        let side = window.len();
        let mut entries = vec![Complex64::default(); side * side];
        for i in 0..side {
            entries[i * side + i] = Complex64::new(1.0, 0.0);
        }
        OperatorMatrix {
            window,
            side,
            entries,
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.side + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.side..(row + 1) * self.side]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.side)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.side];
        for (r, &vr) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * vr;
            }
        }
        out
    }

    /// Applies the matrix to a sequence; entries outside the window are ignored.
    pub fn apply_sequence(&self, f: &LatticeSequence) -> LatticeSequence {
        let out = self.apply(&f.to_dense(&self.window));
        LatticeSequence::from_dense(&self.window, &out)
    }

    /// CSV export: a window line, a `row,col,re,im` header, then every entry.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let join = |m: &crate::MultiIndex| {
            m.coords()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(
            w,
            "window_lo={},window_hi={}",
            join(self.window.lo()),
            join(self.window.hi())
        )?;
        writeln!(w, "row,col,re,im")?;
        for r in 0..self.side {
            for c in 0..self.side {
                let v = self.get(r, c);
                writeln!(w, "{r},{c},{},{}", fmt_f64(v.re), fmt_f64(v.im))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Stopping rule shared by [`opnorm_l2`] and [`top_singular_values`].
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            max_iterations: 2000,
            tol: 1e-10,
        }
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let c = inner(q, v);
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= c * qi;
        }
    }
}

/// Power iteration on A*A restricted to the orthogonal complement of `found`.
/// Returns (σ², unit vector).
fn dominant_pair(
    a: &OperatorMatrix,
    start: Vec<Complex64>,
    found: &[Vec<Complex64>],
    cfg: PowerIteration,
) -> Result<(f64, Vec<Complex64>)> {
    let mut v = start;
    project_out(&mut v, found);
    let n = norm2(&v);
    if n == 0.0 {
        return Err(invalid("power iteration start vector vanished after deflation"));
    }
    v.iter_mut().for_each(|x| *x /= n);

    // Rayleigh quotients below ε‖A‖_F² are roundoff; compare changes against that floor
    let floor = f64::EPSILON * a.entries.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut previous: Option<f64> = None;
    for _ in 0..cfg.max_iterations {
        let mut w = a.apply_adjoint(&a.apply(&v));
        // Rayleigh quotient of A*A at v equals ‖Av‖².
        let rayleigh = inner(&v, &w).re.max(0.0);
        project_out(&mut w, found);
        let wn = norm2(&w);
        if wn == 0.0 {
            return Ok((0.0, v));
        }
        if let Some(prev) = previous {
            if (rayleigh - prev).abs() <= cfg.tol * rayleigh.max(floor) {
                return Ok((rayleigh, v));
            }
        }
        previous = Some(rayleigh);
        w.iter_mut().for_each(|x| *x /= wn);
        v = w;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
    })
}

/// Largest singular value by power iteration on A*A from the normalized all-ones vector.
pub fn opnorm_l2(a: &OperatorMatrix, tol: f64) -> Result<f64> {
    opnorm_l2_with(
        a,
        PowerIteration {
            tol,
            ..PowerIteration::default()
        },
    )
}

pub fn opnorm_l2_with(a: &OperatorMatrix, cfg: PowerIteration) -> Result<f64> {
    if !(cfg.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let start = vec![Complex64::new(1.0, 0.0); a.side()];
    let (lambda, _) = dominant_pair(a, start, &[], cfg)?;
    Ok(lambda.sqrt())
}

/// Top `count` singular values by repeated deflated power iteration, nonincreasing.
///
/// The first start vector is all-ones; later ones are drawn from a fixed-seed
/// generator so that a start orthogonal to the deflated space cannot occur
/// systematically.
pub fn top_singular_values(
    a: &OperatorMatrix,
    count: usize,
    cfg: PowerIteration,
) -> Result<Vec<f64>> {
    if count > a.side() {
        return Err(invalid(format!(
            "requested {count} singular values of a {}-sided matrix",
            a.side()
        )));
    }
    let mut found: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for j in 0..count {
        let start = if j == 0 {
            vec![Complex64::new(1.0, 0.0); a.side()]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(j as u64);
            (0..a.side())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let (lambda, v) = dominant_pair(a, start, &found, cfg)?;
        values.push(lambda.sqrt());
        found.push(v);
    }
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Rows computed in parallel from `row_fn(output_index)`.
pub(crate) fn assemble<F>(window: Window, row_fn: F) -> OperatorMatrix
where
    F: Fn(usize) -> Vec<Complex64> + Sync + Send,
{
    let side = window.len();
    let rows: Vec<Vec<Complex64>> = (0..side).into_par_iter().map(row_fn).collect();
    OperatorMatrix {
        window,
        side,
        entries: rows.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(values: &[f64]) -> OperatorMatrix {
        let w = Window::interval(0, values.len() as i64 - 1).unwrap();
        let rows = (0..values.len())
            .map(|i| (0..values.len()).map(|j| if i == j { c(values[i]) } else { c(0.0) }).collect())
            .collect();
        OperatorMatrix::from_rows(w, rows).unwrap()
    }

    #[test]
    fn identity_has_unit_norm() {
        let id = OperatorMatrix::identity(Window::interval(-3, 3).unwrap());
        assert!((opnorm_l2(&id, 1e-12).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_three_one() {
        assert!((opnorm_l2(&diag(&[3.0, 1.0]), 1e-12).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_singular_values() {
        let vals: Vec<f64> = (1..=6).map(|j| 1.0 / j as f64).collect();
        let got = top_singular_values(&diag(&vals), 6, PowerIteration::default()).unwrap();
        for (g, e) in got.iter().zip(&vals) {
            assert!((g - e).abs() < 1e-6, "{got:?}");
        }
    }

    #[test]
    fn identity_singular_values_survive_deflation() {
        let id = OperatorMatrix::identity(Window::interval(0, 9).unwrap());
        let got = top_singular_values(&id, 10, PowerIteration::default()).unwrap();
        assert!(got.iter().all(|s| (s - 1.0).abs() < 1e-12), "{got:?}");
    }

    #[test]
    fn too_many_values_requested() {
        assert!(top_singular_values(&diag(&[1.0, 2.0]), 3, PowerIteration::default()).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = diag(&[1.0, 0.999]);
        let cfg = PowerIteration {
            max_iterations: 2,
            tol: 1e-300,
        };
        assert!(matches!(opnorm_l2_with(&m, cfg), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn csv_export_shape() {
        let mut buf = Vec::new();
        diag(&[1.0, 2.0]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "window_lo=0,window_hi=1");
        assert_eq!(lines[1], "row,col,re,im");
        assert_eq!(lines.len(), 2 + 4);
    }
}
