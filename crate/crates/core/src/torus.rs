//! Discrete Fourier transform ℓ¹(ℤⁿ) → functions on 𝕋ⁿ = [0,1)ⁿ sampled on a
//! uniform grid, its left-endpoint quadrature inverse, and grid Lᵠ norms.
//!
//! Phases are reduced modulo the resolution in integer arithmetic before the
//! table lookup, so e^{−2πi M ξ} is exactly 1 on every node.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::lattice::{LatticeSequence, MultiIndex, Window};

/// Largest admissible node count Mⁿ.
pub const MAX_NODES: usize = 1 << 22;

/// Nodes ξ_j = j/M, j ∈ {0,…,M−1}ⁿ, in lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TorusGrid {
    dim: usize,
    resolution: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("grid dimension must be at least 1"));
        }
        if resolution == 0 {
            return Err(invalid("grid resolution must be at least 1"));
        }
        let nodes = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(resolution));
        match nodes {
            Some(n) if n <= MAX_NODES => Ok(TorusGrid { dim, resolution }),
            _ => Err(invalid(format!(
                "grid has more than {MAX_NODES} nodes (resolution {resolution}, dim {dim})"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer node label j of the node at lexicographic position `idx`.
    pub fn node(&self, mut idx: usize) -> Vec<i64> {
        let mut j = vec![0i64; self.dim];
        for axis in (0..self.dim).rev() {
            j[axis] = (idx % self.resolution) as i64;
            idx /= self.resolution;
        }
        j
    }

    /// Coordinates ξ_j = j/M of the node at position `idx`.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let m = self.resolution as f64;
        self.node(idx).into_iter().map(|j| j as f64 / m).collect()
    }

    pub fn position(&self, node: &[i64]) -> usize {
        let m = self.resolution as i64;
        node.iter()
            .fold(0usize, |acc, &j| acc * self.resolution + j.rem_euclid(m) as usize)
    }

    /// Table of e^{2πi r/M}, r = 0..M.
    pub(crate) fn roots(&self) -> Vec<Complex64> {
        unit_roots(self.resolution)
    }

    /// (x·j) mod M for a lattice point `x` and node label `j`.
    pub(crate) fn phase_index(&self, x: &MultiIndex, node: &[i64]) -> usize {
        x.dot(node).rem_euclid(self.resolution as i128) as usize
    }

    pub(crate) fn all_nodes(&self) -> Vec<Vec<i64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

pub(crate) fn unit_roots(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|r| {
            let (s, c) = (2.0 * PI * r as f64 / m as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// Complex samples on a [`TorusGrid`], lexicographic node order.
#[derive(Clone, PartialEq, Debug)]
pub struct TorusSamples {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl TorusSamples {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "expected {} samples, found {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(TorusSamples { grid, values })
    }

    pub fn from_fn<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.coords(i)))
            .collect();
        TorusSamples { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Pointwise product with another sample set on the same grid.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(invalid("sample grids differ"));
        }
        Ok(TorusSamples {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// CSV with a `M=<resolution>,dim=<n>` line, a column header, then one row per node.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "M={},dim={}", self.grid.resolution, self.grid.dim)?;
        let mut header: Vec<String> = (1..=self.grid.dim).map(|i| format!("j{i}")).collect();
        header.push("re".into());
        header.push("im".into());
        let mut out = csv::WriterBuilder::new().from_writer(w);
        out.write_record(&header).map_err(csv_err)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.node(i).iter().map(|j| j.to_string()).collect();
            row.push(fmt_f64(v.re));
            row.push(fmt_f64(v.im));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(r);
        let mut records = rdr.records();
        let meta = records
            .next()
            .ok_or_else(|| Error::Parse("empty torus sample file".into()))?
            .map_err(csv_err)?;
        let mut resolution = None;
        let mut dim = None;
        for field in meta.iter() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata field `{field}`")))?;
            let parsed: usize = val
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad metadata value `{field}`")))?;
            match key.trim() {
                "M" => resolution = Some(parsed),
                "dim" => dim = Some(parsed),
                other => return Err(Error::Parse(format!("unknown metadata key `{other}`"))),
            }
        }
        let (resolution, dim) = match (resolution, dim) {
            (Some(m), Some(d)) => (m, d),
            _ => return Err(Error::Parse("metadata line needs M= and dim=".into())),
        };
        let grid = TorusGrid::new(dim, resolution)?;
        let mut values = vec![None; grid.len()];
        for rec in records {
            let rec = rec.map_err(csv_err)?;
            if rec.get(0).map(|s| s.trim() == "j1").unwrap_or(false) {
                continue;
            }
            if rec.len() != dim + 2 {
                return Err(Error::Parse(format!("expected {} columns, found {}", dim + 2, rec.len())));
            }
            let mut node = Vec::with_capacity(dim);
            for f in rec.iter().take(dim) {
                let j: i64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad node label `{f}`")))?;
                if j < 0 || j as usize >= resolution {
                    return Err(Error::Parse(format!("node label {j} out of range")));
                }
                node.push(j);
            }
            let re = parse_f64(&rec[dim])?;
            let im = parse_f64(&rec[dim + 1])?;
            values[grid.position(&node)] = Some(Complex64::new(re, im));
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse("missing grid nodes".into()))?;
        TorusSamples::new(grid, values)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

/// 𝓕f(ξ_j) = Σ_{n′} e^{−2πi n′·ξ_j} f(n′), summed directly over the support.
pub fn dft(f: &LatticeSequence, grid: &TorusGrid) -> Result<TorusSamples> {
    check_dim(grid.dim(), f.dim())?;
    let roots = grid.roots();
    let support: Vec<(&MultiIndex, &Complex64)> = f.iter().collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let node = grid.node(i);
            support
                .iter()
                .map(|(x, v)| *v * roots[grid.phase_index(x, &node)].conj())
                .sum()
        })
        .collect();
    Ok(TorusSamples {
        grid: *grid,
        values,
    })
}

/// Riemann-sum inverse (1/Mⁿ) Σ_j e^{2πi n′·ξ_j} F(ξ_j) on every point of `window`.
///
/// Recovery of f from `dft(f)` is exact only when no two distinct points of
/// support(f) ∪ window differ by a nonzero vector of (Mℤ)ⁿ; see [`check_alias_free`].
pub fn inverse_dft(samples: &TorusSamples, window: &Window) -> Result<LatticeSequence> {
    let grid = samples.grid();
    check_dim(grid.dim(), window.dim())?;
    let roots = grid.roots();
    let nodes = grid.all_nodes();
    let scale = 1.0 / grid.len() as f64;
    let values: Vec<Complex64> = (0..window.len())
        .into_par_iter()
        .map(|i| {
            let x = window.point_at(i);
            let s: Complex64 = nodes
                .iter()
                .zip(samples.values())
                .map(|(node, v)| roots[grid.phase_index(&x, node)] * v)
                .sum();
            s * scale
        })
        .collect();
    Ok(LatticeSequence::from_dense(window, &values))
}

/// Grid Lᵠ norm ((1/Mⁿ) Σ_j |F(ξ_j)|^q)^{1/q}.
pub fn lq_torus_norm(samples: &TorusSamples, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(invalid(format!("torus norm exponent must be >= 1, got {q}")));
    }
    let n = samples.values.len() as f64;
    let s: f64 = samples.values.iter().map(|v| v.norm().powf(q)).sum();
    Ok((s / n).powf(1.0 / q))
}

/// Fails with [`Error::Aliasing`] when two distinct points share a residue class mod M.
pub fn check_alias_free<'a, I>(points: I, grid: &TorusGrid) -> Result<()>
where
    I: IntoIterator<Item = &'a MultiIndex>,
{
    let m = grid.resolution() as i64;
    let mut seen: HashMap<Vec<i64>, &MultiIndex> = HashMap::new();
    for p in points {
        check_dim(grid.dim(), p.dim())?;
        let residue: Vec<i64> = p.coords().iter().map(|c| c.rem_euclid(m)).collect();
        match seen.get(&residue) {
            Some(q) if *q != p => {
                return Err(Error::Aliasing {
                    first: q.to_string(),
                    second: p.to_string(),
                    resolution: grid.resolution(),
                })
            }
            _ => {
                seen.insert(residue, p);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::delta;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_rejects_too_many_nodes() {
        assert!(TorusGrid::new(2, 4096).is_err());
        assert!(TorusGrid::new(2, 2048).is_ok());
        assert!(TorusGrid::new(1, 0).is_err());
    }

    #[test]
    fn dft_of_delta_at_origin_is_one() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let f = dft(&delta(MultiIndex::zeros(2)), &grid).unwrap();
        assert!(f.values().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn dft_of_unit_delta_is_a_character() {
        let grid = TorusGrid::new(1, 12).unwrap();
        let f = dft(&delta(MultiIndex::unit(1, 0)), &grid).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let xi = grid.coords(i)[0];
            let expect = Complex64::from_polar(1.0, -2.0 * PI * xi);
            assert!((v - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_of_delta_recovers_delta() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let w = Window::interval(-8, 7).unwrap();
        let back = inverse_dft(&dft(&delta(MultiIndex::zeros(1)), &grid).unwrap(), &w).unwrap();
        assert!(back.max_abs_diff(&delta(MultiIndex::zeros(1))) < 1e-15);
    }

    #[test]
    fn aliased_delta_lands_on_origin() {
        let m = 16;
        let grid = TorusGrid::new(1, m).unwrap();
        let f = delta(MultiIndex::new(&[m as i64]));
        let samples = dft(&f, &grid).unwrap();
        // every phase reduces to zero
        assert!(samples.values().iter().all(|v| *v == c(1.0, 0.0)));
        let back = inverse_dft(&samples, &Window::interval(-2, 2).unwrap()).unwrap();
        assert!((back.get(&MultiIndex::zeros(1)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(check_alias_free([&MultiIndex::zeros(1), &MultiIndex::new(&[16])], &grid).is_err());
    }

    #[test]
    fn lq_norm_of_constant() {
        let grid = TorusGrid::new(1, 5).unwrap();
        let s = TorusSamples::new(grid, vec![c(0.0, -3.0); 5]).unwrap();
        for q in [1.0, 2.0, 3.5, 8.0] {
            assert!((lq_torus_norm(&s, q).unwrap() - 3.0).abs() < 1e-14);
        }
        assert!(lq_torus_norm(&s, 0.5).is_err());
    }

    #[test]
    fn lq_norm_of_character_is_one() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let s = TorusSamples::from_fn(grid, |xi| Complex64::from_polar(1.0, 2.0 * PI * xi[0]));
        assert!((lq_torus_norm(&s, 4.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parseval_two_deltas() {
        let f = delta(MultiIndex::zeros(1)).add(&delta(MultiIndex::unit(1, 0))).unwrap();
        for m in [2, 3, 7, 64] {
            let grid = TorusGrid::new(1, m).unwrap();
            let l2 = lq_torus_norm(&dft(&f, &grid).unwrap(), 2.0).unwrap();
            assert!((l2 - 2f64.sqrt()).abs() < 1e-14, "M = {m}");
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let grid = TorusGrid::new(2, 3).unwrap();
        let s = TorusSamples::from_fn(grid, |xi| c(xi[0].exp() / 3.0, -xi[1] * 0.1));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("M=3,dim=2\nj1,j2,re,im\n"));
        let back = TorusSamples::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn csv_rejects_missing_nodes() {
        let text = "M=3,dim=1\nj1,re,im\n0,1,0\n1,1,0\n";
        assert!(TorusSamples::read_csv(text.as_bytes()).is_err());
    }
}
