//! Finitely supported complex sequences on ℤⁿ.
//!
//! Supports are kept in a `BTreeMap`, so every traversal runs in
//! lexicographic index order and every reduction is reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{check_dim, invalid, Result};

/// A point of ℤⁿ. Also used for difference and derivative orders.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(SmallVec<[i64; 4]>);

impl MultiIndex {
    pub fn new(coords: &[i64]) -> Self {
        MultiIndex(SmallVec::from_slice(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    /// The unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Sum of absolute coordinates; for an order multi-index this is |α|.
    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn max_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, other: &[i64]) -> i128 {
        self.0
            .iter()
            .zip(other)
            .map(|(&a, &b)| a as i128 * b as i128)
            .sum()
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(SmallVec::from_vec(v))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;
    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
}

/// Inclusive box ∏[loᵢ, hiᵢ] of ℤⁿ.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Window {
    lo: MultiIndex,
    hi: MultiIndex,
}

impl Window {
    pub fn new(lo: MultiIndex, hi: MultiIndex) -> Result<Self> {
        check_dim(lo.dim(), hi.dim())?;
        if lo.dim() == 0 {
            return Err(invalid("window dimension must be at least 1"));
        }
        if lo.0.iter().zip(&hi.0).any(|(l, h)| l > h) {
            return Err(invalid(format!("window bounds out of order: {lo} > {hi}")));
        }
        let mut card: usize = 1;
        for (l, h) in lo.0.iter().zip(&hi.0) {
            let side = usize::try_from(h - l + 1).map_err(|_| invalid("window side overflow"))?;
            card = card
                .checked_mul(side)
                .ok_or_else(|| invalid("window cardinality overflows usize"))?;
        }
        Ok(Window { lo, hi })
    }

    /// The cube [−r, r]ⁿ.
    pub fn cube(dim: usize, radius: i64) -> Result<Self> {
        Self::new(
            MultiIndex(SmallVec::from_elem(-radius, dim)),
            MultiIndex(SmallVec::from_elem(radius, dim)),
        )
    }

    /// One-dimensional interval [lo, hi].
    pub fn interval(lo: i64, hi: i64) -> Result<Self> {
        Self::new(MultiIndex::new(&[lo]), MultiIndex::new(&[hi]))
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &MultiIndex {
        &self.lo
    }

    pub fn hi(&self) -> &MultiIndex {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> usize {
        (self.hi.0[axis] - self.lo.0[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &MultiIndex) -> bool {
        p.dim() == self.dim()
            && p.0
                .iter()
                .zip(self.lo.0.iter().zip(&self.hi.0))
                .all(|(c, (l, h))| l <= c && c <= h)
    }

    /// Position of `p` in lexicographic window order.
    pub fn index_of(&self, p: &MultiIndex) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = 0usize;
        for axis in 0..self.dim() {
            idx = idx * self.side(axis) + (p.0[axis] - self.lo.0[axis]) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> MultiIndex {
        let mut coords: SmallVec<[i64; 4]> = SmallVec::from_elem(0, self.dim());
        for axis in (0..self.dim()).rev() {
            let side = self.side(axis);
            coords[axis] = self.lo.0[axis] + (idx % side) as i64;
            idx /= side;
        }
        MultiIndex(coords)
    }

    /// Points in lexicographic order (last axis fastest).
    pub fn points(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }
}

/// Finitely supported complex function on ℤⁿ with exact-zero pruning.
#[derive(Clone, PartialEq, Debug)]
pub struct LatticeSequence {
    dim: usize,
    entries: BTreeMap<MultiIndex, Complex64>,
}

impl LatticeSequence {
    pub fn zero(dim: usize) -> Self {
        LatticeSequence {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a sequence from `(index, value)` pairs; later duplicates overwrite earlier ones.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        if dim == 0 {
            return Err(invalid("sequence dimension must be at least 1"));
        }
        let mut seq = Self::zero(dim);
        for (idx, v) in entries {
            seq.insert(idx, v)?;
        }
        Ok(seq)
    }

    /// One-dimensional sequence with `values[i]` stored at `offset + i`.
    pub fn from_slice_1d(offset: i64, values: &[Complex64]) -> Self {
        let mut seq = Self::zero(1);
        for (i, &v) in values.iter().enumerate() {
            seq.set_unchecked(MultiIndex::new(&[offset + i as i64]), v);
        }
        seq
    }

    pub fn insert(&mut self, idx: MultiIndex, value: Complex64) -> Result<()> {
        check_dim(self.dim, idx.dim())?;
        self.set_unchecked(idx, value);
        Ok(())
    }

    pub(crate) fn set_unchecked(&mut self, idx: MultiIndex, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, value);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &MultiIndex) -> Complex64 {
        self.entries.get(idx).copied().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.entries.iter()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.entries.values().map(|v| v.norm()).collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.entries {
            out.set_unchecked(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let sum = out.get(k) + v;
            out.set_unchecked(k.clone(), sum);
        }
        Ok(out)
    }

    pub fn restrict(&self, window: &Window) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.entries {
            if window.contains(k) {
                out.entries.insert(k.clone(), *v);
            }
        }
        out
    }

    /// Largest entrywise deviation over the union of both supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, v) in &self.entries {
            worst = worst.max((v - other.get(k)).norm());
        }
        for (k, v) in &other.entries {
            if !self.entries.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// Dense values on `window` in lexicographic order.
    pub fn to_dense(&self, window: &Window) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); window.len()];
        for (k, v) in &self.entries {
            if let Some(i) = window.index_of(k) {
                out[i] = *v;
            }
        }
        out
    }

    pub fn from_dense(window: &Window, values: &[Complex64]) -> Self {
        let mut out = Self::zero(window.dim());
        for (i, &v) in values.iter().enumerate() {
            out.set_unchecked(window.point_at(i), v);
        }
        out
    }
}

/// Unit mass at `point`.
pub fn delta(point: MultiIndex) -> LatticeSequence {
    let mut seq = LatticeSequence::zero(point.dim());
    seq.set_unchecked(point, Complex64::new(1.0, 0.0));
    seq
}

/// (τ_a f)(x) = f(x − a).
pub fn translate(f: &LatticeSequence, shift: &MultiIndex) -> Result<LatticeSequence> {
    check_dim(f.dim, shift.dim())?;
    Ok(LatticeSequence {
        dim: f.dim,
        entries: f.entries.iter().map(|(k, v)| (k + shift, *v)).collect(),
    })
}

/// Direct convolution (f∗g)(x) = Σ_y f(x−y) g(y).
pub fn convolve(f: &LatticeSequence, g: &LatticeSequence) -> Result<LatticeSequence> {
    check_dim(f.dim, g.dim)?;
    let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for (x, a) in &f.entries {
        for (y, b) in &g.entries {
            *acc.entry(x + y).or_default() += a * b;
        }
    }
    let mut out = LatticeSequence::zero(f.dim);
    for (k, v) in acc {
        out.set_unchecked(k, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_has_single_point() {
        let d = delta(MultiIndex::new(&[2, -1]));
        assert_eq!(d.dim(), 2);
        let support: Vec<_> = d.support().cloned().collect();
        assert_eq!(support, vec![MultiIndex::new(&[2, -1])]);
        assert_eq!(d.get(&MultiIndex::new(&[2, -1])), c(1.0, 0.0));
    }

    #[test]
    fn zero_values_are_pruned() {
        let mut f = LatticeSequence::zero(1);
        f.insert(MultiIndex::new(&[3]), c(1.0, 0.0)).unwrap();
        f.insert(MultiIndex::new(&[3]), c(0.0, 0.0)).unwrap();
        assert!(f.is_empty());
        // tiny values stay
        f.insert(MultiIndex::new(&[1]), c(1e-300, 0.0)).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn insert_rejects_wrong_dimension() {
        let mut f = LatticeSequence::zero(2);
        assert!(f.insert(MultiIndex::new(&[1]), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn translate_delta_by_unit() {
        let e1 = MultiIndex::unit(1, 0);
        let t = translate(&delta(MultiIndex::zeros(1)), &e1).unwrap();
        assert_eq!(t, delta(e1));
    }

    #[test]
    fn translate_dimension_mismatch() {
        assert!(translate(&delta(MultiIndex::zeros(2)), &MultiIndex::new(&[1])).is_err());
    }

    #[test]
    fn delta_algebra() {
        let a = MultiIndex::new(&[1, 4]);
        let b = MultiIndex::new(&[-3, 2]);
        let conv = convolve(&delta(a.clone()), &delta(b.clone())).unwrap();
        assert_eq!(conv, delta(&a + &b));
    }

    #[test]
    fn convolve_matches_double_loop() {
        let f = LatticeSequence::from_slice_1d(0, &[c(1.0, 2.0), c(-0.5, 0.25), c(3.0, 0.0), c(0.0, -1.0)]);
        let g = LatticeSequence::from_slice_1d(0, &[c(0.3, 0.0), c(2.0, -1.0), c(-1.0, 1.5), c(0.75, 0.5)]);
        let conv = convolve(&f, &g).unwrap();
        let fv = f.to_dense(&Window::interval(0, 3).unwrap());
        let gv = g.to_dense(&Window::interval(0, 3).unwrap());
        for x in 0..7i64 {
            let mut expect = c(0.0, 0.0);
            for y in 0..4i64 {
                let i = x - y;
                if (0..4).contains(&i) {
                    expect += fv[i as usize] * gv[y as usize];
                }
            }
            assert_eq!(conv.get(&MultiIndex::new(&[x])), expect, "x = {x}");
        }
    }

    #[test]
    fn cancellation_prunes_support() {
        let f = LatticeSequence::from_slice_1d(0, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let g = LatticeSequence::from_slice_1d(0, &[c(1.0, 0.0), c(-1.0, 0.0)]);
        let conv = convolve(&f, &g).unwrap();
        // (1 + z)(1 − z) = 1 − z²
        assert_eq!(conv.len(), 2);
        assert_eq!(conv.get(&MultiIndex::new(&[1])), c(0.0, 0.0));
    }

    #[test]
    fn window_points_are_lexicographic() {
        let w = Window::new(MultiIndex::new(&[-1, 0]), MultiIndex::new(&[0, 2])).unwrap();
        let pts: Vec<_> = w.points().collect();
        assert_eq!(pts.len(), 6);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(w.index_of(p), Some(i));
        }
        assert_eq!(w.index_of(&MultiIndex::new(&[1, 0])), None);
    }

    #[test]
    fn window_rejects_inverted_bounds() {
        assert!(Window::interval(3, 2).is_err());
        assert!(Window::new(MultiIndex::new(&[0]), MultiIndex::new(&[1, 1])).is_err());
    }
}
