//! Discrete fractional integral operators
//!
//!   I_{k,λ+iγ} f(n′) = Σ_{m≥1} f(n′ − m^k) / m^{λ+iγ}
//!
//! on ℤ: kernels, exact application, closed-form ℓ¹ → ℓ^{p,∞} and ℓ¹ → ℓᵖ
//! norms, boundedness classification, truncated symbols and L^{2k} probes.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{check_dim, invalid, Result};
use crate::lattice::{LatticeSequence, MultiIndex, Window};
use crate::torus::{lq_torus_norm, unit_roots, TorusGrid, TorusSamples};
use crate::zeta;

/// (k, λ, γ) with k ≥ 1 and 0 < λ ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FractionalParams {
    pub k: u32,
    pub lambda: f64,
    pub gamma: f64,
}

impl FractionalParams {
    pub fn new(k: u32, lambda: f64, gamma: f64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("power exponent k must be at least 1"));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(invalid(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        if !gamma.is_finite() {
            return Err(invalid("gamma must be finite"));
        }
        Ok(FractionalParams { k, lambda, gamma })
    }

    /// m^{−λ−iγ} = m^{−λ} e^{−iγ ln m}.
    pub fn coefficient(&self, m: u64) -> Complex64 {
        let modulus = (m as f64).powf(-self.lambda);
        if self.gamma == 0.0 {
            Complex64::new(modulus, 0.0)
        } else {
            Complex64::from_polar(modulus, -self.gamma * (m as f64).ln())
        }
    }

    fn power(&self, m: u64) -> Result<i64> {
        m.checked_pow(self.k)
            .and_then(|v| i64::try_from(v).ok())
            .ok_or_else(|| invalid(format!("{m}^{} overflows a lattice coordinate", self.k)))
    }
}

/// A norm that is either finite or divergent. Serialized as
/// `{"value": x, "divergent": false}` or `{"value": null, "divergent": true}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormValue {
    Finite(f64),
    Divergent,
}

impl NormValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, NormValue::Divergent)
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            value: Option<f64>,
            divergent: bool,
        }
        Repr {
            value: self.finite(),
            divergent: self.is_divergent(),
        }
        .serialize(s)
    }
}

/// Compares λp with 1. Values within a few ulps of 1 count as equal, so that
/// λ = 1/p entered in decimal lands on the threshold.
pub fn threshold_cmp(lambda: f64, p: f64) -> Ordering {
    let s = lambda * p;
    if (s - 1.0).abs() <= 8.0 * f64::EPSILON {
        Ordering::Equal
    } else if s > 1.0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("p must lie in (1, inf), got {p}")))
    }
}

/// Kernel supported on {m^k : 1 ≤ m ≤ max_m} with value m^{−λ−iγ} at m^k.
pub fn fractional_kernel(params: &FractionalParams, max_m: u64) -> Result<LatticeSequence> {
    if max_m < 1 {
        return Err(invalid("kernel truncation must be at least 1"));
    }
    params.power(max_m)?;
    let entries = (1..=max_m).map(|m| {
        let at = params.power(m).expect("checked at max_m");
        (MultiIndex::new(&[at]), params.coefficient(m))
    });
    LatticeSequence::from_entries(1, entries)
}

/// Exact k-th root of `d` when `d` is a perfect k-th power.
fn kth_root(d: u64, k: u32) -> Option<u64> {
    if k == 1 {
        return Some(d);
    }
    let guess = (d as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r.checked_pow(k) == Some(d))
}

/// I_{k,λ+iγ} f on `out`. Every output value is a finite exact sum over the
/// support of f; nothing is truncated.
pub fn apply_fractional(
    params: &FractionalParams,
    f: &LatticeSequence,
    out: &Window,
) -> Result<LatticeSequence> {
    check_dim(1, f.dim())?;
    check_dim(1, out.dim())?;
    let support: Vec<(i64, Complex64)> = f.iter().map(|(i, v)| (i.coords()[0], *v)).collect();
    let values: Vec<Complex64> = (0..out.len())
        .into_par_iter()
        .map(|i| {
            let x = out.point_at(i).coords()[0];
            support
                .iter()
                .filter_map(|&(y, v)| {
                    let d = x.checked_sub(y)?;
                    if d < 1 {
                        return None;
                    }
                    kth_root(d as u64, params.k).map(|m| v * params.coefficient(m))
                })
                .sum()
        })
        .collect();
    Ok(LatticeSequence::from_dense(out, &values))
}

/// sup_{α>0} α·μ{|k| > α}^{1/p} of the full kernel: with t = α^{−1/λ} this is
/// sup_{m≥1} m^{1/p−λ}, equal to 1 when λ ≥ 1/p and divergent otherwise.
pub fn weak_norm_closed_form(params: &FractionalParams, p: f64) -> Result<NormValue> {
    check_p(p)?;
    Ok(match threshold_cmp(params.lambda, p) {
        Ordering::Less => NormValue::Divergent,
        _ => NormValue::Finite(1.0),
    })
}

/// ‖k‖_{ℓᵖ} = ζ(λp)^{1/p} when λp > 1, divergent otherwise.
pub fn strong_norm_closed_form(params: &FractionalParams, p: f64) -> Result<NormValue> {
    check_p(p)?;
    Ok(match threshold_cmp(params.lambda, p) {
        Ordering::Greater => NormValue::Finite(zeta::zeta(params.lambda * p)?.powf(1.0 / p)),
        _ => NormValue::Divergent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// Bounded ℓ¹ → ℓ^{p,∞}: λ ≥ 1/p.
    pub weak_1p: bool,
    /// Bounded ℓ¹ → ℓᵖ: λ > 1/p.
    pub strong_1p: bool,
}

pub fn classify_weak_and_strong(params: &FractionalParams, p: f64) -> Result<Classification> {
    check_p(p)?;
    let t = threshold_cmp(params.lambda, p);
    Ok(Classification {
        weak_1p: t != Ordering::Less,
        strong_1p: t == Ordering::Greater,
    })
}

fn leq_with_band(a: f64, b: f64) -> bool {
    a <= b + 8.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
}

/// Predicted ℓ^q → ℓᵖ boundedness of I_{k,λ}:
/// 1/p ≤ 1/q − (1−λ)/k, 1/p < λ and 1/q > 1 − λ.
pub fn classify_conjecture1(p: f64, q: f64, lambda: f64, k: u32) -> Result<bool> {
    if !(q >= 1.0 && q < p && p.is_finite()) {
        return Err(invalid(format!("need 1 <= q < p < inf, got q = {q}, p = {p}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if k == 0 {
        return Err(invalid("power exponent k must be at least 1"));
    }
    let gap = leq_with_band(1.0 / p, 1.0 / q - (1.0 - lambda) / k as f64);
    let below_lambda = threshold_cmp(lambda, p) == Ordering::Greater;
    let above = threshold_cmp(1.0 - lambda, q) == Ordering::Less;
    Ok(gap && below_lambda && above)
}

/// Truncated symbol samples plus the Parseval tail bound, when available.
#[derive(Clone, Debug)]
pub struct SymbolPartialSum {
    pub samples: TorusSamples,
    /// Upper bound for (Σ_{m>M} m^{−2λ})^{1/2}; `None` when λ ≤ 1/2.
    pub l2_tail_bound: Option<f64>,
}

/// m_{k,λ+iγ}(ξ_j) truncated to Σ_{m≤M} e^{−2πi m^k ξ_j} m^{−λ−iγ}.
pub fn symbol_partial_sum(
    params: &FractionalParams,
    terms: u64,
    grid: &TorusGrid,
) -> Result<SymbolPartialSum> {
    check_dim(1, grid.dim())?;
    if terms < 1 {
        return Err(invalid("symbol truncation must be at least 1"));
    }
    let res = grid.resolution() as u128;
    let roots = unit_roots(grid.resolution());
    // m^k mod R in exact integer arithmetic
    let terms_table: Vec<(u128, Complex64)> = (1..=terms)
        .map(|m| {
            let mut r: u128 = 1;
            for _ in 0..params.k {
                r = r * (m as u128 % res) % res;
            }
            (r, params.coefficient(m))
        })
        .collect();
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            terms_table
                .iter()
                .map(|&(r, c)| c * roots[((r * j as u128) % res) as usize].conj())
                .sum()
        })
        .collect();
    let l2_tail_bound = if params.lambda > 0.5 {
        Some(zeta::tail_upper_bound(2.0 * params.lambda, terms)?.sqrt())
    } else {
        None
    };
    Ok(SymbolPartialSum {
        samples: TorusSamples::new(*grid, values)?,
        l2_tail_bound,
    })
}

/// Grid L^{2k} norm of the truncated symbol m_{k,λ}. No convergence in M is implied.
pub fn kstar_norm_probe(k: u32, lambda: f64, terms: u64, grid: &TorusGrid) -> Result<f64> {
    let samples = kstar_samples(k, lambda, terms, grid)?;
    lq_torus_norm(&samples, 2.0 * k as f64)
}

/// Grid L² norm of the truncated symbol next to the Parseval value (Σ_{m≤M} m^{−2λ})^{1/2}.
pub fn kstar_parseval_pair(k: u32, lambda: f64, terms: u64, grid: &TorusGrid) -> Result<(f64, f64)> {
    let samples = kstar_samples(k, lambda, terms, grid)?;
    let grid_l2 = lq_torus_norm(&samples, 2.0)?;
    let parseval = zeta::partial_sum(2.0 * lambda, terms).sqrt();
    Ok((grid_l2, parseval))
}

fn kstar_samples(k: u32, lambda: f64, terms: u64, grid: &TorusGrid) -> Result<TorusSamples> {
    if !(lambda > 0.5 && lambda < 1.0) {
        return Err(invalid(format!("probe needs lambda in (1/2, 1), got {lambda}")));
    }
    let params = FractionalParams::new(k, lambda, 0.0)?;
    let top = params.power(terms)? as u128;
    if (grid.resolution() as u128) < 2 * top {
        return Err(invalid(format!(
            "resolution {} cannot resolve frequency {top}; need at least {}",
            grid.resolution(),
            2 * top
        )));
    }
    Ok(symbol_partial_sum(&params, terms, grid)?.samples)
}
