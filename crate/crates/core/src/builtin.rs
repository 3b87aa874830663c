//! Named pseudo-differential symbols m(n′, ξ) used by the CLI and the checks.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error};
use crate::lattice::MultiIndex;
use crate::symbol::PdoSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinKind {
    /// 1
    Identity,
    /// 1/2
    Half,
    /// (1 + |n′|)^{−1}
    Decay,
    /// e^{2πiξ₁} on n′ = 0, zero elsewhere
    FiniteRank,
    /// e^{2πi sin(2πξ₁)} (1 + |n′|)^{−1}
    CvSmooth,
    /// e^{−i(1 + |n′|)^{1/2} sin(2πξ₁)}
    CvHalf,
    /// n′₁
    Linear,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 7] = [
        BuiltinKind::Identity,
        BuiltinKind::Half,
        BuiltinKind::Decay,
        BuiltinKind::FiniteRank,
        BuiltinKind::CvSmooth,
        BuiltinKind::CvHalf,
        BuiltinKind::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinKind::Identity => "identity",
            BuiltinKind::Half => "half",
            BuiltinKind::Decay => "decay",
            BuiltinKind::FiniteRank => "finite-rank",
            BuiltinKind::CvSmooth => "cv-smooth",
            BuiltinKind::CvHalf => "cv-half",
            BuiltinKind::Linear => "linear",
        }
    }
}

impl FromStr for BuiltinKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        BuiltinKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = BuiltinKind::ALL.iter().map(|k| k.name()).collect();
                invalid(format!("unknown symbol {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Builtin {
    pub kind: BuiltinKind,
    pub dim: usize,
}

impl Builtin {
    pub fn new(kind: BuiltinKind, dim: usize) -> Self {
        Builtin { kind, dim }
    }
}

impl PdoSymbol for Builtin {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, point: &MultiIndex, xi: &[f64]) -> Complex64 {
        let r = point.euclidean_norm();
        match self.kind {
            BuiltinKind::Identity => Complex64::new(1.0, 0.0),
            BuiltinKind::Half => Complex64::new(0.5, 0.0),
            BuiltinKind::Decay => Complex64::new(1.0 / (1.0 + r), 0.0),
            BuiltinKind::FiniteRank => {
                if point.coords().iter().all(|&c| c == 0) {
                    Complex64::from_polar(1.0, 2.0 * PI * xi[0])
                } else {
                    Complex64::default()
                }
            }
            BuiltinKind::CvSmooth => {
                Complex64::from_polar(1.0 / (1.0 + r), 2.0 * PI * (2.0 * PI * xi[0]).sin())
            }
            BuiltinKind::CvHalf => {
                Complex64::from_polar(1.0, -(1.0 + r).sqrt() * (2.0 * PI * xi[0]).sin())
            }
            BuiltinKind::Linear => Complex64::new(point.coords()[0] as f64, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in BuiltinKind::ALL {
            assert_eq!(k.name().parse::<BuiltinKind>().unwrap(), k);
        }
        assert!("nope".parse::<BuiltinKind>().is_err());
    }

    #[test]
    fn decay_values_are_exact() {
        let s = Builtin::new(BuiltinKind::Decay, 1);
        for r in 0..=64i64 {
            assert_eq!(s.eval(&MultiIndex::new(&[-r]), &[0.3]).norm(), 1.0 / (1.0 + r as f64));
        }
    }
}
