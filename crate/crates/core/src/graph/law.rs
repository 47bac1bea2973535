//! Branching laws of model trees.
//!
//! A law gives the number `n(r)` of outward neighbors of every vertex on the
//! sphere of radius `r`. The root value `n(0)` is kept apart from the tail
//! because the root has no inward edge, so `m(x0) = n(0)` while
//! `m(x) = n(r) + 1` on every other sphere.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convergence class of `sum 1/n(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumClass {
    Divergent,
    Convergent,
    /// Only finitely many terms are known.
    Unknown,
}

/// Symbolic description of `n(r)` for `r >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    Constant {
        value: u64,
    },
    /// `a * r + b`
    Affine {
        #[serde(rename = "a")]
        slope: i64,
        #[serde(rename = "b")]
        intercept: i64,
    },
    /// `c[0] + c[1] r + c[2] r^2 + ...`
    Polynomial {
        coefficients: Vec<i64>,
    },
    /// `scale * base^r`
    Exponential {
        base: u64,
        #[serde(default = "one")]
        scale: u64,
    },
    /// `prefix[r - 1]` for `r <= prefix.len()`, then the tail law if one is declared.
    Explicit {
        prefix: Vec<u64>,
        #[serde(default)]
        tail: Option<Box<LawKind>>,
    },
}

fn one() -> u64 {
    1
}

impl LawKind {
    fn validate(&self) -> Result<()> {
        match self {
            LawKind::Constant { value } => {
                if *value < 1 {
                    return Err(Error::InvalidLaw("constant branching must be >= 1".into()));
                }
            }
            LawKind::Affine { slope, intercept } => {
                if *slope < 0 {
                    return Err(Error::InvalidLaw(
                        "affine branching with negative slope eventually drops below 1".into(),
                    ));
                }
                if slope + intercept < 1 {
                    return Err(Error::InvalidLaw(format!(
                        "affine branching gives n(1) = {} < 1",
                        slope + intercept
                    )));
                }
            }
            LawKind::Polynomial { coefficients } => {
                let coeffs = trimmed(coefficients);
                let Some(&lead) = coeffs.last() else {
                    return Err(Error::InvalidLaw("polynomial has no coefficients".into()));
                };
                if coeffs.len() > 1 && lead <= 0 {
                    return Err(Error::InvalidLaw(
                        "polynomial branching needs a positive leading coefficient".into(),
                    ));
                }
                // p(r) - 1 has no real root beyond the Cauchy bound, and its sign there
                // is the sign of the leading coefficient, so checking the integers up to
                // the bound covers every r >= 1.
                let bound = if coeffs.len() == 1 {
                    1
                } else {
                    let lead = lead as f64;
                    let max_ratio = coeffs[..coeffs.len() - 1]
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| {
                            let c = if i == 0 { c - 1 } else { c };
                            (c as f64).abs() / lead
                        })
                        .fold(0.0_f64, f64::max);
                    (1.0 + max_ratio).ceil() as u64 + 1
                };
                for r in 1..=bound {
                    let value = eval_poly(coeffs, r as f64);
                    if value < 1.0 {
                        return Err(Error::InvalidLaw(format!(
                            "polynomial branching gives n({r}) = {value} < 1"
                        )));
                    }
                }
            }
            LawKind::Exponential { base, scale } => {
                if *base < 1 || *scale < 1 {
                    return Err(Error::InvalidLaw(
                        "exponential branching needs base >= 1 and scale >= 1".into(),
                    ));
                }
            }
            LawKind::Explicit { prefix, tail } => {
                if let Some(pos) = prefix.iter().position(|&v| v < 1) {
                    return Err(Error::InvalidLaw(format!(
                        "explicit branching gives n({}) = 0",
                        pos + 1
                    )));
                }
                if let Some(tail) = tail {
                    tail.validate()?;
                }
            }
        }
        Ok(())
    }

    fn value(&self, r: u64) -> Result<u64> {
        let overflow = || Error::InvalidLaw(format!("n({r}) overflows a 64-bit integer"));
        match self {
            LawKind::Constant { value } => Ok(*value),
            LawKind::Affine { slope, intercept } => {
                let v = (r as i64)
                    .checked_mul(*slope)
                    .and_then(|v| v.checked_add(*intercept))
                    .ok_or_else(overflow)?;
                Ok(v as u64)
            }
            LawKind::Polynomial { coefficients } => {
                let mut acc: i128 = 0;
                for &c in trimmed(coefficients).iter().rev() {
                    acc = acc
                        .checked_mul(r as i128)
                        .and_then(|v| v.checked_add(c as i128))
                        .ok_or_else(overflow)?;
                }
                u64::try_from(acc).map_err(|_| overflow())
            }
            LawKind::Exponential { base, scale } => {
                let exp = u32::try_from(r).map_err(|_| overflow())?;
                base.checked_pow(exp)
                    .and_then(|v| v.checked_mul(*scale))
                    .ok_or_else(overflow)
            }
            LawKind::Explicit { prefix, tail } => {
                if let Some(&v) = prefix.get(r as usize - 1) {
                    Ok(v)
                } else if let Some(tail) = tail {
                    tail.value(r)
                } else {
                    Err(Error::InvalidLaw(format!(
                        "n({r}) lies beyond the explicit prefix of length {} and no tail is declared",
                        prefix.len()
                    )))
                }
            }
        }
    }

    fn value_f64(&self, r: u64) -> Result<f64> {
        match self {
            LawKind::Constant { value } => Ok(*value as f64),
            LawKind::Affine { slope, intercept } => Ok(*slope as f64 * r as f64 + *intercept as f64),
            LawKind::Polynomial { coefficients } => Ok(eval_poly(trimmed(coefficients), r as f64)),
            LawKind::Exponential { base, scale } => Ok(*scale as f64 * (*base as f64).powf(r as f64)),
            LawKind::Explicit { prefix, tail } => match prefix.get(r as usize - 1) {
                Some(&v) => Ok(v as f64),
                None => match tail {
                    Some(tail) => tail.value_f64(r),
                    None => self.value(r).map(|v| v as f64),
                },
            },
        }
    }

    pub fn sum_class(&self) -> SumClass {
        match self {
            LawKind::Constant { .. } | LawKind::Affine { .. } => SumClass::Divergent,
            LawKind::Polynomial { coefficients } => {
                if trimmed(coefficients).len() >= 3 {
                    SumClass::Convergent
                } else {
                    SumClass::Divergent
                }
            }
            LawKind::Exponential { base, .. } => {
                if *base >= 2 {
                    SumClass::Convergent
                } else {
                    SumClass::Divergent
                }
            }
            LawKind::Explicit { tail, .. } => match tail {
                Some(tail) => tail.sum_class(),
                None => SumClass::Unknown,
            },
        }
    }
}

fn trimmed(coefficients: &[i64]) -> &[i64] {
    let len = coefficients.iter().rposition(|&c| c != 0).map_or(0, |p| p + 1);
    &coefficients[..len]
}

fn eval_poly(coefficients: &[i64], r: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * r + c as f64)
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawKind::Constant { value } => write!(f, "{value}"),
            LawKind::Affine { slope, intercept } => write!(f, "{slope}*r+{intercept}"),
            LawKind::Polynomial { coefficients } => {
                let terms: Vec<String> = trimmed(coefficients)
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, c)| match i {
                        0 => format!("{c}"),
                        1 => format!("{c}*r"),
                        _ => format!("{c}*r^{i}"),
                    })
                    .collect();
                write!(f, "{}", terms.join("+"))
            }
            LawKind::Exponential { base, scale } if *scale == 1 => write!(f, "{base}^r"),
            LawKind::Exponential { base, scale } => write!(f, "{scale}*{base}^r"),
            LawKind::Explicit { prefix, tail } => {
                write!(f, "{prefix:?}")?;
                match tail {
                    Some(tail) => write!(f, " then {tail}"),
                    None => write!(f, " then ?"),
                }
            }
        }
    }
}

/// Branching function of a model tree: `n(0)` at the root and a symbolic tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingLaw {
    root_valence: u64,
    kind: LawKind,
}

impl BranchingLaw {
    pub fn new(root_valence: u64, kind: LawKind) -> Result<Self> {
        if root_valence < 1 {
            return Err(Error::InvalidLaw("n(0) must be >= 1".into()));
        }
        kind.validate()?;
        Ok(Self { root_valence, kind })
    }

    pub fn constant(root_valence: u64, value: u64) -> Result<Self> {
        Self::new(root_valence, LawKind::Constant { value })
    }

    /// The `k`-regular tree.
    pub fn regular(k: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidLaw("a regular tree without leaves needs valence >= 2".into()));
        }
        Self::constant(k, k - 1)
    }

    pub fn affine(root_valence: u64, a: i64, b: i64) -> Result<Self> {
        Self::new(root_valence, LawKind::Affine { slope: a, intercept: b })
    }

    pub fn polynomial(root_valence: u64, coefficients: Vec<i64>) -> Result<Self> {
        Self::new(root_valence, LawKind::Polynomial { coefficients })
    }

    pub fn exponential(root_valence: u64, base: u64, scale: u64) -> Result<Self> {
        Self::new(root_valence, LawKind::Exponential { base, scale })
    }

    pub fn explicit(root_valence: u64, prefix: Vec<u64>, tail: Option<LawKind>) -> Result<Self> {
        Self::new(
            root_valence,
            LawKind::Explicit {
                prefix,
                tail: tail.map(Box::new),
            },
        )
    }

    pub fn root_valence(&self) -> u64 {
        self.root_valence
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    /// `n(r)`, with `n(0)` the root valence.
    pub fn n(&self, r: u64) -> Result<u64> {
        if r == 0 {
            Ok(self.root_valence)
        } else {
            self.kind.value(r)
        }
    }

    /// `n(r)` in floating point; never overflows for the exponential family.
    pub fn n_f64(&self, r: u64) -> Result<f64> {
        if r == 0 {
            Ok(self.root_valence as f64)
        } else {
            self.kind.value_f64(r)
        }
    }

    /// Valence of the vertices on sphere `r`.
    pub fn valence(&self, r: u64) -> Result<u64> {
        if r == 0 {
            Ok(self.root_valence)
        } else {
            self.kind.value(r)?.checked_add(1).ok_or_else(|| {
                Error::InvalidLaw(format!("valence on sphere {r} overflows"))
            })
        }
    }

    pub fn sum_class(&self) -> SumClass {
        self.kind.sum_class()
    }

    /// `sum_{r=0}^{upto} 1/n(r)`.
    pub fn partial_reciprocal_sum(&self, upto: u64) -> Result<f64> {
        (0..=upto).map(|r| self.n_f64(r).map(|n| 1.0 / n)).sum()
    }

    /// Sphere volumes `Vol(S_0), ..., Vol(S_radius)` in exact integer arithmetic.
    pub fn sphere_volumes(&self, radius: u64) -> Result<Vec<u128>> {
        let mut volumes = Vec::with_capacity(radius as usize + 1);
        volumes.push(1u128);
        for r in 0..radius {
            let next = volumes[r as usize]
                .checked_mul(self.n(r)? as u128)
                .ok_or_else(|| Error::InvalidLaw(format!("Vol(S_{}) overflows", r + 1)))?;
            volumes.push(next);
        }
        Ok(volumes)
    }
}

impl fmt::Display for BranchingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n(0)={}, n(r)={}", self.root_valence, self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_branching() {
        assert!(BranchingLaw::constant(3, 0).is_err());
        assert!(BranchingLaw::constant(0, 2).is_err());
        assert!(BranchingLaw::affine(1, -1, 5).is_err());
        assert!(BranchingLaw::affine(1, 0, 0).is_err());
        assert!(BranchingLaw::explicit(1, vec![2, 0, 3], None).is_err());
    }

    #[test]
    fn polynomial_positivity_is_checked_everywhere() {
        // r^2 - 4r + 5 = (r-2)^2 + 1 >= 1
        assert!(BranchingLaw::polynomial(1, vec![5, -4, 1]).is_ok());
        // r^2 - 4r + 4 vanishes at r = 2
        assert!(BranchingLaw::polynomial(1, vec![4, -4, 1]).is_err());
        // r^2 - 10r + 30 dips to 5 at r = 5 but r^2 - 10r + 20 dips below
        assert!(BranchingLaw::polynomial(1, vec![30, -10, 1]).is_ok());
        assert!(BranchingLaw::polynomial(1, vec![20, -10, 1]).is_err());
        assert!(BranchingLaw::polynomial(1, vec![3, -1]).is_err());
    }

    #[test]
    fn values_and_classes() {
        let law = BranchingLaw::polynomial(1, vec![4, 4, 1]).unwrap();
        assert_eq!(law.n(0).unwrap(), 1);
        assert_eq!(law.n(1).unwrap(), 9);
        assert_eq!(law.n(3).unwrap(), 25);
        assert_eq!(law.sum_class(), SumClass::Convergent);

        let law = BranchingLaw::affine(1, 1, 1).unwrap();
        assert_eq!(law.n(4).unwrap(), 5);
        assert_eq!(law.sum_class(), SumClass::Divergent);

        let law = BranchingLaw::exponential(2, 2, 1).unwrap();
        assert_eq!(law.n(3).unwrap(), 8);
        assert_eq!(law.sum_class(), SumClass::Convergent);
        assert!(law.n(70).is_err());
        assert_eq!(law.n_f64(70).unwrap(), 2f64.powi(70));

        let law = BranchingLaw::explicit(2, vec![3, 4], None).unwrap();
        assert_eq!(law.n(2).unwrap(), 4);
        assert!(law.n(3).is_err());
        assert_eq!(law.sum_class(), SumClass::Unknown);

        let law =
            BranchingLaw::explicit(2, vec![3, 4], Some(LawKind::Exponential { base: 3, scale: 1 }))
                .unwrap();
        assert_eq!(law.n(3).unwrap(), 27);
        assert_eq!(law.sum_class(), SumClass::Convergent);
    }

    #[test]
    fn sphere_volume_recursion() {
        let law = BranchingLaw::constant(3, 2).unwrap();
        assert_eq!(law.sphere_volumes(3).unwrap(), vec![1, 3, 6, 12]);
        let law = BranchingLaw::exponential(2, 2, 1).unwrap();
        assert_eq!(law.sphere_volumes(3).unwrap(), vec![1, 2, 4, 16]);
    }

    #[test]
    fn serde_shape() {
        let law: LawKind = serde_json::from_str(r#"{"kind":"affine","a":1,"b":2}"#).unwrap();
        assert_eq!(law, LawKind::Affine { slope: 1, intercept: 2 });
        let law: LawKind = serde_json::from_str(r#"{"kind":"exponential","base":2}"#).unwrap();
        assert_eq!(law, LawKind::Exponential { base: 2, scale: 1 });
    }
}
