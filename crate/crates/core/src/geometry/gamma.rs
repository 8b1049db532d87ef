//! Height functions `γ: R^{N-1} → R` for subgraph sets.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GammaTerm {
    Const { value: f64 },
    /// `coef · x'_axis`
    Linear {
        coef: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `amp · sin(freq · x'_axis + phase)`
    Sin {
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `coef · |x'|^exponent`
    AbsPow { coef: f64, exponent: f64 },
}

/// Sum of terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gamma {
    pub terms: Vec<GammaTerm>,
}

impl Gamma {
    pub fn new(terms: Vec<GammaTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, xp: &[f64]) -> f64 {
        let r2: f64 = xp.iter().map(|v| v * v).sum();
        self.terms
            .iter()
            .map(|t| match *t {
                GammaTerm::Const { value } => value,
                GammaTerm::Linear { coef, axis } => coef * xp.get(axis).copied().unwrap_or(0.0),
                GammaTerm::Sin { amp, freq, phase, axis } => {
                    amp * (freq * xp.get(axis).copied().unwrap_or(0.0) + phase).sin()
                }
                GammaTerm::AbsPow { coef, exponent } => {
                    if r2 == 0.0 {
                        if exponent > 0.0 {
                            0.0
                        } else {
                            coef
                        }
                    } else {
                        coef * r2.powf(0.5 * exponent)
                    }
                }
            })
            .sum()
    }

    pub fn validate(&self, horizontal_dim: usize) -> Result<(), String> {
        for t in &self.terms {
            match *t {
                GammaTerm::Const { value } if !value.is_finite() => return Err("non-finite constant".into()),
                GammaTerm::Linear { axis, coef } | GammaTerm::Sin { axis, amp: coef, .. } => {
                    if horizontal_dim > 0 && axis >= horizontal_dim {
                        return Err(format!("term axis {axis} out of range for {horizontal_dim} horizontal coordinates"));
                    }
                    if !coef.is_finite() {
                        return Err("non-finite coefficient".into());
                    }
                }
                GammaTerm::AbsPow { exponent, coef } => {
                    if !(exponent >= 0.0) || !coef.is_finite() {
                        return Err(format!("abs-pow needs exponent >= 0, got {exponent}"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Whether every term is bounded or grows sublinearly, which is sufficient
    /// for a vanishing global mean.
    pub fn is_sublinear(&self) -> bool {
        self.terms.iter().all(|t| match *t {
            GammaTerm::Linear { coef, .. } => coef == 0.0,
            GammaTerm::AbsPow { exponent, coef } => exponent < 1.0 || coef == 0.0,
            _ => true,
        })
    }
}
