//! KPP nonlinearities, their validation and the minimal front speed.
//!
//! A [`ReactionFn`] wraps a formula `f` on `[0, 1]` and always evaluates the
//! zero extension: `f(s) = 0` for `s < 0` and `s > 1`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReactionError {
    #[error("invalid reaction function: {0}")]
    InvalidFunction(String),
    #[error("unknown reaction `{0}` (expected logistic, logistic-m or scaled-logistic)")]
    Unknown(String),
    #[error("reaction `{name}` needs parameter `{param}`")]
    MissingParameter { name: String, param: &'static str },
}

/// Serializable selector for the built-in reactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ReactionSpec {
    /// `s (1 - s)`
    Logistic,
    /// `s (1 - s)^m`, `m >= 1`
    LogisticM { m: f64 },
    /// `r s (1 - s)`
    ScaledLogistic { r: f64 },
}

impl ReactionSpec {
    /// Parses a CLI-style name with an optional numeric parameter.
    pub fn parse(name: &str, param: Option<f64>) -> Result<Self, ReactionError> {
        match name {
            "logistic" => Ok(Self::Logistic),
            "logistic-m" => param.map(|m| Self::LogisticM { m }).ok_or_else(|| {
                ReactionError::MissingParameter { name: name.to_string(), param: "m" }
            }),
            "scaled-logistic" => param.map(|r| Self::ScaledLogistic { r }).ok_or_else(|| {
                ReactionError::MissingParameter { name: name.to_string(), param: "r" }
            }),
            other => Err(ReactionError::Unknown(other.to_string())),
        }
    }

    pub fn build<T: Real>(&self) -> Result<ReactionFn<T>, ReactionError> {
        match *self {
            Self::Logistic => Ok(ReactionFn::logistic()),
            Self::LogisticM { m } => ReactionFn::logistic_power(m),
            Self::ScaledLogistic { r } => ReactionFn::scaled_logistic(r),
        }
    }
}

impl Default for ReactionSpec {
    fn default() -> Self {
        Self::Logistic
    }
}

type Formula<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Kind<T> {
    Logistic,
    Power { m: T, int: Option<i32> },
    Scaled { r: T },
    Custom(Formula<T>),
}

/// KPP nonlinearity with explicit `f'(0)`.
#[derive(Clone)]
pub struct ReactionFn<T: Real> {
    name: String,
    kind: Kind<T>,
    deriv_at_0: T,
}

impl<T: Real> fmt::Debug for ReactionFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionFn")
            .field("name", &self.name)
            .field("deriv_at_0", &self.deriv_at_0)
            .finish()
    }
}

impl<T: Real> ReactionFn<T> {
    pub fn logistic() -> Self {
        Self { name: "logistic".into(), kind: Kind::Logistic, deriv_at_0: T::one() }
    }

    pub fn logistic_power(m: f64) -> Result<Self, ReactionError> {
        if !(m >= 1.0) || !m.is_finite() {
            return Err(ReactionError::InvalidFunction(format!("logistic-m needs m >= 1, got {m}")));
        }
        let int = (m.fract() == 0.0 && m <= i32::MAX as f64).then_some(m as i32);
        Ok(Self {
            name: format!("logistic-m({m})"),
            kind: Kind::Power { m: T::lit(m), int },
            deriv_at_0: T::one(),
        })
    }

    pub fn scaled_logistic(r: f64) -> Result<Self, ReactionError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(ReactionError::InvalidFunction(format!("scaled-logistic needs r > 0, got {r}")));
        }
        Ok(Self { name: format!("scaled-logistic({r})"), kind: Kind::Scaled { r: T::lit(r) }, deriv_at_0: T::lit(r) })
    }

    /// Arbitrary formula on `[0, 1]`; `deriv_at_0` must be supplied by the caller.
    pub fn custom(
        name: impl Into<String>,
        deriv_at_0: T,
        formula: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), kind: Kind::Custom(Arc::new(formula)), deriv_at_0 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn deriv_at_0(&self) -> T {
        self.deriv_at_0
    }

    /// The formula without the zero extension.
    #[inline]
    pub fn raw(&self, s: T) -> T {
        let one = T::one();
        match &self.kind {
            Kind::Logistic => s * (one - s),
            Kind::Power { m, int } => match int {
                Some(k) => s * (one - s).powi(*k),
                None => s * (one - s).powf(*m),
            },
            Kind::Scaled { r } => *r * s * (one - s),
            Kind::Custom(f) => f(s),
        }
    }

    /// `f(s)` with the zero extension outside `[0, 1]`.
    #[inline]
    pub fn eval(&self, s: T) -> T {
        if s <= T::zero() || s >= T::one() {
            T::zero()
        } else {
            self.raw(s)
        }
    }

    /// `out[j] = u[j] + dt·(out[j] + f(u[j]))`: one explicit Euler update of
    /// a row whose Laplacian is already in `out`. The kind dispatch is hoisted
    /// out of the loop so the built-in kinds vectorize.
    pub(crate) fn euler_row(&self, u: &[T], out: &mut [T], dt: T) {
        let one = T::one();
        let zero = T::zero();
        // Built-in formulas vanish at 0 and 1, so clamping gives the zero extension.
        let clamp = |s: T| s.max(zero).min(one);
        match &self.kind {
            Kind::Logistic => {
                for (o, &s) in out.iter_mut().zip(u) {
                    let c = clamp(s);
                    *o = s + dt * (*o + c * (one - c));
                }
            }
            Kind::Scaled { r } => {
                for (o, &s) in out.iter_mut().zip(u) {
                    let c = clamp(s);
                    *o = s + dt * (*o + *r * c * (one - c));
                }
            }
            _ => {
                for (o, &s) in out.iter_mut().zip(u) {
                    *o = s + dt * (*o + self.eval(s));
                }
            }
        }
    }

    /// `f'(1)`; analytic for the built-in kinds, centered difference otherwise.
    pub fn deriv_at_1(&self) -> T {
        match &self.kind {
            Kind::Logistic => -T::one(),
            Kind::Power { m, .. } => {
                if *m == T::one() {
                    -T::one()
                } else {
                    T::zero()
                }
            }
            Kind::Scaled { r } => -*r,
            Kind::Custom(_) => {
                let h = T::lit(1e-6);
                (self.raw(T::one() + h) - self.raw(T::one() - h)) / (h + h)
            }
        }
    }

    /// Sampled `sup |f'|` over `[0, 1]`.
    pub fn max_slope(&self) -> T {
        let n = 2048;
        let h = T::lit(1e-6);
        let mut best = self.deriv_at_0.abs().max(self.deriv_at_1().abs());
        for i in 1..n {
            let s = T::lit(i as f64 / n as f64);
            let d = (self.raw(s + h) - self.raw(s - h)) / (h + h);
            best = best.max(d.abs());
        }
        best
    }

    /// `c* = 2 sqrt(f'(0))`.
    pub fn minimal_speed(&self) -> Result<T, ReactionError> {
        if self.deriv_at_0 > T::zero() && self.deriv_at_0.is_finite() {
            Ok(T::lit(2.0) * self.deriv_at_0.sqrt())
        } else {
            Err(ReactionError::InvalidFunction(format!(
                "f'(0) must be positive, got {}",
                self.deriv_at_0
            )))
        }
    }

    /// Checks the KPP conditions on a uniform grid `s_i = i / samples` of `(0, 1]`.
    pub fn validate_kpp(&self, samples: usize) -> Result<KppReport, ReactionError> {
        if samples < 16 {
            return Err(ReactionError::InvalidFunction(format!("need at least 16 samples, got {samples}")));
        }
        let tol = T::slack(1e-12);
        let finite = |v: T, at: f64| -> Result<f64, ReactionError> {
            let v = v.as_f64();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ReactionError::InvalidFunction(format!("non-finite value {v} at s = {at}")))
            }
        };

        let f0 = finite(self.raw(T::zero()), 0.0)?;
        let f1 = finite(self.raw(T::one()), 1.0)?;
        let d0 = self.deriv_at_0.as_f64();
        let mut report = KppReport {
            samples,
            endpoints_vanish: f0.abs() <= tol && f1.abs() <= tol,
            positive_inside: true,
            ratio_nonincreasing: true,
            below_linearization: true,
            zero_extension: self.eval(T::lit(-0.5)) == T::zero() && self.eval(T::lit(1.5)) == T::zero(),
            derivative_positive: d0 > 0.0 && d0.is_finite(),
            derivative_consistent: false,
            first_ratio_violation: None,
        };

        let h = 1e-6;
        let fd = finite(self.raw(T::lit(h)), h)? - finite(self.raw(T::lit(-h)), -h)?;
        report.derivative_consistent = (fd / (2.0 * h) - d0).abs() <= 1e-4;

        let mut prev_ratio = f64::INFINITY;
        for i in 1..=samples {
            let s = i as f64 / samples as f64;
            let v = finite(self.raw(T::lit(s)), s)?;
            if i < samples && v <= 0.0 {
                report.positive_inside = false;
            }
            if v > d0 * s + tol {
                report.below_linearization = false;
            }
            let ratio = v / s;
            if ratio > prev_ratio + tol {
                report.ratio_nonincreasing = false;
                report.first_ratio_violation.get_or_insert(s);
            }
            prev_ratio = ratio;
        }
        Ok(report)
    }

    /// Draws `trials` pairs uniformly in `[0, 2]^2` and checks `f(a+b) <= f(a) + f(b)`.
    pub fn subadditivity_check(&self, trials: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = T::lit(T::slack(1e-12));
        (0..trials).all(|_| {
            let a = T::lit(rng.gen_range(0.0..=2.0));
            let b = T::lit(rng.gen_range(0.0..=2.0));
            self.eval(a + b) <= self.eval(a) + self.eval(b) + tol
        })
    }
}

/// Outcome of [`ReactionFn::validate_kpp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KppReport {
    pub samples: usize,
    pub endpoints_vanish: bool,
    pub positive_inside: bool,
    pub ratio_nonincreasing: bool,
    pub below_linearization: bool,
    pub zero_extension: bool,
    pub derivative_positive: bool,
    /// `f'(0)` agrees with a centered difference (step `1e-6`) within `1e-4`.
    pub derivative_consistent: bool,
    pub first_ratio_violation: Option<f64>,
}

impl KppReport {
    pub fn passed(&self) -> bool {
        self.endpoints_vanish
            && self.positive_inside
            && self.ratio_nonincreasing
            && self.below_linearization
            && self.zero_extension
            && self.derivative_positive
            && self.derivative_consistent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic() -> ReactionFn<f64> {
        ReactionFn::logistic()
    }

    #[test]
    fn logistic_passes_all_conditions() {
        let r = logistic().validate_kpp(64).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn squared_tail_passes() {
        let f = ReactionFn::<f64>::logistic_power(2.0).unwrap();
        assert!(f.validate_kpp(64).unwrap().passed());
    }

    #[test]
    fn degenerate_at_zero_fails_ratio_test() {
        let f = ReactionFn::custom("s^2(1-s)", 0.0, |s: f64| s * s * (1.0 - s));
        let r = f.validate_kpp(64).unwrap();
        assert!(!r.ratio_nonincreasing);
        assert!(!r.passed());
        assert!(r.first_ratio_violation.unwrap() < 0.1);
    }

    #[test]
    fn cubic_with_unit_slope_passes() {
        let f = ReactionFn::custom("s(1-s)(1+s)", 1.0, |s: f64| s * (1.0 - s) * (1.0 + s));
        assert!(f.validate_kpp(64).unwrap().passed());
        assert_eq!(f.minimal_speed().unwrap(), 2.0);
    }

    #[test]
    fn wrong_supplied_derivative_is_caught() {
        let f = ReactionFn::custom("mislabelled", 2.0, |s: f64| s * (1.0 - s));
        let r = f.validate_kpp(64).unwrap();
        assert!(!r.derivative_consistent);
    }

    #[test]
    fn non_finite_is_an_error() {
        let f = ReactionFn::custom("bad", 1.0, |s: f64| if s > 0.5 { f64::NAN } else { s });
        assert!(matches!(f.validate_kpp(64), Err(ReactionError::InvalidFunction(_))));
        assert!(f.validate_kpp(8).is_err());
    }

    #[test]
    fn minimal_speeds() {
        assert_eq!(logistic().minimal_speed().unwrap(), 2.0);
        let r4 = ReactionFn::<f64>::scaled_logistic(4.0).unwrap();
        assert_eq!(r4.minimal_speed().unwrap(), 4.0);
        let bad = ReactionFn::custom("flat", 0.0, |s: f64| s * s);
        assert!(bad.minimal_speed().is_err());
    }

    #[test]
    fn zero_extension_and_subadditivity() {
        let f = logistic();
        assert_eq!(f.eval(-0.3), 0.0);
        assert_eq!(f.eval(1.6), 0.0);
        assert!(f.eval(1.6) <= 2.0 * f.eval(0.8));
        assert!((2.0 * f.eval(0.8) - 0.32).abs() < 1e-15);
        for b in [0.0, 0.3, 0.9, 1.7] {
            assert!(f.eval(0.0 + b) <= f.eval(0.0) + f.eval(b));
        }
        assert!(f.subadditivity_check(10_000, 7));
    }

    #[test]
    fn subadditivity_fails_without_kpp() {
        let f = ReactionFn::custom("s^2(1-s)", 0.0, |s: f64| s * s * (1.0 - s));
        assert!(!f.subadditivity_check(10_000, 7));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(ReactionSpec::parse("logistic", None).unwrap(), ReactionSpec::Logistic);
        assert!(ReactionSpec::parse("logistic-m", None).is_err());
        assert!(ReactionSpec::parse("bistable", None).is_err());
        let spec: ReactionSpec = serde_json::from_str(r#"{"name":"scaled-logistic","r":4}"#).unwrap();
        let f: ReactionFn<f64> = spec.build().unwrap();
        assert_eq!(f.minimal_speed().unwrap(), 4.0);
    }

    #[test]
    fn slopes() {
        let f = logistic();
        assert_eq!(f.deriv_at_1(), -1.0);
        assert!((f.max_slope() - 1.0).abs() < 1e-6);
        let g = ReactionFn::<f64>::logistic_power(3.0).unwrap();
        assert_eq!(g.deriv_at_1(), 0.0);
    }

    #[test]
    fn single_precision_works() {
        let f = ReactionFn::<f32>::logistic();
        assert!(f.validate_kpp(64).unwrap().passed());
        assert_eq!(f.minimal_speed().unwrap(), 2.0f32);
    }
}
