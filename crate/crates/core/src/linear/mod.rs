//! Linear value functions `v̂(s) = x(s)ᵀw` and `q̂(s,a) = x(s,a)ᵀw`.
//!
//! Updates are semi-gradient: the bootstrapped target is held constant when
//! differentiating. A bootstrap of `None` stands for a terminal successor,
//! whose feature vector is zero.

mod features;
mod lstd;

pub use features::{FeatureKind, FeatureMap};
pub use lstd::{lstd_solve, lstdq_solve, LstdConfig, LstdSolution, DEFAULT_RIDGE};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_discount, check_unit_interval, Error, Result};
use crate::math;

/// Parameter vector of a linear approximator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn zeros(dim: usize) -> Self {
        Self { w: vec![0.0; dim] }
    }

    pub fn from_vec(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("weight vector"));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.w.len() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                found: self.w.len(),
            })
        }
    }

    /// `w <- w + scale * v`, refusing to write non-finite results.
    pub(crate) fn add_scaled(&mut self, scale: f64, v: &[f64], what: &'static str) -> Result<()> {
        self.check_dim(v.len())?;
        if self
            .w
            .iter()
            .zip(v)
            .any(|(&w, &x)| x != 0.0 && !(w + scale * x).is_finite())
        {
            return Err(Error::NonFinite(what));
        }
        for (w, &x) in self.w.iter_mut().zip(v) {
            if x != 0.0 {
                *w += scale * x;
            }
        }
        Ok(())
    }
}

/// Accumulating trace in feature space: `e <- γλ e + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrace {
    e: Vec<f64>,
    lambda: f64,
    gamma: f64,
}

impl FeatureTrace {
    pub fn new(dim: usize, lambda: f64, gamma: f64) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        check_discount(gamma)?;
        Ok(Self {
            e: vec![0.0; dim],
            lambda,
            gamma,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn values(&self) -> &[f64] {
        &self.e
    }

    pub fn reset(&mut self) {
        self.e.iter_mut().for_each(|x| *x = 0.0);
    }

    pub fn accumulate(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.e.len() {
            return Err(Error::DimensionMismatch {
                expected: self.e.len(),
                found: x.len(),
            });
        }
        let decay = self.gamma * self.lambda;
        for (e, &xi) in self.e.iter_mut().zip(x) {
            *e *= decay;
            *e += xi;
        }
        Ok(())
    }
}

/// One recorded transition. `a_next` is the action taken in `s_next`, when
/// known; `done` marks the end of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experience {
    pub s: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
    pub a_next: Option<usize>,
    pub done: bool,
}

/// Transitions in the order they were collected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperienceBatch {
    records: Vec<Experience>,
}

impl ExperienceBatch {
    pub fn new(records: Vec<Experience>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[Experience] {
        &self.records
    }

    pub fn push(&mut self, e: Experience) {
        self.records.push(e);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn dot_checked(x: &[f64], w: &WeightVector) -> Result<f64> {
    w.check_dim(x.len())?;
    Ok(math::dot(x, &w.w))
}

/// `x(s)ᵀw`.
pub fn v_hat(fm: &FeatureMap, s: usize, w: &WeightVector) -> Result<f64> {
    dot_checked(fm.state(s)?, w)
}

/// `x(s,a)ᵀw`.
pub fn q_hat(fm: &FeatureMap, s: usize, a: usize, w: &WeightVector) -> Result<f64> {
    dot_checked(fm.pair(s, a)?, w)
}

/// `w <- w + α (target - prediction) x`. Returns `target - prediction`.
pub fn sgd_update(
    w: &mut WeightVector,
    features: &[f64],
    target: f64,
    prediction: f64,
    alpha: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            expected: "a step size > 0",
        });
    }
    if !target.is_finite() {
        return Err(Error::NonFinite("sgd target"));
    }
    let error = target - prediction;
    w.add_scaled(alpha * error, features, "sgd_update")?;
    Ok(error)
}

fn v_next(fm: &FeatureMap, next: Option<usize>, w: &WeightVector) -> Result<f64> {
    next.map_or(Ok(0.0), |s| v_hat(fm, s, w))
}

fn q_next(fm: &FeatureMap, next: Option<(usize, usize)>, w: &WeightVector) -> Result<f64> {
    next.map_or(Ok(0.0), |(s, a)| q_hat(fm, s, a, w))
}

/// Semi-gradient TD(0): [`sgd_update`] toward `r + γ v̂(s')`. Returns δ.
pub fn linear_td0_step(
    w: &mut WeightVector,
    fm: &FeatureMap,
    s: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    check_discount(gamma)?;
    let target = r + gamma * v_next(fm, next, w)?;
    let prediction = v_hat(fm, s, w)?;
    sgd_update(w, fm.state(s)?, target, prediction, alpha)
}

/// Semi-gradient TD(λ) with a feature trace: `e <- γλe + x(s)`,
/// `w <- w + α δ e`. The trace is cleared after a terminal step.
pub fn linear_td_lambda_step(
    w: &mut WeightVector,
    e: &mut FeatureTrace,
    fm: &FeatureMap,
    s: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let delta = r + e.gamma * v_next(fm, next, w)? - v_hat(fm, s, w)?;
    e.accumulate(fm.state(s)?)?;
    w.add_scaled(alpha * delta, &e.e, "linear_td_lambda_step")?;
    if next.is_none() {
        e.reset();
    }
    Ok(delta)
}

/// Semi-gradient SARSA(λ): `e <- γλe + x(s,a)`, `δ = r + γq̂(s',a') - q̂(s,a)`,
/// `w <- w + α δ e`. The trace is cleared after a terminal step.
#[allow(clippy::too_many_arguments)]
pub fn sarsa_lambda_approx_step(
    w: &mut WeightVector,
    e: &mut FeatureTrace,
    fm: &FeatureMap,
    s: usize,
    a: usize,
    r: f64,
    next: Option<(usize, usize)>,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let delta = r + e.gamma * q_next(fm, next, w)? - q_hat(fm, s, a, w)?;
    e.accumulate(fm.pair(s, a)?)?;
    w.add_scaled(alpha * delta, &e.e, "sarsa_lambda_approx_step")?;
    if next.is_none() {
        e.reset();
    }
    Ok(delta)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            expected: "a step size > 0",
        })
    }
}
