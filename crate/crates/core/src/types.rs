//! Domain vectors shared by the learners and environments.

use serde::{Deserialize, Serialize};

use crate::vector::{basis, dot, norm, sub};
use crate::{Error, Result};

/// Slack allowed when re-validating unit-ball and margin constraints.
pub const GEOMETRY_TOL: f64 = 1e-12;

/// A hypothesis `w ∈ ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    /// First standard basis vector `e₁`, the learners' starting point.
    pub fn e1(d: usize) -> Self {
        Self(basis(d, 0))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Binary label in `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `+1` for `t ≥ 0`, `−1` otherwise.
    pub fn from_score(t: f64) -> Self {
        if t >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRound {
    pub x: Vec<f64>,
    pub y: Label,
}

impl LabeledRound {
    /// Checks `‖x‖ ≤ 1` and, when a target is given, `|w*·x| ≥ γ`.
    pub fn validate(&self, target: Option<(&[f64], f64)>) -> std::result::Result<(), String> {
        let n = norm(&self.x);
        if !(n <= 1.0 + GEOMETRY_TOL) {
            return Err(format!("point norm {n} exceeds 1"));
        }
        if let Some((w_star, gamma)) = target {
            let m = dot(w_star, &self.x).abs();
            if !(m >= gamma - GEOMETRY_TOL) {
                return Err(format!("point margin {m} below gamma {gamma}"));
            }
        }
        Ok(())
    }
}

/// `k` context vectors, one per arm, each of dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    columns: Vec<Vec<f64>>,
}

impl Context {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::param("context", "context has no arms"));
        }
        let d = columns[0].len();
        if let Some(bad) = columns.iter().find(|c| c.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Ok(Self { columns })
    }

    pub fn arms(&self) -> usize {
        self.columns.len()
    }

    pub fn dim(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// `X_{i−j} = x_i − x_j`.
    pub fn diff(&self, i: usize, j: usize) -> Vec<f64> {
        sub(&self.columns[i], &self.columns[j])
    }

    /// Checks the unit-ball constraint and, when a target is given, pairwise
    /// score gaps of at least `γ`.
    pub fn validate(&self, target: Option<(&[f64], f64)>) -> std::result::Result<(), String> {
        for (i, c) in self.columns.iter().enumerate() {
            let n = norm(c);
            if !(n <= 1.0 + GEOMETRY_TOL) {
                return Err(format!("arm {i} norm {n} exceeds 1"));
            }
        }
        if let Some((w_star, gamma)) = target {
            let scores: Vec<f64> = self.columns.iter().map(|c| dot(w_star, c)).collect();
            for i in 0..scores.len() {
                for j in (i + 1)..scores.len() {
                    let gap = (scores[i] - scores[j]).abs();
                    if !(gap >= gamma - GEOMETRY_TOL) {
                        return Err(format!("arms {i},{j} score gap {gap} below gamma {gamma}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rewards `r ∈ [0, M]^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(rewards: Vec<f64>, cap: f64) -> Result<Self> {
        let r = Self(rewards);
        r.validate(cap).map_err(|e| Error::param("rewards", e))?;
        Ok(r)
    }

    /// Wraps values that are not bounded by the reward cap, e.g. fake rewards
    /// built from a single explored arm.
    pub fn unchecked(rewards: Vec<f64>) -> Self {
        Self(rewards)
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn validate(&self, cap: f64) -> std::result::Result<(), String> {
        for (i, &r) in self.0.iter().enumerate() {
            if !(0.0..=cap).contains(&r) {
                return Err(format!("reward {r} of arm {i} outside [0, {cap}]"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_convention() {
        assert_eq!(Label::from_score(3.2), Label::Pos);
        assert_eq!(Label::from_score(0.0), Label::Pos);
        assert_eq!(Label::from_score(-1e-9), Label::Neg);
    }

    #[test]
    fn context_rejects_ragged_columns() {
        let err = Context::new(vec![vec![1.0, 0.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(Context::new(vec![]).is_err());
    }

    #[test]
    fn context_gap_validation() {
        let w = [1.0, 0.0];
        let ok = Context::new(vec![vec![-0.5, 0.3], vec![0.0, 0.1], vec![0.5, -0.8]]).unwrap();
        assert!(ok.validate(Some((&w, 0.5))).is_ok());
        let bad = Context::new(vec![vec![0.1, 0.0], vec![0.2, 0.0]]).unwrap();
        assert!(bad.validate(Some((&w, 0.5))).is_err());
    }

    #[test]
    fn reward_range() {
        assert!(RewardVector::new(vec![0.0, 1.0], 1.0).is_ok());
        assert!(RewardVector::new(vec![0.0, 1.5], 1.0).is_err());
    }
}
