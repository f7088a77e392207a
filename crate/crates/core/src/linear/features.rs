use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Whether a map featurizes states or state-action pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    State,
    StateAction,
}

impl FeatureKind {
    fn name(self) -> &'static str {
        match self {
            FeatureKind::State => "state features",
            FeatureKind::StateAction => "state-action features",
        }
    }
}

/// A dense table of feature vectors over a finite state (or state-action)
/// space. Every row has length [`FeatureMap::dim`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    kind: FeatureKind,
    dim: usize,
    n_states: usize,
    n_actions: usize,
    rows: Vec<f64>,
}

impl FeatureMap {
    /// `x(s) = e_s`.
    pub fn one_hot_states(n_states: usize) -> Self {
        let mut rows = vec![0.0; n_states * n_states];
        for s in 0..n_states {
            rows[s * n_states + s] = 1.0;
        }
        Self {
            kind: FeatureKind::State,
            dim: n_states,
            n_states,
            n_actions: 1,
            rows,
        }
    }

    /// `x(s, a) = e_{s n_a + a}`.
    pub fn one_hot_pairs(n_states: usize, n_actions: usize) -> Self {
        let n = n_states * n_actions;
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Self {
            kind: FeatureKind::StateAction,
            dim: n,
            n_states,
            n_actions,
            rows,
        }
    }

    /// State aggregation: `x(s) = e_{group[s]}` over `n_groups` features.
    pub fn aggregation(groups: &[usize], n_groups: usize) -> Result<Self> {
        let n_states = groups.len();
        let mut rows = vec![0.0; n_states * n_groups];
        for (s, &g) in groups.iter().enumerate() {
            if g >= n_groups {
                return Err(Error::DimensionMismatch {
                    expected: n_groups,
                    found: g + 1,
                });
            }
            rows[s * n_groups + g] = 1.0;
        }
        Self::checked(FeatureKind::State, n_groups, n_states, 1, rows)
    }

    /// Arbitrary state features, one row of length `dim` per state.
    pub fn from_state_rows(n_states: usize, dim: usize, rows: Vec<f64>) -> Result<Self> {
        Self::checked(FeatureKind::State, dim, n_states, 1, rows)
    }

    /// Arbitrary pair features, rows ordered `(s, a)` with `a` fastest.
    pub fn from_pair_rows(
        n_states: usize,
        n_actions: usize,
        dim: usize,
        rows: Vec<f64>,
    ) -> Result<Self> {
        Self::checked(FeatureKind::StateAction, dim, n_states, n_actions, rows)
    }

    /// Pair features from state features: `x(s, a)` holds `x(s)` in block `a`
    /// of `n_actions` blocks and zeros elsewhere.
    pub fn action_blocks(states: &FeatureMap, n_actions: usize) -> Result<Self> {
        states.expect(FeatureKind::State)?;
        let d = states.dim;
        let dim = d * n_actions;
        let mut rows = vec![0.0; states.n_states * n_actions * dim];
        for s in 0..states.n_states {
            for a in 0..n_actions {
                let start = (s * n_actions + a) * dim + a * d;
                rows[start..start + d].copy_from_slice(states.row(s));
            }
        }
        Self::checked(FeatureKind::StateAction, dim, states.n_states, n_actions, rows)
    }

    fn checked(
        kind: FeatureKind,
        dim: usize,
        n_states: usize,
        n_actions: usize,
        rows: Vec<f64>,
    ) -> Result<Self> {
        let expected = n_states * n_actions * dim;
        if rows.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: rows.len(),
            });
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature map"));
        }
        Ok(Self {
            kind,
            dim,
            n_states,
            n_actions,
            rows,
        })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// 1 for state maps.
    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub(crate) fn expect(&self, kind: FeatureKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::FeatureKind {
                expected: kind.name(),
                found: self.kind.name(),
            })
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s < self.n_states {
            Ok(())
        } else {
            Err(Error::StateOutOfRange {
                index: s,
                n_states: self.n_states,
            })
        }
    }

    /// `x(s)`.
    pub fn state(&self, s: usize) -> Result<&[f64]> {
        self.expect(FeatureKind::State)?;
        self.check_state(s)?;
        Ok(self.row(s))
    }

    /// `x(s, a)`.
    pub fn pair(&self, s: usize, a: usize) -> Result<&[f64]> {
        self.expect(FeatureKind::StateAction)?;
        self.check_state(s)?;
        if a >= self.n_actions {
            return Err(Error::ActionOutOfRange {
                index: a,
                n_actions: self.n_actions,
            });
        }
        Ok(self.row(s * self.n_actions + a))
    }
}
