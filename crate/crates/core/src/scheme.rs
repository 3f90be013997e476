//! Finite matrix decision schemes.
//!
//! A scheme is a finite list of acts, each a payoff vector over the same
//! finite set of states. Acts are compared by domination (componentwise
//! `<=` with at least one strict coordinate). A *projection* is any
//! preference on acts that extends domination; the scheme contains
//! uncertainty when that projection is not unique, which happens exactly
//! when two acts cross: each is strictly better than the other in some state.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("a scheme needs at least one state")]
    NoStates,
    #[error("act {act} has {found} payoffs, expected {expected}")]
    RaggedAct {
        act: usize,
        expected: usize,
        found: usize,
    },
    #[error("act index {index} out of range for a scheme with {len} acts")]
    ActOutOfRange { index: usize, len: usize },
    #[error("ranking covers {found} acts but the scheme has {expected}")]
    RankingNotTotal { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixScheme {
    state_count: usize,
    #[serde(with = "crate::rational::serde_str::matrix")]
    acts: Vec<Vec<Rational>>,
}

/// A projection represented by integer ranks, one per act. Lower rank is
/// less preferred; equal ranks are indifferent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ranking {
    pub ranks: Vec<usize>,
}

/// Two acts that cross: `act_a` is worse than `act_b` in `state_a` and
/// better in `state_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UncertaintyWitness {
    pub act_a: usize,
    pub act_b: usize,
    pub state_a: usize,
    pub state_b: usize,
}

impl Ranking {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// `true` when `i` is strictly less preferred than `j`.
    pub fn prefers(&self, i: usize, j: usize) -> bool {
        self.ranks[i] < self.ranks[j]
    }

    /// Whether every act has its own rank, i.e. the ranking is a strict
    /// linear order.
    pub fn is_linear(&self) -> bool {
        let mut seen = self.ranks.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    fn from_order(order: &[usize]) -> Self {
        let mut ranks = vec![0; order.len()];
        for (rank, &act) in order.iter().enumerate() {
            ranks[act] = rank;
        }
        Ranking { ranks }
    }
}

impl UncertaintyWitness {
    /// Checks the crossing inequalities against `scheme`.
    pub fn holds_in(&self, scheme: &MatrixScheme) -> bool {
        let (Some(a), Some(b)) = (scheme.acts.get(self.act_a), scheme.acts.get(self.act_b)) else {
            return false;
        };
        self.state_a < scheme.state_count
            && self.state_b < scheme.state_count
            && a[self.state_a] < b[self.state_a]
            && b[self.state_b] < a[self.state_b]
    }
}

fn weakly_below(lhs: &[Rational], rhs: &[Rational]) -> bool {
    lhs.iter().zip(rhs).all(|(x, y)| x <= y)
}

/// Componentwise `<=` with at least one strict coordinate.
pub fn vector_dominates(lhs: &[Rational], rhs: &[Rational]) -> bool {
    weakly_below(lhs, rhs) && lhs.iter().zip(rhs).any(|(x, y)| x < y)
}

impl MatrixScheme {
    pub fn new(state_count: usize, acts: Vec<Vec<Rational>>) -> Result<Self, SchemeError> {
        if state_count == 0 {
            return Err(SchemeError::NoStates);
        }
        if let Some((act, row)) = acts
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != state_count)
        {
            return Err(SchemeError::RaggedAct {
                act,
                expected: state_count,
                found: row.len(),
            });
        }
        Ok(MatrixScheme { state_count, acts })
    }

    /// Builds a scheme from non-empty rows, taking the state count from the
    /// first row.
    pub fn from_acts(acts: Vec<Vec<Rational>>) -> Result<Self, SchemeError> {
        let state_count = acts.first().map_or(1, Vec::len);
        Self::new(state_count, acts)
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn act_count(&self) -> usize {
        self.acts.len()
    }

    pub fn acts(&self) -> &[Vec<Rational>] {
        &self.acts
    }

    pub fn act(&self, index: usize) -> Result<&[Rational], SchemeError> {
        self.acts
            .get(index)
            .map(Vec::as_slice)
            .ok_or(SchemeError::ActOutOfRange {
                index,
                len: self.acts.len(),
            })
    }

    /// Domination: `i` is weakly worse than `j` in every state and strictly
    /// worse in at least one.
    pub fn dominates(&self, i: usize, j: usize) -> Result<bool, SchemeError> {
        Ok(vector_dominates(self.act(i)?, self.act(j)?))
    }

    /// The enforced domination used for weak arbitrage: `i` is strictly
    /// worse than `j` in every state.
    pub fn strictly_dominates(&self, i: usize, j: usize) -> Result<bool, SchemeError> {
        let (a, b) = (self.act(i)?, self.act(j)?);
        Ok(a.iter().zip(b).all(|(x, y)| x < y))
    }

    fn dominates_unchecked(&self, i: usize, j: usize) -> bool {
        vector_dominates(&self.acts[i], &self.acts[j])
    }

    /// Every two acts with different payoff vectors are comparable.
    /// Duplicate vectors count as the same act.
    pub fn is_domination_connected(&self) -> bool {
        self.crossing_pair().is_none()
    }

    fn crossing_pair(&self) -> Option<UncertaintyWitness> {
        let n = self.acts.len();
        for a in 0..n {
            for b in a + 1..n {
                let (x, y) = (&self.acts[a], &self.acts[b]);
                let state_a = (0..self.state_count).find(|&t| x[t] < y[t]);
                let state_b = (0..self.state_count).find(|&t| y[t] < x[t]);
                if let (Some(state_a), Some(state_b)) = (state_a, state_b) {
                    return Some(UncertaintyWitness {
                        act_a: a,
                        act_b: b,
                        state_a,
                        state_b,
                    });
                }
            }
        }
        None
    }

    /// Returns the lexicographically first crossing pair, if any. A witness
    /// exists exactly when the projection is not unique.
    pub fn contains_uncertainty(&self) -> Option<UncertaintyWitness> {
        self.crossing_pair()
    }

    /// A strict linear order extending domination. Incomparable acts are
    /// placed by lowest index first.
    pub fn build_projection(&self) -> Ranking {
        let n = self.acts.len();
        self.linearize(|i, j| self.dominates_unchecked(i, j), n)
    }

    /// Two projections that order the first crossing pair oppositely, or
    /// `None` when the projection is unique.
    ///
    /// The second ranking linearizes domination extended by forcing
    /// `act_b` below `act_a`: `x < y` whenever `x` dominates `y`, or `x` is
    /// `act_b` or below it and `y` is `act_a` or above it.
    pub fn build_two_distinct_projections(&self) -> Option<(Ranking, Ranking)> {
        let witness = self.contains_uncertainty()?;
        let (a, b) = (witness.act_a, witness.act_b);
        let plain = self.build_projection();
        let first = if plain.prefers(a, b) {
            plain
        } else {
            self.forced_projection(a, b)
        };
        let second = self.forced_projection(b, a);
        Some((first, second))
    }

    /// Linearizes domination extended so that `low` sits below `high`.
    /// `low` and `high` must be incomparable under domination.
    fn forced_projection(&self, low: usize, high: usize) -> Ranking {
        let below = |x: usize, y: usize| {
            self.dominates_unchecked(x, y)
                || ((x == low || self.dominates_unchecked(x, low))
                    && (y == high || self.dominates_unchecked(high, y)))
        };
        self.linearize(below, self.acts.len())
    }

    /// Kahn's algorithm over an acyclic relation, always releasing the
    /// smallest available index.
    fn linearize(&self, below: impl Fn(usize, usize) -> bool, n: usize) -> Ranking {
        let mut indegree = vec![0usize; n];
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| i != j && below(i, j)).collect())
            .collect();
        for &j in succ.iter().flatten() {
            indegree[j] += 1;
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(i);
            for &j in &succ[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(Reverse(j));
                }
            }
        }
        assert_eq!(order.len(), n, "relation passed to linearize has a cycle");
        Ranking::from_order(&order)
    }

    /// Checks that `ranking` extends domination: whenever `i` dominates `j`,
    /// `rank(i) < rank(j)`.
    pub fn verify_projection(&self, ranking: &Ranking) -> Result<bool, SchemeError> {
        if ranking.len() != self.acts.len() {
            return Err(SchemeError::RankingNotTotal {
                expected: self.acts.len(),
                found: ranking.len(),
            });
        }
        let n = self.acts.len();
        Ok(
            (0..n)
                .all(|i| (0..n).all(|j| !self.dominates_unchecked(i, j) || ranking.prefers(i, j))),
        )
    }
}
