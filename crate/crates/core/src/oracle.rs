//! Independent cross-checks and seeded instance generators.
//!
//! Nothing here calls the crossing-pair search in [`crate::scheme`]: the
//! uncertainty oracle counts projections by literal enumeration, and the
//! market checker compares the LP detector against the profit-vector route
//! (exact positive-decision search plus sampled dominated pairs).

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{
    corresponding_scheme_payoff, discount_prices, find_arbitrage, leverage,
    positive_decision_exists, profits, validate_market, ArbitrageKind, ArbitrageVerdict, Market,
    Portfolio,
};
use crate::rational::{int, is_semipositive, ratio, Rational};
use crate::scheme::MatrixScheme;

pub const MAX_ENUMERATED_ACTS: usize = 5;
pub const MAX_DIMENSION: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{0} distinct acts exceed the enumeration cap of {MAX_ENUMERATED_ACTS}")]
    TooManyActs(usize),
    #[error("invalid instance spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcedClass {
    Arbitrage,
    NoArbitrage,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub n_assets: usize,
    pub m_states: usize,
    pub entry_pool: Vec<Rational>,
    pub seed: u64,
    pub forced_class: ForcedClass,
}

impl InstanceSpec {
    pub fn new(n_assets: usize, m_states: usize, seed: u64, forced_class: ForcedClass) -> Self {
        InstanceSpec {
            n_assets,
            m_states,
            entry_pool: default_pool(),
            seed,
            forced_class,
        }
    }
}

/// Payoff entries used when no pool is given.
pub fn default_pool() -> Vec<Rational> {
    vec![
        int(-1),
        int(0),
        ratio(1, 2),
        int(1),
        ratio(3, 2),
        int(2),
        int(3),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedMarket {
    pub market: Market,
    /// The `psi` that priced a forced no-arbitrage market.
    pub generating_state_prices: Option<Vec<Rational>>,
    /// The dominated-pair portfolio planted in a forced arbitrage market.
    pub planted_witness: Option<Portfolio>,
}

pub fn generate_market(spec: &InstanceSpec) -> Result<GeneratedMarket, OracleError> {
    let (n, m) = (spec.n_assets, spec.m_states);
    if n == 0 || m == 0 || n > MAX_DIMENSION || m > MAX_DIMENSION {
        return Err(OracleError::InvalidSpec("dimensions must lie in 1..=5"));
    }
    if spec.entry_pool.is_empty() {
        return Err(OracleError::InvalidSpec("entry pool is empty"));
    }
    if spec.forced_class == ForcedClass::Arbitrage && n < 2 {
        return Err(OracleError::InvalidSpec(
            "planting arbitrage needs two assets",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut payoffs = vec![vec![Rational::one(); m]];
    for _ in 1..n {
        payoffs.push(
            (0..m)
                .map(|_| spec.entry_pool.choose(&mut rng).unwrap().clone())
                .collect(),
        );
    }
    let riskless_price = |rng: &mut ChaCha8Rng| {
        [int(1), ratio(9, 10), ratio(3, 4), ratio(1, 2)]
            .choose(rng)
            .unwrap()
            .clone()
    };

    let mut generating = None;
    let mut planted = None;
    let prices = match spec.forced_class {
        ForcedClass::NoArbitrage => {
            let weights: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            let denom = total + rng.gen_range(0..=total);
            let psi: Vec<Rational> = weights.iter().map(|&w| ratio(w, denom)).collect();
            let prices = payoffs
                .iter()
                .map(|row| row.iter().zip(&psi).map(|(a, s)| a * s).sum())
                .collect();
            generating = Some(psi);
            prices
        }
        ForcedClass::Unconstrained | ForcedClass::Arbitrage => {
            let mut prices = vec![riskless_price(&mut rng)];
            for _ in 1..n {
                prices.push(spec.entry_pool.choose(&mut rng).unwrap().clone());
            }
            if spec.forced_class == ForcedClass::Arbitrage {
                // asset `better` copies asset `worse`, pays more in one state,
                // and costs the same
                let better = rng.gen_range(1..n);
                let worse = loop {
                    let k = rng.gen_range(0..n);
                    if k != better {
                        break k;
                    }
                };
                let state = rng.gen_range(0..m);
                let bump = [ratio(1, 2), int(1), int(2)]
                    .choose(&mut rng)
                    .unwrap()
                    .clone();
                payoffs[better] = payoffs[worse].clone();
                payoffs[better][state] += bump;
                prices[better] = prices[worse].clone();
                let mut holdings = vec![Rational::zero(); n];
                holdings[better] = Rational::one();
                holdings[worse] = -Rational::one();
                planted = Some(Portfolio::new(holdings));
            }
            prices
        }
    };
    let market = validate_market(payoffs, prices)
        .expect("generator builds markets that satisfy the riskless invariants");
    Ok(GeneratedMarket {
        market,
        generating_state_prices: generating,
        planted_witness: planted,
    })
}

/// A scheme with `acts` acts over `states` states, entries drawn from `pool`.
pub fn generate_scheme(acts: usize, states: usize, pool: &[Rational], seed: u64) -> MatrixScheme {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..acts)
        .map(|_| {
            (0..states)
                .map(|_| pool.choose(&mut rng).unwrap().clone())
                .collect()
        })
        .collect();
    MatrixScheme::new(states.max(1), rows).expect("rows sized to states")
}

/// A scheme whose distinct acts form a domination chain, listed in shuffled
/// order and possibly with repeats.
pub fn generate_chain_scheme(acts: usize, states: usize, seed: u64) -> MatrixScheme {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = states.max(1);
    let mut current = vec![Rational::zero(); states];
    let mut rows = Vec::with_capacity(acts);
    for _ in 0..acts {
        rows.push(current.clone());
        if rng.gen_bool(0.8) {
            let s = rng.gen_range(0..states);
            current[s] += int(rng.gen_range(1..=2));
            for v in current.iter_mut() {
                if rng.gen_bool(0.3) {
                    *v += int(1);
                }
            }
        }
    }
    rows.shuffle(&mut rng);
    MatrixScheme::new(states, rows).expect("rows sized to states")
}

fn below(lhs: &[Rational], rhs: &[Rational]) -> bool {
    let mut strict = false;
    for (x, y) in lhs.iter().zip(rhs) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// A strict relation as ordered pairs `(less preferred, more preferred)`.
pub type Relation = BTreeSet<(usize, usize)>;

/// Every strict relation on the distinct acts of `scheme` that is induced
/// by some rank map and extends domination. Relations are returned as sets
/// of ordered pairs `(i, j)` meaning `i` is less preferred than `j`, over
/// indices of the first occurrence of each distinct payoff vector.
pub fn passing_relations(
    scheme: &MatrixScheme,
) -> Result<(Vec<usize>, Vec<Relation>), OracleError> {
    let acts = scheme.acts();
    let mut reps: Vec<usize> = Vec::new();
    for (i, act) in acts.iter().enumerate() {
        if !reps.iter().any(|&r| acts[r] == *act) {
            reps.push(i);
        }
    }
    let k = reps.len();
    if k > MAX_ENUMERATED_ACTS {
        return Err(OracleError::TooManyActs(k));
    }
    let domination: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .filter(|&(a, b)| below(&acts[reps[a]], &acts[reps[b]]))
        .collect();

    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut ranks = vec![0usize; k];
    let total = k.pow(k as u32);
    for code in 0..total {
        let mut c = code;
        for r in ranks.iter_mut() {
            *r = c % k;
            c /= k;
        }
        if domination.iter().all(|&(a, b)| ranks[a] < ranks[b]) {
            let mut mask = 0u32;
            for a in 0..k {
                for b in 0..k {
                    if ranks[a] < ranks[b] {
                        mask |= 1 << (a * k + b);
                    }
                }
            }
            seen.insert(mask);
        }
    }
    let relations = seen
        .into_iter()
        .map(|mask| {
            (0..k)
                .flat_map(|a| (0..k).map(move |b| (a, b)))
                .filter(|&(a, b)| mask & (1 << (a * k + b)) != 0)
                .map(|(a, b)| (reps[a], reps[b]))
                .collect()
        })
        .collect();
    Ok((reps, relations))
}

/// Uncertainty decided by counting projections: `true` iff more than one
/// distinct strict relation extends domination.
pub fn brute_force_uncertainty(scheme: &MatrixScheme) -> Result<bool, OracleError> {
    Ok(passing_relations(scheme)?.1.len() > 1)
}

/// Domination pairs among the given act indices, computed independently.
pub fn domination_pairs(scheme: &MatrixScheme, indices: &[usize]) -> BTreeSet<(usize, usize)> {
    let acts = scheme.acts();
    indices
        .iter()
        .flat_map(|&a| indices.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| below(&acts[a], &acts[b]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcedureVerdict {
    pub arbitrage: bool,
    pub witness: Option<Portfolio>,
}

/// Two sampled portfolios whose profit vectors are ordered by domination:
/// `lower` is dominated by `upper`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatedPair {
    pub lower: Portfolio,
    pub upper: Portfolio,
    /// `upper - lower` after self-financing: an arbitrage portfolio.
    pub levered_difference: Portfolio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub instance: Market,
    /// The LP detector.
    pub procedure_a: ProcedureVerdict,
    /// Exact positive-decision search on the profit vectors, levered into
    /// a portfolio.
    pub procedure_b: ProcedureVerdict,
    pub agree: bool,
    pub sampled_pairs: usize,
    pub dominated_pairs: usize,
    /// Sampled dominated pair found although procedure A reported no
    /// arbitrage.
    pub contradiction: Option<DominatedPair>,
    /// For an arbitrage witness `x`: the two-act scheme `{B^T x, 0}` has no
    /// uncertainty.
    pub forward_check: Option<bool>,
    /// Procedure A's witness passed re-substitution, when it gave one.
    pub witness_verified: bool,
}

impl EquivalenceReport {
    pub fn consistent(&self) -> bool {
        self.agree
            && self.contradiction.is_none()
            && self.forward_check != Some(false)
            && self.witness_verified
    }
}

fn sample_portfolio(rng: &mut ChaCha8Rng, n: usize) -> Portfolio {
    let grid = rng.gen_bool(0.5);
    Portfolio::new(
        (0..n)
            .map(|_| {
                if grid {
                    int(rng.gen_range(-3..=3))
                } else {
                    ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4))
                }
            })
            .collect(),
    )
}

/// [`check_equivalence_with`] using [`find_arbitrage`] as procedure A.
pub fn check_equivalence(market: &Market, sample_count: usize, seed: u64) -> EquivalenceReport {
    check_equivalence_with(market, sample_count, seed, find_arbitrage)
}

/// Compares an arbitrage detector against the profit-vector route.
///
/// Procedure B searches the corresponding scheme for a semipositive profit
/// vector exactly and levers it into an arbitrage portfolio. On top of that,
/// `sample_count` random portfolio pairs are mapped to profit vectors; any
/// pair without uncertainty between distinct vectors yields a profit
/// difference that must be an arbitrage, and contradicts a no-arbitrage
/// verdict from procedure A.
pub fn check_equivalence_with(
    market: &Market,
    sample_count: usize,
    seed: u64,
    detector: impl Fn(&Market) -> ArbitrageVerdict,
) -> EquivalenceReport {
    let discounted = discount_prices(market);
    let n = market.asset_count();

    let verdict_a = detector(market);
    let witness_verified = match &verdict_a.witness {
        Some(x) => {
            verdict_a.kind != ArbitrageKind::None
                && market.satisfies(x, verdict_a.kind).unwrap_or(false)
        }
        None => verdict_a.kind == ArbitrageKind::None,
    };
    let forward_check = verdict_a.witness.as_ref().map(|x| {
        corresponding_scheme_payoff(&discounted, x).is_ok_and(|d| {
            let zero = vec![Rational::zero(); d.len()];
            d != zero
                && MatrixScheme::from_acts(vec![d, zero])
                    .map(|s| s.contains_uncertainty().is_none())
                    .unwrap_or(false)
        })
    });
    let procedure_a = ProcedureVerdict {
        arbitrage: verdict_a.kind != ArbitrageKind::None,
        witness: verdict_a.witness,
    };

    let levered = positive_decision_exists(market).map(|x| {
        let xbar = leverage(&discounted, &x).expect("discounted market");
        assert_eq!(
            market.satisfies(&xbar, ArbitrageKind::StrongBranch1),
            Ok(true),
            "levered positive decision is not an arbitrage"
        );
        xbar
    });
    let procedure_b = ProcedureVerdict {
        arbitrage: levered.is_some(),
        witness: levered,
    };

    let b = discounted.profit_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dominated_pairs = 0;
    let mut contradiction = None;
    for _ in 0..sample_count {
        let x1 = sample_portfolio(&mut rng, n);
        let x2 = sample_portfolio(&mut rng, n);
        let d1 = profits(&b, &x1);
        let d2 = profits(&b, &x2);
        if d1 == d2 {
            continue;
        }
        let pair = MatrixScheme::from_acts(vec![d1.clone(), d2]).expect("equal widths");
        if pair.contains_uncertainty().is_some() {
            continue;
        }
        let (lower, upper) = if pair.dominates(0, 1).expect("two acts") {
            (x1, x2)
        } else {
            (x2, x1)
        };
        let difference = upper.minus(&lower);
        let profit = profits(&b, &difference);
        assert!(
            is_semipositive(&profit),
            "difference of a dominated pair is not semipositive"
        );
        let levered_difference = leverage(&discounted, &difference).expect("discounted");
        assert_eq!(
            market.satisfies(&levered_difference, ArbitrageKind::StrongBranch1),
            Ok(true)
        );
        dominated_pairs += 1;
        if (!procedure_a.arbitrage || !procedure_b.arbitrage) && contradiction.is_none() {
            contradiction = Some(DominatedPair {
                lower,
                upper,
                levered_difference,
            });
        }
    }

    EquivalenceReport {
        instance: market.clone(),
        agree: procedure_a.arbitrage == procedure_b.arbitrage,
        procedure_a,
        procedure_b,
        sampled_pairs: sample_count,
        dominated_pairs,
        contradiction,
        forward_check,
        witness_verified,
    }
}
