//! One-period markets with a riskless first asset.
//!
//! `payoffs` is the `n x m` cash-flow matrix (row = asset, column = state)
//! and `prices` the length-`n` price vector. A portfolio is an arbitrage
//! when it costs nothing and pays something, or costs less than nothing and
//! never loses:
//!
//! * branch 1: `p.x <= 0` and `A^T x >= 0` with some state strictly positive
//! * branch 2: `p.x < 0` and `A^T x >= 0`
//!
//! Both conditions are positively homogeneous, so the searches below fix a
//! normalization (`sum(A^T x) = 1`, resp. `p.x = -1`) and hand the resulting
//! closed system to the exact simplex in [`crate::lp`]. Solver output is
//! never trusted directly: every witness is re-substituted before it is
//! returned.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{dot, is_nonnegative, is_semipositive, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("market needs at least one asset and one state")]
    Empty,
    #[error("payoff row {row} has {found} entries, expected {expected}")]
    RaggedPayoffs {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{found} prices given for {expected} assets")]
    PriceCount { expected: usize, found: usize },
    #[error("riskless asset must pay 1 in every state (state {state} pays {value})")]
    RisklessRow { state: usize, value: String },
    #[error("riskless asset price must lie in (0, 1], got {0}")]
    RisklessPrice(String),
    #[error("portfolio has {found} holdings, market has {expected} assets")]
    PortfolioLength { expected: usize, found: usize },
    #[error("prices are not discounted (riskless price is {0}, expected 1)")]
    NotDiscounted(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Market {
    #[serde(with = "crate::rational::serde_str::matrix")]
    payoffs: Vec<Vec<Rational>>,
    #[serde(with = "crate::rational::serde_str::vec")]
    prices: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Portfolio {
    #[serde(with = "crate::rational::serde_str::vec")]
    pub holdings: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArbitrageKind {
    #[serde(rename = "none")]
    None,
    /// `p.x <= 0`, `A^T x > 0`
    #[serde(rename = "strong_branch_1")]
    StrongBranch1,
    /// `p.x < 0`, `A^T x >= 0`
    #[serde(rename = "strong_branch_2")]
    StrongBranch2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbitrageVerdict {
    pub kind: ArbitrageKind,
    pub witness: Option<Portfolio>,
    /// Strictly positive `psi` with `p = A psi`, when no arbitrage exists.
    #[serde(with = "crate::rational::serde_str::option_vec")]
    pub state_prices: Option<Vec<Rational>>,
    /// Non-negative `psi` with `p = A psi`: the certificate that blocks
    /// branch 2 on its own. Only filled in by the weak search.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::rational::serde_str::option_vec"
    )]
    pub nonnegative_state_prices: Option<Vec<Rational>>,
}

impl Portfolio {
    pub fn new(holdings: Vec<Rational>) -> Self {
        Portfolio { holdings }
    }

    pub fn zero(n: usize) -> Self {
        Portfolio {
            holdings: vec![Rational::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.holdings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holdings.is_empty()
    }

    pub fn scaled(&self, factor: &Rational) -> Portfolio {
        Portfolio::new(self.holdings.iter().map(|h| h * factor).collect())
    }

    pub fn minus(&self, other: &Portfolio) -> Portfolio {
        Portfolio::new(
            self.holdings
                .iter()
                .zip(&other.holdings)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl ArbitrageVerdict {
    pub fn is_arbitrage(&self) -> bool {
        self.kind != ArbitrageKind::None
    }

    fn found(kind: ArbitrageKind, witness: Portfolio) -> Self {
        ArbitrageVerdict {
            kind,
            witness: Some(witness),
            state_prices: None,
            nonnegative_state_prices: None,
        }
    }
}

/// Checks the riskless-asset invariants and dimensions.
pub fn validate_market(
    payoffs: Vec<Vec<Rational>>,
    prices: Vec<Rational>,
) -> Result<Market, MarketError> {
    let n = payoffs.len();
    let m = payoffs.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(MarketError::Empty);
    }
    if let Some((row, r)) = payoffs.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(MarketError::RaggedPayoffs {
            row,
            expected: m,
            found: r.len(),
        });
    }
    if prices.len() != n {
        return Err(MarketError::PriceCount {
            expected: n,
            found: prices.len(),
        });
    }
    if let Some((state, value)) = payoffs[0].iter().enumerate().find(|(_, v)| !v.is_one()) {
        return Err(MarketError::RisklessRow {
            state,
            value: value.to_string(),
        });
    }
    let p0 = &prices[0];
    if !p0.is_positive() || *p0 > Rational::one() {
        return Err(MarketError::RisklessPrice(p0.to_string()));
    }
    Ok(Market { payoffs, prices })
}

impl Market {
    pub fn asset_count(&self) -> usize {
        self.payoffs.len()
    }

    pub fn state_count(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn payoffs(&self) -> &[Vec<Rational>] {
        &self.payoffs
    }

    pub fn prices(&self) -> &[Rational] {
        &self.prices
    }

    pub fn is_discounted(&self) -> bool {
        self.prices[0].is_one()
    }

    fn check_len(&self, x: &Portfolio) -> Result<(), MarketError> {
        if x.len() != self.asset_count() {
            return Err(MarketError::PortfolioLength {
                expected: self.asset_count(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `p.x`
    pub fn cost(&self, x: &Portfolio) -> Result<Rational, MarketError> {
        self.check_len(x)?;
        Ok(dot(&self.prices, &x.holdings))
    }

    /// `A^T x`, the portfolio's cash flow in each state.
    pub fn cash_flows(&self, x: &Portfolio) -> Result<Vec<Rational>, MarketError> {
        self.check_len(x)?;
        Ok((0..self.state_count())
            .map(|t| {
                self.payoffs
                    .iter()
                    .zip(&x.holdings)
                    .fold(Rational::zero(), |acc, (row, h)| acc + &row[t] * h)
            })
            .collect())
    }

    /// `A psi`, the prices implied by state prices `psi`.
    pub fn implied_prices(&self, psi: &[Rational]) -> Vec<Rational> {
        self.payoffs.iter().map(|row| dot(row, psi)).collect()
    }

    /// `B = A - [p p ... p]`: each asset's profit per state net of its price.
    pub fn profit_matrix(&self) -> Vec<Vec<Rational>> {
        self.payoffs
            .iter()
            .zip(&self.prices)
            .map(|(row, p)| row.iter().map(|a| a - p).collect())
            .collect()
    }

    /// Classifies `x` against the two arbitrage branches by substitution.
    /// Branch 1 is reported when both hold.
    pub fn classify(&self, x: &Portfolio) -> Result<ArbitrageKind, MarketError> {
        let cost = self.cost(x)?;
        let flows = self.cash_flows(x)?;
        Ok(if !cost.is_positive() && is_semipositive(&flows) {
            ArbitrageKind::StrongBranch1
        } else if cost.is_negative() && is_nonnegative(&flows) {
            ArbitrageKind::StrongBranch2
        } else {
            ArbitrageKind::None
        })
    }

    /// Whether `x` satisfies the specific branch `kind`.
    pub fn satisfies(&self, x: &Portfolio, kind: ArbitrageKind) -> Result<bool, MarketError> {
        let cost = self.cost(x)?;
        let flows = self.cash_flows(x)?;
        Ok(match kind {
            ArbitrageKind::None => false,
            ArbitrageKind::StrongBranch1 => !cost.is_positive() && is_semipositive(&flows),
            ArbitrageKind::StrongBranch2 => cost.is_negative() && is_nonnegative(&flows),
        })
    }
}

/// Scales prices by `1 / p_1` so the riskless asset costs exactly 1.
pub fn discount_prices(market: &Market) -> Market {
    let factor = market.prices[0].recip();
    Market {
        payoffs: market.payoffs.clone(),
        prices: market.prices.iter().map(|p| p * &factor).collect(),
    }
}

/// `B^T x`, the profit of `x` in each state.
pub fn corresponding_scheme_payoff(
    market: &Market,
    x: &Portfolio,
) -> Result<Vec<Rational>, MarketError> {
    market.check_len(x)?;
    Ok(profits(&market.profit_matrix(), x))
}

/// `B^T x` for a precomputed profit matrix `B`.
pub fn profits(profit_matrix: &[Vec<Rational>], x: &Portfolio) -> Vec<Rational> {
    let states = profit_matrix.first().map_or(0, Vec::len);
    (0..states)
        .map(|t| {
            profit_matrix
                .iter()
                .zip(&x.holdings)
                .fold(Rational::zero(), |acc, (row, h)| acc + &row[t] * h)
        })
        .collect()
}

/// Self-finances `x` by funding its cost out of the riskless asset:
/// `x_1 - p.x` in the first slot, other holdings unchanged. The result
/// costs nothing and its cash flows equal the profits `B^T x`.
pub fn leverage(market: &Market, x: &Portfolio) -> Result<Portfolio, MarketError> {
    if !market.is_discounted() {
        return Err(MarketError::NotDiscounted(market.prices[0].to_string()));
    }
    let cost = market.cost(x)?;
    let mut holdings = x.holdings.clone();
    holdings[0] -= cost;
    let levered = Portfolio::new(holdings);
    debug_assert!(market.cost(&levered).is_ok_and(|c| c.is_zero()));
    debug_assert_eq!(
        market.cash_flows(&levered).ok(),
        corresponding_scheme_payoff(market, x).ok()
    );
    Ok(levered)
}

fn branch_one_program(market: &Market) -> LinearProgram {
    let (n, m) = (market.asset_count(), market.state_count());
    let mut lp = LinearProgram::new(n);
    lp.constrain(market.prices.clone(), Relation::Le, Rational::zero());
    for t in 0..m {
        let column = market.payoffs.iter().map(|row| row[t].clone()).collect();
        lp.constrain(column, Relation::Ge, Rational::zero());
    }
    let totals = market.payoffs.iter().map(|row| row.iter().sum()).collect();
    lp.constrain(totals, Relation::Eq, Rational::one());
    lp
}

fn branch_two_program(market: &Market) -> LinearProgram {
    let (n, m) = (market.asset_count(), market.state_count());
    let mut lp = LinearProgram::new(n);
    lp.constrain(market.prices.clone(), Relation::Eq, -Rational::one());
    for t in 0..m {
        let column = market.payoffs.iter().map(|row| row[t].clone()).collect();
        lp.constrain(column, Relation::Ge, Rational::zero());
    }
    lp
}

fn search(market: &Market, program: LinearProgram, kind: ArbitrageKind) -> Option<Portfolio> {
    let x = Portfolio::new(program.solve().point()?);
    assert!(
        market.satisfies(&x, kind).unwrap_or(false),
        "solver returned a point that fails re-substitution"
    );
    Some(x)
}

fn detect(market: &Market, searched: &Market, weak_only: bool) -> ArbitrageVerdict {
    if !weak_only {
        if let Some(x) = search(
            searched,
            branch_one_program(searched),
            ArbitrageKind::StrongBranch1,
        ) {
            debug_assert!(market.satisfies(&x, ArbitrageKind::StrongBranch1) == Ok(true));
            return ArbitrageVerdict::found(ArbitrageKind::StrongBranch1, x);
        }
    }
    if let Some(x) = search(
        searched,
        branch_two_program(searched),
        ArbitrageKind::StrongBranch2,
    ) {
        debug_assert!(market.satisfies(&x, ArbitrageKind::StrongBranch2) == Ok(true));
        return ArbitrageVerdict::found(ArbitrageKind::StrongBranch2, x);
    }
    ArbitrageVerdict {
        kind: ArbitrageKind::None,
        witness: None,
        state_prices: state_prices(market),
        nonnegative_state_prices: weak_only
            .then(|| nonnegative_state_prices(market))
            .flatten(),
    }
}

/// Decides whether `market` admits an arbitrage portfolio. The search runs
/// on discounted prices; since discounting scales every price by the same
/// positive factor, the witness is valid for the input market as well.
/// State prices, when returned, price the input market (`p = A psi`).
pub fn find_arbitrage(market: &Market) -> ArbitrageVerdict {
    detect(market, &discount_prices(market), false)
}

/// [`find_arbitrage`] on the raw prices, skipping the discounting step.
pub fn find_arbitrage_undiscounted(market: &Market) -> ArbitrageVerdict {
    detect(market, market, false)
}

/// Decides branch 2 only (`p.x < 0`, `A^T x >= 0`).
pub fn find_weak_arbitrage(market: &Market) -> ArbitrageVerdict {
    detect(market, &discount_prices(market), true)
}

pub fn find_weak_arbitrage_undiscounted(market: &Market) -> ArbitrageVerdict {
    detect(market, market, true)
}

/// Looks for `x` whose profit vector `B^T x` is semipositive, working on
/// the discounted market. The returned `x` refers to the discounted
/// profit matrix.
pub fn positive_decision_exists(market: &Market) -> Option<Portfolio> {
    let discounted = discount_prices(market);
    let b = discounted.profit_matrix();
    let (n, m) = (discounted.asset_count(), discounted.state_count());
    let mut lp = LinearProgram::new(n);
    for t in 0..m {
        lp.constrain(
            b.iter().map(|row| row[t].clone()).collect(),
            Relation::Ge,
            Rational::zero(),
        );
    }
    lp.constrain(
        b.iter().map(|row| row.iter().sum()).collect(),
        Relation::Eq,
        Rational::one(),
    );
    let x = Portfolio::new(lp.solve().point()?);
    let profits = corresponding_scheme_payoff(&discounted, &x).ok()?;
    assert!(
        is_semipositive(&profits),
        "positive decision fails re-substitution"
    );
    Some(x)
}

/// Strictly positive state prices `psi` with `A psi = p`, if any exist.
///
/// Solves `max t` subject to `A psi = p` and `psi_s >= t` for every state.
/// The riskless row bounds `t` by `p_1 / m`, so the program is never
/// unbounded; a positive optimum yields the certificate.
pub fn state_prices(market: &Market) -> Option<Vec<Rational>> {
    let m = market.state_count();
    let t = m;
    let mut objective = vec![Rational::zero(); m + 1];
    objective[t] = Rational::one();
    let mut lp = LinearProgram::new(m + 1).maximize(objective);
    for (row, p) in market.payoffs.iter().zip(&market.prices) {
        let mut coeffs = row.clone();
        coeffs.push(Rational::zero());
        lp.constrain(coeffs, Relation::Eq, p.clone());
    }
    for s in 0..m {
        let mut coeffs = vec![Rational::zero(); m + 1];
        coeffs[s] = Rational::one();
        coeffs[t] = -Rational::one();
        lp.constrain(coeffs, Relation::Ge, Rational::zero());
    }
    match lp.solve() {
        LpOutcome::Optimal { mut point, value } if value.is_positive() => {
            point.truncate(m);
            assert!(point.iter().all(Signed::is_positive));
            assert_eq!(market.implied_prices(&point), market.prices);
            Some(point)
        }
        _ => None,
    }
}

/// Non-negative `psi` with `A psi = p`, if any exist.
pub fn nonnegative_state_prices(market: &Market) -> Option<Vec<Rational>> {
    let m = market.state_count();
    let mut lp = LinearProgram::new(m);
    for s in 0..m {
        lp = lp.nonnegative(s);
    }
    for (row, p) in market.payoffs.iter().zip(&market.prices) {
        lp.constrain(row.clone(), Relation::Eq, p.clone());
    }
    let psi = lp.solve().point()?;
    assert!(is_nonnegative(&psi));
    assert_eq!(market.implied_prices(&psi), market.prices);
    Some(psi)
}
