//! Uncertainty in finite matrix decision schemes and arbitrage in
//! one-period markets with a riskless asset, decided exactly over the
//! rationals.
//!
//! * [`scheme`]: domination, crossing-pair uncertainty test, projections.
//! * [`market`]: arbitrage search, self-financing (leverage) transform,
//!   state prices.
//! * [`lp`]: the exact simplex kernel behind the market searches.
//! * [`oracle`]: enumeration-based and sampling-based cross-checks plus
//!   seeded market generators.

pub mod lp;
pub mod market;
pub mod oracle;
pub mod rational;
pub mod scheme;

pub use market::{
    corresponding_scheme_payoff, discount_prices, find_arbitrage, find_weak_arbitrage, leverage,
    positive_decision_exists, state_prices, validate_market, ArbitrageKind, ArbitrageVerdict,
    Market, MarketError, Portfolio,
};
pub use rational::{parse_rational, ParseRationalError, Rational};
pub use scheme::{MatrixScheme, Ranking, SchemeError, UncertaintyWitness};
