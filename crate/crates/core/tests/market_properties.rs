use coherence_core::market::{
    find_arbitrage_undiscounted, find_weak_arbitrage_undiscounted, nonnegative_state_prices,
};
use coherence_core::rational::{int, ratio};
use coherence_core::{
    corresponding_scheme_payoff, discount_prices, find_arbitrage, find_weak_arbitrage, leverage,
    positive_decision_exists, state_prices, validate_market, ArbitrageKind, Market, MatrixScheme,
    Portfolio, Rational,
};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn pool() -> Vec<Rational> {
    vec![int(-1), int(0), ratio(1, 2), int(1), int(2), int(3)]
}

fn market_strategy() -> impl Strategy<Value = Market> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| {
        let entries = prop::collection::vec(prop::collection::vec(0..6usize, m), n - 1);
        let prices = prop::collection::vec(0..6usize, n - 1);
        let riskless = prop::sample::select(vec![ratio(1, 1), ratio(9, 10), ratio(1, 2)]);
        (entries, prices, riskless).prop_map(move |(rows, ps, p0)| {
            let pool = pool();
            let mut payoffs = vec![vec![int(1); m]];
            payoffs.extend(
                rows.iter()
                    .map(|r| r.iter().map(|&i| pool[i].clone()).collect()),
            );
            let mut prices = vec![p0];
            prices.extend(ps.iter().map(|&i| pool[i].clone()));
            validate_market(payoffs, prices).unwrap()
        })
    })
}

fn portfolio_strategy(n: usize) -> impl Strategy<Value = Portfolio> {
    prop::collection::vec((-3i64..=3, 1i64..=3), n)
        .prop_map(|v| Portfolio::new(v.into_iter().map(|(p, q)| ratio(p, q)).collect()))
}

fn semipositive(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative()) && v.iter().any(|x| x.is_positive())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn positive_decision_iff_arbitrage_and_leverage_roundtrip(market in market_strategy()) {
        let verdict = find_arbitrage(&market);
        let positive = positive_decision_exists(&market);
        prop_assert_eq!(verdict.is_arbitrage(), positive.is_some());
        if let Some(x) = positive {
            let d = discount_prices(&market);
            let xbar = leverage(&d, &x).unwrap();
            prop_assert!(d.cost(&xbar).unwrap().is_zero());
            let profits = corresponding_scheme_payoff(&d, &x).unwrap();
            prop_assert_eq!(d.cash_flows(&xbar).unwrap(), profits.clone());
            prop_assert!(semipositive(&profits));
            prop_assert_eq!(market.satisfies(&xbar, ArbitrageKind::StrongBranch1), Ok(true));
        }
    }

    #[test]
    fn witnesses_satisfy_their_branch(market in market_strategy()) {
        let verdict = find_arbitrage(&market);
        match (&verdict.kind, &verdict.witness) {
            (ArbitrageKind::None, None) => {}
            (kind, Some(x)) => prop_assert_eq!(market.satisfies(x, *kind), Ok(true)),
            other => prop_assert!(false, "malformed verdict {:?}", other),
        }
    }

    #[test]
    fn arbitrage_profit_dominates_zero(market in market_strategy()) {
        if let Some(x) = find_arbitrage(&market).witness {
            let d = corresponding_scheme_payoff(&discount_prices(&market), &x).unwrap();
            prop_assert!(semipositive(&d));
            let zero = vec![Rational::zero(); d.len()];
            let pair = MatrixScheme::from_acts(vec![d, zero]).unwrap();
            prop_assert!(pair.contains_uncertainty().is_none());
            prop_assert!(pair.dominates(1, 0).unwrap());
        }
    }

    #[test]
    fn dominated_profits_imply_arbitrage_and_otherwise_cross(
        market in market_strategy(),
        seeds in prop::collection::vec(portfolio_strategy(4), 2..8),
    ) {
        let d = discount_prices(&market);
        let n = market.asset_count();
        let xs: Vec<Portfolio> = seeds
            .into_iter()
            .map(|p| Portfolio::new(p.holdings[..n].to_vec()))
            .collect();
        let profits: Vec<Vec<Rational>> =
            xs.iter().map(|x| corresponding_scheme_payoff(&d, x).unwrap()).collect();
        let arbitrage = find_arbitrage(&market).is_arbitrage();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if profits[i] == profits[j] {
                    continue;
                }
                let pair = MatrixScheme::from_acts(vec![profits[i].clone(), profits[j].clone()]).unwrap();
                if pair.dominates(0, 1).unwrap() {
                    let diff = xs[j].minus(&xs[i]);
                    prop_assert!(semipositive(&corresponding_scheme_payoff(&d, &diff).unwrap()));
                    prop_assert!(positive_decision_exists(&market).is_some());
                    prop_assert!(arbitrage);
                }
                if !arbitrage {
                    prop_assert!(pair.contains_uncertainty().is_some());
                }
            }
        }
    }

    #[test]
    fn certificates_exclude_each_other(market in market_strategy()) {
        let verdict = find_arbitrage(&market);
        if let Some(psi) = state_prices(&market) {
            prop_assert!(psi.iter().all(Signed::is_positive));
            prop_assert_eq!(market.implied_prices(&psi), market.prices().to_vec());
            prop_assert!(!verdict.is_arbitrage());
        }
        if let Some(x) = &verdict.witness {
            // a positive psi pricing the market would make psi . (A^T x) > 0 >= p . x
            prop_assert!(state_prices(&market).is_none());
            prop_assert!(market.cost(x).unwrap() <= Rational::zero());
        }
        // converse, taken as a solver cross-check
        if !verdict.is_arbitrage() {
            prop_assert_eq!(verdict.state_prices.clone(), state_prices(&market));
            prop_assert!(verdict.state_prices.is_some());
        }
    }

    #[test]
    fn arbitrage_is_homogeneous(market in market_strategy(), k in 1i64..=5, q in 1i64..=4) {
        let verdict = find_arbitrage(&market);
        if let Some(x) = verdict.witness {
            let scaled = x.scaled(&ratio(k, q));
            prop_assert_eq!(market.satisfies(&scaled, verdict.kind), Ok(true));
        }
    }

    #[test]
    fn weak_arbitrage_is_strong_arbitrage(market in market_strategy()) {
        let weak = find_weak_arbitrage(&market);
        match &weak.witness {
            Some(x) => {
                prop_assert_eq!(weak.kind, ArbitrageKind::StrongBranch2);
                prop_assert_ne!(market.classify(x).unwrap(), ArbitrageKind::None);
                prop_assert!(find_arbitrage(&market).is_arbitrage());
                prop_assert!(nonnegative_state_prices(&market).is_none());
            }
            None => {
                let psi = weak.nonnegative_state_prices.clone().unwrap();
                prop_assert!(psi.iter().all(|v| !v.is_negative()));
                prop_assert_eq!(market.implied_prices(&psi), market.prices().to_vec());
            }
        }
    }

    #[test]
    fn discounting_never_changes_the_classification(market in market_strategy()) {
        // prices scale by one positive factor, so every sign condition survives
        let raw = find_arbitrage_undiscounted(&market);
        let discounted = find_arbitrage(&market);
        prop_assert_eq!(raw.kind, discounted.kind);
        prop_assert_eq!(
            find_weak_arbitrage_undiscounted(&market).kind,
            find_weak_arbitrage(&market).kind
        );
        if let Some(x) = raw.witness {
            prop_assert_eq!(discount_prices(&market).satisfies(&x, raw.kind), Ok(true));
        }
    }

    #[test]
    fn profits_are_linear(market in market_strategy(), a in portfolio_strategy(4), b in portfolio_strategy(4)) {
        let n = market.asset_count();
        let (a, b) = (Portfolio::new(a.holdings[..n].to_vec()), Portfolio::new(b.holdings[..n].to_vec()));
        let pa = corresponding_scheme_payoff(&market, &a).unwrap();
        let pb = corresponding_scheme_payoff(&market, &b).unwrap();
        let sum = Portfolio::new(a.holdings.iter().zip(&b.holdings).map(|(x, y)| x + y).collect());
        let ps = corresponding_scheme_payoff(&market, &sum).unwrap();
        let expected: Vec<Rational> = pa.iter().zip(&pb).map(|(x, y)| x + y).collect();
        prop_assert_eq!(ps, expected);
    }
}

#[test]
fn discounting_leaves_a_discount_bond_market_arbitrage_free() {
    let m = validate_market(vec![vec![int(1), int(1)]], vec![ratio(1, 2)]).unwrap();
    assert_eq!(find_arbitrage(&m).kind, ArbitrageKind::None);
    assert_eq!(find_arbitrage_undiscounted(&m).kind, ArbitrageKind::None);
    // the profit-vector route needs the discounted prices: raw B = [1/2, 1/2] is positive
    assert!(positive_decision_exists(&m).is_none());
    let raw_profit = corresponding_scheme_payoff(&m, &Portfolio::new(vec![int(1)])).unwrap();
    assert_eq!(raw_profit, vec![ratio(1, 2), ratio(1, 2)]);
}
