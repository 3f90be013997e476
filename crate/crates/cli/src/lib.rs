//! Command-line front end.
//!
//! Commands write one JSON [`VerdictReport`] to stdout and diagnostics to
//! stderr. Exit codes depend only on the outcome class: 0 decided,
//! 2 unreadable or malformed input, 3 input violating a domain invariant,
//! 4 internal inconsistency between independent procedures.

pub mod input;
pub mod report;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use coherence_core::market::{
    find_arbitrage_undiscounted, find_weak_arbitrage_undiscounted, nonnegative_state_prices,
};
use coherence_core::oracle::check_equivalence_with;
use coherence_core::{
    corresponding_scheme_payoff, discount_prices, find_arbitrage, find_weak_arbitrage,
    ArbitrageKind, ArbitrageVerdict, Market, MatrixScheme, Portfolio,
};

use crate::input::{parse_market_json, parse_portfolios_csv, parse_scheme_csv, InputError};
use crate::report::{digest, Verdict, VerdictReport, Witness};

pub const EXIT_DECIDED: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "coherence",
    version,
    about = "Uncertainty in decision schemes and arbitrage in markets, decided exactly"
)]
pub struct Cli {
    /// Print a human-readable table before the report, and indent the JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Report elapsed_ms as 0 so reports are byte-stable across runs.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a scheme CSV contains uncertainty.
    CheckScheme { path: PathBuf },
    /// Decide whether a market JSON admits an arbitrage portfolio.
    CheckMarket {
        path: PathBuf,
        /// Only look for portfolios with negative cost and no losses.
        #[arg(long)]
        weak: bool,
        /// Search on raw prices instead of discounting first.
        #[arg(long)]
        no_discount: bool,
    },
    /// Build one projection, and a second disagreeing one if it is not unique.
    Projections { path: PathBuf },
    /// Compute the profit matrix B = A - [p ... p] and portfolio profits.
    CorrespondingScheme {
        path: PathBuf,
        /// CSV of portfolios, one per row.
        #[arg(long)]
        portfolios: Option<PathBuf>,
        /// Write the profit vectors as a scheme CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_discount: bool,
    },
    /// Cross-check the LP detector against the profit-vector route.
    Verify {
        path: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub type Detector = fn(&Market) -> ArbitrageVerdict;

pub fn run(cli: &Cli) -> Outcome {
    run_with(cli, find_arbitrage)
}

/// Runs `cli` with `detector` standing in for the arbitrage search used by
/// `verify`.
pub fn run_with(cli: &Cli, detector: Detector) -> Outcome {
    let started = Instant::now();
    let mut out = Outcome {
        code: EXIT_DECIDED,
        stdout: String::new(),
        stderr: String::new(),
    };
    let result = match &cli.command {
        Command::CheckScheme { path } => check_scheme(path, &mut out),
        Command::CheckMarket {
            path,
            weak,
            no_discount,
        } => check_market(path, *weak, *no_discount, &mut out),
        Command::Projections { path } => projections(path, &mut out),
        Command::CorrespondingScheme {
            path,
            portfolios,
            out: csv_out,
            no_discount,
        } => corresponding_scheme(
            path,
            portfolios.as_deref(),
            csv_out.as_deref(),
            *no_discount,
            &mut out,
        ),
        Command::Verify {
            path,
            samples,
            seed,
        } => verify(path, *samples, *seed, detector, &mut out),
    };
    match result {
        Ok(mut report) => {
            report.elapsed_ms = if cli.no_timing {
                0
            } else {
                started.elapsed().as_millis() as u64
            };
            let json = if cli.pretty {
                serde_json::to_string_pretty(&report)
            } else {
                serde_json::to_string(&report)
            }
            .expect("reports serialize");
            if !cli.pretty {
                out.stdout.clear();
            }
            out.stdout.push_str(&json);
            out.stdout.push('\n');
        }
        Err(e) => {
            out.code = e.exit_code();
            out.stdout.clear();
            out.stderr.push_str(&format!("error: {e}\n"));
        }
    }
    out
}

fn read(path: &Path) -> Result<Vec<u8>, InputError> {
    fs::read(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn utf8(path: &Path, bytes: &[u8]) -> Result<String, InputError> {
    String::from_utf8(bytes.to_vec())
        .map_err(|e| InputError::Invalid(format!("{}: not UTF-8: {e}", path.display())))
}

fn load_scheme(path: &Path) -> Result<(MatrixScheme, String), InputError> {
    let bytes = read(path)?;
    let scheme = parse_scheme_csv(&utf8(path, &bytes)?)?;
    Ok((scheme, digest(&[&bytes])))
}

fn report(
    command: &str,
    input_digest: String,
    verdict: Verdict,
    witness: Option<Witness>,
) -> VerdictReport {
    VerdictReport {
        command: command.to_string(),
        input_digest,
        verdict,
        witness,
        elapsed_ms: 0,
    }
}

fn check_scheme(path: &Path, out: &mut Outcome) -> Result<VerdictReport, InputError> {
    let (scheme, input_digest) = load_scheme(path)?;
    let witness = scheme.contains_uncertainty();
    out.stdout.push_str(&table::scheme_table(&scheme));
    let verdict = if witness.is_some() {
        Verdict::Uncertainty
    } else {
        Verdict::NoUncertainty
    };
    Ok(report(
        "check-scheme",
        input_digest,
        verdict,
        witness.map(Witness::Uncertainty),
    ))
}

fn projections(path: &Path, out: &mut Outcome) -> Result<VerdictReport, InputError> {
    let (scheme, input_digest) = load_scheme(path)?;
    out.stdout.push_str(&table::scheme_table(&scheme));
    let (verdict, rankings, crossing) = match scheme.build_two_distinct_projections() {
        Some((first, second)) => (
            Verdict::Multiple,
            vec![first.ranks, second.ranks],
            scheme.contains_uncertainty(),
        ),
        None => (Verdict::Unique, vec![scheme.build_projection().ranks], None),
    };
    for (i, r) in rankings.iter().enumerate() {
        out.stdout
            .push_str(&format!("projection {i}: ranks {r:?}\n"));
    }
    if verdict == Verdict::Unique {
        out.stdout.push_str("projection is unique\n");
    }
    Ok(report(
        "projections",
        input_digest,
        verdict,
        Some(Witness::Rankings { rankings, crossing }),
    ))
}

fn portfolio_witness(market: &Market, kind: ArbitrageKind, x: Portfolio) -> Witness {
    Witness::Portfolio {
        branch: kind,
        cost: market.cost(&x).expect("sized to market"),
        cash_flows: market.cash_flows(&x).expect("sized to market"),
        holdings: x.holdings,
    }
}

fn check_market(
    path: &Path,
    weak: bool,
    no_discount: bool,
    out: &mut Outcome,
) -> Result<VerdictReport, InputError> {
    let bytes = read(path)?;
    let named = parse_market_json(&utf8(path, &bytes)?)?;
    let market = &named.market;
    out.stdout.push_str(&table::market_table(&named));
    let verdict = match (weak, no_discount) {
        (false, false) => find_arbitrage(market),
        (false, true) => find_arbitrage_undiscounted(market),
        (true, false) => find_weak_arbitrage(market),
        (true, true) => find_weak_arbitrage_undiscounted(market),
    };
    let (label, witness) = match (verdict.kind, verdict.witness) {
        (ArbitrageKind::None, _) => {
            let prices = match (verdict.state_prices, verdict.nonnegative_state_prices) {
                (Some(psi), _) => Some(Witness::StatePrices {
                    strict: true,
                    state_prices: psi,
                }),
                (None, Some(psi)) => Some(Witness::StatePrices {
                    strict: false,
                    state_prices: psi,
                }),
                (None, None) if weak => {
                    nonnegative_state_prices(market).map(|psi| Witness::StatePrices {
                        strict: false,
                        state_prices: psi,
                    })
                }
                (None, None) => None,
            };
            let label = if weak {
                Verdict::NoWeakArbitrage
            } else {
                Verdict::NoArbitrage
            };
            (label, prices)
        }
        (kind, Some(x)) => {
            let label = if weak {
                Verdict::WeakArbitrage
            } else {
                Verdict::Arbitrage
            };
            (label, Some(portfolio_witness(market, kind, x)))
        }
        (_, None) => unreachable!("arbitrage verdicts always carry a witness"),
    };
    Ok(report("check-market", digest(&[&bytes]), label, witness))
}

fn corresponding_scheme(
    path: &Path,
    portfolios: Option<&Path>,
    csv_out: Option<&Path>,
    no_discount: bool,
    out: &mut Outcome,
) -> Result<VerdictReport, InputError> {
    let bytes = read(path)?;
    let named = parse_market_json(&utf8(path, &bytes)?)?;
    let market = if no_discount {
        named.market.clone()
    } else {
        discount_prices(&named.market)
    };
    let n = market.asset_count();
    let mut inputs = vec![bytes];
    let portfolios = match portfolios {
        Some(p) => {
            let pbytes = read(p)?;
            let parsed = parse_portfolios_csv(&utf8(p, &pbytes)?, n)?;
            inputs.push(pbytes);
            parsed
        }
        None => Vec::new(),
    };
    let profit_matrix = market.profit_matrix();
    let profits: Vec<Vec<_>> = portfolios
        .iter()
        .map(|x| corresponding_scheme_payoff(&market, x).expect("width checked"))
        .collect();
    let acts = if portfolios.is_empty() {
        profit_matrix.clone()
    } else {
        profits.clone()
    };
    let scheme = MatrixScheme::new(market.state_count(), acts).expect("widths match the market");
    if let Some(target) = csv_out {
        fs::write(target, table::scheme_csv(&scheme)).map_err(|source| InputError::Io {
            path: target.display().to_string(),
            source,
        })?;
    }
    out.stdout.push_str(&table::scheme_table(&scheme));
    let refs: Vec<&[u8]> = inputs.iter().map(Vec::as_slice).collect();
    Ok(report(
        "corresponding-scheme",
        digest(&refs),
        Verdict::Computed,
        Some(Witness::CorrespondingScheme {
            discounted: !no_discount,
            profit_matrix,
            portfolios: portfolios.into_iter().map(|p| p.holdings).collect(),
            profits,
        }),
    ))
}

fn verify(
    path: &Path,
    samples: usize,
    seed: u64,
    detector: Detector,
    out: &mut Outcome,
) -> Result<VerdictReport, InputError> {
    let bytes = read(path)?;
    let named = parse_market_json(&utf8(path, &bytes)?)?;
    let report_data = check_equivalence_with(&named.market, samples, seed, detector);
    let verdict = if report_data.consistent() {
        Verdict::Consistent
    } else {
        out.code = EXIT_INCONSISTENT;
        out.stderr.push_str(&format!(
            "inconsistent: detector says arbitrage={} with witness {:?}; profit-vector route says arbitrage={} with witness {:?}\n",
            report_data.procedure_a.arbitrage,
            report_data.procedure_a.witness.as_ref().map(|x| table::tuple(&x.holdings)),
            report_data.procedure_b.arbitrage,
            report_data.procedure_b.witness.as_ref().map(|x| table::tuple(&x.holdings)),
        ));
        if let Some(pair) = &report_data.contradiction {
            out.stderr.push_str(&format!(
                "sampled dominated pair: {} below {}\n",
                table::tuple(&pair.lower.holdings),
                table::tuple(&pair.upper.holdings)
            ));
        }
        Verdict::Inconsistent
    };
    out.stdout.push_str(&format!(
        "{} sampled pairs, {} dominated\n",
        report_data.sampled_pairs, report_data.dominated_pairs
    ));
    Ok(report(
        "verify",
        digest(&[&bytes]),
        verdict,
        Some(Witness::Equivalence(Box::new(report_data))),
    ))
}
