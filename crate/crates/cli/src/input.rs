//! Scheme CSV and market JSON ingestion.

use std::fmt;

use coherence_core::{parse_rational, validate_market, Market, MatrixScheme, Portfolio, Rational};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl InputError {
    /// 2 for unreadable or malformed input, 3 for well-formed input that
    /// violates a domain invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            InputError::Io { .. } | InputError::Parse { .. } => 2,
            InputError::Invalid(_) => 3,
        }
    }
}

/// Rows of rationals from comma-separated text. Blank lines are skipped.
/// Returns each row with its 1-based line number.
fn parse_rows(text: &str) -> Result<Vec<(usize, Vec<Rational>)>, InputError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut column = 1;
        let mut row = Vec::new();
        for field in line.split(',') {
            let value = parse_rational(field).map_err(|e| InputError::Parse {
                line: idx + 1,
                column,
                message: e.to_string(),
            })?;
            row.push(value);
            column += field.chars().count() + 1;
        }
        rows.push((idx + 1, row));
    }
    Ok(rows)
}

fn is_header(line: &str) -> bool {
    line.split(',')
        .enumerate()
        .all(|(i, f)| f.trim() == format!("state_{i}"))
}

fn check_widths(rows: &[(usize, Vec<Rational>)], width: usize) -> Result<(), InputError> {
    match rows.iter().find(|(_, r)| r.len() != width) {
        Some((line, row)) => Err(InputError::Parse {
            line: *line,
            column: 1,
            message: format!("expected {width} fields, found {}", row.len()),
        }),
        None => Ok(()),
    }
}

/// One act per row, one state per column, with an optional
/// `state_0,...,state_{m-1}` header.
pub fn parse_scheme_csv(text: &str) -> Result<MatrixScheme, InputError> {
    let first = text.lines().enumerate().find(|(_, l)| !l.trim().is_empty());
    let (header_width, body) = match first {
        Some((idx, line)) if is_header(line) => {
            let rest: String = text
                .lines()
                .enumerate()
                .map(|(i, l)| if i <= idx { "" } else { l })
                .collect::<Vec<_>>()
                .join("\n");
            (Some(line.split(',').count()), rest)
        }
        _ => (None, text.to_string()),
    };
    let rows = parse_rows(&body)?;
    let width = header_width.or_else(|| rows.first().map(|(_, r)| r.len()));
    if let Some(width) = width {
        check_widths(&rows, width)?;
    }
    let acts = rows.into_iter().map(|(_, r)| r).collect();
    MatrixScheme::new(width.unwrap_or(1), acts).map_err(|e| InputError::Invalid(e.to_string()))
}

/// Portfolio rows for a market with `assets` assets.
pub fn parse_portfolios_csv(text: &str, assets: usize) -> Result<Vec<Portfolio>, InputError> {
    let rows = parse_rows(text)?;
    check_widths(&rows, assets)?;
    Ok(rows.into_iter().map(|(_, r)| Portfolio::new(r)).collect())
}

/// A JSON cell holding a rational: a `"p/q"` string or an integer number.
struct Cell(Rational);

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct CellVisitor;

        impl Visitor<'_> for CellVisitor {
            type Value = Cell;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Cell, E> {
                parse_rational(v).map(Cell).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cell, E> {
                Ok(Cell(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cell, E> {
                Ok(Cell(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cell, E> {
                Err(E::custom(format!(
                    "non-integer number {v}; write it as a \"p/q\" string"
                )))
            }
        }

        d.deserialize_any(CellVisitor)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AssetEntry {
    Name(String),
    Flagged {
        name: String,
        #[serde(default)]
        riskless: bool,
    },
}

impl AssetEntry {
    fn name(&self) -> &str {
        match self {
            AssetEntry::Name(n) | AssetEntry::Flagged { name: n, .. } => n,
        }
    }

    fn riskless(&self) -> bool {
        match self {
            AssetEntry::Name(n) => n == "bond",
            AssetEntry::Flagged { name, riskless } => *riskless || name == "bond",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketFile {
    assets: Vec<AssetEntry>,
    states: Vec<String>,
    payoffs: Vec<Vec<Cell>>,
    prices: Vec<Cell>,
}

/// A parsed market together with its asset and state names.
#[derive(Debug, Clone)]
pub struct NamedMarket {
    pub market: Market,
    pub assets: Vec<String>,
    pub states: Vec<String>,
}

pub fn parse_market_json(text: &str) -> Result<NamedMarket, InputError> {
    let file: MarketFile = serde_json::from_str(text).map_err(|e| InputError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match file.assets.first() {
        None => return Err(InputError::Invalid("market lists no assets".into())),
        Some(first) if !first.riskless() => {
            return Err(InputError::Invalid(format!(
                "first asset `{}` must be named \"bond\" or flagged riskless",
                first.name()
            )))
        }
        _ => {}
    }
    if let Some(extra) = file.assets.iter().skip(1).find(|a| a.riskless()) {
        return Err(InputError::Invalid(format!(
            "only the first asset may be riskless, found `{}`",
            extra.name()
        )));
    }
    if file.assets.len() != file.payoffs.len() {
        return Err(InputError::Invalid(format!(
            "{} assets named but {} payoff rows given",
            file.assets.len(),
            file.payoffs.len()
        )));
    }
    if let Some(row) = file
        .payoffs
        .iter()
        .position(|r| r.len() != file.states.len())
    {
        return Err(InputError::Invalid(format!(
            "payoff row {row} has {} entries for {} states",
            file.payoffs[row].len(),
            file.states.len()
        )));
    }
    let payoffs = file
        .payoffs
        .into_iter()
        .map(|r| r.into_iter().map(|c| c.0).collect())
        .collect();
    let prices = file.prices.into_iter().map(|c| c.0).collect();
    let market =
        validate_market(payoffs, prices).map_err(|e| InputError::Invalid(e.to_string()))?;
    Ok(NamedMarket {
        market,
        assets: file.assets.iter().map(|a| a.name().to_string()).collect(),
        states: file.states,
    })
}
