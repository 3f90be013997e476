//! Plain-text rendering for `--pretty` and the scheme CSV writer.

use coherence_core::rational::Tuple;
use coherence_core::{MatrixScheme, Rational};

use crate::input::NamedMarket;

pub fn tuple(values: &[Rational]) -> String {
    Tuple(values).to_string()
}

fn render(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            s.push_str(&format!("{cell:>width$}", width = widths[i]));
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().take(cols).map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(&rule).replace(" | ", "-+-"));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

/// Acts as rows, states as columns.
pub fn scheme_table(scheme: &MatrixScheme) -> String {
    let mut header = vec!["act".to_string()];
    header.extend((0..scheme.state_count()).map(|s| format!("state_{s}")));
    let rows: Vec<Vec<String>> = scheme
        .acts()
        .iter()
        .enumerate()
        .map(|(i, act)| {
            let mut row = vec![format!("d{i}")];
            row.extend(act.iter().map(ToString::to_string));
            row
        })
        .collect();
    render(&header, &rows)
}

pub fn market_table(named: &NamedMarket) -> String {
    let mut header = vec!["asset".to_string(), "price".to_string()];
    header.extend(named.states.iter().cloned());
    let market = &named.market;
    let rows: Vec<Vec<String>> = named
        .assets
        .iter()
        .zip(market.payoffs())
        .zip(market.prices())
        .map(|((name, payoffs), price)| {
            let mut row = vec![name.clone(), price.to_string()];
            row.extend(payoffs.iter().map(ToString::to_string));
            row
        })
        .collect();
    render(&header, &rows)
}

/// Scheme CSV with a `state_i` header row.
pub fn scheme_csv(scheme: &MatrixScheme) -> String {
    let header: Vec<String> = (0..scheme.state_count())
        .map(|s| format!("state_{s}"))
        .collect();
    let mut out = header.join(",") + "\n";
    for act in scheme.acts() {
        let cells: Vec<String> = act.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
