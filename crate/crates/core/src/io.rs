//! Reading trade matrices and markets, and writing CSV output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, RiskError};
use crate::market::{MarketOptions, OnePeriodMarket};
use crate::trade::TradeMatrix;

/// JSON layout of a trade matrix. Missing `probs` means uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub returns: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

/// JSON layout of a market; `S0` holds the risky prices only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketFile {
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "S0")]
    pub initial: Vec<f64>,
    pub scenarios: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_negative_prices: bool,
}

impl MarketFile {
    pub fn into_market(self) -> Result<OnePeriodMarket> {
        OnePeriodMarket::with_options(
            self.rate,
            self.initial,
            self.scenarios,
            self.probs,
            MarketOptions {
                allow_negative_prices: self.allow_negative_prices,
            },
        )
    }
}

/// Either kind of input file.
#[derive(Debug, Clone, PartialEq)]
pub enum GameInput {
    Matrix(TradeMatrix),
    Market(OnePeriodMarket),
}

impl GameInput {
    pub fn trade_matrix(&self) -> Result<TradeMatrix> {
        match self {
            GameInput::Matrix(t) => Ok(t.clone()),
            GameInput::Market(m) => m.build_trade_matrix(),
        }
    }
}

fn parse_error(what: &str, err: impl std::fmt::Display) -> RiskError {
    RiskError::InvalidInput(format!("cannot parse {what}: {err}"))
}

pub fn parse_matrix_json(text: &str) -> Result<TradeMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| parse_error("trade matrix", e))?;
    TradeMatrix::new(file.returns, file.probs)
}

pub fn parse_market_json(text: &str) -> Result<OnePeriodMarket> {
    let file: MarketFile = serde_json::from_str(text).map_err(|e| parse_error("market", e))?;
    file.into_market()
}

/// CSV with one row of returns per line; blank lines and `#` comments are skipped.
pub fn parse_matrix_csv(text: &str, probs: Option<Vec<f64>>) -> Result<TradeMatrix> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_number_list)
        .collect::<Result<Vec<_>>>()?;
    TradeMatrix::new(rows, probs)
}

/// Comma separated reals.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| parse_error(&format!("number '{}'", v.trim()), e))
        })
        .collect()
}

/// Detects a market (`"R"` key) or a trade matrix (`"returns"` key).
pub fn parse_game_json(text: &str) -> Result<GameInput> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error("input", e))?;
    if value.get("R").is_some() {
        Ok(GameInput::Market(parse_market_json(text)?))
    } else if value.get("returns").is_some() {
        Ok(GameInput::Matrix(parse_matrix_json(text)?))
    } else {
        Err(RiskError::InvalidInput(
            "input JSON needs either a \"returns\" or an \"R\" field".into(),
        ))
    }
}

/// Loads a matrix or market. `.csv` files are matrices; `probs` overrides the file's probabilities.
pub fn load_game(path: &Path, probs: Option<Vec<f64>>) -> Result<GameInput> {
    let text = fs::read_to_string(path)
        .map_err(|e| RiskError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        return Ok(GameInput::Matrix(parse_matrix_csv(&text, probs)?));
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| parse_error("input", e))?;
    if value.get("R").is_some() {
        let mut file: MarketFile = serde_json::from_value(value).map_err(|e| parse_error("market", e))?;
        if probs.is_some() {
            file.probs = probs;
        }
        return Ok(GameInput::Market(file.into_market()?));
    }
    let mut file: MatrixFile = serde_json::from_value(value).map_err(|e| parse_error("trade matrix", e))?;
    if probs.is_some() {
        file.probs = probs;
    }
    Ok(GameInput::Matrix(TradeMatrix::new(file.returns, file.probs)?))
}

pub fn matrix_to_json(matrix: &TradeMatrix) -> String {
    let file = MatrixFile {
        returns: matrix.to_rows(),
        probs: Some(matrix.probs().to_vec()),
    };
    serde_json::to_string_pretty(&file).expect("matrix serializes")
}

/// Shortest round-trip decimal form; infinities print as `inf` and `-inf`,
/// and negative zero prints as `0`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

/// `phi1,...,phiM,value`.
pub fn csv_header(dims: usize) -> String {
    let mut cols: Vec<String> = (1..=dims).map(|i| format!("phi{i}")).collect();
    cols.push("value".into());
    cols.join(",")
}
