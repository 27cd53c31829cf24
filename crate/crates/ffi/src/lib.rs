//! C ABI over `twr-risk`.
//!
//! Games and markets are opaque handles created by `*_new` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`TwrStatus`]; on failure [`twr_last_error_message`] describes the error
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twr_risk::io::{parse_game_json, GameInput};
use twr_risk::surface::converge;
use twr_risk::{
    ArbitrageCheck, Certificate, Direction, Game, MarketOptions, MeasureKind, OnePeriodMarket, Portfolio,
    PortionVector, RiskError, TradeMatrix, DEFAULT_BUDGET,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwrStatus {
    Ok = 0,
    InvalidInput = 1,
    NullPointer = 2,
    DimensionMismatch = 3,
    IndexOutOfRange = 4,
    NotInterior = 5,
    Inadmissible = 6,
    BudgetExceeded = 7,
    Solver = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwrMeasure {
    Down = 0,
    DownX = 1,
    DownFirstApprox = 2,
    Cur = 3,
    CurX = 4,
    CurFirstApprox = 5,
    UpExpect = 6,
    RunupExpect = 7,
}

impl From<TwrMeasure> for MeasureKind {
    fn from(m: TwrMeasure) -> Self {
        match m {
            TwrMeasure::Down => MeasureKind::Down,
            TwrMeasure::DownX => MeasureKind::DownX,
            TwrMeasure::DownFirstApprox => MeasureKind::DownFirstApprox,
            TwrMeasure::Cur => MeasureKind::Cur,
            TwrMeasure::CurX => MeasureKind::CurX,
            TwrMeasure::CurFirstApprox => MeasureKind::CurFirstApprox,
            TwrMeasure::UpExpect => MeasureKind::UpExpect,
            TwrMeasure::RunupExpect => MeasureKind::RunupExpect,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwrCertificateKind {
    /// `y > 0` with `Tᵀy = 0`, one entry per row.
    PositiveKernel = 0,
    /// `θ` with `Tθ >= 0`, one entry per column.
    RiskFreeDirection = 1,
    Inconclusive = 2,
}

/// Outcome of the no-risk-free check. `certificate_len` is the full length
/// even when the caller's buffer was shorter.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TwrCheck {
    pub holds: bool,
    pub rank: usize,
    pub kind: TwrCertificateKind,
    pub certificate_len: usize,
}

/// Path expectations of the five log series.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TwrExpectations {
    pub log_twr: f64,
    pub up: f64,
    pub down: f64,
    pub current_drawdown: f64,
    pub run_up: f64,
}

/// Trade matrix with a number of draws and an enumeration budget.
pub struct TwrGame {
    matrix: TradeMatrix,
    draws: usize,
    budget: u64,
}

impl TwrGame {
    fn game(&self) -> Result<Game<'_>, Failure> {
        Ok(Game::new(&self.matrix, self.draws)?.with_budget(self.budget))
    }
}

/// One-period market of a bond and risky assets.
pub struct TwrMarket {
    market: OnePeriodMarket,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0} is a null pointer")]
    Null(&'static str),
    #[error("{0} is not valid UTF-8")]
    Utf8(&'static str),
    #[error(transparent)]
    Risk(#[from] RiskError),
}

impl Failure {
    fn status(&self) -> TwrStatus {
        match self {
            Failure::Null(_) => TwrStatus::NullPointer,
            Failure::Utf8(_) => TwrStatus::InvalidInput,
            Failure::Risk(e) => match e {
                RiskError::InvalidInput(_) => TwrStatus::InvalidInput,
                RiskError::IndexOutOfRange { .. } => TwrStatus::IndexOutOfRange,
                RiskError::DimensionMismatch { .. } => TwrStatus::DimensionMismatch,
                RiskError::NotInterior { .. } => TwrStatus::NotInterior,
                RiskError::Inadmissible { .. } => TwrStatus::Inadmissible,
                RiskError::BudgetExceeded { .. } => TwrStatus::BudgetExceeded,
                RiskError::Solver(_) => TwrStatus::Solver,
            },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TwrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TwrStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            e.status()
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TwrStatus::Panic
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn optional(ptr: *const f64, len: usize) -> Option<Vec<f64>> {
    (!ptr.is_null()).then(|| std::slice::from_raw_parts(ptr, len).to_vec())
}

unsafe fn reference<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(ptr: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    ptr.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, capacity: usize) {
    if !dst.is_null() {
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len().min(capacity));
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn twr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a game from a row-major `rows x cols` return matrix. `probs` may be
/// NULL for uniform probabilities.
///
/// # Safety
/// `returns` must hold `rows * cols` doubles, `probs` (if not NULL) `rows`
/// doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_game_new(
    returns: *const f64,
    rows: usize,
    cols: usize,
    probs: *const f64,
    draws: usize,
    out: *mut *mut TwrGame,
) -> TwrStatus {
    guard(|| {
        let data = slice(returns, rows.saturating_mul(cols), "returns")?.to_vec();
        let probs = optional(probs, rows).unwrap_or_else(|| vec![1.0 / rows.max(1) as f64; rows]);
        let matrix = TradeMatrix::from_flat(data, rows, cols, probs)?;
        Game::new(&matrix, draws)?;
        write(out, Box::into_raw(Box::new(TwrGame { matrix, draws, budget: DEFAULT_BUDGET })), "out")
    })
}

/// Creates a game from a trade matrix or market JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn twr_game_from_json(json: *const c_char, draws: usize, out: *mut *mut TwrGame) -> TwrStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Failure::Utf8("json"))?;
        let matrix = match parse_game_json(text)? {
            GameInput::Matrix(m) => m,
            GameInput::Market(m) => m.build_trade_matrix()?,
        };
        Game::new(&matrix, draws)?;
        write(out, Box::into_raw(Box::new(TwrGame { matrix, draws, budget: DEFAULT_BUDGET })), "out")
    })
}

/// # Safety
/// `game` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn twr_game_free(game: *mut TwrGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn twr_game_set_budget(game: *mut TwrGame, budget: u64) -> TwrStatus {
    guard(|| {
        game.as_mut().ok_or(Failure::Null("game"))?.budget = budget;
        Ok(())
    })
}

/// Number of return rows, or 0 for NULL.
///
/// # Safety
/// `game` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn twr_game_rows(game: *const TwrGame) -> usize {
    game.as_ref().map_or(0, |g| g.matrix.rows())
}

/// Number of trading systems, or 0 for NULL.
///
/// # Safety
/// `game` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn twr_game_cols(game: *const TwrGame) -> usize {
    game.as_ref().map_or(0, |g| g.matrix.cols())
}

/// Value of a measure at `phi`.
///
/// # Safety
/// `phi` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_game_evaluate(
    game: *const TwrGame,
    measure: TwrMeasure,
    phi: *const f64,
    len: usize,
    out: *mut f64,
) -> TwrStatus {
    guard(|| {
        let g = reference(game, "game")?;
        let phi = PortionVector::new(slice(phi, len, "phi")?.to_vec());
        let value = g.game()?.evaluate(measure.into(), &phi)?;
        write(out, value, "out")
    })
}

/// First approximation or up-side expectation at `s θ` together with the
/// flag telling whether it is exact there. `θ` is normalized internally.
///
/// # Safety
/// `theta` must hold `len` doubles; `value` and `small_s_regime` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_game_approximation(
    game: *const TwrGame,
    measure: TwrMeasure,
    s: f64,
    theta: *const f64,
    len: usize,
    value: *mut f64,
    small_s_regime: *mut bool,
) -> TwrStatus {
    guard(|| {
        let g = reference(game, "game")?;
        let theta = Direction::new(slice(theta, len, "theta")?.to_vec())?;
        let game = g.game()?;
        let approx = match measure {
            TwrMeasure::DownFirstApprox => game.d_first_approx(s, &theta)?,
            TwrMeasure::CurFirstApprox => game.d_cur_first_approx(s, &theta)?,
            TwrMeasure::UpExpect => game.u_expect(s, &theta)?,
            TwrMeasure::RunupExpect => game.u_run_expect(s, &theta)?,
            other => {
                return Err(RiskError::InvalidInput(format!(
                    "{} is not an approximation",
                    MeasureKind::from(other)
                ))
                .into())
            }
        };
        write(value, approx.value, "value")?;
        write(small_s_regime, approx.small_s_regime, "small_s_regime")
    })
}

/// Expectations of the log series at an interior `phi`.
///
/// # Safety
/// `phi` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_game_expectations(
    game: *const TwrGame,
    phi: *const f64,
    len: usize,
    out: *mut TwrExpectations,
) -> TwrStatus {
    guard(|| {
        let g = reference(game, "game")?;
        let phi = PortionVector::new(slice(phi, len, "phi")?.to_vec());
        let e = g.game()?.path_expectations(&phi)?;
        let value = TwrExpectations {
            log_twr: e.log_twr,
            up: e.up,
            down: e.down,
            current_drawdown: e.current_drawdown,
            run_up: e.run_up,
        };
        write(out, value, "out")
    })
}

/// Current-drawdown measure for `K = 1..=k_max`, written to `out[0..k_max]`.
///
/// # Safety
/// `phi` must hold `len` doubles and `out` must have room for `k_max` doubles.
#[no_mangle]
pub unsafe extern "C" fn twr_game_converge(
    game: *const TwrGame,
    phi: *const f64,
    len: usize,
    k_max: usize,
    out: *mut f64,
) -> TwrStatus {
    guard(|| {
        let g = reference(game, "game")?;
        let phi = PortionVector::new(slice(phi, len, "phi")?.to_vec());
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let values: Vec<f64> = converge(&g.matrix, &phi, k_max, g.budget)?.iter().map(|p| p.value).collect();
        copy_out(&values, out, k_max);
        Ok(())
    })
}

/// Rank and no-risk-free verdict. Up to `capacity` certificate entries are
/// copied to `certificate`, which may be NULL.
///
/// # Safety
/// `certificate` must have room for `capacity` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_game_check_no_risk_free(
    game: *const TwrGame,
    out: *mut TwrCheck,
    certificate: *mut f64,
    capacity: usize,
) -> TwrStatus {
    guard(|| {
        let g = reference(game, "game")?;
        let check = g.matrix.check_no_risk_free();
        let (kind, values) = match &check.certificate {
            Certificate::PositiveKernel(y) => (TwrCertificateKind::PositiveKernel, y.as_slice()),
            Certificate::RiskFreeDirection(t) => (TwrCertificateKind::RiskFreeDirection, t.as_slice()),
            Certificate::Inconclusive => (TwrCertificateKind::Inconclusive, &[][..]),
        };
        copy_out(values, certificate, capacity);
        let summary = TwrCheck {
            holds: check.holds,
            rank: check.rank,
            kind,
            certificate_len: values.len(),
        };
        write(out, summary, "out")
    })
}

/// Creates a market. `initial` holds the risky prices, `scenarios` is
/// row-major `scenario_count x assets`, `probs` may be NULL for uniform.
///
/// # Safety
/// Pointers must hold the stated number of doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_market_new(
    rate: f64,
    initial: *const f64,
    assets: usize,
    scenarios: *const f64,
    scenario_count: usize,
    probs: *const f64,
    allow_negative_prices: bool,
    out: *mut *mut TwrMarket,
) -> TwrStatus {
    guard(|| {
        let initial = slice(initial, assets, "initial")?.to_vec();
        let flat = slice(scenarios, scenario_count.saturating_mul(assets), "scenarios")?;
        let rows = flat.chunks(assets.max(1)).map(<[f64]>::to_vec).collect();
        let market = OnePeriodMarket::with_options(
            rate,
            initial,
            rows,
            optional(probs, scenario_count),
            MarketOptions { allow_negative_prices },
        )?;
        write(out, Box::into_raw(Box::new(TwrMarket { market })), "out")
    })
}

/// # Safety
/// `market` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn twr_market_free(market: *mut TwrMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Game on the market's trade return matrix.
///
/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn twr_market_game(market: *const TwrMarket, draws: usize, out: *mut *mut TwrGame) -> TwrStatus {
    guard(|| {
        let matrix = reference(market, "market")?.market.build_trade_matrix()?;
        Game::new(&matrix, draws)?;
        write(out, Box::into_raw(Box::new(TwrGame { matrix, draws, budget: DEFAULT_BUDGET })), "out")
    })
}

/// Arbitrage check. On arbitrage, up to `capacity` entries of the risky
/// holdings `x̂` are copied to `certificate`.
///
/// # Safety
/// `certificate` must have room for `capacity` doubles; `arbitrage_free` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_market_check_arbitrage(
    market: *const TwrMarket,
    arbitrage_free: *mut bool,
    certificate: *mut f64,
    capacity: usize,
) -> TwrStatus {
    guard(|| {
        let m = reference(market, "market")?;
        match m.market.check_arbitrage()? {
            ArbitrageCheck::NoArbitrage => write(arbitrage_free, true, "arbitrage_free"),
            ArbitrageCheck::Arbitrage(x) => {
                copy_out(&x, certificate, capacity);
                write(arbitrage_free, false, "arbitrage_free")
            }
        }
    })
}

/// Portion vector of a portfolio `(x_0, x_1, ..., x_M)` including the bond.
///
/// # Safety
/// `portfolio` must hold `len` doubles and `out` must have room for `len - 1`.
#[no_mangle]
pub unsafe extern "C" fn twr_market_portions(
    market: *const TwrMarket,
    portfolio: *const f64,
    len: usize,
    out: *mut f64,
) -> TwrStatus {
    guard(|| {
        let m = reference(market, "market")?;
        let x = Portfolio(slice(portfolio, len, "portfolio")?.to_vec());
        let phi = m.market.portfolio_to_portions(&x)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        copy_out(phi.as_slice(), out, phi.len());
        Ok(())
    })
}

/// Expected log growth of a unit-cost portfolio over the bond.
///
/// # Safety
/// `portfolio` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twr_market_log_utility(
    market: *const TwrMarket,
    portfolio: *const f64,
    len: usize,
    out: *mut f64,
) -> TwrStatus {
    guard(|| {
        let m = reference(market, "market")?;
        let x = Portfolio(slice(portfolio, len, "portfolio")?.to_vec());
        write(out, m.market.log_utility(&x)?, "out")
    })
}
