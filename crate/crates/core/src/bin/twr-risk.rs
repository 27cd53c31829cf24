use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twr_risk::io::{self, GameInput};
use twr_risk::surface::{self, GridSpec};
use twr_risk::verify::{self, VerifyConfig};
use twr_risk::{
    ArbitrageCheck, Certificate, Game, MeasureKind, NoRiskFreeCheck, OnePeriodMarket, PortionVector, RiskError,
    TradeMatrix, DEFAULT_BUDGET,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Drawdown risk measures of fractional trading games.
#[derive(Debug, Parser)]
#[command(name = "twr-risk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank, no-risk-free check and, for markets, the arbitrage check.
    Check(InputArgs),
    /// Evaluate a measure on a grid of portion vectors and write CSV.
    Surface {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        measure: MeasureKind,
        #[arg(long = "K")]
        draws: usize,
        /// min:max:steps per axis, comma separated. Defaults to -0.4:0.8:121 on every axis.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Current-drawdown measure for K = 1..Kmax at a fixed portion vector.
    Converge {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        phi: Vec<f64>,
        #[arg(long = "Kmax")]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Evaluate one measure at one portion vector.
    Eval {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        measure: MeasureKind,
        #[arg(long = "K")]
        draws: usize,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        phi: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Run the seeded property suites.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "K", default_value_t = 5)]
        draws: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Convert a market JSON file into a trade matrix JSON file.
    FromMarket {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    /// Trade matrix (JSON or CSV) or market (JSON).
    input: PathBuf,
    /// Probabilities overriding the file, comma separated.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
}

impl InputArgs {
    fn load(&self) -> Result<GameInput, RiskError> {
        io::load_game(&self.input, self.probs.clone())
    }

    fn matrix(&self) -> Result<TradeMatrix, RiskError> {
        self.load()?.trade_matrix()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_domain() { EXIT_DOMAIN } else { EXIT_VALIDATION })
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), RiskError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| RiskError::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| io::format_value(*x)).collect::<Vec<_>>().join(",")
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(command: Command) -> Result<ExitCode, RiskError> {
    match command {
        Command::Check(input) => check(&input.load()?),
        Command::Surface {
            input,
            measure,
            draws,
            grid,
            out,
            budget,
            threads,
        } => {
            let matrix = input.matrix()?;
            let axes = match grid {
                Some(text) => GridSpec::parse_axes(&text)?,
                None => GridSpec::default_axes(matrix.cols()),
            };
            let spec = GridSpec::new(axes, measure, draws)?;
            let result = surface::evaluate_surface(&matrix, &spec, budget, threads)?;
            emit(out.as_deref(), &result.to_csv())?;
            match result.error {
                Some(e) => {
                    eprintln!("error: {e}; partial output with {} of {} rows", result.rows.len(), spec.point_count());
                    Ok(ExitCode::from(EXIT_DOMAIN))
                }
                None => Ok(ExitCode::SUCCESS),
            }
        }
        Command::Converge {
            input,
            phi,
            k_max,
            out,
            budget,
        } => {
            let matrix = input.matrix()?;
            let phi = PortionVector::new(phi);
            let points = surface::converge(&matrix, &phi, k_max, budget)?;
            emit(out.as_deref(), &surface::convergence_csv(&points))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            input,
            measure,
            draws,
            phi,
            budget,
        } => {
            let matrix = input.matrix()?;
            let game = Game::new(&matrix, draws)?.with_budget(budget);
            let value = game.evaluate(measure, &PortionVector::new(phi))?;
            println!("{}", io::format_value(value));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            input,
            draws,
            samples,
            seed,
            budget,
        } => {
            let matrix = input.matrix()?;
            let config = VerifyConfig {
                draws,
                samples,
                seed,
                budget,
            };
            let report = verify::run_verify(&matrix, &config)?;
            print!("{report}");
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY)
            })
        }
        Command::FromMarket { input, out } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| RiskError::InvalidInput(format!("cannot read {}: {e}", input.display())))?;
            let matrix = io::parse_market_json(&text)?.build_trade_matrix()?;
            emit(out.as_deref(), &(io::matrix_to_json(&matrix) + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn report_assumption(check: &NoRiskFreeCheck, cols: usize) {
    let relation = if check.rank == cols { "=" } else { "<" };
    println!("rank: {} {relation} M={cols}, {}", check.rank, verdict(check.rank == cols));
    match &check.certificate {
        Certificate::PositiveKernel(y) => println!("assumption: PASS, certificate y=({})", join(y)),
        Certificate::RiskFreeDirection(theta) => println!("assumption: FAIL, direction θ=({})", join(theta)),
        Certificate::Inconclusive => println!("assumption: FAIL, no certificate found"),
    }
}

fn check(input: &GameInput) -> Result<ExitCode, RiskError> {
    let matrix = input.trade_matrix()?;
    let result = matrix.check_no_risk_free();
    report_assumption(&result, matrix.cols());
    let mut ok = result.holds;
    if let GameInput::Market(market) = input {
        ok &= check_market(market, &result)?;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

fn check_market(market: &OnePeriodMarket, assumption: &NoRiskFreeCheck) -> Result<bool, RiskError> {
    let arbitrage = market.check_arbitrage()?;
    match &arbitrage {
        ArbitrageCheck::NoArbitrage => println!("arbitrage: none, PASS"),
        ArbitrageCheck::Arbitrage(x) => println!("arbitrage: FOUND, x=({}), FAIL", join(x)),
    }
    let full_rank = market.excess_payoff_rank() == market.asset_count();
    let legs = [arbitrage.is_arbitrage_free(), assumption.holds, full_rank];
    let held = legs.iter().filter(|&&l| l).count();
    println!(
        "two of three: no-arbitrage={} assumption={} full-rank={}, {}",
        legs[0],
        legs[1],
        legs[2],
        if held >= 2 { "theory applies" } else { "theory does not apply" }
    );
    Ok(arbitrage.is_arbitrage_free() && assumption.holds && full_rank)
}
