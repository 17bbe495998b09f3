use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spectrum_duopoly::scenario::run::{auction_inputs, solve_phases};
use spectrum_duopoly::scenario::table::{num, Table};
use spectrum_duopoly::scenario::{run_scenario, sweep, verify, Axis, Output, RunOptions, ScenarioConfig};
use spectrum_duopoly::{aggregate_revenues, run_auction, Error, Operator, QuadMode};

/// Pricing game, revenues and block-A auction for two spectrum operators.
///
/// Settings come from the command-line flags first, then the `--config` file,
/// then built-in defaults (reference market, x1_0 = 0.5, T = {0.5, 1.5}).
#[derive(Debug, Parser)]
#[command(name = "spectrum-game", version)]
struct Cli {
    /// TOML scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; tables go to stdout when omitted (figures default to `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Samples per phase.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Emit figures even when the oracle check fails.
    #[arg(long, global = true)]
    allow_unverified: bool,
    #[arg(long, global = true, value_parser = parse_mode)]
    quad_mode: Option<QuadMode>,
    /// Also render SVG charts.
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibrium trajectories of both phases for every T.
    Phase,
    /// Aggregate revenues under both allocations of block A.
    Revenues,
    /// Equilibrium bids and outcome for every gamma and T.
    Auction,
    /// Figure tables.
    Figure {
        #[arg(value_enum)]
        which: Figure,
    },
    /// Cross-product sweep; axes default to `sweep_axes` of the config.
    Sweep {
        #[arg(long, value_delimiter = ',', value_parser = parse_axis)]
        axes: Vec<Axis>,
    },
    /// Oracle comparison and residual checks only.
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl From<Figure> for Output {
    fn from(f: Figure) -> Self {
        match f {
            Figure::Fig3 => Output::Fig3,
            Figure::Fig4 => Output::Fig4,
            Figure::Fig5 => Output::Fig5,
            Figure::Fig6 => Output::Fig6,
        }
    }
}

fn parse_mode(s: &str) -> Result<QuadMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_validation() => 1,
        Error::OracleFailed(_) => 3,
        _ => 2,
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(grid) = cli.grid {
        cfg.grid = grid;
    }
    if let Some(mode) = cli.quad_mode {
        cfg.quad_mode = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<(), Error> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::Output(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::Output(format!("{}: {e}", path.display())))?;
            println!("{}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn with_meta(cfg: &ScenarioConfig, t: Table) -> Table {
    t.meta("config_hash", cfg.hash()).meta("quad_mode", cfg.quad_mode.name())
}

fn phase(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), Error> {
    let opts = cfg.solver_options();
    for &horizon in &cfg.t_values {
        let ph = solve_phases(&cfg.params, cfg.x1_0, horizon, cfg.sym_tail, &opts)?;
        let mut t = with_meta(
            cfg,
            Table::new(
                "phase",
                vec!["t", "phase", "p1", "p2", "x1", "x2", "lambda1", "lambda2", "valid"],
            ),
        )
        .meta("T", num(horizon));
        for tr in [&ph.asym_traj, &ph.sym_traj] {
            let name = format!("{:?}", tr.phase.phase).to_lowercase();
            for i in 0..tr.len() {
                t.push(vec![
                    num(tr.times[i]),
                    name.clone(),
                    num(tr.p1[i]),
                    num(tr.p2[i]),
                    num(tr.x1[i]),
                    num(1.0 - tr.x1[i]),
                    num(tr.lambda1[i]),
                    num(tr.lambda2[i]),
                    tr.validity_flags[i].to_string(),
                ]);
            }
            for issue in &tr.issues {
                eprintln!("warning: t = {}: {}", issue.t, issue.message);
            }
        }
        emit(cli.out.as_deref(), &format!("phase_T{horizon}.csv"), &t.render()?)?;
    }
    Ok(())
}

fn revenues(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), Error> {
    let mut t = with_meta(
        cfg,
        Table::new("revenues", vec!["T", "r1_a", "r2_b", "r1_b", "r2_a", "gain", "quadrature_error"]),
    );
    for &horizon in &cfg.t_values {
        let r = aggregate_revenues(&cfg.params, cfg.x1_0, horizon, &cfg.solver_options())?;
        t.push(vec![
            num(horizon),
            num(r.aggregate(Operator::One, true)),
            num(r.aggregate(Operator::Two, false)),
            num(r.aggregate(Operator::One, false)),
            num(r.aggregate(Operator::Two, true)),
            num(r.gain_for(Operator::One)?),
            num(r.quadrature_error),
        ]);
    }
    emit(cli.out.as_deref(), "revenues.csv", &t.render()?)
}

fn auction(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), Error> {
    let mut t = with_meta(
        cfg,
        Table::new(
            "auction",
            vec!["gamma", "T", "b1", "b2", "floored1", "floored2", "winner", "tie_rule", "profit1", "profit2"],
        ),
    );
    for &horizon in &cfg.t_values {
        let r = aggregate_revenues(&cfg.params, cfg.x1_0, horizon, &cfg.solver_options())?;
        for gamma in cfg.gammas() {
            let o = run_auction(&auction_inputs(cfg, &r, gamma)?);
            t.push(vec![
                num(gamma),
                num(horizon),
                num(o.b1_star),
                num(o.b2_star),
                o.floored[0].to_string(),
                o.floored[1].to_string(),
                o.winner.number().to_string(),
                o.tie_rule_applied.description().into(),
                num(o.realized_profit_1),
                num(o.realized_profit_2),
            ]);
        }
    }
    emit(cli.out.as_deref(), "auction.csv", &t.render()?)
}

fn figure(cli: &Cli, cfg: &ScenarioConfig, which: Figure) -> Result<(), Error> {
    let cfg = ScenarioConfig {
        outputs: vec![which.into()],
        ..cfg.clone()
    };
    let bundle = run_scenario(
        &cfg,
        RunOptions {
            allow_unverified: cli.allow_unverified,
            svg: cli.svg,
        },
    )?;
    if !bundle.verification.pass {
        eprint!("{}", bundle.verification.summary());
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    for path in bundle.write_to(&dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn run_sweep(cli: &Cli, cfg: &ScenarioConfig, axes: &[Axis]) -> Result<(), Error> {
    let axes = if axes.is_empty() { cfg.sweep_axes.clone() } else { axes.to_vec() };
    let v = verify(cfg)?;
    if !v.pass && !cli.allow_unverified {
        return Err(Error::OracleFailed(v.summary()));
    }
    let t = sweep(cfg, &axes, Some(&v))?;
    emit(cli.out.as_deref(), "sweep.csv", &t.render()?)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Phase => phase(cli, &cfg),
        Command::Revenues => revenues(cli, &cfg),
        Command::Auction => auction(cli, &cfg),
        Command::Figure { which } => figure(cli, &cfg, *which),
        Command::Sweep { axes } => run_sweep(cli, &cfg, axes),
        Command::Verify => {
            let v = verify(&cfg)?;
            print!("{}", v.summary());
            if v.pass {
                Ok(())
            } else {
                Err(Error::OracleFailed("verification failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
