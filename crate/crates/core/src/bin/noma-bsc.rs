use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noma_bsc::channel::{build_topology, sample_channels};
use noma_bsc::experiments::{emit_convergence, run_sweep, ExperimentConfig, SweepAxis};
use noma_bsc::oracle::{grid_search, GridSpec};
use noma_bsc::solver::{optimize, Mode};
use noma_bsc::{Error, Result};

#[derive(Parser)]
#[command(name = "noma-bsc", version, about = "Energy-efficient resource allocation for NOMA cells with backscatter tags")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel draw and print the report as JSON.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Solve in this mode (WBS or NBS) instead of the first configured one.
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Run a Monte Carlo sweep and write CSV.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Trace the EE parameter per outer iteration for several cell counts.
    Converge {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Compare the optimizer with an exhaustive grid search on one draw.
    Oracle {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = GridSpec::default().n_power)]
        n_power: usize,
        #[arg(long, default_value_t = GridSpec::default().n_pac)]
        n_pac: usize,
        #[arg(long, default_value_t = GridSpec::default().n_phi)]
        n_phi: usize,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// Every config field as a flag; flags override the file.
#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    noise_variance: Option<f64>,
    /// SIC residual β.
    #[arg(long)]
    sic_error: Option<f64>,
    /// Circuit power in watts.
    #[arg(long)]
    circuit_power: Option<f64>,
    /// Power budget in dBm.
    #[arg(long)]
    p_max_dbm: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    path_loss_exp: Option<f64>,
    #[arg(long)]
    num_cells: Option<usize>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    d_near: Option<f64>,
    #[arg(long)]
    d_far: Option<f64>,
    #[arg(long)]
    d_tag: Option<f64>,
    #[arg(long)]
    d_tag_near: Option<f64>,
    #[arg(long)]
    d_tag_far: Option<f64>,
    #[arg(long)]
    tol_dinkelbach: Option<f64>,
    #[arg(long)]
    tol_dual: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_dual_iters: Option<usize>,
    #[arg(long)]
    step0: Option<f64>,
    #[arg(long)]
    interference_rounds: Option<usize>,
    /// Parameter to sweep (p_max_dbm, sic_error, circuit_power, r_min, num_cells, path_loss_exp, noise_variance).
    #[arg(long)]
    sweep_param: Option<SweepAxis>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    sweep_values: Option<Vec<f64>>,
    /// Comma-separated cell counts for `converge`.
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated modes (WBS,NBS).
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

macro_rules! set {
    ($src:expr => $dst:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl ConfigArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        set!(self.noise_variance => c.system.noise_variance);
        set!(self.sic_error => c.system.sic_error);
        set!(self.circuit_power => c.system.circuit_power);
        set!(self.p_max_dbm => c.system.p_max_dbm);
        set!(self.r_min => c.system.r_min);
        set!(self.path_loss_exp => c.system.path_loss_exp);
        set!(self.num_cells => c.system.num_cells);
        set!(self.spacing => c.layout.spacing);
        set!(self.d_near => c.layout.d_near);
        set!(self.d_far => c.layout.d_far);
        set!(self.d_tag => c.layout.d_tag);
        set!(self.d_tag_near => c.layout.d_tag_near);
        set!(self.d_tag_far => c.layout.d_tag_far);
        set!(self.tol_dinkelbach => c.solver.tol_dinkelbach);
        set!(self.tol_dual => c.solver.tol_dual);
        set!(self.max_outer => c.solver.max_outer);
        set!(self.max_dual_iters => c.solver.max_dual_iters);
        set!(self.step0 => c.solver.step0);
        set!(self.interference_rounds => c.solver.interference_rounds);
        set!(self.sweep_param => c.sweep.parameter);
        set!(self.sweep_values => c.sweep.values);
        set!(self.cells => c.convergence.cells);
        set!(self.trials => c.trials);
        set!(self.seed => c.seed);
        set!(self.modes => c.modes);
        set!(self.workers => c.workers);
        if self.output.is_some() {
            c.output = self.output;
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(text: &str, cfg: &ExperimentConfig) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { cfg, mode } => {
            let cfg = cfg.resolve()?;
            let params = cfg.system.to_params()?;
            let topo = build_topology(&params, &cfg.layout)?;
            let chan = sample_channels(&topo, &params, cfg.seed);
            let report = optimize(&chan, &params, &cfg.solver, mode.unwrap_or(cfg.modes[0]))?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
            match &cfg.output {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Sweep { cfg } => {
            let cfg = cfg.resolve()?;
            let result = run_sweep(&cfg)?;
            emit(&result.to_csv(), &cfg)
        }
        Command::Converge { cfg } => {
            let cfg = cfg.resolve()?;
            let trace = emit_convergence(&cfg, cfg.seed)?;
            emit(&trace.to_csv(), &cfg)
        }
        Command::Oracle {
            cfg,
            mode,
            n_power,
            n_pac,
            n_phi,
        } => {
            let mut cfg = cfg.resolve()?;
            cfg.system.num_cells = 1;
            let params = cfg.system.to_params()?;
            let mode = mode.unwrap_or(cfg.modes[0]);
            let topo = build_topology(&params, &cfg.layout)?;
            let chan = sample_channels(&topo, &params, cfg.seed);
            let grid = GridSpec { n_power, n_pac, n_phi };
            let oracle = grid_search(&chan, &params, &grid, mode)?;
            let solved = optimize(&chan, &params, &cfg.solver, mode)?;
            let o = &oracle.allocation.cells[0];
            let s = &solved.allocation.cells[0];
            println!("mode        {mode}");
            println!("oracle  ee  {:.9}  P={:.6} W  pac_near={:.6}  reflection={:.4}", oracle.ee, o.power, o.pac_near, o.reflection);
            println!("solver  ee  {:.9}  P={:.6} W  pac_near={:.6}  reflection={:.4}", solved.metrics.ee_total, s.power, s.pac_near, s.reflection);
            println!("ratio       {:.6}", solved.metrics.ee_total / oracle.ee);
            Ok(())
        }
        Command::Config { cfg } => {
            let cfg = cfg.resolve()?;
            print!("{}", cfg.to_toml_string()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
