use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wellbal::bench::{
    all_scenarios, convergence_table, l1_error, reference_averages, run_scenario, scenario, write_errors_table, write_run_log,
    write_snapshot, ReferenceCache, ReferenceSpec, Scenario,
};
use wellbal::config::{Scheme, SimulationConfig};
use wellbal::Error;

#[derive(Parser)]
#[command(name = "wellbal", version, about = "Well-balanced finite-volume schemes for 1D balance laws")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs one scenario with one scheme on one mesh.
    Run(RunArgs),
    /// Convergence study over a list of meshes.
    Table {
        #[command(flatten)]
        common: RunArgs,
        /// Comma-separated cell counts.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
        meshes: Vec<usize>,
        /// Directory for cached fine-mesh references.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Lists the registered scenarios.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// sm, wbm or dwbm.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    order: Option<u8>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    np: Option<usize>,
    /// Jacobian reuse period; 0 freezes the Jacobian.
    #[arg(long)]
    k_reuse: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<SimulationConfig, Error> {
        let mut c = match &self.config {
            Some(p) => SimulationConfig::from_file(p)?,
            None => SimulationConfig::default(),
        };
        if let Some(v) = &self.scenario {
            c.scenario = v.clone();
        }
        if let Some(v) = self.scheme {
            c.scheme = v;
        }
        if let Some(v) = self.order {
            c.order = v;
        }
        if let Some(v) = self.cells {
            c.cells = v;
        }
        if self.np.is_some() {
            c.np = self.np;
        }
        if self.k_reuse.is_some() {
            c.k_reuse = self.k_reuse;
        }
        if let Some(v) = self.tol {
            c.newton_tol = v;
        }
        if self.t_end.is_some() {
            c.t_end = self.t_end;
        }
        if self.cfl.is_some() {
            c.cfl = self.cfl;
        }
        if self.out.is_some() {
            c.output_dir = self.out.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn lookup(name: &str) -> Result<Scenario, Error> {
    scenario(name).ok_or_else(|| Error::Config(format!("unknown scenario '{name}', see `wellbal list`")))
}

fn out_dir(cfg: &SimulationConfig) -> Result<PathBuf, Error> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run(cfg: &SimulationConfig) -> Result<(), Error> {
    let s = lookup(&cfg.scenario)?;
    let setup = s.resolve(cfg);
    let label = cfg.scheme.label(cfg.order);
    let dir = out_dir(cfg)?;
    let stem = format!("{}_{label}_{}", s.name, setup.cells);
    let run = run_scenario::<f64>(&s, &setup)?;
    let grid = run.solver.grid();
    for (k, snap) in run.result.snapshots.iter().enumerate() {
        write_snapshot(&dir.join(format!("{stem}_snap{k}.txt")), run.solver.model(), grid, snap)?;
    }
    write_run_log(&dir.join(format!("{stem}_log.txt")), &label, &run.result)?;
    if let ReferenceSpec::FineMesh { .. } = s.reference {
        println!("{stem}: steps {}; errors need the fine-mesh reference, see `wellbal table`", run.result.steps);
    } else {
        let r = reference_averages(&s, run.solver.layout(), None)?;
        let e = l1_error(run.result.final_state(), &r, grid.dx())?;
        println!("{stem}: steps {} L1 {e:?}", run.result.steps);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn table(cfg: &SimulationConfig, meshes: &[usize], cache: Option<&Path>) -> Result<(), Error> {
    let s = lookup(&cfg.scenario)?;
    let dir = out_dir(cfg)?;
    let cache = ReferenceCache::new(cache.map(Path::to_path_buf).unwrap_or_else(|| dir.join("references")));
    let report = convergence_table(&s, cfg.scheme, cfg.order, meshes, cfg, Some(&cache));
    let path = dir.join(format!("{}_{}_errors.txt", s.name, report.label));
    write_errors_table(&path, &report)?;
    print!("{}", std::fs::read_to_string(&path)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::List => {
            for s in all_scenarios() {
                println!("{:5} {:16} t_end {:<6} {}", s.name, s.model, s.t_end, s.title);
            }
            Ok(())
        }
        Cmd::Run(args) => args.config().and_then(|c| run(&c)),
        Cmd::Table { common, meshes, cache } => common.config().and_then(|c| table(&c, &meshes, cache.as_deref())),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
