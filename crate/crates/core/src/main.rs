use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use susytoy::clr::{clr_row, write_clr_csv};
use susytoy::eigensolve::{count_negative, dense_spectrum, lowest_eigenpairs};
use susytoy::experiments::config::Config;
use susytoy::experiments::fit::{fit_growth, FitModel};
use susytoy::experiments::plan::{read_records, run_plan, ExperimentKind, SweepPlan};
use susytoy::experiments::report::render_report;
use susytoy::fiber::{fiber_sweep, write_fiber_csv};
use susytoy::operators::{
    assemble_hamiltonian_with, assemble_laplacian, assemble_shifted_with, assemble_supercharge, assemble_weight,
    read_coo, write_coo, Box2D, PotentialRule, SparseHermitianOperator, WeightSpec,
};
use susytoy::weyl::{weyl_sweep, write_weyl_csv, CutoffProfile};
use susytoy::{Error, Result};

#[derive(Parser)]
#[command(name = "susytoy", version, about = "Spectral experiments for the supersymmetric x^2 y^2 model")]
struct Cli {
    /// TOML configuration (constants, region rule, grids, output paths).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Laplacian,
    Hamiltonian,
    Bosonic,
    Supercharge,
    Weight,
    Shifted,
    BosonicShifted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Nodal,
    ValleyAdapted,
}

impl From<Rule> for PotentialRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Nodal => PotentialRule::Nodal,
            Rule::ValleyAdapted => PotentialRule::ValleyAdapted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Power,
    PowerLog,
}

#[derive(Args)]
struct OperatorArgs {
    /// Read a COO export instead of assembling.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hamiltonian")]
    kind: Kind,
    /// Box half-width L.
    #[arg(long, default_value_t = 6.0)]
    half_width: f64,
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "nodal")]
    potential: Rule,
}

impl OperatorArgs {
    fn build(&self) -> Result<SparseHermitianOperator> {
        if let Some(p) = &self.input {
            return read_coo(p);
        }
        let b = Box2D::with_spacing(self.half_width, self.h)?;
        let rule = self.potential.into();
        let spec = || WeightSpec::new(self.alpha, self.lambda);
        match self.kind {
            Kind::Laplacian => assemble_laplacian(&b),
            Kind::Hamiltonian => assemble_hamiltonian_with(&b, true, rule),
            Kind::Bosonic => assemble_hamiltonian_with(&b, false, rule),
            Kind::Supercharge => assemble_supercharge(&b),
            Kind::Weight => assemble_weight(&b, &spec()?),
            Kind::Shifted => assemble_shifted_with(&b, &spec()?, rule, true),
            Kind::BosonicShifted => assemble_shifted_with(&b, &spec()?, rule, false),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble an operator and export it as COO plus a JSON sidecar.
    Assemble {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lowest eigenpairs (iterative) or the full dense spectrum, as a JSON line.
    Spectrum {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        dense: bool,
        /// Append the record to this JSON-lines file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact number of eigenvalues below `shift`, as a JSON line.
    Count {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        shift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weyl-sequence forms and weighted quotients (CSV).
    Weyl {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fiber ground energy, gap and projector bound (CSV).
    Fiber {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counting-bound table (CSV).
    Clr {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep plan; completed cells are skipped.
    Sweep {
        #[arg(long)]
        kind: ExperimentKind,
        /// Override the results file from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a growth law to a two-column CSV `x,n`.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "power")]
        model: Model,
    },
    /// Markdown summary of a results file.
    Report {
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit_line(line: &str, out: Option<&Path>) -> Result<()> {
    println!("{line}");
    if let Some(p) = out {
        let mut f = OpenOptions::new().create(true).append(true).open(p)?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn csv_target(out: Option<PathBuf>, cfg: &Config, name: &str) -> Result<PathBuf> {
    let p = out.unwrap_or_else(|| cfg.output.path(name));
    if let Some(d) = p.parent() {
        if !d.as_os_str().is_empty() {
            fs::create_dir_all(d)?;
        }
    }
    Ok(p)
}

fn read_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut pts = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(x), Some(n)) => pts.push((x, n)),
            // tolerate a header row
            _ if pts.is_empty() => continue,
            _ => return Err(Error::Parse(format!("bad row {:?}", rec))),
        }
    }
    Ok(pts)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.cmd {
        Cmd::Assemble { op, out } => {
            let a = op.build()?;
            let side = write_coo(&a, &out)?;
            eprintln!("wrote {} ({} x {}, nnz {}) and {}", out.display(), a.dimension(), a.dimension(), a.nnz(), side.display());
        }
        Cmd::Spectrum { op, k, tol, dense, out } => {
            let a = op.build()?;
            let r = if dense { dense_spectrum(&a)? } else { lowest_eigenpairs(&a, k, tol)? };
            emit_line(&serde_json::to_string(&r)?, out.as_deref())?;
        }
        Cmd::Count { op, shift, out } => {
            let a = op.build()?;
            emit_line(&serde_json::to_string(&count_negative(&a, shift)?)?, out.as_deref())?;
        }
        Cmd::Weyl { out } => {
            let rows = weyl_sweep(&cfg.grids.ts, &cfg.grids.alphas, CutoffProfile::standard()?)?;
            let p = csv_target(out, &cfg, "weyl.csv")?;
            write_weyl_csv(&rows, File::create(&p)?)?;
            eprintln!("wrote {} rows to {}", rows.len(), p.display());
        }
        Cmd::Fiber { out } => {
            let rows = fiber_sweep(&cfg.grids.epsilons, cfg.grids.fiber_h)?;
            let p = csv_target(out, &cfg, "fiber.csv")?;
            write_fiber_csv(&rows, File::create(&p)?)?;
            eprintln!("wrote {} rows to {}", rows.len(), p.display());
        }
        Cmd::Clr { out } => {
            let mut rows = Vec::new();
            for &alpha in &cfg.grids.alphas {
                for &lambda in &cfg.grids.lambdas {
                    rows.push(clr_row(lambda, alpha, &cfg.constants, &cfg.geometry.region_spec(lambda)?)?);
                }
            }
            let p = csv_target(out, &cfg, "clr.csv")?;
            write_clr_csv(&rows, File::create(&p)?)?;
            eprintln!("wrote {} rows to {}", rows.len(), p.display());
        }
        Cmd::Sweep { kind, out } => {
            let mut plan = SweepPlan::from_config(&cfg, kind);
            if let Some(o) = out {
                plan.output = o;
            }
            let s = run_plan(&plan)?;
            println!("{}", serde_json::to_string(&s)?);
        }
        Cmd::Fit { input, model } => {
            let m = match model {
                Model::Power => FitModel::Power,
                Model::PowerLog => FitModel::PowerLog,
            };
            println!("{}", serde_json::to_string(&fit_growth(&read_points(&input)?, m)?)?);
        }
        Cmd::Report { results, out } => {
            let path = results.unwrap_or_else(|| cfg.output.results_path());
            let text = render_report(&read_records(&path)?, &cfg.constants);
            match out {
                Some(p) => fs::write(p, text)?,
                None => io::stdout().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
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
