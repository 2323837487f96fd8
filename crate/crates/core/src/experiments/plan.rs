//! Sweep plans, cell execution and the JSON-lines results file.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clr::{clr_row, BoundConstants};
use crate::eigensolve::count_negative;
use crate::error::{invalid, Error, Result};
use crate::experiments::config::{Config, GeometryConfig};
use crate::fiber::fiber_sweep;
use crate::operators::{assemble_hamiltonian_with, assemble_shifted_with, Box2D, PotentialRule, WeightSpec};
use crate::weyl::{weyl_sweep, CutoffProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Transition,
    Growth,
    Bosonic,
    Weyl,
    Fiber,
    Clr,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub kind: ExperimentKind,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub boxes: Vec<f64>,
    pub ts: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub h: f64,
    pub potential: PotentialRule,
    pub fiber_h: f64,
    pub constants: BoundConstants,
    pub geometry: GeometryConfig,
    pub output: PathBuf,
    /// 0 means all cores.
    pub workers: usize,
}

impl SweepPlan {
    pub fn from_config(cfg: &Config, kind: ExperimentKind) -> Self {
        let g = &cfg.grids;
        Self {
            kind,
            alphas: g.alphas.clone(),
            lambdas: g.lambdas.clone(),
            boxes: g.boxes.clone(),
            ts: g.ts.clone(),
            epsilons: g.epsilons.clone(),
            h: g.h,
            potential: if kind == ExperimentKind::Bosonic { g.bosonic_potential } else { g.potential },
            fiber_h: g.fiber_h,
            constants: cfg.constants,
            geometry: cfg.geometry,
            output: cfg.output.results_path(),
            workers: cfg.workers,
        }
    }

    fn used_grids(&self) -> Vec<(&'static str, &[f64])> {
        use ExperimentKind::*;
        match self.kind {
            Transition | Growth => vec![("alphas", &self.alphas), ("lambdas", &self.lambdas), ("boxes", &self.boxes)],
            Bosonic => vec![("lambdas", &self.lambdas), ("boxes", &self.boxes)],
            Weyl => vec![("ts", &self.ts), ("alphas", &self.alphas)],
            Fiber => vec![("epsilons", &self.epsilons)],
            Clr => vec![("lambdas", &self.lambdas), ("alphas", &self.alphas)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in self.used_grids() {
            if g.is_empty() {
                return Err(invalid(name, "grid is empty"));
            }
            if g.windows(2).any(|w| !(w[1] > w[0])) || g.iter().any(|x| !x.is_finite()) {
                return Err(invalid(name, "grid must be finite and strictly increasing"));
            }
        }
        Ok(())
    }

    /// Cells in deterministic order.
    pub fn cells(&self) -> Vec<Cell> {
        use ExperimentKind::*;
        let base = Cell {
            kind: self.kind,
            alpha: None,
            lambda: None,
            half_width: None,
            t: None,
            epsilon: None,
            h: None,
            potential: None,
            constants: None,
            geometry: None,
        };
        let mut out = Vec::new();
        match self.kind {
            Transition | Growth => {
                for &alpha in &self.alphas {
                    for &lambda in &self.lambdas {
                        for &l in &self.boxes {
                            out.push(Cell {
                                alpha: Some(alpha),
                                lambda: Some(lambda),
                                half_width: Some(l),
                                h: Some(self.h),
                                potential: Some(self.potential),
                                ..base.clone()
                            });
                        }
                    }
                }
            }
            Bosonic => {
                for &lambda in &self.lambdas {
                    for &l in &self.boxes {
                        out.push(Cell {
                            lambda: Some(lambda),
                            half_width: Some(l),
                            h: Some(self.h),
                            potential: Some(self.potential),
                            ..base.clone()
                        });
                    }
                }
            }
            Weyl => {
                for &alpha in &self.alphas {
                    for &t in &self.ts {
                        out.push(Cell {
                            alpha: Some(alpha),
                            t: Some(t),
                            ..base.clone()
                        });
                    }
                }
            }
            Fiber => {
                for &e in &self.epsilons {
                    out.push(Cell {
                        epsilon: Some(e),
                        h: Some(self.fiber_h),
                        ..base.clone()
                    });
                }
            }
            Clr => {
                for &alpha in &self.alphas {
                    for &lambda in &self.lambdas {
                        out.push(Cell {
                            alpha: Some(alpha),
                            lambda: Some(lambda),
                            constants: Some(self.constants),
                            geometry: Some(self.geometry),
                            ..base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

/// Full input identity of one unit of work.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: ExperimentKind,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub half_width: Option<f64>,
    pub t: Option<f64>,
    pub epsilon: Option<f64>,
    pub h: Option<f64>,
    pub potential: Option<PotentialRule>,
    pub constants: Option<BoundConstants>,
    pub geometry: Option<GeometryConfig>,
}

impl Cell {
    /// SHA-256 over the cell and the library version.
    pub fn hash(&self) -> String {
        let body = serde_json::to_string(self).expect("cell serializes");
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(body.as_bytes());
        hex::encode(h.finalize())
    }

    fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
        v.ok_or_else(|| invalid(name, "missing from cell"))
    }

    pub fn execute(&self) -> Result<serde_json::Value> {
        use ExperimentKind::*;
        let v = match self.kind {
            Transition | Growth => {
                let b = Box2D::with_spacing(Self::need(self.half_width, "half_width")?, Self::need(self.h, "h")?)?;
                let spec = WeightSpec::new(Self::need(self.alpha, "alpha")?, Self::need(self.lambda, "lambda")?)?;
                let op = assemble_shifted_with(&b, &spec, self.potential.unwrap_or_default(), true)?;
                serde_json::to_value(count_negative(&op, 0.0)?)?
            }
            Bosonic => {
                let b = Box2D::with_spacing(Self::need(self.half_width, "half_width")?, Self::need(self.h, "h")?)?;
                let op = assemble_hamiltonian_with(&b, false, self.potential.unwrap_or_default())?;
                serde_json::to_value(count_negative(&op, Self::need(self.lambda, "lambda")?)?)?
            }
            Weyl => {
                let rows = weyl_sweep(
                    &[Self::need(self.t, "t")?],
                    &[Self::need(self.alpha, "alpha")?],
                    CutoffProfile::standard()?,
                )?;
                serde_json::to_value(rows[0])?
            }
            Fiber => {
                let rows = fiber_sweep(&[Self::need(self.epsilon, "epsilon")?], Self::need(self.h, "h")?)?;
                serde_json::to_value(rows[0])?
            }
            Clr => {
                let lambda = Self::need(self.lambda, "lambda")?;
                let geo = self.geometry.unwrap_or_default();
                let spec = geo.region_spec(lambda)?;
                let consts = self.constants.unwrap_or_default();
                serde_json::to_value(clr_row(lambda, Self::need(self.alpha, "alpha")?, &consts, &spec)?)?
            }
        };
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// One JSON line of the results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub hash: String,
    pub cell: Cell,
    pub status: Status,
    pub result: Option<serde_json::Value>,
    pub error: Option<String>,
    pub version: String,
    /// Wall time; the only field excluded from the hash.
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub path: PathBuf,
    pub total: usize,
    pub executed: usize,
    pub skipped: usize,
    pub failed: usize,
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let f = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn run_cell(cell: Cell, hash: String) -> Record {
    let t = Instant::now();
    let r = cell.execute();
    let elapsed_seconds = t.elapsed().as_secs_f64();
    let (status, result, error) = match r {
        Ok(v) => (Status::Ok, Some(v), None),
        Err(e) => (Status::Failed, None, Some(e.to_string())),
    };
    Record {
        hash,
        cell,
        status,
        result,
        error,
        version: env!("CARGO_PKG_VERSION").to_string(),
        elapsed_seconds,
    }
}

/// Executes the cells of `plan` not already completed in its results file.
///
/// Cells run on a bounded pool; records are appended by this thread alone, in
/// cell order. Failed cells are recorded and retried on the next run.
pub fn run_plan(plan: &SweepPlan) -> Result<RunSummary> {
    plan.validate()?;
    if let Some(dir) = plan.output.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let done: HashSet<String> = read_records(&plan.output)?
        .into_iter()
        .filter(|r| r.status == Status::Ok)
        .map(|r| r.hash)
        .collect();
    let cells = plan.cells();
    let total = cells.len();
    let mut seen = HashSet::new();
    let pending: Vec<(Cell, String)> = cells
        .into_iter()
        .map(|c| {
            let h = c.hash();
            (c, h)
        })
        .filter(|(_, h)| !done.contains(h) && seen.insert(h.clone()))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    let chunk = pool.current_num_threads().max(1);
    let mut file = OpenOptions::new().create(true).append(true).open(&plan.output)?;
    let mut failed = 0;
    for batch in pending.chunks(chunk) {
        let records: Vec<Record> = pool.install(|| {
            batch
                .par_iter()
                .map(|(c, h)| run_cell(c.clone(), h.clone()))
                .collect()
        });
        for r in &records {
            failed += usize::from(r.status == Status::Failed);
            writeln!(file, "{}", serde_json::to_string(r)?)?;
        }
        file.flush()?;
    }
    Ok(RunSummary {
        path: plan.output.clone(),
        total,
        executed: pending.len(),
        skipped: total - pending.len(),
        failed,
    })
}
