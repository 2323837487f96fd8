//! Coordinate-list text export: one `i j re im` line per upper-triangle entry,
//! 0-based, plus a JSON sidecar with the metadata.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{OperatorMeta, SparseHermitianOperator};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CooSidecar {
    pub dimension: usize,
    pub upper_entries: usize,
    #[serde(flatten)]
    pub meta: OperatorMeta,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `path` and `path.json`. Returns the sidecar path.
pub fn write_coo(op: &SparseHermitianOperator, path: &Path) -> Result<PathBuf> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut count = 0;
    for (i, j, v) in op.upper_triplets() {
        // Display for f64 prints the shortest string that parses back to the same bits
        writeln!(w, "{i} {j} {} {}", v.re, v.im)?;
        count += 1;
    }
    w.flush()?;
    let side = CooSidecar {
        dimension: op.dimension(),
        upper_entries: count,
        meta: op.meta().clone(),
    };
    let sp = sidecar_path(path);
    serde_json::to_writer_pretty(BufWriter::new(File::create(&sp)?), &side)?;
    Ok(sp)
}

pub fn read_coo(path: &Path) -> Result<SparseHermitianOperator> {
    let side: CooSidecar = serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    let mut upper = Vec::with_capacity(side.upper_entries);
    for (lineno, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("line {}: `{line}`", lineno + 1));
        let mut it = line.split_ascii_whitespace();
        let i: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let j: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let re: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let im: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if it.next().is_some() {
            return Err(bad());
        }
        upper.push((i, j, Complex64::new(re, im)));
    }
    if upper.len() != side.upper_entries {
        return Err(Error::Parse(format!(
            "sidecar announces {} entries, file has {}",
            side.upper_entries,
            upper.len()
        )));
    }
    let op = SparseHermitianOperator::from_upper_triplets(side.dimension, &upper, side.meta.clone())?;
    Ok(op)
}
