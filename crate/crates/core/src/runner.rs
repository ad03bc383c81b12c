/*
Copyright 2026 The proxsplit Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Executes a [`RunSpec`] and writes its artifacts:
//!
//! - `results.csv`: one row per (solver, ε) pair
//! - `trace_<algo>_eps<ε>.csv`: per-iteration objective, SNR and residual
//! - `recon_<algo>_eps<ε>.pgm`: min-max normalized reconstruction, with the
//!   bounds in a `.txt` sidecar
//!
//! Floats use Rust's shortest round-trip formatting, so identical runs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunSpec;
use crate::ct::{assemble_piccs, run_experiment, ExperimentRow};
use crate::error::{Error, Result};
use crate::pgm;

pub const RESULTS_HEADER: &str = "algorithm,eps,snr_db,nmsd,iterations,final_objective,terminated_by";
pub const TRACE_HEADER: &str = "iteration,objective,snr,residual";

#[derive(Debug)]
pub struct RunSummary {
    pub rows: Vec<ExperimentRow>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn failures(&self) -> impl Iterator<Item = (&ExperimentRow, &Error)> {
        self.rows.iter().filter_map(|r| r.outcome.as_ref().err().map(|e| (r, e)))
    }

    pub fn all_succeeded(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// File-name tag for a tolerance, e.g. `1e-6`.
pub fn eps_tag(eps: f64) -> String {
    format!("{eps:e}")
}

pub fn results_csv(rows: &[ExperimentRow]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for row in rows {
        let _ = match &row.outcome {
            Ok(o) => writeln!(
                s,
                "{},{},{},{},{},{},{}",
                row.algorithm,
                eps_tag(row.eps),
                o.snr_db,
                o.nmsd,
                o.iterations,
                o.final_objective,
                o.termination.name()
            ),
            Err(_) => writeln!(s, "{},{},,,,,error", row.algorithm, eps_tag(row.eps)),
        };
    }
    s
}

fn trace_csv(row: &ExperimentRow) -> Option<String> {
    let o = row.outcome.as_ref().ok()?;
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for k in 0..o.iterations {
        let snr = o.snr_trace.get(k).copied().unwrap_or(f64::NAN);
        let _ = writeln!(s, "{},{},{},{}", k + 1, o.objective_trace[k], snr, o.residual_trace[k]);
    }
    Some(s)
}

fn write(path: PathBuf, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

/// Assembles the scene, runs every (solver, ε) pair and writes the artifacts
/// into `out_dir`. Solver failures are reported in the summary; only
/// assembly and I/O failures are returned as errors.
pub fn execute(spec: &RunSpec, out_dir: &Path) -> Result<RunSummary> {
    let instance = assemble_piccs(&spec.scene)?;
    let configs: Vec<_> = spec
        .eps
        .iter()
        .flat_map(|&eps| spec.solvers.iter().map(move |s| (s, eps)))
        .map(|(s, eps)| s.resolve(&instance, eps, spec.max_outer))
        .collect();
    let rows = run_experiment(&instance, &configs);

    fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    write(out_dir.join("results.csv"), results_csv(&rows).as_bytes(), &mut files)?;
    let n = spec.scene.n;
    for row in &rows {
        let Ok(outcome) = &row.outcome else { continue };
        let stem = format!("{}_eps{}", row.algorithm, eps_tag(row.eps));
        if let Some(trace) = trace_csv(row) {
            write(out_dir.join(format!("trace_{stem}.csv")), trace.as_bytes(), &mut files)?;
        }
        let (bytes, (lo, hi)) = pgm::encode(&outcome.x_final, n, n)?;
        write(out_dir.join(format!("recon_{stem}.pgm")), &bytes, &mut files)?;
        write(
            out_dir.join(format!("recon_{stem}.txt")),
            format!("min = {lo}\nmax = {hi}\n").as_bytes(),
            &mut files,
        )?;
    }
    Ok(RunSummary { rows, files })
}
