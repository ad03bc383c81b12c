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

//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are dotted paths.
//! Unknown keys, duplicates and malformed values are errors that carry the
//! offending line number.
//!
//! ```text
//! scene.n = 64
//! scene.geometry = fan
//! run.solvers = dfb, pdfb, admm
//! run.eps = 1e-6, 1e-8
//! solver.pdfb.tau = 1
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::ct::{CtInstance, Geometry, Scene};
use crate::error::{Error, Result};
use crate::solvers::{Algorithm, ConvergenceMode, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

/// Splits `text` into entries without interpreting them.
pub fn parse_entries(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !valid_key(key) {
            return Err(config_err(line, format!("invalid key '{key}'")));
        }
        if value.is_empty() {
            return Err(config_err(line, format!("missing value for '{key}'")));
        }
        if !seen.insert(key.to_string()) {
            return Err(config_err(line, format!("duplicate key '{key}'")));
        }
        entries.push(ConfigEntry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(entries)
}

/// A step size given either outright or as a multiple of the reciprocal of
/// the relevant squared operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Absolute(f64),
    Scale(f64),
}

impl Step {
    fn resolve(self, norm_sq: f64) -> f64 {
        match self {
            Step::Absolute(v) => v,
            Step::Scale(s) => s / norm_sq,
        }
    }
}

/// Per-algorithm settings, resolved against an instance by [`SolverSpec::resolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    /// Defaults to `1.9 / ‖A‖²` (DFB, PDFB) or
    /// `1.9 / (‖A‖² + ρ₁‖D₁‖² + ρ₂‖D₂‖²)` (ADMM).
    pub gamma: Step,
    /// DFB only; defaults to `0.9 / (‖D₁‖² + ‖D₂‖²)`.
    pub lambda: Step,
    pub tau: f64,
    pub sigma: Option<f64>,
    pub rho1: f64,
    pub rho2: f64,
    pub inner_iters: usize,
    pub mode: ConvergenceMode,
}

impl SolverSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverSpec {
            algorithm,
            gamma: Step::Scale(1.9),
            lambda: Step::Scale(0.9),
            tau: 1.0,
            sigma: None,
            rho1: 1.0,
            rho2: 1.0,
            inner_iters: 1,
            mode: ConvergenceMode::StrictWeak,
        }
    }

    pub fn resolve(&self, instance: &CtInstance, eps: f64, max_outer: usize) -> SolverConfig {
        let (a, d1, d2) = instance.problem.norm_sq_bounds();
        let config = match self.algorithm {
            Algorithm::Dfb => SolverConfig::dfb(self.gamma.resolve(a), self.lambda.resolve(d1 + d2)),
            Algorithm::Pdfb => SolverConfig::pdfb(self.gamma.resolve(a), self.tau, self.sigma),
            Algorithm::Admm => SolverConfig::admm(
                self.gamma.resolve(a + self.rho1 * d1 + self.rho2 * d2),
                self.rho1,
                self.rho2,
            ),
        };
        config
            .with_eps(eps)
            .with_max_outer(max_outer)
            .with_inner_iters(self.inner_iters)
            .with_mode(self.mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scene: Scene,
    pub solvers: Vec<SolverSpec>,
    pub eps: Vec<f64>,
    pub max_outer: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            scene: Scene::default(),
            solvers: Algorithm::ALL.iter().map(|&a| SolverSpec::new(a)).collect(),
            eps: vec![1e-6],
            max_outer: 40_000,
            out: None,
        }
    }
}

fn number<T: FromStr>(entry: &ConfigEntry, what: &str) -> Result<T> {
    entry
        .value
        .parse()
        .map_err(|_| config_err(entry.line, format!("'{}' expects {what}, got '{}'", entry.key, entry.value)))
}

fn real(entry: &ConfigEntry) -> Result<f64> {
    let v: f64 = number(entry, "a number")?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(entry.line, format!("'{}' must be finite", entry.key)))
    }
}

fn list<T>(entry: &ConfigEntry, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let out = entry
        .value
        .split(',')
        .map(|s| {
            item(s.trim()).ok_or_else(|| config_err(entry.line, format!("bad list item '{}' in '{}'", s.trim(), entry.key)))
        })
        .collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        return Err(config_err(entry.line, format!("'{}' is empty", entry.key)));
    }
    Ok(out)
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<RunSpec> {
        let entries = parse_entries(text)?;
        let mut spec = RunSpec::default();
        let mut listed: Option<(Vec<Algorithm>, usize)> = None;
        let mut overrides: Vec<(Algorithm, &str, &ConfigEntry)> = Vec::new();

        for e in &entries {
            let s = &mut spec.scene;
            match e.key.as_str() {
                "scene.n" => s.n = number(e, "a positive integer")?,
                "scene.n_views" => s.n_views = number(e, "a positive integer")?,
                "scene.n_rays" => s.n_rays = number(e, "a positive integer")?,
                "scene.geometry" => {
                    s.geometry = Geometry::from_str(&e.value).map_err(|err| config_err(e.line, err.to_string()))?
                }
                "scene.source_radius" => s.source_radius = real(e)?,
                "scene.image_width" => s.image_width = Some(real(e)?),
                "scene.noise_var_b" => s.noise_var_b = real(e)?,
                "scene.noise_var_prior" => s.noise_var_prior = real(e)?,
                "scene.seed" => s.seed = number(e, "an unsigned integer")?,
                "scene.lambda1" => s.lambda1 = real(e)?,
                "scene.lambda2" => s.lambda2 = real(e)?,
                "run.solvers" => {
                    let algs = e
                        .value
                        .split(',')
                        .map(|s| s.parse::<Algorithm>().map_err(|err| config_err(e.line, err.to_string())))
                        .collect::<Result<Vec<_>>>()?;
                    for (i, a) in algs.iter().enumerate() {
                        if algs[..i].contains(a) {
                            return Err(config_err(e.line, format!("solver '{a}' listed twice")));
                        }
                    }
                    listed = Some((algs, e.line));
                }
                "run.eps" => {
                    spec.eps = list(e, |s| s.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite()))?
                }
                "run.max_outer" => spec.max_outer = number(e, "a positive integer")?,
                "run.out" => spec.out = Some(PathBuf::from(&e.value)),
                key => {
                    let rest = key
                        .strip_prefix("solver.")
                        .ok_or_else(|| config_err(e.line, format!("unknown key '{key}'")))?;
                    let (name, field) = rest
                        .split_once('.')
                        .ok_or_else(|| config_err(e.line, format!("unknown key '{key}'")))?;
                    let alg = name.parse::<Algorithm>().map_err(|err| config_err(e.line, err.to_string()))?;
                    overrides.push((alg, field, e));
                }
            }
        }

        if let Some((algs, _)) = listed {
            spec.solvers = algs.into_iter().map(SolverSpec::new).collect();
        }
        for (alg, field, e) in overrides {
            let solver = spec
                .solvers
                .iter_mut()
                .find(|s| s.algorithm == alg)
                .ok_or_else(|| config_err(e.line, format!("'{}' configures {alg}, which is not in run.solvers", e.key)))?;
            apply_override(solver, field, e)?;
        }

        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<RunSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunSpec::parse(&text)
    }

    fn check(&self) -> Result<()> {
        self.scene.validate()?;
        if self.max_outer == 0 {
            return Err(Error::param("run.max_outer must be positive"));
        }
        Ok(())
    }
}

fn apply_override(solver: &mut SolverSpec, field: &str, e: &ConfigEntry) -> Result<()> {
    let alg = solver.algorithm;
    let only = |allowed: &[Algorithm]| {
        if allowed.contains(&alg) {
            Ok(())
        } else {
            Err(config_err(e.line, format!("'{field}' does not apply to {alg}")))
        }
    };
    match field {
        "gamma" => solver.gamma = Step::Absolute(real(e)?),
        "gamma_scale" => solver.gamma = Step::Scale(real(e)?),
        "lambda" => {
            only(&[Algorithm::Dfb])?;
            solver.lambda = Step::Absolute(real(e)?)
        }
        "lambda_scale" => {
            only(&[Algorithm::Dfb])?;
            solver.lambda = Step::Scale(real(e)?)
        }
        "tau" => {
            only(&[Algorithm::Pdfb])?;
            solver.tau = real(e)?
        }
        "sigma" => {
            only(&[Algorithm::Pdfb])?;
            solver.sigma = Some(real(e)?)
        }
        "rho1" => {
            only(&[Algorithm::Admm])?;
            solver.rho1 = real(e)?
        }
        "rho2" => {
            only(&[Algorithm::Admm])?;
            solver.rho2 = real(e)?
        }
        "inner_iters" => {
            only(&[Algorithm::Dfb, Algorithm::Pdfb])?;
            solver.inner_iters = number(e, "a positive integer")?
        }
        "mode" => {
            only(&[Algorithm::Dfb])?;
            solver.mode = e.value.parse().map_err(|err: Error| config_err(e.line, err.to_string()))?
        }
        _ => return Err(config_err(e.line, format!("unknown key '{}'", e.key))),
    }
    Ok(())
}
