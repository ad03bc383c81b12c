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

//! Dual forward-backward (DFB) and primal-dual forward-backward (PDFB)
//! splitting for `min f(x) + g(x) + Σᵢ hᵢ(Bᵢ x)`, plus a linearized ADMM
//! baseline specialized to the prior-image TV reconstruction model.
//!
//! With one inner iteration DFB is the primal-dual fixed point scheme and
//! PDFB is the Condat–Vu scheme (after `ȳ = y/γ`, `τ' = τγ/(1+τ)`,
//! `σ' = σ/γ`). Both run on either inner product of the block stack; the
//! weighted product gives the "first class" variants.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::linop::{op_norm_sq_bound, LinearOperator, NORM_MAX_ITER, NORM_TOL};
use crate::product_space::{Block, BlockStack};
use crate::prox::{BoxIndicator, L1Norm, ProxTerm, Scaled, Translated, ZeroFunction};
use crate::vecops::{all_finite, axpy, dist, norm};

/// Relative slack under which a parameter is treated as sitting on its
/// (open) bound; guards `σ = 1/(τS)` style inputs against round-off.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// The differentiable term `f` with an `L`-Lipschitz gradient.
pub trait SmoothTerm: fmt::Debug + Send + Sync {
    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out)?;
        Ok(out)
    }

    /// Lipschitz constant of the gradient; 0 only for `f ≡ 0`.
    fn lipschitz(&self) -> f64;

    /// Primal dimension, when the term fixes one.
    fn dim(&self) -> Option<usize> {
        None
    }
}

/// `f ≡ 0`
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSmooth;

impl SmoothTerm for NoSmooth {
    fn value(&self, _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }

    fn gradient_into(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        Ok(())
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// `½‖Ax − b‖²`, gradient `Aᵀ(Ax − b)`, `L = ‖A‖²`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: LinearOperator,
    b: Vec<f64>,
    lipschitz: f64,
}

impl LeastSquares {
    /// Uses the safety-factored power-iteration bound for `L`.
    pub fn new(a: LinearOperator, b: Vec<f64>) -> Result<Self> {
        let l = op_norm_sq_bound(&a, NORM_TOL, NORM_MAX_ITER);
        Self::with_lipschitz(a, b, l)
    }

    pub fn with_lipschitz(a: LinearOperator, b: Vec<f64>, lipschitz: f64) -> Result<Self> {
        check_len("least-squares data", a.rows(), b.len())?;
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::param(format!(
                "least-squares Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        Ok(LeastSquares { a, b, lipschitz })
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.a
    }

    pub fn data(&self) -> &[f64] {
        &self.b
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.a.apply(x)?;
        axpy(-1.0, &self.b, &mut r);
        Ok(r)
    }
}

impl SmoothTerm for LeastSquares {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(0.5 * crate::vecops::dot(&r, &r))
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let r = self.residual(x)?;
        self.a.adjoint_into(&r, out)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn dim(&self) -> Option<usize> {
        Some(self.a.cols())
    }
}

/// `f(x) + g(x) + Σᵢ hᵢ(Bᵢ x)`
#[derive(Debug)]
pub struct CompositeProblem {
    pub smooth: Box<dyn SmoothTerm>,
    pub simple: Box<dyn ProxTerm>,
    pub stack: BlockStack,
}

impl CompositeProblem {
    pub fn new(
        smooth: impl SmoothTerm + 'static,
        simple: impl ProxTerm + 'static,
        stack: BlockStack,
    ) -> Result<Self> {
        if let Some(d) = smooth.dim() {
            check_len("smooth term dimension", stack.primal_dim(), d)?;
        }
        let l = smooth.lipschitz();
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::param(format!("Lipschitz constant must be finite and >= 0, got {l}")));
        }
        Ok(CompositeProblem {
            smooth: Box::new(smooth),
            simple: Box::new(simple),
            stack,
        })
    }

    pub fn dim(&self) -> usize {
        self.stack.primal_dim()
    }
}

/// `F(x) = f(x) + g(x) + Σᵢ hᵢ(Bᵢ x)`; `+∞` when an indicator is violated.
pub fn objective(problem: &CompositeProblem, x: &[f64]) -> Result<f64> {
    check_len("objective", problem.dim(), x.len())?;
    let g = problem.simple.value(x)?;
    if g == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(problem.smooth.value(x)? + g + problem.stack.value(x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Dual forward-backward splitting.
    Dfb,
    /// Primal-dual forward-backward splitting.
    Pdfb,
    /// ADMM with a single gradient-projection step for `x`.
    Admm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dfb, Algorithm::Pdfb, Algorithm::Admm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dfb => "dfb",
            Algorithm::Pdfb => "pdfb",
            Algorithm::Admm => "admm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::param(format!("unknown algorithm '{s}' (valid: dfb, pdfb, admm)")))
    }
}

/// Which λ bound DFB enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvergenceMode {
    /// `λ < 1/S`: weak convergence of the single-inner-step scheme.
    #[default]
    StrictWeak,
    /// `λ < 2/S`: convergence shown in finite dimensions only.
    RelaxedFinite,
}

impl FromStr for ConvergenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "strict-weak" => Ok(ConvergenceMode::StrictWeak),
            "relaxed-finite" => Ok(ConvergenceMode::RelaxedFinite),
            other => Err(Error::param(format!(
                "unknown convergence mode '{other}' (valid: strict-weak, relaxed-finite)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    /// DFB dual step.
    pub lambda: Option<f64>,
    /// PDFB dual step; defaults to `0.9 / (τ S)`.
    pub sigma: Option<f64>,
    /// PDFB primal step; defaults to 1.
    pub tau: Option<f64>,
    pub rho1: f64,
    pub rho2: f64,
    pub inner_iters: usize,
    pub max_outer: usize,
    pub eps: f64,
    pub mode: ConvergenceMode,
    /// Keep every primal iterate in the report.
    pub record_iterates: bool,
}

impl SolverConfig {
    fn base(algorithm: Algorithm, gamma: f64) -> Self {
        SolverConfig {
            algorithm,
            gamma,
            lambda: None,
            sigma: None,
            tau: None,
            rho1: 1.0,
            rho2: 1.0,
            inner_iters: 1,
            max_outer: 40_000,
            eps: 1e-6,
            mode: ConvergenceMode::StrictWeak,
            record_iterates: false,
        }
    }

    pub fn dfb(gamma: f64, lambda: f64) -> Self {
        SolverConfig {
            lambda: Some(lambda),
            ..Self::base(Algorithm::Dfb, gamma)
        }
    }

    pub fn pdfb(gamma: f64, tau: f64, sigma: Option<f64>) -> Self {
        SolverConfig {
            tau: Some(tau),
            sigma,
            ..Self::base(Algorithm::Pdfb, gamma)
        }
    }

    pub fn admm(gamma: f64, rho1: f64, rho2: f64) -> Self {
        SolverConfig {
            rho1,
            rho2,
            ..Self::base(Algorithm::Admm, gamma)
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    pub fn with_inner_iters(mut self, inner_iters: usize) -> Self {
        self.inner_iters = inner_iters;
        self
    }

    pub fn with_mode(mut self, mode: ConvergenceMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn recording_iterates(mut self) -> Self {
        self.record_iterates = true;
        self
    }
}

/// A configuration that passed `validate_params`, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub tau: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub inner_iters: usize,
    pub max_outer: usize,
    pub eps: f64,
    pub record_iterates: bool,
    /// Set when only finite-dimensional convergence is guaranteed.
    pub finite_dim_only: bool,
}

/// `value < bound`, treating values within round-off of the bound as on it.
fn strictly_below(value: f64, bound: f64) -> bool {
    value < bound * (1.0 - BOUNDARY_RTOL)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_common(config: &SolverConfig) -> Result<()> {
    positive("gamma", config.gamma)?;
    positive("eps", config.eps)?;
    if config.inner_iters == 0 {
        return Err(Error::param("inner_iters must be at least 1"));
    }
    if config.max_outer == 0 {
        return Err(Error::param("max_outer must be at least 1"));
    }
    Ok(())
}

fn check_gamma(gamma: f64, lipschitz: f64) -> Result<()> {
    if lipschitz > 0.0 && !strictly_below(gamma * lipschitz, 2.0) {
        return Err(Error::param(format!(
            "gamma = {gamma} violates gamma in (0, 2/L) with L = {lipschitz} (2/L = {})",
            2.0 / lipschitz
        )));
    }
    Ok(())
}

/// Checks the step-size conditions that guarantee convergence.
///
/// DFB: `γ ∈ (0, 2/L)` and `λ S < 1` (strict-weak) or `λ S < 2`
/// (relaxed-finite), where `S = Σ wᵢ‖Bᵢ‖²` from `stack_norm_sq_bound`.
/// PDFB: `γ ∈ (0, 2/L)`, `σ τ S < 1` and the Condat–Vu condition
/// `1/τ' − σ' S > L/2`. ADMM needs the model-specific norms and is checked
/// by [`PiccsProblem::validate`].
pub fn validate_params(problem: &CompositeProblem, config: &SolverConfig) -> Result<ValidatedParams> {
    check_common(config)?;
    let l = problem.smooth.lipschitz();
    let s = problem.stack.stack_norm_sq_bound();
    let gamma = config.gamma;
    check_gamma(gamma, l)?;

    let mut params = ValidatedParams {
        algorithm: config.algorithm,
        gamma,
        lambda: 0.0,
        sigma: 0.0,
        tau: 0.0,
        rho1: config.rho1,
        rho2: config.rho2,
        inner_iters: config.inner_iters,
        max_outer: config.max_outer,
        eps: config.eps,
        record_iterates: config.record_iterates,
        finite_dim_only: false,
    };

    match config.algorithm {
        Algorithm::Dfb => {
            let lambda = positive(
                "lambda",
                config
                    .lambda
                    .ok_or_else(|| Error::param("DFB requires lambda"))?,
            )?;
            let limit = match config.mode {
                ConvergenceMode::StrictWeak => 1.0,
                ConvergenceMode::RelaxedFinite => 2.0,
            };
            if !strictly_below(lambda * s, limit) {
                return Err(Error::param(format!(
                    "lambda = {lambda} violates 0 < lambda < {limit}/S with S = sum w_i ||B_i||^2 = {s} \
                     ({:?} mode)",
                    config.mode
                )));
            }
            params.lambda = lambda;
            params.finite_dim_only = config.mode == ConvergenceMode::RelaxedFinite;
        }
        Algorithm::Pdfb => {
            let tau = positive("tau", config.tau.unwrap_or(1.0))?;
            let sigma = match config.sigma {
                Some(sig) => positive("sigma", sig)?,
                None if s > 0.0 => 0.9 / (tau * s),
                None => 1.0,
            };
            if !strictly_below(sigma * tau * s, 1.0) {
                return Err(Error::param(format!(
                    "sigma*tau = {} violates sigma*tau < 1/S with S = sum w_i ||B_i||^2 = {s}",
                    sigma * tau
                )));
            }
            let tau_p = tau * gamma / (1.0 + tau);
            let sigma_p = sigma / gamma;
            let margin = 1.0 / tau_p - sigma_p * s;
            if l > 0.0 && margin.partial_cmp(&(l / 2.0)) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::param(format!(
                    "Condat-Vu condition 1/tau' - sigma'*S > L/2 fails: {margin} <= {}",
                    l / 2.0
                )));
            }
            params.sigma = sigma;
            params.tau = tau;
        }
        Algorithm::Admm => {
            return Err(Error::param(
                "ADMM is specialized to the prior-image TV model; validate through PiccsProblem",
            ));
        }
    }
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    MaxIterations,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::ToleranceMet => "tolerance",
            Termination::MaxIterations => "max_iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub x_final: Vec<f64>,
    pub outer_iters: usize,
    /// `F(x^{k+1})` after each outer iteration.
    pub objective_trace: Vec<f64>,
    /// `‖x^{k+1} − x^k‖ / ‖x^k‖` (absolute change when `x^k = 0`).
    pub residual_trace: Vec<f64>,
    /// Caller-supplied metric of each iterate, if any.
    pub metric_trace: Vec<f64>,
    /// Every primal iterate `x^1, x^2, …` when requested.
    pub iterates: Vec<Vec<f64>>,
    /// Final dual variables (`y` for DFB/PDFB and ADMM).
    pub duals: Vec<Vec<f64>>,
    /// Final scaled multipliers `v` (ADMM only).
    pub multipliers: Vec<Vec<f64>>,
    pub termination: Termination,
    pub finite_dim_only: bool,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Initial point; anything left `None` starts at zero.
#[derive(Debug, Clone, Default)]
pub struct Start {
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<Vec<f64>>>,
    pub v: Option<Vec<Vec<f64>>>,
}

impl Start {
    pub fn primal(x: Vec<f64>) -> Self {
        Start {
            x: Some(x),
            ..Start::default()
        }
    }
}

/// Per-iterate metric callback.
pub type Metric<'a> = &'a dyn Fn(&[f64]) -> f64;

struct Traces {
    objective: Vec<f64>,
    residual: Vec<f64>,
    metric: Vec<f64>,
    iterates: Vec<Vec<f64>>,
    x: Vec<f64>,
    termination: Termination,
}

/// Runs the outer loop shared by every solver: one `step` maps `x^k` to
/// `x^{k+1}`; the loop stops at the first `k` with relative change `< eps`.
fn drive(
    algorithm: Algorithm,
    params: &ValidatedParams,
    mut x: Vec<f64>,
    objective: impl Fn(&[f64]) -> Result<f64>,
    metric: Option<Metric>,
    mut step: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
) -> Result<Traces> {
    let mut traces = Traces {
        objective: Vec::new(),
        residual: Vec::new(),
        metric: Vec::new(),
        iterates: Vec::new(),
        x: Vec::new(),
        termination: Termination::MaxIterations,
    };
    let mut next = vec![0.0; x.len()];
    for k in 0..params.max_outer {
        step(&x, &mut next)?;
        if !all_finite(&next) {
            return Err(Error::Divergence {
                algorithm: algorithm.name(),
                iteration: k + 1,
            });
        }
        let change = dist(&next, &x);
        let scale = norm(&x);
        let residual = if scale > 0.0 { change / scale } else { change };
        traces.residual.push(residual);
        traces.objective.push(objective(&next)?);
        if let Some(m) = metric {
            traces.metric.push(m(&next));
        }
        if params.record_iterates {
            traces.iterates.push(next.clone());
        }
        std::mem::swap(&mut x, &mut next);
        if residual < params.eps {
            traces.termination = Termination::ToleranceMet;
            break;
        }
    }
    traces.x = x;
    Ok(traces)
}

fn initial_primal(dim: usize, start: &Start) -> Result<Vec<f64>> {
    match &start.x {
        Some(x) => {
            check_len("initial x", dim, x.len())?;
            Ok(x.clone())
        }
        None => Ok(vec![0.0; dim]),
    }
}

fn initial_duals(dims: &[usize], given: &Option<Vec<Vec<f64>>>) -> Result<Vec<Vec<f64>>> {
    match given {
        Some(ys) => {
            check_len("initial dual block count", dims.len(), ys.len())?;
            for (d, y) in dims.iter().zip(ys) {
                check_len("initial dual block", *d, y.len())?;
            }
            Ok(ys.clone())
        }
        None => Ok(dims.iter().map(|&d| vec![0.0; d]).collect()),
    }
}

fn require(params: &ValidatedParams, algorithm: Algorithm) -> Result<()> {
    if params.algorithm == algorithm {
        Ok(())
    } else {
        Err(Error::param(format!(
            "configuration is for {}, not {}",
            params.algorithm, algorithm
        )))
    }
}

/// Dual forward-backward splitting.
///
/// Each outer iteration takes `u = x − γ∇f(x)`, runs `inner_iters` dual
/// steps `y ← prox_{(λ/γ) h*}(y + (λ/γ) B prox_{γg}(u − γ B*y))`, then sets
/// `x⁺ = prox_{γg}(u − γ B*y)` with the latest dual iterate.
pub fn solve_dfb(
    problem: &CompositeProblem,
    config: &SolverConfig,
    start: &Start,
    metric: Option<Metric>,
) -> Result<SolveReport> {
    let params = validate_params(problem, config)?;
    require(&params, Algorithm::Dfb)?;
    let dim = problem.dim();
    let stack = &problem.stack;
    let x0 = initial_primal(dim, start)?;
    let mut y = initial_duals(&stack.dual_dims(), &start.y)?;

    let gamma = params.gamma;
    let dual_step = params.lambda / gamma;
    let mut grad = vec![0.0; dim];
    let mut u = vec![0.0; dim];
    let mut adj = vec![0.0; dim];
    let mut arg = vec![0.0; dim];
    let mut v = vec![0.0; dim];

    let traces = drive(
        Algorithm::Dfb,
        &params,
        x0,
        |x| objective(problem, x),
        metric,
        |x, next| {
            problem.smooth.gradient_into(x, &mut grad)?;
            for ((ui, xi), gi) in u.iter_mut().zip(x).zip(&grad) {
                *ui = xi - gamma * gi;
            }
            for _ in 0..params.inner_iters {
                stack.combined_adjoint_into(&y, &mut adj)?;
                for ((ai, ui), bi) in arg.iter_mut().zip(&u).zip(&adj) {
                    *ai = ui - gamma * bi;
                }
                problem.simple.prox_into(&arg, gamma, &mut v)?;
                let mut z = stack.forward(&v)?;
                for (zi, yi) in z.iter_mut().zip(&y) {
                    for (a, b) in zi.iter_mut().zip(yi) {
                        *a = b + dual_step * *a;
                    }
                }
                y = stack.stacked_conjugate_prox(&z, dual_step)?;
            }
            stack.combined_adjoint_into(&y, &mut adj)?;
            for ((ai, ui), bi) in arg.iter_mut().zip(&u).zip(&adj) {
                *ai = ui - gamma * bi;
            }
            problem.simple.prox_into(&arg, gamma, next)
        },
    )?;

    Ok(SolveReport {
        algorithm: Algorithm::Dfb,
        x_final: traces.x,
        outer_iters: traces.residual.len(),
        objective_trace: traces.objective,
        residual_trace: traces.residual,
        metric_trace: traces.metric,
        iterates: traces.iterates,
        duals: y,
        multipliers: Vec::new(),
        termination: traces.termination,
        finite_dim_only: params.finite_dim_only,
    })
}

/// Primal-dual forward-backward splitting.
///
/// Each outer iteration takes `u = x − γ∇f(x)` and runs `inner_iters`
/// passes of
/// `x̄⁺ = prox_{τγ/(1+τ) g}((x̄ − τ B*y + τ u)/(1+τ))`,
/// `y ← γ prox_{(σ/γ) h*}((y + σ B(2x̄⁺ − x̄))/γ)`,
/// starting from `x̄ = x`; the last `x̄` becomes `x⁺`.
pub fn solve_pdfb(
    problem: &CompositeProblem,
    config: &SolverConfig,
    start: &Start,
    metric: Option<Metric>,
) -> Result<SolveReport> {
    let params = validate_params(problem, config)?;
    require(&params, Algorithm::Pdfb)?;
    let dim = problem.dim();
    let stack = &problem.stack;
    let x0 = initial_primal(dim, start)?;
    let mut y = initial_duals(&stack.dual_dims(), &start.y)?;

    let (gamma, tau, sigma) = (params.gamma, params.tau, params.sigma);
    let primal_step = tau * gamma / (1.0 + tau);
    let dual_step = sigma / gamma;
    let mut grad = vec![0.0; dim];
    let mut u = vec![0.0; dim];
    let mut adj = vec![0.0; dim];
    let mut arg = vec![0.0; dim];
    let mut xbar = vec![0.0; dim];
    let mut xnew = vec![0.0; dim];
    let mut extrap = vec![0.0; dim];

    let traces = drive(
        Algorithm::Pdfb,
        &params,
        x0,
        |x| objective(problem, x),
        metric,
        |x, next| {
            problem.smooth.gradient_into(x, &mut grad)?;
            for ((ui, xi), gi) in u.iter_mut().zip(x).zip(&grad) {
                *ui = xi - gamma * gi;
            }
            xbar.copy_from_slice(x);
            for _ in 0..params.inner_iters {
                stack.combined_adjoint_into(&y, &mut adj)?;
                for (((ai, xb), bi), ui) in arg.iter_mut().zip(&xbar).zip(&adj).zip(&u) {
                    *ai = (xb - tau * bi + tau * ui) / (1.0 + tau);
                }
                problem.simple.prox_into(&arg, primal_step, &mut xnew)?;
                for ((e, xn), xb) in extrap.iter_mut().zip(&xnew).zip(&xbar) {
                    *e = 2.0 * xn - xb;
                }
                let mut z = stack.forward(&extrap)?;
                for (zi, yi) in z.iter_mut().zip(&y) {
                    for (a, b) in zi.iter_mut().zip(yi) {
                        *a = (b + sigma * *a) / gamma;
                    }
                }
                y = stack.stacked_conjugate_prox(&z, dual_step)?;
                for yi in y.iter_mut() {
                    yi.iter_mut().for_each(|v| *v *= gamma);
                }
                std::mem::swap(&mut xbar, &mut xnew);
            }
            next.copy_from_slice(&xbar);
            Ok(())
        },
    )?;

    Ok(SolveReport {
        algorithm: Algorithm::Pdfb,
        x_final: traces.x,
        outer_iters: traces.residual.len(),
        objective_trace: traces.objective,
        residual_trace: traces.residual,
        metric_trace: traces.metric,
        iterates: traces.iterates,
        duals: y,
        multipliers: Vec::new(),
        termination: traces.termination,
        finite_dim_only: false,
    })
}

/// The prior-image TV reconstruction model
/// `min ½‖Ax − b‖² + λ₁ φ₁(D₁(x − x_p)) + λ₂ φ₂(D₂ x) + δ_C(x)`
/// with `φ₁ = φ₂ = ‖·‖₁` and `C` a box.
#[derive(Debug)]
pub struct PiccsProblem {
    a: LinearOperator,
    b: Vec<f64>,
    d1: LinearOperator,
    d2: LinearOperator,
    prior: Vec<f64>,
    /// `D₁ x_p`
    prior_shift: Vec<f64>,
    lambda1: f64,
    lambda2: f64,
    constraint: BoxIndicator,
    a_norm_sq: f64,
    d1_norm_sq: f64,
    d2_norm_sq: f64,
    composite: CompositeProblem,
}

impl PiccsProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: LinearOperator,
        b: Vec<f64>,
        d1: LinearOperator,
        d2: LinearOperator,
        prior: Vec<f64>,
        lambda1: f64,
        lambda2: f64,
        constraint: BoxIndicator,
    ) -> Result<Self> {
        let n = a.cols();
        check_len("data vector b", a.rows(), b.len())?;
        check_len("D1 columns", n, d1.cols())?;
        check_len("D2 columns", n, d2.cols())?;
        check_len("prior image", n, prior.len())?;
        for (name, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {l}")));
            }
        }
        let prior_shift = d1.apply(&prior)?;
        let a_norm_sq = op_norm_sq_bound(&a, NORM_TOL, NORM_MAX_ITER);
        let d1_norm_sq = op_norm_sq_bound(&d1, NORM_TOL, NORM_MAX_ITER);
        let d2_norm_sq = op_norm_sq_bound(&d2, NORM_TOL, NORM_MAX_ITER);
        let smooth = if a_norm_sq > 0.0 {
            LeastSquares::with_lipschitz(a.clone(), b.clone(), a_norm_sq)?
        } else {
            return Err(Error::param("system matrix A is zero"));
        };
        let stack = BlockStack::unweighted(Self::blocks(&d1, &d2, &prior_shift, lambda1, lambda2)?)?;
        let composite = CompositeProblem::new(smooth, constraint, stack)?;
        Ok(PiccsProblem {
            a,
            b,
            d1,
            d2,
            prior,
            prior_shift,
            lambda1,
            lambda2,
            constraint,
            a_norm_sq,
            d1_norm_sq,
            d2_norm_sq,
            composite,
        })
    }

    fn blocks(
        d1: &LinearOperator,
        d2: &LinearOperator,
        shift: &[f64],
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Vec<Block>> {
        let h1: Box<dyn ProxTerm> = if lambda1 > 0.0 {
            Box::new(Translated::new(Scaled::new(L1Norm, lambda1)?, shift.to_vec()))
        } else {
            Box::new(ZeroFunction)
        };
        let h2: Box<dyn ProxTerm> = if lambda2 > 0.0 {
            Box::new(Scaled::new(L1Norm, lambda2)?)
        } else {
            Box::new(ZeroFunction)
        };
        Ok(vec![
            Block {
                op: d1.clone(),
                term: h1,
            },
            Block {
                op: d2.clone(),
                term: h2,
            },
        ])
    }

    /// `f = ½‖Ax − b‖²`, `g = δ_C`, `h₁ = λ₁‖· − D₁x_p‖₁`, `h₂ = λ₂‖·‖₁`,
    /// on the unweighted product space.
    pub fn composite(&self) -> &CompositeProblem {
        &self.composite
    }

    /// The same model on the weighted product space.
    pub fn weighted_composite(&self, w1: f64, w2: f64) -> Result<CompositeProblem> {
        let stack = BlockStack::weighted(
            Self::blocks(&self.d1, &self.d2, &self.prior_shift, self.lambda1, self.lambda2)?,
            vec![w1, w2],
        )?;
        let smooth = LeastSquares::with_lipschitz(self.a.clone(), self.b.clone(), self.a_norm_sq)?;
        CompositeProblem::new(smooth, self.constraint, stack)
    }

    pub fn system(&self) -> &LinearOperator {
        &self.a
    }

    pub fn data(&self) -> &[f64] {
        &self.b
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda1, self.lambda2)
    }

    /// Safety-factored `(‖A‖², ‖D₁‖², ‖D₂‖²)`.
    pub fn norm_sq_bounds(&self) -> (f64, f64, f64) {
        (self.a_norm_sq, self.d1_norm_sq, self.d2_norm_sq)
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        objective(&self.composite, x)
    }

    /// Validates `config` against this model; ADMM needs
    /// `γ ∈ (0, 2/(‖A‖² + ρ₁‖D₁‖² + ρ₂‖D₂‖²))`.
    pub fn validate(&self, config: &SolverConfig) -> Result<ValidatedParams> {
        if config.algorithm != Algorithm::Admm {
            return validate_params(&self.composite, config);
        }
        check_common(config)?;
        let rho1 = positive("rho1", config.rho1)?;
        let rho2 = positive("rho2", config.rho2)?;
        let total = self.a_norm_sq + rho1 * self.d1_norm_sq + rho2 * self.d2_norm_sq;
        if !strictly_below(config.gamma * total, 2.0) {
            return Err(Error::param(format!(
                "gamma = {} violates gamma in (0, 2/(||A||^2 + rho1 ||D1||^2 + rho2 ||D2||^2)) = (0, {})",
                config.gamma,
                2.0 / total
            )));
        }
        Ok(ValidatedParams {
            algorithm: Algorithm::Admm,
            gamma: config.gamma,
            lambda: 0.0,
            sigma: 0.0,
            tau: 0.0,
            rho1,
            rho2,
            inner_iters: 1,
            max_outer: config.max_outer,
            eps: config.eps,
            record_iterates: config.record_iterates,
            finite_dim_only: false,
        })
    }

    /// Dispatches to the solver named by `config.algorithm`.
    pub fn solve(&self, config: &SolverConfig, start: &Start, metric: Option<Metric>) -> Result<SolveReport> {
        match config.algorithm {
            Algorithm::Dfb => solve_dfb(&self.composite, config, start, metric),
            Algorithm::Pdfb => solve_pdfb(&self.composite, config, start, metric),
            Algorithm::Admm => solve_admm(self, config, start, metric),
        }
    }
}

/// Unscaled ADMM on the splitting `y₁ = D₁x`, `y₂ = D₂x`, with the
/// `x`-subproblem replaced by one projected gradient step:
///
/// `x⁺ = P_C(x − γ(Aᵀ(Ax − b) + ρ₁D₁ᵀ(D₁x − y₁ + v₁) + ρ₂D₂ᵀ(D₂x − y₂ + v₂)))`,
/// `yᵢ⁺ = prox_{(λᵢ/ρᵢ) hᵢ}(Dᵢx⁺ + vᵢ)`, `vᵢ⁺ = vᵢ + Dᵢx⁺ − yᵢ⁺`.
pub fn solve_admm(
    problem: &PiccsProblem,
    config: &SolverConfig,
    start: &Start,
    metric: Option<Metric>,
) -> Result<SolveReport> {
    let params = problem.validate(config)?;
    require(&params, Algorithm::Admm)?;
    let dim = problem.dim();
    let dims = [problem.d1.rows(), problem.d2.rows()];
    let x0 = initial_primal(dim, start)?;
    let mut y = initial_duals(&dims, &start.y)?;
    let mut v = initial_duals(&dims, &start.v)?;

    let (gamma, rho) = (params.gamma, [params.rho1, params.rho2]);
    let lambdas = [problem.lambda1, problem.lambda2];
    let ops = [&problem.d1, &problem.d2];
    let terms: [Box<dyn ProxTerm>; 2] = [
        if lambdas[0] > 0.0 {
            Box::new(Translated::new(
                Scaled::new(L1Norm, lambdas[0] / rho[0])?,
                problem.prior_shift.clone(),
            ))
        } else {
            Box::new(ZeroFunction)
        },
        if lambdas[1] > 0.0 {
            Box::new(Scaled::new(L1Norm, lambdas[1] / rho[1])?)
        } else {
            Box::new(ZeroFunction)
        },
    ];

    let mut grad = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut arg = vec![0.0; dim];
    let mut dx: [Vec<f64>; 2] = [vec![0.0; dims[0]], vec![0.0; dims[1]]];
    let mut r = vec![0.0; problem.a.rows()];

    let traces = drive(
        Algorithm::Admm,
        &params,
        x0,
        |x| problem.objective(x),
        metric,
        |x, next| {
            problem.a.apply_into(x, &mut r)?;
            axpy(-1.0, &problem.b, &mut r);
            problem.a.adjoint_into(&r, &mut grad)?;
            for i in 0..2 {
                ops[i].apply_into(x, &mut dx[i])?;
                for ((d, yi), vi) in dx[i].iter_mut().zip(&y[i]).zip(&v[i]) {
                    *d = *d - yi + vi;
                }
                ops[i].adjoint_into(&dx[i], &mut tmp)?;
                axpy(rho[i], &tmp, &mut grad);
            }
            for ((a, xi), gi) in arg.iter_mut().zip(x).zip(&grad) {
                *a = xi - gamma * gi;
            }
            problem.constraint.prox_into(&arg, gamma, next)?;
            for i in 0..2 {
                ops[i].apply_into(next, &mut dx[i])?;
                let shifted: Vec<f64> = dx[i].iter().zip(&v[i]).map(|(d, vi)| d + vi).collect();
                terms[i].prox_into(&shifted, 1.0, &mut y[i])?;
                for ((vi, d), yi) in v[i].iter_mut().zip(&dx[i]).zip(&y[i]) {
                    *vi += d - yi;
                }
            }
            Ok(())
        },
    )?;

    Ok(SolveReport {
        algorithm: Algorithm::Admm,
        x_final: traces.x,
        outer_iters: traces.residual.len(),
        objective_trace: traces.objective,
        residual_trace: traces.residual,
        metric_trace: traces.metric,
        iterates: traces.iterates,
        duals: y,
        multipliers: v,
        termination: traces.termination,
        finite_dim_only: false,
    })
}
