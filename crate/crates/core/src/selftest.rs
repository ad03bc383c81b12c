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

//! Built-in consistency checks run by `proxsplit selftest`.
//!
//! Every check compares library code against an independent closed form:
//! conjugate proxes are projections onto dual-norm balls, and the
//! single-inner-iteration solvers are compared with hand-written PDFP and
//! Condat–Vu recursions on a fixed toy problem.

use std::fmt;

use crate::ct::{build_projector, Geometry, Scene};
use crate::error::Result;
use crate::linop::{atv, first_difference, itv, op_norm_sq, tv_gradient, DenseMatrix, LinearOperator};
use crate::product_space::{Block, BlockStack};
use crate::prox::{BoxIndicator, L1Norm, L21Norm, ProxTerm, Scaled, ZeroFunction};
use crate::rng::GaussianStream;
use crate::solvers::{solve_dfb, solve_pdfb, CompositeProblem, LeastSquares, SolverConfig, Start};
use crate::vecops::{dot, norm};

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Swap in a deliberately wrong soft-threshold (`0.9 t` instead of `t`)
    /// to confirm the suite can fail.
    pub corrupt_prox: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

type Check = fn(SelftestOptions) -> Result<(bool, String)>;

pub fn run(options: SelftestOptions) -> SelftestReport {
    let checks: [(&'static str, Check); 6] = [
        ("adjoint identity", adjoint_check),
        ("moreau decomposition", moreau_check),
        ("tv as gradient norms", tv_check),
        ("power iteration", norm_check),
        ("dfb reduces to pdfp", dfb_reduction_check),
        ("pdfb reduces to condat-vu", pdfb_reduction_check),
    ];
    let checks = checks
        .into_iter()
        .map(|(name, check)| match check(options) {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect();
    SelftestReport { checks }
}

fn gaussian_vec(stream: &mut GaussianStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| stream.next_gaussian()).collect()
}

fn verdict(worst: f64, bound: f64) -> (bool, String) {
    (worst <= bound, format!("worst {worst:.3e} (bound {bound:.0e})"))
}

fn adjoint_check(_: SelftestOptions) -> Result<(bool, String)> {
    let mut rng = GaussianStream::new(11);
    let dense = DenseMatrix::new(3, 5, gaussian_vec(&mut rng, 15))?;
    let scene = Scene {
        n: 12,
        n_views: 6,
        n_rays: 9,
        geometry: Geometry::Fan,
        ..Scene::default()
    };
    let ops = [
        first_difference(7)?,
        tv_gradient(5, 4)?,
        LinearOperator::Dense(dense),
        LinearOperator::compose(
            LinearOperator::Dense(DenseMatrix::new(3, 10, gaussian_vec(&mut rng, 30))?),
            tv_gradient(5, 1)?,
        )?,
        build_projector(&scene)?,
    ];
    let mut worst: f64 = 0.0;
    for op in &ops {
        for _ in 0..20 {
            let x = gaussian_vec(&mut rng, op.cols());
            let y = gaussian_vec(&mut rng, op.rows());
            let lhs = dot(&op.apply(&x)?, &y);
            let rhs = dot(&x, &op.adjoint_apply(&y)?);
            worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
        }
    }
    Ok(verdict(worst, 1e-10))
}

fn soft_threshold(u: &[f64], t: f64, corrupt: bool) -> Vec<f64> {
    let t = if corrupt { 0.9 * t } else { t };
    u.iter().map(|v| v.signum() * (v.abs() - t).max(0.0)).collect()
}

fn moreau_check(options: SelftestOptions) -> Result<(bool, String)> {
    let mut rng = GaussianStream::new(12);
    let mut worst: f64 = 0.0;
    for case in 0..60 {
        let t = 0.1 + 2.0 * rng.next_uniform();
        let s = 0.2 + rng.next_uniform();
        let u: Vec<f64> = gaussian_vec(&mut rng, 6).iter().map(|v| 2.0 * v).collect();
        // prox_{tf}(u) and the closed-form projection giving prox_{f*/t}(u/t)
        let (p, q): (Vec<f64>, Vec<f64>) = match case % 3 {
            0 => {
                let p = if options.corrupt_prox {
                    soft_threshold(&u, t * s, true)
                } else {
                    Scaled::new(L1Norm, s)?.prox(&u, t)?
                };
                (p, u.iter().map(|v| (v / t).clamp(-s, s)).collect())
            }
            1 => {
                let p = Scaled::new(L21Norm, s)?.prox(&u, t)?;
                let mut q: Vec<f64> = u.iter().map(|v| v / t).collect();
                let half = q.len() / 2;
                for i in 0..half {
                    let r = q[i].hypot(q[half + i]);
                    if r > s {
                        q[i] *= s / r;
                        q[half + i] *= s / r;
                    }
                }
                (p, q)
            }
            _ => (ZeroFunction.prox(&u, t)?, vec![0.0; u.len()]),
        };
        let residual: Vec<f64> = u.iter().zip(&p).zip(&q).map(|((u, p), q)| p + t * q - u).collect();
        worst = worst.max(norm(&residual) / (1.0 + norm(&u)));
    }
    Ok(verdict(worst, 1e-12))
}

fn tv_check(_: SelftestOptions) -> Result<(bool, String)> {
    let mut rng = GaussianStream::new(13);
    let mut worst: f64 = 0.0;
    for &(n, m) in &[(1, 1), (3, 1), (1, 4), (5, 4), (16, 12)] {
        let u = gaussian_vec(&mut rng, n * m);
        let du = tv_gradient(n, m)?.apply(&u)?;
        let l1: f64 = du.iter().map(|v| v.abs()).sum();
        let l21: f64 = (0..n * m).map(|k| du[k].hypot(du[n * m + k])).sum();
        let (a, i) = (atv(&u, n, m)?, itv(&u, n, m)?);
        worst = worst.max((a - l1).abs() / l1.max(1.0)).max((i - l21).abs() / l21.max(1.0));
    }
    Ok(verdict(worst, 1e-12))
}

fn norm_check(_: SelftestOptions) -> Result<(bool, String)> {
    // diag(1, 2, 3) has ‖B‖² = 9; first_difference(2) has ‖B‖² = 2
    let diag = LinearOperator::Dense(DenseMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 3.0],
    ])?);
    let tol = 1e-8;
    let e1 = (op_norm_sq(&diag, tol, 100_000) - 9.0).abs() / 9.0;
    let e2 = (op_norm_sq(&first_difference(2)?, tol, 100_000) - 2.0).abs() / 2.0;
    Ok(verdict(e1.max(e2), tol))
}

/// `min ½‖Ax − b‖² + δ_[0,2](x) + 0.3‖Bx‖₁` with `B = first_difference(4)`.
struct Toy {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    bmat: Vec<Vec<f64>>,
    mu: f64,
    lipschitz: f64,
}

impl Toy {
    fn new() -> Toy {
        let a = vec![
            vec![1.0, 0.5, 0.0, -0.3],
            vec![0.2, 1.2, 0.4, 0.0],
            vec![0.0, -0.6, 0.9, 1.1],
        ];
        let bmat = vec![
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0, 1.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ];
        Toy {
            a,
            b: vec![1.0, -0.5, 2.0],
            bmat,
            mu: 0.3,
            lipschitz: 4.0,
        }
    }

    fn problem(&self) -> Result<CompositeProblem> {
        let a = LinearOperator::Dense(DenseMatrix::from_rows(&self.a)?);
        let stack = BlockStack::unweighted(vec![Block::new(first_difference(4)?, Scaled::new(L1Norm, self.mu)?)])?;
        CompositeProblem::new(
            LeastSquares::with_lipschitz(a, self.b.clone(), self.lipschitz)?,
            BoxIndicator::new(0.0, 2.0)?,
            stack,
        )
    }

    fn mul(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter().map(|row| dot(row, x)).collect()
    }

    fn mul_t(m: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        (0..m[0].len()).map(|j| m.iter().zip(y).map(|(row, yi)| row[j] * yi).sum()).collect()
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = Self::mul(&self.a, x).iter().zip(&self.b).map(|(p, b)| p - b).collect();
        Self::mul_t(&self.a, &r)
    }

    fn clamp_box(x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v.clamp(0.0, 2.0)).collect()
    }

    fn clamp_dual(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| v.clamp(-self.mu, self.mu)).collect()
    }

    /// `v = P(x − γ∇f − γBᵀy)`, `y⁺ = Π(y + (λ/γ)Bv)`, `x⁺ = P(x − γ∇f − γBᵀy⁺)`
    fn pdfp(&self, gamma: f64, lambda: f64, iters: usize) -> Vec<Vec<f64>> {
        let (mut x, mut y) = (vec![0.0; 4], vec![0.0; 4]);
        let mut out = Vec::new();
        for _ in 0..iters {
            let g = self.grad(&x);
            let step = |y: &[f64]| {
                let bt = Self::mul_t(&self.bmat, y);
                Self::clamp_box(&(0..4).map(|i| x[i] - gamma * g[i] - gamma * bt[i]).collect::<Vec<_>>())
            };
            let v = step(&y);
            let bv = Self::mul(&self.bmat, &v);
            y = self.clamp_dual(&(0..4).map(|i| y[i] + lambda / gamma * bv[i]).collect::<Vec<_>>());
            x = step(&y);
            out.push(x.clone());
        }
        out
    }

    /// `x⁺ = P(x − τ'Bᵀy − τ'∇f)`, `y⁺ = Π(y + σ'B(2x⁺ − x))`
    fn condat_vu(&self, tau_p: f64, sigma_p: f64, iters: usize) -> Vec<Vec<f64>> {
        let (mut x, mut y) = (vec![0.0; 4], vec![0.0; 4]);
        let mut out = Vec::new();
        for _ in 0..iters {
            let g = self.grad(&x);
            let bt = Self::mul_t(&self.bmat, &y);
            let xn = Self::clamp_box(&(0..4).map(|i| x[i] - tau_p * bt[i] - tau_p * g[i]).collect::<Vec<_>>());
            let ext: Vec<f64> = (0..4).map(|i| 2.0 * xn[i] - x[i]).collect();
            let be = Self::mul(&self.bmat, &ext);
            y = self.clamp_dual(&(0..4).map(|i| y[i] + sigma_p * be[i]).collect::<Vec<_>>());
            x = xn;
            out.push(x.clone());
        }
        out
    }
}

/// A tolerance no residual of a moving iterate can meet.
const NEVER: f64 = 1e-300;

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn dfb_reduction_check(_: SelftestOptions) -> Result<(bool, String)> {
    let toy = Toy::new();
    let (gamma, lambda) = (0.4, 0.2);
    let config = SolverConfig::dfb(gamma, lambda)
        .with_eps(NEVER)
        .with_max_outer(10)
        .recording_iterates();
    let report = solve_dfb(&toy.problem()?, &config, &Start::default(), None)?;
    Ok(verdict(max_gap(&report.iterates, &toy.pdfp(gamma, lambda, 10)), 1e-12))
}

fn pdfb_reduction_check(_: SelftestOptions) -> Result<(bool, String)> {
    let toy = Toy::new();
    let (gamma, tau, sigma) = (0.4, 1.0, 0.2);
    let config = SolverConfig::pdfb(gamma, tau, Some(sigma))
        .with_eps(NEVER)
        .with_max_outer(10)
        .recording_iterates();
    let report = solve_pdfb(&toy.problem()?, &config, &Start::default(), None)?;
    let reference = toy.condat_vu(tau * gamma / (1.0 + tau), sigma / gamma, 10);
    Ok(verdict(max_gap(&report.iterates, &reference), 1e-12))
}
