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

//! Test-only oracles, written independently of the library internals.
#![allow(dead_code)]

pub mod terms;

use nalgebra::{DMatrix, SymmetricEigen};
use proxsplit::ct::{build_projector, Geometry, Scene};
use proxsplit::linop::{first_difference, tv_gradient, DenseMatrix, LinearOperator};
use proxsplit::rng::GaussianStream;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Argmin of a convex scalar function on `[a, b]` by golden-section search.
pub fn golden_argmin(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizer of a convex function over the box `brackets` (dimension ≤ 4)
/// by nested golden-section search. Partial minimization of a convex
/// function is convex, so every nested level is unimodal.
pub fn box_argmin(obj: &dyn Fn(&[f64]) -> f64, brackets: &[(f64, f64)]) -> Vec<f64> {
    assert!(!brackets.is_empty() && brackets.len() <= 4);
    nested(obj, brackets, &[])
}

fn nested(obj: &dyn Fn(&[f64]) -> f64, brackets: &[(f64, f64)], prefix: &[f64]) -> Vec<f64> {
    let (a, b) = brackets[0];
    let tol = 1e-11 * (1.0 + (b - a).abs());
    if brackets.len() == 1 {
        let f = |x: f64| {
            let mut p = prefix.to_vec();
            p.push(x);
            obj(&p)
        };
        return vec![golden_argmin(&f, a, b, tol)];
    }
    let rest = &brackets[1..];
    let value_at = |x: f64| {
        let mut p = prefix.to_vec();
        p.push(x);
        let tail = nested(obj, rest, &p);
        p.extend(tail);
        obj(&p)
    };
    let x0 = golden_argmin(&value_at, a, b, tol);
    let mut p = prefix.to_vec();
    p.push(x0);
    let tail = nested(obj, rest, &p);
    let mut out = vec![x0];
    out.extend(tail);
    out
}

/// Oracle for `prox_{t f}(u)`: minimizes `t f(x) + ½‖x − u‖²` over `brackets`.
pub fn prox_oracle(f: &dyn Fn(&[f64]) -> f64, u: &[f64], t: f64, brackets: &[(f64, f64)]) -> Vec<f64> {
    let obj = |x: &[f64]| {
        let q: f64 = x.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
        t * f(x) + 0.5 * q
    };
    box_argmin(&obj, brackets)
}

pub fn to_nalgebra(op: &LinearOperator) -> DMatrix<f64> {
    let d = op.to_dense();
    DMatrix::from_row_slice(d.rows(), d.cols(), d.data())
}

/// `λ_max(BᵀB)` from a dense symmetric eigendecomposition.
pub fn dense_norm_sq(op: &LinearOperator) -> f64 {
    let b = to_nalgebra(op);
    let gram = b.transpose() * &b;
    SymmetricEigen::new(gram).eigenvalues.iter().cloned().fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Dense row-major helpers for the reference recursions.
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn of(op: &LinearOperator) -> Dense {
        let d = op.to_dense();
        Dense {
            rows: d.rows(),
            cols: d.cols(),
            data: d.data().to_vec(),
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| dot(&self.data[r * self.cols..(r + 1) * self.cols], x))
            .collect()
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, yr) in self.data.chunks(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yr;
            }
        }
        out
    }
}

/// Single-block toy problem `½‖Ax − b‖² + δ_[lo,hi](x) + μ‖Bx‖₁` with
/// closed-form proxes: clamp for `g`, clamp to `[−μ, μ]` for `h*`.
pub struct ToyProblem {
    pub a: Dense,
    pub b: Vec<f64>,
    pub bop: Dense,
    pub mu: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ToyProblem {
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = self.a.mul(x).iter().zip(&self.b).map(|(p, b)| p - b).collect();
        self.a.mul_t(&r)
    }

    fn clamp(&self, x: Vec<f64>) -> Vec<f64> {
        x.into_iter().map(|v| v.clamp(self.lo, self.hi)).collect()
    }

    fn dual_clamp(&self, y: Vec<f64>) -> Vec<f64> {
        y.into_iter().map(|v| v.clamp(-self.mu, self.mu)).collect()
    }

    /// PDFP:
    /// `v = prox_{γg}(x − γ∇f(x) − γBᵀy)`,
    /// `y⁺ = prox_{(λ/γ)h*}(y + (λ/γ)Bv)`,
    /// `x⁺ = prox_{γg}(x − γ∇f(x) − γBᵀy⁺)`.
    pub fn pdfp(&self, gamma: f64, lambda: f64, iters: usize) -> Vec<Vec<f64>> {
        let n = self.a.cols;
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; self.bop.rows]);
        let mut out = Vec::new();
        for _ in 0..iters {
            let g = self.grad(&x);
            let primal = |y: &[f64]| {
                let bt = self.bop.mul_t(y);
                self.clamp((0..n).map(|i| x[i] - gamma * g[i] - gamma * bt[i]).collect())
            };
            let v = primal(&y);
            let bv = self.bop.mul(&v);
            y = self.dual_clamp(y.iter().zip(&bv).map(|(yi, b)| yi + lambda / gamma * b).collect());
            x = primal(&y);
            out.push(x.clone());
        }
        out
    }

    /// Condat–Vu:
    /// `x⁺ = prox_{τ'g}(x − τ'Bᵀy − τ'∇f(x))`,
    /// `y⁺ = prox_{σ'h*}(y + σ'B(2x⁺ − x))`.
    pub fn condat_vu(&self, tau_p: f64, sigma_p: f64, iters: usize) -> Vec<Vec<f64>> {
        let n = self.a.cols;
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; self.bop.rows]);
        let mut out = Vec::new();
        for _ in 0..iters {
            let g = self.grad(&x);
            let bt = self.bop.mul_t(&y);
            let xn = self.clamp((0..n).map(|i| x[i] - tau_p * bt[i] - tau_p * g[i]).collect());
            let ext: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
            let be = self.bop.mul(&ext);
            y = self.dual_clamp(y.iter().zip(&be).map(|(yi, b)| yi + sigma_p * b).collect());
            x = xn;
            out.push(x.clone());
        }
        out
    }
}

pub fn gaussian(rng: &mut GaussianStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.next_gaussian()).collect()
}

pub fn dense(rng: &mut GaussianStream, rows: usize, cols: usize) -> LinearOperator {
    LinearOperator::Dense(DenseMatrix::new(rows, cols, gaussian(rng, rows * cols)).unwrap())
}

pub fn small_projector(geometry: Geometry) -> LinearOperator {
    build_projector(&Scene {
        n: 10,
        n_views: 7,
        n_rays: 11,
        geometry,
        ..Scene::default()
    })
    .unwrap()
}

pub fn operator_zoo() -> Vec<(&'static str, LinearOperator)> {
    let mut rng = GaussianStream::new(3);
    vec![
        ("identity", LinearOperator::identity(9).unwrap()),
        ("zero", LinearOperator::zero(4, 6).unwrap()),
        ("dense", dense(&mut rng, 7, 5)),
        ("first_difference", first_difference(13).unwrap()),
        ("tv_gradient", tv_gradient(6, 5).unwrap()),
        ("tv_gradient_row", tv_gradient(1, 8).unwrap()),
        (
            "composition",
            LinearOperator::compose(dense(&mut rng, 4, 12), tv_gradient(3, 2).unwrap()).unwrap(),
        ),
        ("scaled", LinearOperator::scaled(-2.5, first_difference(6).unwrap()).unwrap()),
        ("parallel_projector", small_projector(Geometry::Parallel)),
        ("fan_projector", small_projector(Geometry::Fan)),
    ]
}
