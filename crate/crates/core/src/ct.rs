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

//! Desk-scale CT reconstruction harness.
//!
//! A Shepp–Logan phantom is projected with a Siddon line-length projector.
//! Measurements and the prior image get seeded Gaussian noise, and the
//! prior-image TV model is scored with SNR and NMSD.
//!
//! Images live on `[−1, 1]²` and are vectorized column-major; row 0 is the
//! top of the image (`y = +1`), column 0 the left edge (`x = −1`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::linop::{tv_gradient, CsrMatrix, LinearOperator};
use crate::prox::BoxIndicator;
use crate::rng::GaussianStream;
use crate::solvers::{Algorithm, PiccsProblem, SolverConfig, Start, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Views over `[0°, 180°)`.
    Parallel,
    /// Point source on a circle, views over `[0°, 360°)`.
    Fan,
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "parallel" => Ok(Geometry::Parallel),
            "fan" => Ok(Geometry::Fan),
            other => Err(Error::param(format!("unknown geometry '{other}' (valid: parallel, fan)"))),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Parallel => "parallel",
            Geometry::Fan => "fan",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Image side length in pixels.
    pub n: usize,
    pub n_views: usize,
    pub n_rays: usize,
    pub geometry: Geometry,
    /// Fan-beam source distance from the image center, in image half-widths.
    pub source_radius: f64,
    /// Physical side length of the image, which sets the unit of the chord
    /// lengths in `A`. `None` means one unit per pixel (side length `n`).
    pub image_width: Option<f64>,
    /// Absolute variance of the noise added to the measurements.
    pub noise_var_b: f64,
    /// Absolute variance of the noise added to the phantom to form the prior.
    pub noise_var_prior: f64,
    pub seed: u64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for Scene {
    /// 64×64 phantom, 20 fan views of 95 rays, `e = 0.01`, `λ = (0.4, 0.5)`.
    fn default() -> Self {
        Scene {
            n: 64,
            n_views: 20,
            n_rays: 95,
            geometry: Geometry::Fan,
            source_radius: 2.0,
            image_width: None,
            noise_var_b: 0.01,
            noise_var_prior: 0.01,
            seed: 2017,
            lambda1: 0.4,
            lambda2: 0.5,
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::param(format!("phantom needs n >= 8, got {}", self.n)));
        }
        if self.n_views == 0 || self.n_rays == 0 {
            return Err(Error::param("n_views and n_rays must be positive"));
        }
        if self.geometry == Geometry::Fan && !(self.source_radius > 2f64.sqrt() && self.source_radius.is_finite()) {
            return Err(Error::param(format!(
                "fan source radius must exceed the image half-diagonal sqrt(2), got {}",
                self.source_radius
            )));
        }
        if let Some(w) = self.image_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::param(format!("image_width must be positive and finite, got {w}")));
            }
        }
        for (name, v) in [
            ("noise_var_b", self.noise_var_b),
            ("noise_var_prior", self.noise_var_prior),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Physical side length of the image.
    pub fn width(&self) -> f64 {
        self.image_width.unwrap_or(self.n as f64)
    }

    /// Noise stream for the measurements.
    pub fn measurement_stream(&self) -> GaussianStream {
        GaussianStream::substream(self.seed, 0)
    }

    /// Noise stream for the prior image.
    pub fn prior_stream(&self) -> GaussianStream {
        GaussianStream::substream(self.seed, 1)
    }
}

/// One ellipse of the phantom: intensity, semi-axes, center, rotation (degrees).
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub intensity: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub phi_deg: f64,
}

const fn ellipse(intensity: f64, a: f64, b: f64, x0: f64, y0: f64, phi_deg: f64) -> Ellipse {
    Ellipse {
        intensity,
        a,
        b,
        x0,
        y0,
        phi_deg,
    }
}

/// Shepp–Logan ellipses with the high-contrast ("modified") intensities.
///
/// | # | intensity | a      | b      | x0    | y0     | φ (deg) |
/// |---|-----------|--------|--------|-------|--------|---------|
/// | 1 |  1.0      | 0.69   | 0.92   |  0    |  0     |   0     |
/// | 2 | -0.8      | 0.6624 | 0.8740 |  0    | -0.0184|   0     |
/// | 3 | -0.2      | 0.11   | 0.31   |  0.22 |  0     | -18     |
/// | 4 | -0.2      | 0.16   | 0.41   | -0.22 |  0     |  18     |
/// | 5 |  0.1      | 0.21   | 0.25   |  0    |  0.35  |   0     |
/// | 6 |  0.1      | 0.046  | 0.046  |  0    |  0.1   |   0     |
/// | 7 |  0.1      | 0.046  | 0.046  |  0    | -0.1   |   0     |
/// | 8 |  0.1      | 0.046  | 0.023  | -0.08 | -0.605 |   0     |
/// | 9 |  0.1      | 0.023  | 0.023  |  0    | -0.606 |   0     |
/// |10 |  0.1      | 0.023  | 0.046  |  0.06 | -0.605 |   0     |
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    ellipse(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    ellipse(-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    ellipse(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    ellipse(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    ellipse(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    ellipse(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    ellipse(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    ellipse(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    ellipse(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    ellipse(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.phi_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.x0, y - self.y0);
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        (xr / self.a).powi(2) + (yr / self.b).powi(2) <= 1.0
    }
}

/// Center of pixel `(row, col)` on an `n × n` grid over `[−1, 1]²`.
pub fn pixel_center(n: usize, row: usize, col: usize) -> (f64, f64) {
    let h = 2.0 / n as f64;
    (-1.0 + (col as f64 + 0.5) * h, 1.0 - (row as f64 + 0.5) * h)
}

/// The phantom sampled at pixel centers and clamped to `[0, 1]`.
pub fn shepp_logan(n: usize) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::param(format!("phantom needs n >= 8, got {n}")));
    }
    let mut img = vec![0.0; n * n];
    for col in 0..n {
        for row in 0..n {
            let (x, y) = pixel_center(n, row, col);
            let v: f64 = SHEPP_LOGAN
                .iter()
                .filter(|e| e.contains(x, y))
                .map(|e| e.intensity)
                .sum();
            img[row + col * n] = v.clamp(0.0, 1.0);
        }
    }
    Ok(img)
}

/// A ray `origin + t · dir` with unit `dir`.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: (f64, f64),
    pub dir: (f64, f64),
}

impl Ray {
    fn through(origin: (f64, f64), target: (f64, f64)) -> Self {
        let (dx, dy) = (target.0 - origin.0, target.1 - origin.1);
        let len = dx.hypot(dy);
        Ray {
            origin,
            dir: (dx / len, dy / len),
        }
    }
}

/// Rays of view `v` (view-major ordering of the sinogram rows).
pub fn scene_rays(scene: &Scene) -> Vec<Ray> {
    let mut rays = Vec::with_capacity(scene.n_views * scene.n_rays);
    for v in 0..scene.n_views {
        match scene.geometry {
            Geometry::Parallel => {
                let theta = PI * v as f64 / scene.n_views as f64;
                let (s, c) = theta.sin_cos();
                let half = 2f64.sqrt();
                for r in 0..scene.n_rays {
                    let off = -half + (r as f64 + 0.5) * 2.0 * half / scene.n_rays as f64;
                    rays.push(Ray {
                        origin: (-s * off, c * off),
                        dir: (c, s),
                    });
                }
            }
            Geometry::Fan => {
                let beta = 2.0 * PI * v as f64 / scene.n_views as f64;
                let (s, c) = beta.sin_cos();
                let radius = scene.source_radius;
                let source = (radius * c, radius * s);
                // virtual detector through the origin, wide enough that the
                // fan covers the circle circumscribing the image
                let half = 2f64.sqrt() * radius / (radius * radius - 2.0).sqrt();
                for r in 0..scene.n_rays {
                    let off = -half + (r as f64 + 0.5) * 2.0 * half / scene.n_rays as f64;
                    rays.push(Ray::through(source, (-s * off, c * off)));
                }
            }
        }
    }
    rays
}

/// Intersection lengths of `ray` with the pixels of an `n × n` grid on
/// `[−1, 1]²` (Siddon traversal), as `(pixel index, length)` pairs.
pub fn siddon(ray: &Ray, n: usize) -> Vec<(usize, f64)> {
    const PARALLEL_EPS: f64 = 1e-14;
    let (px, py) = ray.origin;
    let (dx, dy) = ray.dir;
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < PARALLEL_EPS {
            if p <= -1.0 || p >= 1.0 {
                return Vec::new();
            }
        } else {
            let (a, b) = ((-1.0 - p) / d, (1.0 - p) / d);
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    // also rejects NaN bounds
    if t_hi.partial_cmp(&t_lo) != Some(std::cmp::Ordering::Greater) {
        return Vec::new();
    }

    let h = 2.0 / n as f64;
    let mut ts = vec![t_lo, t_hi];
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < PARALLEL_EPS {
            continue;
        }
        for k in 1..n {
            let t = (-1.0 + k as f64 * h - p) / d;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);

    let mut out = Vec::with_capacity(ts.len());
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let (x, y) = (px + tm * dx, py + tm * dy);
        let col = (((x + 1.0) / h).floor() as isize).clamp(0, n as isize - 1) as usize;
        let row = (((1.0 - y) / h).floor() as isize).clamp(0, n as isize - 1) as usize;
        out.push((row + col * n, len));
    }
    out
}

/// Sparse system matrix: row `v · n_rays + r` holds the chord lengths of
/// ray `r` of view `v` through each pixel, in the units of
/// [`Scene::width`] (a ray crossing the whole image horizontally sums to
/// the width).
pub fn build_projector(scene: &Scene) -> Result<LinearOperator> {
    scene.validate()?;
    let unit = scene.width() / 2.0;
    let rows = scene_rays(scene)
        .iter()
        .map(|ray| {
            let mut row = siddon(ray, scene.n);
            row.iter_mut().for_each(|(_, len)| *len *= unit);
            row
        })
        .collect();
    Ok(LinearOperator::Sparse(CsrMatrix::from_row_lists(scene.n * scene.n, rows)))
}

/// `v + η`, `η` i.i.d. `N(0, variance)` from the stream seeded by `seed`.
pub fn add_gaussian_noise(v: &[f64], variance: f64, seed: u64) -> Result<Vec<f64>> {
    check_variance(variance)?;
    Ok(GaussianStream::substream(seed, 0).perturb(v, variance))
}

/// Prior image: phantom plus unclamped Gaussian noise from the prior stream.
pub fn make_prior(phantom: &[f64], variance: f64, seed: u64) -> Result<Vec<f64>> {
    check_variance(variance)?;
    Ok(GaussianStream::substream(seed, 1).perturb(phantom, variance))
}

fn check_variance(variance: f64) -> Result<()> {
    if variance >= 0.0 && variance.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("noise variance must be finite and >= 0, got {variance}")))
    }
}

/// `(‖x − x̄‖², ‖x_r − x‖²)`
fn metric_parts(x: &[f64], xr: &[f64]) -> Result<(f64, f64)> {
    check_len("reconstruction", x.len(), xr.len())?;
    if x.is_empty() {
        return Err(Error::param("empty image"));
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let spread: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if spread == 0.0 {
        return Err(Error::param("SNR/NMSD undefined for a constant ground truth"));
    }
    let err: f64 = x.iter().zip(xr).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((spread, err))
}

/// `10 log₁₀(‖x − x̄‖² / ‖x_r − x‖²)` in dB; `+∞` for an exact reconstruction.
pub fn snr(x: &[f64], xr: &[f64]) -> Result<f64> {
    let (spread, err) = metric_parts(x, xr)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (spread / err).log10())
}

/// `‖x − x_r‖ / ‖x − x̄‖`
pub fn nmsd(x: &[f64], xr: &[f64]) -> Result<f64> {
    let (spread, err) = metric_parts(x, xr)?;
    Ok((err / spread).sqrt())
}

/// A fully assembled reconstruction instance.
#[derive(Debug)]
pub struct CtInstance {
    pub scene: Scene,
    pub phantom: Vec<f64>,
    pub problem: PiccsProblem,
}

/// Builds `A`, `b = A·phantom + noise`, `x_p`, `D₁ = D₂ = tv_gradient(n, n)`
/// and the model with `C = {x ≥ 0}`.
pub fn assemble_piccs(scene: &Scene) -> Result<CtInstance> {
    scene.validate()?;
    let phantom = shepp_logan(scene.n)?;
    let a = build_projector(scene)?;
    let clean = a.apply(&phantom)?;
    let b = scene.measurement_stream().perturb(&clean, scene.noise_var_b);
    let prior = scene.prior_stream().perturb(&phantom, scene.noise_var_prior);
    let d = tv_gradient(scene.n, scene.n)?;
    let problem = PiccsProblem::new(
        a,
        b,
        d.clone(),
        d,
        prior,
        scene.lambda1,
        scene.lambda2,
        BoxIndicator::nonnegative(),
    )?;
    Ok(CtInstance {
        scene: scene.clone(),
        phantom,
        problem,
    })
}

impl CtInstance {
    /// Step sizes used in the reference experiments: `γ = 1.9/‖A‖²` and
    /// `λ = 0.9/(‖D₁‖² + ‖D₂‖²)` for DFB, `γ = 1.9/‖A‖²`, `τ = 1` for PDFB,
    /// `γ = 1.9/(‖A‖² + ρ₁‖D₁‖² + ρ₂‖D₂‖²)`, `ρ₁ = ρ₂ = 1` for ADMM.
    pub fn reference_config(&self, algorithm: Algorithm) -> SolverConfig {
        let (a, d1, d2) = self.problem.norm_sq_bounds();
        match algorithm {
            Algorithm::Dfb => SolverConfig::dfb(1.9 / a, 0.9 / (d1 + d2)),
            Algorithm::Pdfb => SolverConfig::pdfb(1.9 / a, 1.0, None),
            Algorithm::Admm => SolverConfig::admm(1.9 / (a + d1 + d2), 1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub snr_db: f64,
    pub nmsd: f64,
    pub iterations: usize,
    pub final_objective: f64,
    pub termination: Termination,
    pub objective_trace: Vec<f64>,
    pub snr_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    pub x_final: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub outcome: Result<RunOutcome>,
}

fn run_one(instance: &CtInstance, config: &SolverConfig) -> Result<RunOutcome> {
    let truth = &instance.phantom;
    let metric = |x: &[f64]| snr(truth, x).unwrap_or(f64::NAN);
    let report = instance.problem.solve(config, &Start::default(), Some(&metric))?;
    Ok(RunOutcome {
        snr_db: snr(truth, &report.x_final)?,
        nmsd: nmsd(truth, &report.x_final)?,
        iterations: report.outer_iters,
        final_objective: report.final_objective(),
        termination: report.termination,
        objective_trace: report.objective_trace,
        snr_trace: report.metric_trace,
        residual_trace: report.residual_trace,
        x_final: report.x_final,
    })
}

/// Solves the instance once per config from `x⁰ = 0`, one thread per
/// config. Failures are recorded per row.
pub fn run_experiment(instance: &CtInstance, configs: &[SolverConfig]) -> Vec<ExperimentRow> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || run_one(instance, cfg)))
            .collect();
        handles
            .into_iter()
            .zip(configs)
            .map(|(h, cfg)| ExperimentRow {
                algorithm: cfg.algorithm,
                eps: cfg.eps,
                outcome: h
                    .join()
                    .unwrap_or_else(|_| Err(Error::param("solver thread panicked"))),
            })
            .collect()
    })
}

/// Index and size of the first drop larger than `slack` in `trace` after
/// skipping the leading `warmup_fraction` of its entries.
pub fn first_decrease(trace: &[f64], warmup_fraction: f64, slack: f64) -> Option<(usize, f64)> {
    let start = (trace.len() as f64 * warmup_fraction).ceil() as usize;
    (start.max(1)..trace.len()).find_map(|k| {
        let drop = trace[k - 1] - trace[k];
        (drop > slack).then_some((k, drop))
    })
}
