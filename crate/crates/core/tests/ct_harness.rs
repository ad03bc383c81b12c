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

mod common;

use common::{dot, norm};
use proptest::prelude::*;
use proxsplit::ct::{
    add_gaussian_noise, assemble_piccs, build_projector, make_prior, nmsd, pixel_center, run_experiment, scene_rays,
    shepp_logan, snr, Geometry, Scene, SHEPP_LOGAN,
};
use proxsplit::linop::LinearOperator;
use proxsplit::solvers::{Algorithm, SolverConfig};
use proxsplit::Error;

fn scene(n: usize, views: usize, rays: usize, geometry: Geometry) -> Scene {
    Scene {
        n,
        n_views: views,
        n_rays: rays,
        geometry,
        ..Scene::default()
    }
}

#[test]
fn phantom_range_and_background() {
    for n in [8, 33, 64] {
        let p = shepp_logan(n).unwrap();
        assert_eq!(p.len(), n * n);
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        for idx in [0, n - 1, n * (n - 1), n * n - 1] {
            assert_eq!(p[idx], 0.0);
        }
    }
    assert!(matches!(shepp_logan(7), Err(Error::Parameter(_))));
}

/// Ellipses that are not their own mirror image under x ↦ −x.
fn asymmetric_ellipses() -> Vec<usize> {
    SHEPP_LOGAN
        .iter()
        .enumerate()
        .filter(|(_, e)| !(e.x0 == 0.0 && e.phi_deg == 0.0))
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn phantom_mirror_symmetric_away_from_off_axis_ellipses() {
    // the two large inner ellipses are mirror partners of different sizes and
    // the three small bottom ellipses are off-axis, so exact symmetry holds
    // only where neither a pixel nor its mirror touches one of them
    assert_eq!(asymmetric_ellipses(), vec![2, 3, 7, 9]);
    for n in [16, 64, 65] {
        let p = shepp_logan(n).unwrap();
        let mut compared = 0;
        for row in 0..n {
            for col in 0..n {
                let mirror = n - 1 - col;
                let (x, y) = pixel_center(n, row, col);
                let touched = asymmetric_ellipses()
                    .into_iter()
                    .any(|k| SHEPP_LOGAN[k].contains(x, y) || SHEPP_LOGAN[k].contains(-x, y));
                if !touched {
                    assert!((p[row + col * n] - p[row + mirror * n]).abs() <= 1e-12);
                    compared += 1;
                }
            }
        }
        assert!(compared > n * n / 2);
    }
}

#[test]
fn phantom_is_not_globally_symmetric() {
    let n = 64;
    let p = shepp_logan(n).unwrap();
    let mismatched = (0..n)
        .flat_map(|row| (0..n).map(move |col| (row, col)))
        .filter(|&(row, col)| p[row + col * n] != p[row + (n - 1 - col) * n])
        .count();
    assert!(mismatched > 0);
}

#[test]
fn chord_through_center_of_width_two_image() {
    let s = Scene {
        image_width: Some(2.0),
        ..scene(20, 4, 7, Geometry::Parallel)
    };
    let a = build_projector(&s).unwrap();
    let sino = a.apply(&vec![1.0; 400]).unwrap();
    assert!((sino[3] - 2.0).abs() <= 1e-9, "{}", sino[3]);
    assert!(sino.iter().all(|&v| v <= 2.0 * 2f64.sqrt() + 1e-12));
}

#[test]
fn projector_shape_and_bounds() {
    for geometry in [Geometry::Parallel, Geometry::Fan] {
        let s = scene(24, 9, 31, geometry);
        let a = build_projector(&s).unwrap();
        assert_eq!((a.rows(), a.cols()), (9 * 31, 24 * 24));
        let LinearOperator::Sparse(csr) = &a else { panic!("projector should be sparse") };
        for r in 0..csr.rows() {
            let (mut sum, mut last) = (0.0, None);
            for (c, v) in csr.row(r) {
                assert!(v > 0.0);
                assert!(last.is_none_or(|l| c > l));
                last = Some(c);
                sum += v;
            }
            assert!(sum <= 24.0 * 2f64.sqrt() + 1e-9);
        }
        assert_eq!(a.apply(&vec![0.0; 576]).unwrap(), vec![0.0; 279]);
    }
}

#[test]
fn fan_rays_start_at_the_source() {
    let s = scene(16, 8, 5, Geometry::Fan);
    let rays = scene_rays(&s);
    assert_eq!(rays.len(), 40);
    for ray in &rays {
        let r = ray.origin.0.hypot(ray.origin.1);
        assert!((r - 2.0).abs() < 1e-12);
        assert!((ray.dir.0.hypot(ray.dir.1) - 1.0).abs() < 1e-12);
    }
    // the middle ray of every view passes through the center
    for v in 0..8 {
        let ray = rays[v * 5 + 2];
        let cross = ray.origin.0 * ray.dir.1 - ray.origin.1 * ray.dir.0;
        assert!(cross.abs() < 1e-12);
    }
}

#[test]
fn invalid_scenes_rejected() {
    let bad = [
        scene(4, 10, 10, Geometry::Fan),
        scene(16, 0, 10, Geometry::Fan),
        Scene {
            source_radius: 1.2,
            ..scene(16, 4, 4, Geometry::Fan)
        },
        Scene {
            noise_var_b: -0.1,
            ..Scene::default()
        },
        Scene {
            image_width: Some(0.0),
            ..Scene::default()
        },
    ];
    for s in bad {
        assert!(matches!(build_projector(&s), Err(Error::Parameter(_))), "{s:?}");
    }
}

#[test]
fn noise_contracts() {
    let v: Vec<f64> = (0..50).map(|i| i as f64).collect();
    assert_eq!(add_gaussian_noise(&v, 0.0, 3).unwrap(), v);
    assert_eq!(make_prior(&v, 0.0, 3).unwrap(), v);
    assert_eq!(add_gaussian_noise(&v, 0.5, 3).unwrap(), add_gaussian_noise(&v, 0.5, 3).unwrap());
    assert_ne!(add_gaussian_noise(&v, 0.5, 3).unwrap(), add_gaussian_noise(&v, 0.5, 4).unwrap());
    assert_ne!(add_gaussian_noise(&v, 0.5, 3).unwrap(), make_prior(&v, 0.5, 3).unwrap());
    assert!(add_gaussian_noise(&v, -1.0, 3).is_err());
}

#[test]
fn noise_sample_variance() {
    let e = 0.05;
    let eta = add_gaussian_noise(&vec![0.0; 1_000_000], e, 17).unwrap();
    let mean = eta.iter().sum::<f64>() / eta.len() as f64;
    let var = eta.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / eta.len() as f64;
    assert!((var / e - 1.0).abs() < 0.02, "{var}");
    assert!(mean.abs() < 0.001);
}

#[test]
fn prior_error_energy() {
    let n = 64;
    let phantom = shepp_logan(n).unwrap();
    let mut total = 0.0;
    let seeds = 20;
    for seed in 0..seeds {
        let prior = make_prior(&phantom, 0.01, seed).unwrap();
        total += prior.iter().zip(&phantom).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    let mean = total / seeds as f64;
    let expected = (n * n) as f64 * 0.01;
    assert!((mean / expected - 1.0).abs() < 0.05, "{mean} vs {expected}");
}

#[test]
fn metric_examples() {
    assert!((snr(&[0.0, 2.0], &[0.0, 1.0]).unwrap() - 3.010_299_956_639_812).abs() < 1e-12);
    assert!((nmsd(&[0.0, 2.0], &[0.0, 1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    let x = [1.0, 4.0, 2.0, 7.0];
    let mean = [3.5; 4];
    assert!(snr(&x, &mean).unwrap().abs() < 1e-12);
    assert!((nmsd(&x, &mean).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(snr(&x, &x).unwrap(), f64::INFINITY);
    assert!(matches!(snr(&[2.0; 3], &x[..3]), Err(Error::Parameter(_))));
}

proptest! {
    #[test]
    fn snr_is_minus_twenty_log_nmsd(
        pair in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..40)
    ) {
        let (x, xr): (Vec<f64>, Vec<f64>) = pair.into_iter().unzip();
        prop_assume!(x.iter().any(|v| *v != x[0]));
        prop_assume!(x != xr);
        let s = snr(&x, &xr).unwrap();
        let m = nmsd(&x, &xr).unwrap();
        prop_assert!((s + 20.0 * m.log10()).abs() <= 1e-10);
    }
}

fn noiseless(n: usize, views: usize, rays: usize) -> Scene {
    Scene {
        noise_var_b: 0.0,
        noise_var_prior: 0.0,
        lambda1: 0.0,
        lambda2: 0.0,
        ..scene(n, views, rays, Geometry::Parallel)
    }
}

#[test]
fn assembled_model_basics() {
    let inst = assemble_piccs(&noiseless(16, 12, 23)).unwrap();
    let p = &inst.problem;
    let exact = p.system().apply(&inst.phantom).unwrap();
    assert_eq!(exact, p.data());
    assert_eq!(p.objective(&inst.phantom).unwrap(), 0.0);
    let mut neg = inst.phantom.clone();
    neg[5] = -1e-9;
    assert_eq!(p.objective(&neg).unwrap(), f64::INFINITY);
    assert_eq!(p.prior(), &inst.phantom[..]);
}

#[test]
fn least_squares_gradient_matches_finite_differences() {
    let inst = assemble_piccs(&Scene {
        noise_var_b: 0.01,
        ..scene(12, 8, 17, Geometry::Fan)
    })
    .unwrap();
    let f = &inst.problem.composite().smooth;
    let x: Vec<f64> = (0..144).map(|i| ((i * 37 % 11) as f64) / 11.0).collect();
    let mut g = vec![0.0; 144];
    f.gradient_into(&x, &mut g).unwrap();
    let h = 1e-5;
    for i in (0..144).step_by(7) {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[i] += h;
        xm[i] -= h;
        let fd = (f.value(&xp).unwrap() - f.value(&xm).unwrap()) / (2.0 * h);
        assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "{i}: {fd} vs {}", g[i]);
    }
    // Lipschitz bound on random pairs
    let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
    let mut gy = vec![0.0; 144];
    f.gradient_into(&y, &mut gy).unwrap();
    let lhs = norm(&g.iter().zip(&gy).map(|(a, b)| a - b).collect::<Vec<_>>());
    let dxy = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!(lhs <= f.lipschitz() * dxy * (1.0 + 1e-9));
    assert!(dot(&g, &g) > 0.0);
}

#[test]
fn noiseless_unregularized_recovery() {
    // 8×8 image, 600 parallel-beam rays: A has full column rank
    let inst = assemble_piccs(&noiseless(8, 30, 20)).unwrap();
    let config = inst
        .reference_config(Algorithm::Pdfb)
        .with_eps(1e-15)
        .with_max_outer(200_000);
    let rows = run_experiment(&inst, &[config]);
    let outcome = rows[0].outcome.as_ref().unwrap();
    assert!(outcome.snr_db >= 100.0, "{} dB after {} iters", outcome.snr_db, outcome.iterations);
}

#[test]
fn experiment_collects_errors_per_row() {
    let inst = assemble_piccs(&scene(16, 10, 23, Geometry::Fan)).unwrap();
    let good = inst.reference_config(Algorithm::Dfb).with_eps(1e-4);
    let bad = SolverConfig::dfb(1e6, 1.0);
    let rows = run_experiment(&inst, &[good, bad]);
    assert!(rows[0].outcome.is_ok());
    assert!(matches!(rows[1].outcome, Err(Error::Parameter(_))));
    let o = rows[0].outcome.as_ref().unwrap();
    assert_eq!(o.snr_trace.len(), o.iterations);
    assert_eq!(o.objective_trace.len(), o.iterations);
}
