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

use common::terms::*;
use common::{max_abs_diff, norm, prox_oracle};
use proptest::prelude::*;
use proxsplit::prox::{prox_conjugate, prox_scaled, prox_translated, prox_weighted_conjugate, L1Norm, Scaled, Translated};

#[test]
fn prox_matches_golden_section_oracle() {
    let mut worst: f64 = 0.0;
    let samples = [
        vec![3.7, -0.2, 0.9],
        vec![-4.1, 1.05, -2.6],
        vec![0.45, -0.45, 0.0],
        vec![2.0, 2.0, -1.9],
    ];
    for kind in KINDS {
        for n in dims_for(kind) {
            for sample in &samples {
                for t in [0.1, 1.0, 3.0] {
                    let u = &sample[..n];
                    let f = term(kind, n);
                    let got = f.prox(u, t).unwrap();
                    let brackets = vec![bracket(kind); n];
                    let oracle = prox_oracle(&|x| value(kind, x), u, t, &brackets);
                    let gap = max_abs_diff(&got, &oracle);
                    assert!(gap < 1e-4, "{kind:?} n={n} u={u:?} t={t}: {got:?} vs {oracle:?}");
                    worst = worst.max(gap);
                }
            }
        }
    }
    println!("worst oracle gap {worst:e}");
}

#[test]
fn translated_and_scaled_helpers_match_oracle() {
    let c = [0.5, -1.0, 2.0];
    for (u, t, s) in [([1.0, 1.0, 1.0], 0.7, 2.0), ([-3.0, 0.2, 4.0], 1.5, 0.5), ([0.5, -1.0, 2.0], 1.0, 3.0)] {
        let composed = prox_scaled(&Translated::new(L1Norm, c.to_vec()), s, &u, t).unwrap();
        let direct = prox_translated(&Scaled::new(L1Norm, s).unwrap(), &c, &u, t).unwrap();
        let oracle = prox_oracle(
            &|x| s * x.iter().zip(&c).map(|(a, b)| (a - b).abs()).sum::<f64>(),
            &u,
            t,
            &[(-10.0, 10.0); 3],
        );
        assert!(max_abs_diff(&composed, &oracle) < 1e-4);
        assert!(max_abs_diff(&direct, &oracle) < 1e-4);
    }
}

#[test]
fn weighted_conjugate_example() {
    // (1/w) prox_{w ℓ₁*}(w u) with w = ½, u = 4 is 2 · clamp(2) = 2
    assert_eq!(prox_weighted_conjugate(&L1Norm, 0.5, &[4.0], 1.0).unwrap(), vec![2.0]);
    let u = [0.3, -2.0, 5.0];
    assert_eq!(
        prox_weighted_conjugate(&L1Norm, 1.0, &u, 0.7).unwrap(),
        prox_conjugate(&L1Norm, &u, 0.7).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn moreau_decomposition(kind in kind_strategy(), u in vec_strategy(6), t in step_strategy()) {
        let u = input(kind, u);
        let p = term(kind, u.len()).prox(&u, t).unwrap();
        let scaled: Vec<f64> = u.iter().map(|v| v / t).collect();
        let q = conj_prox(kind, &scaled, 1.0 / t);
        let residual: Vec<f64> = u.iter().zip(&p).zip(&q).map(|((u, p), q)| p + t * q - u).collect();
        prop_assert!(norm(&residual) <= 1e-12 * (1.0 + norm(&u)), "{kind:?}: residual {residual:?}");
    }

    #[test]
    fn conjugate_prox_matches_closed_form(kind in kind_strategy(), u in vec_strategy(6), t in step_strategy()) {
        let u = input(kind, u);
        let got = prox_conjugate(term(kind, u.len()).as_ref(), &u, t).unwrap();
        let expected = conj_prox(kind, &u, t);
        prop_assert!(max_abs_diff(&got, &expected) <= 1e-12 * (1.0 + norm(&u)));
    }

    #[test]
    fn firm_nonexpansiveness(kind in kind_strategy(), x in vec_strategy(6), y in vec_strategy(6), t in step_strategy()) {
        let n = x.len().min(y.len());
        let (x, y) = (input(kind, x[..n].to_vec()), input(kind, y[..n].to_vec()));
        let f = term(kind, x.len());
        let (px, py) = (f.prox(&x, t).unwrap(), f.prox(&y, t).unwrap());
        let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
        let rx: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
        let ry: Vec<f64> = y.iter().zip(&py).map(|(a, b)| a - b).collect();
        let slack = sq(&x, &y) - sq(&rx, &ry) - sq(&px, &py);
        prop_assert!(slack >= -1e-10, "{kind:?}: slack {slack}");
    }

    #[test]
    fn subgradient_inequality(kind in kind_strategy(), u in vec_strategy(6), y in vec_strategy(6), t in step_strategy()) {
        let n = u.len().min(y.len());
        let (u, y) = (input(kind, u[..n].to_vec()), input(kind, y[..n].to_vec()));
        let x = term(kind, u.len()).prox(&u, t).unwrap();
        let lhs: f64 = x.iter().zip(&u).zip(&y).map(|((x, u), y)| (x - u) * (y - x)).sum();
        let rhs = t * (value(kind, &x) - value(kind, &y));
        prop_assert!(lhs - rhs >= -1e-9, "{kind:?}: {lhs} < {rhs}");
    }

    #[test]
    fn symmetric_terms_fix_the_origin(n in 1usize..6, t in step_strategy()) {
        let zero = vec![0.0; 2 * n];
        for kind in [Kind::L1, Kind::L21, Kind::Zero, Kind::Origin, Kind::ScaledL1] {
            prop_assert_eq!(term(kind, 2 * n).prox(&zero, t).unwrap(), zero.clone());
        }
    }
}
