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

//! Prox term families with independent closed forms.

use proptest::prelude::*;
use proxsplit::prox::{BoxIndicator, L1Norm, L21Norm, OriginIndicator, ProxTerm, Scaled, Translated, ZeroFunction};

/// The term families under test, with independent closed forms for the
/// conjugate prox `prox_{s f*}`.
#[derive(Debug, Clone, Copy)]
pub enum Kind {
    L1,
    L21,
    Boxed,
    Zero,
    Origin,
    ScaledL1,
    ShiftedL1,
}

pub const KINDS: [Kind; 7] = [
    Kind::L1,
    Kind::L21,
    Kind::Boxed,
    Kind::Zero,
    Kind::Origin,
    Kind::ScaledL1,
    Kind::ShiftedL1,
];

pub const BOX: (f64, f64) = (-0.5, 1.5);
pub const SCALE: f64 = 2.5;

pub fn shift(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.7 - 0.4 * i as f64).collect()
}

pub fn term(kind: Kind, n: usize) -> Box<dyn ProxTerm> {
    match kind {
        Kind::L1 => Box::new(L1Norm),
        Kind::L21 => Box::new(L21Norm),
        Kind::Boxed => Box::new(BoxIndicator::new(BOX.0, BOX.1).unwrap()),
        Kind::Zero => Box::new(ZeroFunction),
        Kind::Origin => Box::new(OriginIndicator),
        Kind::ScaledL1 => Box::new(Scaled::new(L1Norm, SCALE).unwrap()),
        Kind::ShiftedL1 => Box::new(Translated::new(L1Norm, shift(n))),
    }
}

/// Independent value of `f`.
pub fn value(kind: Kind, x: &[f64]) -> f64 {
    let l1 = |x: &[f64]| x.iter().map(|v| v.abs()).sum::<f64>();
    match kind {
        Kind::L1 => l1(x),
        Kind::L21 => {
            let h = x.len() / 2;
            (0..h).map(|i| x[i].hypot(x[h + i])).sum()
        }
        Kind::Boxed => {
            if x.iter().all(|&v| (BOX.0..=BOX.1).contains(&v)) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Kind::Zero => 0.0,
        Kind::Origin => {
            if x.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Kind::ScaledL1 => SCALE * l1(x),
        Kind::ShiftedL1 => {
            let c = shift(x.len());
            x.iter().zip(&c).map(|(a, b)| (a - b).abs()).sum()
        }
    }
}

/// `prox_{s f*}(v)` from the conjugates: ℓ₁* and ℓ₂,₁* are indicators of
/// unit dual-norm balls, the box conjugate is its support function, and
/// `(f(· − c))* = f* + ⟨c, ·⟩`.
pub fn conj_prox(kind: Kind, v: &[f64], s: f64) -> Vec<f64> {
    match kind {
        Kind::L1 => v.iter().map(|x| x.clamp(-1.0, 1.0)).collect(),
        Kind::L21 => {
            let h = v.len() / 2;
            let mut out = v.to_vec();
            for i in 0..h {
                let r = v[i].hypot(v[h + i]);
                if r > 1.0 {
                    out[i] /= r;
                    out[h + i] /= r;
                }
            }
            out
        }
        Kind::Boxed => v
            .iter()
            .map(|&x| {
                if x > s * BOX.1 {
                    x - s * BOX.1
                } else if x < s * BOX.0 {
                    x - s * BOX.0
                } else {
                    0.0
                }
            })
            .collect(),
        Kind::Zero => vec![0.0; v.len()],
        Kind::Origin => v.to_vec(),
        Kind::ScaledL1 => v.iter().map(|x| x.clamp(-SCALE, SCALE)).collect(),
        Kind::ShiftedL1 => {
            let c = shift(v.len());
            v.iter().zip(&c).map(|(x, ci)| (x - s * ci).clamp(-1.0, 1.0)).collect()
        }
    }
}

pub fn dims_for(kind: Kind) -> Vec<usize> {
    match kind {
        Kind::L21 => vec![2],
        _ => vec![1, 2, 3],
    }
}

pub fn bracket(kind: Kind) -> (f64, f64) {
    match kind {
        Kind::Boxed => BOX,
        Kind::Origin => (0.0, 0.0),
        _ => (-10.0, 10.0),
    }
}

pub fn vec_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_len)
}

pub fn even_len(mut v: Vec<f64>) -> Vec<f64> {
    if v.len() % 2 == 1 {
        v.push(0.3);
    }
    v
}

pub fn step_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.1), Just(1.0), Just(10.0), 0.05f64..5.0]
}

pub fn kind_strategy() -> impl Strategy<Value = Kind> {
    (0..KINDS.len()).prop_map(|i| KINDS[i])
}

pub fn input(kind: Kind, u: Vec<f64>) -> Vec<f64> {
    match kind {
        Kind::L21 => even_len(u),
        _ => u,
    }
}

