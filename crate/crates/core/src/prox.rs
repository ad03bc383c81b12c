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

//! Proximity operators.
//!
//! `prox_{t f}(u) = argmin_x ½‖x − u‖² + t f(x)`. The objective is strictly
//! convex in `x`, so the minimizer is unique and no tie-breaking is needed.
//! Conjugate proxes are obtained from the primal ones through the Moreau
//! decomposition `prox_{t f}(u) + t prox_{f*/t}(u/t) = u`.

use std::fmt::Debug;

use crate::error::{check_len, Error, Result};

/// A closed proper convex function usable as `g` or `hᵢ`.
pub trait ProxTerm: Debug + Send + Sync {
    /// `f(x)`, `+∞` outside the domain of an indicator.
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Writes `prox_{t f}(u)` into `out`.
    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()>;

    fn prox(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; u.len()];
        self.prox_into(u, t, &mut out)?;
        Ok(out)
    }
}

impl<T: ProxTerm + ?Sized> ProxTerm for Box<T> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        (**self).prox_into(u, t, out)
    }
}

fn check_step(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("prox step must be positive and finite, got {t}")))
    }
}

fn check_pair_len(len: usize) -> Result<()> {
    if len.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::dim("l2,1 pairing (even length)", len + 1, len))
    }
}

/// `‖x‖₁`
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct L1Norm;

impl ProxTerm for L1Norm {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(x.iter().map(|v| v.abs()).sum())
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_step(t)?;
        check_len("prox_l1", u.len(), out.len())?;
        for (o, &v) in out.iter_mut().zip(u) {
            *o = v.signum() * (v.abs() - t).max(0.0);
        }
        Ok(())
    }
}

/// `‖y‖_{2,1} = Σᵢ √(yᵢ² + y_{p+i}²)` for `y` of length `2p`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct L21Norm;

impl ProxTerm for L21Norm {
    fn value(&self, x: &[f64]) -> Result<f64> {
        check_pair_len(x.len())?;
        let (a, b) = x.split_at(x.len() / 2);
        Ok(a.iter().zip(b).map(|(p, q)| p.hypot(*q)).sum())
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_step(t)?;
        check_pair_len(u.len())?;
        check_len("prox_l21", u.len(), out.len())?;
        let p = u.len() / 2;
        for i in 0..p {
            let (a, b) = (u[i], u[p + i]);
            let r = a.hypot(b);
            let shrink = if r == 0.0 { 1.0 } else { (1.0 - t / r).max(0.0) };
            out[i] = a * shrink;
            out[p + i] = b * shrink;
        }
        Ok(())
    }
}

/// Indicator of the box `[lo, hi]ⁿ`; either bound may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxIndicator {
    lo: f64,
    hi: f64,
}

impl BoxIndicator {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::param(format!("empty box [{lo}, {hi}]")));
        }
        Ok(BoxIndicator { lo, hi })
    }

    /// `C = {x | x ≥ 0}`
    pub fn nonnegative() -> Self {
        BoxIndicator {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&v| v >= self.lo && v <= self.hi)
    }
}

impl ProxTerm for BoxIndicator {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.contains(x) { 0.0 } else { f64::INFINITY })
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_step(t)?;
        check_len("project_box", u.len(), out.len())?;
        for (o, &v) in out.iter_mut().zip(u) {
            *o = v.clamp(self.lo, self.hi);
        }
        Ok(())
    }
}

/// `f ≡ 0`; its prox is the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroFunction;

impl ProxTerm for ZeroFunction {
    fn value(&self, _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_step(t)?;
        check_len("prox of zero", u.len(), out.len())?;
        out.copy_from_slice(u);
        Ok(())
    }
}

/// Indicator of `{0}`; its prox is identically zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OriginIndicator;

impl ProxTerm for OriginIndicator {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(if x.iter().all(|&v| v == 0.0) { 0.0 } else { f64::INFINITY })
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_step(t)?;
        check_len("prox of origin indicator", u.len(), out.len())?;
        out.iter_mut().for_each(|o| *o = 0.0);
        Ok(())
    }
}

/// `x ↦ f(x − shift)`
#[derive(Debug, Clone)]
pub struct Translated<F> {
    inner: F,
    shift: Vec<f64>,
}

impl<F: ProxTerm> Translated<F> {
    pub fn new(inner: F, shift: Vec<f64>) -> Self {
        Translated { inner, shift }
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }
}

impl<F: ProxTerm> ProxTerm for Translated<F> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        check_len("translated term", self.shift.len(), x.len())?;
        let d: Vec<f64> = x.iter().zip(&self.shift).map(|(a, c)| a - c).collect();
        self.inner.value(&d)
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_len("translated term", self.shift.len(), u.len())?;
        check_len("translated term", u.len(), out.len())?;
        let d: Vec<f64> = u.iter().zip(&self.shift).map(|(a, c)| a - c).collect();
        self.inner.prox_into(&d, t, out)?;
        for (o, c) in out.iter_mut().zip(&self.shift) {
            *o += c;
        }
        Ok(())
    }
}

/// `x ↦ factor · f(x)` with `factor > 0`.
#[derive(Debug, Clone)]
pub struct Scaled<F> {
    inner: F,
    factor: f64,
}

impl<F: ProxTerm> Scaled<F> {
    pub fn new(inner: F, factor: f64) -> Result<Self> {
        if factor > 0.0 && factor.is_finite() {
            Ok(Scaled { inner, factor })
        } else {
            Err(Error::param(format!("scale factor must be positive, got {factor}")))
        }
    }
}

impl<F: ProxTerm> ProxTerm for Scaled<F> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.factor * self.inner.value(x)?)
    }

    fn prox_into(&self, u: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        check_step(t)?;
        self.inner.prox_into(u, self.factor * t, out)
    }
}

/// Componentwise soft threshold `sign(uᵢ)·max(|uᵢ| − t, 0)`.
pub fn prox_l1(u: &[f64], t: f64) -> Result<Vec<f64>> {
    L1Norm.prox(u, t)
}

/// Group soft threshold on the pairs `(uᵢ, u_{p+i})`.
pub fn prox_l21(u: &[f64], t: f64) -> Result<Vec<f64>> {
    L21Norm.prox(u, t)
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_box(u: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    BoxIndicator::new(lo, hi)?.prox(u, 1.0)
}

/// `prox_{t f*}(u) = u − t · prox_{f/t}(u / t)`.
pub fn prox_conjugate<F: ProxTerm + ?Sized>(f: &F, u: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; u.len()];
    prox_conjugate_into(f, u, t, &mut out)?;
    Ok(out)
}

pub(crate) fn prox_conjugate_into<F: ProxTerm + ?Sized>(
    f: &F,
    u: &[f64],
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    check_step(t)?;
    let scaled: Vec<f64> = u.iter().map(|v| v / t).collect();
    f.prox_into(&scaled, 1.0 / t, out)?;
    for (o, &v) in out.iter_mut().zip(u) {
        *o = v - t * *o;
    }
    Ok(())
}

/// Prox of `x ↦ f(x − c)`: `c + prox_{t f}(u − c)`.
pub fn prox_translated<F: ProxTerm + ?Sized>(f: &F, c: &[f64], u: &[f64], t: f64) -> Result<Vec<f64>> {
    check_len("prox_translated", c.len(), u.len())?;
    let d: Vec<f64> = u.iter().zip(c).map(|(a, b)| a - b).collect();
    let mut out = f.prox(&d, t)?;
    for (o, b) in out.iter_mut().zip(c) {
        *o += b;
    }
    Ok(out)
}

/// Prox of `s · f` with step `t`: `prox_{(s t) f}(u)`.
pub fn prox_scaled<F: ProxTerm + ?Sized>(f: &F, s: f64, u: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param(format!("scale factor must be positive, got {s}")));
    }
    check_step(t)?;
    f.prox(u, s * t)
}

/// One block of the conjugate prox in the weighted product space:
/// `(1/w) · prox_{w t f*}(w u)` for `w ∈ (0, 1]`.
pub fn prox_weighted_conjugate<F: ProxTerm + ?Sized>(f: &F, w: f64, u: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; u.len()];
    prox_weighted_conjugate_into(f, w, u, t, &mut out)?;
    Ok(out)
}

pub(crate) fn prox_weighted_conjugate_into<F: ProxTerm + ?Sized>(
    f: &F,
    w: f64,
    u: &[f64],
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::param(format!("block weight must lie in (0, 1], got {w}")));
    }
    if w == 1.0 {
        return prox_conjugate_into(f, u, t, out);
    }
    let wu: Vec<f64> = u.iter().map(|v| w * v).collect();
    prox_conjugate_into(f, &wu, w * t, out)?;
    out.iter_mut().for_each(|o| *o /= w);
    Ok(())
}
