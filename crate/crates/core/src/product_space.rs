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

//! Stacking `m` composite terms `hᵢ(Bᵢ x)` into a single term `h(Bx)` on the
//! product space `G = G₁ × ⋯ × G_m`.
//!
//! Two inner products are supported: the weighted `Σ wᵢ⟨yᵢ, zᵢ⟩` and the
//! plain `Σ ⟨yᵢ, zᵢ⟩`. They scale dual variables differently, so
//! "unweighted" is its own mode rather than equal weights `1/m`.

use crate::error::{check_len, Error, Result};
use crate::linop::{op_norm_sq, LinearOperator, NORM_MAX_ITER, NORM_TOL};
use crate::prox::{prox_weighted_conjugate_into, ProxTerm};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One composite term `h(B x)`.
#[derive(Debug)]
pub struct Block {
    pub op: LinearOperator,
    pub term: Box<dyn ProxTerm>,
}

impl Block {
    pub fn new(op: LinearOperator, term: impl ProxTerm + 'static) -> Self {
        Block {
            op,
            term: Box::new(term),
        }
    }
}

#[derive(Debug)]
pub struct BlockStack {
    blocks: Vec<Block>,
    weights: Option<Vec<f64>>,
    norm_sq: Vec<f64>,
}

impl BlockStack {
    /// Stack with the unweighted product `⟨·,·⟩_{2,G}`.
    pub fn unweighted(blocks: Vec<Block>) -> Result<Self> {
        Self::build(blocks, None)
    }

    /// Stack with the weighted product `⟨·,·⟩_{1,G}`. Each weight must lie
    /// in `(0, 1]` and they must sum to one.
    pub fn weighted(blocks: Vec<Block>, weights: Vec<f64>) -> Result<Self> {
        check_len("BlockStack weights", blocks.len(), weights.len())?;
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && **w <= 1.0)) {
            return Err(Error::param(format!("block weight {w} outside (0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::param(format!("block weights sum to {total}, not 1")));
        }
        Self::build(blocks, Some(weights))
    }

    fn build(blocks: Vec<Block>, weights: Option<Vec<f64>>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::param("a block stack needs at least one block"))?;
        let dim = first.op.cols();
        for b in &blocks {
            check_len("BlockStack primal dimension", dim, b.op.cols())?;
        }
        let norm_sq = blocks
            .iter()
            .map(|b| op_norm_sq(&b.op, NORM_TOL, NORM_MAX_ITER))
            .collect();
        Ok(BlockStack {
            blocks,
            weights,
            norm_sq,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Weight of block `i` (1 in the unweighted product).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn primal_dim(&self) -> usize {
        self.blocks[0].op.cols()
    }

    /// Row count of every block.
    pub fn dual_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.op.rows()).collect()
    }

    /// Zero dual variables, one per block.
    pub fn zero_duals(&self) -> Vec<Vec<f64>> {
        self.dual_dims().into_iter().map(|d| vec![0.0; d]).collect()
    }

    /// Power-iteration estimates of `‖Bᵢ‖²` (without safety factor).
    pub fn norm_sq_estimates(&self) -> &[f64] {
        &self.norm_sq
    }

    fn check_duals(&self, ys: &[Vec<f64>]) -> Result<()> {
        check_len("block count", self.blocks.len(), ys.len())?;
        for (b, y) in self.blocks.iter().zip(ys) {
            check_len("dual block", b.op.rows(), y.len())?;
        }
        Ok(())
    }

    /// `Bx = (B₁x, …, B_m x)`
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.blocks.iter().map(|b| b.op.apply(x)).collect()
    }

    /// `B*y = Σ wᵢ Bᵢᵀ yᵢ`, summed in block order.
    pub fn combined_adjoint(&self, ys: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.primal_dim()];
        self.combined_adjoint_into(ys, &mut out)?;
        Ok(out)
    }

    pub(crate) fn combined_adjoint_into(&self, ys: &[Vec<f64>], out: &mut [f64]) -> Result<()> {
        self.check_duals(ys)?;
        check_len("combined_adjoint output", self.primal_dim(), out.len())?;
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut tmp = vec![0.0; out.len()];
        for (i, (b, y)) in self.blocks.iter().zip(ys).enumerate() {
            b.op.adjoint_into(y, &mut tmp)?;
            let w = self.weight(i);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += w * t;
            }
        }
        Ok(())
    }

    /// `prox_{t h*}` on the product space, applied block by block.
    pub fn stacked_conjugate_prox(&self, ys: &[Vec<f64>], t: f64) -> Result<Vec<Vec<f64>>> {
        self.check_duals(ys)?;
        self.blocks
            .iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (b, y))| {
                let mut out = vec![0.0; y.len()];
                prox_weighted_conjugate_into(&b.term, self.weight(i), y, t, &mut out)?;
                Ok(out)
            })
            .collect()
    }

    /// `prox_{t h}` on the product space: block `i` uses step `t / wᵢ`.
    pub fn stacked_prox(&self, ys: &[Vec<f64>], t: f64) -> Result<Vec<Vec<f64>>> {
        self.check_duals(ys)?;
        self.blocks
            .iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (b, y))| b.term.prox(y, t / self.weight(i)))
            .collect()
    }

    /// `Σ wᵢ ‖Bᵢ‖²` from the safety-factored norm estimates; the squared
    /// norm of the stacked operator under the active inner product.
    pub fn stack_norm_sq_bound(&self) -> f64 {
        let factor = 1.0 + 10.0 * NORM_TOL;
        self.norm_sq
            .iter()
            .enumerate()
            .map(|(i, n)| self.weight(i) * n * factor)
            .sum()
    }

    /// `Σ hᵢ(Bᵢ x)`
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for b in &self.blocks {
            total += b.term.value(&b.op.apply(x)?)?;
        }
        Ok(total)
    }

    /// Product-space inner product of two dual tuples.
    pub fn inner(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
        self.check_duals(a)?;
        self.check_duals(b)?;
        Ok(a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (p, q))| self.weight(i) * crate::vecops::dot(p, q))
            .sum())
    }
}
