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

//! Dual forward–backward (DFB), primal–dual forward–backward (PDFB) and
//! linearized ADMM solvers for composite problems
//!
//! ```text
//! minimize  f(x) + g(x) + Σᵢ wᵢ hᵢ(Bᵢ x)
//! ```
//!
//! with `f` smooth, `g` and `hᵢ` proximable, plus a seeded CT reconstruction
//! harness built on the prior-image TV model.

pub mod config;
pub mod ct;
pub mod error;
pub mod linop;
pub mod pgm;
pub mod product_space;
pub mod prox;
pub mod rng;
pub mod runner;
pub mod selftest;
pub mod solvers;
pub mod vecops;

pub use error::{Error, Result};
pub use linop::LinearOperator;
pub use product_space::{Block, BlockStack};
pub use prox::ProxTerm;
pub use solvers::{
    Algorithm, CompositeProblem, ConvergenceMode, PiccsProblem, SolveReport, SolverConfig, Start, Termination,
};
