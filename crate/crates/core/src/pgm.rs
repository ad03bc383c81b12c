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

//! 8-bit binary PGM (P5) output.

use std::io::Write;

use crate::error::{check_len, Result};

/// Encodes a column-major `rows × cols` image, mapping `[min, max]` linearly
/// onto `0..=255`. A constant image encodes as all zeros. Returns the bytes
/// and the `(min, max)` used.
pub fn encode(img: &[f64], rows: usize, cols: usize) -> Result<(Vec<u8>, (f64, f64))> {
    check_len("image", rows * cols, img.len())?;
    let (lo, hi) = img
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    let mut out = Vec::with_capacity(rows * cols + 20);
    write!(out, "P5\n{cols} {rows}\n255\n")?;
    for r in 0..rows {
        for c in 0..cols {
            let v = img[r + c * rows];
            let level = if span > 0.0 && v.is_finite() {
                (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.push(level);
        }
    }
    Ok((out, (lo, hi)))
}
