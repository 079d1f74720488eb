//! Normalized-convolution variant of the domain transform filter.
//!
//! Each 1-D pass warps the line into the transformed coordinate
//! `ct(x) = sum_{u<=x} (1 + σs/σr · Σ_c |guide'_c(u)|)` and replaces every
//! sample by the mean of the samples whose transformed coordinate lies
//! within `σ_H·√3`. Passes alternate horizontal/vertical for a fixed number
//! of rounds with geometrically shrinking `σ_H`.

use rayon::prelude::*;

use super::check_pair;
use crate::error::Result;
use crate::raster::ImageBuffer;

/// Per-round `σ_H_i = σs·√3·2^(N−i)/√(4^N−1)`, `i = 1..=N`.
pub fn iteration_sigmas(sigma_s: f64, iterations: usize) -> Vec<f64> {
    let n = iterations as i32;
    let denom = (4f64.powi(n) - 1.0).sqrt();
    (1..=n)
        .map(|i| sigma_s * 3f64.sqrt() * 2f64.powi(n - i) / denom)
        .collect()
}

pub fn domain_transform_nc(
    src: &ImageBuffer,
    guide: &ImageBuffer,
    sigma_s: f64,
    sigma_r: f64,
    iterations: usize,
) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, _) = src.dims();
    let ratio = sigma_s / sigma_r;

    // ct_h: row-major, ct_v: column-major (contiguous per column)
    let mut ct_h = vec![0.0; w * h];
    let mut ct_v = vec![0.0; w * h];
    for y in 0..h {
        for x in 1..w {
            let d: f64 = guide.planes().map(|g| (g[y * w + x] - g[y * w + x - 1]).abs()).sum();
            ct_h[y * w + x] = ct_h[y * w + x - 1] + 1.0 + ratio * d;
        }
    }
    for x in 0..w {
        for y in 1..h {
            let d: f64 = guide.planes().map(|g| (g[y * w + x] - g[(y - 1) * w + x]).abs()).sum();
            ct_v[x * h + y] = ct_v[x * h + y - 1] + 1.0 + ratio * d;
        }
    }

    let mut out = src.clone();
    for sigma_h in iteration_sigmas(sigma_s, iterations) {
        let radius = sigma_h * 3f64.sqrt();
        for plane in out.planes_mut() {
            plane
                .par_chunks_mut(w)
                .zip(ct_h.par_chunks(w))
                .for_each_init(Vec::new, |prefix, (row, ct)| box_line(row, ct, radius, prefix));

            let mut cols = transpose(plane, w, h);
            cols.par_chunks_mut(h)
                .zip(ct_v.par_chunks(h))
                .for_each_init(Vec::new, |prefix, (col, ct)| box_line(col, ct, radius, prefix));
            plane.copy_from_slice(&transpose(&cols, h, w));
        }
    }
    Ok(out)
}

/// Mean over `{q : |ct[q] − ct[p]| <= radius}` for every `p`, using a
/// prefix sum and two monotone pointers.
fn box_line(line: &mut [f64], ct: &[f64], radius: f64, prefix: &mut Vec<f64>) {
    let n = line.len();
    prefix.clear();
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in line.iter() {
        acc += v;
        prefix.push(acc);
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    for p in 0..n {
        while ct[p] - ct[lo] > radius {
            lo += 1;
        }
        if hi < p {
            hi = p;
        }
        while hi + 1 < n && ct[hi + 1] - ct[p] <= radius {
            hi += 1;
        }
        line[p] = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
    }
}

fn transpose(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = data[y * w + x];
        }
    }
    out
}
