//! Direct, unoptimized twins of the fast filters, written from the
//! definitions for use as test oracles.

use super::check_pair;
use super::guided::gray_guide;
use super::iteration_sigmas;
use super::weighted_median::{fixed_weight, quantize_levels, GuideFeatures};
use crate::error::Result;
use crate::raster::ImageBuffer;

/// Domain transform normalized convolution with every transformed-domain
/// box evaluated by scanning the whole line.
pub fn domain_transform_nc_bruteforce(
    src: &ImageBuffer,
    guide: &ImageBuffer,
    sigma_s: f64,
    sigma_r: f64,
    iterations: usize,
) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, _) = src.dims();
    let ratio = sigma_s / sigma_r;
    let diff = |a: (usize, usize), b: (usize, usize)| -> f64 {
        (0..guide.channels())
            .map(|c| (guide.get(a.0, a.1, c) - guide.get(b.0, b.1, c)).abs())
            .sum()
    };
    let mut ct_row = vec![vec![0.0; w]; h];
    for (y, row) in ct_row.iter_mut().enumerate() {
        for x in 1..w {
            row[x] = row[x - 1] + 1.0 + ratio * diff((x, y), (x - 1, y));
        }
    }
    let mut ct_col = vec![vec![0.0; h]; w];
    for (x, col) in ct_col.iter_mut().enumerate() {
        for y in 1..h {
            col[y] = col[y - 1] + 1.0 + ratio * diff((x, y), (x, y - 1));
        }
    }
    let box_avg = |line: &[f64], ct: &[f64], r: f64| -> Vec<f64> {
        (0..line.len())
            .map(|p| {
                let (mut s, mut n) = (0.0, 0usize);
                for q in 0..line.len() {
                    if (ct[q] - ct[p]).abs() <= r {
                        s += line[q];
                        n += 1;
                    }
                }
                s / n as f64
            })
            .collect()
    };
    let mut out = src.clone();
    for sh in iteration_sigmas(sigma_s, iterations) {
        let r = sh * 3f64.sqrt();
        for c in 0..src.channels() {
            for (y, ct) in ct_row.iter().enumerate() {
                let line: Vec<f64> = (0..w).map(|x| out.get(x, y, c)).collect();
                for (x, v) in box_avg(&line, ct, r).into_iter().enumerate() {
                    out.set(x, y, c, v);
                }
            }
            for (x, ct) in ct_col.iter().enumerate() {
                let line: Vec<f64> = (0..h).map(|y| out.get(x, y, c)).collect();
                for (y, v) in box_avg(&line, ct, r).into_iter().enumerate() {
                    out.set(x, y, c, v);
                }
            }
        }
    }
    Ok(out)
}

/// Weighted median from a freshly built histogram at every pixel, using the
/// same source levels, guide features and fixed-point kernel.
pub fn weighted_median_bruteforce(
    src: &ImageBuffer,
    guide: &ImageBuffer,
    radius: usize,
    sigma_r: f64,
    bins: usize,
) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, _) = src.dims();
    let features = GuideFeatures::quantize(guide);
    let mut out = src.zeros_like();
    for c in 0..src.channels() {
        let plane = src.plane(c);
        let (lo, hi) = plane
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo < 1e-12 {
            out.plane_mut(c).copy_from_slice(plane);
            continue;
        }
        for y in 0..h {
            for x in 0..w {
                let fp = features.index[y * w + x] as usize;
                let mut hist = vec![0u64; bins];
                for qy in y.saturating_sub(radius)..=(y + radius).min(h - 1) {
                    for qx in x.saturating_sub(radius)..=(x + radius).min(w - 1) {
                        let q = qy * w + qx;
                        let fq = features.index[q] as usize;
                        let d2: f64 = features
                            .center(fp)
                            .iter()
                            .zip(features.center(fq))
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        hist[quantize_levels(plane[q], lo, hi, bins)] += fixed_weight(d2, sigma_r);
                    }
                }
                let total: u64 = hist.iter().sum();
                let mut acc = 0u64;
                let level = hist
                    .iter()
                    .position(|&v| {
                        acc += v;
                        2 * acc >= total
                    })
                    .expect("non-empty window");
                out.set(x, y, c, lo + (hi - lo) * (level as f64 / (bins - 1) as f64));
            }
        }
    }
    Ok(out)
}

/// Guided filter as a literal least-squares fit per window, averaged over
/// the windows covering each pixel.
pub fn guided_filter_bruteforce(
    src: &ImageBuffer,
    guide: &ImageBuffer,
    radius: usize,
    epsilon: f64,
) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, _) = src.dims();
    let g = gray_guide(guide);
    let window = |x: usize, y: usize| {
        let mut v = Vec::new();
        for qy in y.saturating_sub(radius)..=(y + radius).min(h - 1) {
            for qx in x.saturating_sub(radius)..=(x + radius).min(w - 1) {
                v.push(qy * w + qx);
            }
        }
        v
    };
    let mut out = src.zeros_like();
    for c in 0..src.channels() {
        let p = src.plane(c);
        let mut coef = vec![(0.0, 0.0); w * h];
        for y in 0..h {
            for x in 0..w {
                let win = window(x, y);
                let n = win.len() as f64;
                let mg = win.iter().map(|&q| g[q]).sum::<f64>() / n;
                let mp = win.iter().map(|&q| p[q]).sum::<f64>() / n;
                let cov = win.iter().map(|&q| (g[q] - mg) * (p[q] - mp)).sum::<f64>() / n;
                let var = win.iter().map(|&q| (g[q] - mg).powi(2)).sum::<f64>() / n;
                let a = if var + epsilon > 0.0 {
                    cov / (var + epsilon)
                } else {
                    0.0
                };
                coef[y * w + x] = (a, mp - a * mg);
            }
        }
        for y in 0..h {
            for x in 0..w {
                let win = window(x, y);
                let n = win.len() as f64;
                let ma = win.iter().map(|&q| coef[q].0).sum::<f64>() / n;
                let mb = win.iter().map(|&q| coef[q].1).sum::<f64>() / n;
                out.plane_mut(c)[y * w + x] = ma * g[y * w + x] + mb;
            }
        }
    }
    Ok(out)
}
