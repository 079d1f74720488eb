//! Joint bilateral filter: Gaussian spatial kernel truncated at `ceil(3 σs)`,
//! Gaussian range kernel on the Euclidean guide distance.
//!
//! Three implementations share the contract:
//! * [`bilateral`] - exact truncated filter with a precomputed spatial table.
//! * [`bilateral_bruteforce`] - the literal double loop, used as a test oracle.
//! * [`bilateral_grid`] - bilateral-grid approximation for large images
//!   with single-channel guides.

use rayon::prelude::*;

use super::check_pair;
use crate::error::Result;
use crate::raster::ImageBuffer;

pub fn window_radius(sigma_s: f64) -> usize {
    (3.0 * sigma_s).ceil() as usize
}

pub fn bilateral(src: &ImageBuffer, guide: &ImageBuffer, sigma_s: f64, sigma_r: f64) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, nc) = src.dims();
    let gc = guide.channels();
    let r = window_radius(sigma_s) as isize;
    let side = (2 * r + 1) as usize;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_s * sigma_s)).exp())
        .collect();
    let inv_2r2 = 1.0 / (2.0 * sigma_r * sigma_r);
    let n = w * h;

    // output rows are independent; build row-major per-pixel channel tuples
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut out = vec![0.0; w * nc];
            let mut acc = vec![0.0; nc];
            let y0 = (y as isize - r).max(0) as usize;
            let y1 = ((y as isize + r) as usize).min(h - 1);
            for x in 0..w {
                let x0 = (x as isize - r).max(0) as usize;
                let x1 = ((x as isize + r) as usize).min(w - 1);
                let p = y * w + x;
                acc.iter_mut().for_each(|a| *a = 0.0);
                let mut wsum = 0.0;
                for qy in y0..=y1 {
                    let srow = ((qy as isize - y as isize + r) as usize) * side;
                    for qx in x0..=x1 {
                        let q = qy * w + qx;
                        let mut d2 = 0.0;
                        for c in 0..gc {
                            let d = guide.data()[c * n + p] - guide.data()[c * n + q];
                            d2 += d * d;
                        }
                        let wgt = spatial[srow + (qx as isize - x as isize + r) as usize] * (-d2 * inv_2r2).exp();
                        wsum += wgt;
                        for (c, a) in acc.iter_mut().enumerate() {
                            *a += wgt * src.data()[c * n + q];
                        }
                    }
                }
                for c in 0..nc {
                    out[x * nc + c] = acc[c] / wsum;
                }
            }
            out
        })
        .collect();
    Ok(scatter_rows(src, &rows))
}

pub(crate) fn scatter_rows(like: &ImageBuffer, rows: &[Vec<f64>]) -> ImageBuffer {
    let (w, _, nc) = like.dims();
    let mut dst = like.zeros_like();
    let n = like.plane_len();
    let data = dst.data_mut();
    for (y, row) in rows.iter().enumerate() {
        for x in 0..w {
            for c in 0..nc {
                data[c * n + y * w + x] = row[x * nc + c];
            }
        }
    }
    dst
}

/// Literal double loop over the truncated window; no precomputation.
pub fn bilateral_bruteforce(src: &ImageBuffer, guide: &ImageBuffer, sigma_s: f64, sigma_r: f64) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, nc) = src.dims();
    let r = window_radius(sigma_s) as isize;
    let mut out = src.zeros_like();
    for c in 0..nc {
        for y in 0..h as isize {
            for x in 0..w as isize {
                let (mut num, mut den) = (0.0, 0.0);
                for qy in (y - r)..=(y + r) {
                    for qx in (x - r)..=(x + r) {
                        if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                            continue;
                        }
                        let (qx, qy) = (qx as usize, qy as usize);
                        let ds2 = ((qx as isize - x).pow(2) + (qy as isize - y).pow(2)) as f64;
                        let dr2: f64 = (0..guide.channels())
                            .map(|gc| {
                                let d = guide.get(x as usize, y as usize, gc) - guide.get(qx, qy, gc);
                                d * d
                            })
                            .sum();
                        let wgt = (-ds2 / (2.0 * sigma_s * sigma_s)).exp() * (-dr2 / (2.0 * sigma_r * sigma_r)).exp();
                        num += wgt * src.get(qx, qy, c);
                        den += wgt;
                    }
                }
                out.set(x as usize, y as usize, c, num / den);
            }
        }
    }
    Ok(out)
}

/// Grid cells per standard deviation along each grid axis.
const GRID_CELLS_PER_SIGMA: f64 = 2.0;

/// Bilateral-grid approximation (splat, separable Gaussian blur, trilinear
/// slice). Falls back to [`bilateral`] when the guide has several channels.
pub fn bilateral_grid(src: &ImageBuffer, guide: &ImageBuffer, sigma_s: f64, sigma_r: f64) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    if guide.channels() != 1 {
        return bilateral(src, guide, sigma_s, sigma_r);
    }
    let (w, h, nc) = src.dims();
    let g = guide.plane(0);
    let (gmin, gmax) = guide.min_max();
    let ss = sigma_s / GRID_CELLS_PER_SIGMA;
    let sr = sigma_r / GRID_CELLS_PER_SIGMA;
    // linear splat + linear slice add a tent-squared variance of 1/3 cell^2
    let blur_sigma = (GRID_CELLS_PER_SIGMA * GRID_CELLS_PER_SIGMA - 1.0 / 3.0).sqrt();
    let pad = (3.0 * GRID_CELLS_PER_SIGMA).ceil() as usize + 1;
    let gw = ((w - 1) as f64 / ss).floor() as usize + 2 + 2 * pad;
    let gh = ((h - 1) as f64 / ss).floor() as usize + 2 + 2 * pad;
    let gd = ((gmax - gmin) / sr).floor() as usize + 2 + 2 * pad;
    let cells = gw * gh * gd;
    // channel-interleaved: [num_0..num_{nc-1}, den]
    let stride = nc + 1;
    let mut grid = vec![0.0f64; cells * stride];
    let idx = |ix: usize, iy: usize, iz: usize| ((iz * gh + iy) * gw + ix) * stride;

    let coords = |x: usize, y: usize, v: f64| {
        (
            x as f64 / ss + pad as f64,
            y as f64 / ss + pad as f64,
            (v - gmin) / sr + pad as f64,
        )
    };

    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let (fx, fy, fz) = coords(x, y, g[p]);
            let (ix, iy, iz) = (fx as usize, fy as usize, fz as usize);
            let (tx, ty, tz) = (fx - ix as f64, fy - iy as f64, fz - iz as f64);
            for (dz, wz) in [(0, 1.0 - tz), (1, tz)] {
                for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                    for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
                        let wgt = wx * wy * wz;
                        let base = idx(ix + dx, iy + dy, iz + dz);
                        for c in 0..nc {
                            grid[base + c] += wgt * src.plane(c)[p];
                        }
                        grid[base + nc] += wgt;
                    }
                }
            }
        }
    }

    let radius = (3.0 * blur_sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * blur_sigma * blur_sigma)).exp())
        .collect();
    blur_axis(&mut grid, [gw, gh, gd], stride, 0, &kernel);
    blur_axis(&mut grid, [gw, gh, gd], stride, 1, &kernel);
    blur_axis(&mut grid, [gw, gh, gd], stride, 2, &kernel);

    let mut out = src.zeros_like();
    let n = w * h;
    let mut vals = vec![0.0; stride];
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let (fx, fy, fz) = coords(x, y, g[p]);
            let (ix, iy, iz) = (fx as usize, fy as usize, fz as usize);
            let (tx, ty, tz) = (fx - ix as f64, fy - iy as f64, fz - iz as f64);
            vals.iter_mut().for_each(|v| *v = 0.0);
            for (dz, wz) in [(0, 1.0 - tz), (1, tz)] {
                for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                    for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
                        let wgt = wx * wy * wz;
                        let base = idx(ix + dx, iy + dy, iz + dz);
                        for (k, v) in vals.iter_mut().enumerate() {
                            *v += wgt * grid[base + k];
                        }
                    }
                }
            }
            let data = out.data_mut();
            for c in 0..nc {
                data[c * n + p] = vals[c] / vals[nc];
            }
        }
    }
    Ok(out)
}

/// In-place separable convolution of an interleaved 3-D grid along `axis`,
/// with zero padding outside the grid.
fn blur_axis(grid: &mut [f64], dims: [usize; 3], stride: usize, axis: usize, kernel: &[f64]) {
    let [gw, gh, gd] = dims;
    let len = dims[axis];
    let step = match axis {
        0 => stride,
        1 => gw * stride,
        _ => gw * gh * stride,
    };
    let radius = (kernel.len() / 2) as isize;
    let lines: Vec<usize> = match axis {
        0 => (0..gd)
            .flat_map(|z| (0..gh).map(move |y| (z * gh + y) * gw * stride))
            .collect(),
        1 => (0..gd)
            .flat_map(|z| (0..gw).map(move |x| (z * gh * gw + x) * stride))
            .collect(),
        _ => (0..gh)
            .flat_map(|y| (0..gw).map(move |x| (y * gw + x) * stride))
            .collect(),
    };
    let mut line = vec![0.0; len * stride];
    for start in lines {
        for i in 0..len {
            let o = start + i * step;
            line[i * stride..(i + 1) * stride].copy_from_slice(&grid[o..o + stride]);
        }
        for i in 0..len as isize {
            let o = start + i as usize * step;
            let dst = &mut grid[o..o + stride];
            dst.iter_mut().for_each(|v| *v = 0.0);
            let k0 = (-radius).max(-i);
            let k1 = radius.min(len as isize - 1 - i);
            for k in k0..=k1 {
                let wgt = kernel[(k + radius) as usize];
                let s = ((i + k) as usize) * stride;
                for (d, v) in dst.iter_mut().zip(&line[s..s + stride]) {
                    *d += wgt * v;
                }
            }
        }
    }
}
