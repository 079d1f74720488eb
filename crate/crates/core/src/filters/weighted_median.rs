//! Weighted median filter over a quantized joint histogram.
//!
//! Source samples are quantized to `bins` uniform levels spanning each
//! channel's observed range, so constant regions pass through exactly; the guide is
//! quantized to at most [`MAX_FEATURES`] feature vectors. For each pixel the
//! filter returns the smallest source level whose cumulative weight reaches
//! half of the window's total weight, where a window sample with guide
//! feature `f` has weight `exp(-|c(f_p) - c(f)|² / 2σr²)`.
//!
//! Weights are stored as fixed-point integers (`WEIGHT_ONE` = 1.0) so every
//! accumulation is exact and independent of summation order. The window
//! slides along each row with a joint (level x feature) histogram and the
//! median cut is tracked incrementally, so the cost of a step grows with the
//! number of levels the median crosses.

use std::collections::HashMap;

use rayon::prelude::*;

use super::check_pair;
use crate::error::{Error, Result};
use crate::raster::ImageBuffer;

pub const WEIGHT_ONE: u64 = 1 << 24;

/// Per-channel guide levels before deduplication.
const FEATURE_LEVELS: usize = 256;
pub const MAX_FEATURES: usize = 1024;

/// Level index of `v` among `bins` uniform levels over `[lo, hi]`.
#[inline]
pub fn quantize_levels(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    ((t * (bins - 1) as f64).round() as usize).min(bins - 1)
}

/// Guide quantized to a small set of feature vectors.
#[derive(Clone, Debug)]
pub struct GuideFeatures {
    /// Feature index per pixel.
    pub index: Vec<u32>,
    /// Feature centers, `channels` values per feature.
    pub centers: Vec<f64>,
    pub channels: usize,
}

impl GuideFeatures {
    /// Each guide channel is quantized to uniform levels over its observed
    /// range; distinct level tuples become features. Color guides with too
    /// many distinct tuples are re-quantized with fewer levels.
    pub fn quantize(guide: &ImageBuffer) -> Self {
        let gc = guide.channels();
        let n = guide.plane_len();
        let ranges: Vec<(f64, f64)> = guide
            .planes()
            .map(|p| {
                p.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
            })
            .collect();
        let mut levels = FEATURE_LEVELS;
        loop {
            let mut map: HashMap<Vec<u16>, u32> = HashMap::new();
            let mut keys: Vec<Vec<u16>> = Vec::new();
            let mut index = Vec::with_capacity(n);
            for p in 0..n {
                let key: Vec<u16> = (0..gc)
                    .map(|c| {
                        let (lo, hi) = ranges[c];
                        if hi - lo < 1e-12 {
                            0
                        } else {
                            quantize_levels(guide.plane(c)[p], lo, hi, levels) as u16
                        }
                    })
                    .collect();
                let next = map.len() as u32;
                let id = *map.entry(key.clone()).or_insert_with(|| {
                    keys.push(key);
                    next
                });
                index.push(id);
            }
            if keys.len() <= MAX_FEATURES || levels <= 8 {
                let centers = keys
                    .iter()
                    .flat_map(|k| {
                        k.iter().enumerate().map(|(c, &l)| {
                            let (lo, hi) = ranges[c];
                            if hi - lo < 1e-12 {
                                lo
                            } else {
                                lo + (hi - lo) * l as f64 / (levels - 1) as f64
                            }
                        })
                    })
                    .collect::<Vec<_>>();
                return GuideFeatures {
                    index,
                    centers,
                    channels: gc,
                };
            }
            levels /= 2;
        }
    }

    pub fn count(&self) -> usize {
        self.centers.len() / self.channels
    }

    pub fn center(&self, f: usize) -> &[f64] {
        &self.centers[f * self.channels..(f + 1) * self.channels]
    }

    /// Fixed-point weight table, row `fp` holds weights seen from a pixel
    /// with feature `fp`.
    pub fn weight_table(&self, sigma_r: f64) -> Vec<u64> {
        let nf = self.count();
        let mut table = vec![0u64; nf * nf];
        for a in 0..nf {
            for b in 0..nf {
                let d2: f64 = self
                    .center(a)
                    .iter()
                    .zip(self.center(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                table[a * nf + b] = fixed_weight(d2, sigma_r);
            }
        }
        table
    }
}

#[inline]
pub(crate) fn fixed_weight(d2: f64, sigma_r: f64) -> u64 {
    ((-d2 / (2.0 * sigma_r * sigma_r)).exp() * WEIGHT_ONE as f64).round() as u64
}

pub fn weighted_median(
    src: &ImageBuffer,
    guide: &ImageBuffer,
    radius: usize,
    sigma_r: f64,
    bins: usize,
) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    if bins < 2 {
        return Err(Error::invalid("bins", format!("must be >= 2, got {bins}")));
    }
    let (w, h, _) = src.dims();
    let features = GuideFeatures::quantize(guide);
    let table = features.weight_table(sigma_r);
    let nf = features.count();
    let ctx = Ctx {
        w,
        h,
        r: radius,
        nf,
        feat: &features.index,
        table: &table,
    };
    let top = (bins - 1) as f64;
    let mut out = src.zeros_like();
    for (c, plane) in src.planes().enumerate() {
        let (lo, hi) = plane
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo < 1e-12 {
            // a constant plane is its own weighted median
            out.plane_mut(c).copy_from_slice(plane);
            continue;
        }
        let levels: Vec<u32> = plane.iter().map(|&v| quantize_levels(v, lo, hi, bins) as u32).collect();
        let rows: Vec<Vec<u32>> = (0..h)
            .into_par_iter()
            .map_init(|| Tracker::new(bins, nf), |tr, y| ctx.filter_row(tr, &levels, y))
            .collect();
        let dst = out.plane_mut(c);
        for (y, row) in rows.iter().enumerate() {
            for (x, &m) in row.iter().enumerate() {
                dst[y * w + x] = lo + (hi - lo) * (m as f64 / top);
            }
        }
    }
    Ok(out)
}

struct Ctx<'a> {
    w: usize,
    h: usize,
    r: usize,
    nf: usize,
    feat: &'a [u32],
    table: &'a [u64],
}

/// Joint histogram (bin-major: `hist[level * nf + feature]`) plus the
/// per-feature counts at or below the current median cut.
struct Tracker {
    hist: Vec<u32>,
    tot: Vec<u64>,
    left: Vec<u64>,
    cnt: Vec<u32>,
    cut: usize,
}

impl Tracker {
    fn new(bins: usize, nf: usize) -> Self {
        Tracker {
            hist: vec![0; bins * nf],
            tot: vec![0; nf],
            left: vec![0; nf],
            cnt: vec![0; bins],
            cut: 0,
        }
    }

    #[inline]
    fn add(&mut self, nf: usize, level: usize, f: usize) {
        self.hist[level * nf + f] += 1;
        self.tot[f] += 1;
        self.cnt[level] += 1;
        if level <= self.cut {
            self.left[f] += 1;
        }
    }

    #[inline]
    fn remove(&mut self, nf: usize, level: usize, f: usize) {
        self.hist[level * nf + f] -= 1;
        self.tot[f] -= 1;
        self.cnt[level] -= 1;
        if level <= self.cut {
            self.left[f] -= 1;
        }
    }

    /// Smallest level whose cumulative weight reaches half the total.
    fn median(&mut self, nf: usize, weights: &[u64]) -> usize {
        let dot = |v: &[u64]| -> u64 { v.iter().zip(weights).map(|(a, b)| a * b).sum() };
        let total = dot(&self.tot);
        let mut below = dot(&self.left);
        if 2 * below >= total {
            while self.cut > 0 {
                let m = self.cut;
                let col = &self.hist[m * nf..(m + 1) * nf];
                let here: u64 = if self.cnt[m] == 0 {
                    0
                } else {
                    col.iter().zip(weights).map(|(&a, b)| a as u64 * b).sum()
                };
                if 2 * (below - here) < total {
                    break;
                }
                below -= here;
                if self.cnt[m] != 0 {
                    for (l, &a) in self.left.iter_mut().zip(col) {
                        *l -= a as u64;
                    }
                }
                self.cut -= 1;
            }
        } else {
            while 2 * below < total {
                self.cut += 1;
                let m = self.cut;
                if self.cnt[m] == 0 {
                    continue;
                }
                let col = &self.hist[m * nf..(m + 1) * nf];
                below += col.iter().zip(weights).map(|(&a, b)| a as u64 * b).sum::<u64>();
                for (l, &a) in self.left.iter_mut().zip(col) {
                    *l += a as u64;
                }
            }
        }
        self.cut
    }
}

impl Ctx<'_> {
    fn filter_row(&self, tr: &mut Tracker, levels: &[u32], y: usize) -> Vec<u32> {
        let (w, h, r, nf) = (self.w, self.h, self.r, self.nf);
        let y0 = y.saturating_sub(r);
        let y1 = (y + r).min(h - 1);
        tr.cut = 0;
        let column = |tr: &mut Tracker, x: usize, add: bool| {
            for qy in y0..=y1 {
                let q = qy * w + x;
                let (l, f) = (levels[q] as usize, self.feat[q] as usize);
                if add {
                    tr.add(nf, l, f);
                } else {
                    tr.remove(nf, l, f);
                }
            }
        };
        for x in 0..=r.min(w - 1) {
            column(tr, x, true);
        }
        let mut out = Vec::with_capacity(w);
        for x in 0..w {
            if x > 0 {
                if x + r < w {
                    column(tr, x + r, true);
                }
                if x > r {
                    column(tr, x - r - 1, false);
                }
            }
            let fp = self.feat[y * w + x] as usize;
            let weights = &self.table[fp * nf..(fp + 1) * nf];
            out.push(tr.median(nf, weights) as u32);
        }
        // drain so the histogram is empty for the next row
        for x in (w.saturating_sub(r + 1))..w {
            column(tr, x, false);
        }
        debug_assert!(tr.tot.iter().all(|&t| t == 0));
        tr.left.iter_mut().for_each(|l| *l = 0);
        out
    }
}
