//! Guided image filter (gray guidance), box means over clipped windows via
//! summed-area tables.

use super::check_pair;
use crate::error::Result;
use crate::raster::ImageBuffer;

/// Rec. 709 luminance for 3-channel guides, identity for gray.
pub(crate) fn gray_guide(guide: &ImageBuffer) -> Vec<f64> {
    if guide.channels() == 1 {
        return guide.plane(0).to_vec();
    }
    let (r, g, b) = (guide.plane(0), guide.plane(1), guide.plane(2));
    (0..guide.plane_len())
        .map(|i| 0.2126 * r[i] + 0.7152 * g[i] + 0.0722 * b[i])
        .collect()
}

struct BoxMean {
    w: usize,
    h: usize,
    r: usize,
}

impl BoxMean {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (w, h, r) = (self.w, self.h, self.r);
        let mut sat = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += v[y * w + x];
                sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
            }
        }
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
            for x in 0..w {
                let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
                let s =
                    sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
                out[y * w + x] = s / ((y1 - y0) * (x1 - x0)) as f64;
            }
        }
        out
    }
}

pub fn guided_filter(src: &ImageBuffer, guide: &ImageBuffer, radius: usize, epsilon: f64) -> Result<ImageBuffer> {
    check_pair(src, guide)?;
    let (w, h, _) = src.dims();
    let bx = BoxMean { w, h, r: radius };
    let g = gray_guide(guide);
    let mean_g = bx.apply(&g);
    let gg: Vec<f64> = g.iter().map(|v| v * v).collect();
    let var_g: Vec<f64> = bx
        .apply(&gg)
        .iter()
        .zip(&mean_g)
        .map(|(m2, m)| (m2 - m * m).max(0.0))
        .collect();
    let mut out = src.zeros_like();
    for (c, p) in src.planes().enumerate() {
        let mean_p = bx.apply(p);
        let gp: Vec<f64> = g.iter().zip(p).map(|(a, b)| a * b).collect();
        let mean_gp = bx.apply(&gp);
        let mut a = vec![0.0; w * h];
        let mut b = vec![0.0; w * h];
        for i in 0..w * h {
            let cov = mean_gp[i] - mean_g[i] * mean_p[i];
            let denom = var_g[i] + epsilon;
            a[i] = if denom > 0.0 { cov / denom } else { 0.0 };
            b[i] = mean_p[i] - a[i] * mean_g[i];
        }
        let (ma, mb) = (bx.apply(&a), bx.apply(&b));
        let dst = out.plane_mut(c);
        for i in 0..w * h {
            dst[i] = ma[i] * g[i] + mb[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::guided_filter_bruteforce;
    use crate::filters::test_support::random_image;

    #[test]
    fn self_guided_zero_epsilon_is_identity() {
        let src = random_image(16, 16, 1, 2);
        let out = guided_filter(&src, &src, 3, 0.0).unwrap();
        assert!(out.max_abs_diff(&src) < 1e-6);
    }

    #[test]
    fn constant_guide_gives_box_of_means() {
        let src = random_image(10, 10, 1, 3);
        let guide = ImageBuffer::filled(10, 10, 1, 0.4);
        let out = guided_filter(&src, &guide, 2, 0.01).unwrap();
        let bx = BoxMean { w: 10, h: 10, r: 2 };
        let expected = bx.apply(&bx.apply(src.plane(0)));
        for (a, b) in out.data().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_regression_oracle() {
        for seed in 0..3 {
            let src = random_image(16, 16, 1, 10 + seed);
            let guide = random_image(16, 16, 1, 20 + seed);
            let got = guided_filter(&src, &guide, 2, 0.01).unwrap();
            assert!(got.max_abs_diff(&guided_filter_bruteforce(&src, &guide, 2, 0.01).unwrap()) < 1e-6);
        }
    }
}
