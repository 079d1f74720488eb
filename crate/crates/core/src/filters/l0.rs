//! Gradient L0 smoothing by half-quadratic splitting.
//!
//! Alternates a hard threshold on the gradient (grouped over channels) with
//! a screened-Poisson solve for the image, increasing the coupling weight
//! geometrically from `2λ` until it exceeds `beta_max`.

use crate::error::{Error, Result};
use crate::raster::{divergence_adjoint, forward_gradient, ImageBuffer};
use crate::reconstruct::SpectralSolver;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L0Params {
    pub lambda: f64,
    pub kappa: f64,
    pub beta_max: f64,
}

pub fn l0_smooth(src: &ImageBuffer, params: L0Params) -> Result<ImageBuffer> {
    let L0Params {
        lambda,
        kappa,
        beta_max,
    } = params;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
    }
    if kappa.is_nan() || kappa <= 1.0 {
        return Err(Error::invalid("kappa", format!("must be > 1, got {kappa}")));
    }
    if lambda == 0.0 {
        return Ok(src.clone());
    }
    let (w, h, _) = src.dims();
    let n = w * h;
    let solver = SpectralSolver::new(w, h);
    let mut s = src.clone();
    let mut beta = 2.0 * lambda;
    while beta < beta_max {
        let mut g = forward_gradient(&s);
        let threshold = lambda / beta;
        for p in 0..n {
            let mag: f64 = (0..src.channels())
                .map(|c| {
                    let (a, b) = (g.gx.plane(c)[p], g.gy.plane(c)[p]);
                    a * a + b * b
                })
                .sum();
            if mag <= threshold {
                for c in 0..src.channels() {
                    g.gx.plane_mut(c)[p] = 0.0;
                    g.gy.plane_mut(c)[p] = 0.0;
                }
            }
        }
        let div = divergence_adjoint(&g);
        s = src.clone();
        for (v, d) in s.data_mut().iter_mut().zip(div.data()) {
            *v += beta * d;
        }
        for plane in s.planes_mut() {
            solver.solve_in_place(plane, beta);
        }
        beta *= kappa;
    }
    Ok(s)
}

/// Pixels whose gradient magnitude (grouped over channels) exceeds `eps`.
pub fn nonzero_gradient_count(img: &ImageBuffer, eps: f64) -> usize {
    let g = forward_gradient(img);
    (0..img.plane_len())
        .filter(|&p| (0..img.channels()).any(|c| g.gx.plane(c)[p].abs() + g.gy.plane(c)[p].abs() > eps))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::test_support::{random_image, smooth_image};

    fn params(lambda: f64) -> L0Params {
        L0Params {
            lambda,
            kappa: 2.0,
            beta_max: 1e5,
        }
    }

    #[test]
    fn zero_lambda_is_identity() {
        let src = random_image(8, 8, 3, 1);
        assert_eq!(l0_smooth(&src, params(0.0)).unwrap(), src);
    }

    #[test]
    fn constant_is_fixed_point() {
        let src = ImageBuffer::filled(10, 7, 1, 0.6);
        let out = l0_smooth(&src, params(0.05)).unwrap();
        assert!(out.max_abs_diff(&src) < 1e-9);
    }

    #[test]
    fn step_is_preserved_at_small_lambda() {
        let src = ImageBuffer::from_fn(32, 16, 1, |x, _, _| if x < 16 { 0.0 } else { 1.0 });
        let out = l0_smooth(&src, params(0.00175)).unwrap();
        assert!(out.max_abs_diff(&src) < 0.01);
    }

    /// With the schedule starting at `β = 2λ` the first threshold is `1/2`,
    /// below the unit step's squared gradient, so the splitting keeps the
    /// step at every iteration however large `λ` is.
    #[test]
    fn unit_step_survives_large_lambda() {
        let src = ImageBuffer::from_fn(32, 16, 1, |x, _, _| if x < 16 { 0.0 } else { 1.0 });
        let out = l0_smooth(&src, params(10.0)).unwrap();
        assert!(out.max_abs_diff(&src) < 1e-9);
    }

    #[test]
    fn weak_step_removed_by_large_lambda() {
        // squared jump 0.09 is below the first threshold λ/β = 1/2: flattened to the mean
        let src = ImageBuffer::from_fn(32, 16, 1, |x, _, _| if x < 16 { 0.4 } else { 0.7 });
        let out = l0_smooth(&src, params(10.0)).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.55).abs() < 1e-3));
    }

    #[test]
    fn reduces_nonzero_gradients() {
        for seed in 0..4 {
            let src = smooth_image(24, 20, seed);
            let out = l0_smooth(&src, params(0.01)).unwrap();
            assert!(nonzero_gradient_count(&out, 1e-9) <= nonzero_gradient_count(&src, 1e-9));
            let (lo, hi) = out.min_max();
            assert!(lo >= -1e-6 && hi <= 1.0 + 1e-6);
        }
    }
}
