//! Reconstruction of an image from a data image and target gradients by
//! minimizing
//!
//! ```text
//! E(u) = |u − i0|² + β (|Dx u − gx|² + |Dy u − gy|²)
//! ```
//!
//! whose normal equations are the screened Poisson system
//! `(Id + β DᵀD) u = i0 + β Dᵀg`.

mod cg;
mod spectral;

pub use cg::{apply_operator, conjugate_gradient, CgReport};
pub use spectral::SpectralSolver;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::check_field;
use crate::raster::{divergence_adjoint, forward_gradient, GradientField, ImageBuffer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Spectral,
    Cg,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionConfig {
    pub beta: f64,
    pub solver: SolverKind,
    /// Relative residual `|r| / |b|` at which CG stops.
    pub cg_tol: f64,
    pub cg_max_iters: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            beta: 16.0,
            solver: SolverKind::Spectral,
            cg_tol: 1e-8,
            cg_max_iters: 1000,
        }
    }
}

impl ReconstructionConfig {
    pub fn with_beta(beta: f64) -> Self {
        ReconstructionConfig {
            beta,
            ..Default::default()
        }
    }

    pub fn cg(beta: f64, tol: f64) -> Self {
        ReconstructionConfig {
            beta,
            solver: SolverKind::Cg,
            cg_tol: tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::invalid("beta", format!("must be >= 0, got {}", self.beta)));
        }
        if !(self.cg_tol.is_finite() && self.cg_tol > 0.0) {
            return Err(Error::invalid("cg_tol", format!("must be > 0, got {}", self.cg_tol)));
        }
        Ok(())
    }
}

/// Value of the reconstruction energy at `candidate`.
pub fn energy(candidate: &ImageBuffer, i0: &ImageBuffer, g: &GradientField, beta: f64) -> Result<f64> {
    candidate.ensure_same_dims(i0)?;
    check_field(g, i0)?;
    let data: f64 = sq_dist(candidate.data(), i0.data());
    if beta == 0.0 {
        return Ok(data);
    }
    let dc = forward_gradient(candidate);
    let smooth = sq_dist(dc.gx.data(), g.gx.data()) + sq_dist(dc.gy.data(), g.gy.data());
    Ok(data + beta * smooth)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Data term `|candidate − i0|²` alone.
pub fn data_term(candidate: &ImageBuffer, i0: &ImageBuffer) -> Result<f64> {
    candidate.ensure_same_dims(i0)?;
    Ok(sq_dist(candidate.data(), i0.data()))
}

/// Analytic energy gradient `2(u − i0) + 2β Dᵀ(Du − g)`.
pub fn energy_gradient(candidate: &ImageBuffer, i0: &ImageBuffer, g: &GradientField, beta: f64) -> Result<ImageBuffer> {
    candidate.ensure_same_dims(i0)?;
    check_field(g, i0)?;
    let du = forward_gradient(candidate);
    let resid = GradientField {
        gx: du.gx.zip_map(&g.gx, |a, b| a - b)?,
        gy: du.gy.zip_map(&g.gy, |a, b| a - b)?,
    };
    let div = divergence_adjoint(&resid);
    let mut out = candidate.zip_map(i0, |a, b| 2.0 * (a - b))?;
    for (o, d) in out.data_mut().iter_mut().zip(div.data()) {
        *o += 2.0 * beta * d;
    }
    Ok(out)
}

/// Infinity norm of the energy gradient; zero at the exact minimizer.
pub fn residual_gradient_check(candidate: &ImageBuffer, i0: &ImageBuffer, g: &GradientField, beta: f64) -> Result<f64> {
    Ok(energy_gradient(candidate, i0, g, beta)?.max_abs())
}

/// Right-hand side `i0 + β Dᵀg` of the normal equations.
pub fn normal_rhs(i0: &ImageBuffer, g: &GradientField, beta: f64) -> ImageBuffer {
    let div = divergence_adjoint(g);
    let mut rhs = i0.clone();
    for (r, d) in rhs.data_mut().iter_mut().zip(div.data()) {
        *r += beta * d;
    }
    rhs
}

/// Minimizer of [`energy`]. Channels are solved independently.
pub fn reconstruct(i0: &ImageBuffer, g: &GradientField, cfg: &ReconstructionConfig) -> Result<ImageBuffer> {
    cfg.validate()?;
    check_field(g, i0)?;
    if cfg.beta == 0.0 {
        return Ok(i0.clone());
    }
    let (w, h, _) = i0.dims();
    let mut rhs = normal_rhs(i0, g, cfg.beta);
    match cfg.solver {
        SolverKind::Spectral => {
            let solver = SpectralSolver::new(w, h);
            for plane in rhs.planes_mut() {
                solver.solve_in_place(plane, cfg.beta);
            }
            Ok(rhs)
        }
        SolverKind::Cg => {
            let n = w * h;
            let solved: Vec<Result<Vec<f64>>> = rhs
                .data()
                .par_chunks(n)
                .map(|b| {
                    let (x, report) = conjugate_gradient(b, w, h, cfg.beta, cfg.cg_tol, cfg.cg_max_iters);
                    if report.converged {
                        Ok(x)
                    } else {
                        Err(Error::CgDidNotConverge {
                            iterations: report.iterations,
                            residual: report.relative_residual,
                        })
                    }
                })
                .collect();
            for (plane, x) in rhs.planes_mut().zip(solved) {
                plane.copy_from_slice(&x?);
            }
            Ok(rhs)
        }
    }
}
