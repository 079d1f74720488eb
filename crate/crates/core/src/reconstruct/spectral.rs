use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

/// Exact solver for `(Id + β(DxᵀDx + DyᵀDy)) u = rhs` on a `w x h` grid,
/// where `D` is the forward difference with replicate boundary.
///
/// The operator is the identity plus β times the 5-point Neumann Laplacian,
/// which the 2-D type-II cosine transform diagonalizes with eigenvalues
/// `(2 − 2cos(πk/w)) + (2 − 2cos(πl/h))`.
pub struct SpectralSolver {
    w: usize,
    h: usize,
    row: Arc<dyn TransformType2And3<f64>>,
    col: Arc<dyn TransformType2And3<f64>>,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
}

impl SpectralSolver {
    pub fn new(w: usize, h: usize) -> Self {
        let mut planner = DctPlanner::new();
        let eig = |n: usize| -> Vec<f64> { (0..n).map(|k| 2.0 - 2.0 * (PI * k as f64 / n as f64).cos()).collect() };
        SpectralSolver {
            w,
            h,
            row: planner.plan_dct2(w),
            col: planner.plan_dct2(h),
            eig_x: eig(w),
            eig_y: eig(h),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.w, self.h)
    }

    /// Overwrites `plane` (the right-hand side, row-major) with the solution.
    pub fn solve_in_place(&self, plane: &mut [f64], beta: f64) {
        let (w, h) = (self.w, self.h);
        assert_eq!(plane.len(), w * h);
        let row_scratch = || vec![0.0; self.row.get_scratch_len()];
        let col_scratch = || vec![0.0; self.col.get_scratch_len()];
        plane
            .par_chunks_mut(w)
            .for_each_init(row_scratch, |s, r| self.row.process_dct2_with_scratch(r, s));
        let mut cols = transpose(plane, w, h);
        cols.par_chunks_mut(h)
            .enumerate()
            .for_each_init(col_scratch, |s, (k, col)| {
                self.col.process_dct2_with_scratch(col, s);
                let ex = self.eig_x[k];
                for (l, v) in col.iter_mut().enumerate() {
                    *v /= 1.0 + beta * (ex + self.eig_y[l]);
                }
                self.col.process_dct3_with_scratch(col, s);
            });
        transpose_into(&cols, h, w, plane);
        let scale = 4.0 / (w * h) as f64;
        plane.par_chunks_mut(w).for_each_init(row_scratch, |s, r| {
            self.row.process_dct3_with_scratch(r, s);
            r.iter_mut().for_each(|v| *v *= scale);
        });
    }
}

fn transpose(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    transpose_into(data, w, h, &mut out);
    out
}

/// `data` is `h` rows of `w`; writes `w` rows of `h`.
fn transpose_into(data: &[f64], w: usize, h: usize, out: &mut [f64]) {
    const B: usize = 32;
    for yb in (0..h).step_by(B) {
        for xb in (0..w).step_by(B) {
            for y in yb..(yb + B).min(h) {
                for x in xb..(xb + B).min(w) {
                    out[x * h + y] = data[y * w + x];
                }
            }
        }
    }
}
