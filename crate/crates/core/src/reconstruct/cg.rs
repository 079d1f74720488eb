//! Jacobi-preconditioned conjugate gradient for the screened Poisson
//! operator, applied matrix-free.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// `out = u + β (DxᵀDx + DyᵀDy) u` for one `w x h` plane.
pub fn apply_operator(u: &[f64], w: usize, h: usize, beta: f64, out: &mut [f64]) {
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let c = u[p];
            let mut lap = 0.0;
            if x > 0 {
                lap += c - u[p - 1];
            }
            if x + 1 < w {
                lap += c - u[p + 1];
            }
            if y > 0 {
                lap += c - u[p - w];
            }
            if y + 1 < h {
                lap += c - u[p + w];
            }
            out[p] = c + beta * lap;
        }
    }
}

fn diagonal(w: usize, h: usize, beta: f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let deg = (x > 0) as usize + (x + 1 < w) as usize + (y > 0) as usize + (y + 1 < h) as usize;
            d.push(1.0 + beta * deg as f64);
        }
    }
    d
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` starting from zero; stops once `|r| <= tol |b|`.
pub fn conjugate_gradient(
    b: &[f64],
    w: usize,
    h: usize,
    beta: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, CgReport) {
    let n = w * h;
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return (
            x,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        );
    }
    let inv_diag: Vec<f64> = diagonal(w, h, beta).iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 0..max_iters {
        apply_operator(&p, w, h, beta, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return (
                x,
                CgReport {
                    iterations: it + 1,
                    relative_residual: rel,
                    converged: true,
                },
            );
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let gamma = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + gamma * p[i];
        }
    }
    (
        x,
        CgReport {
            iterations: max_iters,
            relative_residual: rel,
            converged: false,
        },
    )
}
