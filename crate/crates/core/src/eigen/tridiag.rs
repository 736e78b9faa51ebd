//! Symmetric tridiagonal eigenpairs by Sturm-sequence bisection and inverse
//! iteration. Dimensions stay in the low hundreds (one per Lanczos step), so
//! robustness is preferred over blocked algorithms.

/// Number of eigenvalues below `x`, via the LDL^T sign count. Zero pivots
/// are treated as negative, so values sitting exactly on a minor eigenvalue
/// count as crossed.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0usize;
    let mut d = 1.0f64;
    for i in 0..diag.len() {
        let b_sq = if i == 0 {
            0.0
        } else {
            off[i - 1] * off[i - 1]
        };
        d = (diag[i] - x) - b_sq / d;
        if d.abs() < tiny {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection.
pub fn kth_smallest_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    debug_assert!(k < diag.len());
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut radius = 0.0;
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i < off.len() {
            radius += off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Unit eigenvector for eigenvalue `lambda` by inverse iteration with a
/// partially pivoted tridiagonal solve.
pub fn eigenvector_for(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![1.0];
    }
    // Deterministic start with no special structure.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i * 2654435761) % 1024) as f64 / 1024.0)
        .collect();
    normalize(&mut v);
    for _ in 0..4 {
        let mut w = solve_shifted(diag, off, lambda, &v);
        normalize(&mut w);
        v = w;
    }
    v
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Solves `(T - lambda I) x = rhs` by Gaussian elimination with partial
/// pivoting; fill-in is confined to a second superdiagonal.
fn solve_shifted(diag: &[f64], off: &[f64], lambda: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let scale = diag
        .iter()
        .map(|d| d.abs())
        .chain(off.iter().map(|o| o.abs()))
        .fold(1.0f64, f64::max);
    let pivot_floor = f64::EPSILON * scale;

    let mut a = vec![0.0; n]; // main diagonal of the working matrix
    let mut b = vec![0.0; n - 1]; // first superdiagonal
    let mut c = vec![0.0; n.saturating_sub(2)]; // second superdiagonal (fill-in)
    let mut lower = vec![0.0; n - 1]; // subdiagonal, eliminated in place
    for i in 0..n {
        a[i] = diag[i] - lambda;
    }
    for i in 0..n - 1 {
        b[i] = off[i];
        lower[i] = off[i];
    }
    let mut x: Vec<f64> = rhs.to_vec();

    for i in 0..n - 1 {
        if lower[i].abs() > a[i].abs() {
            // Swap row i and i+1.
            x.swap(i, i + 1);
            std::mem::swap(&mut a[i], &mut lower[i]);
            let bi = b[i];
            b[i] = a[i + 1];
            a[i + 1] = bi;
            if i + 2 < n {
                let ci = c[i];
                c[i] = b[i + 1];
                b[i + 1] = ci;
            }
        }
        let mut piv = a[i];
        if piv.abs() < pivot_floor {
            piv = if piv < 0.0 { -pivot_floor } else { pivot_floor };
            a[i] = piv;
        }
        let factor = lower[i] / piv;
        a[i + 1] -= factor * b[i];
        if i + 2 < n {
            b[i + 1] -= factor * c[i];
        }
        x[i + 1] -= factor * x[i];
    }
    if a[n - 1].abs() < pivot_floor {
        a[n - 1] = if a[n - 1] < 0.0 {
            -pivot_floor
        } else {
            pivot_floor
        };
    }

    // Back substitution.
    x[n - 1] /= a[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - b[i] * x[i + 1] - c[i] * x[i + 2]) / a[i];
    }
    x
}
