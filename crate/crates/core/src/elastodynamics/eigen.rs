//! Cyclic Jacobi eigen-solver for small dense symmetric matrices.

const MAX_SWEEPS: usize = 50;

/// Diagonalizes `a` in place. Returns the eigenvector matrix `v` whose
/// columns are the eigenvectors; the eigenvalues are left on the diagonal of `a`.
pub fn jacobi<const N: usize>(a: &mut [[f64; N]; N]) -> [[f64; N]; N] {
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..N {
            diag += a[i][i] * a[i][i];
            for j in (i + 1)..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= 1e-34 * diag || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    v
}

/// Eigenvalues in ascending order.
pub fn jacobi_eigenvalues<const N: usize>(a: &mut [[f64; N]; N]) -> [f64; N] {
    jacobi(a);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a[i][i];
    }
    out.sort_by(|x, y| x.total_cmp(y));
    out
}

/// Symmetric 3×3 eigen-decomposition, eigenvalues sorted descending and
/// eigenvectors sign-fixed so their first non-negligible component is positive.
pub fn symmetric3(m: &[[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let v = jacobi(&mut a);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a[k][k];
        let mut e = [v[0][k], v[1][k], v[2][k]];
        let n = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
        e.iter_mut().for_each(|c| *c /= n);
        fix_sign(&mut e);
        vectors[slot] = e;
    }
    (values, vectors)
}

pub(crate) fn fix_sign(e: &mut [f64; 3]) {
    if let Some(&c) = e.iter().find(|c| c.abs() > 1e-12) {
        if c < 0.0 {
            e.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
