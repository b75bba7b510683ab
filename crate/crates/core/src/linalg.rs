//! Small dense solvers for the continuation and fitting code.

use crate::family::C64;

/// Solves A x = b for a square real system by partial pivoting. None when singular.
pub fn solve_real<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for i in (0..N).rev() {
        let mut s = b[i];
        for k in i + 1..N {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// Unit null vector of a 3x4 real matrix, oriented to agree with `prefer` when given.
pub fn null_vector_3x4(j: &[[f64; 4]; 3], prefer: Option<[f64; 4]>) -> Option<[f64; 4]> {
    // try each coordinate row as the normalizing constraint, keep the best conditioned
    let mut best: Option<[f64; 4]> = None;
    let mut best_norm = f64::INFINITY;
    for k in 0..4 {
        let mut a = [[0.0; 4]; 4];
        a[..3].copy_from_slice(&j[..]);
        a[3][k] = 1.0;
        if let Some(v) = solve_real(a, [0.0, 0.0, 0.0, 1.0]) {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n.is_finite() && n < best_norm {
                best_norm = n;
                best = Some(v.map(|x| x / n));
            }
        }
    }
    let mut v = best?;
    if let Some(p) = prefer {
        if v.iter().zip(p.iter()).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            v = v.map(|x| -x);
        }
    }
    Some(v)
}

/// Least squares min |B x - y| for complex B (rows x cols) via modified Gram-Schmidt.
pub fn lstsq_complex(b: &[Vec<C64>], y: &[C64]) -> Option<Vec<C64>> {
    let rows = b.len();
    let cols = b.first()?.len();
    let mut q: Vec<Vec<C64>> = (0..cols).map(|c| (0..rows).map(|r| b[r][c]).collect()).collect();
    let mut r = vec![vec![C64::new(0.0, 0.0); cols]; cols];
    for k in 0..cols {
        for i in 0..k {
            let dot: C64 = (0..rows).map(|t| q[i][t].conj() * q[k][t]).sum();
            r[i][k] = dot;
            let qi = q[i].clone();
            for (t, v) in q[k].iter_mut().enumerate() {
                *v -= dot * qi[t];
            }
        }
        let nrm = q[k].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-300 {
            return None;
        }
        r[k][k] = C64::new(nrm, 0.0);
        for v in q[k].iter_mut() {
            *v /= nrm;
        }
    }
    let qty: Vec<C64> = (0..cols).map(|k| (0..rows).map(|t| q[k][t].conj() * y[t]).sum()).collect();
    let mut x = vec![C64::new(0.0, 0.0); cols];
    for i in (0..cols).rev() {
        let mut s = qty[i];
        for k in i + 1..cols {
            s -= r[i][k] * x[k];
        }
        x[i] = s / r[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let x = solve_real([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn null_vector_is_orthogonal_to_rows() {
        let j = [[1.0, 2.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, -1.0]];
        let v = null_vector_3x4(&j, None).unwrap();
        for row in &j {
            let d: f64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn lstsq_recovers_exact_fit() {
        let pts: Vec<C64> = (0..20).map(|k| C64::from_polar(1.0, k as f64 * 0.3)).collect();
        let b: Vec<Vec<C64>> = pts.iter().map(|&z| vec![z, z * z]).collect();
        let y: Vec<C64> = pts.iter().map(|&z| 2.0 * z - C64::new(0.0, 1.0) * z * z).collect();
        let x = lstsq_complex(&b, &y).unwrap();
        assert!((x[0] - 2.0).norm() < 1e-12 && (x[1] + C64::new(0.0, 1.0)).norm() < 1e-12);
    }
}
