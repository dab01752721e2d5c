//! Rank-revealing pseudo-inverse used by every least-squares step.

use nalgebra::DMatrix;

/// Singular values below `RANK_TOLERANCE * sigma_max` are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

/// Moore-Penrose pseudo-inverse through the SVD.
pub fn pseudo_inverse(a: &DMatrix<f64>) -> PseudoInverse {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return PseudoInverse {
            matrix: DMatrix::zeros(cols, rows),
            rank: 0,
        };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = RANK_TOLERANCE * sigma_max;

    let mut out = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if !(s > cutoff) || s == 0.0 {
            continue;
        }
        rank += 1;
        // out += v_i * u_i^T / s
        let v_i = v_t.row(i).transpose();
        let u_i = u.column(i);
        out += (v_i * u_i.transpose()) / s;
    }
    PseudoInverse { matrix: out, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_square_matches_inverse() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let p = pseudo_inverse(&a);
        assert_eq!(p.rank, 3);
        let id = &a * &p.matrix;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_reports_rank() {
        // rows are multiples of each other
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, -1.0, -2.0, -3.0]);
        let p = pseudo_inverse(&a);
        assert_eq!(p.rank, 1);
        // Penrose condition A A+ A = A
        let back = &a * &p.matrix * &a;
        assert!((back - &a).abs().max() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let p = pseudo_inverse(&DMatrix::zeros(4, 3));
        assert_eq!(p.rank, 0);
        assert!(p.matrix.iter().all(|v| *v == 0.0));
    }
}
