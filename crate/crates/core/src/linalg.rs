//! Small dense helpers for the per-bin user covariance matrices.

use crate::C64;

/// Lower Cholesky factor `L` with `L L^H = A` of a Hermitian positive
/// semi-definite matrix. Pivots that round to a non-positive value are treated as
/// zero, so rank-deficient inputs still yield a valid square root.
pub(crate) fn cholesky_psd(a: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].re.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = vec![vec![C64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let d = a[j][j].re - (0..j).map(|k| l[j][k].norm_sqr()).sum::<f64>();
        if d <= tol {
            continue;
        }
        let djj = d.sqrt();
        l[j][j] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let s: C64 = (0..j).map(|k| l[i][k] * l[j][k].conj()).sum();
            l[i][j] = (a[i][j] - s) / djj;
        }
    }
    l
}

/// `L w` for a lower-triangular `L`.
pub(crate) fn lower_mul(l: &[Vec<C64>], w: &[C64]) -> Vec<C64> {
    l.iter()
        .enumerate()
        .map(|(i, row)| row[..=i].iter().zip(w).map(|(a, b)| a * b).sum())
        .collect()
}
