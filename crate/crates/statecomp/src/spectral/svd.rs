use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Top-`r` singular triplets of a matrix under a fixed sign convention.
///
/// In each column of `u` the entry of largest magnitude is nonnegative (ties
/// broken by lowest row index) and the matching column of `v` is flipped in
/// step, so decompositions are byte-stable across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
    next_sigma: Option<f64>,
}

impl SvdResult {
    /// Left factor, `p x r` with orthonormal columns.
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Singular values, nonincreasing, length `r`.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Right factor, `q x r` with orthonormal columns.
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// `sigma_{r+1}` of the full decomposition, when `r < min(p, q)`.
    pub fn next_sigma(&self) -> Option<f64> {
        self.next_sigma
    }

    /// True when the retained and discarded spectra touch
    /// (`sigma_r - sigma_{r+1} <= 1e-12`), making the subspace ill-posed.
    pub fn degenerate_gap(&self) -> bool {
        match self.next_sigma {
            Some(next) => self.sigma.last().copied().unwrap_or(0.0) - next <= 1e-12,
            None => false,
        }
    }

    /// `U diag(sigma) V^T`, a best rank-`r` approximation of the input.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let r = self.sigma.len();
        let mut scaled = self.u.clone();
        for j in 0..r {
            scaled.column_mut(j).scale_mut(self.sigma[j]);
        }
        scaled * self.v.transpose()
    }
}

/// Computes the top-`r` singular triplets of `m`.
///
/// The initial factorization is refined by two rounds of subspace iteration
/// and a Rayleigh-Ritz rotation; the library decomposition alone can leave
/// residuals around 1e-6 on matrices with flat blocks.
pub fn truncated_svd(m: &DMatrix<f64>, r: usize) -> Result<SvdResult> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if r < 1 || r > rows.min(cols) {
        return Err(Error::RankOutOfRange { r, rows, cols });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("matrix contains non-finite entries".into()));
    }

    let svd = m.clone().svd(true, true);
    let full_u = svd.u.expect("u requested");
    let full_vt = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();

    // Sort triplets by descending singular value; ties keep original order.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut u = DMatrix::<f64>::zeros(rows, r);
    let mut v = DMatrix::<f64>::zeros(cols, r);
    for (dst, &src) in order.iter().take(r).enumerate() {
        u.column_mut(dst).copy_from(&full_u.column(src));
        v.column_mut(dst).copy_from(&full_vt.row(src).transpose());
    }
    let next_sigma = if r < k { Some(svd.singular_values[order[r]]) } else { None };

    for _ in 0..2 {
        u = (m * &v).qr().q();
        v = (m.transpose() * &u).qr().q();
    }
    let small = u.transpose() * m * &v;
    let small_svd = small.svd(true, true);
    let su = small_svd.u.expect("u requested");
    let svt = small_svd.v_t.expect("v_t requested");
    let mut small_order: Vec<usize> = (0..r).collect();
    small_order.sort_by(|&a, &b| {
        small_svd.singular_values[b]
            .partial_cmp(&small_svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut sigma = Vec::with_capacity(r);
    let mut u_rot = DMatrix::<f64>::zeros(rows, r);
    let mut v_rot = DMatrix::<f64>::zeros(cols, r);
    for (dst, &src) in small_order.iter().enumerate() {
        sigma.push(small_svd.singular_values[src]);
        u_rot.set_column(dst, &(&u * su.column(src)));
        v_rot.set_column(dst, &(&v * svt.row(src).transpose()));
    }
    let mut u = u_rot;
    let mut v = v_rot;

    for j in 0..r {
        let col = u.column(j);
        let mut best = 0usize;
        for i in 1..rows {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }

    Ok(SvdResult { u, sigma, v, next_sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_error(m: &DMatrix<f64>) -> f64 {
        let gram = m.transpose() * m;
        let identity = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
        (gram - identity).abs().max()
    }

    #[test]
    fn diagonal_matrix_keeps_leading_axes() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let svd = truncated_svd(&m, 2).unwrap();
        assert_eq!(svd.sigma(), &[3.0, 2.0]);
        assert!((svd.u()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((svd.u()[(1, 1)] - 1.0).abs() < 1e-14);
        assert_eq!(svd.next_sigma(), Some(1.0));
        assert!(!svd.degenerate_gap());
    }

    #[test]
    fn exact_rank_one_matrix_reconstructs() {
        let u = nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let v = nalgebra::DVector::from_vec(vec![0.3, 0.7, -0.1, 2.0]);
        let m = &u * v.transpose();
        let svd = truncated_svd(&m, 1).unwrap();
        let err = (svd.reconstruct() - &m).abs().max();
        assert!(err < 1e-12);
    }

    #[test]
    fn truncation_error_matches_discarded_spectrum() {
        // Oracle: the Frobenius error of the best rank-r approximation equals
        // the norm of the discarded singular values from a full decomposition.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DMatrix::from_fn(6, 6, |_, _| rng.gen::<f64>() - 0.5);
        let mut full: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        full.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expected: f64 = full[3..].iter().map(|s| s * s).sum::<f64>().sqrt();

        let svd = truncated_svd(&m, 3).unwrap();
        let got = (svd.reconstruct() - &m).norm();
        assert!((got - expected).abs() < 1e-10, "got {got}, expected {expected}");
    }

    #[test]
    fn factors_are_orthonormal_and_sigma_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DMatrix::from_fn(8, 5, |_, _| rng.gen::<f64>());
        let svd = truncated_svd(&m, 4).unwrap();
        assert!(orthonormality_error(svd.u()) < 1e-10);
        assert!(orthonormality_error(svd.v()) < 1e-10);
        for w in svd.sigma().windows(2) {
            assert!(w[0] >= w[1]);
        }
        // Sign convention: dominant entry of every left column is nonnegative.
        for j in 0..4 {
            let col = svd.u().column(j);
            let dominant = col.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(dominant >= 0.0);
        }
    }

    #[test]
    fn touching_spectra_are_flagged_as_degenerate() {
        let m = DMatrix::<f64>::identity(3, 3);
        let svd = truncated_svd(&m, 2).unwrap();
        assert!(svd.degenerate_gap());
        let spread = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        assert!(!truncated_svd(&spread, 2).unwrap().degenerate_gap());
    }

    #[test]
    fn rank_out_of_range_is_rejected() {
        let m = DMatrix::<f64>::zeros(3, 2);
        assert!(truncated_svd(&m, 0).is_err());
        assert!(truncated_svd(&m, 3).is_err());
        let nan = DMatrix::from_element(2, 2, f64::NAN);
        assert!(truncated_svd(&nan, 1).is_err());
    }
}
