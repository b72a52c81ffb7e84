//! Student's T, Pearson's R and Hotelling's T² on raw samples.
//!
//! Undefined values (zero variance, singular covariance) come back as an
//! explicit [`Outcome::Undefined`] rather than an arbitrary number.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Result};

/// Relative variance below which a sample counts as constant.
pub const ZERO_VARIANCE_REL: f64 = 1e-28;
/// Condition number above which an empirical covariance counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Undefined {
    ZeroVariance,
    SingularCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Outcome {
    Value(f64),
    Undefined(Undefined),
}

impl Outcome {
    pub fn value(self) -> Option<f64> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::Undefined(_) => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Outcome::Undefined(_))
    }
}

fn mean(xs: impl Iterator<Item = f64>, n: f64) -> f64 {
    xs.sum::<f64>() / n
}

/// `√n · X̄ / S` with `S² = mean(X²) - X̄²` (the `1/n` variance).
pub fn student_t(sample: &[f64]) -> Result<Outcome> {
    if sample.len() < 2 {
        return invalid("Student's T needs at least 2 observations");
    }
    Ok(student_t_unchecked(sample))
}

#[inline]
pub(crate) fn student_t_unchecked(sample: &[f64]) -> Outcome {
    let n = sample.len() as f64;
    let xbar = mean(sample.iter().copied(), n);
    let var = mean(sample.iter().map(|x| (x - xbar) * (x - xbar)), n);
    let scale = mean(sample.iter().map(|x| x * x), n);
    if var <= ZERO_VARIANCE_REL * scale || var == 0.0 {
        return Outcome::Undefined(Undefined::ZeroVariance);
    }
    Outcome::Value(n.sqrt() * xbar / var.sqrt())
}

/// Product-moment correlation of `(x, y)` pairs, clamped to `[-1, 1]`.
pub fn pearson_r(sample: &[[f64; 2]]) -> Result<Outcome> {
    if sample.len() < 2 {
        return invalid("Pearson's R needs at least 2 observations");
    }
    Ok(pearson_r_unchecked(sample))
}

#[inline]
pub(crate) fn pearson_r_unchecked(sample: &[[f64; 2]]) -> Outcome {
    let n = sample.len() as f64;
    let mx = mean(sample.iter().map(|p| p[0]), n);
    let my = mean(sample.iter().map(|p| p[1]), n);
    let (mut sxx, mut syy, mut sxy, mut qx, mut qy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in sample {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        qx += p[0] * p[0];
        qy += p[1] * p[1];
    }
    if sxx <= ZERO_VARIANCE_REL * qx || syy <= ZERO_VARIANCE_REL * qy || sxx == 0.0 || syy == 0.0 {
        return Outcome::Undefined(Undefined::ZeroVariance);
    }
    Outcome::Value((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `n · X̄ᵀ (S²)⁻¹ X̄` with the `1/n` empirical covariance; `rows` is
/// row-major with `k` columns.
pub fn hotelling_t2(rows: &[f64], k: usize) -> Result<Outcome> {
    if k == 0 || rows.len() % k != 0 {
        return invalid("sample length must be a multiple of the dimension");
    }
    if rows.len() / k < k + 1 {
        return invalid(format!("Hotelling's T² in dimension {k} needs at least {} observations", k + 1));
    }
    Ok(hotelling_t2_unchecked(rows, k))
}

pub(crate) fn hotelling_t2_unchecked(rows: &[f64], k: usize) -> Outcome {
    let n = (rows.len() / k) as f64;
    let mut xbar = vec![0.0; k];
    for r in rows.chunks_exact(k) {
        for (m, x) in xbar.iter_mut().zip(r) {
            *m += x;
        }
    }
    xbar.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![0.0; k * k];
    for r in rows.chunks_exact(k) {
        for i in 0..k {
            let di = r[i] - xbar[i];
            for j in 0..=i {
                cov[i * k + j] += di * (r[j] - xbar[j]);
            }
        }
    }
    for i in 0..k {
        for j in 0..=i {
            cov[i * k + j] /= n;
            cov[j * k + i] = cov[i * k + j];
        }
    }
    if k == 2 {
        let (a, b, d) = (cov[0], cov[1], cov[3]);
        let half_tr = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let (lmax, lmin) = (half_tr + disc, half_tr - disc);
        if !(lmin > 0.0) || lmax > SINGULAR_CONDITION * lmin {
            return Outcome::Undefined(Undefined::SingularCovariance);
        }
        let det = a * d - b * b;
        let (x, y) = (xbar[0], xbar[1]);
        return Outcome::Value(n * (d * x * x - 2.0 * b * x * y + a * y * y) / det);
    }
    let s = DMatrix::from_row_slice(k, k, &cov);
    let eig = SymmetricEigen::new(s.clone());
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if !(lmin > 0.0) || lmax > SINGULAR_CONDITION * lmin {
        return Outcome::Undefined(Undefined::SingularCovariance);
    }
    let xv = DVector::from_vec(xbar);
    match s.cholesky() {
        Some(ch) => Outcome::Value(n * xv.dot(&ch.solve(&xv))),
        None => Outcome::Undefined(Undefined::SingularCovariance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn student_examples() {
        assert_eq!(student_t(&[1.0, 2.0, 3.0]).unwrap(), Outcome::Value(3f64.sqrt() * 2.0 / (2.0f64 / 3.0).sqrt()));
        assert_eq!(student_t(&[0.1, 0.1, 0.1]).unwrap(), Outcome::Undefined(Undefined::ZeroVariance));
        assert_eq!(student_t(&[-1.0, 1.0]).unwrap(), Outcome::Value(0.0));
        assert!(student_t(&[1.0]).is_err());
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson_r(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap().value(), Some(1.0));
        let r = pearson_r(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap().value().unwrap();
        assert!((r + 0.5).abs() < 1e-15);
        assert!(pearson_r(&[[0.0, 0.0], [0.0, 1.0], [0.0, 2.0]]).unwrap().is_undefined());
    }

    #[test]
    fn hotelling_examples() {
        assert_eq!(hotelling_t2(&[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0], 2).unwrap().value(), Some(0.0));
        let t = hotelling_t2(&[1.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap().value().unwrap();
        assert!((t - 24.0).abs() < 1e-12);
        assert!(hotelling_t2(&[1.0, 0.0, 2.0, 0.0, 3.0, 0.0], 2).unwrap().is_undefined());
    }

    #[test]
    fn general_dimension_path_agrees_with_closed_form() {
        // embed the 2-d example in 3-d with an independent third coordinate
        let rows = [1.0, 0.0, 0.3, 0.0, 1.0, -0.2, 1.0, 1.0, 0.5, 0.2, 0.4, -0.9];
        let t3 = hotelling_t2(&rows, 3).unwrap().value().unwrap();
        let s = DMatrix::from_row_slice(4, 3, &rows);
        let xbar = s.row_mean().transpose();
        let centered = DMatrix::from_fn(4, 3, |i, j| s[(i, j)] - xbar[j]);
        let cov = centered.transpose() * &centered / 4.0;
        let direct = 4.0 * (xbar.transpose() * cov.try_inverse().unwrap() * &xbar)[(0, 0)];
        assert!((t3 - direct).abs() < 1e-10 * direct);
    }
}
