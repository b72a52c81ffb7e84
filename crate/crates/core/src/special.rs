//! Special functions and quadrature rules used across the crate.

use nalgebra::{DMatrix, SymmetricEigen};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile function.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // Acklam's rational approximation, then Halley steps on the exact cdf.
    const A: [f64; 6] = [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.383577518672690e2, -3.066479806614716e1, 2.506628277459239];
    const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Exponential integral `E_2(x) = ∫_1^∞ e^{-xt} t^{-2} dt` for `x ≥ 0`.
///
/// Series expansion below 1, modified Lentz continued fraction above.
pub fn expint_e2(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let n = 2.0;
    if x < 0.0 || x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x > 1.0 {
        let mut b = x + n;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (n - 1.0 + i as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h * (-x).exp()
    } else {
        // n = 2: E_2(x) = 1 - x(1 - γ - ln x) + Σ_{k≥2} ...
        let nm1 = 1.0;
        let mut ans = 1.0 / (nm1);
        let mut fact = 1.0;
        for i in 1..=MAX_ITER {
            fact *= -x / i as f64;
            let del = if (i as f64 - nm1).abs() > 0.5 {
                -fact / (i as f64 - nm1)
            } else {
                // psi(n) = -γ + Σ_{k=1}^{n-1} 1/k
                let psi = -EULER + 1.0;
                fact * (-x.ln() + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                break;
            }
        }
        ans
    }
}

/// `∫_a^∞ e^{-κt} t^{-2} dt` for `a > 0`, `κ ≥ 0`.
pub fn exp_over_t2_tail(kappa: f64, a: f64) -> f64 {
    expint_e2(kappa * a) / a
}

/// Gauss rule for the standard normal weight: nodes and weights with `Σw = 1`.
pub fn gauss_hermite_prob(m: usize) -> Vec<(f64, f64)> {
    golub_welsch(m, |_| 0.0, |k| (k as f64).sqrt())
}

/// Gauss rule for the weight `e^{-x}` on `[0, ∞)`, weights summing to 1.
pub fn gauss_laguerre(m: usize) -> Vec<(f64, f64)> {
    golub_welsch(m, |k| 2.0 * k as f64 + 1.0, |k| k as f64)
}

fn golub_welsch(m: usize, diag: impl Fn(usize) -> f64, off: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        jacobi[(k, k)] = diag(k);
        if k + 1 < m {
            let b = off(k + 1);
            jacobi[(k, k + 1)] = b;
            jacobi[(k + 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Pairwise summation, so reductions are bit-stable regardless of how the
/// input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn e2_matches_direct_quadrature() {
        for &x in &[0.01, 0.3, 0.999, 1.0, 1.5, 4.0, 20.0] {
            // ∫_1^∞ e^{-xt} t^{-2} dt with t = 1/s, ds: ∫_0^1 e^{-x/s} ds
            let direct = simpson(|s| if s == 0.0 { 0.0 } else { (-x / s).exp() }, 0.0, 1.0, 200_000);
            let e2 = expint_e2(x);
            assert!((e2 - direct).abs() < 1e-9 * direct.max(1e-12), "x={x}: {e2} vs {direct}");
        }
        assert_eq!(expint_e2(0.0), 1.0);
    }

    #[test]
    fn normal_cdf_and_quantile_are_inverse() {
        for &p in &[1e-9, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-13 * p.max(1e-3));
        }
        let phi = normal_cdf(-1.0);
        assert!((phi - 0.158_655_253_931_457_07).abs() < 1e-14, "{phi}");
    }

    #[test]
    fn hermite_rule_integrates_gaussian_moments() {
        let rule = gauss_hermite_prob(40);
        let m = |k: i32| rule.iter().map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-12);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
        assert!((m(6) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn laguerre_rule_integrates_exponential_moments() {
        let rule = gauss_laguerre(40);
        let m = |k: i32| rule.iter().map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-12);
        assert!((m(3) - 6.0).abs() < 1e-10);
        assert!((m(4) - 24.0).abs() < 1e-9);
    }
}
