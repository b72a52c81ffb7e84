//! Finite-support laws of real random variables and independent families
//! of them. These back every exact (enumeration-based) computation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const PROB_TOL: f64 = 1e-12;

/// Law of a real random variable with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return invalid("atoms need matching, non-empty value and probability arrays");
        }
        if values.iter().chain(&probs).any(|v| !v.is_finite()) {
            return invalid("atoms must be finite");
        }
        if probs.iter().any(|&p| p < 0.0) {
            return invalid("atom probabilities must be nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return invalid(format!("atom probabilities sum to {total}, not 1"));
        }
        Ok(Self { values, probs })
    }

    /// Equiprobable `±a`.
    pub fn symmetric_pair(a: f64) -> Self {
        Self { values: vec![a, -a], probs: vec![0.5, 0.5] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms().map(|(v, p)| p * f(v)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|v| v * v)
    }

    pub fn abs_moment(&self, alpha: f64) -> f64 {
        self.expect(|v| v.abs().powf(alpha))
    }

    /// `P(|X| > t)`.
    pub fn abs_tail(&self, t: f64) -> f64 {
        self.atoms().filter(|(v, _)| v.abs() > t).map(|(_, p)| p).sum()
    }

    /// Symmetric about zero: every atom `a` is matched by `-a` with equal mass.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.atoms().all(|(v, p)| {
            let mirrored: f64 = self.atoms().filter(|(w, _)| (w + v).abs() <= tol).map(|(_, q)| q).sum();
            let own: f64 = self.atoms().filter(|(w, _)| (w - v).abs() <= tol).map(|(_, q)| q).sum();
            (mirrored - own).abs() <= tol.max(PROB_TOL) && p >= 0.0
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect(), probs: self.probs.clone() }
    }
}

/// Independent, finitely supported real summands `ξ_1, …, ξ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFamily {
    pub components: Vec<DiscreteLaw>,
}

impl DiscreteFamily {
    pub fn new(components: Vec<DiscreteLaw>) -> Result<Self> {
        if components.is_empty() {
            return invalid("family needs at least one component");
        }
        Ok(Self { components })
    }

    pub fn iid(law: DiscreteLaw, n: usize) -> Result<Self> {
        Self::new(vec![law; n])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Number of joint atoms of `(ξ_1, …, ξ_n)`, saturating.
    pub fn joint_size(&self) -> usize {
        self.components.iter().fold(1usize, |acc, c| acc.saturating_mul(c.len()))
    }

    pub fn variance_sum(&self) -> f64 {
        self.components.iter().map(DiscreteLaw::second_moment).sum()
    }

    /// `Σ_i P(|ξ_i| > t)`.
    pub fn tail_sum(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.abs_tail(t)).sum()
    }

    /// Visit every joint atom as `(index vector, probability)`.
    pub fn for_each_joint(&self, mut visit: impl FnMut(&[usize], f64)) {
        let n = self.components.len();
        let mut idx = vec![0usize; n];
        loop {
            let prob: f64 = idx.iter().zip(&self.components).map(|(&j, c)| c.probs[j]).product();
            visit(&idx, prob);
            let mut pos = 0;
            loop {
                if pos == n {
                    return;
                }
                idx[pos] += 1;
                if idx[pos] < self.components[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Exact law of `W = Σ ξ_i` as sorted `(value, probability)` pairs.
    pub fn sum_law(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.joint_size().min(1 << 24));
        self.for_each_joint(|idx, p| {
            let w: f64 = idx.iter().zip(&self.components).map(|(&j, c)| c.values[j]).sum();
            out.push((w, p));
        });
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Law of `W` by successive convolution, merging bit-equal values. Much
    /// smaller than [`Self::sum_law`] when atoms sit on a common lattice.
    pub fn sum_law_merged(&self) -> Vec<(f64, f64)> {
        let mut law = vec![(0.0, 1.0)];
        for c in &self.components {
            let mut next: Vec<(f64, f64)> =
                law.iter().flat_map(|&(w, p)| c.atoms().map(move |(v, q)| (w + v, p * q))).collect();
            next.sort_by(|a, b| a.0.total_cmp(&b.0));
            law.clear();
            for (v, p) in next {
                match law.last_mut() {
                    Some(last) if last.0 == v => last.1 += p,
                    _ => law.push((v, p)),
                }
            }
        }
        law
    }
}

/// Joint law of a pair `(ξ, η)` with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLaw {
    pub atoms: Vec<(f64, f64, f64)>,
}

impl PairLaw {
    pub fn new(atoms: Vec<(f64, f64, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        if atoms.is_empty() || atoms.iter().any(|a| a.2 < 0.0) || (total - 1.0).abs() > PROB_TOL {
            return invalid("pair atoms need nonnegative probabilities summing to 1");
        }
        Ok(Self { atoms })
    }

    /// The diagonal choice `η = ξ`.
    pub fn diagonal(law: &DiscreteLaw) -> Self {
        Self { atoms: law.atoms().map(|(v, p)| (v, v, p)).collect() }
    }

    pub fn xi(&self) -> DiscreteLaw {
        DiscreteLaw { values: self.atoms.iter().map(|a| a.0).collect(), probs: self.atoms.iter().map(|a| a.2).collect() }
    }

    pub fn eta(&self) -> DiscreteLaw {
        DiscreteLaw { values: self.atoms.iter().map(|a| a.1).collect(), probs: self.atoms.iter().map(|a| a.2).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_atoms() {
        assert!(DiscreteLaw::new(vec![1.0, -1.0], vec![0.5, 0.4]).is_err());
        assert!(DiscreteLaw::new(vec![1.0], vec![1.0 + 1e-13]).is_ok());
        assert!(DiscreteLaw::new(vec![1.0, 2.0], vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn sum_law_of_two_rademachers() {
        let fam = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(1.0), 2).unwrap();
        let law = fam.sum_law();
        let at = |w: f64| law.iter().filter(|a| a.0 == w).map(|a| a.1).sum::<f64>();
        assert_eq!(at(2.0), 0.25);
        assert_eq!(at(0.0), 0.5);
        assert_eq!(at(-2.0), 0.25);
    }

    #[test]
    fn symmetry_detection() {
        assert!(DiscreteLaw::symmetric_pair(0.3).is_symmetric(1e-12));
        let lopsided = DiscreteLaw::new(vec![1.0, -1.0], vec![0.6, 0.4]).unwrap();
        assert!(!lopsided.is_symmetric(1e-12));
        let with_zero = DiscreteLaw::new(vec![0.0, 2.0, -2.0], vec![0.5, 0.25, 0.25]).unwrap();
        assert!(with_zero.is_symmetric(1e-12));
    }
}
