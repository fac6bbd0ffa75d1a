//! The fixed distribution `Φ₀` that stands in for a Deep Random generator.
//!
//! Each half of a length-`n` vector independently gets a weight drawn
//! uniformly from `{0..n/2}`, then a uniformly random subset of that size is
//! set. Its quadratic matrix `E[x_r x_s]` has the 1/2, 1/3, 1/4 block pattern
//! and its tidying permutation is the identity.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::bits::{BitVector, Permutation};
use crate::error::{Error, Result};

/// Above this length the entropy falls back from exact binomials to log-gamma.
pub const EXACT_ENTROPY_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhiZero {
    n: usize,
}

impl PhiZero {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::param(format!("Φ₀ needs an even length ≥ 2, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let m = self.half();
        let mut x = BitVector::zeros(self.n);
        for offset in [0, m] {
            let t = rng.random_range(0..=m);
            for r in rand::seq::index::sample(rng, m, t) {
                x.set(offset + r, true);
            }
        }
        x
    }

    /// Exact probability of `x` under Φ₀.
    pub fn probability(&self, x: &BitVector) -> f64 {
        assert_eq!(x.len(), self.n);
        let m = self.half();
        let t1 = (0..m).filter(|&r| x.get(r)).count();
        let t2 = (m..self.n).filter(|&r| x.get(r)).count();
        let per_half = |t: usize| 1.0 / ((m + 1) as f64 * binomial_f64(m, t));
        per_half(t1) * per_half(t2)
    }

    pub fn quadratic_matrix(&self) -> QuadMatrix {
        let m = self.half();
        let mut data = vec![0.0; self.n * self.n];
        for r in 0..self.n {
            for s in 0..self.n {
                data[r * self.n + s] = if r == s {
                    0.5
                } else if (r < m) == (s < m) {
                    1.0 / 3.0
                } else {
                    0.25
                };
            }
        }
        QuadMatrix { n: self.n, data }
    }

    /// Φ₀ is already tidied.
    pub fn tidying_permutation(&self) -> Permutation {
        Permutation::identity(self.n)
    }
}

pub fn sample_phi0<R: Rng + ?Sized>(dist: &PhiZero, rng: &mut R) -> BitVector {
    dist.sample(rng)
}

pub fn quadratic_matrix(dist: &PhiZero) -> QuadMatrix {
    dist.quadratic_matrix()
}

pub fn tidying_permutation_phi0(n: usize) -> Result<Permutation> {
    Ok(PhiZero::new(n)?.tidying_permutation())
}

/// Second-moment matrix `M_rs = E[x_r x_s]` of a distribution on `{0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMatrix {
    n: usize,
    data: Vec<f64>,
}

impl QuadMatrix {
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::param("quadratic matrix must be n×n"));
        }
        Ok(Self { n, data })
    }

    /// Monte-Carlo estimate from samples.
    pub fn estimate<'a>(n: usize, samples: impl IntoIterator<Item = &'a BitVector>) -> Self {
        let mut acc = vec![0u64; n * n];
        let mut count = 0u64;
        for x in samples {
            let ones = x.ones_indices();
            for &r in &ones {
                for &s in &ones {
                    acc[r * n + s] += 1;
                }
            }
            count += 1;
        }
        let data = acc
            .into_iter()
            .map(|c| c as f64 / count.max(1) as f64)
            .collect();
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.data[r * self.n + s]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| (0..r).all(|s| self.get(r, s) == self.get(s, r)))
    }

    /// Mean same-half off-diagonal entry minus mean cross-half entry.
    ///
    /// Returns NaN for `n < 4`, where there are no same-half off-diagonal
    /// entries.
    pub fn block_contrast(&self) -> f64 {
        let m = self.n / 2;
        let (mut within, mut nw, mut cross, mut nc) = (0.0, 0usize, 0.0, 0usize);
        for r in 0..self.n {
            for s in 0..self.n {
                if r == s {
                    continue;
                }
                if (r < m) == (s < m) {
                    within += self.get(r, s);
                    nw += 1;
                } else {
                    cross += self.get(r, s);
                    nc += 1;
                }
            }
        }
        if nw == 0 || nc == 0 {
            return f64::NAN;
        }
        within / nw as f64 - cross / nc as f64
    }
}

pub fn block_contrast(m: &QuadMatrix) -> f64 {
    m.block_contrast()
}

fn binomial_f64(m: usize, t: usize) -> f64 {
    binomial_big(m, t).to_f64().unwrap_or(f64::INFINITY)
}

pub(crate) fn binomial_big(m: usize, t: usize) -> BigUint {
    if t > m {
        return BigUint::ZERO;
    }
    let t = t.min(m - t);
    let mut c = BigUint::one();
    for u in 0..t {
        c = c * BigUint::from(m - u) / BigUint::from(u + 1);
    }
    c
}

/// Natural log of a (possibly huge) positive integer.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `Σ_{t=0}^{m} ln C(m, t)` using exact binomials.
fn sum_ln_binomials_exact(m: usize) -> f64 {
    let mut c = BigUint::one();
    let mut sum = 0.0;
    for t in 0..=m {
        sum += ln_big(&c);
        c = c * BigUint::from(m - t) / BigUint::from(t + 1);
    }
    sum
}

fn sum_ln_binomials_lgamma(m: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let lm = ln_gamma(m as f64 + 1.0);
    (0..=m)
        .map(|t| lm - ln_gamma(t as f64 + 1.0) - ln_gamma((m - t) as f64 + 1.0))
        .sum()
}

/// Exact Shannon entropy of Φ₀ in nats.
pub fn entropy_phi0(n: usize) -> Result<f64> {
    let dist = PhiZero::new(n)?;
    let m = dist.half();
    let sum = if n <= EXACT_ENTROPY_LIMIT {
        sum_ln_binomials_exact(m)
    } else {
        sum_ln_binomials_lgamma(m)
    };
    let mp1 = (m + 1) as f64;
    Ok(2.0 * (mp1.ln() + sum / mp1))
}

/// Both sides of the binomial log-sum identity
/// `Σ_t ln C(m,t) = (m+1) ln(m!) − 2 Σ_{u=1}^{m} (m+1−u) ln u`.
pub fn binomial_log_sum_identity(m: usize) -> (f64, f64) {
    let lhs = sum_ln_binomials_exact(m);
    let mut fact = BigUint::one();
    for u in 2..=m {
        fact *= BigUint::from(u);
    }
    let weighted: f64 = (1..=m)
        .map(|u| (m + 1 - u) as f64 * (u as f64).ln())
        .sum();
    let rhs = (m + 1) as f64 * ln_big(&fact) - 2.0 * weighted;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn all_vectors(n: usize) -> impl Iterator<Item = BitVector> {
        (0u32..(1 << n)).map(move |code| BitVector::from_bools((0..n).map(|r| code >> r & 1 == 1)))
    }

    #[test]
    fn rejects_odd_or_zero_length() {
        assert!(PhiZero::new(0).is_err());
        assert!(PhiZero::new(5).is_err());
        assert!(entropy_phi0(3).is_err());
    }

    #[test]
    fn n2_is_uniform_on_four_strings() {
        let d = PhiZero::new(2).unwrap();
        for x in all_vectors(2) {
            assert!((d.probability(&x) - 0.25).abs() < 1e-15);
        }
        let mut rng = seeded(11);
        let mut counts = [0usize; 4];
        let trials = 40_000;
        for _ in 0..trials {
            let x = d.sample(&mut rng);
            counts[x.get(0) as usize + 2 * x.get(1) as usize] += 1;
        }
        let sd = (trials as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 / 4.0).abs() < 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn n4_all_ones_has_probability_one_ninth() {
        let d = PhiZero::new(4).unwrap();
        let total: f64 = all_vectors(4).map(|x| d.probability(&x)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((d.probability(&BitVector::ones(4)) - 1.0 / 9.0).abs() < 1e-15);
        let mut rng = seeded(5);
        let trials = 90_000;
        let hits = (0..trials)
            .filter(|_| d.sample(&mut rng).weight() == 4)
            .count();
        let p = 1.0 / 9.0;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - trials as f64 * p).abs() < 4.0 * sd);
    }

    #[test]
    fn analytic_matrix_pattern_and_contrast() {
        let m = PhiZero::new(8).unwrap().quadratic_matrix();
        assert!(m.is_symmetric());
        assert_eq!(m.get(2, 2), 0.5);
        assert_eq!(m.get(0, 3), 1.0 / 3.0);
        assert_eq!(m.get(5, 7), 1.0 / 3.0);
        assert_eq!(m.get(1, 6), 0.25);
        assert!((m.block_contrast() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn contrast_of_constant_and_custom_matrices() {
        let n = 4;
        let c = QuadMatrix::from_rows(n, vec![0.3; n * n]).unwrap();
        assert_eq!(c.block_contrast(), 0.0);
        let mut data = vec![0.0; n * n];
        for r in 0..n {
            for s in 0..n {
                data[r * n + s] = if r == s {
                    1.0
                } else if (r < 2) == (s < 2) {
                    0.5
                } else {
                    0.25
                };
            }
        }
        let q = QuadMatrix::from_rows(n, data).unwrap();
        assert!((q.block_contrast() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn entropy_small_cases_match_enumeration() {
        for n in [2usize, 4, 6, 8] {
            let d = PhiZero::new(n).unwrap();
            let brute: f64 = all_vectors(n)
                .map(|x| d.probability(&x))
                .filter(|&p| p > 0.0)
                .map(|p| -p * p.ln())
                .sum();
            let exact = entropy_phi0(n).unwrap();
            assert!((brute - exact).abs() < 1e-12, "n={n}: {brute} vs {exact}");
        }
        let ln = f64::ln;
        assert!((entropy_phi0(2).unwrap() - 2.0 * ln(2.0)).abs() < 1e-14);
        assert!((entropy_phi0(4).unwrap() - (2.0 * ln(3.0) + 2.0 / 3.0 * ln(2.0))).abs() < 1e-14);
    }

    #[test]
    fn exact_and_lgamma_paths_agree() {
        for m in [50usize, 300, 500] {
            let a = sum_ln_binomials_exact(m);
            let b = sum_ln_binomials_lgamma(m);
            assert!(((a - b) / a).abs() < 1e-9, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn identity_small_values() {
        let (l, r) = binomial_log_sum_identity(1);
        assert!(l.abs() < 1e-15 && r.abs() < 1e-12);
        let (l, r) = binomial_log_sum_identity(3);
        assert!((l - 2.0 * 3f64.ln()).abs() < 1e-14);
        assert!((l - r).abs() < 1e-12);
    }

    #[test]
    fn tidying_permutation_is_identity() {
        let p = tidying_permutation_phi0(4).unwrap();
        assert_eq!(p.as_map(), vec![0, 1, 2, 3]);
        assert_eq!(p.inverse(), p);
    }
}
