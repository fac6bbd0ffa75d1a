//! Numerical checks of the random-matrix and tiling results the protocol
//! relies on: second moment of the determinant of a Bernoulli matrix,
//! checkerboard-coloring entropy, the entropy-conservation factor, and the
//! `verify` suite that bundles them with the Φ₀ checks.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::bits::BitVector;
use crate::distributions::{binomial_log_sum_identity, entropy_phi0, PhiZero, QuadMatrix};
use crate::error::{Error, Result};
use crate::rng::{seeded, stream, Purpose};

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(rows: &[Vec<i64>]) -> i128 {
    let n = rows.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), n, "matrix must be square");
            r.iter().map(|&v| i128::from(v)).collect()
        })
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `E[det²] = n! θⁿ (1−θ)ⁿ⁻¹ (nθ − θ + 1)` for iid Bernoulli(θ) entries.
pub fn det_sq_closed_form(n: usize, theta: f64) -> f64 {
    assert!(n >= 1, "n must be positive");
    if theta <= 0.0 {
        return 0.0;
    }
    let tail = n as f64 * theta - theta + 1.0;
    if n <= 20 {
        let fact: u64 = (1..=n as u64).product();
        fact as f64 * theta.powi(n as i32) * (1.0 - theta).powi(n as i32 - 1) * tail
    } else {
        ln_det_sq_closed_form(n, theta).exp()
    }
}

pub fn ln_det_sq_closed_form(n: usize, theta: f64) -> f64 {
    ln_factorial(n)
        + n as f64 * theta.ln()
        + (n as f64 - 1.0) * (1.0 - theta).ln()
        + (n as f64 * theta - theta + 1.0).ln()
}

fn matrix_from_mask(n: usize, mask: u32) -> Vec<Vec<i64>> {
    (0..n)
        .map(|r| (0..n).map(|c| i64::from((mask >> (r * n + c)) & 1 == 1)).collect())
        .collect()
}

/// For each number of ones `c`, the sum of `det²` over all `n × n` 0/1
/// matrices with `c` ones.
fn det_sq_by_weight(n: usize) -> Result<Vec<u128>> {
    if n > 4 {
        return Err(Error::param(format!("exhaustive enumeration refused for n = {n} > 4")));
    }
    let cells = n * n;
    let mut by_weight = vec![0u128; cells + 1];
    for mask in 0u32..(1u32 << cells) {
        let d = determinant(&matrix_from_mask(n, mask));
        by_weight[mask.count_ones() as usize] += (d * d) as u128;
    }
    Ok(by_weight)
}

/// `Σ det²·θ^{ones}(1−θ)^{zeros}` over every 0/1 matrix of order `n ≤ 4`.
pub fn det_sq_exhaustive(n: usize, theta: f64) -> Result<f64> {
    let by_weight = det_sq_by_weight(n)?;
    let cells = (n * n) as i32;
    Ok(by_weight
        .iter()
        .enumerate()
        .map(|(c, &s)| s as f64 * theta.powi(c as i32) * (1.0 - theta).powi(cells - c as i32))
        .sum())
}

/// Exact singular fraction of fair 0/1 matrices of order `n ≤ 4`.
pub fn singular_fraction_exhaustive(n: usize) -> Result<f64> {
    if n > 4 {
        return Err(Error::param(format!("exhaustive enumeration refused for n = {n} > 4")));
    }
    let cells = n * n;
    let singular = (0u32..(1u32 << cells))
        .filter(|&mask| determinant(&matrix_from_mask(n, mask)) == 0)
        .count();
    Ok(singular as f64 / (1u64 << cells) as f64)
}

const MC_SHARD: usize = 10_000;

/// Monte-Carlo mean of `det²` with its standard error. Shards draw from
/// independent streams and are reduced in order.
pub fn det_sq_mc(n: usize, theta: f64, trials: usize, seed: u64) -> (f64, f64) {
    let shards = trials.div_ceil(MC_SHARD);
    let partial: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, s as u64, 0, Purpose::Statcheck);
            let count = MC_SHARD.min(trials - s * MC_SHARD);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut mat = vec![vec![0i64; n]; n];
            for _ in 0..count {
                for row in mat.iter_mut() {
                    for v in row.iter_mut() {
                        *v = i64::from(rng.random::<f64>() < theta);
                    }
                }
                let d = determinant(&mat) as f64;
                sum += d * d;
                sum_sq += d * d * d * d;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let t = trials as f64;
    let mean = sum / t;
    let var = (sum_sq / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
    (mean, (var / t).sqrt())
}

/// Linear system, tile width and translations of a checkerboard coloring.
#[derive(Debug, Clone, PartialEq)]
pub struct TilingSpec {
    pub lambda: Vec<Vec<i64>>,
    pub delta: f64,
    pub rho: Vec<f64>,
    /// Side of the parallelepiped `{x : 0 ≤ λ(r)·x ≤ p}`.
    pub p: f64,
}

impl TilingSpec {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || self.lambda.iter().any(|r| r.len() != n) || self.rho.len() != n {
            return Err(Error::param("tiling dimensions disagree"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param("tile width must be positive"));
        }
        if determinant(&self.lambda) == 0 {
            return Err(Error::param("linear system is singular"));
        }
        Ok(())
    }

    /// Random nonsingular system of `n` rows, each with exactly `weight`
    /// ones, `ρ = 0`, `p = weight`.
    pub fn random_regular<R: Rng + ?Sized>(n: usize, weight: usize, delta: f64, rng: &mut R) -> Result<Self> {
        if weight == 0 || weight > n {
            return Err(Error::param("row weight must lie in 1..=n"));
        }
        for _ in 0..10_000 {
            let lambda: Vec<Vec<i64>> = (0..n)
                .map(|_| {
                    let picks = rand::seq::index::sample(rng, n, weight);
                    let mut row = vec![0i64; n];
                    for c in picks {
                        row[c] = 1;
                    }
                    row
                })
                .collect();
            if determinant(&lambda) != 0 {
                return Ok(Self {
                    lambda,
                    delta,
                    rho: vec![0.0; n],
                    p: weight as f64,
                });
            }
        }
        Err(Error::param("could not draw a nonsingular system"))
    }
}

/// `e_r(x) = ⌊(λ(r)·x − nρ_r)/δ⌋ mod 2`.
pub fn checkerboard_bits(x: &[f64], spec: &TilingSpec) -> Result<BitVector> {
    spec.validate()?;
    if x.len() != spec.n() {
        return Err(Error::param("point dimension differs from the system"));
    }
    Ok(checkerboard_unchecked(x, spec))
}

fn checkerboard_unchecked(x: &[f64], spec: &TilingSpec) -> BitVector {
    let n = spec.n() as f64;
    BitVector::from_bools(spec.lambda.iter().zip(&spec.rho).map(|(row, &rho)| {
        let dot: f64 = row.iter().zip(x).map(|(&l, &v)| l as f64 * v).sum();
        let bucket = ((dot - n * rho) / spec.delta).floor() as i64;
        bucket.rem_euclid(2) == 1
    }))
}

/// Solves `L x = u` by partial-pivot elimination.
fn solve(lambda: &[Vec<i64>], u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut a: Vec<Vec<f64>> = lambda
        .iter()
        .zip(u)
        .map(|(row, &b)| row.iter().map(|&v| v as f64).chain(std::iter::once(b)).collect())
        .collect();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..=n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (a[k][n] - s) / a[k][k];
    }
    x
}

/// Plug-in entropy in bits of a sample of small integer codes.
pub fn plugin_entropy_bits(codes: impl IntoIterator<Item = u32>) -> f64 {
    let mut counts: HashMap<u32, u64> = HashMap::new();
    let mut total = 0u64;
    for c in codes {
        *counts.entry(c).or_default() += 1;
        total += 1;
    }
    let t = total as f64;
    counts
        .values()
        .map(|&c| {
            let q = c as f64 / t;
            -q * q.log2()
        })
        .sum()
}

fn subset_code(bits: &BitVector, subset: &[usize]) -> u32 {
    subset
        .iter()
        .enumerate()
        .fold(0u32, |acc, (pos, &r)| acc | (u32::from(bits.get(r)) << pos))
}

/// Samples `x` uniformly over the parallelepiped (as `L⁻¹u`, `u` uniform in
/// `[0,p]ⁿ`) and estimates the joint entropy of the coloring bits in
/// `subset` (at most 12 of them).
pub fn checkerboard_subset_entropy(spec: &TilingSpec, subset: &[usize], samples: usize, seed: u64) -> Result<f64> {
    spec.validate()?;
    if subset.is_empty() || subset.len() > 12 || subset.iter().any(|&r| r >= spec.n()) {
        return Err(Error::param("subset must hold 1..=12 valid row indices"));
    }
    let n = spec.n();
    let shards = samples.div_ceil(MC_SHARD);
    let codes: Vec<u32> = (0..shards)
        .into_par_iter()
        .flat_map_iter(|s| {
            let mut rng = stream(seed, s as u64, 1, Purpose::Statcheck);
            let count = MC_SHARD.min(samples - s * MC_SHARD);
            (0..count)
                .map(|_| {
                    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * spec.p).collect();
                    let x = solve(&spec.lambda, &u);
                    subset_code(&checkerboard_unchecked(&x, spec), subset)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(plugin_entropy_bits(codes))
}

/// Entropy of all coloring bits of a two-dimensional system, integrating
/// over a midpoint grid of `grid × grid` cells of the parallelepiped.
pub fn checkerboard_grid_entropy(spec: &TilingSpec, grid: usize) -> Result<f64> {
    spec.validate()?;
    if spec.n() != 2 {
        return Err(Error::param("grid integration implemented for n = 2"));
    }
    let h = spec.p / grid as f64;
    let codes = (0..grid).flat_map(|a| (0..grid).map(move |b| (a, b))).map(|(a, b)| {
        let u = [(a as f64 + 0.5) * h, (b as f64 + 0.5) * h];
        let x = solve(&spec.lambda, &u);
        subset_code(&checkerboard_unchecked(&x, spec), &[0, 1])
    });
    Ok(plugin_entropy_bits(codes))
}

/// Log of `δⁿ √(n! θⁿ (1−θ)ⁿ⁻¹ (nθ − θ + 1))`.
pub fn volume_log_factor(n: usize, theta: f64, delta: f64) -> f64 {
    n as f64 * delta.ln() + 0.5 * ln_det_sq_closed_form(n, theta)
}

pub fn volume_factor(n: usize, theta: f64, delta: f64) -> f64 {
    volume_log_factor(n, theta, delta).exp()
}

/// The factor under the protocol's own parameters: `δ = K√n/√k` and
/// `θ = E|x|/(nk) = 1/(2k)` for Φ₀.
pub fn protocol_volume_log_factor(n: usize, k: f64, k_cfg: f64) -> f64 {
    let delta = k_cfg * (n as f64).sqrt() / k.sqrt();
    volume_log_factor(n, 1.0 / (2.0 * k), delta)
}

/// One row of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, expected: impl ToString, observed: impl ToString, tolerance: &str, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            tolerance: tolerance.to_string(),
            passed,
        }
    }
}

/// Runs every check. `quick` shrinks Monte-Carlo sizes for smoke runs.
pub fn verify_suite(quick: bool, seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for n in 1..=4 {
        for theta in [0.25, 0.5, 0.75] {
            let diff = (det_sq_closed_form(n, theta) - det_sq_exhaustive(n, theta).unwrap()).abs();
            worst = worst.max(diff);
        }
    }
    out.push(CheckResult::new(
        "det_sq closed form vs exhaustive (n<=4)",
        0,
        format!("{worst:.3e}"),
        "1e-12",
        worst <= 1e-12,
    ));
    let spot = det_sq_exhaustive(2, 0.5).unwrap();
    out.push(CheckResult::new("det_sq n=2 theta=0.5", 0.375, spot, "1e-12", (spot - 0.375).abs() < 1e-12));

    let trials = if quick { 50_000 } else { 1_000_000 };
    let (est, se) = det_sq_mc(10, 0.5, trials, seed);
    let exact = det_sq_closed_form(10, 0.5);
    out.push(CheckResult::new(
        "det_sq Monte-Carlo n=10 theta=0.5",
        format!("{exact:.4}"),
        format!("{est:.4} (se {se:.4})"),
        "3 se",
        (est - exact).abs() <= 3.0 * se,
    ));

    let sf = singular_fraction_exhaustive(2).unwrap();
    out.push(CheckResult::new("singular fraction n=2", 0.625, sf, "exact", sf == 0.625));

    let n = 8;
    let dist = PhiZero::new(n).unwrap();
    let analytic = dist.quadratic_matrix();
    let samples = if quick { 20_000 } else { 100_000 };
    let mut rng = stream(seed, 0, 2, Purpose::Statcheck);
    let draws: Vec<BitVector> = (0..samples).map(|_| dist.sample(&mut rng)).collect();
    let est = QuadMatrix::estimate(n, &draws);
    let mut worst_z = 0.0f64;
    for r in 0..n {
        for s in 0..n {
            let m = analytic.get(r, s);
            let sd = (m * (1.0 - m) / samples as f64).sqrt();
            worst_z = worst_z.max((est.get(r, s) - m).abs() / sd);
        }
    }
    out.push(CheckResult::new(
        "Phi0 second moments",
        "1/2, 1/3, 1/4",
        format!("max |z| = {worst_z:.2}"),
        "4 sigma",
        worst_z <= 4.0,
    ));
    let contrast = analytic.block_contrast();
    out.push(CheckResult::new(
        "Phi0 block contrast",
        "1/12",
        format!("{contrast:.12}"),
        "1e-12",
        (contrast - 1.0 / 12.0).abs() < 1e-12,
    ));

    let worst_rel = (1..=500)
        .map(|m| {
            let (l, r) = binomial_log_sum_identity(m);
            if l == 0.0 && r.abs() < 1e-12 {
                0.0
            } else {
                ((l - r) / l.abs().max(1e-300)).abs()
            }
        })
        .fold(0.0f64, f64::max);
    out.push(CheckResult::new(
        "binomial log-sum identity m<=500",
        0,
        format!("{worst_rel:.3e}"),
        "1e-9 rel",
        worst_rel <= 1e-9,
    ));
    let slope = (entropy_phi0(2000).unwrap() - entropy_phi0(200).unwrap()) / 1800.0;
    out.push(CheckResult::new(
        "Phi0 entropy slope n in [200,2000]",
        "[0.45, 0.55]",
        format!("{slope:.4}"),
        "range",
        (0.45..=0.55).contains(&slope),
    ));

    let samples = if quick { 100_000 } else { 1_000_000 };
    let mut rng = seeded(seed ^ 0xa11);
    let subset: Vec<usize> = (0..8).collect();
    let compliant = TilingSpec::random_regular(12, 8, 2.0, &mut rng).unwrap();
    let h = checkerboard_subset_entropy(&compliant, &subset, samples, seed).unwrap();
    out.push(CheckResult::new(
        "checkerboard entropy, p/delta even",
        ">= 7.9 bits",
        format!("{h:.4}"),
        "lower bound",
        h >= 7.9,
    ));
    let odd = TilingSpec::random_regular(12, 6, 2.0, &mut rng).unwrap();
    let h_odd = checkerboard_subset_entropy(&odd, &subset, samples, seed).unwrap();
    out.push(CheckResult::new(
        "checkerboard entropy, p/delta odd",
        "< 7.9 bits",
        format!("{h_odd:.4}"),
        "below compliant",
        h_odd < 7.9 && h_odd < h,
    ));

    let lf = protocol_volume_log_factor(10_000, 12.0, 12.0);
    out.push(CheckResult::new(
        "entropy conservation log-factor n=1e4",
        "> 0",
        format!("{lf:.1}"),
        "sign",
        lf > 0.0,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_det(m: &[Vec<i64>]) -> i128 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m[0][0] as i128;
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] as i128 * naive_det(&minor)
            })
            .sum()
    }

    #[test]
    fn closed_form_spot_values() {
        assert!((det_sq_closed_form(1, 0.3) - 0.3).abs() < 1e-15);
        assert!((det_sq_closed_form(2, 0.5) - 0.375).abs() < 1e-15);
        assert!((det_sq_closed_form(3, 0.5) - 0.375).abs() < 1e-15);
        let big = det_sq_closed_form(30, 0.4);
        assert!((big.ln() - ln_det_sq_closed_form(30, 0.4)).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_matches_closed_form() {
        for n in 1..=4 {
            for theta in [0.25, 0.5, 0.75] {
                let a = det_sq_closed_form(n, theta);
                let b = det_sq_exhaustive(n, theta).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n} θ={theta}: {a} vs {b}");
            }
        }
        assert_eq!(det_sq_exhaustive(3, 0.0).unwrap(), 0.0);
        assert_eq!(det_sq_exhaustive(2, 1.0).unwrap(), 0.0);
        assert!(det_sq_exhaustive(5, 0.5).is_err());
        // n = 2, fair: six matrices with |det| = 1.
        assert_eq!(det_sq_by_weight(2).unwrap().iter().sum::<u128>(), 6);
    }

    #[test]
    fn singular_fraction_small_orders() {
        assert_eq!(singular_fraction_exhaustive(2).unwrap(), 0.625);
        let f3 = singular_fraction_exhaustive(3).unwrap();
        assert!((f3 - 338.0 / 512.0).abs() < 1e-15);
    }

    #[test]
    fn mc_small_cases() {
        let (est, se) = det_sq_mc(1, 0.3, 20_000, 1);
        assert!((est - 0.3).abs() < 4.0 * se);
        let (est, se) = det_sq_mc(5, 0.5, 40_000, 2);
        assert!((est - det_sq_closed_form(5, 0.5)).abs() < 4.0 * se);
        let (_, se_small) = det_sq_mc(4, 0.5, 10_000, 3);
        let (_, se_large) = det_sq_mc(4, 0.5, 40_000, 3);
        let ratio = se_small / se_large;
        assert!((1.6..2.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn checkerboard_examples() {
        let spec = TilingSpec {
            lambda: vec![vec![1, 0], vec![0, 1]],
            delta: 1.0,
            rho: vec![0.0, 0.0],
            p: 2.0,
        };
        assert_eq!(checkerboard_bits(&[0.0, 0.0], &spec).unwrap().to_bits(), vec![0, 0]);
        assert_eq!(checkerboard_bits(&[1.5, 2.2], &spec).unwrap().to_bits(), vec![1, 0]);
        assert_eq!(checkerboard_bits(&[-0.5, 3.0], &spec).unwrap().to_bits(), vec![1, 1]);

        let skew = TilingSpec {
            lambda: vec![vec![1, 1], vec![0, 1]],
            delta: 0.5,
            rho: vec![0.0, 0.0],
            p: 2.0,
        };
        // Moving by δ·L⁻¹e₀ flips bit 0 only.
        let x = [0.1, 0.2];
        let step = solve(&skew.lambda, &[0.5, 0.0]);
        let moved = [x[0] + step[0], x[1] + step[1]];
        let a = checkerboard_bits(&x, &skew).unwrap();
        let b = checkerboard_bits(&moved, &skew).unwrap();
        assert_ne!(a.get(0), b.get(0));
        assert_eq!(a.get(1), b.get(1));

        let singular = TilingSpec { lambda: vec![vec![1, 1], vec![1, 1]], ..spec };
        assert!(checkerboard_bits(&[0.0, 0.0], &singular).is_err());
    }

    #[test]
    fn grid_entropy_two_dimensions() {
        let spec = TilingSpec {
            lambda: vec![vec![1, 1], vec![0, 1]],
            delta: 1.0,
            rho: vec![0.0, 0.0],
            p: 2.0,
        };
        let h = checkerboard_grid_entropy(&spec, 400).unwrap();
        assert!((h - 2.0).abs() < 0.01, "{h}");
    }

    #[test]
    fn subset_entropy_positive_and_negative() {
        let mut rng = seeded(5);
        let subset: Vec<usize> = (0..6).collect();
        let good = TilingSpec::random_regular(10, 4, 2.0, &mut rng).unwrap();
        let h = checkerboard_subset_entropy(&good, &subset, 100_000, 7).unwrap();
        assert!(h > 5.98, "{h}");
        let bad = TilingSpec::random_regular(10, 6, 2.0, &mut rng).unwrap();
        let h_bad = checkerboard_subset_entropy(&bad, &subset, 100_000, 7).unwrap();
        assert!(h_bad < 5.7, "{h_bad}");
    }

    #[test]
    fn aii2_factor_properties() {
        assert!((volume_factor(1, 0.3, 1.0) - 0.3f64.sqrt()).abs() < 1e-12);
        assert!(protocol_volume_log_factor(10_000, 12.0, 12.0) > 0.0);
        let mut prev = f64::NEG_INFINITY;
        for d in [0.5, 1.0, 2.0, 4.0] {
            let v = volume_log_factor(20, 0.3, d);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn plugin_entropy_of_uniform_codes() {
        let h = plugin_entropy_bits(0..256u32);
        assert!((h - 8.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor_expansion(
            cells in proptest::collection::vec(-3i64..4, 25)
        ) {
            let m: Vec<Vec<i64>> = cells.chunks(5).map(|c| c.to_vec()).collect();
            prop_assert_eq!(determinant(&m), naive_det(&m));
            let m3: Vec<Vec<i64>> = m[..3].iter().map(|r| r[..3].to_vec()).collect();
            prop_assert_eq!(determinant(&m3), naive_det(&m3));
        }
    }
}
