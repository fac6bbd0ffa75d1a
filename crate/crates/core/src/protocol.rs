//! Single-instance protocol mechanics: degradation, dispersion, publication,
//! synchronization, the `V` scalar products and the sampling quantizer.

use rand::Rng;

use crate::bits::{BitVector, Permutation};
use crate::distributions::PhiZero;
use crate::error::{Error, Result};

/// Quantizer and degradation parameters of one instance.
///
/// `beta` is the bucket width in `V` units; the dimensionless `K` of the
/// protocol maps to `beta = K / (2√(nk))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub n: usize,
    pub k: f64,
    pub beta: f64,
    pub rho: f64,
}

impl SamplingParams {
    pub fn new(n: usize, k: f64, k_cfg: f64, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n must be positive"));
        }
        if !(k > 1.0) {
            return Err(Error::param(format!("degradation k must exceed 1, got {k}")));
        }
        if !(k_cfg > 0.0) {
            return Err(Error::param(format!("K must be positive, got {k_cfg}")));
        }
        let beta = Self::beta_for(n, k, k_cfg);
        Self::with_beta(n, k, beta, rho)
    }

    pub fn with_beta(n: usize, k: f64, beta: f64, rho: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::param(format!("beta must be positive, got {beta}")));
        }
        if !(0.0..2.0 * beta).contains(&rho) {
            return Err(Error::param(format!("rho {rho} outside [0, 2·beta)")));
        }
        Ok(Self { n, k, beta, rho })
    }

    pub fn beta_for(n: usize, k: f64, k_cfg: f64) -> f64 {
        k_cfg / (2.0 * (n as f64 * k).sqrt())
    }

    /// Same parameters with `rho` redrawn uniformly from `[0, 2·beta)`.
    pub fn with_random_rho<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        Self {
            rho: rng.random::<f64>() * 2.0 * self.beta,
            ..*self
        }
    }
}

/// Replaces each coordinate by a Bernoulli draw of probability `x_s / k`.
pub fn degrade<R: Rng + ?Sized>(x: &BitVector, k: f64, rng: &mut R) -> Result<BitVector> {
    if !(k >= 1.0) {
        return Err(Error::param(format!("degradation k must be ≥ 1, got {k}")));
    }
    let p = 1.0 / k;
    let mut out = BitVector::zeros(x.len());
    for s in x.ones_indices() {
        if rng.random::<f64>() < p {
            out.set(s, true);
        }
    }
    Ok(out)
}

/// Permutation maximizing `P(i | σ(x′))` for real-valued `x′ ∈ [0,1]^n`.
///
/// The likelihood factors per coordinate, increasing in `x′` where `i = 1`
/// and decreasing where `i = 0`, so it is maximized by giving the largest
/// `x′` values to the positions of the ones of `i`. Ties go to the lowest
/// index, and positions are filled in ascending order.
pub fn dispersion_permutation_real(i: &BitVector, x_prime: &[f64]) -> Permutation {
    assert_eq!(i.len(), x_prime.len(), "length mismatch");
    let mut order: Vec<usize> = (0..x_prime.len()).collect();
    order.sort_by(|&a, &b| x_prime[b].total_cmp(&x_prime[a]).then(a.cmp(&b)));
    let ones = i.ones_indices();
    let mut map = vec![0usize; i.len()];
    let mut slots = order.into_iter();
    for &s in &ones {
        map[s] = slots.next().expect("enough slots");
    }
    for s in (0..i.len()).filter(|&s| !i.get(s)) {
        map[s] = slots.next().expect("enough slots");
    }
    Permutation::from_map(map).expect("sort-and-assign yields a bijection")
}

pub fn dispersion_permutation(i: &BitVector, x_prime: &BitVector) -> Permutation {
    let xp: Vec<f64> = x_prime.iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    dispersion_permutation_real(i, &xp)
}

/// Publication order: `b = 0` keeps `(σ_d, σ_Φ)`, `b = 1` swaps.
pub fn publish_pair(
    sigma_d: Permutation,
    sigma_phi: Permutation,
    b: bool,
) -> (Permutation, Permutation) {
    if b {
        (sigma_phi, sigma_d)
    } else {
        (sigma_d, sigma_phi)
    }
}

/// `σ_own⁻¹(x) · σ_chosen⁻¹(other) / n`.
pub fn compute_v(
    own: &BitVector,
    sigma_own: &Permutation,
    sigma_chosen: &Permutation,
    other_published: &BitVector,
) -> f64 {
    let n = own.len();
    assert_eq!(n, other_published.len());
    sigma_own
        .pullback(own)
        .dot(&sigma_chosen.pullback(other_published)) as f64
        / n as f64
}

/// `⌊(v − ρ)/β⌋ mod 2` with mathematical floor and nonnegative remainder.
#[inline]
pub fn quantize(v: f64, beta: f64, rho: f64) -> u8 {
    let bucket = ((v - rho) / beta).floor() as i64;
    bucket.rem_euclid(2) as u8
}

pub fn sample_bit(v: f64, params: &SamplingParams) -> u8 {
    quantize(v, params.beta, params.rho)
}

/// Private state of one partner for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerPrivate {
    pub x: BitVector,
    pub sigma_phi: Permutation,
    pub sigma_d: Permutation,
    pub b: bool,
}

/// Everything one partner draws and publishes in one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerInstance {
    pub private: PartnerPrivate,
    /// The degraded vector (`i` for A, `j` for B).
    pub published: BitVector,
    pub pair: (Permutation, Permutation),
}

impl PartnerInstance {
    /// Steps 1–3 for one partner. The decoy source `x′` is drawn from Φ₀.
    pub fn generate<R: Rng + ?Sized>(dist: &PhiZero, k: f64, rng: &mut R) -> Result<Self> {
        let x = dist.sample(rng);
        let published = degrade(&x, k, rng)?;
        let x_prime = dist.sample(rng);
        let sigma_d = dispersion_permutation(&published, &x_prime);
        let sigma_phi = dist.tidying_permutation();
        let b = rng.random::<bool>();
        let pair = publish_pair(sigma_d.clone(), sigma_phi.clone(), b);
        Ok(Self {
            private: PartnerPrivate {
                x,
                sigma_phi,
                sigma_d,
                b,
            },
            published,
            pair,
        })
    }

    pub fn n(&self) -> usize {
        self.published.len()
    }

    /// Which element of the published pair is the tidying permutation.
    pub fn tidying_index(&self) -> usize {
        usize::from(!self.private.b)
    }

    pub fn pair_at(&self, c: usize) -> &Permutation {
        match c {
            0 => &self.pair.0,
            _ => &self.pair.1,
        }
    }

    /// `σ_Φ⁻¹(x)`.
    pub fn private_vector(&self) -> BitVector {
        self.private.sigma_phi.pullback(&self.private.x)
    }

    /// The published vector pulled back by each element of the pair.
    pub fn pulled_rows(&self) -> [BitVector; 2] {
        [
            self.pair.0.pullback(&self.published),
            self.pair.1.pullback(&self.published),
        ]
    }

    pub fn half_sets(&self) -> [BitVector; 2] {
        [self.pair.0.half_set(), self.pair.1.half_set()]
    }
}

/// Public transcript of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRecord {
    pub i: BitVector,
    pub j: BitVector,
    pub mu1_half: BitVector,
    pub mu2_half: BitVector,
    pub mu1p_half: BitVector,
    pub mu2p_half: BitVector,
    /// Published quantizer width (the adapted `K`, in `V` units).
    pub beta: f64,
    /// Published translation.
    pub rho: f64,
    pub checksum: u32,
}

impl InstanceRecord {
    pub fn new(a: &PartnerInstance, b: &PartnerInstance, beta: f64, rho: f64) -> Self {
        let [mu1_half, mu2_half] = a.half_sets();
        let [mu1p_half, mu2p_half] = b.half_sets();
        let mut rec = Self {
            i: a.published.clone(),
            j: b.published.clone(),
            mu1_half,
            mu2_half,
            mu1p_half,
            mu2p_half,
            beta,
            rho,
            checksum: 0,
        };
        rec.seal();
        rec
    }

    pub fn n(&self) -> usize {
        self.i.len()
    }

    pub fn vectors(&self) -> [&BitVector; 6] {
        [
            &self.i,
            &self.j,
            &self.mu1_half,
            &self.mu2_half,
            &self.mu1p_half,
            &self.mu2p_half,
        ]
    }

    /// Protocol payload: `i`, `j` and four `n`-bit half-sets.
    pub fn payload_bits(&self) -> usize {
        6 * self.n()
    }

    fn body_bytes(&self) -> Vec<u8> {
        let n = self.n();
        let mut out = Vec::with_capacity(4 + 6 * n.div_ceil(8) + 16);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        for v in self.vectors() {
            out.extend_from_slice(&v.to_packed_bytes());
        }
        out.extend_from_slice(&self.beta.to_le_bytes());
        out.extend_from_slice(&self.rho.to_le_bytes());
        out
    }

    pub fn compute_checksum(&self) -> u32 {
        crc32fast::hash(&self.body_bytes())
    }

    /// Recomputes the checksum after a field changed.
    pub fn seal(&mut self) {
        self.checksum = self.compute_checksum();
    }

    pub fn checksum_ok(&self) -> bool {
        self.checksum == self.compute_checksum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.body_bytes();
        out.extend_from_slice(&self.checksum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| Error::Transmission(m.to_string());
        if bytes.len() < 4 {
            return Err(err("record shorter than its header"));
        }
        let n = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        let vb = n.div_ceil(8);
        let expected = 4 + 6 * vb + 16 + 4;
        if bytes.len() != expected {
            return Err(Error::Transmission(format!(
                "record length {} does not match n = {n} (expected {expected})",
                bytes.len()
            )));
        }
        let body_len = expected - 4;
        let stored = u32::from_le_bytes(bytes[body_len..].try_into().unwrap());
        let actual = crc32fast::hash(&bytes[..body_len]);
        if stored != actual {
            return Err(Error::Transmission(format!(
                "checksum mismatch: stored {stored:#010x}, computed {actual:#010x}"
            )));
        }
        let mut vecs = Vec::with_capacity(6);
        let mut off = 4;
        for _ in 0..6 {
            vecs.push(BitVector::from_packed_bytes(n, &bytes[off..off + vb])?);
            off += vb;
        }
        let beta = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let rho = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        let mut it = vecs.into_iter();
        let mut next = || it.next().unwrap();
        Ok(Self {
            i: next(),
            j: next(),
            mu1_half: next(),
            mu2_half: next(),
            mu1p_half: next(),
            mu2p_half: next(),
            beta,
            rho,
            checksum: stored,
        })
    }

    /// Every published half-set must hold exactly `n/2` ones.
    pub fn half_sets_valid(&self) -> bool {
        let half = self.n() / 2;
        [&self.mu1_half, &self.mu2_half, &self.mu1p_half, &self.mu2p_half]
            .iter()
            .all(|h| h.weight() == half)
    }
}

/// Result of one full instance.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub record: InstanceRecord,
    pub partner_a: PartnerInstance,
    pub partner_b: PartnerInstance,
    pub v_a: f64,
    pub v_b: f64,
    pub e_a: u8,
    pub e_b: u8,
    /// A synchronized on B's tidying permutation.
    pub a_chose_tidying: bool,
    /// B synchronized on A's tidying permutation.
    pub b_chose_tidying: bool,
}

impl InstanceOutcome {
    pub fn favorable(&self) -> bool {
        self.a_chose_tidying && self.b_chose_tidying
    }
}

/// Steps 1–5 for one instance. `params.rho` is ignored; a fresh translation
/// is drawn.
pub fn run_instance<R: Rng + ?Sized>(
    dist: &PhiZero,
    params: &SamplingParams,
    rng: &mut R,
) -> Result<InstanceOutcome> {
    if dist.n() != params.n {
        return Err(Error::param("distribution and parameter lengths differ"));
    }
    let partner_a = PartnerInstance::generate(dist, params.k, rng)?;
    let partner_b = PartnerInstance::generate(dist, params.k, rng)?;
    let choice_a = usize::from(rng.random::<bool>());
    let choice_b = usize::from(rng.random::<bool>());
    let params = params.with_random_rho(rng);

    let v_a = compute_v(
        &partner_a.private.x,
        &partner_a.private.sigma_phi,
        partner_b.pair_at(choice_a),
        &partner_b.published,
    );
    let v_b = compute_v(
        &partner_b.private.x,
        &partner_b.private.sigma_phi,
        partner_a.pair_at(choice_b),
        &partner_a.published,
    );
    let record = InstanceRecord::new(&partner_a, &partner_b, params.beta, params.rho);
    Ok(InstanceOutcome {
        e_a: sample_bit(v_a, &params),
        e_b: sample_bit(v_b, &params),
        a_chose_tidying: choice_a == partner_b.tidying_index(),
        b_chose_tidying: choice_b == partner_a.tidying_index(),
        record,
        partner_a,
        partner_b,
        v_a,
        v_b,
    })
}
