//! Authenticated extension: verification codes over the public transcript,
//! shared-secret renewal, a one-time-pad message layer, the wallet, and
//! in-process attack scenarios.

pub mod scenarios;
pub mod wallet;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::protocol::InstanceRecord;

pub use wallet::Wallet;

const LCG_MUL: u64 = 6364136223846793005;
const LCG_INC: u64 = 1442695040888963407;
/// LCG outputs reserved per transcript index; 12 are used.
const LCG_WINDOW: u64 = 64;
/// Coefficients per transcript index: `(a, b)` for each of six elements.
pub const COEFFS_PER_INDEX: usize = 12;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime_above(x: u64) -> u64 {
    let mut p = x + 1;
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// State of the coefficient LCG after `steps` steps from `seed`, computed in
/// `O(log steps)`.
fn lcg_jump(seed: u64, mut steps: u64) -> u64 {
    let (mut acc_mul, mut acc_inc) = (1u64, 0u64);
    let (mut cur_mul, mut cur_inc) = (LCG_MUL, LCG_INC);
    while steps > 0 {
        if steps & 1 == 1 {
            acc_mul = acc_mul.wrapping_mul(cur_mul);
            acc_inc = acc_inc.wrapping_mul(cur_mul).wrapping_add(cur_inc);
        }
        cur_inc = cur_mul.wrapping_add(1).wrapping_mul(cur_inc);
        cur_mul = cur_mul.wrapping_mul(cur_mul);
        steps >>= 1;
    }
    acc_mul.wrapping_mul(seed).wrapping_add(acc_inc)
}

fn lcg_next(state: u64) -> u64 {
    state.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC)
}

/// Public, fixed parameters of the verification function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashParams {
    /// `H(s)`: total authentication secret size in bits.
    pub secret_bits: u32,
    pub p: u64,
    pub out_bits: u32,
    pub seed: u64,
}

impl HashParams {
    /// Each half of the secret has `H(s)/2` bits and each code as many.
    pub fn new(secret_bits: u32) -> Result<Self> {
        if secret_bits < 2 || secret_bits % 2 != 0 || secret_bits > 64 {
            return Err(Error::InvalidConfiguration(format!(
                "secret size must be even and in 2..=64 bits, got {secret_bits}"
            )));
        }
        let half = secret_bits / 2;
        Ok(Self {
            secret_bits,
            p: next_prime_above(1u64 << half),
            out_bits: half,
            seed: 0x5eed_0f_c0de,
        })
    }

    pub fn with_out_bits(mut self, out_bits: u32) -> Result<Self> {
        if out_bits == 0 || out_bits > 63 {
            return Err(Error::InvalidConfiguration("code width must lie in 1..=63".into()));
        }
        self.out_bits = out_bits;
        Ok(self)
    }

    pub fn half_bits(&self) -> usize {
        self.secret_bits as usize / 2
    }

    /// The twelve nonzero coefficients for transcript index `l`, ordered
    /// `(a, b)` for `i`, `j`, `μ₁`, `μ′₁`, `μ₂`, `μ′₂`.
    pub fn coefficients(&self, l: usize) -> [u64; COEFFS_PER_INDEX] {
        let mut state = lcg_jump(self.seed, l as u64 * LCG_WINDOW);
        let mut out = [1u64; COEFFS_PER_INDEX];
        let mut filled = 0;
        for _ in 0..LCG_WINDOW {
            state = lcg_next(state);
            let c = (state >> 16) % self.p;
            if c != 0 {
                out[filled] = c;
                filled += 1;
                if filled == COEFFS_PER_INDEX {
                    break;
                }
            }
        }
        out
    }
}

/// `((a·x + b) mod p) mod 2^out_bits`.
pub fn hash_block(x: &BigUint, a: u64, b: u64, p: u64, out_bits: u32) -> u64 {
    let xr = (x % p).to_u64().expect("residue fits");
    let v = ((a as u128 * xr as u128 + b as u128) % p as u128) as u64;
    v & ((1u64 << out_bits) - 1)
}

fn to_biguint(bits: impl Iterator<Item = bool>) -> BigUint {
    let mut bytes = Vec::new();
    let mut cur = 0u8;
    let mut k = 0;
    for b in bits {
        cur |= u8::from(b) << (k % 8);
        k += 1;
        if k % 8 == 0 {
            bytes.push(cur);
            cur = 0;
        }
    }
    if k % 8 != 0 {
        bytes.push(cur);
    }
    BigUint::from_bytes_le(&bytes)
}

/// `int(v) + int(s)·int(v̄)`, bit `r` carrying weight `2^r`; `s` is cut to
/// the length of `v`.
pub fn nonlinear_form(v: &BitVector, s: &BitVector) -> BigUint {
    let iv = to_biguint(v.iter());
    let is = to_biguint(s.iter().take(v.len()));
    if is.is_zero() {
        return iv;
    }
    iv + is * to_biguint(v.complement().iter())
}

/// `nonlinear_form(v, s) mod p`, avoiding big integers for short vectors.
fn form_residue(v: &BitVector, s: &BitVector, p: u64) -> u64 {
    if v.len() <= 63 {
        let mask = (1u64 << v.len()) - 1;
        let iv = v.words().first().copied().unwrap_or(0);
        let is = s.words().first().copied().unwrap_or(0) & mask;
        let x = iv as u128 + is as u128 * (!iv & mask) as u128;
        (x % p as u128) as u64
    } else {
        (nonlinear_form(v, s) % p).to_u64().expect("residue fits")
    }
}

/// The six XOR blocks one record contributes at transcript index `l`.
pub fn record_blocks(record: &InstanceRecord, l: usize, s: &BitVector, params: &HashParams) -> [u64; 6] {
    let c = params.coefficients(l);
    let elements = [
        &record.i,
        &record.j,
        &record.mu1_half,
        &record.mu1p_half,
        &record.mu2_half,
        &record.mu2p_half,
    ];
    let mask = (1u64 << params.out_bits) - 1;
    let p = params.p as u128;
    let mut out = [0u64; 6];
    for (f, v) in elements.iter().enumerate() {
        let x = form_residue(v, s, params.p) as u128;
        out[f] = ((c[2 * f] as u128 * x + c[2 * f + 1] as u128) % p) as u64 & mask;
    }
    out
}

fn record_code(record: &InstanceRecord, l: usize, s: &BitVector, params: &HashParams) -> u64 {
    record_blocks(record, l, s, params).iter().fold(0, |a, b| a ^ b)
}

/// XOR of every block over the whole transcript. Records with a bad
/// checksum abort the computation.
pub fn verification_code(s: &BitVector, transcript: &[InstanceRecord], params: &HashParams) -> Result<u64> {
    if transcript.is_empty() {
        return Err(Error::param("empty transcript"));
    }
    let mut code = 0u64;
    for (l, rec) in transcript.iter().enumerate() {
        if !rec.checksum_ok() {
            return Err(Error::Transmission(format!("record {l} fails its checksum")));
        }
        code ^= record_code(rec, l, s, params);
    }
    Ok(code)
}

/// Fixed-width big-endian encoding of a code.
pub fn code_to_bytes(code: u64, out_bits: u32) -> Vec<u8> {
    let width = (out_bits as usize).div_ceil(8);
    code.to_be_bytes()[8 - width..].to_vec()
}

pub fn code_from_bytes(bytes: &[u8]) -> Result<u64> {
    if bytes.is_empty() || bytes.len() > 8 {
        return Err(Error::Transmission("verification code width out of range".into()));
    }
    Ok(bytes.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
}

/// Verification code maintained incrementally: each record's contribution
/// is cached and can be removed or re-added without touching the others.
#[derive(Debug, Clone)]
pub struct CodeAccumulator {
    params: HashParams,
    s: BitVector,
    blocks: BTreeMap<usize, u64>,
    code: u64,
}

impl CodeAccumulator {
    pub fn new(s: BitVector, params: HashParams) -> Self {
        Self {
            params,
            s,
            blocks: BTreeMap::new(),
            code: 0,
        }
    }

    pub fn add(&mut self, l: usize, record: &InstanceRecord) -> Result<()> {
        if !record.checksum_ok() {
            return Err(Error::Transmission(format!("record {l} fails its checksum")));
        }
        if self.blocks.contains_key(&l) {
            return Err(Error::ContractViolation(format!("index {l} already accumulated")));
        }
        let c = record_code(record, l, &self.s, &self.params);
        self.blocks.insert(l, c);
        self.code ^= c;
        Ok(())
    }

    /// Drops index `l`; a later `add` with the same record restores it.
    pub fn remove(&mut self, l: usize) -> Option<u64> {
        let c = self.blocks.remove(&l)?;
        self.code ^= c;
        Some(c)
    }

    /// Re-adds a previously computed contribution without any arithmetic.
    pub fn reinsert(&mut self, l: usize, cached: u64) {
        if self.blocks.insert(l, cached).is_none() {
            self.code ^= cached;
        }
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Shared authentication secret with one partner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthSecret {
    pub partner_id: String,
    /// Half used for codes sent by A; absent for one-way entries.
    pub s_a: Option<BitVector>,
    pub s_b: BitVector,
    pub reuse_counter: u32,
    pub compromised: bool,
}

/// A half equal to 1 turns `v + s·v̄` into the constant `2^n − 1`, so the
/// code no longer depends on the transcript.
pub fn is_degenerate_half(s: &BitVector) -> bool {
    s.len() > 0 && s.get(0) && s.weight() == 1
}

/// A uniformly random non-degenerate secret half.
pub fn random_half<R: Rng + ?Sized>(half: usize, rng: &mut R) -> BitVector {
    loop {
        let s = BitVector::from_bools((0..half).map(|_| rng.random::<bool>()));
        if !is_degenerate_half(&s) {
            return s;
        }
    }
}

impl AuthSecret {
    /// Splits `2·half` bits into the two halves. Fails if either half is
    /// degenerate; the caller then needs fresh key material.
    pub fn from_bits(partner_id: &str, bits: &BitVector, half: usize) -> Result<Self> {
        if bits.len() < 2 * half {
            return Err(Error::InvalidConfiguration(format!(
                "need {} secret bits, got {}",
                2 * half,
                bits.len()
            )));
        }
        let take = |off: usize| BitVector::from_bools((off..off + half).map(|r| bits.get(r)));
        if is_degenerate_half(&take(0)) || is_degenerate_half(&take(half)) {
            return Err(Error::param("key material yields a degenerate secret half"));
        }
        Ok(Self {
            partner_id: partner_id.to_string(),
            s_a: Some(take(0)),
            s_b: take(half),
            reuse_counter: 0,
            compromised: false,
        })
    }

    pub fn random<R: Rng + ?Sized>(partner_id: &str, half: usize, rng: &mut R) -> Self {
        Self {
            partner_id: partner_id.to_string(),
            s_a: Some(random_half(half, rng)),
            s_b: random_half(half, rng),
            reuse_counter: 0,
            compromised: false,
        }
    }

    pub fn one_way(partner_id: &str, s_b: BitVector) -> Self {
        Self {
            partner_id: partner_id.to_string(),
            s_a: None,
            s_b,
            reuse_counter: 0,
            compromised: false,
        }
    }

    pub fn is_half_empty(&self) -> bool {
        self.s_a.is_none()
    }
}

/// Sizes fixed by the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthConfig {
    pub secret_bits: u32,
    pub message_bits: usize,
    pub reuse_limit: u32,
}

impl AuthConfig {
    pub fn required_session_bits(&self) -> usize {
        self.secret_bits as usize + self.message_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenewOutcome {
    /// Codes matched; the wallet now holds the renewed secret and `pad`
    /// is what is left of the session key for messages.
    Accepted { pad: BitVector },
    /// Codes differed; the old secret stays, with its reuse count raised.
    Rejected { reuse_counter: u32 },
    /// Codes differed and the reuse limit was reached.
    Compromised,
}

/// Compares a received code with the local one and, on success, replaces
/// the stored secret with the first `H(s)` bits of the session key.
pub fn verify_and_renew(
    session: &BitVector,
    wallet: &mut Wallet,
    partner_id: &str,
    received: u64,
    local: u64,
    config: &AuthConfig,
) -> Result<RenewOutcome> {
    if session.len() < config.required_session_bits() {
        return Err(Error::InvalidConfiguration(format!(
            "session key has {} bits, need at least {}",
            session.len(),
            config.required_session_bits()
        )));
    }
    let entry = wallet
        .get_mut(partner_id)
        .ok_or_else(|| Error::Wallet(format!("no entry for partner '{partner_id}'")))?;
    if entry.compromised {
        return Ok(RenewOutcome::Compromised);
    }
    if received != local {
        entry.reuse_counter += 1;
        if entry.reuse_counter >= config.reuse_limit {
            entry.compromised = true;
            return Ok(RenewOutcome::Compromised);
        }
        return Ok(RenewOutcome::Rejected {
            reuse_counter: entry.reuse_counter,
        });
    }
    let half = config.secret_bits as usize / 2;
    let mut renewed = AuthSecret::from_bits(partner_id, session, half)?;
    if entry.is_half_empty() {
        renewed.s_a = None;
    }
    *entry = renewed;
    let pad = BitVector::from_bools((config.secret_bits as usize..session.len()).map(|r| session.get(r)));
    Ok(RenewOutcome::Accepted { pad })
}

/// `message ⊕ pad[..|message|]`.
pub fn otp(message: &BitVector, pad: &BitVector) -> Result<BitVector> {
    if pad.len() < message.len() {
        return Err(Error::param(format!(
            "pad of {} bits is shorter than the {}-bit message",
            pad.len(),
            message.len()
        )));
    }
    Ok(BitVector::from_bools(
        message.iter().zip(pad.iter()).map(|(m, p)| m ^ p),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PhiZero;
    use crate::protocol::{run_instance, SamplingParams};
    use crate::rng::seeded;

    #[test]
    fn degenerate_half_ignores_the_transcript() {
        let one = BitVector::from_bits(&[1, 0, 0, 0]);
        assert!(is_degenerate_half(&one));
        assert!(!is_degenerate_half(&BitVector::from_bits(&[1, 1, 0, 0])));
        assert!(!is_degenerate_half(&BitVector::from_bits(&[0, 0, 0, 0])));
        let params = HashParams::new(8).unwrap();
        let c1 = verification_code(&one, &transcript(12, 3, 1), &params).unwrap();
        let c2 = verification_code(&one, &transcript(12, 3, 2), &params).unwrap();
        assert_eq!(c1, c2);
        let bits = BitVector::from_bits(&[1, 0, 0, 0, 0, 1, 1, 0]);
        assert!(AuthSecret::from_bits("x", &bits, 4).is_err());
        let mut rng = seeded(5);
        assert!((0..500).all(|_| !is_degenerate_half(&random_half(2, &mut rng))));
    }

    fn transcript(n: usize, len: usize, seed: u64) -> Vec<InstanceRecord> {
        let dist = PhiZero::new(n).unwrap();
        let params = SamplingParams::new(n, 3.0, 4.0, 0.0).unwrap();
        let mut rng = seeded(seed);
        (0..len)
            .map(|_| run_instance(&dist, &params, &mut rng).unwrap().record)
            .collect()
    }

    fn bits_of(value: u64, len: usize) -> BitVector {
        BitVector::from_bools((0..len).map(|r| (value >> r) & 1 == 1))
    }

    #[test]
    fn primes() {
        assert_eq!(next_prime_above(256), 257);
        assert_eq!(next_prime_above(1 << 16), 65537);
        assert_eq!(next_prime_above(7), 11);
        assert_eq!(HashParams::new(16).unwrap().p, 257);
        assert!(HashParams::new(15).is_err());
    }

    #[test]
    fn lcg_jump_matches_stepping() {
        let mut s = 42u64;
        for k in 0..200u64 {
            assert_eq!(lcg_jump(42, k), s);
            s = lcg_next(s);
        }
    }

    #[test]
    fn coefficients_are_nonzero() {
        let params = HashParams::new(4).unwrap(); // p = 5
        for l in 0..200 {
            assert!(params.coefficients(l).iter().all(|&c| c % params.p != 0 && c < params.p));
        }
    }

    #[test]
    fn hash_block_examples() {
        let x = BigUint::from(10u32);
        assert_eq!(hash_block(&x, 1, 0, 7, 2), 3);
        assert_eq!(hash_block(&BigUint::zero(), 3, 5, 7, 2), 1);
    }

    #[test]
    fn hash_block_collision_rate() {
        let mut rng = seeded(40);
        let (p, out) = (257u64, 8u32);
        let trials = 100_000;
        let mut coll = 0;
        for _ in 0..trials {
            let x = rng.random_range(0..1u64 << 20);
            let mut y = rng.random_range(0..1u64 << 20);
            while y == x {
                y = rng.random_range(0..1u64 << 20);
            }
            let a = rng.random_range(1..p);
            let b = rng.random_range(0..p);
            coll += usize::from(
                hash_block(&BigUint::from(x), a, b, p, out) == hash_block(&BigUint::from(y), a, b, p, out),
            );
        }
        let rate = coll as f64 / trials as f64;
        assert!(rate <= 2.0 / 256.0 + 0.002, "{rate}");
    }

    #[test]
    fn nonlinear_form_examples() {
        let v = BitVector::from_bits(&[1, 0, 1, 1]);
        assert_eq!(nonlinear_form(&v, &BitVector::zeros(4)), BigUint::from(13u32));
        let ones = BitVector::ones(4);
        assert_eq!(nonlinear_form(&ones, &bits_of(9, 4)), BigUint::from(15u32));
        // 13 + 2·2 (complement = 0100 → 2) with s = 2 (bit 1 set)
        assert_eq!(nonlinear_form(&v, &bits_of(2, 4)), BigUint::from(17u32));
        // s longer than v is truncated
        assert_eq!(nonlinear_form(&v, &bits_of(0b1_0000, 5)), BigUint::from(13u32));
    }

    #[test]
    fn nonlinear_form_injective_on_bytes() {
        for s in (0u64..256).filter(|&s| s != 1) {
            let sv = bits_of(s, 8);
            let mut seen = std::collections::HashSet::new();
            for v in 0u64..256 {
                assert!(seen.insert(nonlinear_form(&bits_of(v, 8), &sv)), "s={s} v={v}");
            }
        }
        // s = 1 collapses everything to 2⁸ − 1.
        let one = bits_of(1, 8);
        assert_eq!(nonlinear_form(&bits_of(5, 8), &one), BigUint::from(255u32));
    }

    #[test]
    fn code_matches_hand_evaluation() {
        let t = transcript(4, 1, 1);
        let params = HashParams::new(8).unwrap();
        let s = bits_of(0b1010, 4);
        let c = params.coefficients(0);
        let rec = &t[0];
        let int = |v: &BitVector| -> u64 {
            let iv: u64 = v.iter().enumerate().map(|(r, b)| u64::from(b) << r).sum();
            let comp = (1u64 << v.len()) - 1 - iv;
            iv + 0b1010 * comp
        };
        let h = |x: u64, a: u64, b: u64| ((a * x + b) % params.p) % (1 << params.out_bits);
        let expected = h(int(&rec.i), c[0], c[1])
            ^ h(int(&rec.j), c[2], c[3])
            ^ h(int(&rec.mu1_half), c[4], c[5])
            ^ h(int(&rec.mu1p_half), c[6], c[7])
            ^ h(int(&rec.mu2_half), c[8], c[9])
            ^ h(int(&rec.mu2p_half), c[10], c[11]);
        assert_eq!(verification_code(&s, &t, &params).unwrap(), expected);
    }

    #[test]
    fn checksum_failure_aborts_code() {
        let mut t = transcript(8, 3, 2);
        let params = HashParams::new(8).unwrap();
        t[1].rho += 1.0;
        assert!(matches!(
            verification_code(&bits_of(3, 4), &t, &params),
            Err(Error::Transmission(_))
        ));
        assert!(verification_code(&bits_of(3, 4), &[], &params).is_err());
    }

    #[test]
    fn accumulator_matches_recomputation() {
        let t = transcript(12, 20, 3);
        let params = HashParams::new(16).unwrap();
        let s = bits_of(0x5a, 8);
        let mut acc = CodeAccumulator::new(s.clone(), params);
        for (l, r) in t.iter().enumerate() {
            acc.add(l, r).unwrap();
        }
        let full = verification_code(&s, &t, &params).unwrap();
        assert_eq!(acc.code(), full);
        let cached = acc.remove(7).unwrap();
        assert_ne!(acc.len(), t.len());
        acc.reinsert(7, cached);
        assert_eq!(acc.code(), full);
        acc.remove(3);
        acc.add(3, &t[3]).unwrap();
        assert_eq!(acc.code(), full);
        assert!(acc.add(3, &t[3]).is_err());
    }

    #[test]
    fn many_secrets_share_each_code() {
        // 16-bit halves, 8-bit codes: every code should have ≫ 1 preimages.
        let t = transcript(16, 4, 4);
        let params = HashParams::new(32).unwrap().with_out_bits(8).unwrap();
        let target = verification_code(&bits_of(0xbeef, 16), &t, &params).unwrap();
        let hits = (0u64..1 << 16)
            .filter(|&s| verification_code(&bits_of(s, 16), &t, &params).unwrap() == target)
            .count();
        assert!(hits >= 1 << (16 - 8 - 2), "{hits}");
    }

    #[test]
    fn no_transform_commutes_with_the_code() {
        // Moving a modification from B's side of the transcript to A's side
        // must change the code for some secret.
        let params = HashParams::new(16).unwrap();
        let mut rng = seeded(5);
        for trial in 0..1000u64 {
            let base = transcript(8, 2, 100 + trial % 50);
            let l = rng.random_range(0..2);
            let r = rng.random_range(0..8);
            let mut left = base.clone();
            let mut right = base.clone();
            let flip = |v: &mut BitVector| {
                let cur = v.get(r);
                v.set(r, !cur);
            };
            if rng.random::<bool>() {
                flip(&mut left[l].j);
                flip(&mut right[l].i);
            } else {
                flip(&mut left[l].mu1p_half);
                flip(&mut right[l].mu1_half);
            }
            left[l].seal();
            right[l].seal();
            let differs = (0u64..256).any(|s| {
                let sv = bits_of(s, 8);
                verification_code(&sv, &left, &params).unwrap()
                    != verification_code(&sv, &right, &params).unwrap()
            });
            assert!(differs, "trial {trial}");
        }
    }

    #[test]
    fn code_bytes_roundtrip() {
        assert_eq!(code_to_bytes(0xab, 8), vec![0xab]);
        assert_eq!(code_to_bytes(0x1ab, 12), vec![0x01, 0xab]);
        assert_eq!(code_from_bytes(&[0x01, 0xab]).unwrap(), 0x1ab);
    }

    #[test]
    fn otp_properties() {
        let mut rng = seeded(6);
        let m = BitVector::from_bools((0..100).map(|_| rng.random::<bool>()));
        let pad = BitVector::from_bools((0..120).map(|_| rng.random::<bool>()));
        let c = otp(&m, &pad).unwrap();
        assert_eq!(otp(&c, &pad).unwrap(), m);
        let zero = BitVector::zeros(100);
        assert_eq!(otp(&zero, &pad).unwrap().to_bits(), pad.to_bits()[..100].to_vec());
        assert!(otp(&pad, &m).is_err());
        let ones: usize = (0..1000)
            .map(|_| {
                let pad = BitVector::from_bools((0..100).map(|_| rng.random::<bool>()));
                otp(&m, &pad).unwrap().weight()
            })
            .sum();
        assert!((ones as f64 / 100_000.0 - 0.5).abs() < 0.01);
    }

    #[test]
    fn renewal_flow() {
        let mut rng = seeded(7);
        let cfg = AuthConfig { secret_bits: 16, message_bits: 32, reuse_limit: 3 };
        let mut wallet = Wallet::new();
        let old = AuthSecret::random("bob", 8, &mut rng);
        wallet.insert(old.clone());
        let session = BitVector::from_bools((0..48).map(|_| rng.random::<bool>()));
        match verify_and_renew(&session, &mut wallet, "bob", 5, 5, &cfg).unwrap() {
            RenewOutcome::Accepted { pad } => assert_eq!(pad.len(), 32),
            other => panic!("{other:?}"),
        }
        let renewed = wallet.get("bob").unwrap().clone();
        assert_eq!(renewed.s_a.as_ref().unwrap().to_bits(), session.to_bits()[..8].to_vec());
        assert_eq!(renewed.s_b.to_bits(), session.to_bits()[8..16].to_vec());

        for expect in 1..3 {
            assert_eq!(
                verify_and_renew(&session, &mut wallet, "bob", 1, 2, &cfg).unwrap(),
                RenewOutcome::Rejected { reuse_counter: expect }
            );
        }
        assert_eq!(
            verify_and_renew(&session, &mut wallet, "bob", 1, 2, &cfg).unwrap(),
            RenewOutcome::Compromised
        );
        assert!(wallet.get("bob").unwrap().compromised);
        let short = BitVector::zeros(40);
        assert!(matches!(
            verify_and_renew(&short, &mut wallet, "bob", 1, 1, &cfg),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn renewal_changes_secret() {
        let mut rng = seeded(8);
        let cfg = AuthConfig { secret_bits: 16, message_bits: 0, reuse_limit: 3 };
        let trials = 2000;
        let mut same = 0;
        for _ in 0..trials {
            let mut wallet = Wallet::new();
            let old = AuthSecret::random("p", 8, &mut rng);
            wallet.insert(old.clone());
            let session = BitVector::from_bools((0..16).map(|_| rng.random::<bool>()));
            if AuthSecret::from_bits("p", &session, 8).is_err() {
                assert!(verify_and_renew(&session, &mut wallet, "p", 0, 0, &cfg).is_err());
                assert_eq!(wallet.get("p").unwrap(), &old);
                continue;
            }
            verify_and_renew(&session, &mut wallet, "p", 0, 0, &cfg).unwrap();
            same += usize::from(wallet.get("p").unwrap() == &old);
        }
        assert!(same <= 2, "{same}");
    }
}
