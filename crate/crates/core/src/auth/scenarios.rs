//! In-process attack and registration experiments. No networking: every
//! actor is a value and the channel is a function call the opponent may
//! rewrite.

use rand::Rng;
use rayon::prelude::*;

use super::{random_half, verification_code, AuthSecret, HashParams, Wallet};
use crate::bits::BitVector;
use crate::distributions::PhiZero;
use crate::error::{Error, Result};
use crate::protocol::{run_instance, InstanceRecord, SamplingParams};
use crate::rng::{stream, Purpose};

/// Size of the simulated sessions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionShape {
    pub n: usize,
    pub instances: usize,
    pub k: f64,
    pub k_cfg: f64,
}

impl Default for SessionShape {
    fn default() -> Self {
        Self {
            n: 16,
            instances: 4,
            k: 3.0,
            k_cfg: 4.0,
        }
    }
}

/// Public transcript of one unauthenticated key exchange.
pub fn session_transcript<R: Rng + ?Sized>(shape: &SessionShape, rng: &mut R) -> Result<Vec<InstanceRecord>> {
    let dist = PhiZero::new(shape.n)?;
    let params = SamplingParams::new(shape.n, shape.k, shape.k_cfg, 0.0)?;
    (0..shape.instances)
        .map(|_| run_instance(&dist, &params, rng).map(|o| o.record))
        .collect()
}

/// Sends records through a byte channel and checks them on arrival.
pub fn transmit(records: &[InstanceRecord]) -> Result<Vec<InstanceRecord>> {
    records
        .iter()
        .map(|r| InstanceRecord::from_bytes(&r.to_bytes()))
        .collect()
}

/// Flips one random public bit of a random record and fixes its checksum,
/// as an opponent controlling the channel would.
pub fn tamper<R: Rng + ?Sized>(records: &[InstanceRecord], rng: &mut R) -> Vec<InstanceRecord> {
    let mut out = records.to_vec();
    let l = rng.random_range(0..out.len());
    let rec = &mut out[l];
    let n = rec.n();
    let r = rng.random_range(0..n);
    let v = match rng.random_range(0..6) {
        0 => &mut rec.i,
        1 => &mut rec.j,
        2 => &mut rec.mu1_half,
        3 => &mut rec.mu2_half,
        4 => &mut rec.mu1p_half,
        _ => &mut rec.mu2p_half,
    };
    let cur = v.get(r);
    v.set(r, !cur);
    rec.seal();
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitmConfig {
    pub shape: SessionShape,
    pub secret_bits: u32,
    pub sessions: usize,
    pub seed: u64,
}

impl Default for MitmConfig {
    fn default() -> Self {
        Self {
            shape: SessionShape::default(),
            secret_bits: 16,
            sessions: 10_000,
            seed: 1,
        }
    }
}

/// Acceptance counts per scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MitmStats {
    pub sessions: usize,
    pub honest_accepted: usize,
    /// B accepted the code A computed on the opponent-facing transcript.
    pub substitution_accepted_by_b: usize,
    /// A accepted the code B computed on the opponent-facing transcript.
    pub substitution_accepted_by_a: usize,
    pub tamper_accepted: usize,
    pub out_bits: u32,
}

impl MitmStats {
    pub fn honest_rate(&self) -> f64 {
        self.honest_accepted as f64 / self.sessions as f64
    }

    /// Per-side forged acceptance, pooling both directions.
    pub fn substitution_rate(&self) -> f64 {
        (self.substitution_accepted_by_a + self.substitution_accepted_by_b) as f64
            / (2 * self.sessions) as f64
    }

    pub fn tamper_rate(&self) -> f64 {
        self.tamper_accepted as f64 / self.sessions as f64
    }

    pub fn expected_forgery(&self) -> f64 {
        (0.5f64).powi(self.out_bits as i32)
    }

    fn merge(mut self, o: Self) -> Self {
        self.sessions += o.sessions;
        self.honest_accepted += o.honest_accepted;
        self.substitution_accepted_by_b += o.substitution_accepted_by_b;
        self.substitution_accepted_by_a += o.substitution_accepted_by_a;
        self.tamper_accepted += o.tamper_accepted;
        self
    }
}

fn mitm_session(cfg: &MitmConfig, params: &HashParams, session: u64) -> Result<MitmStats> {
    let mut rng = stream(cfg.seed, session, 0, Purpose::Auth);
    let half = params.half_bits();
    let s_a = random_half(half, &mut rng);
    let s_b = random_half(half, &mut rng);
    let mut stats = MitmStats {
        sessions: 1,
        out_bits: params.out_bits,
        ..Default::default()
    };

    // Honest: both sides see the same transcript.
    let t = session_transcript(&cfg.shape, &mut rng)?;
    let received = transmit(&t)?;
    let c_a = verification_code(&s_a, &t, params)?;
    let c_b = verification_code(&s_b, &received, params)?;
    let ok = c_a == verification_code(&s_a, &received, params)?
        && c_b == verification_code(&s_b, &t, params)?;
    stats.honest_accepted = usize::from(ok);

    // Full substitution: the opponent runs one exchange with each side and
    // forwards the codes unchanged.
    let t_a = session_transcript(&cfg.shape, &mut rng)?;
    let t_b = session_transcript(&cfg.shape, &mut rng)?;
    let forged_to_b = verification_code(&s_a, &t_a, params)?;
    let forged_to_a = verification_code(&s_b, &t_b, params)?;
    stats.substitution_accepted_by_b = usize::from(forged_to_b == verification_code(&s_a, &t_b, params)?);
    stats.substitution_accepted_by_a = usize::from(forged_to_a == verification_code(&s_b, &t_a, params)?);

    // Tamper: one public bit is rewritten in transit to B.
    let altered = tamper(&t, &mut rng);
    stats.tamper_accepted = usize::from(c_a == verification_code(&s_a, &altered, params)?);
    Ok(stats)
}

/// Runs `sessions` independent sessions of each scenario.
pub fn mitm_experiment(cfg: &MitmConfig) -> Result<MitmStats> {
    let params = HashParams::new(cfg.secret_bits)?;
    let parts: Vec<MitmStats> = (0..cfg.sessions as u64)
        .into_par_iter()
        .map(|s| mitm_session(cfg, &params, s))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(
        MitmStats {
            out_bits: params.out_bits,
            ..Default::default()
        },
        MitmStats::merge,
    ))
}

/// An actor holding a wallet.
#[derive(Debug, Clone, Default)]
pub struct Party {
    pub name: String,
    pub wallet: Wallet,
}

impl Party {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            wallet: Wallet::new(),
        }
    }
}

/// Gives `x` and `y` a shared established secret, as an earlier
/// registration would have.
pub fn enroll<R: Rng + ?Sized>(x: &mut Party, y: &mut Party, half: usize, rng: &mut R) {
    let s = AuthSecret::random(&y.name, half, rng);
    let mut mirror = s.clone();
    mirror.partner_id = x.name.clone();
    x.wallet.insert(s);
    y.wallet.insert(mirror);
}

/// Mutually authenticated key exchange between two enrolled parties,
/// abstracted to its outcome: a fresh key both sides hold.
fn authenticated_key<R: Rng + ?Sized>(x: &Party, y: &Party, bits: usize, rng: &mut R) -> Result<BitVector> {
    let sx = x.wallet.get(&y.name);
    let sy = y.wallet.get(&x.name);
    match (sx, sy) {
        (Some(a), Some(b)) if a.s_b == b.s_b && a.s_a == b.s_a && !a.compromised && !b.compromised => {
            Ok(random_half(bits, rng))
        }
        _ => Err(Error::RegistrationAborted(format!(
            "{} and {} share no valid authentication secret",
            x.name, y.name
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistrationMode {
    Mutual,
    /// Only B proves its identity; entries are half empty.
    OneWay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationConfig {
    pub shape: SessionShape,
    pub secret_bits: u32,
    pub mode: RegistrationMode,
    /// Substitute the step-3 exchange with two opponent-run exchanges.
    pub mitm: bool,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            shape: SessionShape::default(),
            secret_bits: 16,
            mode: RegistrationMode::Mutual,
            mitm: false,
        }
    }
}

/// Registration of A with B confirmed by authority C:
/// 1. A and C agree on `s_A` over their authenticated channel.
/// 2. C and B agree on `s_B`.
/// 3. A and B run an unauthenticated exchange, agree on a seed and send
///    each other `c_A = h(s_A, ·)` and `c_B = h(s_B, ·)`.
/// 4. C hands `s_B` to A and `s_A` to B, who recompute and compare.
///
/// On success both wallets hold the new secret and it is returned as
/// `(A's entry, B's entry)`.
pub fn registration_flow<R: Rng + ?Sized>(
    authority: &Party,
    a: &mut Party,
    b: &mut Party,
    cfg: &RegistrationConfig,
    rng: &mut R,
) -> Result<(AuthSecret, AuthSecret)> {
    let params = HashParams::new(cfg.secret_bits)?;
    let half = params.half_bits();
    let s_a = authenticated_key(a, authority, half, rng)?;
    let s_b = authenticated_key(authority, b, half, rng)?;

    let fresh_seed = |rng: &mut R| {
        let (x, y) = (random_half(half, rng), random_half(half, rng));
        BitVector::from_bools((0..half).map(|r| x.get(r)).chain((0..half).map(|r| y.get(r))))
    };
    let (view_a, view_b, seed_a, seed_b) = if cfg.mitm {
        let ta = session_transcript(&cfg.shape, rng)?;
        let tb = session_transcript(&cfg.shape, rng)?;
        (ta, tb, fresh_seed(rng), fresh_seed(rng))
    } else {
        let t = session_transcript(&cfg.shape, rng)?;
        let seed = fresh_seed(rng);
        (t.clone(), transmit(&t)?, seed.clone(), seed)
    };
    let c_a = verification_code(&s_a, &view_a, &params)?;
    let c_b = verification_code(&s_b, &view_b, &params)?;

    let b_confirmed = c_b == verification_code(&s_b, &view_a, &params)?;
    let a_confirmed = c_a == verification_code(&s_a, &view_b, &params)?;
    let ok = match cfg.mode {
        RegistrationMode::Mutual => a_confirmed && b_confirmed,
        RegistrationMode::OneWay => b_confirmed,
    };
    if !ok {
        return Err(Error::RegistrationAborted(format!(
            "verification codes of the {}–{} exchange do not match",
            a.name, b.name
        )));
    }

    let (entry_a, entry_b) = match cfg.mode {
        RegistrationMode::Mutual => {
            let ea = AuthSecret::from_bits(&b.name, &seed_a, half)?;
            let eb = AuthSecret::from_bits(&a.name, &seed_b, half)?;
            (ea, eb)
        }
        RegistrationMode::OneWay => {
            let pick = |seed: &BitVector| BitVector::from_bools((half..2 * half).map(|r| seed.get(r)));
            (
                AuthSecret::one_way(&b.name, pick(&seed_a)),
                AuthSecret::one_way(&a.name, pick(&seed_b)),
            )
        }
    };
    a.wallet.insert(entry_a.clone());
    b.wallet.insert(entry_b.clone());
    Ok((entry_a, entry_b))
}

/// Fraction of registrations aborted over `trials` fresh actor sets.
pub fn registration_abort_rate(cfg: &RegistrationConfig, trials: usize, seed: u64) -> Result<f64> {
    let params = HashParams::new(cfg.secret_bits)?;
    let aborted: usize = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut rng = stream(seed, t, 1, Purpose::Auth);
            let (mut a, mut b, mut c) = (Party::new("A"), Party::new("B"), Party::new("C"));
            enroll(&mut a, &mut c, params.half_bits(), &mut rng);
            enroll(&mut c, &mut b, params.half_bits(), &mut rng);
            match registration_flow(&c, &mut a, &mut b, cfg, &mut rng) {
                Ok(_) => Ok(0),
                Err(Error::RegistrationAborted(_)) => Ok(1),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(aborted as f64 / trials as f64)
}
