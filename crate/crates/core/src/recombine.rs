//! Reuse-and-recombine block engine and non-contributive avoidance.
//!
//! A block holds `n` instances of steps 1–3 per partner. Output position
//! `p ∈ 1..=w·n` pairs A's instance `q_A = ⌊(p−1)/n⌋+1` with B's instance
//! `q_B = ((p−1) mod n)+1`, so A retains `w` private vectors and B retains `n`.

use rand::Rng;
use rayon::prelude::*;

use crate::adversary::{keep_instance, strategy_value, HalfSums, OpponentView, Strategy};
use crate::bits::BitVector;
use crate::distributions::PhiZero;
use crate::error::{Error, Result};
use crate::protocol::{quantize, PartnerInstance};
use crate::rng::{stream, Purpose};
use crate::statcheck::determinant;

/// 1-based `(q_A, q_B)` for 1-based position `p` of a window-`w` block.
pub fn pair_indices(p: usize, n: usize, w: usize) -> Result<(usize, usize)> {
    if n == 0 || p == 0 || p > w * n {
        return Err(Error::param(format!("position {p} outside 1..={}", w * n)));
    }
    Ok(((p - 1) / n + 1, (p - 1) % n + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// What a partner keeps of one instance once steps 1–3 are done: the two
/// pulled-back public rows, the public half-sums, the tidying index and,
/// inside the window, the private vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Retained {
    pub rows: [BitVector; 2],
    pub sums: HalfSums,
    pub tidying_index: usize,
    pub private: Option<BitVector>,
}

impl Retained {
    pub fn new(inst: &PartnerInstance, keep_private: bool) -> Self {
        let [h1, h2] = inst.half_sets();
        Self {
            rows: inst.pulled_rows(),
            sums: HalfSums::new(&inst.published, [&h1, &h2]),
            tidying_index: inst.tidying_index(),
            private: keep_private.then(|| inst.private_vector()),
        }
    }
}

/// Steps 1–3 for both partners of block `m`, with full private state.
/// Uses the same streams as [`BlockState::generate`].
pub fn block_instances(
    master: u64,
    m: u64,
    n: usize,
    k: f64,
) -> Result<(Vec<PartnerInstance>, Vec<PartnerInstance>)> {
    let dist = PhiZero::new(n)?;
    let gen = |purpose: Purpose| -> Result<Vec<PartnerInstance>> {
        (0..n)
            .into_par_iter()
            .map(|q| PartnerInstance::generate(&dist, k, &mut stream(master, m, q as u64, purpose)))
            .collect()
    };
    Ok((gen(Purpose::PartnerA)?, gen(Purpose::PartnerB)?))
}

/// Per-block partner memory. A keeps `w` private vectors, B keeps `n`.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub m: u64,
    pub n: usize,
    pub w: usize,
    pub k: f64,
    pub a: Vec<Retained>,
    pub b: Vec<Retained>,
}

fn check_window(n: usize, w: usize) -> Result<()> {
    if w == 0 || w > n {
        return Err(Error::InvalidConfiguration(format!("window w = {w} must lie in 1..={n}")));
    }
    Ok(())
}

impl BlockState {
    /// Runs steps 1–3 for the `n` instances of block `m` on both sides,
    /// dropping each instance's permutations as soon as it is summarized.
    pub fn generate(master: u64, m: u64, n: usize, w: usize, k: f64) -> Result<Self> {
        check_window(n, w)?;
        let dist = PhiZero::new(n)?;
        let gen = |purpose: Purpose, keep: usize| -> Result<Vec<Retained>> {
            (0..n)
                .into_par_iter()
                .map(|q| {
                    let mut rng = stream(master, m, q as u64, purpose);
                    let inst = PartnerInstance::generate(&dist, k, &mut rng)?;
                    Ok(Retained::new(&inst, q < keep))
                })
                .collect()
        };
        Ok(Self {
            m,
            n,
            w,
            k,
            a: gen(Purpose::PartnerA, w)?,
            b: gen(Purpose::PartnerB, n)?,
        })
    }

    /// Builds a block from explicit instances (both sides of length `n`).
    pub fn from_instances(
        m: u64,
        w: usize,
        k: f64,
        partner_a: &[PartnerInstance],
        partner_b: &[PartnerInstance],
    ) -> Result<Self> {
        let n = partner_b.len();
        check_window(n, w)?;
        if partner_a.len() != n || partner_b.iter().any(|p| p.n() != n) {
            return Err(Error::param("both sides need n instances of length n"));
        }
        Ok(Self {
            m,
            n,
            w,
            k,
            a: partner_a.iter().enumerate().map(|(q, p)| Retained::new(p, q < w)).collect(),
            b: partner_b.iter().map(|p| Retained::new(p, true)).collect(),
        })
    }

    pub fn positions(&self) -> usize {
        self.w * self.n
    }

    /// Bits put on the wire by both partners for this block: `6n` per
    /// instance record.
    pub fn transmitted_bits(&self) -> usize {
        6 * self.n * self.n
    }

    /// Both candidate values of `side` at 1-based position `p`, one per
    /// element of the counterpart's published pair.
    pub fn candidates(&self, p: usize, side: Side) -> Result<[f64; 2]> {
        let (qa, qb) = pair_indices(p, self.n, self.w)?;
        Ok(self.candidates_at(qa - 1, qb - 1, side))
    }

    fn candidates_at(&self, qa: usize, qb: usize, side: Side) -> [f64; 2] {
        let n = self.n as f64;
        let (private, rows) = match side {
            Side::A => (&self.a[qa], &self.b[qb]),
            Side::B => (&self.b[qb], &self.a[qa]),
        };
        let (private, rows) = (
            private.private.as_ref().expect("private vector retained inside the window"),
            &rows.rows,
        );
        [
            private.dot(&rows[0]) as f64 / n,
            private.dot(&rows[1]) as f64 / n,
        ]
    }

    /// `V_A(m,p)` or `V_B(m,p)` when the partner synchronized on element
    /// `choice` of the counterpart pair.
    pub fn recombine_v(&self, p: usize, side: Side, choice: usize) -> Result<f64> {
        Ok(self.candidates(p, side)?[choice.min(1)])
    }

    /// The `w × n` matrix whose rows are B's published vectors pulled back by
    /// the permutation A synchronized on.
    pub fn j_matrix(&self, choices: &[usize]) -> Vec<BitVector> {
        self.b
            .iter()
            .zip(choices)
            .take(self.w)
            .map(|(r, &c)| r.rows[c.min(1)].clone())
            .collect()
    }
}

/// `β` adjusted so `|v₁ − v₂|` is an even multiple of it.
pub fn adapt_k(v_b_mu1: f64, v_b_mu2: f64, beta: f64) -> f64 {
    let d = (v_b_mu1 - v_b_mu2).abs();
    if d == 0.0 {
        return beta;
    }
    let l = (d / (2.0 * beta)).ceil().max(1.0);
    d / (2.0 * l)
}

pub fn rho_feasible(v1: f64, v2: f64, beta: f64, rho: f64) -> bool {
    quantize(v1, beta, rho) == quantize(v2, beta, rho)
}

/// A translation in `[0, 2β)` that gives both candidates the same bit,
/// drawn uniformly from the feasible set; `None` when `|v₁ − v₂|` is an odd
/// multiple of `β`.
pub fn adapt_rho<R: Rng + ?Sized>(v_a_mu1: f64, v_a_mu2: f64, beta: f64, rng: &mut R) -> Option<f64> {
    // With u = (v₁ − ρ)/β the second bucket index is u + D. The parities
    // agree iff frac(u) lands in one interval of length 1 − frac(D) (floor D
    // even) or frac(D) (floor D odd).
    let mut big_d = (v_a_mu2 - v_a_mu1) / beta;
    // Candidate values live on a lattice, so D is often an integer that
    // rounding has nudged; snap it back rather than sample a sliver.
    if (big_d - big_d.round()).abs() < 1e-9 * big_d.abs().max(1.0) {
        big_d = big_d.round();
    }
    let fl = big_d.floor();
    let fr = big_d - fl;
    let even = (fl as i64).rem_euclid(2) == 0;
    let (lo, hi) = if even { (0.0, 1.0 - fr) } else { (1.0 - fr, 1.0) };
    if hi - lo <= 0.0 {
        return None;
    }
    let c = v_a_mu1 / beta;
    for _ in 0..16 {
        let s = lo + rng.random::<f64>() * (hi - lo);
        let z = (c - s).floor() - f64::from(u8::from(rng.random::<bool>()));
        let rho = beta * (c - (s + z));
        if (0.0..2.0 * beta).contains(&rho) && rho_feasible(v_a_mu1, v_a_mu2, beta, rho) {
            return Some(rho);
        }
    }
    // Only reachable when the feasible set is a sliver at rounding scale.
    None
}

/// Step 4′ for one position: B adapts `β` from its candidates, then A
/// adapts `ρ` under the new `β`. Returns `(β, ρ, infeasible_for_a)`.
pub fn step4prime<R: Rng + ?Sized>(
    v_a: [f64; 2],
    v_b: [f64; 2],
    beta: f64,
    rng: &mut R,
) -> (f64, f64, bool) {
    let beta_new = adapt_k(v_b[0], v_b[1], beta);
    match adapt_rho(v_a[0], v_a[1], beta_new, rng) {
        Some(rho) => (beta_new, rho, false),
        None => (beta_new, rng.random::<f64>() * 2.0 * beta_new, true),
    }
}

/// Settings shared by every position of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionConfig {
    pub beta: f64,
    pub strategy: Strategy,
    pub avoidance: bool,
}

/// Everything recorded about one output position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionOutcome {
    pub p: usize,
    pub kept: bool,
    pub e_a: u8,
    pub e_b: u8,
    /// Opponent guess; meaningful only when `kept`.
    pub e_e: u8,
    pub favorable: bool,
    pub contributive_a: bool,
    pub contributive_b: bool,
    pub infeasible: bool,
    pub v_a: f64,
    pub v_b: f64,
    pub beta: f64,
    pub rho: f64,
}

/// Evaluates row `q_A` (0-based) of a block: `n` consecutive positions.
pub fn evaluate_row(
    block: &BlockState,
    master: u64,
    qa: usize,
    cfg: &PositionConfig,
) -> Vec<PositionOutcome> {
    let mut rng = stream(master, block.m, qa as u64, Purpose::Position);
    let mut opp = stream(master, block.m, qa as u64, Purpose::Opponent);
    let a_tidy = block.a[qa].tidying_index;
    (0..block.n)
        .map(|qb| {
            let choice_a = usize::from(rng.random::<bool>());
            let choice_b = usize::from(rng.random::<bool>());
            let va = block.candidates_at(qa, qb, Side::A);
            let vb = block.candidates_at(qa, qb, Side::B);
            let (beta, rho, infeasible) = if cfg.avoidance {
                step4prime(va, vb, cfg.beta, &mut rng)
            } else {
                (cfg.beta, rng.random::<f64>() * 2.0 * cfg.beta, false)
            };
            let view = OpponentView {
                n: block.n,
                k: block.k,
                i: block.a[qa].sums,
                j: block.b[qb].sums,
                beta,
                rho,
            };
            let kept = keep_instance(&view);
            let e_e = if kept {
                quantize(strategy_value(&view, cfg.strategy, &mut opp), beta, rho)
            } else {
                0
            };
            PositionOutcome {
                p: qa * block.n + qb + 1,
                kept,
                e_a: quantize(va[choice_a], beta, rho),
                e_b: quantize(vb[choice_b], beta, rho),
                e_e,
                favorable: choice_a == block.b[qb].tidying_index && choice_b == a_tidy,
                contributive_a: quantize(va[0], beta, rho) == quantize(va[1], beta, rho),
                contributive_b: quantize(vb[0], beta, rho) == quantize(vb[1], beta, rho),
                infeasible,
                v_a: va[choice_a],
                v_b: vb[choice_b],
                beta,
                rho,
            }
        })
        .collect()
}

/// Counters aggregated over positions. Merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockCounters {
    pub positions: u64,
    pub kept: u64,
    pub kept_favorable: u64,
    pub kept_agree: u64,
    pub kept_opponent_agree: u64,
    pub contributive_a: u64,
    pub contributive_b: u64,
    pub contributive_both_kept: u64,
    pub infeasible: u64,
    /// A-side contributive positions among those where ρ was feasible.
    pub contributive_a_feasible: u64,
    pub agree_all: u64,
    pub sum_abs_dv: f64,
}

impl BlockCounters {
    pub fn add(&mut self, o: &PositionOutcome) {
        self.positions += 1;
        self.contributive_a += u64::from(o.contributive_a);
        self.contributive_b += u64::from(o.contributive_b);
        self.infeasible += u64::from(o.infeasible);
        self.contributive_a_feasible += u64::from(o.contributive_a && !o.infeasible);
        self.agree_all += u64::from(o.e_a == o.e_b);
        self.sum_abs_dv += (o.v_a - o.v_b).abs();
        if o.kept {
            self.kept += 1;
            self.kept_favorable += u64::from(o.favorable);
            self.kept_agree += u64::from(o.e_a == o.e_b);
            self.kept_opponent_agree += u64::from(o.e_e == o.e_b);
            self.contributive_both_kept += u64::from(o.contributive_a && o.contributive_b);
        }
    }

    pub fn merge(&mut self, other: &BlockCounters) {
        self.positions += other.positions;
        self.kept += other.kept;
        self.kept_favorable += other.kept_favorable;
        self.kept_agree += other.kept_agree;
        self.kept_opponent_agree += other.kept_opponent_agree;
        self.contributive_a += other.contributive_a;
        self.contributive_b += other.contributive_b;
        self.contributive_both_kept += other.contributive_both_kept;
        self.infeasible += other.infeasible;
        self.contributive_a_feasible += other.contributive_a_feasible;
        self.agree_all += other.agree_all;
        self.sum_abs_dv += other.sum_abs_dv;
    }

    /// Raw mismatch rate over kept positions.
    pub fn raw_error(&self) -> f64 {
        ratio(self.kept - self.kept_agree, self.kept)
    }

    pub fn discard_rate(&self) -> f64 {
        ratio(self.positions - self.kept, self.positions)
    }

    pub fn contributive_rate(&self) -> f64 {
        ratio(self.contributive_both_kept, self.kept)
    }

    /// B-side contributive fraction over all positions.
    pub fn contributive_b_rate(&self) -> f64 {
        ratio(self.contributive_b, self.positions)
    }

    /// A-side contributive fraction over positions with a feasible ρ.
    pub fn contributive_a_feasible_rate(&self) -> f64 {
        ratio(self.contributive_a_feasible, self.positions - self.infeasible)
    }

    pub fn mean_abs_dv(&self) -> f64 {
        if self.positions == 0 {
            0.0
        } else {
            self.sum_abs_dv / self.positions as f64
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Kept bit flows of one block, in position order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockOutput {
    pub m: u64,
    pub counters: BlockCounters,
    pub bits_a: Vec<u8>,
    pub bits_b: Vec<u8>,
    pub bits_e: Vec<u8>,
    pub transmitted_bits: usize,
}

/// Generates block `m` and evaluates all of its `w·n` positions.
pub fn run_block(master: u64, m: u64, n: usize, w: usize, k: f64, cfg: &PositionConfig) -> Result<BlockOutput> {
    let block = BlockState::generate(master, m, n, w, k)?;
    let rows: Vec<Vec<PositionOutcome>> = (0..w)
        .into_par_iter()
        .map(|qa| evaluate_row(&block, master, qa, cfg))
        .collect();
    let mut out = BlockOutput {
        m,
        transmitted_bits: block.transmitted_bits(),
        ..Default::default()
    };
    for o in rows.iter().flatten() {
        out.counters.add(o);
        if o.kept {
            out.bits_a.push(o.e_a);
            out.bits_b.push(o.e_b);
            out.bits_e.push(o.e_e);
        }
    }
    Ok(out)
}

/// Singular fractions of square `J` matrices built from protocol runs and
/// from iid Bernoulli(θ) entries with `θ` equal to the protocol row density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankStats {
    pub protocol_singular: f64,
    pub iid_singular: f64,
    pub theta: f64,
    pub trials: usize,
}

pub fn is_singular(rows: &[BitVector]) -> bool {
    let mat: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.iter().map(i64::from).collect())
        .collect();
    determinant(&mat) == 0
}

pub fn jmatrix_rank_stats<R: Rng + ?Sized>(n: usize, k: f64, trials: usize, rng: &mut R) -> Result<RankStats> {
    if trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    let dist = PhiZero::new(n)?;
    let mut protocol_singular = 0usize;
    let mut ones = 0usize;
    for _ in 0..trials {
        let rows: Vec<BitVector> = (0..n)
            .map(|_| {
                let inst = PartnerInstance::generate(&dist, k, rng)?;
                let c = usize::from(rng.random::<bool>());
                Ok(inst.pulled_rows()[c].clone())
            })
            .collect::<Result<_>>()?;
        ones += rows.iter().map(BitVector::weight).sum::<usize>();
        protocol_singular += usize::from(is_singular(&rows));
    }
    let theta = ones as f64 / (trials * n * n) as f64;
    let mut iid_singular = 0usize;
    for _ in 0..trials {
        let rows: Vec<BitVector> = (0..n)
            .map(|_| BitVector::from_bools((0..n).map(|_| rng.random::<f64>() < theta)))
            .collect();
        iid_singular += usize::from(is_singular(&rows));
    }
    Ok(RankStats {
        protocol_singular: protocol_singular as f64 / trials as f64,
        iid_singular: iid_singular as f64 / trials as f64,
        theta,
        trials,
    })
}

/// Singular fraction of iid Bernoulli(θ) `n × n` matrices.
pub fn iid_singular_fraction<R: Rng + ?Sized>(n: usize, theta: f64, trials: usize, rng: &mut R) -> f64 {
    let singular = (0..trials)
        .filter(|_| {
            let rows: Vec<BitVector> = (0..n)
                .map(|_| BitVector::from_bools((0..n).map(|_| rng.random::<f64>() < theta)))
                .collect();
            is_singular(&rows)
        })
        .count();
    singular as f64 / trials.max(1) as f64
}
