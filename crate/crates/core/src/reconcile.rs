//! Information reconciliation with two bit-repetition codes, followed by
//! multiply-add-shift privacy amplification.
//!
//! Both codes run in code-offset form: for each word `w_A` of `L` kept bits,
//! A's output is `w_A[0]` and A publishes `w_A ⊕ (w_A[0], …, w_A[0])`. Every
//! other party XORs its own word with that public offset and decodes.

use rand::Rng;

use crate::error::{Error, Result};

pub fn repeat_encode(bit: u8, len: usize) -> Vec<u8> {
    vec![bit & 1; len]
}

/// Majority vote over an odd-length word.
pub fn majority_decode(word: &[u8]) -> Result<u8> {
    if word.len() % 2 == 0 {
        return Err(Error::param(format!(
            "majority decoding needs an odd word length, got {}",
            word.len()
        )));
    }
    let ones = word.iter().filter(|&&b| b != 0).count();
    Ok(u8::from(2 * ones > word.len()))
}

/// `Some(bit)` for a constant word, `None` (discard) otherwise.
pub fn exact_decode(word: &[u8]) -> Option<u8> {
    let first = *word.first()?;
    word.iter().all(|&b| b == first).then_some(first)
}

/// Majority with ties resolved to the first symbol; used by the opponent,
/// which must always output a guess.
pub fn vote_decode(word: &[u8]) -> u8 {
    let ones = word.iter().filter(|&&b| b != 0).count();
    match (2 * ones).cmp(&word.len()) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => word[0],
    }
}

/// Word decoder used by the legitimate receiver at one code stage. `None`
/// means the word is publicly discarded. Other reconciliation schemes can
/// plug in here.
pub trait WordDecoder: Sync {
    fn name(&self) -> &'static str;
    fn decode(&self, word: &[u8]) -> Option<u8>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Majority;

impl WordDecoder for Majority {
    fn name(&self) -> &'static str {
        "majority"
    }

    fn decode(&self, word: &[u8]) -> Option<u8> {
        majority_decode(word).ok()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exact;

impl WordDecoder for Exact {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn decode(&self, word: &[u8]) -> Option<u8> {
        exact_decode(word)
    }
}

/// `((a·x + b) mod 2^PA) div 2^(PA−1)`.
pub fn privacy_amplify(x: u64, a: u64, b: u64, pa_bits: u32) -> u8 {
    assert!((1..=63).contains(&pa_bits), "PA word size must lie in 1..=63");
    let mask = (1u64 << pa_bits) - 1;
    let h = a.wrapping_mul(x).wrapping_add(b) & mask;
    (h >> (pa_bits - 1)) as u8
}

/// Draws a hash key: `a` odd, both in `[0, 2^PA)`.
pub fn draw_pa_key<R: Rng + ?Sized>(pa_bits: u32, rng: &mut R) -> (u64, u64) {
    let mask = (1u64 << pa_bits) - 1;
    ((rng.random::<u64>() & mask) | 1, rng.random::<u64>() & mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeConfig {
    pub l_major: usize,
    pub l_exact: usize,
    pub pa_bits: u32,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            l_major: 1,
            l_exact: 1,
            pa_bits: 1,
        }
    }
}

impl CodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_major == 0 || self.l_major % 2 == 0 {
            return Err(Error::InvalidConfiguration(format!(
                "l_major must be odd and positive, got {}",
                self.l_major
            )));
        }
        if self.l_exact == 0 {
            return Err(Error::InvalidConfiguration("l_exact must be positive".into()));
        }
        if !(1..=63).contains(&self.pa_bits) {
            return Err(Error::InvalidConfiguration(format!(
                "pa_bits must lie in 1..=63, got {}",
                self.pa_bits
            )));
        }
        Ok(())
    }

    /// Input bits consumed per output bit before exact-stage discards.
    pub fn expansion(&self) -> usize {
        self.l_major * self.l_exact * self.pa_bits as usize
    }
}

/// Bit counts across one pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageAccounting {
    pub stage: &'static str,
    pub input_bits: usize,
    pub output_bits: usize,
    pub discarded_words: usize,
}

impl StageAccounting {
    /// Fraction of complete words publicly discarded.
    pub fn discard_fraction(&self, word_len: usize) -> f64 {
        let words = self.input_bits / word_len.max(1);
        if words == 0 {
            0.0
        } else {
            self.discarded_words as f64 / words as f64
        }
    }
}

/// Three aligned bit flows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Flows {
    pub a: Vec<u8>,
    pub b: Vec<u8>,
    pub e: Vec<u8>,
}

impl Flows {
    pub fn new(a: Vec<u8>, b: Vec<u8>, e: Vec<u8>) -> Result<Self> {
        if a.len() != b.len() || a.len() != e.len() {
            return Err(Error::ContractViolation(format!(
                "misaligned flows: {} / {} / {}",
                a.len(),
                b.len(),
                e.len()
            )));
        }
        Ok(Self { a, b, e })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn mismatch_rate(&self) -> f64 {
        rate(self.a.iter().zip(&self.b).filter(|(x, y)| x != y).count(), self.len())
    }

    /// How often the opponent matches B.
    pub fn opponent_agreement(&self) -> f64 {
        rate(self.e.iter().zip(&self.b).filter(|(x, y)| x == y).count(), self.len())
    }
}

fn rate(count: usize, total: usize) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        count as f64 / total as f64
    }
}

/// One repetition-code stage in code-offset form.
pub fn code_stage(flows: &Flows, len: usize, decoder: &dyn WordDecoder) -> (Flows, StageAccounting) {
    let mut out = Flows::default();
    let mut discarded = 0;
    if len == 1 {
        out = flows.clone();
    } else {
        let words = flows.len() / len;
        let mut wb = vec![0u8; len];
        let mut we = vec![0u8; len];
        for w in 0..words {
            let range = w * len..(w + 1) * len;
            let word_a = &flows.a[range.clone()];
            let lead = word_a[0];
            for (l, &bit_a) in word_a.iter().enumerate() {
                let offset = bit_a ^ lead;
                wb[l] = flows.b[range.start + l] ^ offset;
                we[l] = flows.e[range.start + l] ^ offset;
            }
            match decoder.decode(&wb) {
                Some(bit_b) => {
                    out.a.push(lead);
                    out.b.push(bit_b);
                    out.e.push(vote_decode(&we));
                }
                None => discarded += 1,
            }
        }
    }
    let acc = StageAccounting {
        stage: decoder.name(),
        input_bits: flows.len(),
        output_bits: out.len(),
        discarded_words: discarded,
    };
    (out, acc)
}

/// Hashes consecutive `PA`-bit chunks, drawing a fresh public key per output.
pub fn pa_stage<R: Rng + ?Sized>(flows: &Flows, pa_bits: u32, rng: &mut R) -> (Flows, StageAccounting) {
    let chunk = pa_bits as usize;
    let mut out = Flows::default();
    for c in 0..flows.len() / chunk {
        let (a, b) = draw_pa_key(pa_bits, rng);
        let pack = |v: &[u8]| -> u64 {
            v[c * chunk..(c + 1) * chunk]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (l, &bit)| acc | (u64::from(bit) << l))
        };
        out.a.push(privacy_amplify(pack(&flows.a), a, b, pa_bits));
        out.b.push(privacy_amplify(pack(&flows.b), a, b, pa_bits));
        out.e.push(privacy_amplify(pack(&flows.e), a, b, pa_bits));
    }
    let acc = StageAccounting {
        stage: "privacy_amplification",
        input_bits: flows.len(),
        output_bits: out.len(),
        discarded_words: 0,
    };
    (out, acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub flows: Flows,
    pub stages: Vec<StageAccounting>,
}

/// Majority code, then exact code, then privacy amplification.
pub fn pipeline<R: Rng + ?Sized>(input: &Flows, config: &CodeConfig, rng: &mut R) -> Result<PipelineOutput> {
    config.validate()?;
    let (f1, s1) = code_stage(input, config.l_major, &Majority);
    let (f2, s2) = code_stage(&f1, config.l_exact, &Exact);
    let (f3, s3) = pa_stage(&f2, config.pa_bits, rng);
    Ok(PipelineOutput {
        flows: f3,
        stages: vec![s1, s2, s3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    fn majority_tail(q: f64, l: u64) -> f64 {
        ((l / 2 + 1)..=l)
            .map(|j| binom(l, j) * q.powi(j as i32) * (1.0 - q).powi((l - j) as i32))
            .sum()
    }

    fn bsc<R: Rng>(bits: &[u8], q: f64, rng: &mut R) -> Vec<u8> {
        bits.iter().map(|&b| b ^ u8::from(rng.random::<f64>() < q)).collect()
    }

    #[test]
    fn encode_decode_examples() {
        assert_eq!(repeat_encode(1, 3), vec![1, 1, 1]);
        assert_eq!(repeat_encode(0, 1), vec![0]);
        for b in 0..2 {
            for l in [1, 3, 7] {
                assert_eq!(majority_decode(&repeat_encode(b, l)).unwrap(), b);
                assert_eq!(exact_decode(&repeat_encode(b, l)), Some(b));
            }
        }
        assert_eq!(majority_decode(&[0, 1, 1]).unwrap(), 1);
        assert_eq!(majority_decode(&[0, 0, 0]).unwrap(), 0);
        assert!(majority_decode(&[0, 1]).is_err());
        assert_eq!(exact_decode(&[1, 0, 1]), None);
        assert_eq!(vote_decode(&[1, 0, 0, 1]), 1);
        assert_eq!(vote_decode(&[0, 1, 1, 0]), 0);
    }

    #[test]
    fn majority_error_matches_binomial_tail() {
        let mut rng = seeded(31);
        for q in [0.1, 0.3, 0.45] {
            for l in [3usize, 31] {
                let trials = 40_000;
                let errors = (0..trials)
                    .filter(|_| majority_decode(&bsc(&vec![0; l], q, &mut rng)).unwrap() == 1)
                    .count();
                let p = majority_tail(q, l as u64);
                let obs = errors as f64 / trials as f64;
                let sd = (p * (1.0 - p) / trials as f64).sqrt().max(1e-9);
                assert!((obs - p).abs() <= 3.0 * sd + 1e-9, "q={q} L={l}: {obs} vs {p}");
            }
        }
    }

    #[test]
    fn exact_decode_never_emits_on_mixed_words() {
        for l in 1..=12usize {
            for mask in 0u32..(1 << l) {
                let word: Vec<u8> = (0..l).map(|r| ((mask >> r) & 1) as u8).collect();
                let constant = mask == 0 || mask == (1 << l) - 1;
                assert_eq!(exact_decode(&word).is_some(), constant, "{word:?}");
            }
        }
    }

    #[test]
    fn exact_accept_rate() {
        let mut rng = seeded(32);
        let (q, l) = (0.2, 4);
        let trials = 50_000;
        let accepted = (0..trials)
            .filter(|_| exact_decode(&bsc(&[0; 4], q, &mut rng)).is_some())
            .count();
        let p = (1.0f64 - q).powi(l) + q.powi(l);
        let obs = accepted as f64 / trials as f64;
        assert!((obs - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt());
    }

    #[test]
    fn pa_examples_and_bias() {
        assert_eq!(privacy_amplify(3, 1, 0, 2), 1);
        assert_eq!(privacy_amplify(0, 1, 0, 2), 0);
        assert_eq!(privacy_amplify(0b101, 1, 0, 1), 1);
        let mut rng = seeded(33);
        let draws = 100_000;
        let ones: usize = (0..draws)
            .map(|_| {
                let x = rng.random::<u64>() & 0xff;
                let (a, b) = draw_pa_key(8, &mut rng);
                assert_eq!(a & 1, 1);
                privacy_amplify(x, a, b, 8) as usize
            })
            .sum();
        assert!((ones as f64 / draws as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn noiseless_pipeline_agrees() {
        let mut rng = seeded(34);
        let bits: Vec<u8> = (0..5000).map(|_| rng.random::<u8>() & 1).collect();
        let e: Vec<u8> = (0..5000).map(|_| rng.random::<u8>() & 1).collect();
        let flows = Flows::new(bits.clone(), bits, e).unwrap();
        let cfg = CodeConfig { l_major: 5, l_exact: 3, pa_bits: 4 };
        let out = pipeline(&flows, &cfg, &mut rng).unwrap();
        assert_eq!(out.flows.a, out.flows.b);
        assert_eq!(out.stages[1].discarded_words, 0);
        assert_eq!(out.flows.len(), 5000 / 5 / 3 / 4);
    }

    #[test]
    fn misaligned_flows_rejected() {
        assert!(matches!(
            Flows::new(vec![0, 1], vec![0], vec![0, 1]),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn output_length_follows_stage_rates() {
        let mut rng = seeded(35);
        let q = 0.2;
        let n = 300_000;
        let a: Vec<u8> = (0..n).map(|_| rng.random::<u8>() & 1).collect();
        let b = bsc(&a, q, &mut rng);
        let flows = Flows::new(a, b.clone(), b).unwrap();
        let cfg = CodeConfig { l_major: 3, l_exact: 4, pa_bits: 2 };
        let out = pipeline(&flows, &cfg, &mut rng).unwrap();
        let q1 = majority_tail(q, 3);
        let survive = (1.0f64 - q1).powi(4) + q1.powi(4);
        let expected = ((n / 3 / 4) as f64 * survive / 2.0).floor();
        let got = out.flows.len() as f64;
        let sd = ((n / 12) as f64 * survive * (1.0 - survive)).sqrt() / 2.0;
        assert!((got - expected).abs() < 4.0 * sd + 1.0, "{got} vs {expected}");
    }

    #[test]
    fn longer_exact_code_lowers_error() {
        let mut rng = seeded(36);
        let a: Vec<u8> = (0..400_000).map(|_| rng.random::<u8>() & 1).collect();
        let b = bsc(&a, 0.3, &mut rng);
        let flows = Flows::new(a, b.clone(), b).unwrap();
        let mut prev = 1.0;
        for l in 1..=5 {
            let cfg = CodeConfig { l_major: 1, l_exact: l, pa_bits: 1 };
            let err = pipeline(&flows, &cfg, &mut rng).unwrap().flows.mismatch_rate();
            assert!(err < prev, "l={l}: {err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn config_validation() {
        assert!(CodeConfig { l_major: 2, l_exact: 1, pa_bits: 1 }.validate().is_err());
        assert!(CodeConfig { l_major: 3, l_exact: 0, pa_bits: 1 }.validate().is_err());
        assert!(CodeConfig { l_major: 3, l_exact: 1, pa_bits: 0 }.validate().is_err());
        assert!(CodeConfig::default().validate().is_ok());
    }
}
