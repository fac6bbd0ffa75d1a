//! End-to-end simulation runner, parameter sweeps and CSV output.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::adversary::Strategy;
use crate::error::{Error, Result};
use crate::protocol::SamplingParams;
use crate::reconcile::{pipeline, CodeConfig, Flows, StageAccounting};
use crate::recombine::{run_block, BlockCounters, PositionConfig};
use crate::rng::{stream, Purpose};

/// One simulation execution: `repetitions` blocks of `w·n` positions each.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub k: f64,
    /// Sampling constant, in units of `1/(2√(nk))`.
    pub k_cfg: f64,
    pub w: usize,
    pub repetitions: usize,
    pub l_major: usize,
    pub l_exact: usize,
    pub pa_bits: u32,
    pub strategy: Strategy,
    pub avoidance: bool,
    pub seed: u64,
    /// Distilled bits required before the run counts as sampled enough.
    pub min_residual: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            k: 12.0,
            k_cfg: 12.0,
            w: 100,
            repetitions: 4,
            l_major: 1,
            l_exact: 1,
            pa_bits: 1,
            strategy: Strategy::Omega1,
            avoidance: true,
            seed: 1,
            min_residual: 100,
        }
    }
}

/// Keys accepted in config files and as command-line overrides.
pub const CONFIG_KEYS: [&str; 12] = [
    "n",
    "k",
    "k_cfg",
    "w",
    "repetitions",
    "l_major",
    "l_exact",
    "pa_bits",
    "strategy",
    "avoidance",
    "seed",
    "min_residual",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfiguration(format!("cannot parse {key} = '{value}'")))
}

fn parse_flag(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        _ => Err(Error::InvalidConfiguration(format!("cannot parse {key} = '{value}'"))),
    }
}

impl SimConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "n" => self.n = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "k_cfg" => self.k_cfg = parse_value(key, value)?,
            "w" => self.w = parse_value(key, value)?,
            "repetitions" => self.repetitions = parse_value(key, value)?,
            "l_major" => self.l_major = parse_value(key, value)?,
            "l_exact" => self.l_exact = parse_value(key, value)?,
            "pa_bits" => self.pa_bits = parse_value(key, value)?,
            "strategy" => self.strategy = value.parse()?,
            "avoidance" => self.avoidance = parse_flag(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "min_residual" => self.min_residual = parse_value(key, value)?,
            other => return Err(Error::InvalidConfiguration(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfiguration(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        format!(
            "n = {}\nk = {}\nk_cfg = {}\nw = {}\nrepetitions = {}\nl_major = {}\nl_exact = {}\npa_bits = {}\nstrategy = {}\navoidance = {}\nseed = {}\nmin_residual = {}\n",
            self.n,
            self.k,
            self.k_cfg,
            self.w,
            self.repetitions,
            self.l_major,
            self.l_exact,
            self.pa_bits,
            self.strategy,
            self.avoidance,
            self.seed,
            self.min_residual
        )
    }

    pub fn code(&self) -> CodeConfig {
        CodeConfig {
            l_major: self.l_major,
            l_exact: self.l_exact,
            pa_bits: self.pa_bits,
        }
    }

    pub fn beta(&self) -> f64 {
        SamplingParams::beta_for(self.n, self.k, self.k_cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
        if self.n < 2 || self.n % 2 != 0 {
            return bad(format!("n must be even and at least 2, got {}", self.n));
        }
        if self.w == 0 || self.w > self.n {
            return bad(format!("w must lie in 1..={}, got {}", self.n, self.w));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.k > 1.0) || !self.k.is_finite() {
            return bad(format!("k must exceed 1, got {}", self.k));
        }
        if !(self.k_cfg > 0.0) || !self.k_cfg.is_finite() {
            return bad(format!("k_cfg must be positive, got {}", self.k_cfg));
        }
        self.code().validate()
    }

    /// Bits on the wire per block under the window convention, `6·n·w`.
    /// The config with every code parameter reset; equal keys mean equal
    /// block-stage output.
    pub fn block_stage_key(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            l_major: d.l_major,
            l_exact: d.l_exact,
            pa_bits: d.pa_bits,
            min_residual: d.min_residual,
            ..self.clone()
        }
    }

    pub fn bits_in_per_block(&self) -> usize {
        6 * self.n * self.w
    }
}

impl fmt::Display for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} k={} K={} w={} R={} L_major={} L_exact={} PA={} {}{}",
            self.n,
            self.k,
            self.k_cfg,
            self.w,
            self.repetitions,
            self.l_major,
            self.l_exact,
            self.pa_bits,
            self.strategy,
            if self.avoidance { " avoidance" } else { "" }
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Metrics {
    /// Net error rate `2·min(P, 1−P)` with `P = P(e_A ≠ e_B)`.
    pub eps: f64,
    /// Net knowledge rate `2·(max(Q, 1−Q) − 1/2)` with `Q = P(e_E = e_B)`.
    pub eps_prime: f64,
    /// Cryptologic limit lower bound over `bits_in`.
    pub cl: f64,
    /// Same bound over everything actually transmitted (`6n²` per block).
    pub cl_full: f64,
    pub discard_rate: f64,
    pub contributive_rate: f64,
    pub bits_in: usize,
    pub bits_out: usize,
}

/// The three output formulas. `residual_bits` over `denominator_bits` is the
/// distilled rate; `cl` is clamped at zero.
pub fn compute_metrics(p_err: f64, p_opp_agree: f64, residual_bits: usize, denominator_bits: usize) -> Metrics {
    let p = p_err.clamp(0.0, 1.0);
    let q = p_opp_agree.clamp(0.0, 1.0);
    let eps = 2.0 * p.min(1.0 - p);
    let eps_prime = 2.0 * (q.max(1.0 - q) - 0.5);
    let rate = if denominator_bits == 0 {
        0.0
    } else {
        residual_bits as f64 / denominator_bits as f64
    };
    Metrics {
        eps,
        eps_prime,
        cl: (rate * (1.0 - eps - eps_prime)).max(0.0),
        cl_full: 0.0,
        discard_rate: 0.0,
        contributive_rate: 0.0,
        bits_in: denominator_bits,
        bits_out: residual_bits,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSummary {
    pub m: u64,
    pub kept: u64,
    pub contributive_rate: f64,
    pub mean_abs_dv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub config: SimConfig,
    pub metrics: Metrics,
    pub counters: BlockCounters,
    pub blocks: Vec<BlockSummary>,
    pub stages: Vec<StageAccounting>,
    /// Raw rates on the kept positions, before any code stage.
    pub raw_error: f64,
    pub raw_opponent_agreement: f64,
    pub transmitted_bits: usize,
    /// Fewer than `min_residual` distilled bits survived.
    pub under_sampled: bool,
}

/// Output of the block stage: kept bits of all blocks in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStage {
    pub flows: Flows,
    pub counters: BlockCounters,
    pub blocks: Vec<BlockSummary>,
    pub transmitted_bits: usize,
}

/// Runs steps 1–5 for every block in parallel.
pub fn run_blocks(config: &SimConfig) -> Result<RawStage> {
    config.validate()?;
    let cfg = PositionConfig {
        beta: config.beta(),
        strategy: config.strategy,
        avoidance: config.avoidance,
    };
    let outputs = (0..config.repetitions as u64)
        .into_par_iter()
        .map(|m| run_block(config.seed, m, config.n, config.w, config.k, &cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut counters = BlockCounters::default();
    let (mut a, mut b, mut e) = (Vec::new(), Vec::new(), Vec::new());
    let mut transmitted_bits = 0;
    let mut blocks = Vec::with_capacity(outputs.len());
    for out in outputs {
        counters.merge(&out.counters);
        transmitted_bits += out.transmitted_bits;
        blocks.push(BlockSummary {
            m: out.m,
            kept: out.counters.kept,
            contributive_rate: out.counters.contributive_rate(),
            mean_abs_dv: out.counters.mean_abs_dv(),
        });
        a.extend(out.bits_a);
        b.extend(out.bits_b);
        e.extend(out.bits_e);
    }
    Ok(RawStage {
        flows: Flows::new(a, b, e)?,
        counters,
        blocks,
        transmitted_bits,
    })
}

/// Runs the reconciliation pipeline on a block-stage result.
pub fn distill(config: &SimConfig, raw: &RawStage) -> Result<SimOutput> {
    config.validate()?;
    let mut rng = stream(config.seed, 0, 0, Purpose::Pipeline);
    let piped = pipeline(&raw.flows, &config.code(), &mut rng)?;
    let flows = &piped.flows;
    let bits_out = flows.len();
    let bits_in = config.bits_in_per_block() * config.repetitions;
    let mut metrics = if flows.is_empty() {
        // Nothing survived: report the worst error and no knowledge.
        compute_metrics(0.5, 0.5, 0, bits_in)
    } else {
        compute_metrics(flows.mismatch_rate(), flows.opponent_agreement(), bits_out, bits_in)
    };
    metrics.cl_full = if flows.is_empty() {
        0.0
    } else {
        compute_metrics(flows.mismatch_rate(), flows.opponent_agreement(), bits_out, raw.transmitted_bits).cl
    };
    metrics.discard_rate = raw.counters.discard_rate();
    metrics.contributive_rate = raw.counters.contributive_rate();

    Ok(SimOutput {
        config: config.clone(),
        metrics,
        counters: raw.counters.clone(),
        blocks: raw.blocks.clone(),
        stages: piped.stages,
        raw_error: raw.flows.mismatch_rate(),
        raw_opponent_agreement: raw.flows.opponent_agreement(),
        transmitted_bits: raw.transmitted_bits,
        under_sampled: bits_out < config.min_residual,
    })
}

/// Runs all blocks, concatenates kept bits in block order and runs the
/// reconciliation pipeline on the result.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutput> {
    distill(config, &run_blocks(config)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Vector length `n`, no code stages.
    Length,
    /// Exact-code length with a fixed majority code.
    ExactLength,
    /// Privacy amplification word size.
    Amplification,
}

impl Experiment {
    pub fn id(self) -> u8 {
        match self {
            Self::Length => 1,
            Self::ExactLength => 2,
            Self::Amplification => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Self::Length),
            2 => Ok(Self::ExactLength),
            3 => Ok(Self::Amplification),
            _ => Err(Error::InvalidConfiguration(format!("experiment must be 1, 2 or 3, got {id}"))),
        }
    }

    /// The config key this experiment varies.
    pub fn parameter(self) -> &'static str {
        match self {
            Self::Length => "n",
            Self::ExactLength => "l_exact",
            Self::Amplification => "pa_bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Runs in minutes on one machine.
    Desk,
    /// The original large parameter ranges.
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            _ => Err(Error::InvalidConfiguration(format!("unknown scale '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub base: SimConfig,
    pub values: Vec<usize>,
}

impl SweepSpec {
    pub fn preset(experiment: Experiment, scale: Scale) -> Self {
        let base = SimConfig {
            k: 12.0,
            k_cfg: 12.0,
            ..SimConfig::default()
        };
        let (base, values) = match (experiment, scale) {
            (Experiment::Length, Scale::Desk) => (
                SimConfig {
                    w: 100,
                    repetitions: 6,
                    ..base
                },
                vec![500, 1000, 2000, 4000],
            ),
            (Experiment::Length, Scale::Full) => (
                SimConfig {
                    w: 700,
                    repetitions: 10,
                    ..base
                },
                (1..=10).map(|i| 5000 * i).collect(),
            ),
            (Experiment::ExactLength, Scale::Desk) => (
                SimConfig {
                    n: 1500,
                    w: 200,
                    repetitions: 40,
                    l_major: 31,
                    ..base
                },
                (1..=10).collect(),
            ),
            (Experiment::ExactLength, Scale::Full) => (
                SimConfig {
                    n: 30_000,
                    w: 1000,
                    repetitions: 10,
                    l_major: 31,
                    ..base
                },
                (1..=10).collect(),
            ),
            (Experiment::Amplification, Scale::Desk) => (
                SimConfig {
                    n: 1000,
                    w: 200,
                    repetitions: 200,
                    l_major: 31,
                    l_exact: 6,
                    ..base
                },
                (2..=12).collect(),
            ),
            (Experiment::Amplification, Scale::Full) => (
                SimConfig {
                    n: 10_000,
                    w: 3000,
                    repetitions: 10,
                    l_major: 31,
                    l_exact: 6,
                    ..base
                },
                (2..=12).collect(),
            ),
        };
        Self {
            experiment,
            base,
            values,
        }
    }

    /// The config for one sweep point.
    pub fn point(&self, value: usize) -> Result<SimConfig> {
        let mut cfg = self.base.clone();
        cfg.set(self.experiment.parameter(), &value.to_string())?;
        if self.experiment == Experiment::Length {
            cfg.w = cfg.w.min(value);
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: usize,
    pub output: SimOutput,
    /// Seconds, or zero when timing is off.
    pub wall_time: f64,
}

/// Runs every point of `spec` in order. Points that differ only in code
/// parameters share one block stage; `wall_time` still counts the block
/// stage for every point. With `timing` off, `wall_time` is written as zero
/// so the CSV depends only on config and seed.
pub fn sweep(spec: &SweepSpec, timing: bool) -> Result<Vec<SweepRow>> {
    let mut cache: Option<(SimConfig, RawStage, f64)> = None;
    let mut rows = Vec::with_capacity(spec.values.len());
    for &v in &spec.values {
        let cfg = spec.point(v)?;
        let key = cfg.block_stage_key();
        let hit = matches!(&cache, Some((k, _, _)) if *k == key);
        if !hit {
            let start = Instant::now();
            let raw = run_blocks(&cfg)?;
            cache = Some((key, raw, start.elapsed().as_secs_f64()));
        }
        let (_, raw, raw_time) = cache.as_ref().expect("filled above");
        let start = Instant::now();
        let output = distill(&cfg, raw)?;
        let wall_time = if timing { raw_time + start.elapsed().as_secs_f64() } else { 0.0 };
        rows.push(SweepRow {
            sweep_value: v,
            output,
            wall_time,
        });
    }
    Ok(rows)
}

pub const SWEEP_HEADER: &str = "sweep_value,eps,eps_prime,cl,discard_rate,contributive_rate,wall_time,\
n,w,repetitions,l_major,l_exact,pa_bits,strategy,avoidance,bits_in,bits_out,transmitted_bits,cl_full,\
cl_convention,kept,raw_error,raw_opponent_agreement,under_sampled";

fn sweep_line(out: &mut String, value: usize, o: &SimOutput, wall_time: f64) {
    let c = &o.config;
    let m = &o.metrics;
    let convention = if c.w == c.n { "full" } else { "window" };
    let _ = writeln!(
        out,
        "{},{:.9},{:.9},{:.9e},{:.9},{:.9},{:.3},{},{},{},{},{},{},{},{},{},{},{},{:.9e},{},{},{:.9},{:.9},{}",
        value,
        m.eps,
        m.eps_prime,
        m.cl,
        m.discard_rate,
        m.contributive_rate,
        wall_time,
        c.n,
        c.w,
        c.repetitions,
        c.l_major,
        c.l_exact,
        c.pa_bits,
        c.strategy,
        c.avoidance,
        m.bits_in,
        m.bits_out,
        o.transmitted_bits,
        m.cl_full,
        convention,
        o.counters.kept,
        o.raw_error,
        o.raw_opponent_agreement,
        o.under_sampled
    );
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        sweep_line(&mut out, r.sweep_value, &r.output, r.wall_time);
    }
    out
}

/// A single run in the sweep schema, with `sweep_value` set to `n`.
pub fn simulation_csv(o: &SimOutput, wall_time: f64) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    sweep_line(&mut out, o.config.n, o, wall_time);
    out
}

pub fn blocks_csv(o: &SimOutput) -> String {
    let mut out = String::from("m,kept,contributive_rate,mean_abs_dv\n");
    for b in &o.blocks {
        let _ = writeln!(out, "{},{},{:.9},{:.9e}", b.m, b.kept, b.contributive_rate, b.mean_abs_dv);
    }
    out
}

pub fn stages_csv(o: &SimOutput) -> String {
    let mut out = String::from("stage,word_len,input_bits,output_bits,discard_fraction\n");
    let lens = [o.config.l_major, o.config.l_exact, o.config.pa_bits as usize];
    for (s, len) in o.stages.iter().zip(lens) {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.9}",
            s.stage,
            len,
            s.input_bits,
            s.output_bits,
            s.discard_fraction(len)
        );
    }
    out
}
