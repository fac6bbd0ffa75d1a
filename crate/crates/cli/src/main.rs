use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use drlab_core::auth::scenarios::{
    enroll, mitm_experiment, registration_abort_rate, registration_flow, session_transcript, tamper, transmit,
    MitmConfig, Party, RegistrationConfig, RegistrationMode,
};
use drlab_core::auth::wallet::Wallet;
use drlab_core::auth::{verification_code, verify_and_renew, AuthConfig, HashParams, RenewOutcome};
use drlab_core::distributions::{binomial_log_sum_identity, entropy_phi0};
use drlab_core::harness::{
    blocks_csv, run_simulation, simulation_csv, stages_csv, sweep, sweep_csv, Experiment, Scale, SimConfig,
    SweepSpec, CONFIG_KEYS,
};
use drlab_core::rng::seeded;
use drlab_core::statcheck::verify_suite;
use drlab_core::BitVector;
use rand::Rng;

#[derive(Parser)]
#[command(name = "drlab", version, about = "Deep Random key agreement laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write a one-row CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write per-block statistics here.
        #[arg(long)]
        blocks: Option<PathBuf>,
        /// Also write per-stage reconciliation accounting here.
        #[arg(long)]
        stages: Option<PathBuf>,
    },
    /// Run one of the three parameter sweeps.
    Sweep {
        /// 1: vector length, 2: exact-code length, 3: amplification word size.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        experiment: u8,
        /// Preset scale: desk or full.
        #[arg(long, default_value = "desk")]
        scale: Scale,
        /// Comma-separated sweep values replacing the preset ones.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the statistical check suite; exits with status 2 on any failure.
    Verify {
        /// Smaller Monte-Carlo sizes.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Entropy of the degraded distribution and the binomial log-sum identity.
    Entropy {
        /// Comma-separated even vector lengths.
        #[arg(long, value_delimiter = ',', default_value = "200,500,1000,2000,5000,10000")]
        n: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Honest and tampered authenticated sessions with secret renewal.
    AuthDemo {
        #[arg(long, default_value_t = 16)]
        secret_bits: u32,
        #[arg(long, default_value_t = 3)]
        reuse_limit: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Save the resulting wallet here, encrypted under --master.
        #[arg(long)]
        wallet: Option<PathBuf>,
        #[arg(long, default_value = "demo master key")]
        master: String,
    },
    /// Acceptance rates of honest, substituted and tampered sessions.
    MitmDemo {
        #[arg(long, default_value_t = 10_000)]
        sessions: usize,
        #[arg(long, default_value_t = 16)]
        secret_bits: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Registration of two parties through a trusted authority.
    RegistrationDemo {
        /// mutual or one-way.
        #[arg(long, default_value = "mutual")]
        mode: String,
        #[arg(long, default_value_t = 16)]
        secret_bits: u32,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// A config file plus one flag per config key.
#[derive(Args, Default)]
struct ConfigArgs {
    /// Flat `key = value` file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "n")]
    n: Option<String>,
    #[arg(long = "k")]
    k: Option<String>,
    #[arg(long = "k_cfg")]
    k_cfg: Option<String>,
    #[arg(long = "w")]
    w: Option<String>,
    #[arg(long = "repetitions")]
    repetitions: Option<String>,
    #[arg(long = "l_major")]
    l_major: Option<String>,
    #[arg(long = "l_exact")]
    l_exact: Option<String>,
    #[arg(long = "pa_bits")]
    pa_bits: Option<String>,
    /// omega1 or omega2.
    #[arg(long = "strategy")]
    strategy: Option<String>,
    /// true or false.
    #[arg(long = "avoidance")]
    avoidance: Option<String>,
    #[arg(long = "seed")]
    seed: Option<String>,
    #[arg(long = "min_residual")]
    min_residual: Option<String>,
}

impl ConfigArgs {
    fn flags(&self) -> [(&'static str, &Option<String>); 12] {
        [
            ("n", &self.n),
            ("k", &self.k),
            ("k_cfg", &self.k_cfg),
            ("w", &self.w),
            ("repetitions", &self.repetitions),
            ("l_major", &self.l_major),
            ("l_exact", &self.l_exact),
            ("pa_bits", &self.pa_bits),
            ("strategy", &self.strategy),
            ("avoidance", &self.avoidance),
            ("seed", &self.seed),
            ("min_residual", &self.min_residual),
        ]
    }

    /// File first, then flags, on top of `base`.
    fn apply(&self, base: &mut SimConfig) -> Result<()> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            base.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
        }
        for (key, value) in self.flags() {
            debug_assert!(CONFIG_KEYS.contains(&key));
            if let Some(v) = value {
                base.set(key, v)?;
            }
        }
        Ok(())
    }

    fn touched(&self) -> Vec<&'static str> {
        self.flags().into_iter().filter(|(_, v)| v.is_some()).map(|(k, _)| k).collect()
    }
}

#[derive(Args)]
struct OutputArgs {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time (otherwise written as 0 for byte-stable output).
    #[arg(long)]
    timing: bool,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn simulate(config: &ConfigArgs, output: &OutputArgs, blocks: Option<&Path>, stages: Option<&Path>) -> Result<()> {
    let mut cfg = SimConfig::default();
    config.apply(&mut cfg)?;
    let start = Instant::now();
    let result = run_simulation(&cfg)?;
    let wall = if output.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    if result.under_sampled {
        eprintln!(
            "warning: only {} distilled bits, below min_residual = {}",
            result.metrics.bits_out, cfg.min_residual
        );
    }
    emit(output.out.as_deref(), &simulation_csv(&result, wall))?;
    if let Some(path) = blocks {
        emit(Some(path), &blocks_csv(&result))?;
    }
    if let Some(path) = stages {
        emit(Some(path), &stages_csv(&result))?;
    }
    Ok(())
}

fn run_sweep(
    experiment: u8,
    scale: Scale,
    values: Option<Vec<usize>>,
    config: &ConfigArgs,
    output: &OutputArgs,
) -> Result<()> {
    let experiment = Experiment::from_id(experiment)?;
    let mut spec = SweepSpec::preset(experiment, scale);
    if config.touched().contains(&experiment.parameter()) {
        bail!("--{} is the swept parameter; use --values instead", experiment.parameter());
    }
    config.apply(&mut spec.base)?;
    if let Some(v) = values {
        if v.is_empty() {
            bail!("--values is empty");
        }
        spec.values = v;
    }
    for &v in &spec.values {
        spec.point(v)?.validate()?;
    }
    let rows = sweep(&spec, output.timing)?;
    emit(output.out.as_deref(), &sweep_csv(&rows))
}

/// Quotes a CSV field when it holds a delimiter or quote.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn verify(quick: bool, seed: u64) -> Result<ExitCode> {
    let results = verify_suite(quick, seed);
    println!("check,expected,observed,tolerance,result");
    for r in &results {
        let result = if r.passed { "pass" } else { "FAIL" };
        let row: Vec<String> = [&r.name, &r.expected, &r.observed, &r.tolerance, result]
            .iter()
            .map(|f| field(f))
            .collect();
        println!("{}", row.join(","));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    eprintln!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn entropy(ns: &[usize], out: Option<&Path>) -> Result<()> {
    let mut csv = String::from("n,entropy_nats,nats_per_coordinate,identity_lhs,identity_rhs,identity_rel_error\n");
    for &n in ns {
        let h = entropy_phi0(n)?;
        let (lhs, rhs) = binomial_log_sum_identity(n / 2);
        let rel = if lhs == 0.0 { rhs.abs() } else { ((lhs - rhs) / lhs).abs() };
        csv.push_str(&format!("{n},{h},{},{lhs},{rhs},{rel:e}\n", h / n as f64));
    }
    emit(out, &csv)
}

fn auth_demo(secret_bits: u32, reuse_limit: u32, seed: u64, wallet: Option<&Path>, master: &str) -> Result<()> {
    let params = HashParams::new(secret_bits)?;
    let cfg = AuthConfig {
        secret_bits,
        message_bits: 32,
        reuse_limit,
    };
    let mut rng = seeded(seed);
    let mut a = Party::new("alice");
    let mut b = Party::new("bob");
    enroll(&mut a, &mut b, params.half_bits(), &mut rng);
    let shape = Default::default();

    println!("session,scenario,code_sent,code_local,outcome,reuse_counter");
    for session in 0..(reuse_limit as usize + 2) {
        let t = session_transcript(&shape, &mut rng)?;
        let honest = session == 0 || session == reuse_limit as usize + 1;
        let received = if honest { transmit(&t)? } else { tamper(&t, &mut rng) };
        let s_a = a.wallet.get("bob").context("alice has no entry for bob")?.s_b.clone();
        let s_b = b.wallet.get("alice").context("bob has no entry for alice")?.s_b.clone();
        let sent = verification_code(&s_a, &t, &params)?;
        let local = verification_code(&s_b, &received, &params)?;
        // Stand-in for a distilled session key of the required length.
        let key = BitVector::from_bools((0..cfg.required_session_bits()).map(|_| rng.random::<bool>()));
        let outcome = verify_and_renew(&key, &mut b.wallet, "alice", sent, local, &cfg)?;
        if matches!(outcome, RenewOutcome::Accepted { .. }) {
            verify_and_renew(&key, &mut a.wallet, "bob", sent, sent, &cfg)?;
        }
        let label = match &outcome {
            RenewOutcome::Accepted { pad } => format!("accepted (renewed; {} pad bits)", pad.len()),
            RenewOutcome::Rejected { .. } => "rejected".to_string(),
            RenewOutcome::Compromised => "compromised".to_string(),
        };
        let counter = b.wallet.get("alice").map_or(0, |e| e.reuse_counter);
        println!(
            "{session},{},{sent:#04x},{local:#04x},{label},{counter}",
            if honest { "honest" } else { "tampered" }
        );
    }
    if let Some(path) = wallet {
        b.wallet.save(path, master.as_bytes(), &mut rng)?;
        let back = Wallet::load(path, master.as_bytes())?;
        eprintln!("saved bob's wallet to {} ({} entries, reload ok: {})", path.display(), back.len(), back == b.wallet);
    }
    Ok(())
}

fn mitm_demo(sessions: usize, secret_bits: u32, seed: u64, out: Option<&Path>) -> Result<()> {
    let stats = mitm_experiment(&MitmConfig {
        sessions,
        secret_bits,
        seed,
        ..MitmConfig::default()
    })?;
    let csv = format!(
        "scenario,sessions,accepted_rate,expected_rate\nhonest,{s},{},1\nfull_substitution,{},{},{e}\ntamper_one_bit,{s},{},{e}\n",
        stats.honest_rate(),
        2 * sessions,
        stats.substitution_rate(),
        stats.tamper_rate(),
        s = stats.sessions,
        e = stats.expected_forgery(),
    );
    emit(out, &csv)
}

fn registration_demo(mode: &str, secret_bits: u32, trials: usize, seed: u64) -> Result<()> {
    let mode = match mode {
        "mutual" => RegistrationMode::Mutual,
        "one-way" | "oneway" => RegistrationMode::OneWay,
        other => bail!("unknown registration mode '{other}' (mutual or one-way)"),
    };
    let params = HashParams::new(secret_bits)?;
    let mut rng = seeded(seed);
    let mut authority = Party::new("authority");
    let mut a = Party::new("alice");
    let mut b = Party::new("bob");
    enroll(&mut a, &mut authority, params.half_bits(), &mut rng);
    enroll(&mut authority, &mut b, params.half_bits(), &mut rng);
    let honest = RegistrationConfig {
        secret_bits,
        mode,
        ..RegistrationConfig::default()
    };
    let (ea, eb) = registration_flow(&authority, &mut a, &mut b, &honest, &mut rng)?;
    eprintln!(
        "honest registration: alice and bob share a secret: {}; half empty: {}",
        ea.s_b == eb.s_b && ea.s_a == eb.s_a,
        ea.is_half_empty()
    );
    let attacked = RegistrationConfig { mitm: true, ..honest };
    println!("scenario,trials,abort_rate");
    for (name, cfg) in [("honest", honest), ("substitution", attacked)] {
        println!("{name},{trials},{}", registration_abort_rate(&cfg, trials, seed)?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            config,
            output,
            blocks,
            stages,
        } => simulate(&config, &output, blocks.as_deref(), stages.as_deref())?,
        Command::Sweep {
            experiment,
            scale,
            values,
            config,
            output,
        } => run_sweep(experiment, scale, values, &config, &output)?,
        Command::Verify { quick, seed } => return verify(quick, seed),
        Command::Entropy { n, out } => entropy(&n, out.as_deref())?,
        Command::AuthDemo {
            secret_bits,
            reuse_limit,
            seed,
            wallet,
            master,
        } => auth_demo(secret_bits, reuse_limit, seed, wallet.as_deref(), &master)?,
        Command::MitmDemo {
            sessions,
            secret_bits,
            seed,
            out,
        } => mitm_demo(sessions, secret_bits, seed, out.as_deref())?,
        Command::RegistrationDemo {
            mode,
            secret_bits,
            trials,
            seed,
        } => registration_demo(&mode, secret_bits, trials, seed)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
