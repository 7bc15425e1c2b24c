//! Command-line front end.
//!
//! Three subcommands cover the workflow: `sweep` measures mean energy
//! efficiency per (PA model, cluster size), `rl` runs the select-measure-
//! update learning loop against a persistent store, and `cdf` extracts
//! per-user throughput distributions. Every output is CSV led by a
//! `# config:` line recording the resolved inputs, written atomically;
//! identical flags and seeds reproduce identical bytes.
//!
//! Exit codes: 0 success, 1 command-line usage error, 2 runtime failure.

use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use remsim_core::pa::PaClass;
use remsim_core::rem::{export_store, import_store, RemStore};
use remsim_core::scenario::{load_scenario, Scenario, UeLocationPattern};
use remsim_core::simulator::{run_drop, throughput_cdf};
use remsim_core::Error;

#[derive(Parser)]
#[command(
    name = "remsim",
    version,
    about = "Cell-free massive MIMO downlink simulator with a learning radio environment map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure mean EE per (PA model, cluster size) over repeated drops.
    Sweep(SweepArgs),
    /// Run the epsilon-greedy learning loop against a store file.
    Rl(RlArgs),
    /// Emit the per-user throughput CDF for each requested cluster size.
    Cdf(CdfArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario TOML file; omit for the built-in default deployment.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Base seed; drops, pattern generation and exploration derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of users to place when no pattern file is given.
    #[arg(long, default_value_t = 40)]
    ues: usize,
    /// File with one `x,y` position per line; overrides random placement.
    #[arg(long)]
    pattern_file: Option<PathBuf>,
    /// Pattern-recognition grid step in metres.
    #[arg(long, default_value_t = 5.0)]
    grid: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cluster sizes to sweep; defaults to 1..=n_aps.
    #[arg(long, value_delimiter = ',')]
    actions: Vec<u32>,
    /// PA models to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![PaClass::ClassA, PaClass::ClassB, PaClass::Perfect])]
    pa: Vec<PaClass>,
    /// Drops per (model, cluster size) point.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    drops: u64,
}

#[derive(Args)]
struct RlArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cluster sizes the learner may pick; defaults to 1..=n_aps.
    #[arg(long, value_delimiter = ',')]
    actions: Vec<u32>,
    /// PA model applied to every AP for the episodes.
    #[arg(long, default_value_t = PaClass::ClassA)]
    pa: PaClass,
    /// Episodes to run.
    #[arg(long, default_value_t = 100)]
    episodes: u64,
    /// Exploration numerator: epsilon = epsilon0 / visits.
    #[arg(long, default_value_t = 1.0)]
    epsilon0: f64,
    /// Store file; created when absent, updated atomically at exit.
    #[arg(long)]
    store: PathBuf,
}

#[derive(Args)]
struct CdfArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cluster sizes to evaluate; defaults to 1..=n_aps.
    #[arg(long, value_delimiter = ',')]
    actions: Vec<u32>,
    /// PA model applied to every AP.
    #[arg(long, default_value_t = PaClass::Perfect)]
    pa: PaClass,
}

/// Scalar seed derivation (splitmix64 step) so each consumer of the base
/// seed gets an independent, reproducible stream.
fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

const SALT_PATTERN: u64 = 1;
const SALT_DROP: u64 = 2;
const SALT_RL: u64 = 3;

fn load_or_default_scenario(path: &Option<PathBuf>) -> Result<Scenario, Error> {
    match path {
        Some(p) => load_scenario(p),
        None => Ok(Scenario::default()),
    }
}

/// Pattern from the file when given, else uniform random placement derived
/// from the base seed.
fn resolve_pattern(common: &CommonArgs, scenario: &Scenario) -> Result<UeLocationPattern, Error> {
    match &common.pattern_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            UeLocationPattern::parse(&text)
        }
        None => {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(common.seed, SALT_PATTERN));
            UeLocationPattern::generate(common.ues, &scenario.area, &mut rng)
        }
    }
}

fn resolve_actions(actions: &[u32], scenario: &Scenario) -> Result<Vec<u32>, Error> {
    let n_aps = scenario.n_aps() as u32;
    if actions.is_empty() {
        return Ok((1..=n_aps).collect());
    }
    let mut out = actions.to_vec();
    out.sort_unstable();
    out.dedup();
    for &a in &out {
        if a == 0 || a > n_aps {
            return Err(Error::InvalidArgument(format!(
                "action {a} outside 1..={n_aps} for this scenario"
            )));
        }
    }
    Ok(out)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let io_err = |e: std::io::Error| Error::Io { path: path.display().to_string(), source: e };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

fn join_u32(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Echo line placed atop every CSV: the resolved value of each input,
/// defaults included.
fn config_line(command: &str, common: &CommonArgs, extra: &[(&str, String)]) -> String {
    let scenario = common
        .scenario
        .as_ref()
        .map_or_else(|| "default".to_string(), |p| p.display().to_string());
    let pattern = common
        .pattern_file
        .as_ref()
        .map_or_else(|| format!("random:ues={}", common.ues), |p| format!("file:{}", p.display()));
    let mut line = format!(
        "# config: command={command} scenario={scenario} seed={} pattern={pattern} grid={}",
        common.seed, common.grid
    );
    for (k, v) in extra {
        line.push_str(&format!(" {k}={v}"));
    }
    line
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Error> {
    let scenario = load_or_default_scenario(&args.common.scenario)?;
    scenario.validate()?;
    let pattern = resolve_pattern(&args.common, &scenario)?;
    let actions = resolve_actions(&args.actions, &scenario)?;

    let mut out = config_line(
        "sweep",
        &args.common,
        &[
            ("actions", join_u32(&actions)),
            ("pa", args.pa.iter().map(PaClass::as_str).collect::<Vec<_>>().join(",")),
            ("drops", args.drops.to_string()),
        ],
    );
    out.push('\n');
    out.push_str("pa_model,no_ap,mean_ee,n_drops\n");
    for &model in &args.pa {
        for &action in &actions {
            let mut total_bits = 0.0;
            let mut total_energy = 0.0;
            for d in 0..args.drops {
                let seed = derive_seed(args.common.seed, SALT_DROP + d);
                let r = run_drop(&scenario, &pattern, action as usize, model, seed)?;
                total_bits += r.total_bits;
                total_energy += r.total_energy_j;
            }
            let mean_ee = total_bits / total_energy;
            out.push_str(&format!("{model},{action},{mean_ee},{}\n", args.drops));
        }
    }
    write_atomic(&args.common.out, &out)
}

fn cmd_rl(args: &RlArgs) -> Result<(), Error> {
    let scenario = load_or_default_scenario(&args.common.scenario)?;
    scenario.validate()?;
    let pattern = resolve_pattern(&args.common, &scenario)?;
    let actions = resolve_actions(&args.actions, &scenario)?;
    if !(args.epsilon0.is_finite() && args.epsilon0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon0 must be non-negative, got {}",
            args.epsilon0
        )));
    }

    // A pre-existing store fixes the grid; the flag applies to new stores.
    let mut store = if args.store.exists() {
        import_store(&args.store)?
    } else {
        RemStore::new(args.common.grid)?
    };
    store.record_hardware(&scenario);
    let key = store.key_for(&pattern)?;

    let mut log = config_line(
        "rl",
        &args.common,
        &[
            ("actions", join_u32(&actions)),
            ("pa", args.pa.as_str().to_string()),
            ("episodes", args.episodes.to_string()),
            ("epsilon0", args.epsilon0.to_string()),
            ("store", args.store.display().to_string()),
            ("effective_grid", store.grid_m().to_string()),
        ],
    );
    log.push('\n');
    log.push_str("episode,key,action,ee\n");
    for episode in 0..args.episodes {
        let visits = store.visits(&key).max(1);
        let epsilon = (args.epsilon0 / visits as f64).min(1.0);
        let action = store.select_action(
            &key,
            epsilon,
            &actions,
            derive_seed(args.common.seed, SALT_RL + 2 * episode),
        )?;
        let drop_seed = derive_seed(args.common.seed, SALT_RL + 2 * episode + 1);
        let result = run_drop(&scenario, &pattern, action as usize, args.pa, drop_seed)?;
        store.update(&key, action, &result)?;
        log.push_str(&format!("{episode},{key},{action},{}\n", result.ee));
    }
    export_store(&store, &args.store)?;
    write_atomic(&args.common.out, &log)
}

fn cmd_cdf(args: &CdfArgs) -> Result<(), Error> {
    let scenario = load_or_default_scenario(&args.common.scenario)?;
    scenario.validate()?;
    let pattern = resolve_pattern(&args.common, &scenario)?;
    let actions = resolve_actions(&args.actions, &scenario)?;

    let mut out = config_line(
        "cdf",
        &args.common,
        &[("actions", join_u32(&actions)), ("pa", args.pa.as_str().to_string())],
    );
    out.push('\n');
    out.push_str("no_ap,throughput_bps,cdf\n");
    // One drop per cluster size, same channel seed for comparability.
    let seed = derive_seed(args.common.seed, SALT_DROP);
    for &action in &actions {
        let r = run_drop(&scenario, &pattern, action as usize, args.pa, seed)?;
        for (tput, q) in throughput_cdf(&r)? {
            out.push_str(&format!("{action},{tput},{q}\n"));
        }
    }
    write_atomic(&args.common.out, &out)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Rl(a) => cmd_rl(a),
        Command::Cdf(a) => cmd_cdf(a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version displays are successes, not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli) {
        let name = Cli::command().get_name().to_string();
        eprintln!("{name}: error: {e}");
        std::process::exit(2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_separates_salts_and_bases() {
        assert_ne!(derive_seed(0, SALT_PATTERN), derive_seed(0, SALT_DROP));
        assert_ne!(derive_seed(1, SALT_DROP), derive_seed(2, SALT_DROP));
        assert_eq!(derive_seed(7, 9), derive_seed(7, 9));
    }

    #[test]
    fn action_resolution_defaults_and_validates() {
        let s = Scenario::default();
        assert_eq!(resolve_actions(&[], &s).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(resolve_actions(&[3, 1, 3], &s).unwrap(), vec![1, 3]);
        assert!(resolve_actions(&[0], &s).is_err());
        assert!(resolve_actions(&[7], &s).is_err());
    }
}
