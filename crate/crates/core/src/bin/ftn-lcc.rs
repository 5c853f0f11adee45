use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ftn_lcc::codebook::Codebook;
use ftn_lcc::sim::{
    distance_csv, distance_profile, load_or_build, run_coded_sweep, run_uncoded_sweep,
    save_codebook, sweep_csv, SimConfig,
};

#[derive(Parser, Debug)]
#[command(name = "ftn-lcc", version, about = "FTN link simulator with a low-complexity classifier detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo BER sweep (uncoded hard or coded soft detection).
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Minimum class distance as a function of the window length.
    Distance {
        #[command(flatten)]
        sim: SimArgs,
        /// Window lengths to evaluate.
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,7,9,11,13,15")]
        np_list: Vec<usize>,
    },
    /// Build, cache or inspect a codebook.
    Codebook {
        #[command(flatten)]
        sim: SimArgs,
        /// Write the codebook to this file.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Inspect an existing codebook file instead of building one.
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Profile {
    Desk,
    Full,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Key/value (TOML) configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base profile when no config file is given.
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    profile: Profile,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    rolloff_h: Option<f64>,
    #[arg(long)]
    rolloff_v: Option<f64>,
    #[arg(long)]
    span: Option<usize>,
    /// Explicit channel taps, comma separated, centered on h_0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    taps: Option<Vec<f64>>,
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    n_l: Option<usize>,
    /// Eb/N0 points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ebn0: Option<Vec<f64>>,
    #[arg(long)]
    coded: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_blocks: Option<u64>,
    #[arg(long)]
    min_bit_errors: Option<u64>,
    #[arg(long)]
    edge_exclusion: bool,
    #[arg(long)]
    llr_clamp: Option<f64>,
    #[arg(long)]
    block_aware_edges: bool,
    /// Pruned tree search; same decisions as the linear scan, usually faster.
    #[arg(long)]
    tree_search: bool,
    #[arg(long)]
    size_cap: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self) -> anyhow::Result<SimConfig> {
        let mut cfg = match (&self.config, self.profile) {
            (Some(path), _) => SimConfig::from_file(path)
                .with_context(|| format!("reading {}", path.display()))?,
            (None, Profile::Desk) => SimConfig::desk(),
            (None, Profile::Full) => SimConfig::full(),
        };
        macro_rules! set {
            ($($field:ident <- $arg:expr),* $(,)?) => {
                $(if let Some(v) = $arg.clone() { cfg.$field = v; })*
            };
        }
        set!(
            tau <- self.tau,
            rolloff_h <- self.rolloff_h,
            rolloff_v <- self.rolloff_v,
            span <- self.span,
            block_len <- self.block_len,
            np <- self.np,
            nt <- self.nt,
            n_l <- self.n_l,
            ebn0_db_list <- self.ebn0,
            master_seed <- self.seed,
            max_blocks <- self.max_blocks,
            min_bit_errors <- self.min_bit_errors,
            llr_clamp <- self.llr_clamp,
            size_cap <- self.size_cap,
            workers <- self.workers,
        );
        if self.taps.is_some() {
            cfg.custom_taps = self.taps.clone();
        }
        if self.cache_dir.is_some() {
            cfg.cache_dir = self.cache_dir.clone();
        }
        cfg.coded |= self.coded;
        cfg.edge_exclusion |= self.edge_exclusion;
        cfg.block_aware_edges |= self.block_aware_edges;
        cfg.tree_search |= self.tree_search;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sweep { sim } => {
            let cfg = sim.config()?;
            cfg.validate()?;
            let points = if cfg.coded {
                run_coded_sweep(&cfg)?
            } else {
                run_uncoded_sweep(&cfg)?
            };
            sim.emit(&sweep_csv(&cfg, &points))?;
        }
        Command::Distance { sim, np_list } => {
            let cfg = sim.config()?;
            if np_list.is_empty() {
                bail!("empty --np-list");
            }
            let profile = distance_profile(&cfg, &np_list)?;
            sim.emit(&distance_csv(&cfg, &profile))?;
        }
        Command::Codebook { sim, save, load } => {
            let cfg = sim.config()?;
            let cb = match &load {
                Some(path) => {
                    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    let tau = if cfg.custom_taps.is_some() { 1.0 } else { cfg.tau };
                    Codebook::read_from(std::io::BufReader::new(file), tau, cfg.size_cap)?.into()
                }
                None => {
                    cfg.codebook_params()?;
                    load_or_build(&cfg)?
                }
            };
            if let Some(path) = &save {
                save_codebook(&cb, path)?;
            }
            let p = cb.params();
            let mut text = String::new();
            text.push_str(&format!("np = {}\nnt = {}\nrows = {}\n", p.np(), p.nt(), cb.len()));
            text.push_str(&format!("taps = {:?}\n", p.taps().as_slice()));
            text.push_str(&format!("min_interclass_distance = {}\n", cb.min_interclass_distance()?));
            sim.emit(&text)?;
        }
        Command::Selftest => {
            let checks = ftn_lcc::selftest::run_all()?;
            let mut ok = true;
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
