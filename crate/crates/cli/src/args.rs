use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Preset;

/// Copula mixed-membership blockmodel: simulate networks, fit them and
/// score held-out links.
#[derive(Debug, Parser)]
#[command(name = "cmmsb", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a network from synthetic network settings.
    Generate {
        /// TOML synthetic network settings.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Built-in benchmark instead of a settings file.
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one chain on a dataset.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate held-out link prediction.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print fitted link probabilities for listed pairs.
    Predict {
        /// Directory written by `fit`.
        #[arg(long)]
        trace: PathBuf,
        /// File of `i j` lines.
        #[arg(long)]
        pairs: PathBuf,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    SyntheticFull,
    SyntheticPartial,
}

impl From<PresetArg> for Preset {
    fn from(arg: PresetArg) -> Self {
        match arg {
            PresetArg::SyntheticFull => Preset::SyntheticFull,
            PresetArg::SyntheticPartial => Preset::SyntheticPartial,
        }
    }
}
