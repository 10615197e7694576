//! Command-line front end: file formats, run configuration and the
//! `generate`, `fit`, `eval` and `predict` subcommands.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! inconsistency, 4 I/O failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use args::{Cli, Command};
use commands::SynthSource;
use config::LoadedConfig;
use error::{CliError, CliResult};

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { config, preset, seed, out } => {
            let source = match (config, preset) {
                (Some(path), None) => SynthSource::File(path),
                (None, Some(preset)) => SynthSource::Preset(preset.into()),
                _ => return Err(CliError::Config("give exactly one of --config and --preset".into())),
            };
            commands::generate(&source, seed, &out)?;
        }
        Command::Fit { config, seed, out } => {
            let config = LoadedConfig::load(&config)?;
            commands::fit(&config, seed, out.as_deref())?;
        }
        Command::Eval { config, seed, out } => {
            let config = LoadedConfig::load(&config)?;
            commands::eval(&config, seed, out.as_deref())?;
        }
        Command::Predict { trace, pairs, out } => {
            let text = commands::predict(&trace, &pairs)?.to_text();
            match out {
                Some(path) => formats::write_text(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
