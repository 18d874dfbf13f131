//! The `kcgml` command line: stage orchestration, configuration and the run
//! manifest.

pub mod cli;
pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

use std::io::Write;

use clap::Parser;

use crate::cli::{Cli, Command, VariantArg};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, ExitKind};
use crate::manifest::RunManifest;
use crate::stages::Variant;

/// Effective configuration: manifest or config file, then flags.
pub fn resolve_config(cli: &Cli) -> CliResult<PipelineConfig> {
    let mut cfg = match (&cli.manifest, &cli.config) {
        (Some(m), _) => RunManifest::load(m)?.config,
        (None, Some(c)) => PipelineConfig::load(c)?,
        (None, None) => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    match &cli.command {
        Command::Ingest(a) => a.apply(&mut cfg),
        Command::Complete(a) => a.apply(&mut cfg),
        Command::Embed(a) => a.embed.apply(&mut cfg),
        Command::Analyze(a) => a.apply(&mut cfg),
        Command::Pipeline(a) => {
            a.input.apply(&mut cfg);
            a.complete.apply(&mut cfg);
            a.embed.apply(&mut cfg);
            a.analyze.apply(&mut cfg);
        }
    }
    Ok(cfg)
}

pub fn run(cli: &Cli, log: &mut (dyn Write + Send)) -> CliResult<()> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::new(ExitKind::Internal, "threads", e.to_string()))?;
    let timings = pool.install(|| -> CliResult<_> {
        Ok(match &cli.command {
            Command::Ingest(_) => stages::cmd_ingest(&cfg, log)?.1,
            Command::Complete(_) => stages::cmd_complete(&cfg, log)?.1,
            Command::Embed(e) => {
                let variants = match e.variant {
                    Some(VariantArg::Raw) => vec![Variant::Raw],
                    Some(VariantArg::Kc) => vec![Variant::Kc],
                    Some(VariantArg::Both) => vec![Variant::Raw, Variant::Kc],
                    None => stages::available_variants(&cfg),
                };
                stages::cmd_embed(&cfg, &variants, log)?
            }
            Command::Analyze(_) => stages::cmd_analyze(&cfg, log)?.1,
            Command::Pipeline(_) => stages::cmd_pipeline(&cfg, log)?,
        })
    })?;
    for (stage, secs) in &timings {
        let _ = writeln!(log, "[{stage}] {secs:.2}s");
    }
    let completed: Vec<String> = timings.into_iter().map(|(stage, _)| stage).collect();
    manifest::update(&cfg.out, &cfg, &completed)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs them. Usage errors
/// come back as clap errors so callers can print them and exit with 2.
pub fn run_args<I, T>(args: I, log: &mut (dyn Write + Send)) -> Result<CliResult<()>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(run(&cli, log))
}
