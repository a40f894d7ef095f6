//! Scenario runner and file formats for the rotating ring lattice.
//!
//! A scenario file names one command and its parameters; [`run_scenario`]
//! executes it and writes one table per output. See [`config`] for the file
//! format and the README for every command's keys.

pub mod commands;
pub mod config;
pub mod table;

use std::path::{Path, PathBuf};

pub use config::{Command, ConfigError, Scenario};
pub use table::{emit_table, Format, Table};

/// Version string written into every output file.
pub const ARTIFACT: &str = concat!("ringlat ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for configuration errors, 3 for numerical failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io { .. } => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// overrides the scenario's own `format`
    pub format: Option<Format>,
    /// worker threads for sweeps; `None` uses the rayon default
    pub threads: Option<usize>,
    /// directory that relative paths inside the scenario resolve against
    pub base_dir: PathBuf,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            format: None,
            threads: None,
            base_dir: PathBuf::from("."),
        }
    }
}

/// Reads and parses a scenario file. Without a `name`, outputs are named
/// after the file stem (or the command, if the stem is not a usable name).
pub fn load_scenario(path: &Path) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut scenario = Scenario::parse(&text)?;
    if scenario.name.is_none() {
        scenario.name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .filter(|s| config::valid_stem(s))
            .map(str::to_owned);
    }
    Ok(scenario)
}

/// Runs the scenario and writes its tables.
///
/// Returns the written paths. If the command itself reports a failed check
/// (only `oracle-check` does), the files are still written and the result
/// is a [`RunError::Numerical`].
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<PathBuf>, RunError> {
    let params = config::Params::new(&scenario.params);
    let run = || commands::run(scenario.command, &params, &opts.base_dir);
    let report = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Invalid {
                key: "--threads".into(),
                reason: e.to_string(),
            })?
            .install(run)?,
        None => run()?,
    };
    params.finish()?;

    let format = opts.format.or(scenario.format).unwrap_or(Format::Csv);
    std::fs::create_dir_all(&opts.out_dir).map_err(|source| RunError::Io {
        path: opts.out_dir.clone(),
        source,
    })?;
    let echo = params.echo();
    let mut written = Vec::new();
    for (suffix, mut table) in report.outputs {
        let mut meta = vec![
            ("artifact".to_owned(), ARTIFACT.to_owned()),
            ("command".to_owned(), scenario.command.name().to_owned()),
            ("units".to_owned(), "hbar = 1; energies are frequencies in the units of the inputs".to_owned()),
            (
                "frames".to_owned(),
                "energies: rotating frame after momentum translation; momentum labels q: lab-frame lattice momenta".to_owned(),
            ),
        ];
        meta.extend(echo.iter().map(|(k, v)| (format!("param.{k}"), v.clone())));
        table.prepend_meta(meta);
        let name = if suffix.is_empty() {
            format!("{}.{}", scenario.stem(), format.extension())
        } else {
            format!("{}_{suffix}.{}", scenario.stem(), format.extension())
        };
        let path = opts.out_dir.join(name);
        let mut bytes = Vec::new();
        emit_table(&table, format, &mut bytes).map_err(|e| match e {
            table::TableError::Io(source) => RunError::Io { path: path.clone(), source },
            other => RunError::Numerical(other.to_string()),
        })?;
        std::fs::write(&path, bytes).map_err(|source| RunError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    match report.failure {
        Some(msg) => Err(RunError::Numerical(msg)),
        None => Ok(written),
    }
}
