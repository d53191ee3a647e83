//! Independent scenarios side by side, each in its own output directory.

use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::runner::{batch_files, run, RunManifest, RunOptions};
use crate::scenario::parse_scenario;

/// Caps the number of scenarios that run at once.
pub const WIDTH_VAR: &str = "QMACTION_BATCH_WIDTH";

#[derive(Debug)]
pub struct BatchItem {
    pub file: PathBuf,
    pub out_dir: PathBuf,
    pub result: Result<RunManifest, CliError>,
}

impl BatchItem {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(m) => m.exit_code(),
            Err(e) => e.exit_code(),
        }
    }
}

/// Width from [`WIDTH_VAR`]; unset means one worker per core.
pub fn width_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WIDTH_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{WIDTH_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Worst outcome wins: I/O, then configuration, then non-convergence.
pub fn combined_exit_code(items: &[BatchItem]) -> i32 {
    let codes: Vec<i32> = items.iter().map(BatchItem::exit_code).collect();
    [3, 1, 2].into_iter().find(|c| codes.contains(c)).unwrap_or(0)
}

fn one(file: &Path, out_root: &Path, quiet: bool) -> BatchItem {
    let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let out_dir = out_root.join(stem);
    let result = parse_scenario(file).and_then(|s| {
        let opts = RunOptions {
            out: Some(out_dir.clone()),
            stride: None,
            quiet,
            base_dir: file.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        run(&s, &opts)
    });
    BatchItem { file: file.to_path_buf(), out_dir, result }
}

/// Run every `*.json` scenario in `dir`; results come back in file-name order.
pub fn run_batch(
    dir: &Path,
    out_root: &Path,
    quiet: bool,
    width: Option<usize>,
) -> Result<Vec<BatchItem>, CliError> {
    let files = batch_files(dir)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = width {
            builder = builder.num_threads(w);
        }
        let pool = builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        Ok(pool.install(|| files.par_iter().map(|f| one(f, out_root, quiet)).collect()))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = width;
        Ok(files.iter().map(|f| one(f, out_root, quiet)).collect())
    }
}
