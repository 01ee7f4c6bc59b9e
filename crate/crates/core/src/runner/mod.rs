//! JSON-configured studies and their file outputs.

pub mod config;
pub mod output;
pub mod studies;

use std::path::{Path, PathBuf};

pub use config::{FanSettings, MapStudy, RunConfig, ScanStudy, Study, TiltStudy, TraceStudy};
pub use output::{sha256_hex, write_atomic, Manifest, ManifestEntry, OutputDir, MANIFEST};

use crate::elastodynamics::ElasticMaterial;
use crate::error::{Error, Result};
use crate::weld::Specimen;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

/// Study name as used on the command line and in manifests.
pub fn study_name(study: Study) -> String {
    serde_json::to_value(study).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Runs `config`, resolving relative paths against `base` (the config
/// file's directory). `out` overrides the configured output directory and
/// `threads` sizes a dedicated worker pool.
pub fn run(config: &RunConfig, base: &Path, out: Option<&Path>, threads: Option<usize>) -> Result<RunOutcome> {
    config.validate()?;
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?;
            pool.install(|| run_inner(config, base, out))
        }
        None => run_inner(config, base, out),
    }
}

fn run_inner(config: &RunConfig, base: &Path, out: Option<&Path>) -> Result<RunOutcome> {
    for m in &config.materials {
        ElasticMaterial::load(&base.join(m))?;
    }
    let specimen = Specimen::load(&base.join(&config.specimen))?;
    let root = out.map(Path::to_path_buf).unwrap_or_else(|| base.join(&config.output_dir));
    let mut dir = OutputDir::prepare(&root)?;
    match config.study {
        Study::Trace => studies::trace_study(config, &specimen, &mut dir)?,
        Study::OrientationMap => studies::orientation_map_study(config, &specimen, &mut dir)?,
        Study::Bscan => studies::bscan_study(config, &specimen, &mut dir)?,
        Study::TiltSweep => studies::tilt_study(config, &specimen, &mut dir)?,
        Study::Validate => studies::validate_study(&specimen, &mut dir)?,
    }
    let manifest = dir.finish(&study_name(config.study))?;
    Ok(RunOutcome { output_dir: root, manifest })
}
