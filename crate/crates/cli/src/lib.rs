//! Configuration-driven experiment runner for the Kac walk, the Kac–Boltzmann
//! solver and the entropy-inequality certifier.
//!
//! A run reads one JSON config, executes one pipeline, and writes its
//! artifacts plus `manifest.json` into the output directory. Numeric
//! artifacts depend only on the config, the density files and the seed;
//! timing lives in the manifest alone.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipelines;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::info;

pub use artifacts::{sha256_hex, ArtifactEntry, Artifacts, Manifest};
pub use config::{parse_config, Command, DensitySource, ExperimentConfig, Params, SCHEMA_VERSION};
pub use error::RunError;
pub use pipelines::{certify_bundle, chaos_metrics, scan_n, ChaosReport, ScanRow, ScanTable, Summary};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    /// Overrides `output` in the config.
    pub out: Option<PathBuf>,
    /// Overrides `params.seed`.
    pub seed: Option<u64>,
    /// Worker threads; `None` lets rayon decide. Never changes results.
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub summary: Summary,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.hard_failures > 0 {
            1
        } else {
            0
        }
    }
}

fn inputs_hash(config_bytes: &[u8], extra: &[PathBuf], seed: Option<u64>) -> Result<String, RunError> {
    let mut all = Vec::from(config_bytes);
    for p in extra {
        all.extend_from_slice(b"\0file\0");
        all.extend(fs::read(p)?);
    }
    if let Some(s) = seed {
        all.extend_from_slice(format!("\0seed\0{s}").as_bytes());
    }
    Ok(sha256_hex(&all))
}

pub fn run(opts: &RunOptions) -> Result<Outcome, RunError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let bytes = fs::read(&opts.config)
        .map_err(|e| RunError::Schema(vec![format!("cannot read {}: {e}", opts.config.display())]))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| RunError::Schema(vec![format!("config is not UTF-8: {e}")]))?;
    let mut cfg = parse_config(&text, opts.seed.is_some(), opts.out.is_some())?;
    if opts.seed.is_some() {
        cfg.params.seed = opts.seed;
    }
    let base: PathBuf = opts.config.parent().map_or_else(PathBuf::new, Path::to_path_buf);
    let out_dir = match &opts.out {
        Some(o) => o.clone(),
        None => base.join(cfg.output.as_ref().expect("validated")),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Threads(e.to_string()))?;
    let threads = pool.current_num_threads();
    let hash = inputs_hash(&bytes, &cfg.input_files(&base), opts.seed)?;

    let art = Artifacts::create(&out_dir)?;
    info!("{} on {} -> {}", cfg.command.name(), cfg.density_label(), out_dir.display());
    let summary = pool.install(|| -> Result<Summary, RunError> {
        let f = cfg.load_density(&base)?;
        art.write_json("config.json", &cfg)?;
        pipelines::dispatch(&cfg, &f, cfg.params.seed, &art)
    })?;

    let manifest = Manifest {
        schema: SCHEMA_VERSION.into(),
        command: cfg.command.name().into(),
        inputs_sha256: hash,
        config_path: opts.config.display().to_string(),
        seed: cfg.params.seed,
        threads,
        versions: artifacts::versions(),
        started_unix_s: started,
        wall_clock_s: clock.elapsed().as_secs_f64(),
        hard_failures: summary.hard_failures,
        artifacts: art.entries(),
    };
    art.write_json("manifest.json", &manifest)?;
    Ok(Outcome { out_dir, summary, manifest })
}
