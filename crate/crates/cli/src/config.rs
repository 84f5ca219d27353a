//! Run configuration: a TOML file overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use phonedist::corpus::{PhoneMapping, DEFAULT_SAMPLE_RATE};
use phonedist::{ClassTable, FeatureTable};

pub const EXPORT_FILE: &str = "distributions.jsonl";

/// Keys accepted in the `--config` file. Relative paths are resolved against
/// the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub units_path: Option<PathBuf>,
    pub alignments_path: Option<PathBuf>,
    pub mapping_path: Option<PathBuf>,
    pub features_path: Option<PathBuf>,
    pub classes_path: Option<PathBuf>,
    pub export_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub model_id: Option<String>,
    pub sample_rate: Option<u32>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.units_path,
            &mut cfg.alignments_path,
            &mut cfg.mapping_path,
            &mut cfg.features_path,
            &mut cfg.classes_path,
            &mut cfg.export_path,
            &mut cfg.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub units_path: Option<PathBuf>,
    pub alignments_path: Option<PathBuf>,
    pub mapping_path: Option<PathBuf>,
    pub features_path: Option<PathBuf>,
    pub classes_path: Option<PathBuf>,
    pub export_path: PathBuf,
    pub output_dir: PathBuf,
    pub model_id: Option<String>,
    pub sample_rate: u32,
}

/// Flag values; each one overrides the config file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub units: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub classes: Option<PathBuf>,
    pub export: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: Option<String>,
    pub sample_rate: Option<u32>,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Self {
        let output_dir = flags
            .output
            .or(file.output_dir)
            .unwrap_or_else(|| PathBuf::from("."));
        let export_path = flags
            .export
            .or(file.export_path)
            .unwrap_or_else(|| output_dir.join(EXPORT_FILE));
        RunConfig {
            units_path: flags.units.or(file.units_path),
            alignments_path: flags.alignments.or(file.alignments_path),
            mapping_path: flags.mapping.or(file.mapping_path),
            features_path: flags.features.or(file.features_path),
            classes_path: flags.classes.or(file.classes_path),
            export_path,
            output_dir,
            model_id: flags.model.or(file.model_id),
            sample_rate: flags
                .sample_rate
                .or(file.sample_rate)
                .unwrap_or(DEFAULT_SAMPLE_RATE),
        }
    }

    pub fn units(&self) -> Result<&Path> {
        required(self.units_path.as_deref(), "units_path (--units)")
    }

    pub fn alignments(&self) -> Result<&Path> {
        required(
            self.alignments_path.as_deref(),
            "alignments_path (--alignments)",
        )
    }

    /// The existing distribution export, or an error pointing at `ingest`.
    pub fn export(&self) -> Result<&Path> {
        if !self.export_path.is_file() {
            bail!(
                "distribution export {} not found; run `phonedist ingest` first",
                self.export_path.display()
            );
        }
        Ok(&self.export_path)
    }

    pub fn mapping(&self) -> Result<PhoneMapping> {
        match &self.mapping_path {
            None => Ok(PhoneMapping::timit_default()),
            Some(p) => Ok(PhoneMapping::parse(&read(p, "mapping")?)
                .with_context(|| p.display().to_string())?),
        }
    }

    pub fn features(&self) -> Result<FeatureTable> {
        match &self.features_path {
            None => Ok(FeatureTable::default_english()),
            Some(p) => Ok(FeatureTable::parse(&read(p, "feature table")?)
                .with_context(|| p.display().to_string())?),
        }
    }

    pub fn classes(&self) -> Result<ClassTable> {
        match &self.classes_path {
            None => Ok(ClassTable::default_english()),
            Some(p) => Ok(ClassTable::parse(&read(p, "class table")?)
                .with_context(|| p.display().to_string())?),
        }
    }

    pub fn output_file(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.output_dir)
            .with_context(|| format!("creating output directory {}", self.output_dir.display()))?;
        Ok(self.output_dir.join(name))
    }
}

fn required<'a>(p: Option<&'a Path>, what: &str) -> Result<&'a Path> {
    let Some(p) = p else {
        bail!("{what} is not set")
    };
    if !p.exists() {
        bail!("{} does not exist", p.display());
    }
    Ok(p)
}

fn read(p: &Path, what: &str) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {what} {}", p.display()))
}
