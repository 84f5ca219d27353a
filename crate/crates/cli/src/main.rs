mod config;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, Parser, Subcommand};

use phonedist::export::{
    class_entropy_csv, clusters_csv, correlation_csv, entropy_csv, matrix_csv, merges_csv,
    nearest_csv, read_matrix_csv, round9, sig9, skipped_csv,
};
use phonedist::pipeline::{estimate_all, ingest, read_export, IngestConfig};
use phonedist::report::{
    class_means, feature_correlation, nearest_rows, rounded_entropy_rows, subset_labels,
    vowel_consonant, Report,
};
use phonedist::stats::Subset;
use phonedist::{
    correlate_matrices, cut, jsd_matrix, to_newick, utilization, ward_cluster, Distribution,
    JsdMatrix,
};

use config::{FileConfig, Overrides, RunConfig};

/// Phonetic categories as distributions over discrete speech units.
#[derive(Parser)]
#[command(name = "phonedist", version, about)]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for every output file
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Only use unit sequences of this model
    #[arg(long, global = true, value_name = "ID")]
    model: Option<String>,
    /// Unit-sequence file, or directory searched for *.jsonl
    #[arg(long, global = true, value_name = "PATH")]
    units: Option<PathBuf>,
    /// Directory searched for .phn alignments
    #[arg(long, global = true, value_name = "DIR")]
    alignments: Option<PathBuf>,
    /// Phone mapping table (default: shipped 61 to 40 reduction)
    #[arg(long, global = true, value_name = "FILE")]
    mapping: Option<PathBuf>,
    /// Phonological feature table (default: shipped table)
    #[arg(long, global = true, value_name = "FILE")]
    features: Option<PathBuf>,
    /// Articulatory class table (default: shipped table)
    #[arg(long, global = true, value_name = "FILE")]
    classes: Option<PathBuf>,
    /// Distribution export (default: <output>/distributions.jsonl)
    #[arg(long, global = true, value_name = "FILE")]
    export: Option<PathBuf>,
    /// Sample rate of the alignments in Hz
    #[arg(long, global = true, value_name = "HZ")]
    sample_rate: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign frames to phones and write per-category unit counts
    Ingest,
    /// Per-category and per-class entropy
    Entropy,
    /// Pairwise Jensen-Shannon divergence matrix
    Divergence,
    /// Ward clustering of the divergence matrix
    Cluster {
        /// Also write a flat partition into this many clusters
        #[arg(long, value_name = "K")]
        cut: Option<usize>,
    },
    /// Correlate divergence with phonological feature distance
    Correlate {
        /// Category subset; every subset when omitted
        #[arg(long)]
        subset: Option<Subset>,
        /// Correlate against this matrix CSV instead of feature distance
        #[arg(long, value_name = "FILE")]
        against: Option<PathBuf>,
    },
    /// Closest categories by divergence
    Nearest {
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Query category (repeatable); every category when omitted
        #[arg(long)]
        query: Vec<String>,
    },
    /// Every analysis in one JSON report
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PHONEDIST_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => return usage_error(e),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Prints a parse error followed by the usage of the offending subcommand.
fn usage_error(e: clap::Error) -> ExitCode {
    let code = e.exit_code();
    let _ = e.print();
    if e.use_stderr() {
        let mut cmd = Cli::command();
        cmd.build();
        let sub = std::env::args()
            .skip(1)
            .find_map(|a| cmd.find_subcommand(&a).cloned());
        let mut target = sub.unwrap_or(cmd);
        eprintln!("\n{}", target.render_usage());
    }
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(
        file,
        Overrides {
            units: cli.units,
            alignments: cli.alignments,
            mapping: cli.mapping,
            features: cli.features,
            classes: cli.classes,
            export: cli.export,
            output: cli.output,
            model: cli.model,
            sample_rate: cli.sample_rate,
        },
    );
    match cli.command {
        Command::Ingest => cmd_ingest(&cfg),
        Command::Entropy => cmd_entropy(&cfg),
        Command::Divergence => cmd_divergence(&cfg),
        Command::Cluster { cut } => cmd_cluster(&cfg, cut),
        Command::Correlate { subset, against } => cmd_correlate(&cfg, subset, against.as_deref()),
        Command::Nearest { k, query } => cmd_nearest(&cfg, k, &query),
        Command::Report => cmd_report(&cfg),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn load_distributions(cfg: &RunConfig) -> Result<Vec<Distribution>> {
    let path = cfg.export()?;
    let export = read_export(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(estimate_all(&export)?)
}

fn load_jsd(cfg: &RunConfig) -> Result<JsdMatrix> {
    let dists = load_distributions(cfg)?;
    if dists.len() < 2 {
        bail!(
            "divergence needs at least 2 categories, the export has {}",
            dists.len()
        );
    }
    Ok(jsd_matrix(&dists)?)
}

fn cmd_ingest(cfg: &RunConfig) -> Result<()> {
    let config = IngestConfig {
        units_path: cfg.units()?.to_path_buf(),
        alignments_path: cfg.alignments()?.to_path_buf(),
        mapping: cfg.mapping()?,
        model_id: cfg.model_id.clone(),
        sample_rate: cfg.sample_rate,
    };
    let outcome = ingest(&config)?;
    let export_path = &cfg.export_path;
    if let Some(dir) = export_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = fs::File::create(export_path)
        .with_context(|| format!("creating {}", export_path.display()))?;
    outcome.export.write(BufWriter::new(f))?;
    write(
        &cfg.output_file("skipped_segments.csv")?,
        &skipped_csv(&outcome.skipped)?,
    )?;

    let d = &outcome.diagnostics;
    println!("model_id: {}", d.model_id);
    println!("inventory_size: {}", d.omega_size);
    println!("utterances: {}", d.utterances);
    println!("utterances_ingested: {}", d.utterances_ingested);
    println!(
        "utterances_without_alignment: {}",
        d.utterances_without_alignment
    );
    println!("assigned_frames: {}", d.assigned_frames);
    println!("observations: {}", d.observations);
    println!("conserved: {}", d.conserved());
    println!("skipped_segments: {}", d.skipped_segments);
    println!("categories: {}", d.categories);
    println!("utilization: {}", sig9(d.utilization));
    Ok(())
}

fn cmd_entropy(cfg: &RunConfig) -> Result<()> {
    let dists = load_distributions(cfg)?;
    let classes = cfg.classes()?;
    let rows = rounded_entropy_rows(&dists)?;
    write(&cfg.output_file("entropy.csv")?, &entropy_csv(&rows)?)?;
    match class_means(&rows, &classes) {
        Ok(means) => {
            let flat: Vec<(String, usize, f64)> = means
                .into_iter()
                .map(|m| (m.class, m.members, m.mean_entropy_bits))
                .collect();
            write(
                &cfg.output_file("class_entropy.csv")?,
                &class_entropy_csv(&flat)?,
            )?;
        }
        Err(e) => log::warn!("class entropy unavailable: {e}"),
    }
    let mean = rows.iter().map(|r| r.entropy_bits).sum::<f64>() / rows.len().max(1) as f64;
    println!("categories: {}", rows.len());
    println!("mean_entropy_bits: {}", sig9(mean));
    println!("utilization: {}", sig9(utilization(&dists)?));
    if let Ok(vc) = vowel_consonant(&rows, &classes) {
        let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), sig9);
        println!("vowel_mean_entropy_bits: {}", show(vc.vowels));
        println!("consonant_mean_entropy_bits: {}", show(vc.consonants));
    }
    Ok(())
}

fn cmd_divergence(cfg: &RunConfig) -> Result<()> {
    let jsd = load_jsd(cfg)?;
    write(&cfg.output_file("jsd_matrix.csv")?, &matrix_csv(&jsd)?)
}

fn cmd_cluster(cfg: &RunConfig, k: Option<usize>) -> Result<()> {
    let jsd = load_jsd(cfg)?;
    let tree = ward_cluster(&jsd)?;
    write(&cfg.output_file("merges.csv")?, &merges_csv(&tree)?)?;
    write(
        &cfg.output_file("dendrogram.nwk")?,
        &format!("{}\n", to_newick(&tree)),
    )?;
    if let Some(k) = k {
        write(
            &cfg.output_file("clusters.csv")?,
            &clusters_csv(&cut(&tree, k)?)?,
        )?;
    }
    Ok(())
}

fn cmd_correlate(cfg: &RunConfig, subset: Option<Subset>, against: Option<&Path>) -> Result<()> {
    let jsd = load_jsd(cfg)?;
    let classes = cfg.classes()?;
    let subsets: Vec<Subset> = subset.map_or_else(|| Subset::ALL.to_vec(), |s| vec![s]);
    let other = match against {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(read_matrix_csv(&text).with_context(|| p.display().to_string())?)
        }
        None => None,
    };
    let features = if other.is_none() {
        Some(cfg.features()?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for s in subsets {
        let result = match (&other, &features) {
            (Some(m), _) => {
                let shared: Vec<String> = jsd
                    .labels()
                    .iter()
                    .filter(|l| m.index_of(l).is_some())
                    .cloned()
                    .collect();
                subset_labels(&shared, s, &classes).and_then(|labels| {
                    let mut c =
                        correlate_matrices(&jsd, m, Some(&labels)).map_err(|e| e.to_string())?;
                    c.subset = s;
                    c.r = round9(c.r);
                    c.p_value = round9(c.p_value);
                    Ok(c)
                })
            }
            (None, Some(f)) => feature_correlation(&jsd, f, &classes, s),
            (None, None) => unreachable!("features are loaded when no matrix is given"),
        };
        match result {
            Ok(c) => rows.push(c),
            Err(e) if subset.is_some() => bail!("{s} subset: {e}"),
            Err(e) => log::warn!("{s} subset skipped: {e}"),
        }
    }
    for r in &rows {
        println!(
            "{}: r = {} (p = {}, {} pairs)",
            r.subset,
            sig9(r.r),
            sig9(r.p_value),
            r.n_pairs
        );
    }
    write(
        &cfg.output_file("correlation.csv")?,
        &correlation_csv(&rows)?,
    )
}

fn cmd_nearest(cfg: &RunConfig, k: usize, queries: &[String]) -> Result<()> {
    let jsd = load_jsd(cfg)?;
    let rows = nearest_rows(&jsd, queries, k)?;
    write(&cfg.output_file("nearest.csv")?, &nearest_csv(&rows)?)
}

fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let path = cfg.export()?;
    let export = read_export(path).with_context(|| format!("reading {}", path.display()))?;
    let report = Report::build(&export, &cfg.features()?, &cfg.classes()?)?;
    write(&cfg.output_file("report.json")?, &report.to_json())
}
