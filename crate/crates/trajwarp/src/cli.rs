//! Command-line pipeline orchestration: `generate`, `analyze`, `embed`.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 internal. A config file may
//! set the same keys as the long flags (kebab-case, `key = value` lines);
//! flags win.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cluster::{agglomerate, cut_at_distance, cut_by_max_gap, outlier_scores, ClusterAssignment};
use crate::dtw::{pairwise_matrix, DtwConfig};
use crate::error::{Error, Result};
use crate::io::{
    epoch_meta, read_assignment, read_matrix, read_patients, write_assignment, write_corpus_csv,
    write_dendrogram, write_embedding, write_embedding_diagnostics, write_epoch_meta, write_matrix,
    EpochMeta,
};
use crate::mds::classical_mds;
use crate::plot::{scatter_svg, Trail};
use crate::preprocess::{preprocess_corpus, PreprocessConfig, PreprocessReport};
use crate::synth::{generate_corpus, PerturbationType, SynthConfig};

#[derive(Debug, Parser)]
#[command(
    name = "trajwarp",
    version,
    about = "Detect abnormal vital-sign trajectories via DTW distances, average-linkage clustering and MDS maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic HR/RR corpus CSV.
    Generate(GenerateArgs),
    /// Run the full pipeline on a corpus CSV: preprocess, pairwise DTW,
    /// clustering, outlier ranking.
    Analyze(AnalyzeArgs),
    /// Embed a distance matrix in 2-D and render the cluster map.
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output corpus CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; the corpus is bit-identical for identical seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of synthetic patients.
    #[arg(long)]
    pub patients: Option<usize>,
    /// Recording length per patient, in days.
    #[arg(long)]
    pub days: Option<u32>,
    #[arg(long)]
    pub diurnal_amplitude: Option<f64>,
    #[arg(long)]
    pub secondary_amplitude: Option<f64>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    #[arg(long)]
    pub perturbation_fraction: Option<f64>,
    #[arg(long)]
    pub perturbation_scale: Option<f64>,
    #[arg(long)]
    pub noise_cov_lo: Option<f64>,
    #[arg(long)]
    pub noise_cov_hi: Option<f64>,
    /// Minutes a type-2/3 ramp takes to reach full magnitude before holding
    /// there; defaults to the whole perturbation window.
    #[arg(long)]
    pub ramp_rise: Option<usize>,
    /// Perturbed file as INDEX:TYPE (TYPE is 1, 2 or 3); repeatable.
    /// Defaults to two files of each type on the first six patients.
    #[arg(long = "perturb")]
    pub perturb: Vec<String>,
    /// Generate a fully normal corpus.
    #[arg(long)]
    pub no_perturb: bool,
    /// Config file with the same keys as the long flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input corpus CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Directory for all output artifacts.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub epoch_minutes: Option<usize>,
    #[arg(long)]
    pub median_window: Option<usize>,
    #[arg(long)]
    pub gap_tolerance: Option<i64>,
    /// Sakoe-Chiba band radius; omit for unconstrained DTW.
    #[arg(long)]
    pub band: Option<usize>,
    /// Reuse (or create) a distance-matrix cache at this path and skip the
    /// DTW stage on a hit.
    #[arg(long)]
    pub matrix_cache: Option<PathBuf>,
    /// Bound the worker count for the pairwise stage.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Cut the dendrogram at this linkage distance instead of the max-gap rule.
    #[arg(long)]
    pub cut_distance: Option<f64>,
    /// Plausibility bound as CHANNEL:MIN:MAX; repeatable. Defaults to
    /// temp:34:43.
    #[arg(long = "bound")]
    pub bounds: Vec<String>,
    /// Disable all plausibility screening.
    #[arg(long)]
    pub no_bounds: bool,
    /// Config file with the same keys as the long flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Distance-matrix artifact from `analyze`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Assignment CSV from `analyze`.
    #[arg(long)]
    pub assignment: PathBuf,
    /// Directory for the coordinates CSV and SVG map.
    #[arg(long)]
    pub out: PathBuf,
    /// Connect this patient's epochs chronologically on the map.
    #[arg(long)]
    pub highlight_patient: Option<String>,
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::EvenWindow { .. } | Error::EmptyPerturbationWindow => 1,
        Error::Data(_)
        | Error::Malformed { .. }
        | Error::Corrupt { .. }
        | Error::Csv(_)
        | Error::Io { .. }
        | Error::MissingChannel { .. }
        | Error::DegenerateChannel { .. }
        | Error::TooFewReadings { .. }
        | Error::TooFewEpochs { .. }
        | Error::NonFinite { .. }
        | Error::Asymmetric { .. }
        | Error::NegativeDistance { .. }
        | Error::NonzeroDiagonal { .. }
        | Error::LengthMismatch { .. }
        | Error::ChannelMismatch { .. }
        | Error::WindowExceedsLength { .. }
        | Error::Dimensionality { .. } => 2,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Embed(args) => run_embed(args),
    }
}

/// `key = value` lines, `#` comments. Keys are the kebab-case flag names.
fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: std::str::FromStr>(
    map: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            Error::Config(format!("config key '{key}': cannot parse '{raw}'"))
        }),
    }
}

fn parse_perturb_spec(spec: &str) -> Result<(usize, PerturbationType)> {
    let (idx, kind) = spec.split_once(':').ok_or_else(|| {
        Error::Config(format!("--perturb expects INDEX:TYPE, got '{spec}'"))
    })?;
    let idx = idx
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("--perturb index '{idx}' is not an integer")))?;
    Ok((idx, PerturbationType::parse(kind.trim())?))
}

fn parse_bound_spec(spec: &str) -> Result<(String, (f64, f64))> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "--bound expects CHANNEL:MIN:MAX, got '{spec}'"
        )));
    }
    let lo = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("--bound min '{}' is not a number", parts[1])))?;
    let hi = parts[2]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("--bound max '{}' is not a number", parts[2])))?;
    if lo > hi {
        return Err(Error::Config(format!("--bound {spec}: min exceeds max")));
    }
    Ok((parts[0].trim().to_string(), (lo, hi)))
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };
    let defaults = SynthConfig::default();
    let mut config = SynthConfig {
        seed: args
            .seed
            .or(config_value(&file, "seed")?)
            .unwrap_or(defaults.seed),
        n_patients: args
            .patients
            .or(config_value(&file, "patients")?)
            .unwrap_or(defaults.n_patients),
        duration_days: args
            .days
            .or(config_value(&file, "days")?)
            .unwrap_or(defaults.duration_days),
        diurnal_amplitude: args
            .diurnal_amplitude
            .or(config_value(&file, "diurnal-amplitude")?)
            .unwrap_or(defaults.diurnal_amplitude),
        secondary_amplitude: args
            .secondary_amplitude
            .or(config_value(&file, "secondary-amplitude")?)
            .unwrap_or(defaults.secondary_amplitude),
        noise_scale: args
            .noise_scale
            .or(config_value(&file, "noise-scale")?)
            .unwrap_or(defaults.noise_scale),
        perturbation_fraction: args
            .perturbation_fraction
            .or(config_value(&file, "perturbation-fraction")?)
            .unwrap_or(defaults.perturbation_fraction),
        perturbation_scale: args
            .perturbation_scale
            .or(config_value(&file, "perturbation-scale")?)
            .unwrap_or(defaults.perturbation_scale),
        noise_cov_range: (
            args.noise_cov_lo
                .or(config_value(&file, "noise-cov-lo")?)
                .unwrap_or(defaults.noise_cov_range.0),
            args.noise_cov_hi
                .or(config_value(&file, "noise-cov-hi")?)
                .unwrap_or(defaults.noise_cov_range.1),
        ),
        ramp_rise_minutes: args
            .ramp_rise
            .or(config_value(&file, "ramp-rise")?)
            .or(defaults.ramp_rise_minutes),
        ..defaults
    };

    if config.n_patients == 0 {
        return Err(Error::Config("--patients must be at least 1".into()));
    }
    if args.no_perturb {
        config.perturbed_files = Vec::new();
    } else if !args.perturb.is_empty() {
        config.perturbed_files = args
            .perturb
            .iter()
            .map(|s| parse_perturb_spec(s))
            .collect::<Result<Vec<_>>>()?;
    } else if config.n_patients < 6 {
        return Err(Error::Config(format!(
            "default perturbation plan needs at least 6 patients, got {}; pass --perturb or --no-perturb",
            config.n_patients
        )));
    }
    config.validate()?;

    let records = generate_corpus(&config)?;
    write_corpus_csv(&records, &args.out)?;

    println!(
        "wrote {}: {} patients x {} minutes",
        args.out.display(),
        config.n_patients,
        config.n_samples()
    );
    if config.perturbed_files.is_empty() {
        println!("perturbed files: none");
    } else {
        let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let width = crate::synth::patient_id_width(config.n_patients);
        for (idx, kind) in &config.perturbed_files {
            by_type
                .entry(kind.to_string())
                .or_default()
                .push(format!("p{idx:0width$}"));
        }
        let summary: Vec<String> = by_type
            .iter()
            .map(|(kind, files)| format!("type {kind}: {}", files.join(" ")))
            .collect();
        println!(
            "perturbed files: {} ({})",
            config.perturbed_files.len(),
            summary.join("; ")
        );
        let window = config.perturbation_window();
        println!(
            "perturbation window: last {} minutes per file ({:.1} h)",
            window.len(),
            window.len() as f64 / 60.0
        );
        println!(
            "total: {} abnormal minutes = {:.1} abnormal hours",
            config.abnormal_minutes(),
            config.abnormal_minutes() as f64 / 60.0
        );
    }
    Ok(())
}

struct AnalyzeOutcome {
    n_patients: usize,
    n_epochs: usize,
    matrix_seconds: f64,
    matrix_skipped: bool,
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };
    let defaults = PreprocessConfig::default();
    let mut preprocess = PreprocessConfig {
        epoch_minutes: args
            .epoch_minutes
            .or(config_value(&file, "epoch-minutes")?)
            .unwrap_or(defaults.epoch_minutes),
        median_window: args
            .median_window
            .or(config_value(&file, "median-window")?)
            .unwrap_or(defaults.median_window),
        gap_tolerance_minutes: args
            .gap_tolerance
            .or(config_value(&file, "gap-tolerance")?)
            .unwrap_or(defaults.gap_tolerance_minutes),
        ..defaults
    };
    if args.no_bounds {
        preprocess.plausibility_bounds.clear();
    } else if !args.bounds.is_empty() {
        preprocess.plausibility_bounds = args
            .bounds
            .iter()
            .map(|s| parse_bound_spec(s))
            .collect::<Result<BTreeMap<_, _>>>()?;
    }
    preprocess.validate()?;

    let dtw_config = DtwConfig {
        band_radius: args.band.or(config_value(&file, "band")?),
    };
    let threads = args.threads.or(config_value(&file, "threads")?);
    let cut_distance = args.cut_distance.or(config_value(&file, "cut-distance")?);

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;

    let body = || -> Result<()> {
        let (records, warnings) = read_patients(&args.input)?;
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        let (epochs, reports) = preprocess_corpus(&records, &preprocess)?;
        for report in &reports {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
        if epochs.len() < 2 {
            return Err(Error::Data(format!(
                "fewer than 2 usable epochs ({}); each epoch needs {} contiguous minutes",
                epochs.len(),
                preprocess.epoch_minutes
            )));
        }

        let meta = epoch_meta(&epochs);
        write_epoch_meta(&meta, &args.out_dir.join("epochs.csv"))?;

        // The matrix is the expensive artifact: reuse an explicit cache when
        // it matches, otherwise compute and persist.
        let started = Instant::now();
        let mut skipped = false;
        let matrix = match &args.matrix_cache {
            Some(cache) if cache.exists() => {
                let cached = read_matrix(cache)?;
                if cached.epoch_ids() != meta.iter().map(|m| m.epoch_id).collect::<Vec<_>>() {
                    return Err(Error::Data(format!(
                        "matrix cache {} does not match this corpus (epoch ids differ); remove it or pick another path",
                        cache.display()
                    )));
                }
                skipped = true;
                println!("matrix stage skipped (cache hit: {})", cache.display());
                cached
            }
            Some(cache) => {
                let matrix = pairwise_matrix(&epochs, &dtw_config)?;
                write_matrix(&matrix, cache)?;
                matrix
            }
            None => {
                let matrix = pairwise_matrix(&epochs, &dtw_config)?;
                write_matrix(&matrix, &args.out_dir.join("matrix.bin"))?;
                matrix
            }
        };
        let matrix_seconds = started.elapsed().as_secs_f64();

        let dendrogram = agglomerate(&matrix)?;
        write_dendrogram(&dendrogram, &args.out_dir.join("dendrogram.csv"))?;

        let assignment = match cut_distance {
            Some(threshold) => cut_at_distance(&dendrogram, threshold),
            None => cut_by_max_gap(&dendrogram),
        };
        write_assignment(&assignment, &meta, &args.out_dir.join("assignment.csv"))?;

        let scores = outlier_scores(&matrix)?;
        write_outliers(&scores, &meta, &args.out_dir.join("outliers.csv"))?;

        let outcome = AnalyzeOutcome {
            n_patients: records.len(),
            n_epochs: epochs.len(),
            matrix_seconds,
            matrix_skipped: skipped,
        };
        let report = render_report(
            &args.input,
            &preprocess,
            cut_distance,
            &outcome,
            &reports,
            &assignment,
            &scores,
            &meta,
        );
        fs::write(args.out_dir.join("report.txt"), &report)
            .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;
        print!("{report}");
        Ok(())
    };

    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(body)
        }
        None => body(),
    }
}

fn write_outliers(
    scores: &[(usize, f64)],
    meta: &[EpochMeta],
    path: &Path,
) -> Result<()> {
    let lookup: BTreeMap<usize, &EpochMeta> = meta.iter().map(|m| (m.epoch_id, m)).collect();
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(["rank", "epoch_id", "patient_id", "start_minute", "end_minute", "score"])
        .map_err(Error::Csv)?;
    for (rank, (epoch_id, score)) in scores.iter().enumerate() {
        let m = lookup
            .get(epoch_id)
            .ok_or_else(|| Error::Data(format!("no metadata for epoch {epoch_id}")))?;
        writer
            .write_record([
                (rank + 1).to_string(),
                epoch_id.to_string(),
                m.patient_id.clone(),
                m.start_time.to_string(),
                (m.start_time + m.n_samples as i64 - 1).to_string(),
                format!("{score}"),
            ])
            .map_err(Error::Csv)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Data(format!("csv flush failed: {e}")))?;
    fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

#[allow(clippy::too_many_arguments)]
fn render_report(
    input: &Path,
    preprocess: &PreprocessConfig,
    cut_distance: Option<f64>,
    outcome: &AnalyzeOutcome,
    reports: &[PreprocessReport],
    assignment: &ClusterAssignment,
    scores: &[(usize, f64)],
    meta: &[EpochMeta],
) -> String {
    use std::fmt::Write;
    let lookup: BTreeMap<usize, &EpochMeta> = meta.iter().map(|m| (m.epoch_id, m)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "corpus: {}", input.display());
    let _ = writeln!(
        out,
        "patients: {}, epochs: {} x {} minutes",
        outcome.n_patients, outcome.n_epochs, preprocess.epoch_minutes
    );
    if outcome.matrix_skipped {
        let _ = writeln!(out, "distance matrix: reused from cache");
    } else {
        let _ = writeln!(
            out,
            "distance matrix: {} pairs in {:.1} s",
            outcome.n_epochs * (outcome.n_epochs - 1) / 2,
            outcome.matrix_seconds
        );
    }

    // Pooled implausible fractions, averaged over screened patients.
    let mut pooled: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for report in reports {
        for (channel, fraction) in &report.implausible {
            let entry = pooled.entry(channel.clone()).or_insert((0.0, 0));
            entry.0 += fraction;
            entry.1 += 1;
        }
    }
    for (channel, (sum, count)) in &pooled {
        let _ = writeln!(
            out,
            "implausible fraction ({channel}, mean over patients): {:.3}",
            sum / *count as f64
        );
    }

    match cut_distance {
        Some(threshold) => {
            let _ = writeln!(
                out,
                "clusters: {} (manual cut at linkage distance {threshold})",
                assignment.k()
            );
        }
        None => {
            let _ = writeln!(
                out,
                "clusters: {} (max-gap cut, gap {:.6})",
                assignment.k(),
                assignment.cut_gap()
            );
        }
    }
    let sizes = assignment.cluster_sizes();
    for (label, size) in sizes.iter().enumerate() {
        let _ = writeln!(out, "  cluster {label}: {size} epochs");
    }
    let _ = writeln!(out, "top outliers:");
    let _ = writeln!(out, "  rank  epoch  patient      minutes          score");
    for (rank, (epoch_id, score)) in scores.iter().take(10).enumerate() {
        if let Some(m) = lookup.get(epoch_id) {
            let _ = writeln!(
                out,
                "  {:>4}  {:>5}  {:<11}  {:>6}..{:<6}  {:.4}",
                rank + 1,
                epoch_id,
                m.patient_id,
                m.start_time,
                m.start_time + m.n_samples as i64 - 1,
                score
            );
        }
    }
    out
}

fn run_embed(args: EmbedArgs) -> Result<()> {
    let matrix = read_matrix(&args.matrix)?;
    let (assignment, meta) = read_assignment(&args.assignment)?;

    let label_of: BTreeMap<usize, usize> = assignment.assignments().iter().copied().collect();
    for id in matrix.epoch_ids() {
        if !label_of.contains_key(id) {
            return Err(Error::Data(format!(
                "assignment file has no label for epoch {id}; matrix and assignment disagree"
            )));
        }
    }

    let trail = match &args.highlight_patient {
        Some(patient) => {
            let mut mine: Vec<&EpochMeta> =
                meta.iter().filter(|m| &m.patient_id == patient).collect();
            if mine.is_empty() {
                let mut available: Vec<&str> =
                    meta.iter().map(|m| m.patient_id.as_str()).collect();
                available.sort();
                available.dedup();
                return Err(Error::Data(format!(
                    "unknown patient id '{patient}'; available: {}",
                    available.join(", ")
                )));
            }
            mine.sort_by_key(|m| m.start_time);
            Some(Trail {
                patient_id: patient.clone(),
                epoch_ids: mine.iter().map(|m| m.epoch_id).collect(),
            })
        }
        None => None,
    };

    let embedding = classical_mds(&matrix, 2)?;

    fs::create_dir_all(&args.out).map_err(|e| Error::io(args.out.display().to_string(), e))?;
    write_embedding(&embedding, &args.out.join("embedding.csv"))?;
    write_embedding_diagnostics(&embedding, &args.out.join("embedding_diagnostics.csv"))?;
    let svg = scatter_svg(&embedding, &label_of, trail.as_ref())?;
    fs::write(args.out.join("scatter.svg"), &svg)
        .map_err(|e| Error::io(args.out.display().to_string(), e))?;

    println!(
        "embedded {} epochs: stress {:.6}, clamped eigenvalue mass {:.4}",
        matrix.n_epochs(),
        embedding.stress(),
        embedding.negative_mass_fraction()
    );
    println!(
        "wrote {}, {}, {}",
        args.out.join("embedding.csv").display(),
        args.out.join("embedding_diagnostics.csv").display(),
        args.out.join("scatter.svg").display()
    );
    Ok(())
}
