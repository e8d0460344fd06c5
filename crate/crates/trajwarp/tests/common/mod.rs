//! Shared fixtures for the integration suites: the full synthetic pipeline
//! run over a fixed seed list, plus ground-truth labelling of every epoch.
//!
//! Each test binary uses its own subset of this module.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use trajwarp::cluster::{agglomerate, cut_by_max_gap, outlier_scores, ClusterAssignment};
use trajwarp::dtw::{pairwise_matrix, DtwConfig};
use trajwarp::preprocess::{preprocess_corpus, PreprocessConfig};
use trajwarp::synth::{generate_corpus, PerturbationType, SynthConfig};

/// Ground-truth class of one epoch of the default synthetic experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    Normal,
    Full(PerturbationType),
    Transitional(PerturbationType),
}

pub struct SeedRun {
    pub seed: u64,
    /// Ground truth per epoch id (epoch ids are row indices).
    pub truth: Vec<Truth>,
    pub assignment: ClusterAssignment,
    /// (epoch_id, score), most outlying first.
    pub scores: Vec<(usize, f64)>,
    /// Wall-clock seconds spent in the pairwise DTW stage.
    pub matrix_seconds: f64,
}

impl SeedRun {
    pub fn k(&self) -> usize {
        self.assignment.k()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.assignment.assignments().iter().map(|&(_, l)| l).collect()
    }

    /// Cluster composition: cluster label -> per-class counts.
    pub fn composition(&self) -> Vec<BTreeMap<String, usize>> {
        let mut comp = vec![BTreeMap::new(); self.k()];
        for &(epoch_id, label) in self.assignment.assignments() {
            let name = match self.truth[epoch_id] {
                Truth::Normal => "N".to_string(),
                Truth::Full(t) => format!("T{t}f"),
                Truth::Transitional(t) => format!("T{t}t"),
            };
            *comp[label].entry(name).or_insert(0) += 1;
        }
        comp
    }

    /// The cluster holding most fully-perturbed epochs of `kind`, with its
    /// purity: full-of-kind members over non-transitional members.
    /// Transitional epochs straddle both regimes and belong to no class, so
    /// they do not count against a cluster.
    pub fn type_cluster(&self, kind: PerturbationType) -> (usize, f64) {
        let mut per_cluster = vec![(0usize, 0usize, 0usize); self.k()]; // (full-of-kind, total, transitional)
        for &(epoch_id, label) in self.assignment.assignments() {
            let slot = &mut per_cluster[label];
            slot.1 += 1;
            match self.truth[epoch_id] {
                Truth::Full(t) if t == kind => slot.0 += 1,
                Truth::Transitional(_) => slot.2 += 1,
                _ => {}
            }
        }
        let best = (0..self.k()).max_by_key(|&c| per_cluster[c].0).unwrap();
        let (full, total, trans) = per_cluster[best];
        (best, full as f64 / (total - trans).max(1) as f64)
    }

    /// The cluster holding most normal epochs, with the analogous purity.
    pub fn normal_cluster(&self) -> (usize, f64) {
        let mut per_cluster = vec![(0usize, 0usize, 0usize); self.k()];
        for &(epoch_id, label) in self.assignment.assignments() {
            let slot = &mut per_cluster[label];
            slot.1 += 1;
            match self.truth[epoch_id] {
                Truth::Normal => slot.0 += 1,
                Truth::Transitional(_) => slot.2 += 1,
                _ => {}
            }
        }
        let best = (0..self.k()).max_by_key(|&c| per_cluster[c].0).unwrap();
        let (normal, total, trans) = per_cluster[best];
        (best, normal as f64 / (total - trans).max(1) as f64)
    }
}

/// Classifies every epoch of a default-config corpus by patient and start
/// minute: an epoch is fully perturbed when it lies inside the perturbation
/// window, transitional when it straddles the onset.
pub fn ground_truth(config: &SynthConfig, meta: &[(String, i64)]) -> Vec<Truth> {
    let onset = config.perturbation_window().start as i64;
    let epoch_minutes = 180i64;
    let kind_of: BTreeMap<String, PerturbationType> = config
        .perturbed_files
        .iter()
        .map(|&(idx, kind)| {
            let width = trajwarp::synth::patient_id_width(config.n_patients);
            (format!("p{idx:0width$}"), kind)
        })
        .collect();
    meta.iter()
        .map(|(patient, start)| match kind_of.get(patient) {
            None => Truth::Normal,
            Some(&kind) => {
                if *start >= onset {
                    Truth::Full(kind)
                } else if start + epoch_minutes > onset {
                    Truth::Transitional(kind)
                } else {
                    Truth::Normal
                }
            }
        })
        .collect()
}

/// Runs the full default pipeline for one seed. `single_thread` pins the
/// pairwise stage to one worker so its timing is meaningful.
pub fn run_seed(seed: u64, single_thread: bool) -> SeedRun {
    let config = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    let records = generate_corpus(&config).expect("corpus generation");
    let preprocess = PreprocessConfig::default();
    let (epochs, _reports) = preprocess_corpus(&records, &preprocess).expect("preprocess");
    // Default tiling: 11520 minutes per file / 180 = 64 epochs, 1280 total.
    assert_eq!(epochs.len(), 1280, "default corpus must tile into 1280 epochs");

    let started = Instant::now();
    let dtw_config = DtwConfig::unconstrained();
    let matrix = if single_thread {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("pool");
        pool.install(|| pairwise_matrix(&epochs, &dtw_config))
            .expect("matrix")
    } else {
        pairwise_matrix(&epochs, &dtw_config).expect("matrix")
    };
    let matrix_seconds = started.elapsed().as_secs_f64();

    let dendrogram = agglomerate(&matrix).expect("agglomerate");
    let assignment = cut_by_max_gap(&dendrogram);
    let scores = outlier_scores(&matrix).expect("scores");

    let meta: Vec<(String, i64)> = epochs
        .iter()
        .map(|e| (e.patient_id().to_string(), e.start_time()))
        .collect();
    let truth = ground_truth(&config, &meta);

    SeedRun {
        seed,
        truth,
        assignment,
        scores,
        matrix_seconds,
    }
}

/// Seeds used by the robustness criteria; the first is the published seed.
pub const ROBUSTNESS_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

static RUNS: OnceLock<Vec<SeedRun>> = OnceLock::new();

/// Pipeline runs over `ROBUSTNESS_SEEDS`, computed once and shared by the
/// acceptance tests. The published seed's run is single-threaded so the
/// runtime criterion observes the stated configuration.
pub fn seed_runs() -> &'static [SeedRun] {
    RUNS.get_or_init(|| {
        ROBUSTNESS_SEEDS
            .iter()
            .map(|&seed| {
                let single = seed == trajwarp::synth::DEFAULT_SEED;
                eprintln!("[fixture] running default pipeline for seed {seed}...");
                run_seed(seed, single)
            })
            .collect()
    })
}

/// Simple deterministic generator for oracle-style randomized tests.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in [lo, hi].
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}
