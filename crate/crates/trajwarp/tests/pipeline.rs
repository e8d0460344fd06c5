//! Library-level end-to-end checks on a reduced synthetic corpus: epoch
//! tiling, outlier geometry, and the map phenomenon where a perturbed
//! file's trailing epochs walk out of the central cluster.

mod common;

use std::collections::BTreeSet;

use common::ground_truth;
use trajwarp::dtw::{pairwise_matrix, DtwConfig};
use trajwarp::mds::classical_mds;
use trajwarp::preprocess::{preprocess_corpus, PreprocessConfig};
use trajwarp::synth::{generate_corpus, SynthConfig};

fn small_config() -> SynthConfig {
    SynthConfig {
        n_patients: 6,
        duration_days: 4,
        seed: 11,
        ..SynthConfig::default()
    }
}

#[test]
fn small_corpus_tiles_and_embeds_with_outliers_outside() {
    let config = small_config();
    let records = generate_corpus(&config).unwrap();
    let (epochs, reports) = preprocess_corpus(&records, &PreprocessConfig::default()).unwrap();

    // 4 days at one sample per minute: 5760 / 180 = 32 epochs per file.
    assert_eq!(epochs.len(), 6 * 32);
    for report in &reports {
        assert_eq!(report.n_epochs, 32);
        assert_eq!(report.discarded_minutes, 0);
    }

    let matrix = pairwise_matrix(&epochs, &DtwConfig::unconstrained()).unwrap();
    let embedding = classical_mds(&matrix, 2).unwrap();

    let meta: Vec<(String, i64)> = epochs
        .iter()
        .map(|e| (e.patient_id().to_string(), e.start_time()))
        .collect();
    let truth = ground_truth(&config, &meta);

    // Centroid and radius of the unperturbed cloud.
    let normal_ids: BTreeSet<usize> = (0..truth.len())
        .filter(|&i| truth[i] == common::Truth::Normal)
        .collect();
    let (mut cx, mut cy) = (0.0, 0.0);
    for p in embedding.points() {
        if normal_ids.contains(&p.epoch_id) {
            cx += p.x();
            cy += p.y();
        }
    }
    cx /= normal_ids.len() as f64;
    cy /= normal_ids.len() as f64;
    let radius = |id: usize| {
        let p = &embedding.points()[id];
        ((p.x() - cx).powi(2) + (p.y() - cy).powi(2)).sqrt()
    };
    let max_normal = normal_ids.iter().map(|&i| radius(i)).fold(0.0, f64::max);

    // Every fully-perturbed epoch lies outside the whole normal cloud; the
    // perturbed files' trails therefore end outside the central cluster.
    for (id, t) in truth.iter().enumerate() {
        if matches!(t, common::Truth::Full(_)) {
            assert!(
                radius(id) > max_normal,
                "fully-perturbed epoch {id} at radius {:.2} inside the normal cloud (max {:.2})",
                radius(id),
                max_normal
            );
        }
    }

    // The diagnostic spectrum is exposed and the clamped mass is a fraction.
    assert_eq!(embedding.eigenvalues().len(), epochs.len());
    assert!((0.0..=1.0).contains(&embedding.negative_mass_fraction()));
}
