//! Average-linkage agglomerative clustering over a distance matrix,
//! largest-gap cluster-count selection, and per-epoch outlier scoring.
//!
//! Cluster ids follow the usual stepwise convention: leaves are
//! `0..n_leaves`, and the merge at step `s` (1-based) creates cluster
//! `n_leaves + s - 1`.

use crate::error::{Error, Result};
use crate::signal::{condensed_index, DistanceMatrix};

/// One merge of the agglomeration sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    /// 1-based position in the merge sequence.
    pub step_index: usize,
    /// Smaller of the two merged cluster ids.
    pub left: usize,
    /// Larger of the two merged cluster ids.
    pub right: usize,
    pub linkage_distance: f64,
    pub new_cluster_id: usize,
}

/// Full merge sequence from agglomerative clustering. Leaf `i` corresponds
/// to `epoch_ids()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_leaves: usize,
    epoch_ids: Vec<usize>,
    merges: Vec<MergeStep>,
}

impl Dendrogram {
    /// Validates the merge sequence: one merge short of the leaf count,
    /// non-decreasing distances, and every referenced id either a leaf or
    /// the product of an earlier merge.
    pub fn new(epoch_ids: Vec<usize>, merges: Vec<MergeStep>) -> Result<Self> {
        let n_leaves = epoch_ids.len();
        if n_leaves < 2 {
            return Err(Error::TooFewEpochs {
                required: 2,
                actual: n_leaves,
            });
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::Data(format!(
                "dendrogram with {n_leaves} leaves needs {} merges, got {}",
                n_leaves - 1,
                merges.len()
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for (s, merge) in merges.iter().enumerate() {
            let max_existing = n_leaves + s;
            if merge.step_index != s + 1 {
                return Err(Error::Data(format!("merge {} out of order", merge.step_index)));
            }
            if merge.left >= merge.right || merge.right >= max_existing {
                return Err(Error::Data(format!(
                    "merge {} references invalid cluster ids {} and {}",
                    merge.step_index, merge.left, merge.right
                )));
            }
            if merge.new_cluster_id != max_existing {
                return Err(Error::Data(format!(
                    "merge {} should create cluster {max_existing}",
                    merge.step_index
                )));
            }
            if !merge.linkage_distance.is_finite() || merge.linkage_distance < prev {
                return Err(Error::Data(format!(
                    "merge distances must be finite and non-decreasing at step {}",
                    merge.step_index
                )));
            }
            prev = merge.linkage_distance;
        }
        Ok(Dendrogram {
            n_leaves,
            epoch_ids,
            merges,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn epoch_ids(&self) -> &[usize] {
        &self.epoch_ids
    }

    pub fn merges(&self) -> &[MergeStep] {
        &self.merges
    }
}

/// Flat clustering produced by cutting a dendrogram. Labels are contiguous
/// from 0 in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    assignments: Vec<(usize, usize)>,
    k: usize,
    cut_gap: f64,
}

impl ClusterAssignment {
    pub fn new(assignments: Vec<(usize, usize)>, k: usize, cut_gap: f64) -> Result<Self> {
        let mut seen = vec![false; k];
        for &(_, label) in &assignments {
            if label >= k {
                return Err(Error::Data(format!("label {label} out of range for k={k}")));
            }
            seen[label] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Data("cluster labels are not contiguous".into()));
        }
        Ok(ClusterAssignment {
            assignments,
            k,
            cut_gap,
        })
    }

    /// (epoch_id, label) pairs in leaf order.
    pub fn assignments(&self) -> &[(usize, usize)] {
        &self.assignments
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The merge-distance gap that determined the cut.
    pub fn cut_gap(&self) -> f64 {
        self.cut_gap
    }

    pub fn label_of(&self, epoch_id: usize) -> Option<usize> {
        self.assignments
            .iter()
            .find(|(id, _)| *id == epoch_id)
            .map(|(_, label)| *label)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &(_, label) in &self.assignments {
            sizes[label] += 1;
        }
        sizes
    }
}

/// Average-linkage agglomeration: at every step the globally closest pair of
/// active clusters is merged, with D(U, V) the mean of all element-pairwise
/// distances between U and V.
///
/// Cluster distances are maintained with the Lance-Williams average-linkage
/// update. Ties in pair selection break toward the lexicographically
/// smallest (smaller id, larger id) pair, which makes runs deterministic.
pub fn agglomerate(matrix: &DistanceMatrix) -> Result<Dendrogram> {
    let n = matrix.n_epochs();
    if n < 2 {
        return Err(Error::TooFewEpochs {
            required: 2,
            actual: n,
        });
    }

    // Working condensed copy over leaf slots; a merged cluster reuses the
    // slot of its left member and the other slot is retired to infinity.
    let mut work = matrix.condensed().to_vec();
    let mut cluster_of_slot: Vec<usize> = (0..n).collect();
    let mut slot_of_cluster: Vec<usize> = (0..2 * n - 1).map(|c| if c < n { c } else { usize::MAX }).collect();
    let mut size_of_slot: Vec<usize> = vec![1; n];

    let mut merges = Vec::with_capacity(n - 1);
    let mut last_distance = 0.0f64;

    for step in 0..n - 1 {
        // Scan for the closest active pair; retired entries are infinite and
        // can never win.
        let mut best_d = f64::INFINITY;
        let mut best_pair = (usize::MAX, usize::MAX);
        let mut best_slots = (0, 0);
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = work[idx];
                idx += 1;
                if d.is_finite() {
                    let ci = cluster_of_slot[i];
                    let cj = cluster_of_slot[j];
                    let pair = if ci < cj { (ci, cj) } else { (cj, ci) };
                    if d < best_d || (d == best_d && pair < best_pair) {
                        best_d = d;
                        best_pair = pair;
                        best_slots = (i, j);
                    }
                }
            }
        }
        debug_assert!(best_d.is_finite());

        let (slot_a, slot_b) = best_slots;
        let new_id = n + step;
        // Average linkage is monotone, so this can only trip on a genuine
        // bug, not on rounding: updated entries are clamped below.
        assert!(
            best_d >= last_distance,
            "merge distances decreased: {best_d} < {last_distance}"
        );
        last_distance = best_d;

        merges.push(MergeStep {
            step_index: step + 1,
            left: best_pair.0,
            right: best_pair.1,
            linkage_distance: best_d,
            new_cluster_id: new_id,
        });

        // Lance-Williams update for average linkage:
        // d(new, w) = (|a| d(a,w) + |b| d(b,w)) / (|a| + |b|).
        // In exact arithmetic every updated value is >= best_d (both inputs
        // are); clamp away the last-ulp rounding so monotonicity is exact.
        let sa = size_of_slot[slot_a] as f64;
        let sb = size_of_slot[slot_b] as f64;
        for w in 0..n {
            if w == slot_a || w == slot_b {
                continue;
            }
            let idx_aw = cidx(n, slot_a, w);
            let idx_bw = cidx(n, slot_b, w);
            let daw = work[idx_aw];
            if !daw.is_finite() {
                continue;
            }
            let dbw = work[idx_bw];
            let merged = (sa * daw + sb * dbw) / (sa + sb);
            work[idx_aw] = merged.max(best_d);
            work[idx_bw] = f64::INFINITY;
        }
        work[cidx(n, slot_a, slot_b)] = f64::INFINITY;

        size_of_slot[slot_a] += size_of_slot[slot_b];
        cluster_of_slot[slot_a] = new_id;
        slot_of_cluster[new_id] = slot_a;
    }

    Dendrogram::new(matrix.epoch_ids().to_vec(), merges)
}

#[inline]
fn cidx(n: usize, i: usize, j: usize) -> usize {
    if i < j {
        condensed_index(n, i, j)
    } else {
        condensed_index(n, j, i)
    }
}

/// Applies the first `applied` merges of a dendrogram and labels the leaves.
fn label_after(dendrogram: &Dendrogram, applied: usize, cut_gap: f64) -> ClusterAssignment {
    let n = dendrogram.n_leaves;
    // members[c] lists the leaves of cluster id c, populated as merges apply.
    let mut members: Vec<Vec<usize>> = (0..2 * n - 1)
        .map(|c| if c < n { vec![c] } else { Vec::new() })
        .collect();
    let mut alive = vec![false; 2 * n - 1];
    for leaf in 0..n {
        alive[leaf] = true;
    }
    for merge in &dendrogram.merges[..applied] {
        let mut merged = std::mem::take(&mut members[merge.left]);
        merged.append(&mut members[merge.right]);
        members[merge.new_cluster_id] = merged;
        alive[merge.left] = false;
        alive[merge.right] = false;
        alive[merge.new_cluster_id] = true;
    }

    let mut label_of_leaf = vec![usize::MAX; n];
    for (cid, is_alive) in alive.iter().enumerate() {
        if *is_alive {
            for &leaf in &members[cid] {
                label_of_leaf[leaf] = cid;
            }
        }
    }
    // Relabel contiguously in order of first appearance.
    let mut next = 0;
    let mut canonical = std::collections::HashMap::new();
    let mut assignments = Vec::with_capacity(n);
    for leaf in 0..n {
        let cid = label_of_leaf[leaf];
        let label = *canonical.entry(cid).or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        assignments.push((dendrogram.epoch_ids[leaf], label));
    }
    ClusterAssignment {
        assignments,
        k: next,
        cut_gap,
    }
}

/// Cuts at the largest jump between consecutive merge distances. Ties break
/// toward the later merge, i.e. toward fewer clusters. With only two leaves
/// no gap exists and the single cluster is returned.
pub fn cut_by_max_gap(dendrogram: &Dendrogram) -> ClusterAssignment {
    let n = dendrogram.n_leaves;
    if n == 2 {
        return label_after(dendrogram, 1, 0.0);
    }
    let distances: Vec<f64> = dendrogram
        .merges
        .iter()
        .map(|m| m.linkage_distance)
        .collect();
    let mut best_gap = f64::NEG_INFINITY;
    let mut best_k = 0;
    for k in 0..distances.len() - 1 {
        let gap = distances[k + 1] - distances[k];
        if gap >= best_gap {
            best_gap = gap;
            best_k = k + 1; // merges 1..=k applied (1-based)
        }
    }
    label_after(dendrogram, best_k, best_gap)
}

/// Cuts at an explicit linkage-distance threshold: merges at or below the
/// threshold are applied. Intended as a manual override of the gap rule.
pub fn cut_at_distance(dendrogram: &Dendrogram, threshold: f64) -> ClusterAssignment {
    let applied = dendrogram
        .merges
        .iter()
        .take_while(|m| m.linkage_distance <= threshold)
        .count();
    label_after(dendrogram, applied, 0.0)
}

/// Mean distance of every epoch to all other epochs, sorted most-outlying
/// first. Equal scores fall back to ascending epoch id.
pub fn outlier_scores(matrix: &DistanceMatrix) -> Result<Vec<(usize, f64)>> {
    let n = matrix.n_epochs();
    if n < 2 {
        return Err(Error::TooFewEpochs {
            required: 2,
            actual: n,
        });
    }
    let mut scores: Vec<(usize, f64)> = (0..n)
        .map(|i| (matrix.epoch_ids()[i], matrix.row_mean(i)))
        .collect();
    scores.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then(a.0.cmp(&b.0))
    });
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::DistanceMatrix;

    fn matrix(square: &[Vec<f64>]) -> DistanceMatrix {
        let ids: Vec<usize> = (0..square.len()).collect();
        DistanceMatrix::from_square(ids, square).unwrap()
    }

    /// Definition-based oracle: recompute D(U, V) from the raw matrix at
    /// every step, same tie-break as the implementation.
    fn oracle_agglomerate(m: &DistanceMatrix) -> Vec<(usize, usize, f64)> {
        let n = m.n_epochs();
        let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let mut next_id = n;
        let mut merges = Vec::new();
        while clusters.len() > 1 {
            let mut best = (f64::INFINITY, (usize::MAX, usize::MAX), (0, 0));
            for a in 0..clusters.len() {
                for b in (a + 1)..clusters.len() {
                    let (ca, la) = &clusters[a];
                    let (cb, lb) = &clusters[b];
                    let mut sum = 0.0;
                    for &u in la {
                        for &v in lb {
                            sum += m.get(u, v);
                        }
                    }
                    let d = sum / (la.len() * lb.len()) as f64;
                    let pair = if ca < cb { (*ca, *cb) } else { (*cb, *ca) };
                    if d < best.0 || (d == best.0 && pair < best.1) {
                        best = (d, pair, (a, b));
                    }
                }
            }
            let (d, pair, (a, b)) = best;
            merges.push((pair.0, pair.1, d));
            let (_, lb) = clusters.remove(b);
            let (_, la) = &mut clusters[a];
            la.extend(lb);
            clusters[a].0 = next_id;
            next_id += 1;
        }
        merges
    }

    struct Lcg(u64);
    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    fn random_matrix(rng: &mut Lcg, n: usize) -> DistanceMatrix {
        let mut square = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = rng.next_f64() * 10.0 + 0.01;
                square[i][j] = d;
                square[j][i] = d;
            }
        }
        matrix(&square)
    }

    #[test]
    fn two_leaves_single_merge() {
        let m = matrix(&[vec![0.0, 3.5], vec![3.5, 0.0]]);
        let dend = agglomerate(&m).unwrap();
        assert_eq!(dend.merges().len(), 1);
        let step = &dend.merges()[0];
        assert_eq!((step.left, step.right, step.new_cluster_id), (0, 1, 2));
        assert_eq!(step.linkage_distance, 3.5);
    }

    #[test]
    fn three_points_average_linkage_by_hand() {
        // 1-D points {0, 1, 10} with absolute differences: merge (0, 1) at
        // 1.0, then the pair cluster joins {10} at (10 + 9) / 2 = 9.5.
        let m = matrix(&[
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 9.0],
            vec![10.0, 9.0, 0.0],
        ]);
        let dend = agglomerate(&m).unwrap();
        let steps = dend.merges();
        assert_eq!((steps[0].left, steps[0].right), (0, 1));
        assert_eq!(steps[0].linkage_distance, 1.0);
        assert_eq!((steps[1].left, steps[1].right), (2, 3));
        assert!((steps[1].linkage_distance - 9.5).abs() < 1e-12);
    }

    #[test]
    fn matches_definition_oracle_on_random_matrices() {
        let mut rng = Lcg(11);
        for trial in 0..60 {
            let n = 2 + (rng.next_f64() * 11.0) as usize;
            let m = random_matrix(&mut rng, n);
            let dend = agglomerate(&m).unwrap();
            let want = oracle_agglomerate(&m);
            assert_eq!(dend.merges().len(), want.len());
            for (got, want) in dend.merges().iter().zip(&want) {
                assert_eq!((got.left, got.right), (want.0, want.1), "trial {trial}");
                assert!(
                    (got.linkage_distance - want.2).abs() <= 1e-10,
                    "trial {trial}: {} vs {}",
                    got.linkage_distance,
                    want.2
                );
            }
            // Monotone on every run.
            for w in dend.merges().windows(2) {
                assert!(w[1].linkage_distance >= w[0].linkage_distance);
            }
        }
    }

    #[test]
    fn permuting_input_permutes_partitions_consistently() {
        let mut rng = Lcg(23);
        let n = 9;
        let m = random_matrix(&mut rng, n);
        let dend = agglomerate(&m).unwrap();
        let base = cut_by_max_gap(&dend);
        let base_scores = outlier_scores(&m).unwrap();

        // Reverse-order permutation of the same matrix.
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut square = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                square[i][j] = m.get(perm[i], perm[j]);
            }
        }
        let ids: Vec<usize> = perm.clone();
        let pm = DistanceMatrix::from_square(ids, &square).unwrap();
        let permuted = cut_by_max_gap(&agglomerate(&pm).unwrap());
        let perm_scores = outlier_scores(&pm).unwrap();

        // Same partition as sets of epoch ids.
        let part = |a: &ClusterAssignment| {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); a.k()];
            for &(id, label) in a.assignments() {
                groups[label].push(id);
            }
            let mut groups: Vec<Vec<usize>> = groups
                .into_iter()
                .map(|mut g| {
                    g.sort();
                    g
                })
                .collect();
            groups.sort();
            groups
        };
        assert_eq!(part(&base), part(&permuted));

        // Scores attach to the same epoch ids regardless of order.
        let mut a = base_scores.clone();
        let mut b = perm_scores.clone();
        a.sort_by_key(|(id, _)| *id);
        b.sort_by_key(|(id, _)| *id);
        for ((ida, sa), (idb, sb)) in a.iter().zip(&b) {
            assert_eq!(ida, idb);
            assert!((sa - sb).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_matrix_scales_distances_and_keeps_partition() {
        let mut rng = Lcg(31);
        let n = 10;
        let m = random_matrix(&mut rng, n);
        let c = 3.7;
        let scaled_cond: Vec<f64> = m.condensed().iter().map(|d| d * c).collect();
        let sm = DistanceMatrix::from_condensed(m.epoch_ids().to_vec(), scaled_cond).unwrap();

        let d1 = agglomerate(&m).unwrap();
        let d2 = agglomerate(&sm).unwrap();
        for (a, b) in d1.merges().iter().zip(d2.merges()) {
            assert_eq!((a.left, a.right), (b.left, b.right));
            assert!((a.linkage_distance * c - b.linkage_distance).abs() < 1e-9);
        }
        assert_eq!(
            cut_by_max_gap(&d1).assignments(),
            cut_by_max_gap(&d2).assignments()
        );

        let s1 = outlier_scores(&m).unwrap();
        let s2 = outlier_scores(&sm).unwrap();
        for ((id1, v1), (id2, v2)) in s1.iter().zip(&s2) {
            assert_eq!(id1, id2);
            assert!((v1 * c - v2).abs() < 1e-9);
        }
    }

    fn chain_dendrogram(distances: &[f64]) -> Dendrogram {
        // Chain shape: each merge absorbs the next leaf.
        let n = distances.len() + 1;
        let mut merges = Vec::new();
        let mut current = 0;
        for (s, &d) in distances.iter().enumerate() {
            let (lo, hi) = if current < s + 1 { (current, s + 1) } else { (s + 1, current) };
            merges.push(MergeStep {
                step_index: s + 1,
                left: lo,
                right: hi,
                linkage_distance: d,
                new_cluster_id: n + s,
            });
            current = n + s;
        }
        Dendrogram::new((0..n).collect(), merges).unwrap()
    }

    #[test]
    fn max_gap_cut_finds_the_jump() {
        // Distances 0.1, 0.12, 0.15, 2.0 over five leaves: the largest gap
        // follows the third merge, so two clusters remain.
        let dend = chain_dendrogram(&[0.1, 0.12, 0.15, 2.0]);
        let cut = cut_by_max_gap(&dend);
        assert_eq!(cut.k(), 2);
        assert!((cut.cut_gap() - 1.85).abs() < 1e-12);
        let labels: Vec<usize> = cut.assignments().iter().map(|&(_, l)| l).collect();
        assert_eq!(labels, vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn equal_distances_tie_toward_fewer_clusters() {
        let dend = chain_dendrogram(&[0.5, 0.5, 0.5, 0.5]);
        let cut = cut_by_max_gap(&dend);
        assert_eq!(cut.k(), 2);
        assert_eq!(cut.cut_gap(), 0.0);
    }

    #[test]
    fn two_leaves_cut_returns_single_cluster() {
        let m = matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let cut = cut_by_max_gap(&agglomerate(&m).unwrap());
        assert_eq!(cut.k(), 1);
        assert_eq!(cut.assignments(), &[(0, 0), (1, 0)]);
    }

    #[test]
    fn cut_at_distance_threshold() {
        let dend = chain_dendrogram(&[0.1, 0.12, 0.15, 2.0]);
        assert_eq!(cut_at_distance(&dend, 0.13).k(), 3);
        assert_eq!(cut_at_distance(&dend, 10.0).k(), 1);
        assert_eq!(cut_at_distance(&dend, 0.0).k(), 5);
    }

    #[test]
    fn outlier_scores_row_means() {
        let m = matrix(&[
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 5.0],
            vec![4.0, 5.0, 0.0],
        ]);
        let scores = outlier_scores(&m).unwrap();
        assert_eq!(scores[0], (2, 4.5));
        assert_eq!(scores[1], (1, 3.0));
        assert_eq!(scores[2], (0, 2.5));
    }

    #[test]
    fn equal_scores_fall_back_to_epoch_id() {
        let m = matrix(&[
            vec![0.0, 2.0, 2.0],
            vec![2.0, 0.0, 2.0],
            vec![2.0, 2.0, 0.0],
        ]);
        let scores = outlier_scores(&m).unwrap();
        let ids: Vec<usize> = scores.iter().map(|&(id, _)| id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }
}
