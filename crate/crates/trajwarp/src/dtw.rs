//! Multivariate dynamic-time-warp distance between equal-length epochs, and
//! the full pairwise distance matrix.
//!
//! The distance is the square root of the minimal cumulative squared
//! Euclidean point-to-point cost over all monotone contiguous alignment
//! paths, with the standard step set {(1,0), (0,1), (1,1)} and no weights.
//! Cost accumulates squared; the square root is applied once at the end.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{DistanceMatrix, Epoch};

/// Optional Sakoe-Chiba band constraint. `None` means unconstrained, which
/// is the default everywhere.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DtwConfig {
    pub band_radius: Option<usize>,
}

impl DtwConfig {
    pub fn unconstrained() -> Self {
        DtwConfig { band_radius: None }
    }

    pub fn banded(radius: usize) -> Self {
        DtwConfig {
            band_radius: Some(radius),
        }
    }
}

/// Optimal alignment path as 0-based index pairs into both sequences.
/// Starts at (0, 0), ends at (m-1, m-1); each step advances one or both
/// indices by one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath {
    steps: Vec<(usize, usize)>,
}

impl AlignmentPath {
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }
}

/// A borrowed view of one multichannel sequence: row-major, one row of
/// `n_channels` values per time point.
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    data: &'a [f64],
    n_samples: usize,
    n_channels: usize,
}

impl<'a> SeriesView<'a> {
    pub fn new(data: &'a [f64], n_samples: usize, n_channels: usize) -> Result<Self> {
        if data.len() != n_samples * n_channels {
            return Err(Error::Data(format!(
                "series data length {} does not match shape {n_samples}x{n_channels}",
                data.len()
            )));
        }
        Ok(SeriesView {
            data,
            n_samples,
            n_channels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_channels..(i + 1) * self.n_channels]
    }
}

impl<'a> From<&'a Epoch> for SeriesView<'a> {
    fn from(e: &'a Epoch) -> Self {
        SeriesView {
            data: e.data(),
            n_samples: e.n_samples(),
            n_channels: e.n_channels(),
        }
    }
}

/// Branch-free minimum; select form so the autovectorizer emits packed mins.
/// No NaN can reach this (inputs are finite costs or the infinity sentinel).
#[inline(always)]
fn min2(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn min3(a: f64, b: f64, c: f64) -> f64 {
    min2(min2(a, b), c)
}

#[inline(always)]
fn sq_cost(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for c in 0..a.len() {
        let d = a[c] - b[c];
        s += d * d;
    }
    s
}

fn validate_pair(a: &SeriesView, b: &SeriesView) -> Result<()> {
    if a.n_channels != b.n_channels {
        return Err(Error::ChannelMismatch {
            left: a.n_channels,
            right: b.n_channels,
        });
    }
    if a.n_samples != b.n_samples {
        return Err(Error::LengthMismatch {
            left: a.n_samples,
            right: b.n_samples,
        });
    }
    if a.n_samples == 0 {
        return Err(Error::Data("empty sequence".into()));
    }
    for (name, s) in [("left", a), ("right", b)] {
        if s.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{name} sequence"),
            });
        }
    }
    Ok(())
}

/// DTW distance together with the optimal alignment path.
///
/// Ties during backtracking prefer the diagonal predecessor, then the one
/// with smaller first index; the distance value is unaffected by this.
pub fn dtw_distance(a: SeriesView, b: SeriesView, config: &DtwConfig) -> Result<(f64, AlignmentPath)> {
    validate_pair(&a, &b)?;
    let m = a.n_samples;
    let radius = config.band_radius.unwrap_or(m);

    // Full (m+1) x (m+1) cumulative table, flat row-major.
    let w = m + 1;
    let mut table = vec![f64::INFINITY; w * w];
    table[0] = 0.0;
    for i in 1..=m {
        let jlo = i.saturating_sub(radius).max(1);
        let jhi = (i + radius).min(m);
        let row_a = a.row(i - 1);
        for j in jlo..=jhi {
            let cost = sq_cost(row_a, b.row(j - 1));
            table[i * w + j] = cost
                + min3(
                    table[(i - 1) * w + j - 1],
                    table[(i - 1) * w + j],
                    table[i * w + j - 1],
                );
        }
    }

    let total = table[m * w + m];
    debug_assert!(total.is_finite(), "diagonal is always inside the band");

    // Backtrack from (m, m).
    let mut steps = Vec::with_capacity(2 * m);
    let (mut i, mut j) = (m, m);
    steps.push((i - 1, j - 1));
    while i > 1 || j > 1 {
        let diag = if i > 1 && j > 1 {
            table[(i - 1) * w + j - 1]
        } else {
            f64::INFINITY
        };
        let up = if i > 1 {
            table[(i - 1) * w + j]
        } else {
            f64::INFINITY
        };
        let left = if j > 1 {
            table[i * w + j - 1]
        } else {
            f64::INFINITY
        };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        steps.push((i - 1, j - 1));
    }
    steps.reverse();

    Ok((total.sqrt(), AlignmentPath { steps }))
}

/// DTW distance without the alignment path. Returns exactly the same value
/// as [`dtw_distance`].
pub fn dtw_distance_only(a: SeriesView, b: SeriesView, config: &DtwConfig) -> Result<f64> {
    validate_pair(&a, &b)?;
    match config.band_radius {
        Some(r) if r + 1 < a.n_samples => {
            Ok(banded_sq(&a, &b, r).sqrt())
        }
        _ => {
            let pa = Planar::from_view(&a, false);
            let pb = Planar::from_view(&b, true);
            Ok(antidiag_sq(&pa, &pb).sqrt())
        }
    }
}

/// Banded cumulative cost with two rolling rows.
fn banded_sq(a: &SeriesView, b: &SeriesView, radius: usize) -> f64 {
    let m = a.n_samples;
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=m {
        curr.fill(f64::INFINITY);
        let jlo = i.saturating_sub(radius).max(1);
        let jhi = (i + radius).min(m);
        let row_a = a.row(i - 1);
        for j in jlo..=jhi {
            let cost = sq_cost(row_a, b.row(j - 1));
            curr[j] = cost + min3(prev[j - 1], prev[j], curr[j - 1]);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

/// Channel-planar copy of a sequence, optionally time-reversed. The
/// anti-diagonal kernel wants unit-stride access per channel.
struct Planar {
    planes: Vec<f64>,
    m: usize,
    ch: usize,
}

impl Planar {
    fn from_view(v: &SeriesView, reversed: bool) -> Self {
        let (m, ch) = (v.n_samples, v.n_channels);
        let mut planes = vec![0.0; m * ch];
        for c in 0..ch {
            for i in 0..m {
                let t = if reversed { m - 1 - i } else { i };
                planes[c * m + i] = v.data[t * ch + c];
            }
        }
        Planar { planes, m, ch }
    }

    fn from_epoch(e: &Epoch, reversed: bool) -> Self {
        Planar::from_view(&SeriesView::from(e), reversed)
    }

    fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c * self.m..(c + 1) * self.m]
    }
}

/// Unconstrained cumulative cost by anti-diagonal wavefront. Cells on one
/// anti-diagonal have no mutual dependencies, so the inner loop is free of
/// the loop-carried chain that throttles the row-by-row form; results are
/// bit-identical because each cell applies the same `cost + min3` to the
/// same neighbor values.
///
/// Buffer slot `i + 1` holds the cell of row `i` on a given diagonal; slot 0
/// stays infinite as a boundary sentinel and never-yet-valid slots still
/// carry their infinite initialization, so no per-diagonal clearing is
/// needed.
fn antidiag_sq(a: &Planar, b_rev: &Planar) -> f64 {
    debug_assert_eq!(a.m, b_rev.m);
    debug_assert_eq!(a.ch, b_rev.ch);
    let m = a.m;
    match a.ch {
        1 => antidiag_sq_1ch(a, b_rev, m),
        2 => antidiag_sq_2ch(a, b_rev, m),
        _ => antidiag_sq_dyn(a, b_rev, m),
    }
}

/// Walks one anti-diagonal. All slices are cut to exactly `span` so the
/// inner loop is free of bounds checks and vectorizes.
macro_rules! antidiag_pass {
    ($m:expr, $prev2:ident, $prev1:ident, $curr:ident, $cost:expr) => {{
        let m = $m;
        for k in 1..=(2 * m - 2) {
            let ilo = k.saturating_sub(m - 1);
            let ihi = k.min(m - 1);
            // b_rev index for row i on diagonal k is (m - 1 - k) + i.
            let off = (m - 1 + ilo) - k;
            let span = ihi - ilo + 1;
            {
                let out = &mut $curr[ilo + 1..ilo + 1 + span];
                let p1a = &$prev1[ilo..ilo + span];
                let p1b = &$prev1[ilo + 1..ilo + 1 + span];
                let p2a = &$prev2[ilo..ilo + span];
                for t in 0..span {
                    let cost = $cost(ilo, off, t);
                    out[t] = cost + min3(p1a[t], p1b[t], p2a[t]);
                }
            }
            let tmp = $prev2;
            $prev2 = $prev1;
            $prev1 = $curr;
            $curr = tmp;
        }
        $prev1[m]
    }};
}

fn antidiag_sq_1ch(a: &Planar, b_rev: &Planar, m: usize) -> f64 {
    let mut prev2 = vec![f64::INFINITY; m + 1];
    let mut prev1 = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];

    let a0 = a.plane(0);
    let b0 = b_rev.plane(0);
    let d = a0[0] - b0[m - 1];
    prev1[1] = d * d;
    if m == 1 {
        return prev1[1];
    }
    antidiag_pass!(m, prev2, prev1, curr, |ilo: usize, off: usize, t: usize| {
        let d = a0[ilo + t] - b0[off + t];
        d * d
    })
}

fn antidiag_sq_2ch(a: &Planar, b_rev: &Planar, m: usize) -> f64 {
    let mut prev2 = vec![f64::INFINITY; m + 1];
    let mut prev1 = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];

    let a0 = a.plane(0);
    let a1 = a.plane(1);
    let b0 = b_rev.plane(0);
    let b1 = b_rev.plane(1);
    let d0 = a0[0] - b0[m - 1];
    let d1 = a1[0] - b1[m - 1];
    prev1[1] = d0 * d0 + d1 * d1;
    if m == 1 {
        return prev1[1];
    }
    antidiag_pass!(m, prev2, prev1, curr, |ilo: usize, off: usize, t: usize| {
        let d0 = a0[ilo + t] - b0[off + t];
        let d1 = a1[ilo + t] - b1[off + t];
        d0 * d0 + d1 * d1
    })
}

fn antidiag_sq_dyn(a: &Planar, b_rev: &Planar, m: usize) -> f64 {
    let ch = a.ch;
    let mut prev2 = vec![f64::INFINITY; m + 1];
    let mut prev1 = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];

    {
        let mut cost = 0.0;
        for c in 0..ch {
            let d = a.plane(c)[0] - b_rev.plane(c)[m - 1];
            cost += d * d;
        }
        prev1[1] = cost;
    }
    if m == 1 {
        return prev1[1];
    }
    let planes = &a.planes;
    let rplanes = &b_rev.planes;
    antidiag_pass!(m, prev2, prev1, curr, |ilo: usize, off: usize, t: usize| {
        let mut cost = 0.0;
        for c in 0..ch {
            let d = planes[c * m + ilo + t] - rplanes[c * m + off + t];
            cost += d * d;
        }
        cost
    })
}

/// Pairwise DTW distance matrix over a set of epochs.
///
/// Each unordered pair is computed exactly once; pairs are independent work
/// items, so the result is identical at any thread count.
pub fn pairwise_matrix(epochs: &[Epoch], config: &DtwConfig) -> Result<DistanceMatrix> {
    if epochs.len() < 2 {
        return Err(Error::TooFewEpochs {
            required: 2,
            actual: epochs.len(),
        });
    }
    let m = epochs[0].n_samples();
    let ch = epochs[0].n_channels();
    for e in epochs {
        if e.n_samples() != m {
            return Err(Error::LengthMismatch {
                left: m,
                right: e.n_samples(),
            });
        }
        if e.n_channels() != ch {
            return Err(Error::ChannelMismatch {
                left: ch,
                right: e.n_channels(),
            });
        }
    }

    let n = epochs.len();
    let banded = matches!(config.band_radius, Some(r) if r + 1 < m);

    let rows: Vec<Vec<f64>> = if banded {
        let radius = config.band_radius.unwrap();
        (0..n - 1)
            .into_par_iter()
            .map(|i| {
                let a = SeriesView::from(&epochs[i]);
                (i + 1..n)
                    .map(|j| banded_sq(&a, &SeriesView::from(&epochs[j]), radius).sqrt())
                    .collect()
            })
            .collect()
    } else {
        // Planar forward and reversed copies, built once per epoch.
        let forward: Vec<Planar> = epochs.iter().map(|e| Planar::from_epoch(e, false)).collect();
        let reversed: Vec<Planar> = epochs.iter().map(|e| Planar::from_epoch(e, true)).collect();
        (0..n - 1)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| antidiag_sq(&forward[i], &reversed[j]).sqrt())
                    .collect()
            })
            .collect()
    };

    let mut condensed = Vec::with_capacity(crate::signal::condensed_len(n));
    for row in rows {
        condensed.extend(row);
    }
    let epoch_ids = epochs.iter().map(|e| e.epoch_id()).collect();
    DistanceMatrix::from_condensed(epoch_ids, condensed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(data: &[f64], ch: usize) -> SeriesView<'_> {
        SeriesView::new(data, data.len() / ch, ch).unwrap()
    }

    /// Plain textbook DP over the full cost matrix, kept deliberately
    /// separate from the production kernels.
    fn oracle(a: &[f64], b: &[f64], ch: usize) -> f64 {
        let m = a.len() / ch;
        let n = b.len() / ch;
        let mut d = vec![vec![f64::INFINITY; n + 1]; m + 1];
        d[0][0] = 0.0;
        for i in 1..=m {
            for j in 1..=n {
                let mut cost = 0.0;
                for c in 0..ch {
                    let diff = a[(i - 1) * ch + c] - b[(j - 1) * ch + c];
                    cost += diff * diff;
                }
                d[i][j] = cost + d[i - 1][j - 1].min(d[i - 1][j]).min(d[i][j - 1]);
            }
        }
        d[m][n].sqrt()
    }

    struct Lcg(u64);
    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }
    }

    #[test]
    fn identical_epochs_have_zero_distance_and_diagonal_path() {
        let data = vec![0.5, -1.0, 2.0, 3.5, 0.0, 1.0];
        let (d, path) = dtw_distance(view(&data, 2), view(&data, 2), &DtwConfig::default()).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(path.steps(), &[(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn known_small_example() {
        // a = [0, 1, 2], b = [0, 2, 2]: optimal cumulative squared cost is 1.
        let a = [0.0, 1.0, 2.0];
        let b = [0.0, 2.0, 2.0];
        let (d, path) = dtw_distance(view(&a, 1), view(&b, 1), &DtwConfig::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        assert_eq!(path.steps().first(), Some(&(0, 0)));
        assert_eq!(path.steps().last(), Some(&(2, 2)));
        assert!((d - oracle(&a, &b, 1)).abs() < 1e-12);
    }

    #[test]
    fn single_point_is_euclidean_norm() {
        let a = [3.0, 4.0];
        let b = [0.0, 0.0];
        let (d, path) = dtw_distance(view(&a, 2), view(&b, 2), &DtwConfig::default()).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
        assert_eq!(path.steps(), &[(0, 0)]);
    }

    #[test]
    fn path_is_monotone_and_contiguous() {
        let mut rng = Lcg(7);
        for _ in 0..50 {
            let m = 2 + (rng.next_f64().abs() * 18.0) as usize;
            let a: Vec<f64> = (0..m * 2).map(|_| rng.next_f64()).collect();
            let b: Vec<f64> = (0..m * 2).map(|_| rng.next_f64()).collect();
            let (_, path) = dtw_distance(view(&a, 2), view(&b, 2), &DtwConfig::default()).unwrap();
            let steps = path.steps();
            assert_eq!(steps[0], (0, 0));
            assert_eq!(*steps.last().unwrap(), (m - 1, m - 1));
            for w in steps.windows(2) {
                let di = w[1].0 - w[0].0;
                let dj = w[1].1 - w[0].1;
                assert!(di <= 1 && dj <= 1 && di + dj >= 1);
            }
        }
    }

    #[test]
    fn kernels_agree_with_oracle_and_each_other() {
        let mut rng = Lcg(42);
        for trial in 0..200 {
            let ch = 1 + trial % 4;
            let m = 2 + (rng.next_f64().abs() * 18.0) as usize;
            let a: Vec<f64> = (0..m * ch).map(|_| rng.next_f64()).collect();
            let b: Vec<f64> = (0..m * ch).map(|_| rng.next_f64()).collect();
            let va = view(&a, ch);
            let vb = view(&b, ch);
            let cfg = DtwConfig::default();
            let (full, _) = dtw_distance(va, vb, &cfg).unwrap();
            let fast = dtw_distance_only(va, vb, &cfg).unwrap();
            let want = oracle(&a, &b, ch);
            assert!(
                (full - want).abs() < 1e-9 && (fast - want).abs() < 1e-9,
                "trial {trial}: full={full} fast={fast} oracle={want}"
            );
            assert_eq!(full.to_bits(), fast.to_bits(), "kernels must agree bit-for-bit");
        }
    }

    #[test]
    fn symmetry_and_upper_bound() {
        let mut rng = Lcg(99);
        for _ in 0..50 {
            let m = 2 + (rng.next_f64().abs() * 15.0) as usize;
            let a: Vec<f64> = (0..m * 2).map(|_| rng.next_f64()).collect();
            let b: Vec<f64> = (0..m * 2).map(|_| rng.next_f64()).collect();
            let cfg = DtwConfig::default();
            let dab = dtw_distance_only(view(&a, 2), view(&b, 2), &cfg).unwrap();
            let dba = dtw_distance_only(view(&b, 2), view(&a, 2), &cfg).unwrap();
            assert!((dab - dba).abs() < 1e-12);
            // The diagonal path is always admissible, so DTW never exceeds
            // the flattened Euclidean distance.
            let euclid = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            assert!(dab <= euclid + 1e-12);
        }
    }

    #[test]
    fn band_is_monotone_in_radius() {
        let mut rng = Lcg(5);
        for _ in 0..30 {
            let m = 4 + (rng.next_f64().abs() * 12.0) as usize;
            let a: Vec<f64> = (0..m).map(|_| rng.next_f64()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.next_f64()).collect();
            let va = view(&a, 1);
            let vb = view(&b, 1);
            let unconstrained = dtw_distance_only(va, vb, &DtwConfig::unconstrained()).unwrap();
            let mut last = f64::INFINITY;
            for r in 0..m {
                let d = dtw_distance_only(va, vb, &DtwConfig::banded(r)).unwrap();
                assert!(d <= last + 1e-12, "radius {r} increased the distance");
                assert!(d + 1e-12 >= unconstrained);
                last = d;
            }
            assert!((last - unconstrained).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_full_table_matches_banded_kernel() {
        let mut rng = Lcg(17);
        for _ in 0..30 {
            let m = 4 + (rng.next_f64().abs() * 12.0) as usize;
            let a: Vec<f64> = (0..m * 2).map(|_| rng.next_f64()).collect();
            let b: Vec<f64> = (0..m * 2).map(|_| rng.next_f64()).collect();
            let r = (rng.next_f64().abs() * m as f64) as usize;
            let cfg = DtwConfig::banded(r);
            let (full, _) = dtw_distance(view(&a, 2), view(&b, 2), &cfg).unwrap();
            let fast = dtw_distance_only(view(&a, 2), view(&b, 2), &cfg).unwrap();
            assert_eq!(full.to_bits(), fast.to_bits());
        }
    }

    #[test]
    fn dimension_errors() {
        let a = [0.0, 1.0];
        let b = [0.0, 1.0, 2.0];
        assert!(matches!(
            dtw_distance(view(&a, 1), view(&b, 1), &DtwConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
        let c = [0.0, 1.0, 2.0, 3.0];
        assert!(matches!(
            dtw_distance(view(&a, 1), view(&c, 2), &DtwConfig::default()),
            Err(Error::ChannelMismatch { .. })
        ));
        let nan = [f64::NAN, 0.0];
        assert!(matches!(
            dtw_distance(view(&nan, 1), view(&a, 1), &DtwConfig::default()),
            Err(Error::NonFinite { .. })
        ));
    }

    fn epoch(id: usize, data: Vec<f64>, ch: usize) -> Epoch {
        let m = data.len() / ch;
        Epoch::new(id, "p", 0, m, ch, data).unwrap()
    }

    #[test]
    fn pairwise_identical_and_symmetric() {
        let e1 = epoch(0, vec![1.0, 2.0, 3.0], 1);
        let e2 = epoch(1, vec![1.0, 2.0, 3.0], 1);
        let e3 = epoch(2, vec![5.0, 6.0, 7.0], 1);
        let m = pairwise_matrix(&[e1, e2, e3], &DtwConfig::default()).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(0, 2), m.get(1, 2));
        assert!(m.get(0, 2) > 0.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn pairwise_matches_per_pair_oracle() {
        let mut rng = Lcg(2024);
        let ch = 2;
        let m = 9;
        let epochs: Vec<Epoch> = (0..5)
            .map(|id| epoch(id, (0..m * ch).map(|_| rng.next_f64()).collect(), ch))
            .collect();
        let matrix = pairwise_matrix(&epochs, &DtwConfig::default()).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let want = oracle(epochs[i].data(), epochs[j].data(), ch);
                assert!((matrix.get(i, j) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pairwise_rejects_mixed_lengths_and_counts() {
        let e1 = epoch(0, vec![1.0, 2.0], 1);
        let e2 = epoch(1, vec![1.0, 2.0, 3.0], 1);
        assert!(matches!(
            pairwise_matrix(&[e1.clone(), e2], &DtwConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            pairwise_matrix(&[e1], &DtwConfig::default()),
            Err(Error::TooFewEpochs { .. })
        ));
    }
}
