//! Static SVG scatter maps of an embedding, colored by cluster, with an
//! optional per-patient trail connecting that patient's epochs in
//! chronological order (labelled `start` and `end`).

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::mds::Embedding;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 640.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#7f7f7f", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#bcbd22", "#17becf",
];

/// A patient's epochs in chronological order, for the consecutive-epoch
/// overlay.
#[derive(Debug, Clone)]
pub struct Trail {
    pub patient_id: String,
    pub epoch_ids: Vec<usize>,
}

fn color(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

/// Renders the embedding as an SVG scatter plot. `label_of` maps epoch id to
/// cluster label; every embedded point must have a label. Byte-identical for
/// identical inputs.
pub fn scatter_svg(
    embedding: &Embedding,
    label_of: &BTreeMap<usize, usize>,
    trail: Option<&Trail>,
) -> Result<String> {
    let points = embedding.points();
    if points.is_empty() {
        return Err(Error::Data("cannot plot an empty embedding".into()));
    }
    for p in points {
        if !label_of.contains_key(&p.epoch_id) {
            return Err(Error::Data(format!("no cluster label for epoch {}", p.epoch_id)));
        }
    }

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p.x());
        max_x = max_x.max(p.x());
        min_y = min_y.min(p.y());
        max_y = max_y.max(p.y());
    }
    let span_x = (max_x - min_x).max(1e-9);
    let span_y = (max_y - min_y).max(1e-9);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    // Uniform scale with 5% padding keeps distances comparable on both axes.
    let scale = (plot_w / (span_x * 1.1)).min(plot_h / (span_y * 1.1));
    let cx = (min_x + max_x) / 2.0;
    let cy = (min_y + max_y) / 2.0;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + plot_w / 2.0 + (x - cx) * scale,
            MARGIN_TOP + plot_h / 2.0 - (y - cy) * scale,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#cccccc\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">MDS dimension 1</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">MDS dimension 2</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for p in points {
        let (x, y) = to_px(p.x(), p.y());
        let label = label_of[&p.epoch_id];
        let _ = writeln!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.75\" stroke=\"#333333\" stroke-width=\"0.5\"/>",
            color(label)
        );
    }

    if let Some(trail) = trail {
        let position: BTreeMap<usize, (f64, f64)> = points
            .iter()
            .map(|p| (p.epoch_id, (p.x(), p.y())))
            .collect();
        let coords: Vec<(f64, f64)> = trail
            .epoch_ids
            .iter()
            .filter_map(|id| position.get(id).copied())
            .map(|(x, y)| to_px(x, y))
            .collect();
        if coords.len() >= 2 {
            let mut path = String::new();
            for (i, (x, y)) in coords.iter().enumerate() {
                let cmd = if i == 0 { 'M' } else { 'L' };
                let _ = write!(path, "{cmd}{x:.2} {y:.2} ");
            }
            let _ = writeln!(
                svg,
                "<path d=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>",
                path.trim_end()
            );
        }
        for (x, y) in &coords {
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>"
            );
        }
        if let Some((x, y)) = coords.first() {
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">start</text>",
                x + 7.0,
                y - 7.0
            );
        }
        if let Some((x, y)) = coords.last() {
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">end</text>",
                x + 7.0,
                y + 14.0
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{MARGIN_LEFT}\" y=\"24\" font-family=\"sans-serif\" font-size=\"13\">patient {} connected in consecutive order</text>",
            trail.patient_id
        );
    }

    // Legend: one row per cluster with its size.
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for p in points {
        *sizes.entry(label_of[&p.epoch_id]).or_insert(0) += 1;
    }
    let legend_x = WIDTH - MARGIN_RIGHT + 20.0;
    let mut legend_y = MARGIN_TOP + 10.0;
    for (label, size) in &sizes {
        let _ = writeln!(
            svg,
            "<circle cx=\"{legend_x:.2}\" cy=\"{legend_y:.2}\" r=\"5\" fill=\"{}\"/>",
            color(*label)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">cluster {label} ({size})</text>",
            legend_x + 12.0,
            legend_y + 4.0
        );
        legend_y += 20.0;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::classical_mds;
    use crate::signal::DistanceMatrix;

    fn embedding3() -> Embedding {
        let m = DistanceMatrix::from_square(
            vec![0, 1, 2],
            &[
                vec![0.0, 1.0, 3.0],
                vec![1.0, 0.0, 2.0],
                vec![3.0, 2.0, 0.0],
            ],
        )
        .unwrap();
        classical_mds(&m, 2).unwrap()
    }

    #[test]
    fn three_points_render_three_markers() {
        let e = embedding3();
        let labels: BTreeMap<usize, usize> = [(0, 0), (1, 0), (2, 1)].into_iter().collect();
        let svg = scatter_svg(&e, &labels, None).unwrap();
        let circles = svg.matches("<circle").count();
        // 3 data points + 2 legend swatches.
        assert_eq!(circles, 5);
        assert!(svg.contains("cluster 0 (2)"));
        assert!(svg.contains("cluster 1 (1)"));
    }

    #[test]
    fn output_is_deterministic() {
        let e = embedding3();
        let labels: BTreeMap<usize, usize> = [(0, 0), (1, 0), (2, 1)].into_iter().collect();
        let trail = Trail {
            patient_id: "p0".into(),
            epoch_ids: vec![0, 1, 2],
        };
        let a = scatter_svg(&e, &labels, Some(&trail)).unwrap();
        let b = scatter_svg(&e, &labels, Some(&trail)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(">start<"));
        assert!(a.contains(">end<"));
    }

    #[test]
    fn missing_label_is_an_error() {
        let e = embedding3();
        let labels: BTreeMap<usize, usize> = [(0, 0)].into_iter().collect();
        assert!(scatter_svg(&e, &labels, None).is_err());
    }
}
