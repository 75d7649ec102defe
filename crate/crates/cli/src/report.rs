//! SVG plots and the text summary of an optimisation output directory.

use std::fmt::Write;

use asg_core::io::{RunReport, SequenceFile, VerificationReport};
use asg_core::moga::GenerationStats;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 500.0;
const LEGEND: f64 = 24.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Padded data range, never empty.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(0.5);
    (lo - pad, hi + pad)
}

/// A plot area with linear axes.
struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Plot {
    fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut p = Plot { x, y, body: String::new() };
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN - LEGEND);
        let _ = write!(
            p.body,
            r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            right - left,
            bottom - top
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let xv = x.0 + t * (x.1 - x.0);
            let yv = y.0 + t * (y.1 - y.0);
            let (px, _) = p.map(xv, y.0);
            let (_, py) = p.map(x.0, yv);
            let _ = write!(
                p.body,
                r##"<line x1="{px:.1}" y1="{bottom}" x2="{px:.1}" y2="{}" stroke="#444"/><text x="{px:.1}" y="{}" font-size="11" text-anchor="middle">{xv:.1}</text>"##,
                bottom + 5.0,
                bottom + 18.0
            );
            let _ = write!(
                p.body,
                r##"<line x1="{}" y1="{py:.1}" x2="{left}" y2="{py:.1}" stroke="#444"/><text x="{}" y="{:.1}" font-size="11" text-anchor="end">{yv:.1}</text>"##,
                left - 5.0,
                left - 8.0,
                py + 4.0
            );
        }
        let _ = write!(
            p.body,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text><text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text><text x="15" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            WIDTH / 2.0,
            MARGIN / 2.0 - 10.0,
            escape(title),
            (left + right) / 2.0,
            bottom + 38.0,
            escape(x_label),
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            escape(y_label)
        );
        p
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0, HEIGHT - MARGIN - LEGEND);
        (
            left + (x - self.x.0) / (self.x.1 - self.x.0) * (right - left),
            bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (bottom - top),
        )
    }

    fn finish(self, legend: &[(&str, &str)]) -> String {
        let mut s = format!(
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">
"#
        );
        s += &self.body;
        for (i, (label, color)) in legend.iter().enumerate() {
            let y = HEIGHT - 12.0;
            let x = MARGIN + 170.0 * i as f64;
            let _ = write!(
                s,
                r#"<rect x="{x}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{y}" font-size="11">{}</text>"#,
                y - 9.0,
                x + 15.0,
                escape(label)
            );
        }
        s += "\n</svg>\n";
        s
    }
}

/// Final population (and reorder neighbours when verified) in objective
/// space, with the best-sum sequence marked.
pub fn scatter_svg(run: &RunReport, verification: Option<&VerificationReport>) -> String {
    let neighbors: Vec<(f64, f64)> = verification
        .map(|v| v.neighbors.iter().map(|n| (n.fitness1, n.fitness2)).collect())
        .unwrap_or_default();
    let population: Vec<(f64, f64, bool)> = run
        .final_population
        .iter()
        .map(|p| (p.fitness1, p.fitness2, p.feasible))
        .collect();
    let best = (run.best.fitness1, run.best.fitness2);
    let xs = population.iter().map(|p| p.0).chain(neighbors.iter().map(|p| p.0)).chain([best.0]);
    let ys = population.iter().map(|p| p.1).chain(neighbors.iter().map(|p| p.1)).chain([best.1]);
    let mut plot = Plot::new(
        &format!("{}: fitness of generated sequences", run.model),
        "fitness 1 (insertion condition)",
        "fitness 2 (constraint transition)",
        range(xs),
        range(ys),
    );
    let mut legend = vec![("final population", "#1f77b4")];
    if verification.is_some() {
        legend.push(("reorder neighbours", "#ff7f0e"));
        plot.body += r#"<g class="series" id="neighbors">"#;
        for &(x, y) in &neighbors {
            let (px, py) = plot.map(x, y);
            let _ = write!(
                plot.body,
                r##"<rect x="{:.1}" y="{:.1}" width="6" height="6" fill="#ff7f0e" fill-opacity="0.6"/>"##,
                px - 3.0,
                py - 3.0
            );
        }
        plot.body += "</g>";
    }
    plot.body += r#"<g class="series" id="population">"#;
    for &(x, y, feasible) in &population {
        let (px, py) = plot.map(x, y);
        let fill = if feasible { "#1f77b4" } else { "none" };
        let _ = write!(
            plot.body,
            r##"<circle cx="{px:.1}" cy="{py:.1}" r="4" fill="{fill}" stroke="#1f77b4"/>"##
        );
    }
    plot.body += "</g>";
    let (px, py) = plot.map(best.0, best.1);
    let _ = write!(
        plot.body,
        r##"<circle class="best" cx="{px:.1}" cy="{py:.1}" r="8" fill="none" stroke="#d62728" stroke-width="2.5"><title>best-sum ({}, {})</title></circle>"##,
        best.0, best.1
    );
    legend.push(("best-sum sequence", "#d62728"));
    plot.finish(&legend)
}

/// Mean fitness values and feasible count per generation, averaged over
/// the independent runs.
pub fn convergence_svg(model: &str, histories: &[Vec<GenerationStats>]) -> String {
    let generations = histories.iter().map(Vec::len).min().unwrap_or(0);
    let n = histories.len().max(1) as f64;
    let mean = |f: fn(&GenerationStats) -> f64| -> Vec<f64> {
        (0..generations)
            .map(|g| histories.iter().map(|h| f(&h[g])).sum::<f64>() / n)
            .collect()
    };
    let curves = [
        ("mean fitness 1", "#1f77b4", mean(|s| s.mean_fitness1)),
        ("mean fitness 2", "#2ca02c", mean(|s| s.mean_fitness2)),
        ("feasible count", "#9467bd", mean(|s| s.feasible_count as f64)),
    ];
    let x = (0.0, generations.saturating_sub(1).max(1) as f64);
    let y = range(curves.iter().flat_map(|c| c.2.iter().copied()).chain([0.0]));
    let mut plot = Plot::new(&format!("{model}: convergence"), "generation", "value", x, y);
    for (label, color, values) in &curves {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(g, &v)| {
                let (px, py) = plot.map(g as f64, v);
                format!("{px:.1},{py:.1}")
            })
            .collect();
        let _ = write!(
            plot.body,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{label}</title></polyline>"#,
            points.join(" ")
        );
    }
    let legend: Vec<(&str, &str)> = curves.iter().map(|c| (c.0, c.1)).collect();
    plot.finish(&legend)
}

/// Feasible share, best-sum vector and per-step constraint breakdown.
pub fn summary_text(sequence: &SequenceFile, run: &RunReport, verification: Option<&VerificationReport>) -> String {
    let best = &sequence.best;
    let feasible = run.final_population.iter().filter(|p| p.feasible).count();
    let mut s = String::new();
    let _ = writeln!(s, "model {} ({} parts), seed {}", sequence.model, sequence.eta, sequence.seed);
    let _ = writeln!(
        s,
        "feasible: {:.1}% of the final population ({} of {})",
        100.0 * run.feasible_fraction,
        feasible,
        run.final_population.len()
    );
    let _ = writeln!(s, "best-sum sequence: {}", best.compact());
    let _ = writeln!(
        s,
        "fitness1 {} fitness2 {} (sum {})",
        best.fitness1,
        best.fitness2,
        best.fitness1 + best.fitness2
    );
    let _ = writeln!(
        s,
        "max CSTD {}, {} direction changes, insertions {} satisfied / {} violated",
        best.max_cstd, best.direction_changes, best.insertions_satisfied, best.insertions_violated
    );
    let _ = writeln!(s, "per-step CSTD:");
    let width = best.steps.iter().map(|st| st.name.len()).max().unwrap_or(0);
    for (k, st) in best.steps.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {:>3}  part {:>3} {:<width$}  {}  {:>3}",
            k + 1,
            st.part,
            st.name,
            st.direction,
            st.cstd
        );
    }
    let _ = writeln!(s, "rank-0 set: {} sequences", sequence.front.len());
    if let Some(v) = verification {
        let _ = writeln!(
            s,
            "reorder neighbours: {} ({:.1}% feasible), dominated by a neighbour: {}",
            v.neighbor_count,
            100.0 * v.feasible_fraction,
            v.dominated_by_neighbor
        );
        if let Some(x) = &v.exhaustive {
            let _ = writeln!(
                s,
                "exact front: {} points, coverage {:.0}%, hypervolume {} of {}",
                x.front.len(),
                100.0 * x.coverage,
                x.hypervolume_found,
                x.hypervolume_exact
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_pads_and_never_collapses() {
        assert_eq!(range([3.0, 3.0].into_iter()), (2.5, 3.5));
        assert_eq!(range(std::iter::empty()), (0.0, 1.0));
        let (lo, hi) = range([0.0, 100.0].into_iter());
        assert!(lo < 0.0 && hi > 100.0);
    }

    #[test]
    fn text_is_escaped() {
        assert_eq!(escape(r#"a<b & "c">"#), "a&lt;b &amp; &quot;c&quot;&gt;");
    }
}
