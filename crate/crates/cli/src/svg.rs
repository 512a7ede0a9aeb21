//! Minimal SVG line charts for quick inspection of a run: edge distances
//! against their desired values, and tank energies. No plotting
//! dependencies; output is a fixed-size chart with auto-scaled axes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use tanksim_core::Trace;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 45.0;

const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22",
];

struct Series<'a> {
    label: String,
    values: &'a [f64],
    dashed: bool,
    color: &'a str,
}

fn render(title: &str, times: &[f64], series: &[Series]) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &v in s.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let t0 = times.first().copied().unwrap_or(0.0);
    let t1 = times.last().copied().unwrap_or(1.0).max(t0 + 1e-9);

    let sx = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
        WIDTH / 2.0
    );
    // Axes.
    let _ = writeln!(
        out,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    );
    for (frac, anchor) in [(0.0, "start"), (0.5, "middle"), (1.0, "end")] {
        let t = t0 + frac * (t1 - t0);
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"{anchor}\">{t:.1}</text>",
            x = sx(t),
            y = HEIGHT - MARGIN + 16.0
        );
        let v = lo + frac * (hi - lo);
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{v:.2}</text>",
            x = MARGIN - 5.0,
            y = sy(v) + 4.0
        );
    }

    for s in series {
        let mut points = String::new();
        // Subsample long runs; 2000 points is plenty for inspection.
        let stride = (times.len() / 2000).max(1);
        for (k, (&t, &v)) in times.iter().zip(s.values).enumerate() {
            if k % stride == 0 || k + 1 == times.len() {
                let _ = write!(points, "{:.2},{:.2} ", sx(t), sy(v));
            }
        }
        let dash = if s.dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"{dash} points=\"{points}\"><title>{}</title></polyline>",
            s.color, s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Edge distances over time with the desired distances as dashed lines.
pub fn edge_distance_chart(trace: &Trace) -> String {
    let mut series = Vec::new();
    let desired: Vec<Vec<f64>> = trace
        .edges
        .iter()
        .map(|&(_, _, d)| vec![d; trace.n_steps()])
        .collect();
    for (e, (&(i, j, _), dists)) in trace.edges.iter().zip(&trace.edge_distances).enumerate() {
        series.push(Series {
            label: format!("edge ({i},{j})"),
            values: dists,
            dashed: false,
            color: PALETTE[e % PALETTE.len()],
        });
    }
    for (e, d) in desired.iter().enumerate() {
        series.push(Series {
            label: format!("desired {e}"),
            values: d,
            dashed: true,
            color: "black",
        });
    }
    render("edge distances (m)", &trace.times, &series)
}

/// Tank energy h per robot over time. Empty string when no filter ran.
pub fn tank_chart(trace: &Trace) -> Option<String> {
    trace.initial_tank?;
    let series: Vec<Series> = trace
        .robots
        .iter()
        .enumerate()
        .map(|(i, r)| Series {
            label: format!("robot {i}"),
            values: r.tank.as_ref().unwrap(),
            dashed: false,
            color: PALETTE[i % PALETTE.len()],
        })
        .collect();
    Some(render("tank energy h", &trace.times, &series))
}

pub fn write_charts(dir: &Path, trace: &Trace) -> Result<()> {
    let edges = dir.join("edges.svg");
    std::fs::write(&edges, edge_distance_chart(trace))
        .with_context(|| format!("cannot write {}", edges.display()))?;
    if let Some(chart) = tank_chart(trace) {
        let tank = dir.join("tank.svg");
        std::fs::write(&tank, chart)
            .with_context(|| format!("cannot write {}", tank.display()))?;
    }
    Ok(())
}
