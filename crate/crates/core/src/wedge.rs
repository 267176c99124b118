//! Double wedge plot data and rendering, plus the objective and refinement
//! profiles.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lts::{estimate_scale, FitResult};

pub const DEFAULT_CLIP_LOW: f64 = 2.5;
pub const DEFAULT_CLIP_HIGH: f64 = 50.0;

/// `|scaled residual|` per candidate position (rows) and time (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeMatrix {
    pub positions: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub clip_low: f64,
    pub clip_high: f64,
}

/// How residuals at each position are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WedgeScaling {
    /// `r / sqrt(objective / h)`.
    Trimmed,
    /// `r / sigma`, with `sigma` the scale estimate of that position's
    /// fit (consistency and small-sample factors included), so that clean
    /// points are roughly standard normal.
    #[default]
    Consistent,
}

/// Absolute values of the per-position scaled residuals.
pub fn build_wedge(positions: &[usize], rows: &[Vec<f64>]) -> Result<WedgeMatrix> {
    if positions.len() != rows.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} positions for {} rows",
            positions.len(),
            rows.len()
        )));
    }
    if let Some(first) = rows.first() {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
            return Err(Error::DimensionMismatch(format!(
                "row {} has {} columns, expected {}",
                i + 1,
                r.len(),
                first.len()
            )));
        }
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("wedge positions must ascend".into()));
    }
    Ok(WedgeMatrix {
        positions: positions.to_vec(),
        values: rows
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).collect())
            .collect(),
        clip_low: DEFAULT_CLIP_LOW,
        clip_high: DEFAULT_CLIP_HIGH,
    })
}

impl WedgeMatrix {
    /// Wedge of the best fit at every searched position.
    pub fn from_fit(fit: &FitResult, scaling: WedgeScaling) -> Result<Self> {
        let len = fit.scaled_res.len();
        let params = fit.spec.param_count();
        let positions: Vec<usize> = fit.positions.iter().map(|p| p.position).collect();
        let rows: Vec<Vec<f64>> = fit
            .positions
            .iter()
            .map(|p| {
                if p.objective <= 0.0 {
                    return vec![0.0; len];
                }
                let s = match scaling {
                    WedgeScaling::Trimmed => (p.objective / fit.h as f64).sqrt(),
                    WedgeScaling::Consistent => estimate_scale(p.objective, fit.h, len, params, 1.0).sigma,
                };
                p.residuals.iter().map(|r| r / s).collect()
            })
            .collect();
        build_wedge(&positions, &rows)
    }

    pub fn clipped(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| clip_for_display(v, self.clip_low, self.clip_high))
                    .collect()
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Tab-separated dump: header of time indices, one row per position.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("position");
        for t in 1..=self.width() {
            let _ = write!(s, "\t{t}");
        }
        s.push('\n');
        for (p, row) in self.positions.iter().zip(&self.values) {
            let _ = write!(s, "{p}");
            for v in row {
                let _ = write!(s, "\t{}", crate::io::format_sig(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_svg(&self) -> String {
        render_svg(self)
    }
}

pub fn clip_for_display(v: f64, clip_low: f64, clip_high: f64) -> f64 {
    if v < clip_low {
        0.0
    } else if v > clip_high {
        clip_high
    } else {
        v
    }
}

const WHITE: [f64; 3] = [255.0, 255.0, 255.0];
const PALE_YELLOW: [f64; 3] = [255.0, 247.0, 160.0];
const RED: [f64; 3] = [220.0, 20.0, 20.0];
const BLACK: [f64; 3] = [0.0, 0.0, 0.0];

/// Piecewise-linear ramp: 0 white, `clip_low` pale yellow, `clip_high / 2`
/// red, `clip_high` black.
pub fn ramp_color(v: f64, clip_low: f64, clip_high: f64) -> [u8; 3] {
    let stops = [
        (0.0, WHITE),
        (clip_low, PALE_YELLOW),
        (0.5 * clip_high, RED),
        (clip_high, BLACK),
    ];
    let v = v.clamp(0.0, clip_high);
    let mut rgb = BLACK;
    for w in stops.windows(2) {
        let ((a, ca), (b, cb)) = (w[0], w[1]);
        if v <= b {
            let f = if b > a { (v - a) / (b - a) } else { 1.0 };
            rgb = [0, 1, 2].map(|k| ca[k] + f * (cb[k] - ca[k]));
            break;
        }
    }
    rgb.map(|c| c.round().clamp(0.0, 255.0) as u8)
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

const CELL: usize = 4;
const LEFT: usize = 48;
const TOP: usize = 16;
const BOTTOM: usize = 36;
const BAR_GAP: usize = 24;
const BAR_WIDTH: usize = 14;
const BAR_STEPS: usize = 50;

fn tick_step(n: usize) -> usize {
    [1, 2, 5, 10, 12, 20, 24, 50, 100, 200, 500]
        .into_iter()
        .find(|s| n / s <= 12)
        .unwrap_or(1000)
}

fn render_svg(w: &WedgeMatrix) -> String {
    let cols = w.width();
    let rows = w.positions.len();
    let plot_w = cols * CELL;
    let plot_h = (rows * CELL).max(CELL);
    let bar_x = LEFT + plot_w + BAR_GAP;
    let width = bar_x + BAR_WIDTH + 48;
    let height = TOP + plot_h + BOTTOM;
    let clipped = w.clipped();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    // position ascends upward: first row at the bottom
    for (i, row) in clipped.iter().enumerate() {
        let y = TOP + plot_h - (i + 1) * CELL;
        let mut j = 0;
        while j < row.len() {
            let c = ramp_color(row[j], w.clip_low, w.clip_high);
            let mut k = j + 1;
            while k < row.len() && ramp_color(row[k], w.clip_low, w.clip_high) == c {
                k += 1;
            }
            if c != [255, 255, 255] {
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{y}" width="{}" height="{CELL}" fill="{}"/>"#,
                    LEFT + j * CELL,
                    (k - j) * CELL,
                    hex(c)
                );
            }
            j = k;
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    let xs = tick_step(cols);
    for t in (1..=cols).filter(|t| t % xs == 0 || *t == 1) {
        let x = LEFT + (t - 1) * CELL + CELL / 2;
        let y0 = TOP + plot_h;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{t}</text>"#,
            y0 + 3,
            y0 + 14
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">time</text>"#,
        LEFT + plot_w / 2,
        TOP + plot_h + 30
    );
    let ys = tick_step(rows);
    for (i, p) in w.positions.iter().enumerate() {
        if i % ys != 0 {
            continue;
        }
        let y = TOP + plot_h - i * CELL - CELL / 2;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{p}</text>"#,
            LEFT - 3,
            LEFT - 5,
            y + 3
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="10" y="{}" text-anchor="middle" transform="rotate(-90 10 {})">shift position</text>"#,
        TOP + plot_h / 2,
        TOP + plot_h / 2
    );

    // colour bar, value increasing upward
    let step_h = plot_h as f64 / BAR_STEPS as f64;
    for k in 0..BAR_STEPS {
        let v = w.clip_high * (k as f64 + 0.5) / BAR_STEPS as f64;
        let y = TOP as f64 + plot_h as f64 - (k + 1) as f64 * step_h;
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x}" y="{y:.3}" width="{BAR_WIDTH}" height="{:.3}" fill="{}"/>"#,
            step_h + 0.01,
            hex(ramp_color(v, w.clip_low, w.clip_high))
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{bar_x}" y="{TOP}" width="{BAR_WIDTH}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for v in [0.0, w.clip_low, 0.5 * w.clip_high, w.clip_high] {
        let y = TOP as f64 + plot_h as f64 * (1.0 - v / w.clip_high);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.3}">{}</text>"#,
            bar_x + BAR_WIDTH + 3,
            y + 3.0,
            crate::io::format_sig(v)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the SVG rendering of `w` to `path`.
pub fn render_wedge(w: &WedgeMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, w.to_svg()).map_err(|e| Error::io(path, e))
}

/// Writes the tab-separated matrix dump.
pub fn write_wedge_tsv(w: &WedgeMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, w.to_tsv()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub position: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveProfile {
    pub boxes: Vec<BoxSummary>,
    /// `(position, lowest objective)`.
    pub min_curve: Vec<(usize, f64)>,
    /// Position where the minimum curve is lowest (earliest on ties).
    pub argmin: Option<usize>,
}

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" definition).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box summaries per position; positions without values are skipped.
pub fn objective_profile_data(rows: &[(usize, Vec<f64>)]) -> ObjectiveProfile {
    let mut boxes = Vec::with_capacity(rows.len());
    for (pos, vals) in rows {
        if vals.is_empty() {
            continue;
        }
        let mut v = vals.clone();
        v.sort_by(f64::total_cmp);
        boxes.push(BoxSummary {
            position: *pos,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        });
    }
    let min_curve: Vec<(usize, f64)> = boxes.iter().map(|b| (b.position, b.min)).collect();
    let argmin = min_curve
        .iter()
        .fold(None::<(usize, f64)>, |acc, &(p, v)| match acc {
            Some((_, best)) if best <= v => acc,
            _ => Some((p, v)),
        })
        .map(|(p, _)| p);
    ObjectiveProfile {
        boxes,
        min_curve,
        argmin,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementPlot {
    pub points: Vec<(usize, f64)>,
    /// Lowest point, earliest on ties.
    pub argmin: (usize, f64),
}

pub fn refinement_profile_data(profile: &[(usize, f64)]) -> Result<RefinementPlot> {
    let first = *profile
        .first()
        .ok_or_else(|| Error::InvalidInput("empty refinement profile".into()))?;
    let argmin = profile
        .iter()
        .copied()
        .fold(first, |best, p| if p.1 < best.1 { p } else { best });
    Ok(RefinementPlot {
        points: profile.to_vec(),
        argmin,
    })
}
