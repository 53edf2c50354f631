//! Hand-written SVG figures: trajectories, action components and
//! training curves. Output depends only on the inputs, so identical inputs
//! give identical bytes.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use rrn::eval::{astar_path, rasterize};
use rrn::policy::PolicyMode;
use rrn::td3::TrainingLog;
use rrn::world::{Point, Shape, WorldSpec};

use crate::io::TrajectoryFile;

const HYBRID: &str = "#d62828";
const PRIOR_ONLY: &str = "#7b2cbf";
const PATH: &str = "#f4a300";
const ASTAR: &str = "#1d3557";
const PRIOR_BAR: &str = "#f28e2b";
const RESIDUAL_BAR: &str = "#4e79a7";
const SERIES: [&str; 6] = ["#d62828", "#1d3557", "#2a9d8f", "#f4a300", "#7b2cbf", "#6c757d"];

struct Svg {
    out: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{width:.0}" height="{height:.0}" fill="white"/>"#);
        Self { out }
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, extra: &str) {
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-linejoin="round"{extra}/>"#,
            points(pts)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, escape(s));
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn points(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick spacing giving roughly `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = (span / target).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64, target: f64) -> Vec<f64> {
    let step = tick_step(hi - lo, target);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Plot-area mapping from data to pixel coordinates.
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width,
            self.top + (self.y.1 - y) / (self.y.1 - self.y.0) * self.height,
        )
    }

    fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str) {
        let (l, t, r, b) = (self.left, self.top, self.left + self.width, self.top + self.height);
        svg.line((l, b), (r, b), "black", 1.0);
        svg.line((l, t), (l, b), "black", 1.0);
        for v in ticks(self.x.0, self.x.1, 8.0) {
            let (px, _) = self.px(v, self.y.0);
            svg.line((px, b), (px, b + 4.0), "black", 1.0);
            svg.text(px, b + 16.0, "middle", &fmt_tick(v));
        }
        for v in ticks(self.y.0, self.y.1, 6.0) {
            let (_, py) = self.px(self.x.0, v);
            svg.line((l - 4.0, py), (l, py), "black", 1.0);
            svg.line((l, py), (r, py), "#e9ecef", 1.0);
            svg.text(l - 6.0, py + 4.0, "end", &fmt_tick(v));
        }
        svg.text((l + r) / 2.0, b + 34.0, "middle", x_label);
        let _ = writeln!(
            svg.out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            l - 42.0,
            (t + b) / 2.0,
            l - 42.0,
            (t + b) / 2.0,
            escape(y_label)
        );
    }
}

fn legend(svg: &mut Svg, x: f64, y: f64, entries: &[(&str, String)]) {
    for (i, (color, label)) in entries.iter().enumerate() {
        let yy = y + 16.0 * i as f64;
        svg.line((x, yy - 4.0), (x + 18.0, yy - 4.0), color, 3.0);
        svg.text(x + 24.0, yy, "start", label);
    }
}

/// Shortest grid path from `start` to `goal` as cell-center points, if one
/// exists. Occupied endpoints snap to the nearest free cell.
pub fn astar_overlay(world: &WorldSpec, start: Point, goal: Point, cols: usize, rows: usize) -> Result<Option<Vec<Point>>> {
    let grid = rasterize(world, cols, rows);
    let snap = |p: Point| grid.nearest_free(grid.cell_of(p), 8);
    let (Some(s), Some(g)) = (snap(start), snap(goal)) else {
        return Ok(None);
    };
    Ok(astar_path(&grid, s, g)?.map(|(_, cells)| cells.into_iter().map(|c| grid.cell_center(c)).collect()))
}

/// World outline, obstacles, the A* overlay and the driven path coloured
/// by which controller acted (sRRN: hybrid vs prior fallback).
pub fn trajectory_svg(world: &WorldSpec, traj: &TrajectoryFile, astar: Option<&[Point]>, goal_radius: f64) -> String {
    let scale = (900.0 / world.width()).min(600.0 / world.height());
    let margin = 20.0;
    let (w, h) = (world.width() * scale, world.height() * scale);
    let map = |p: Point| (margin + (p.x + world.width() / 2.0) * scale, margin + (world.height() / 2.0 - p.y) * scale);
    let mut svg = Svg::new(w + 2.0 * margin, h + 2.0 * margin + 60.0);
    let _ = writeln!(
        svg.out,
        r#"<rect x="{margin:.2}" y="{margin:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black" stroke-width="2"/>"#
    );
    let shape = |svg: &mut Svg, s: &Shape, style: &str| match *s {
        Shape::Rect { x_min, y_min, x_max, y_max } => {
            let (x0, y0) = map(Point::new(x_min, y_max));
            let _ = writeln!(
                svg.out,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" {style}/>"#,
                (x_max - x_min) * scale,
                (y_max - y_min) * scale
            );
        }
        Shape::Circle { cx, cy, r } => {
            let (x, y) = map(Point::new(cx, cy));
            let _ = writeln!(svg.out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" {style}/>"#, r * scale);
        }
    };
    shape(&mut svg, world.start_region(), r##"fill="#2a9d8f" fill-opacity="0.12" stroke="#2a9d8f" stroke-dasharray="4 3""##);
    shape(&mut svg, world.goal_region(), r##"fill="#e9c46a" fill-opacity="0.15" stroke="#e9c46a" stroke-dasharray="4 3""##);
    for o in world.obstacles() {
        shape(&mut svg, o, r##"fill="#6c757d""##);
    }
    if let Some(path) = astar {
        let pts: Vec<_> = path.iter().map(|&p| map(p)).collect();
        svg.polyline(&pts, ASTAR, 2.0, r#" stroke-dasharray="6 4" id="astar""#);
    }
    let poses = traj.poses();
    let color = |i: usize| match traj.mode {
        PolicyMode::Srrn if traj.rows[i].used_prior_only => PRIOR_ONLY,
        PolicyMode::Srrn => HYBRID,
        _ => PATH,
    };
    // consecutive steps of one colour share a polyline
    let mut i = 0;
    while i < traj.rows.len() {
        let c = color(i);
        let mut j = i;
        while j + 1 < traj.rows.len() && color(j + 1) == c {
            j += 1;
        }
        let pts: Vec<_> = poses[i..=j + 1].iter().map(|p| map(p.position())).collect();
        svg.polyline(&pts, c, 3.0, "");
        i = j + 1;
    }
    let (sx, sy) = map(poses[0].position());
    let _ = writeln!(svg.out, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="5" fill="{ASTAR}"/>"#);
    let (gx, gy) = map(traj.goal);
    let _ = writeln!(
        svg.out,
        r##"<circle cx="{gx:.2}" cy="{gy:.2}" r="{:.2}" fill="none" stroke="#2a9d8f" stroke-width="2"/>"##,
        goal_radius * scale
    );
    let mut entries = match traj.mode {
        PolicyMode::Srrn => vec![(HYBRID, "prior + residual".to_string()), (PRIOR_ONLY, "prior only".to_string())],
        m => vec![(PATH, m.to_string())],
    };
    if astar.is_some() {
        entries.push((ASTAR, "A* shortest path".into()));
    }
    legend(&mut svg, margin, h + 2.0 * margin + 8.0, &entries);
    svg.finish()
}

/// One stacked bar of the components plot. `prior + residual` is the
/// executed angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentBar {
    pub t: usize,
    pub prior: f64,
    pub residual: f64,
    pub epsilon: Option<f64>,
}

/// Split each step's executed angular velocity into the prior command and
/// the residual's effective contribution (after clipping). Prior-fallback
/// steps are all prior.
pub fn component_bars(traj: &TrajectoryFile, range: Option<(usize, usize)>) -> Result<Vec<ComponentBar>> {
    if matches!(traj.mode, PolicyMode::EndToEnd | PolicyMode::Random) {
        bail!("components plot needs a prior-based trajectory, got mode {}", traj.mode);
    }
    let bars: Vec<_> = traj
        .rows
        .iter()
        .filter(|r| range.is_none_or(|(a, b)| (a..=b).contains(&r.t)))
        .map(|r| ComponentBar {
            t: r.t,
            prior: r.omega_prior,
            residual: r.omega_exec - r.omega_prior,
            epsilon: r.epsilon,
        })
        .collect();
    if bars.is_empty() {
        bail!("no steps in the requested range");
    }
    Ok(bars)
}

/// Stacked bars of prior and residual angular velocity per step, with the
/// switch probability overlaid on a [0, 1] scale.
pub fn components_svg(bars: &[ComponentBar]) -> String {
    let (width, height) = (900.0, 420.0);
    let frame = Frame {
        left: 70.0,
        top: 20.0,
        width: width - 130.0,
        height: height - 110.0,
        x: (bars[0].t as f64 - 0.5, bars[bars.len() - 1].t as f64 + 0.5),
        y: (-1.0, 1.0),
    };
    let mut svg = Svg::new(width, height);
    frame.axes(&mut svg, "timestep", "angular velocity (rad/s)");
    let bar_w = (frame.width / bars.len() as f64 * 0.8).max(0.5);
    let rect = |svg: &mut Svg, t: usize, from: f64, to: f64, fill: &str, kind: &str, value: f64| {
        let (x, y0) = frame.px(t as f64, from);
        let (_, y1) = frame.px(t as f64, to);
        let _ = writeln!(
            svg.out,
            r#"<rect class="{kind}" data-t="{t}" data-value="{value}" x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{:.2}" fill="{fill}"/>"#,
            x - bar_w / 2.0,
            y0.min(y1),
            (y1 - y0).abs()
        );
    };
    for b in bars {
        rect(&mut svg, b.t, 0.0, b.prior, PRIOR_BAR, "prior", b.prior);
        rect(&mut svg, b.t, b.prior, b.prior + b.residual, RESIDUAL_BAR, "residual", b.residual);
    }
    let (zl, zy) = frame.px(frame.x.0, 0.0);
    svg.line((zl, zy), (frame.left + frame.width, zy), "black", 0.5);
    let eps: Vec<_> = bars
        .iter()
        .filter_map(|b| b.epsilon.map(|e| (b.t as f64, e)))
        .map(|(t, e)| {
            let (x, _) = frame.px(t, 0.0);
            (x, frame.top + (1.0 - e) * frame.height)
        })
        .collect();
    let mut entries = vec![(PRIOR_BAR, "prior".to_string()), (RESIDUAL_BAR, "residual".to_string())];
    if !eps.is_empty() {
        svg.polyline(&eps, HYBRID, 1.5, r#" id="epsilon""#);
        let r = frame.left + frame.width;
        svg.line((r, frame.top), (r, frame.top + frame.height), HYBRID, 1.0);
        for v in [0.0, 0.5, 1.0] {
            let y = frame.top + (1.0 - v) * frame.height;
            svg.line((r, y), (r + 4.0, y), HYBRID, 1.0);
            svg.text(r + 6.0, y + 4.0, "start", &fmt_tick(v));
        }
        entries.push((HYBRID, "uncertainty ε".into()));
    }
    legend(&mut svg, frame.left, height - 40.0, &entries);
    svg.finish()
}

/// Which training-log column a curve shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMetric {
    PathLength,
    EvalSuccess,
}

/// Mean and range across seeds at each x position.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveBand {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..v.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            v[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}

/// Aggregate one series (one log per seed) over the episodes all logs
/// share. Path length is smoothed per seed with a trailing window first.
pub fn curve_band(logs: &[TrainingLog], metric: CurveMetric, window: usize) -> Result<CurveBand> {
    let per_seed: Vec<Vec<(f64, f64)>> = logs
        .iter()
        .map(|log| match metric {
            CurveMetric::PathLength => {
                let ys: Vec<f64> = log.records.iter().map(|r| r.path_length).collect();
                log.records.iter().map(|r| r.episode as f64).zip(moving_average(&ys, window)).collect()
            }
            CurveMetric::EvalSuccess => log.eval_curve().into_iter().map(|(e, s)| (e as f64, s)).collect(),
        })
        .collect();
    let n = per_seed.iter().map(Vec::len).min().unwrap_or(0);
    if n == 0 {
        bail!("training logs have no {} points", if metric == CurveMetric::PathLength { "episode" } else { "evaluation" });
    }
    let mut band = CurveBand {
        x: Vec::with_capacity(n),
        mean: Vec::with_capacity(n),
        min: Vec::with_capacity(n),
        max: Vec::with_capacity(n),
    };
    for i in 0..n {
        let ys: Vec<f64> = per_seed.iter().map(|s| s[i].1).collect();
        band.x.push(per_seed[0][i].0);
        band.mean.push(ys.iter().sum::<f64>() / ys.len() as f64);
        band.min.push(ys.iter().copied().fold(f64::INFINITY, f64::min));
        band.max.push(ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(band)
}

/// Mean line and min–max band per series.
pub fn training_curve_svg(series: &[(String, CurveBand)], metric: CurveMetric) -> String {
    let (width, height) = (900.0, 480.0);
    let x_max = series.iter().flat_map(|(_, b)| b.x.last().copied()).fold(1.0, f64::max);
    let y_max = match metric {
        CurveMetric::PathLength => series.iter().flat_map(|(_, b)| b.max.iter().copied()).fold(1e-9, f64::max) * 1.05,
        CurveMetric::EvalSuccess => 1.0,
    };
    let frame = Frame {
        left: 70.0,
        top: 20.0,
        width: width - 100.0,
        height: height - 100.0,
        x: (0.0, x_max),
        y: (0.0, y_max),
    };
    let mut svg = Svg::new(width, height);
    let y_label = match metric {
        CurveMetric::PathLength => "path length per episode (m)",
        CurveMetric::EvalSuccess => "evaluation success rate",
    };
    frame.axes(&mut svg, "episode", y_label);
    let mut entries = Vec::new();
    for (k, (label, band)) in series.iter().enumerate() {
        let color = SERIES[k % SERIES.len()];
        let upper = band.x.iter().zip(&band.max).map(|(&x, &y)| frame.px(x, y));
        let lower = band.x.iter().zip(&band.min).rev().map(|(&x, &y)| frame.px(x, y));
        let poly: Vec<_> = upper.chain(lower).collect();
        let _ = writeln!(svg.out, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, points(&poly));
        let mean: Vec<_> = band.x.iter().zip(&band.mean).map(|(&x, &y)| frame.px(x, y)).collect();
        svg.polyline(&mean, color, 2.0, "");
        entries.push((color, label.clone()));
    }
    legend(&mut svg, frame.left, height - 40.0, &entries);
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rrn::td3::TrainingRecord;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 10.0, 5.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(ticks(-1.0, 1.0, 4.0), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(fmt_tick(0.5), "0.5");
        assert_eq!(fmt_tick(-0.0), "0");
    }

    #[test]
    fn moving_average_is_trailing() {
        assert_eq!(moving_average(&[1.0, 3.0, 5.0, 7.0], 2), vec![1.0, 2.0, 4.0, 6.0]);
        assert_eq!(moving_average(&[1.0, 3.0], 1), vec![1.0, 3.0]);
    }

    fn log(lengths: &[f64]) -> TrainingLog {
        TrainingLog {
            records: lengths
                .iter()
                .enumerate()
                .map(|(i, &l)| TrainingRecord {
                    episode: i as u64 + 1,
                    steps: 10,
                    path_length: l,
                    success: false,
                    ret: 0.0,
                    eval: None,
                })
                .collect(),
        }
    }

    #[test]
    fn band_spans_seeds() {
        let band = curve_band(&[log(&[1.0, 2.0, 3.0]), log(&[3.0, 4.0])], CurveMetric::PathLength, 1).unwrap();
        assert_eq!(band.x, vec![1.0, 2.0]);
        assert_eq!(band.mean, vec![2.0, 3.0]);
        assert_eq!(band.min, vec![1.0, 2.0]);
        assert_eq!(band.max, vec![3.0, 4.0]);
        assert!(curve_band(&[log(&[1.0])], CurveMetric::EvalSuccess, 1).is_err());
    }

    #[test]
    fn svg_is_well_formed_and_stable() {
        let band = curve_band(&[log(&[1.0, 2.0, 3.0])], CurveMetric::PathLength, 2).unwrap();
        let a = training_curve_svg(&[("residual".into(), band.clone())], CurveMetric::PathLength);
        let b = training_curve_svg(&[("residual".into(), band)], CurveMetric::PathLength);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polygon").count(), 1);
    }
}
