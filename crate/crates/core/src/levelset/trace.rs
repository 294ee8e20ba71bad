//! Marching-squares tracing of `F(x, y) = |Gₙ*(x + iy)| − p^{x₀}` and the
//! classification of the traced components.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PrunedSum;
use crate::error::{Error, Result};
use crate::par;
use crate::zerofinder::{edge_phase, find_zeros, Rectangle};

/// Tail tolerance for recognising a horizontal asymptote.
pub const ASYMPTOTE_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentClass {
    ClosedLoop,
    /// Both arms leave the window on the left, each settling on an ordinate
    /// `(2k+1)π/(2 ln 2)`.
    OpenWithAsymptote,
    /// Runs from the bottom edge of the window to the top edge.
    SingleOpenCurve,
    /// Cut by the window in a way that fits none of the above.
    Clipped,
}

impl ComponentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentClass::ClosedLoop => "closed_loop",
            ComponentClass::OpenWithAsymptote => "open_with_asymptote",
            ComponentClass::SingleOpenCurve => "single_open_curve",
            ComponentClass::Clipped => "clipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComponent {
    pub class: ComponentClass,
    pub vertices: Vec<[f64; 2]>,
    /// Winding number of `Gₙ*` around a closed loop, oriented
    /// counter-clockwise.
    pub winding: Option<i64>,
    /// Certified zeros of `Gₙ*` inside a closed loop.
    pub zeros_inside: Option<usize>,
    /// Limiting ordinates of the arms of an asymptotic component.
    pub asymptotes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub b_minus: Option<f64>,
    pub b_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurveAnalysis {
    pub n: u64,
    pub x0: f64,
    pub level: f64,
    /// Window actually traced, after snapping its horizontal edges.
    pub window: Rectangle,
    pub grid: f64,
    pub components: Vec<LevelComponent>,
    pub extremes: Extremes,
    pub real_axis_hits: Vec<f64>,
    /// Saddle cells whose centre value was too close to the level to decide.
    pub flagged_cells: Vec<(usize, usize)>,
}

impl LevelCurveAnalysis {
    pub fn count(&self, class: ComponentClass) -> usize {
        self.components.iter().filter(|c| c.class == class).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// `None` picks `[b⁻ − 1, b⁺ + 0.5] × [−4π/ln 2, 4π/ln 2]`, with the left
    /// edge at `−12` when `x₀ = 0`.
    pub window: Option<Rectangle>,
    /// `None` means `min(0.01, π/(16 ln n))`.
    pub grid: Option<f64>,
    /// Move the horizontal window edges inward to lines the curve crosses
    /// cleanly, so that no component is cut by them.
    pub snap: bool,
    /// Winding and certified-zero count inside each closed loop.
    pub check_loops: bool,
    pub tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            window: None,
            grid: None,
            snap: true,
            check_loops: true,
            tol: 1e-10,
        }
    }
}

pub fn max_grid(n: u64) -> f64 {
    0.01f64.min(PI / (16.0 * (n as f64).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    /// Between nodes `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between nodes `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

struct Grid {
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
    /// Row-major, `values[j * nx + i] = F(x_i, y_j)`.
    values: Vec<f64>,
}

impl Grid {
    fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x0 + self.hx * (self.nx - 1) as f64
        } else {
            self.x0 + self.hx * i as f64
        }
    }

    fn y(&self, j: usize) -> f64 {
        self.y0 + self.hy * j as f64
    }

    fn v(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn side(&self, e: EdgeKey) -> Option<Side> {
        match e {
            EdgeKey::H(_, j) if j == 0 => Some(Side::Bottom),
            EdgeKey::H(_, j) if j + 1 == self.ny => Some(Side::Top),
            EdgeKey::V(i, _) if i == 0 => Some(Side::Left),
            EdgeKey::V(i, _) if i + 1 == self.nx => Some(Side::Right),
            _ => None,
        }
    }
}

struct LevelFn<'a> {
    g: &'a PrunedSum,
    level: f64,
}

impl LevelFn<'_> {
    fn at(&self, x: f64, y: f64) -> f64 {
        self.g.poly().scaled(Complex64::new(x, y)).unscaled().norm() - self.level
    }

    /// Crossing on the segment `a → b` where `F` changes sign.
    fn crossing(&self, a: [f64; 2], fa: f64, b: [f64; 2], fb: f64) -> [f64; 2] {
        let lerp = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        // Illinois-modified regula falsi on the parameter t ∈ [0, 1]
        let (mut t0, mut f0, mut t1, mut f1) = (0.0, fa, 1.0, fb);
        let mut side = 0;
        let mut t = f0 / (f0 - f1);
        for _ in 0..6 {
            let p = lerp(t);
            let ft = self.at(p[0], p[1]);
            if ft == 0.0 {
                break;
            }
            if (ft < 0.0) == (f1 < 0.0) {
                t1 = t;
                f1 = ft;
                if side == -1 {
                    f0 *= 0.5;
                }
                side = -1;
            } else {
                t0 = t;
                f0 = ft;
                if side == 1 {
                    f1 *= 0.5;
                }
                side = 1;
            }
            t = (t0 * f1 - t1 * f0) / (f1 - f0);
        }
        lerp(t.clamp(0.0, 1.0))
    }
}

fn default_window(g: &PrunedSum, x0: f64, tol: f64) -> Result<(Rectangle, Extremes)> {
    let b_plus = g.upper_extreme(x0, tol)?;
    let b_minus = if x0 == 0.0 { None } else { Some(g.lower_extreme(x0, tol)?) };
    let y = 4.0 * PI / LN_2;
    let x_min = b_minus.map_or(-12.0, |b| b - 1.0);
    Ok((Rectangle::new(x_min, b_plus + 0.5, -y, y)?, Extremes { b_minus, b_plus }))
}

/// Moves a horizontal edge inward, one grid step at a time, until the line
/// at that ordinate is one the level curve crosses cleanly: nowhere for
/// `x₀ ≤ 0`, exactly once for `x₀ > 0`.
fn snap_edge(f: &LevelFn, x0: f64, xs: &[f64], start: f64, step: f64, limit: f64) -> f64 {
    let clean = |y: f64| {
        let v: Vec<f64> = xs.iter().map(|&x| f.at(x, y)).collect();
        if x0 <= 0.0 {
            v.iter().all(|&s| s > 0.0)
        } else {
            v.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count() == 1
                && v.iter().all(|&s| s != 0.0)
        }
    };
    let mut y = start;
    while (limit - y) * step.signum() > 0.0 {
        if clean(y) {
            return y;
        }
        y += step;
    }
    start
}

/// Traces the level curve `|Gₙ*(z)| = p^{x₀}` in a window.
pub fn trace_level_curve(n: u64, x0: f64, opts: &TraceOptions) -> Result<LevelCurveAnalysis> {
    let g = PrunedSum::new(n)?;
    if !x0.is_finite() {
        return Err(Error::domain(format!("non-finite x0 {x0}")));
    }
    let h_max = max_grid(n);
    let h = opts.grid.unwrap_or(h_max);
    if !(h > 0.0 && h <= h_max * (1.0 + 1e-12)) {
        return Err(Error::precondition(format!(
            "grid spacing {h} exceeds min(0.01, π/(16 ln n)) = {h_max}"
        )));
    }
    let (default, extremes) = default_window(&g, x0, opts.tol.max(1e-13))?;
    let requested = opts.window.unwrap_or(default);
    let level = g.level(x0);
    let f = LevelFn { g: &g, level };

    let nx = (requested.width() / h).ceil() as usize + 1;
    let hx = requested.width() / (nx - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|i| requested.x_min + hx * i as f64).collect();
    let (mut y_lo, mut y_hi) = (requested.y_min, requested.y_max);
    if opts.snap {
        let mid = 0.5 * (y_lo + y_hi);
        y_hi = snap_edge(&f, x0, &xs, y_hi, -h, mid);
        y_lo = if (requested.y_min + requested.y_max).abs() < 1e-12 {
            -y_hi
        } else {
            snap_edge(&f, x0, &xs, y_lo, h, mid)
        };
    }
    let window = Rectangle::new(requested.x_min, requested.x_max, y_lo, y_hi)?;
    let ny = (window.height() / h).ceil() as usize + 1;
    let hy = window.height() / (ny - 1) as f64;
    let rows: Vec<Vec<f64>> = par::map_range(ny, |j| {
        let y = if j + 1 == ny { y_hi } else { y_lo + hy * j as f64 };
        xs.iter().map(|&x| f.at(x, y)).collect()
    });
    let grid = Grid {
        x0: window.x_min,
        y0: y_lo,
        hx,
        hy,
        nx,
        ny,
        values: rows.concat(),
    };
    let y_at = |j: usize| if j + 1 == ny { y_hi } else { grid.y(j) };

    // segments per cell row; saddles resolved by the centre value
    let scale = level.max(1e-300);
    let row_segments: Vec<(Vec<(EdgeKey, EdgeKey)>, Vec<(usize, usize)>)> =
        par::map_range(ny - 1, |j| {
            let mut segs = Vec::new();
            let mut flagged = Vec::new();
            for i in 0..nx - 1 {
                let v = [grid.v(i, j), grid.v(i + 1, j), grid.v(i + 1, j + 1), grid.v(i, j + 1)];
                let inside = v.map(|s| s < 0.0);
                let (b, r, t, l) = (
                    EdgeKey::H(i, j),
                    EdgeKey::V(i + 1, j),
                    EdgeKey::H(i, j + 1),
                    EdgeKey::V(i, j),
                );
                let mut crossed = Vec::with_capacity(4);
                if inside[0] != inside[1] {
                    crossed.push(b);
                }
                if inside[1] != inside[2] {
                    crossed.push(r);
                }
                if inside[2] != inside[3] {
                    crossed.push(t);
                }
                if inside[3] != inside[0] {
                    crossed.push(l);
                }
                match crossed.len() {
                    2 => segs.push((crossed[0], crossed[1])),
                    4 => {
                        let c = f.at(grid.x(i) + 0.5 * hx, y_at(j) + 0.5 * hy);
                        if c.abs() < 1e-12 * scale {
                            flagged.push((i, j));
                        }
                        let centre_inside = c < 0.0;
                        // pair the edges around the corners that differ from the centre
                        if centre_inside == inside[0] {
                            segs.push((b, r));
                            segs.push((t, l));
                        } else {
                            segs.push((l, b));
                            segs.push((r, t));
                        }
                    }
                    _ => {}
                }
            }
            (segs, flagged)
        });
    let mut segments = Vec::new();
    let mut flagged_cells = Vec::new();
    for (s, fl) in row_segments {
        segments.extend(s);
        flagged_cells.extend(fl);
    }

    // crossing point of every edge that carries a segment end
    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(k);
        adjacency.entry(b).or_default().push(k);
    }
    let edges: Vec<EdgeKey> = adjacency.keys().copied().collect();
    let points: Vec<[f64; 2]> = par::map(&edges, |&e| {
        let (a, b) = match e {
            EdgeKey::H(i, j) => ((i, j), (i + 1, j)),
            EdgeKey::V(i, j) => ((i, j), (i, j + 1)),
        };
        let pa = [xs[a.0], y_at(a.1)];
        let pb = [xs[b.0], y_at(b.1)];
        f.crossing(pa, grid.v(a.0, a.1), pb, grid.v(b.0, b.1))
    });
    let point_of: BTreeMap<EdgeKey, [f64; 2]> = edges.iter().copied().zip(points).collect();

    // deterministic chaining: open chains from boundary edges first
    let mut used = vec![false; segments.len()];
    let mut chains: Vec<(Vec<EdgeKey>, bool)> = Vec::new();
    let walk = |start: EdgeKey, first: usize, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut path = vec![start];
        let mut seg = first;
        let mut at = start;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            path.push(next);
            at = next;
            match adjacency[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        path
    };
    for (&e, segs) in &adjacency {
        if segs.len() == 1 && !used[segs[0]] {
            chains.push((walk(e, segs[0], &mut used), false));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            chains.push((walk(segments[k].0, k, &mut used), true));
        }
    }

    let mut components: Vec<LevelComponent> = chains
        .iter()
        .map(|(path, closed)| {
            let vertices: Vec<[f64; 2]> = path.iter().map(|e| point_of[e]).collect();
            let class = if *closed {
                ComponentClass::ClosedLoop
            } else {
                let ends = (grid.side(path[0]), grid.side(path[path.len() - 1]));
                match ends {
                    (Some(Side::Left), Some(Side::Left)) => ComponentClass::OpenWithAsymptote,
                    (Some(Side::Bottom), Some(Side::Top)) | (Some(Side::Top), Some(Side::Bottom)) => {
                        ComponentClass::SingleOpenCurve
                    }
                    _ => ComponentClass::Clipped,
                }
            };
            LevelComponent {
                class,
                vertices,
                winding: None,
                zeros_inside: None,
                asymptotes: Vec::new(),
            }
        })
        .collect();
    for c in components.iter_mut().filter(|c| c.class == ComponentClass::OpenWithAsymptote) {
        match arm_asymptotes(&c.vertices) {
            Some(a) => c.asymptotes = a,
            None => c.class = ComponentClass::Clipped,
        }
    }
    if opts.check_loops {
        let checks: Vec<Result<(i64, usize)>> = par::map(&components, |c| {
            if c.class == ComponentClass::ClosedLoop {
                loop_check(&g, &c.vertices, opts.tol)
            } else {
                Ok((0, 0))
            }
        });
        for (c, r) in components.iter_mut().zip(checks) {
            if c.class == ComponentClass::ClosedLoop {
                let (w, z) = r?;
                c.winding = Some(w);
                c.zeros_inside = Some(z);
            }
        }
    }

    let real_axis_hits = if window.y_min <= 0.0 && window.y_max >= 0.0 {
        real_hits(&g, level, &xs)
    } else {
        Vec::new()
    };
    Ok(LevelCurveAnalysis {
        n,
        x0,
        level,
        window,
        grid: h,
        components,
        extremes,
        real_axis_hits,
        flagged_cells,
    })
}

fn nearest_odd_asymptote(y: f64) -> f64 {
    let unit = PI / (2.0 * LN_2);
    let k = ((y / unit - 1.0) / 2.0).round();
    (2.0 * k + 1.0) * unit
}

/// Checks both arms of an open component for a horizontal asymptote and
/// returns the two limiting ordinates.
fn arm_asymptotes(vertices: &[[f64; 2]]) -> Option<Vec<f64>> {
    let (lo, hi) = vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v[0]), h.max(v[0])));
    let cut = lo + 0.1 * (hi - lo);
    let arm = |iter: &mut dyn Iterator<Item = &[f64; 2]>| -> Option<f64> {
        let tail: Vec<[f64; 2]> = iter.take_while(|v| v[0] <= cut).copied().collect();
        if tail.len() < 3 {
            return None;
        }
        let target = nearest_odd_asymptote(tail[0][1]);
        let near = tail.iter().all(|v| (v[1] - target).abs() <= ASYMPTOTE_TOL);
        // x must decrease toward the window edge
        let monotone = tail.windows(2).all(|w| w[0][0] <= w[1][0] + 1e-12);
        (near && monotone).then_some(target)
    };
    let a = arm(&mut vertices.iter())?;
    let b = arm(&mut vertices.iter().rev())?;
    Some(vec![a, b])
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    v.windows(2)
        .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
        .sum::<f64>()
        * 0.5
}

fn point_in_polygon(p: [f64; 2], v: &[[f64; 2]]) -> bool {
    let mut inside = false;
    for w in v.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Winding of `Gₙ*` around a closed loop and the certified zeros inside it.
fn loop_check(g: &PrunedSum, vertices: &[[f64; 2]], tol: f64) -> Result<(i64, usize)> {
    let ccw = signed_area(vertices) > 0.0;
    let mut total = 0.0;
    for w in vertices.windows(2) {
        let (a, b) = if ccw { (w[0], w[1]) } else { (w[1], w[0]) };
        total += edge_phase(
            g.poly(),
            Complex64::new(a[0], a[1]),
            Complex64::new(b[0], b[1]),
            0.05,
        )?;
    }
    let winding = (total / std::f64::consts::TAU).round() as i64;
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in vertices {
        x_lo = x_lo.min(v[0]);
        x_hi = x_hi.max(v[0]);
        y_lo = y_lo.min(v[1]);
        y_hi = y_hi.max(v[1]);
    }
    let bbox = Rectangle::new(x_lo - 0.01, x_hi + 0.01, y_lo - 0.01, y_hi + 0.01)?;
    let mut last = None;
    for attempt in 0..8 {
        let r = if attempt == 0 { bbox } else { bbox.jittered(attempt) };
        match find_zeros(g.poly(), &r, tol) {
            Ok(zs) => {
                let inside = zs
                    .iter()
                    .filter(|z| z.certified && point_in_polygon([z.re, z.im], vertices))
                    .count();
                return Ok((winding, inside));
            }
            Err(e @ Error::Boundary { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Abscissae where the level curve meets the real axis: roots of
/// `Gₙ*(x) = level`, which is increasing in `x`.
fn real_hits(g: &PrunedSum, level: f64, xs: &[f64]) -> Vec<f64> {
    let f = |x: f64| g.max_modulus(x) - level;
    let mut hits = Vec::new();
    for w in xs.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if fa == 0.0 {
            hits.push(w[0]);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            let (mut a, mut b) = (w[0], w[1]);
            while b - a > 1e-14 * (1.0 + a.abs()) {
                let m = 0.5 * (a + b);
                if (f(m) < 0.0) == (fa < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            hits.push(0.5 * (a + b));
        }
    }
    hits
}
