//! Complex zeros in rectangles by the argument principle.
//!
//! Winding numbers come from tracking the phase of `f` along the boundary
//! with adaptive steps, so no derivative is needed on the contour. Boxes are
//! quadrisected until each isolates one zero, which Newton then polishes.
//!
//! The module also hosts the closed-form zero sets of `ζ₂`, `G₃*`, `G₄*`,
//! translation numbers of the almost-periodic sums and the replication of a
//! zero along a sequence of such translations.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_4, LN_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gdpoly::GeneralizedDirichletPoly;
use crate::par;

/// Boundary samples with `|f| < BOUNDARY_GUARD · Σ|aₖ μₖ^z|` are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-8;

/// Subdivision depth after which a box is reported unresolved.
pub const MAX_DEPTH: u32 = 60;

const NEWTON_MAX_ITER: usize = 50;

// Split fractions tried in order; none is 1/2 so that symmetric zero sets
// (e.g. on the imaginary axis) do not land on the cuts.
const SPLITS: [(f64, f64); 6] = [
    (0.4727, 0.5281),
    (0.5363, 0.4619),
    (0.4129, 0.5867),
    (0.5923, 0.4211),
    (0.3571, 0.3389),
    (0.6457, 0.6733),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || !(x_min < x_max) || !(y_min < y_max) {
            return Err(Error::domain(format!(
                "invalid rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Rectangle {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x_min && z.re <= self.x_max && z.im >= self.y_min && z.im <= self.y_max
    }

    /// Counter-clockwise corners starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x_min, self.y_min),
            Complex64::new(self.x_max, self.y_min),
            Complex64::new(self.x_max, self.y_max),
            Complex64::new(self.x_min, self.y_max),
        ]
    }

    /// Four children cut at the given fractions of width and height.
    pub fn split(&self, fx: f64, fy: f64) -> [Rectangle; 4] {
        let xm = self.x_min + fx * self.width();
        let ym = self.y_min + fy * self.height();
        [
            Rectangle { x_max: xm, y_max: ym, ..*self },
            Rectangle { x_min: xm, y_max: ym, ..*self },
            Rectangle { x_min: xm, y_min: ym, ..*self },
            Rectangle { x_max: xm, y_min: ym, ..*self },
        ]
    }

    /// Mirror image under complex conjugation.
    pub fn conj(&self) -> Rectangle {
        Rectangle {
            y_min: -self.y_max,
            y_max: -self.y_min,
            ..*self
        }
    }

    /// Image under `z ↦ −z`.
    pub fn negated(&self) -> Rectangle {
        Rectangle {
            x_min: -self.x_max,
            x_max: -self.x_min,
            y_min: -self.y_max,
            y_max: -self.y_min,
        }
    }

    /// Deterministic perturbation of every side by at most `1e-4`.
    pub fn jittered(&self, attempt: u32) -> Rectangle {
        let o = |k: u32| 1e-4 * ((attempt as f64 * 0.754_877_666 + k as f64 * 0.569_840_291).fract() - 0.5) * 2.0;
        Rectangle {
            x_min: self.x_min + o(0),
            x_max: self.x_max + o(1),
            y_min: self.y_min + o(2),
            y_max: self.y_max + o(3),
        }
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.x_min, self.x_max, self.y_min, self.y_max)
    }
}

impl FromStr for Rectangle {
    type Err = Error;

    /// Parses `x_min,x_max,y_min,y_max`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::domain(format!("bad rectangle {s:?}: {e}")))?;
        match v[..] {
            [a, b, c, d] => Rectangle::new(a, b, c, d),
            _ => Err(Error::domain(format!("rectangle {s:?} needs four numbers"))),
        }
    }
}

/// A located zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexZero {
    pub re: f64,
    pub im: f64,
    /// `|f|` at the reported position.
    pub residual: f64,
    /// True when the zero sits alone in a box of winding number one.
    pub certified: bool,
    /// Winding of the smallest box reached; above one only for clusters
    /// that never separated.
    pub multiplicity: u32,
}

impl ComplexZero {
    pub fn position(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn lexicographic(a: &ComplexZero, b: &ComplexZero) -> Ordering {
        a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
    }
}

pub fn sort_zeros(zeros: &mut [ComplexZero]) {
    zeros.sort_by(ComplexZero::lexicographic);
}

/// A step size that resolves the fastest boundary oscillation of `poly`.
pub fn default_max_step(poly: &GeneralizedDirichletPoly) -> f64 {
    (0.5 / poly.frequency_span().max(1.0)).min(0.25)
}

fn guarded(poly: &GeneralizedDirichletPoly, z: Complex64) -> Result<Complex64> {
    let s = poly.scaled(z);
    let rel = s.relative_modulus();
    if !(rel >= BOUNDARY_GUARD) {
        return Err(Error::Boundary {
            near_re: z.re,
            near_im: z.im,
            modulus: rel,
        });
    }
    Ok(s.value)
}

/// Total change of `arg f` along the segment `a → b`.
///
/// Steps halve until consecutive phase increments stay below `π/4` and a
/// midpoint sample agrees with the full step.
pub fn edge_phase(
    poly: &GeneralizedDirichletPoly,
    a: Complex64,
    b: Complex64,
    max_step: f64,
) -> Result<f64> {
    let len = (b - a).norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let dir = (b - a) / len;
    let at = |t: f64| if t >= len { b } else { a + dir * t };
    let min_step = len * 1e-13;
    let mut prev = guarded(poly, a)?;
    let mut t = 0.0;
    let mut h = max_step.min(len);
    let mut total = 0.0;
    while t < len {
        let mut step = h.min(len - t);
        loop {
            let t1 = if t + step >= len { len } else { t + step };
            let v1 = guarded(poly, at(t1))?;
            let d = (v1 * prev.conj()).arg();
            if d.abs() < FRAC_PI_4 {
                let vm = guarded(poly, at(0.5 * (t + t1)))?;
                let d1 = (vm * prev.conj()).arg();
                let d2 = (v1 * vm.conj()).arg();
                if (d1 + d2 - d).abs() < 1e-9 {
                    total += d;
                    t = t1;
                    prev = v1;
                    break;
                }
            }
            step *= 0.5;
            if step < min_step {
                let z = at(t);
                return Err(Error::Boundary {
                    near_re: z.re,
                    near_im: z.im,
                    modulus: poly.scaled(z).relative_modulus(),
                });
            }
        }
        h = (2.0 * step).min(max_step);
    }
    Ok(total)
}

/// Number of zeros (with multiplicity) inside `rect`.
pub fn winding_number(
    poly: &GeneralizedDirichletPoly,
    rect: &Rectangle,
    max_step: f64,
) -> Result<i64> {
    if poly.len() < 2 {
        return Err(Error::precondition("polynomial is constant on vertical lines"));
    }
    let c = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        total += edge_phase(poly, c[i], c[(i + 1) % 4], max_step)?;
    }
    let w = total / TAU;
    let r = w.round();
    if (w - r).abs() > 0.05 {
        return Err(Error::Consistency(format!(
            "boundary phase {total} is not a multiple of 2π on {rect}"
        )));
    }
    Ok(r as i64)
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub tol: f64,
    pub max_step: f64,
    pub max_depth: u32,
}

impl SearchOptions {
    pub fn new(poly: &GeneralizedDirichletPoly, tol: f64) -> Self {
        SearchOptions {
            tol,
            max_step: default_max_step(poly),
            max_depth: MAX_DEPTH,
        }
    }
}

#[derive(Default)]
struct Found {
    zeros: Vec<ComplexZero>,
    unresolved: Vec<Rectangle>,
}

impl Found {
    fn merge(mut self, other: Found) -> Found {
        self.zeros.extend(other.zeros);
        self.unresolved.extend(other.unresolved);
        self
    }
}

fn newton_in(poly: &GeneralizedDirichletPoly, rect: &Rectangle, tol: f64) -> Option<ComplexZero> {
    let mut z = rect.center();
    for _ in 0..NEWTON_MAX_ITER {
        let s = poly.scaled(z);
        if s.derivative.norm() == 0.0 {
            return None;
        }
        let dz = s.value / s.derivative;
        z -= dz;
        if !rect.contains(z) {
            return None;
        }
        if dz.norm() <= (1e-3 * tol).max(4.0 * f64::EPSILON * z.norm()) {
            let s = poly.scaled(z);
            if s.relative_modulus() > 1e-9 {
                return None;
            }
            return Some(ComplexZero {
                re: z.re,
                im: z.im,
                residual: s.unscaled().norm(),
                certified: true,
                multiplicity: 1,
            });
        }
    }
    None
}

fn resolve(
    poly: &GeneralizedDirichletPoly,
    rect: Rectangle,
    winding: i64,
    depth: u32,
    opts: &SearchOptions,
) -> Found {
    if winding <= 0 {
        return Found::default();
    }
    if winding == 1 {
        if let Some(z) = newton_in(poly, &rect, opts.tol) {
            return Found {
                zeros: vec![z],
                unresolved: vec![],
            };
        }
    }
    if rect.diameter() <= 10.0 * opts.tol {
        let c = rect.center();
        return Found {
            zeros: vec![ComplexZero {
                re: c.re,
                im: c.im,
                residual: poly.scaled(c).unscaled().norm(),
                certified: winding == 1,
                multiplicity: winding as u32,
            }],
            unresolved: vec![],
        };
    }
    if depth >= opts.max_depth {
        return Found {
            zeros: vec![],
            unresolved: vec![rect],
        };
    }
    for &(fx, fy) in &SPLITS {
        let children = rect.split(fx, fy);
        let windings: Result<Vec<i64>> = children
            .iter()
            .map(|c| winding_number(poly, c, opts.max_step.min(c.diameter())))
            .collect();
        let Ok(windings) = windings else { continue };
        if windings.iter().sum::<i64>() != winding {
            continue;
        }
        let work: Vec<(Rectangle, i64)> = children
            .into_iter()
            .zip(windings)
            .filter(|&(_, w)| w > 0)
            .collect();
        return par::map(&work, |&(c, w)| resolve(poly, c, w, depth + 1, opts))
            .into_iter()
            .fold(Found::default(), Found::merge);
    }
    Found {
        zeros: vec![],
        unresolved: vec![rect],
    }
}

/// All zeros in `rect`, sorted by imaginary then real part.
///
/// The number returned (counting multiplicities) equals the winding number
/// of `rect`. Fails with [`Error::Boundary`] when the contour passes too
/// close to a zero, and with [`Error::IncompleteEnumeration`] when some box
/// cannot be resolved.
pub fn find_zeros(
    poly: &GeneralizedDirichletPoly,
    rect: &Rectangle,
    tol: f64,
) -> Result<Vec<ComplexZero>> {
    find_zeros_with(poly, rect, &SearchOptions::new(poly, tol))
}

pub fn find_zeros_with(
    poly: &GeneralizedDirichletPoly,
    rect: &Rectangle,
    opts: &SearchOptions,
) -> Result<Vec<ComplexZero>> {
    if !(opts.tol > 0.0) {
        return Err(Error::precondition("tolerance must be positive"));
    }
    let w = winding_number(poly, rect, opts.max_step)?;
    let mut found = resolve(poly, *rect, w, 0, opts);
    sort_zeros(&mut found.zeros);
    if !found.unresolved.is_empty() {
        return Err(Error::IncompleteEnumeration {
            found: found.zeros,
            unresolved: found.unresolved,
        });
    }
    Ok(found.zeros)
}

/// Zeros in `[x_lo, x_hi] × [y_lo, y_hi]`, searched band by band.
///
/// Interior band edges that pass too close to a zero are nudged by at most
/// `1e-4`; the outer edges are used as given.
pub fn scan_zeros(
    poly: &GeneralizedDirichletPoly,
    (x_lo, x_hi): (f64, f64),
    (y_lo, y_hi): (f64, f64),
    band: f64,
    tol: f64,
) -> Result<Vec<ComplexZero>> {
    let opts = SearchOptions::new(poly, tol);
    Rectangle::new(x_lo, x_hi, y_lo, y_hi)?;
    let bands = ((y_hi - y_lo) / band).ceil().max(1.0) as usize;
    let nominal: Vec<f64> = (0..=bands)
        .map(|j| {
            if j == bands {
                y_hi
            } else {
                y_lo + j as f64 * (y_hi - y_lo) / bands as f64
            }
        })
        .collect();
    let edges: Vec<Result<f64>> = par::map_range(nominal.len(), |j| {
        let y = nominal[j];
        let line = |y: f64| {
            edge_phase(
                poly,
                Complex64::new(x_lo, y),
                Complex64::new(x_hi, y),
                opts.max_step,
            )
        };
        if j == 0 || j == bands {
            return line(y).map(|_| y);
        }
        let mut last = None;
        for attempt in 0..8u32 {
            let dy = if attempt == 0 {
                0.0
            } else {
                1e-4 * ((attempt as f64 * 0.618_033_988_7).fract() - 0.5) * 2.0
            };
            match line(y + dy) {
                Ok(_) => return Ok(y + dy),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    });
    let edges = edges.into_iter().collect::<Result<Vec<f64>>>()?;
    let rects: Vec<Rectangle> = edges
        .windows(2)
        .map(|w| Rectangle::new(x_lo, x_hi, w[0], w[1]))
        .collect::<Result<_>>()?;
    let results = par::map(&rects, |r| find_zeros_with(poly, r, &opts));
    let mut zeros = Vec::new();
    let mut unresolved = Vec::new();
    for r in results {
        match r {
            Ok(z) => zeros.extend(z),
            Err(Error::IncompleteEnumeration { found, unresolved: u }) => {
                zeros.extend(found);
                unresolved.extend(u);
            }
            Err(e) => return Err(e),
        }
    }
    sort_zeros(&mut zeros);
    if !unresolved.is_empty() {
        return Err(Error::IncompleteEnumeration {
            found: zeros,
            unresolved,
        });
    }
    Ok(zeros)
}

/// Families whose zeros are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedFormFamily {
    /// `ζ₂ = 1 + 2^{-z}`: `iπ(2k+1)/ln 2`.
    Zeta2,
    /// `G₃* = 1 + 2^z`: `iπ(2k+1)/ln 2`.
    G3Star,
    /// `G₄* = 1 + 2^z + 4^z`: `2πi(3k+1)/(3 ln 2)` and `2πi(3k+2)/(3 ln 2)`.
    G4Star,
}

impl FromStr for ClosedFormFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta2" => Ok(ClosedFormFamily::Zeta2),
            "g3star" => Ok(ClosedFormFamily::G3Star),
            "g4star" => Ok(ClosedFormFamily::G4Star),
            other => Err(Error::domain(format!("no closed form for {other:?}"))),
        }
    }
}

impl ClosedFormFamily {
    pub fn poly(self) -> GeneralizedDirichletPoly {
        match self {
            ClosedFormFamily::Zeta2 => GeneralizedDirichletPoly::partial_sum(2),
            ClosedFormFamily::G3Star => GeneralizedDirichletPoly::pruned_sum(3),
            ClosedFormFamily::G4Star => GeneralizedDirichletPoly::pruned_sum(4),
        }
        .expect("fixed small n")
    }
}

/// Closed-form zeros for `k` in `ks`, sorted by imaginary part.
pub fn closed_form_zeros(
    family: ClosedFormFamily,
    ks: std::ops::RangeInclusive<i64>,
) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = match family {
        ClosedFormFamily::Zeta2 | ClosedFormFamily::G3Star => ks
            .map(|k| Complex64::new(0.0, PI * (2 * k + 1) as f64 / LN_2))
            .collect(),
        ClosedFormFamily::G4Star => ks
            .flat_map(|k| {
                [1, 2].map(|r| Complex64::new(0.0, TAU * (3 * k + r) as f64 / (3.0 * LN_2)))
            })
            .collect(),
    };
    out.sort_by(|a, b| a.im.total_cmp(&b.im));
    out
}

/// A vertical shift `T` with `|f(z + iT) − f(z)| ≤ delta` on a strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationNumber {
    pub period: f64,
    /// Largest sampled `|f(z + iT) − f(z)|` over the strip grid.
    pub delta: f64,
    /// Analytic bound `Σ |aₖ| max μₖ^x · 2|sin(T ln μₖ / 2)|` over the strip.
    pub bound: f64,
}

fn shift_bound(weights: &[(f64, f64)], t: f64) -> f64 {
    weights
        .iter()
        .map(|&(w, l)| w * 2.0 * (0.5 * t * l).sin().abs())
        .sum()
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Exact common period of the exponentials when their frequencies are
/// commensurate with small denominators.
fn exact_period(poly: &GeneralizedDirichletPoly) -> Option<f64> {
    let freqs: Vec<f64> = poly
        .terms()
        .iter()
        .map(|t| t.ln_base().abs())
        .filter(|&l| l > 0.0)
        .collect();
    let base = freqs.iter().copied().fold(f64::INFINITY, f64::min);
    if !base.is_finite() {
        return None;
    }
    (1..=6).find_map(|q| {
        let g = base / q as f64;
        freqs
            .iter()
            .all(|&w| {
                let r = w / g;
                (r - r.round()).abs() < 1e-9
            })
            .then(|| TAU / g)
    })
}

fn sampled_shift_sup(poly: &GeneralizedDirichletPoly, (a, b): (f64, f64), t: f64) -> f64 {
    const NX: usize = 11;
    const NY: usize = 1000;
    let y_span = 4.0 * TAU / poly.frequency_span().max(1e-3).min(1.0).max(poly.min_ln_base().abs().min(1.0)).max(0.5);
    let rows = par::map_range(NX, |i| {
        let x = a + (b - a) * i as f64 / (NX - 1) as f64;
        (0..NY)
            .map(|j| {
                let z = Complex64::new(x, y_span * j as f64 / NY as f64);
                let shifted = poly.scaled(z + Complex64::new(0.0, t)).unscaled();
                (shifted - poly.scaled(z).unscaled()).norm()
            })
            .fold(0.0, f64::max)
    });
    rows.into_iter().fold(0.0, f64::max)
}

/// Smallest translation number in `(1, search_span]` on the strip `a ≤ Re z ≤ b`.
pub fn translation_number(
    poly: &GeneralizedDirichletPoly,
    delta: f64,
    strip: (f64, f64),
    search_span: f64,
) -> Result<TranslationNumber> {
    translation_number_in(poly, delta, strip, 1.0, search_span)
}

/// Smallest grid translation number in `(t_min, t_max]`.
///
/// The grid (step `1e-3`) is screened with the analytic shift bound, whose
/// local minima are refined by golden section; the winner is then verified
/// on a strip sample of about `10⁴` points.
pub fn translation_number_in(
    poly: &GeneralizedDirichletPoly,
    delta: f64,
    (a, b): (f64, f64),
    t_min: f64,
    t_max: f64,
) -> Result<TranslationNumber> {
    if !(delta > 0.0) {
        return Err(Error::precondition("delta must be positive"));
    }
    if !(a <= b) || !(t_min < t_max) {
        return Err(Error::precondition("empty strip or search range"));
    }
    let weights: Vec<(f64, f64)> = poly
        .terms()
        .iter()
        .map(|t| {
            let l = t.ln_base();
            (t.coeff.abs() * (a * l).exp().max((b * l).exp()), l)
        })
        .collect();
    let finish = |t: f64| {
        let bound = shift_bound(&weights, t);
        let sampled = sampled_shift_sup(poly, (a, b), t);
        TranslationNumber {
            period: t,
            delta: sampled,
            bound,
        }
    };
    if let Some(p) = exact_period(poly) {
        let t = p * ((t_min / p).floor() + 1.0);
        if t <= t_max {
            return Ok(finish(t));
        }
        return Err(Error::SearchExhausted(format!(
            "next exact period {t} exceeds {t_max}"
        )));
    }
    const STEP: f64 = 1e-3;
    let count = ((t_max - t_min) / STEP).floor() as usize;
    let u = |i: usize| shift_bound(&weights, t_min + STEP * i as f64);
    let (mut prev, mut cur) = (u(0), u(1));
    for i in 1..count {
        let next = u(i + 1);
        let t = t_min + STEP * i as f64;
        if cur <= delta {
            return Ok(finish(t));
        }
        if cur <= prev && cur <= next && cur < 2.0 * delta {
            let (tr, ur) = golden_min(|s| shift_bound(&weights, s), t - STEP, t + STEP, 1e-12);
            if ur <= delta && tr > t_min {
                return Ok(finish(tr));
            }
        }
        prev = cur;
        cur = next;
    }
    Err(Error::SearchExhausted(format!(
        "no translation number with delta {delta} in ({t_min}, {t_max}]"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaSchedule {
    /// `δ, δ/2, δ/4, …`
    Halving,
    Constant,
}

#[derive(Debug, Clone, Copy)]
pub struct ReplicationOptions {
    /// Half-width of the strip `|Re z − Re z₀| < eps`.
    pub eps: f64,
    /// Starting tolerance; `None` uses half the minimum of `|f|` on a circle
    /// about `z₀`, which makes each hit certain by Rouché's theorem.
    pub delta: Option<f64>,
    pub schedule: DeltaSchedule,
    /// Length of the window searched past the previous translation.
    pub search_span: f64,
    pub tol: f64,
}

impl Default for ReplicationOptions {
    fn default() -> Self {
        ReplicationOptions {
            eps: 0.25,
            delta: None,
            schedule: DeltaSchedule::Halving,
            search_span: 1e4,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub zeros: Vec<ComplexZero>,
    pub periods: Vec<f64>,
    /// The budget ran out before `count` zeros were found.
    pub exhausted: bool,
}

fn circle_min_modulus(poly: &GeneralizedDirichletPoly, z0: Complex64, r: f64) -> f64 {
    (0..720)
        .map(|k| {
            let th = TAU * k as f64 / 720.0;
            poly.scaled(z0 + Complex64::from_polar(r, th)).unscaled().norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Further zeros in the strip about a certified zero `z₀`, at `z₀ + iTₖ` for
/// translation numbers with `Tₖ₊₁ − Tₖ > 1`.
pub fn replicate_zero(
    poly: &GeneralizedDirichletPoly,
    z0: &ComplexZero,
    count: usize,
    opts: &ReplicationOptions,
) -> Result<Replication> {
    if !z0.certified {
        return Err(Error::precondition("seed zero is not certified"));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::precondition("eps must be positive"));
    }
    let mut out = Replication {
        zeros: Vec::new(),
        periods: Vec::new(),
        exhausted: false,
    };
    if count == 0 {
        return Ok(out);
    }
    let c0 = z0.position();
    let r = 0.9 * opts.eps.min(0.5);
    let delta0 = match opts.delta {
        Some(d) => d,
        None => 0.5 * circle_min_modulus(poly, c0, r),
    };
    if !(delta0 > 0.0) {
        return Err(Error::precondition("another zero lies on the replication circle"));
    }
    let strip = (c0.re - r, c0.re + r);
    let mut t_prev = 0.0;
    let mut k = 0;
    while out.zeros.len() < count {
        let delta = match opts.schedule {
            DeltaSchedule::Halving => delta0 / 2f64.powi(k),
            DeltaSchedule::Constant => delta0,
        };
        let t_min = (t_prev + 1.0f64).max(1.0);
        let tn = match translation_number_in(poly, delta, strip, t_min, t_min + opts.search_span) {
            Ok(tn) => tn,
            Err(Error::SearchExhausted(_)) => {
                out.exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        t_prev = tn.period;
        let centre = c0 + Complex64::new(0.0, tn.period);
        let mut hit = None;
        for shrink in 0..6 {
            let h = r * (1.0 - 0.013 * shrink as f64);
            let b = Rectangle::new(centre.re - h, centre.re + h, centre.im - h, centre.im + h)?;
            match find_zeros(poly, &b, opts.tol) {
                Ok(zs) => {
                    hit = zs
                        .into_iter()
                        .filter(|z| (z.position() - centre).norm() < r)
                        .min_by(|a, b| {
                            (a.position() - centre)
                                .norm()
                                .total_cmp(&(b.position() - centre).norm())
                        });
                    break;
                }
                Err(Error::Boundary { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        // Without the Rouché guarantee a translation can miss; try the next one.
        if let Some(z) = hit {
            out.zeros.push(z);
            out.periods.push(tn.period);
            k += 1;
        }
    }
    Ok(out)
}

/// Maps zeros of `Gₙ` to zeros of `ζₙ = Gₙ(−·)`, re-checking each residual
/// against `target`.
pub fn mirror_zeros(
    zeros: &[ComplexZero],
    target: &GeneralizedDirichletPoly,
) -> Result<Vec<ComplexZero>> {
    let mut out: Vec<ComplexZero> = zeros
        .iter()
        .map(|z| {
            let w = -z.position();
            let s = target.scaled(w);
            let residual = s.unscaled().norm();
            let allowed = (100.0 * z.residual).max(1e-9 * target.abs_scale(w.re));
            if residual > allowed {
                return Err(Error::Consistency(format!(
                    "mirror of {} has residual {residual:e} > {allowed:e}",
                    z.position()
                )));
            }
            Ok(ComplexZero {
                re: w.re,
                im: w.im,
                residual,
                ..*z
            })
        })
        .collect::<Result<_>>()?;
    sort_zeros(&mut out);
    Ok(out)
}

/// `Σ Re z` over the zeros with `0 < Im z ≤ T`, for each height `T`.
pub fn ritt_partial_sums(zeros: &[ComplexZero], heights: &[f64]) -> Vec<f64> {
    heights
        .iter()
        .map(|&t| {
            zeros
                .iter()
                .filter(|z| z.im > 0.0 && z.im <= t)
                .map(|z| z.re * z.multiplicity as f64)
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta2() -> GeneralizedDirichletPoly {
        GeneralizedDirichletPoly::partial_sum(2).unwrap()
    }

    fn gstar(n: u64) -> GeneralizedDirichletPoly {
        GeneralizedDirichletPoly::pruned_sum(n).unwrap()
    }

    #[test]
    fn winding_examples() {
        let p = zeta2();
        let w = |r: Rectangle| winding_number(&p, &r, default_max_step(&p)).unwrap();
        assert_eq!(w(Rectangle::new(-1.0, 1.0, 4.0, 5.0).unwrap()), 1);
        assert_eq!(w(Rectangle::new(-1.0, 1.0, 1.0, 2.0).unwrap()), 0);
        let g = gstar(4);
        let r = Rectangle::new(-0.5, 0.5, 2.5, 3.5).unwrap();
        assert_eq!(winding_number(&g, &r, default_max_step(&g)).unwrap(), 1);
    }

    #[test]
    fn boundary_through_zero_is_rejected() {
        let p = zeta2();
        let y0 = PI / LN_2;
        let r = Rectangle::new(-1.0, 1.0, y0, y0 + 1.0).unwrap();
        assert!(matches!(
            winding_number(&p, &r, 0.1),
            Err(Error::Boundary { .. })
        ));
        // a jittered copy passes
        let ok = (1..8).any(|k| winding_number(&p, &r.jittered(k), 0.1).is_ok());
        assert!(ok);
    }

    #[test]
    fn find_zeros_zeta2() {
        let p = zeta2();
        let r = Rectangle::new(-1.0, 1.0, 0.0, 30.0).unwrap();
        let zs = find_zeros(&p, &r, 1e-10).unwrap();
        let want = [4.5324, 13.5971, 22.6618];
        assert_eq!(zs.len(), 3);
        for (z, (w, cf)) in zs.iter().zip(want.iter().zip(closed_form_zeros(ClosedFormFamily::Zeta2, 0..=2))) {
            assert!(z.certified);
            assert!((z.im - w).abs() < 1e-4);
            assert!((z.position() - cf).norm() < 1e-10);
        }
    }

    #[test]
    fn find_zeros_g3star() {
        let zs = find_zeros(&gstar(3), &Rectangle::new(-1.0, 1.0, 0.0, 20.0).unwrap(), 1e-10).unwrap();
        let cf = closed_form_zeros(ClosedFormFamily::G3Star, 0..=1);
        assert_eq!(zs.len(), 2);
        for (z, c) in zs.iter().zip(cf) {
            assert!((z.position() - c).norm() < 1e-10);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            closed_form_zeros(ClosedFormFamily::Zeta2, 0..=0),
            vec![Complex64::new(0.0, PI / LN_2)]
        );
        let g4 = closed_form_zeros(ClosedFormFamily::G4Star, 0..=0);
        assert_eq!(g4.len(), 2);
        assert!((g4[0].im - TAU / (3.0 * LN_2)).abs() < 1e-15);
        assert!((g4[1].im - 2.0 * TAU / (3.0 * LN_2)).abs() < 1e-15);
        let neg = closed_form_zeros(ClosedFormFamily::G3Star, -1..=-1);
        assert!((neg[0].im + PI / LN_2).abs() < 1e-15);
        assert!("g5star".parse::<ClosedFormFamily>().is_err());
    }

    #[test]
    fn count_matches_winding_for_g5() {
        let g = GeneralizedDirichletPoly::mirrored_sum(5).unwrap();
        let r = Rectangle::new(-1.3, 2.7, 3.1, 17.9).unwrap();
        let w = winding_number(&g, &r, default_max_step(&g)).unwrap();
        let zs = find_zeros(&g, &r, 1e-10).unwrap();
        assert!(w > 0);
        assert_eq!(zs.iter().map(|z| z.multiplicity as i64).sum::<i64>(), w);
        for z in &zs {
            assert!(r.contains(z.position()));
            assert!(g.evaluate(z.position()).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn translation_number_exact_period() {
        let t = translation_number(&zeta2(), 1e-3, (-1.0, 1.0), 100.0).unwrap();
        assert!((t.period - TAU / LN_2).abs() < 1e-12);
        assert!(t.delta < 1e-12 && t.bound < 1e-12);
    }

    #[test]
    fn translation_number_g3() {
        let g = GeneralizedDirichletPoly::mirrored_sum(3).unwrap();
        let t = translation_number(&g, 0.1, (-1.0, 0.0), 1e3).unwrap();
        assert!(t.period > 1.0 && t.period <= 1e3);
        assert!(t.delta <= 0.1 && t.bound <= 0.1 && t.delta <= t.bound + 1e-12);
    }

    #[test]
    fn translation_number_g4() {
        let g = GeneralizedDirichletPoly::mirrored_sum(4).unwrap();
        let t = translation_number(&g, 0.05, (-1.0, 0.0), 1e4).unwrap();
        assert!(t.delta <= 0.05, "{t:?}");
    }

    #[test]
    fn replicate_zeta2_hits_closed_forms() {
        let p = zeta2();
        let seed = find_zeros(&p, &Rectangle::new(-1.0, 1.0, 4.0, 5.0).unwrap(), 1e-12).unwrap()[0];
        let rep = replicate_zero(&p, &seed, 5, &ReplicationOptions::default()).unwrap();
        assert!(!rep.exhausted);
        let cf = closed_form_zeros(ClosedFormFamily::Zeta2, 1..=5);
        assert_eq!(rep.zeros.len(), 5);
        for (z, c) in rep.zeros.iter().zip(cf) {
            assert!((z.position() - c).norm() < 1e-9, "{z:?} vs {c}");
        }
        assert!(rep.periods.windows(2).all(|w| w[1] - w[0] > 1.0));
        assert!(replicate_zero(&p, &seed, 0, &ReplicationOptions::default()).unwrap().zeros.is_empty());
    }

    #[test]
    fn mirror_examples() {
        let g2 = GeneralizedDirichletPoly::mirrored_sum(2).unwrap();
        let zs = find_zeros(&g2, &Rectangle::new(-1.0, 1.0, 4.0, 5.0).unwrap(), 1e-12).unwrap();
        let m = mirror_zeros(&zs, &zeta2()).unwrap();
        assert!((m[0].position() - Complex64::new(0.0, -PI / LN_2)).norm() < 1e-12);
        assert!(mirror_zeros(&[], &zeta2()).unwrap().is_empty());
        // a non-zero is caught
        let fake = ComplexZero { re: 0.3, im: 1.0, residual: 0.0, certified: true, multiplicity: 1 };
        assert!(matches!(mirror_zeros(&[fake], &zeta2()), Err(Error::Consistency(_))));
    }

    #[test]
    fn ritt_sums_vanish_for_imaginary_zeros() {
        let zs = find_zeros(&gstar(4), &Rectangle::new(-1.0, 1.0, 0.0, 60.0).unwrap(), 1e-12).unwrap();
        for s in ritt_partial_sums(&zs, &[10.0, 30.0, 60.0]) {
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn rectangle_parsing_and_validation() {
        let r: Rectangle = "-1,1,0,30".parse().unwrap();
        assert_eq!(r, Rectangle::new(-1.0, 1.0, 0.0, 30.0).unwrap());
        assert!("1,2,3".parse::<Rectangle>().is_err());
        assert!(Rectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, 1.0, 0.0, f64::NAN).is_err());
        let j = r.jittered(3);
        assert!((j.x_min - r.x_min).abs() <= 1e-4 && (j.y_max - r.y_max).abs() <= 1e-4);
    }
}
