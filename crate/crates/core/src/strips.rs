//! Projection sets of the zeros onto the real axis, critical bounds, `δₙ`,
//! and checks of the structural statements about them.
//!
//! Everything is computed in the frame of `Gₙ(z) = Σ k^z`; the partial sum
//! `ζₙ = Gₙ(−·)` is obtained by negating real parts.
//!
//! `Rₙ` denotes the closure of the real parts of zeros of `Gₙ`. A real `x`
//! belongs to `Rₙ` exactly when `m(x) ≤ p^x ≤ M(x)`, with `m`, `M` the
//! infimum and supremum of `|Gₙ*|` on the line `Re z = x`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::catalog::{search_envelope, ZeroCatalog};
use crate::error::{Error, Result};
use crate::gdpoly::{Base, Family, GeneralizedDirichletPoly};
use crate::levelset::{empirical_bstar, extreme_monotonicity, PrunedSum, FEASIBILITY_MARGIN};
use crate::par;
use crate::realroots::{
    drift_margins, factorial_inequality_check, solve_unique_root, zero_strip, RealExpEquation,
};
use crate::verdict::Verdict;
use crate::zerofinder::{ritt_partial_sums, ComplexZero};

/// Real parts within this distance of zero count as on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-9;

/// Width of the near-axis band searched for zeros of both signs.
pub const NEAR_AXIS: f64 = 0.05;

/// Default height for empirical bounds.
pub const BOUNDS_HEIGHT: f64 = 200.0;

/// Whether `x ∈ Rₙ`, i.e. `m(x) ≤ p^x ≤ M(x)` up to a relative slack.
pub fn rn_membership(n: u64, x: f64, tol: f64) -> Result<bool> {
    let g = PrunedSum::new(n)?;
    Ok(g.feasible_within(x, g.level(x), tol.max(FEASIBILITY_MARGIN)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionInterval {
    pub x_lo: f64,
    pub x_hi: f64,
    pub grid_step: f64,
    pub scan_range: (f64, f64),
    /// Gaps in membership between the first and last member grid points.
    pub holes: Vec<(f64, f64)>,
}

impl ProjectionInterval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi
    }

    /// The same set for `ζₙ`, obtained by `x ↦ −x`.
    pub fn mirrored(&self) -> ProjectionInterval {
        let mut holes: Vec<(f64, f64)> = self.holes.iter().map(|&(a, b)| (-b, -a)).collect();
        holes.reverse();
        ProjectionInterval {
            x_lo: -self.x_hi,
            x_hi: -self.x_lo,
            grid_step: self.grid_step,
            scan_range: (-self.scan_range.1, -self.scan_range.0),
            holes,
        }
    }
}

fn bisect_membership<F: Fn(f64) -> bool>(member: F, mut inside: f64, mut outside: f64, tol: f64) -> f64 {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if member(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// The longest run of members of `Rₙ` on a grid over the zero strip, with
/// both ends refined by bisection. Other runs are reported as holes.
pub fn projection_interval(n: u64, grid_step: f64, tol: f64) -> Result<ProjectionInterval> {
    if !(grid_step > 0.0) {
        return Err(Error::precondition("grid step must be positive"));
    }
    let g = PrunedSum::new(n)?;
    let member = |x: f64| g.feasible(x, g.level(x));
    let (l, r) = zero_strip(&GeneralizedDirichletPoly::mirrored_sum(n)?)?;
    let scan_range = (l - 0.1, r + 0.1);
    let count = ((scan_range.1 - scan_range.0) / grid_step).ceil() as usize + 1;
    let xs: Vec<f64> = (0..count).map(|i| scan_range.0 + grid_step * i as f64).collect();
    let flags = par::map(&xs, |&x| member(x));
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, count - 1));
    }
    let &(a, b) = runs
        .iter()
        .max_by_key(|&&(a, b)| (b - a, std::cmp::Reverse(a)))
        .ok_or_else(|| Error::SearchExhausted(format!("no member of R_{n} on the scan grid")))?;
    let x_lo = if a == 0 { xs[0] } else { bisect_membership(member, xs[a], xs[a - 1], tol) };
    let x_hi = if b + 1 == count {
        xs[b]
    } else {
        bisect_membership(member, xs[b], xs[b + 1], tol)
    };
    let holes = runs
        .windows(2)
        .map(|w| (xs[w[0].1], xs[w[1].0]))
        .collect();
    Ok(ProjectionInterval {
        x_lo,
        x_hi,
        grid_step,
        scan_range,
        holes,
    })
}

/// Root of `1 + 2^x + … + (n−1)^x = n^x`, an upper bound for real parts
/// of zeros of `Gₙ`.
pub fn analytic_upper_bound(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::precondition(format!("analytic bound needs n ≥ 3, got {n}")));
    }
    let terms = (1..=n).map(|k| (if k == n { -1.0 } else { 1.0 }, Base::integer(k)));
    let eq = RealExpEquation::new(GeneralizedDirichletPoly::new("upper", terms)?, 0.0)?;
    solve_unique_root(&eq, 0.0, 2.0, Some(1e-14))
}

/// Root of `4^x = 1 + 2·3^{x−1/2}`, the right end of `R₄`.
pub fn beta4() -> Result<f64> {
    let terms = [
        (1.0, Base::integer(1)),
        (-1.0, Base::integer(4)),
        (2.0 / 3f64.sqrt(), Base::integer(3)),
    ];
    let eq = RealExpEquation::new(GeneralizedDirichletPoly::new("beta4", terms)?, 0.0)?;
    solve_unique_root(&eq, 1.0, 1.5, Some(1e-14))
}

/// Root of `2^x + 3^x = 1`, the left end of `R₃`.
pub fn a3() -> Result<f64> {
    let terms = [(1.0, Base::integer(2)), (1.0, Base::integer(3))];
    let eq = RealExpEquation::new(GeneralizedDirichletPoly::new("a3", terms)?, 1.0)?;
    solve_unique_root(&eq, -0.8, -0.78, Some(1e-14))
}

/// Extreme real parts of certified zeros with `|Im z| ≤ height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBounds {
    pub a_hat: f64,
    pub b_hat: f64,
    pub height: f64,
    pub zeros: usize,
}

fn bounds_of(zeros: &[ComplexZero], height: f64) -> Option<EmpiricalBounds> {
    let re: Vec<f64> = zeros.iter().filter(|z| z.certified).map(|z| z.re).collect();
    let a = re.iter().copied().reduce(f64::min)?;
    let b = re.iter().copied().reduce(f64::max)?;
    Some(EmpiricalBounds {
        a_hat: a,
        b_hat: b,
        height,
        zeros: re.len(),
    })
}

/// `(â, b̂)` for `family` at order `n`; `None` when no zero is certified.
pub fn empirical_bounds(
    catalog: &ZeroCatalog,
    n: u64,
    family: Family,
    height: f64,
) -> Result<Option<EmpiricalBounds>> {
    let zeros = catalog.zeros(family, n, height)?;
    Ok(bounds_of(&zeros, height))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub n: u64,
    /// Left end of the projection interval, standing in for `aₙ`.
    pub a_n: f64,
    /// `b_{n, aₙ}`.
    pub upper_extreme_at_a: f64,
    pub b_hat: Option<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Height budget for existence witnesses.
    pub height: f64,
    /// Height for empirical bounds.
    pub bounds_height: f64,
    /// Grid step of the membership scans.
    pub grid_step: f64,
    pub tol: f64,
    pub k_max: u64,
    pub m_max: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            height: 1e4,
            bounds_height: BOUNDS_HEIGHT,
            grid_step: 1e-3,
            tol: 1e-10,
            k_max: 300,
            m_max: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T2,
    C3,
    T10,
    C11,
    L12,
    L13,
    T14,
    T15,
    C16,
    T17,
    C19,
    C20,
    C21,
    #[serde(rename = "asympt_report")]
    AsymptReport,
    #[serde(rename = "factorials")]
    Factorials,
    #[serde(rename = "drift")]
    Drift,
}

impl TheoremId {
    pub const ALL: [TheoremId; 16] = [
        TheoremId::T2,
        TheoremId::C3,
        TheoremId::T10,
        TheoremId::C11,
        TheoremId::L12,
        TheoremId::L13,
        TheoremId::T14,
        TheoremId::T15,
        TheoremId::C16,
        TheoremId::T17,
        TheoremId::C19,
        TheoremId::C20,
        TheoremId::C21,
        TheoremId::AsymptReport,
        TheoremId::Factorials,
        TheoremId::Drift,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T2 => "T2",
            TheoremId::C3 => "C3",
            TheoremId::T10 => "T10",
            TheoremId::C11 => "C11",
            TheoremId::L12 => "L12",
            TheoremId::L13 => "L13",
            TheoremId::T14 => "T14",
            TheoremId::T15 => "T15",
            TheoremId::C16 => "C16",
            TheoremId::T17 => "T17",
            TheoremId::C19 => "C19",
            TheoremId::C20 => "C20",
            TheoremId::C21 => "C21",
            TheoremId::AsymptReport => "asympt_report",
            TheoremId::Factorials => "factorials",
            TheoremId::Drift => "drift",
        }
    }

    /// Checks that concern a single `n`; the rest are global.
    pub fn per_n(self) -> bool {
        !matches!(self, TheoremId::C19 | TheoremId::Factorials | TheoremId::Drift)
    }

    /// The orders for which the statement says something.
    pub fn applies_to(self, n: u64) -> bool {
        match self {
            TheoremId::C11 => n == 3,
            TheoremId::T14 => n == 4,
            _ => n > 2,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem: TheoremId,
    /// `None` for checks that span all orders at once.
    pub n: Option<u64>,
    pub verdict: Verdict,
    pub detail: String,
    /// Numbers behind the verdict, keyed by name.
    pub values: BTreeMap<String, f64>,
}

impl TheoremCheck {
    fn new(theorem: TheoremId, n: Option<u64>, verdict: Verdict, detail: impl Into<String>) -> Self {
        TheoremCheck {
            theorem,
            n,
            verdict,
            detail: detail.into(),
            values: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }
}

/// `1 + (4/π − 1) ln ln n / ln n`.
pub fn asymptotic_upper(n: u64) -> f64 {
    let l = (n as f64).ln();
    1.0 + (4.0 / PI - 1.0) * l.ln() / l
}

/// Comparison columns against the large-`n` asymptotics, in the `ζₙ` frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticColumns {
    /// `b̂⁽ⁿ⁾ = −âₙ`.
    pub b_hat_zeta: f64,
    pub b_asymptotic: f64,
    /// `â⁽ⁿ⁾ / n = −b̂ₙ / n`.
    pub a_hat_zeta_over_n: f64,
    pub minus_ln2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub n: u64,
    pub family: Family,
    /// Strip searched for zeros, in the frame of `family`.
    pub envelope: (f64, f64),
    pub empirical_bounds: Option<EmpiricalBounds>,
    /// `sup{x : Σ_{k<n} k^x ≥ n^x}` in the frame of `Gₙ`.
    pub analytic_upper: Option<f64>,
    pub projection_interval: ProjectionInterval,
    pub delta_n: Option<f64>,
    /// `(T, Σ Re ρ)` over zeros `ρ` of `ζₙ` with `0 < Im ρ ≤ T`.
    pub ritt_sums: Vec<(f64, f64)>,
    pub asymptotics: Option<AsymptoticColumns>,
    pub verdicts: BTreeMap<String, Verdict>,
}

/// Shared state for reports and checks: the zero catalog and memoised
/// projection intervals.
#[derive(Debug)]
pub struct Analyzer {
    catalog: ZeroCatalog,
    budgets: Budgets,
    projections: Mutex<BTreeMap<u64, ProjectionInterval>>,
}

impl Analyzer {
    pub fn new(budgets: Budgets) -> Self {
        Analyzer {
            catalog: ZeroCatalog::new(budgets.tol),
            budgets,
            projections: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn with_catalog(budgets: Budgets, catalog: ZeroCatalog) -> Self {
        Analyzer {
            catalog,
            budgets,
            projections: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn catalog(&self) -> &ZeroCatalog {
        &self.catalog
    }

    pub fn budgets(&self) -> &Budgets {
        &self.budgets
    }

    pub fn projection(&self, n: u64) -> Result<ProjectionInterval> {
        if let Some(p) = self.projections.lock().expect("memo lock").get(&n) {
            return Ok(p.clone());
        }
        let p = projection_interval(n, self.budgets.grid_step, 1e-12)?;
        self.projections.lock().expect("memo lock").insert(n, p.clone());
        Ok(p)
    }

    pub fn delta_n(&self, n: u64) -> Result<DeltaReport> {
        let g = PrunedSum::new(n)?;
        let a_n = self.projection(n)?.x_lo;
        let upper = g.upper_extreme(a_n, 1e-12)?;
        let b_hat = empirical_bounds(&self.catalog, n, Family::G, self.budgets.bounds_height)?
            .map(|b| b.b_hat);
        let delta = b_hat.map_or(upper, |b| upper.min(b));
        if !(delta > 0.0) {
            return Err(Error::Consistency(format!("delta_{n} = {delta} is not positive")));
        }
        Ok(DeltaReport {
            n,
            a_n,
            upper_extreme_at_a: upper,
            b_hat,
            delta,
        })
    }

    /// Certified zeros of `family` at increasing heights up to `budget`,
    /// stopping at the first height where `done` holds.
    fn search<F>(&self, family: Family, n: u64, budget: f64, done: F) -> Result<(Vec<ComplexZero>, f64, bool)>
    where
        F: Fn(&[ComplexZero]) -> bool,
    {
        let mut ladder: Vec<f64> = [100.0, 300.0, 1e3, 3e3, 1e4, 3e4, 1e5]
            .into_iter()
            .filter(|&h| h < budget)
            .collect();
        ladder.push(budget);
        let mut last = (Vec::new(), 0.0);
        for h in ladder {
            let zeros: Vec<ComplexZero> = self
                .catalog
                .zeros(family, n, h)?
                .into_iter()
                .filter(|z| z.certified)
                .collect();
            if done(&zeros) {
                return Ok((zeros, h, true));
            }
            last = (zeros, h);
        }
        Ok((last.0, last.1, false))
    }

    fn check_t2(&self, n: u64) -> Result<TheoremCheck> {
        let count = |zs: &[ComplexZero]| {
            (
                zs.iter().filter(|z| z.re > AXIS_TOL).count(),
                zs.iter().filter(|z| z.re < -AXIS_TOL).count(),
            )
        };
        let (zs, h, ok) = self.search(Family::G, n, self.budgets.height, |zs| {
            let (p, m) = count(zs);
            p >= 3 && m >= 3
        })?;
        let (p, m) = count(&zs);
        let verdict = if ok { Verdict::Pass } else { Verdict::Inconclusive };
        Ok(TheoremCheck::new(
            TheoremId::T2,
            Some(n),
            verdict,
            format!("{p} zeros with Re > 0 and {m} with Re < 0 up to height {h}"),
        )
        .with("positive", p as f64)
        .with("negative", m as f64)
        .with("height", h))
    }

    fn check_c20(&self, n: u64) -> Result<TheoremCheck> {
        let near = |zs: &[ComplexZero]| {
            let p = zs.iter().filter(|z| z.re > AXIS_TOL && z.re <= NEAR_AXIS).count();
            let m = zs.iter().filter(|z| z.re < -AXIS_TOL && z.re >= -NEAR_AXIS).count();
            (p, m)
        };
        let (zs, h, ok) = self.search(Family::G, n, self.budgets.height, |zs| {
            let (p, m) = near(zs);
            p >= 1 && m >= 1
        })?;
        let (p, m) = near(&zs);
        let closest = zs
            .iter()
            .map(|z| z.re.abs())
            .filter(|&r| r > AXIS_TOL)
            .fold(f64::INFINITY, f64::min);
        let verdict = if ok { Verdict::Pass } else { Verdict::Inconclusive };
        Ok(TheoremCheck::new(
            TheoremId::C20,
            Some(n),
            verdict,
            format!("{p} zeros with 0 < Re ≤ {NEAR_AXIS}, {m} with −{NEAR_AXIS} ≤ Re < 0 up to height {h}"),
        )
        .with("near_positive", p as f64)
        .with("near_negative", m as f64)
        .with("closest_off_axis", closest)
        .with("height", h))
    }

    fn check_c3(&self, n: u64) -> Result<TheoremCheck> {
        let b = empirical_bounds(&self.catalog, n, Family::G, self.budgets.bounds_height)?;
        Ok(match b {
            Some(b) if b.a_hat < -AXIS_TOL && b.b_hat > AXIS_TOL => TheoremCheck::new(
                TheoremId::C3,
                Some(n),
                Verdict::Pass,
                format!("a_hat = {:.6} < 0 < b_hat = {:.6}", b.a_hat, b.b_hat),
            ),
            _ => TheoremCheck::new(
                TheoremId::C3,
                Some(n),
                Verdict::Inconclusive,
                format!("no zeros of both signs up to height {}", self.budgets.bounds_height),
            ),
        }
        .with("height", self.budgets.bounds_height))
    }

    fn check_t10(&self, n: u64) -> Result<TheoremCheck> {
        let g = PrunedSum::new(n)?;
        let r = self.projection(n)?;
        let mut failures = Vec::new();
        let mut checked = 0;
        for x0 in [r.x_lo, 0.5 * r.x_lo, 0.0] {
            let b = g.upper_extreme(x0, 1e-12)?;
            let (lo, hi) = (x0.max(r.x_lo), b.min(r.x_hi));
            if lo > hi {
                continue;
            }
            for i in 0..=200 {
                let x = lo + (hi - lo) * i as f64 / 200.0;
                checked += 1;
                if !g.feasible(x, g.level(x)) {
                    failures.push(x);
                }
            }
        }
        Ok(TheoremCheck::new(
            TheoremId::T10,
            Some(n),
            Verdict::from_bool(failures.is_empty()),
            format!("{checked} grid points of [x0, b_(n,x0)] ∩ [a_n, b_n], {} outside R_n", failures.len()),
        )
        .with("non_members", failures.len() as f64))
    }

    fn check_c11(&self) -> Result<TheoremCheck> {
        let r = self.projection(3)?;
        let a = a3()?;
        let ok = (r.x_lo - a).abs() <= 1e-6 && (r.x_hi - 1.0).abs() <= 1e-6 && r.holes.is_empty();
        Ok(TheoremCheck::new(
            TheoremId::C11,
            Some(3),
            Verdict::from_bool(ok),
            format!("R_3 ≈ [{:.9}, {:.9}], expected [{a:.9}, 1]", r.x_lo, r.x_hi),
        )
        .with("x_lo", r.x_lo)
        .with("x_hi", r.x_hi)
        .with("holes", r.holes.len() as f64))
    }

    fn check_t14(&self) -> Result<TheoremCheck> {
        let r = self.projection(4)?;
        let beta = beta4()?;
        let upper = analytic_upper_bound(4)?;
        let b_hat = empirical_bounds(&self.catalog, 4, Family::G, self.budgets.bounds_height)?
            .map_or(f64::NEG_INFINITY, |b| b.b_hat);
        let ok = r.holes.is_empty()
            && beta > 1.0
            && beta < 1.5
            && r.x_hi <= beta + 1e-6
            && b_hat <= beta
            && beta <= upper;
        Ok(TheoremCheck::new(
            TheoremId::T14,
            Some(4),
            Verdict::from_bool(ok),
            format!(
                "R_4 ≈ [{:.9}, {:.9}], beta_4 = {beta:.9}, b_hat = {b_hat:.6}, analytic bound {upper:.6}",
                r.x_lo, r.x_hi
            ),
        )
        .with("x_lo", r.x_lo)
        .with("x_hi", r.x_hi)
        .with("beta4", beta)
        .with("analytic_upper", upper))
    }

    /// Zeros of `Gₙ*` are all imaginary for `n = 3, 4`; for larger `n` some
    /// leave the axis on each side.
    fn check_pruned_axis(&self, id: TheoremId, n: u64) -> Result<TheoremCheck> {
        if n <= 4 {
            let zs = self.catalog.zeros(Family::GStar, n, self.budgets.bounds_height)?;
            let worst = zs.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
            let ok = !zs.is_empty() && worst <= AXIS_TOL && zs.iter().all(|z| z.certified);
            return Ok(TheoremCheck::new(
                id,
                Some(n),
                Verdict::from_bool(ok),
                format!("{} zeros of G*_{n}, max |Re| = {worst:.3e}", zs.len()),
            )
            .with("max_abs_re", worst));
        }
        let need_left = id == TheoremId::C16;
        let (zs, h, ok) = self.search(Family::GStar, n, self.budgets.bounds_height.max(1e3), |zs| {
            let right = zs.iter().any(|z| z.re > AXIS_TOL);
            let left = zs.iter().any(|z| z.re < -AXIS_TOL);
            right && (left || !need_left)
        })?;
        let b = zs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let a = zs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        Ok(TheoremCheck::new(
            id,
            Some(n),
            if ok { Verdict::Pass } else { Verdict::Inconclusive },
            format!("G*_{n} zeros up to height {h}: a* ≈ {a:.6}, b* ≈ {b:.6}"),
        )
        .with("a_star", a)
        .with("b_star", b)
        .with("height", h))
    }

    fn check_l12(&self, n: u64) -> Result<TheoremCheck> {
        let grid: Vec<f64> = (0..20).map(|i| -2.0 + 3.0 * i as f64 / 19.0).collect();
        let r = extreme_monotonicity(n, &grid, 1e-10)?;
        Ok(TheoremCheck::new(
            TheoremId::L12,
            Some(n),
            r.verdict,
            format!("min increment {:.3e} over 20 values of x0 in [-2, 1]", r.min_increment),
        )
        .with("min_increment", r.min_increment))
    }

    fn check_l13(&self, n: u64) -> Result<TheoremCheck> {
        let g = PrunedSum::new(n)?;
        let h = self.budgets.bounds_height;
        let Some((b_star, used)) = empirical_bstar(&self.catalog, n, h)? else {
            return Ok(TheoremCheck::new(
                TheoremId::L13,
                Some(n),
                Verdict::Inconclusive,
                format!("no zeros of G*_{n} up to height {h}"),
            ));
        };
        let samples = [-1.0, 0.0, 1.0];
        let b: Vec<f64> = samples
            .iter()
            .map(|&x0| g.upper_extreme(x0, 1e-12))
            .collect::<Result<_>>()?;
        let margin = b.iter().map(|v| v - b_star).fold(f64::INFINITY, f64::min);
        Ok(TheoremCheck::new(
            TheoremId::L13,
            Some(n),
            Verdict::from_bool(margin > 0.0),
            format!("b*_hat = {b_star:.6} from {used} zeros; min b_(n,x0) − b* = {margin:.6}"),
        )
        .with("b_star", b_star)
        .with("margin", margin))
    }

    fn check_t17(&self, n: u64) -> Result<TheoremCheck> {
        Ok(match self.delta_n(n) {
            Ok(d) => TheoremCheck::new(
                TheoremId::T17,
                Some(n),
                Verdict::Pass,
                format!("delta_{n} = {:.6}", d.delta),
            )
            .with("delta", d.delta),
            Err(Error::Consistency(msg)) => {
                TheoremCheck::new(TheoremId::T17, Some(n), Verdict::Fail, msg)
            }
            Err(e) => return Err(e),
        })
    }

    fn check_c21(&self, n: u64) -> Result<TheoremCheck> {
        let r = self.projection(n)?;
        let ok = r.x_lo < 0.0 && r.x_hi > 0.0;
        Ok(TheoremCheck::new(
            TheoremId::C21,
            Some(n),
            Verdict::from_bool(ok),
            format!("0 in ({:.6}, {:.6})", r.x_lo, r.x_hi),
        )
        .with("x_lo", r.x_lo)
        .with("x_hi", r.x_hi))
    }

    fn check_c19(&self, ns: &[u64]) -> Result<TheoremCheck> {
        let ns: Vec<u64> = ns.iter().copied().filter(|&n| n > 2).collect();
        if ns.is_empty() {
            return Err(Error::precondition("C19 needs some n > 2"));
        }
        let rows: Vec<Result<(ProjectionInterval, f64)>> = par::map(&ns, |&n| {
            Ok((self.projection(n)?, self.delta_n(n)?.delta))
        });
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let a = rows.iter().map(|r| r.0.x_lo).fold(f64::NEG_INFINITY, f64::max);
        let delta = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let ok = a < 0.0 && delta > 0.0 && rows.iter().all(|(p, _)| p.x_lo <= a && p.x_hi >= delta);
        Ok(TheoremCheck::new(
            TheoremId::C19,
            None,
            Verdict::from_bool(ok),
            format!("[{a:.6}, {delta:.6}] lies in every R_n for n in {:?}", ns),
        )
        .with("a", a)
        .with("delta", delta))
    }

    pub fn asymptotic_columns(&self, n: u64) -> Result<Option<AsymptoticColumns>> {
        let b = empirical_bounds(&self.catalog, n, Family::G, self.budgets.bounds_height)?;
        Ok(b.map(|b| AsymptoticColumns {
            b_hat_zeta: -b.a_hat,
            b_asymptotic: asymptotic_upper(n),
            a_hat_zeta_over_n: -b.b_hat / n as f64,
            minus_ln2: -LN_2,
        }))
    }

    fn check_asympt(&self, n: u64) -> Result<TheoremCheck> {
        let mut c = TheoremCheck::new(
            TheoremId::AsymptReport,
            Some(n),
            Verdict::ReportOnly,
            "comparison with large-n asymptotics, no decision",
        );
        if let Some(a) = self.asymptotic_columns(n)? {
            c = c
                .with("b_hat_zeta", a.b_hat_zeta)
                .with("b_asymptotic", a.b_asymptotic)
                .with("a_hat_zeta_over_n", a.a_hat_zeta_over_n)
                .with("minus_ln2", a.minus_ln2);
        }
        Ok(c)
    }

    fn check_factorials(&self) -> Result<TheoremCheck> {
        let k_max = self.budgets.k_max;
        let mut bad = Vec::new();
        for k in 3..=k_max {
            let c = factorial_inequality_check(k)?;
            if !c.holds_weak || (k >= 6 && !c.holds_sharp) {
                bad.push(k);
            }
        }
        Ok(TheoremCheck::new(
            TheoremId::Factorials,
            None,
            Verdict::from_bool(bad.is_empty()),
            format!("(k!)² > k^k for 3 ≤ k ≤ {k_max}, (k!)² > k^(k−1)(k−1)² for 6 ≤ k ≤ {k_max}; failures {bad:?}"),
        )
        .with("failures", bad.len() as f64))
    }

    fn check_drift(&self) -> Result<TheoremCheck> {
        let m_max = self.budgets.m_max;
        let d = drift_margins(m_max)?;
        let bad = d.iter().filter(|c| !(c.margin > 0.0)).count();
        let min = d.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        Ok(TheoremCheck::new(
            TheoremId::Drift,
            None,
            Verdict::from_bool(bad == 0),
            format!("2A_m − ln m* > 0 for 5 ≤ m ≤ {m_max}; min margin {min:.6}, failures {bad}"),
        )
        .with("min_margin", min)
        .with("failures", bad as f64))
    }

    fn check_one(&self, id: TheoremId, n: u64) -> Result<TheoremCheck> {
        if !id.applies_to(n) {
            return Err(Error::domain(format!("{id} does not concern n = {n}")));
        }
        match id {
            TheoremId::T2 => self.check_t2(n),
            TheoremId::C3 => self.check_c3(n),
            TheoremId::T10 => self.check_t10(n),
            TheoremId::C11 => self.check_c11(),
            TheoremId::L12 => self.check_l12(n),
            TheoremId::L13 => self.check_l13(n),
            TheoremId::T14 => self.check_t14(),
            TheoremId::T15 | TheoremId::C16 => self.check_pruned_axis(id, n),
            TheoremId::T17 => self.check_t17(n),
            TheoremId::C20 => self.check_c20(n),
            TheoremId::C21 => self.check_c21(n),
            TheoremId::AsymptReport => self.check_asympt(n),
            TheoremId::C19 | TheoremId::Factorials | TheoremId::Drift => {
                unreachable!("global checks are handled by the caller")
            }
        }
    }

    /// Checks `id` for every `n` in `ns` (once in total for global checks).
    pub fn verify(&self, id: TheoremId, ns: &[u64]) -> Result<Vec<TheoremCheck>> {
        match id {
            TheoremId::C19 => Ok(vec![self.check_c19(ns)?]),
            TheoremId::Factorials => Ok(vec![self.check_factorials()?]),
            TheoremId::Drift => Ok(vec![self.check_drift()?]),
            _ => par::map(ns, |&n| self.check_one(id, n)).into_iter().collect(),
        }
    }

    /// Theorems checked in a report for order `n`.
    pub fn report_theorems(n: u64) -> Vec<TheoremId> {
        TheoremId::ALL
            .into_iter()
            .filter(|t| t.per_n() && t.applies_to(n))
            .filter(|t| !matches!(t, TheoremId::T2 | TheoremId::C20))
            .collect()
    }

    pub fn report(&self, n: u64, family: Family) -> Result<StripReport> {
        if family == Family::GStar {
            return Err(Error::domain("reports cover the G and zeta frames only"));
        }
        let zeta = family == Family::Zeta;
        let flip = |(a, b): (f64, f64)| if zeta { (-b, -a) } else { (a, b) };
        let ritt_heights: [f64; 2] = [100.0, 1000.0];
        let g_zeros = self.catalog.zeros(Family::G, n, ritt_heights[1].max(self.budgets.bounds_height))?;
        // zeros of ζₙ in the upper half plane are the negated conjugates of
        // those of Gₙ, so their real parts flip sign
        let ritt_sums = ritt_heights
            .iter()
            .zip(ritt_partial_sums(&g_zeros, &ritt_heights))
            .map(|(&t, s)| (t, -s))
            .collect();
        let envelope = flip(search_envelope(Family::G, n)?);
        let bounds = bounds_of(
            &g_zeros
                .iter()
                .copied()
                .filter(|z| z.im <= self.budgets.bounds_height)
                .collect::<Vec<_>>(),
            self.budgets.bounds_height,
        )
        .map(|b| {
            if zeta {
                EmpiricalBounds {
                    a_hat: -b.b_hat,
                    b_hat: -b.a_hat,
                    ..b
                }
            } else {
                b
            }
        });
        if n == 2 {
            let degenerate = ProjectionInterval {
                x_lo: 0.0,
                x_hi: 0.0,
                grid_step: 0.0,
                scan_range: (0.0, 0.0),
                holes: Vec::new(),
            };
            return Ok(StripReport {
                n,
                family,
                envelope,
                empirical_bounds: bounds,
                analytic_upper: None,
                projection_interval: degenerate,
                delta_n: None,
                ritt_sums,
                asymptotics: None,
                verdicts: BTreeMap::new(),
            });
        }
        let projection = self.projection(n)?;
        let checks = Self::report_theorems(n)
            .into_iter()
            .map(|t| self.check_one(t, n))
            .collect::<Result<Vec<_>>>()?;
        let delta_n = checks
            .iter()
            .find(|c| c.theorem == TheoremId::T17)
            .and_then(|c| c.values.get("delta").copied());
        Ok(StripReport {
            n,
            family,
            envelope,
            empirical_bounds: bounds,
            analytic_upper: Some(analytic_upper_bound(n)?),
            projection_interval: if zeta { projection.mirrored() } else { projection },
            delta_n,
            ritt_sums,
            asymptotics: self.asymptotic_columns(n)?,
            verdicts: checks.iter().map(|c| (c.theorem.to_string(), c.verdict)).collect(),
        })
    }
}

/// `δₙ = min(b_{n,aₙ}, b̂ₙ)` with `aₙ` the left end of the projection
/// interval.
pub fn delta_n(catalog: ZeroCatalog, n: u64, grid_step: f64) -> Result<DeltaReport> {
    let budgets = Budgets {
        grid_step,
        tol: catalog.tol(),
        ..Budgets::default()
    };
    Analyzer::with_catalog(budgets, catalog).delta_n(n)
}

/// Checks one statement over a range of orders.
pub fn verify_theorem(id: TheoremId, ns: &[u64], budgets: Budgets) -> Result<Vec<TheoremCheck>> {
    Analyzer::new(budgets).verify(id, ns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        assert!(rn_membership(3, 0.0, 1e-12).unwrap());
        assert!(!rn_membership(3, -1.0, 1e-12).unwrap());
        assert!(rn_membership(3, 1.0, 1e-12).unwrap());
        assert!(!rn_membership(3, 1.01, 1e-12).unwrap());
        assert!(rn_membership(2, 0.0, 1e-12).is_err());
    }

    #[test]
    fn a3_oracle_bracket() {
        let f = |x: f64| 2f64.powf(x) + 3f64.powf(x) - 1.0;
        assert!(f(-0.80) < 0.0 && f(-0.78) > 0.0);
        let a = a3().unwrap();
        assert!(f(a).abs() < 1e-13);
    }

    #[test]
    fn projection_n3() {
        let r = projection_interval(3, 1e-2, 1e-12).unwrap();
        assert!((r.x_lo - a3().unwrap()).abs() < 1e-6);
        assert!((r.x_hi - 1.0).abs() < 1e-6);
        assert!(r.holes.is_empty());
        let m = r.mirrored();
        assert_eq!((m.x_lo, m.x_hi), (-r.x_hi, -r.x_lo));
    }

    #[test]
    fn analytic_upper_examples() {
        assert!((analytic_upper_bound(3).unwrap() - 1.0).abs() < 1e-12);
        let u4 = analytic_upper_bound(4).unwrap();
        assert!(u4 > 1.6 && u4 < 1.8);
        // endpoint-sign oracle
        let s = |x: f64| 1.0 + 2f64.powf(x) + 3f64.powf(x) - 4f64.powf(x);
        assert!(s(1.6) > 0.0 && s(1.8) < 0.0);
        assert!(analytic_upper_bound(10).unwrap() > 1.0);
        assert!(analytic_upper_bound(2).is_err());
    }

    #[test]
    fn theorem_ids_parse() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
        }
        assert!(matches!("T99".parse::<TheoremId>(), Err(Error::Domain(_))));
    }

    #[test]
    fn n2_bounds_are_degenerate() {
        let c = ZeroCatalog::new(1e-12);
        let b = empirical_bounds(&c, 2, Family::G, 10.0).unwrap().unwrap();
        assert!(b.a_hat.abs() < 1e-12 && b.b_hat.abs() < 1e-12);
    }

    #[test]
    fn delta_n3_matches_closed_form() {
        let a = Analyzer::new(Budgets { grid_step: 1e-2, ..Budgets::default() });
        let d = a.delta_n(3).unwrap();
        let closed = (1.0 + 3f64.powf(a3().unwrap())).ln() / LN_2;
        assert!((d.upper_extreme_at_a - closed).abs() < 1e-6);
        assert!((closed - 0.50).abs() < 0.02);
        assert!(d.delta > 0.0 && d.delta <= d.upper_extreme_at_a);
    }

    #[test]
    fn global_checks() {
        let a = Analyzer::new(Budgets::default());
        assert_eq!(a.verify(TheoremId::Factorials, &[]).unwrap()[0].verdict, Verdict::Pass);
        assert_eq!(a.verify(TheoremId::Drift, &[]).unwrap()[0].verdict, Verdict::Pass);
        assert!(a.verify(TheoremId::C11, &[4]).is_err());
    }
}
