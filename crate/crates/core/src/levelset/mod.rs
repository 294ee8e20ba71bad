//! Level curves `|Gₙ*(z)| = p^{x₀}` of the pruned sum, `p` the largest prime
//! `≤ n`.
//!
//! A vertical line `Re z = x` meets the level curve exactly when
//! `m(x) ≤ p^{x₀} ≤ M(x)`, where `m` and `M` are the infimum and supremum of
//! `|Gₙ*|` on that line. `M(x) = Gₙ*(x)` because all coefficients are
//! positive; `m(x)` is computed on the prime-phase torus (see [`torus`]) and
//! cross-checked by sampling a window of ordinates.

pub mod torus;
pub mod trace;

use std::f64::consts::{LN_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::catalog::ZeroCatalog;
use crate::error::{Error, Result};
use crate::gdpoly::{last_prime_leq, Family, GeneralizedDirichletPoly};
use crate::par;
use crate::realroots::{solve_unique_root, RealExpEquation};
use crate::verdict::Verdict;

pub use torus::{torus_min_at_most, torus_min_modulus, PrimePhases, TorusMinimum};
pub use trace::{
    trace_level_curve, ComponentClass, LevelComponent, LevelCurveAnalysis, TraceOptions,
};

/// Relative slack applied before declaring an abscissa infeasible.
pub const FEASIBILITY_MARGIN: f64 = 1e-9;

/// Coarse step of the feasibility scans that precede bisection.
pub const SCAN_STEP: f64 = 0.05;

/// `200 · 2π / ln 2`, the default sampling window height.
pub fn default_window() -> f64 {
    200.0 * TAU / LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub y_max: f64,
    /// Sampling step; `None` means `π / (8 ln n)`.
    pub step: Option<f64>,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            y_max: default_window(),
            step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementMeta {
    pub y_max: f64,
    pub step: f64,
    pub samples: usize,
    /// Smallest modulus found by sampling `[0, y_max]`.
    pub window_min: f64,
    /// Minimum over the prime-phase torus.
    pub torus_min: f64,
    pub torus_phases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusProfile {
    pub x: f64,
    /// Estimate of `inf_y |Gₙ*(x + iy)|`: the smaller of the window and
    /// torus minima.
    pub m_hat: f64,
    /// `max_y |Gₙ*(x + iy)| = Gₙ*(x)`.
    #[serde(rename = "M")]
    pub m_max: f64,
    /// Ordinate of the smallest window sample after refinement.
    pub y_witness: f64,
    pub refinement_meta: RefinementMeta,
}

/// `Gₙ*` with its prime-phase structure and level base `p`.
#[derive(Debug, Clone)]
pub struct PrunedSum {
    n: u64,
    p: u64,
    poly: GeneralizedDirichletPoly,
    phases: PrimePhases,
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
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
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn bisect<F: Fn(f64) -> bool>(pred: F, mut yes: f64, mut no: f64, tol: f64) -> f64 {
    while (no - yes).abs() > tol {
        let mid = 0.5 * (yes + no);
        if mid == yes || mid == no {
            break;
        }
        if pred(mid) {
            yes = mid;
        } else {
            no = mid;
        }
    }
    yes
}

impl PrunedSum {
    pub fn new(n: u64) -> Result<Self> {
        if n <= 2 {
            return Err(Error::precondition(format!("level curves need n > 2, got {n}")));
        }
        let poly = GeneralizedDirichletPoly::pruned_sum(n)?;
        let phases = PrimePhases::of(&poly);
        Ok(PrunedSum {
            n,
            p: last_prime_leq(n)?,
            poly,
            phases,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// The removed prime `p`.
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn poly(&self) -> &GeneralizedDirichletPoly {
        &self.poly
    }

    /// `p^{x₀}`.
    pub fn level(&self, x0: f64) -> f64 {
        (self.p as f64).powf(x0)
    }

    /// `inf_y |Gₙ*(x + iy)|`.
    pub fn min_modulus(&self, x: f64) -> f64 {
        torus_min_modulus(&self.poly, &self.phases, x)
            .map(|t| t.value)
            .unwrap_or(f64::NAN)
    }

    /// `sup_y |Gₙ*(x + iy)| = Gₙ*(x)`.
    pub fn max_modulus(&self, x: f64) -> f64 {
        self.poly.eval_real(x)
    }

    /// Whether the vertical line at `x` meets `|Gₙ*| = level`.
    pub fn feasible(&self, x: f64, level: f64) -> bool {
        self.feasible_within(x, level, FEASIBILITY_MARGIN)
    }

    /// [`feasible`](Self::feasible) with slack `margin · max(1, level)`.
    pub fn feasible_within(&self, x: f64, level: f64, margin: f64) -> bool {
        let slack = margin * level.max(1.0);
        let bound = level + slack;
        self.max_modulus(x) >= level - slack
            && self.dominant_lower_bound(x) <= bound
            && torus_min_at_most(&self.poly, &self.phases, x, bound).unwrap_or(false)
    }

    /// `inf` over `y` of `|Gₙ*|` minus the dominant-term bound: a value that
    /// is certainly below `m(x)`, used to find abscissae that are provably
    /// infeasible without computing `m`.
    fn dominant_lower_bound(&self, x: f64) -> f64 {
        let vals: Vec<f64> = self.poly.terms().iter().map(|t| (x * t.ln_base()).exp()).collect();
        let total: f64 = vals.iter().sum();
        let top = vals.iter().copied().fold(0.0, f64::max);
        2.0 * top - total
    }

    pub fn profile(&self, x: f64, opts: &ProfileOptions) -> Result<ModulusProfile> {
        let max_step = PI / (8.0 * (self.n as f64).ln());
        let step = opts.step.unwrap_or(max_step);
        if !(opts.y_max >= 4.0 * PI / LN_2) {
            return Err(Error::precondition(format!(
                "window height {} is below two quasi-periods 4π/ln 2",
                opts.y_max
            )));
        }
        if !(step > 0.0 && step <= max_step * (1.0 + 1e-12)) {
            return Err(Error::precondition(format!(
                "sampling step {step} exceeds π/(8 ln n) = {max_step}"
            )));
        }
        if !x.is_finite() {
            return Err(Error::domain(format!("non-finite abscissa {x}")));
        }
        let modulus = |y: f64| self.poly.scaled(num_complex::Complex64::new(x, y)).unscaled().norm();
        let samples = (opts.y_max / step).floor() as usize + 1;
        let values: Vec<f64> = (0..samples).map(|j| modulus(j as f64 * step)).collect();
        let mut order: Vec<usize> = (0..samples).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut picked: Vec<usize> = Vec::new();
        for &j in &order {
            if picked.iter().all(|&k: &usize| k.abs_diff(j) > 2) {
                picked.push(j);
            }
            if picked.len() == 5 {
                break;
            }
        }
        let (y_witness, window_min) = picked
            .iter()
            .map(|&j| {
                let y = j as f64 * step;
                let (ys, vs) = golden_min(modulus, (y - step).max(0.0), y + step, 80);
                if vs < values[j] {
                    (ys, vs)
                } else {
                    (y, values[j])
                }
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("window has samples");
        let torus = torus_min_modulus(&self.poly, &self.phases, x)?;
        Ok(ModulusProfile {
            x,
            m_hat: window_min.min(torus.value),
            m_max: self.max_modulus(x),
            y_witness,
            refinement_meta: RefinementMeta {
                y_max: opts.y_max,
                step,
                samples,
                window_min,
                torus_min: torus.value,
                torus_phases: torus.phases,
            },
        })
    }

    /// Largest abscissa reached by the level curve `|Gₙ*| = p^{x₀}`.
    pub fn upper_extreme(&self, x0: f64, tol: f64) -> Result<f64> {
        let level = self.level(x0);
        let slack = FEASIBILITY_MARGIN * level.max(1.0);
        let mut hi = x0.max(0.0) + 1.0;
        while self.dominant_lower_bound(hi) <= level + slack {
            hi += 1.0;
            if hi > 1e3 {
                return Err(Error::SearchExhausted(format!(
                    "no provably infeasible abscissa for level {level}"
                )));
            }
        }
        let mut x = hi;
        let floor = hi - 400.0;
        while !self.feasible(x - SCAN_STEP, level) {
            x -= SCAN_STEP;
            if x < floor {
                return Err(Error::SearchExhausted(format!(
                    "no feasible abscissa for level {level} in [{floor}, {hi}]"
                )));
            }
        }
        Ok(bisect(|s| self.feasible(s, level), x - SCAN_STEP, x, tol))
    }

    /// Smallest abscissa reached by the level curve; undefined at `x₀ = 0`
    /// where the curve runs off to `−∞`.
    pub fn lower_extreme(&self, x0: f64, tol: f64) -> Result<f64> {
        if x0 == 0.0 || !x0.is_finite() {
            return Err(Error::domain(format!(
                "lower extreme needs finite non-zero x0, got {x0}"
            )));
        }
        let level = self.level(x0);
        if x0 > 0.0 {
            let eq = RealExpEquation::new(self.poly.clone(), level)?;
            return solve_unique_root(&eq, -1.0, x0.max(1.0), Some(tol));
        }
        let slack = FEASIBILITY_MARGIN;
        // for x → −∞, |Gₙ*| → 1 > level; the bound 1 − Σ_{k≥2} k^x certifies it
        let mut lo = -1.0;
        while 1.0 - (self.poly.eval_real(lo) - 1.0) <= level + slack {
            lo -= 1.0;
            if lo < -1e3 {
                return Err(Error::SearchExhausted("no infeasible left abscissa".into()));
            }
        }
        let mut x = lo;
        let ceiling = lo + 400.0;
        while !self.feasible(x + SCAN_STEP, level) {
            x += SCAN_STEP;
            if x > ceiling {
                return Err(Error::SearchExhausted(format!(
                    "no feasible abscissa for level {level} in [{lo}, {ceiling}]"
                )));
            }
        }
        Ok(bisect(|s| self.feasible(s, level), x + SCAN_STEP, x, tol))
    }
}

pub fn modulus_profile(n: u64, x: f64, opts: &ProfileOptions) -> Result<ModulusProfile> {
    PrunedSum::new(n)?.profile(x, opts)
}

/// Profiles at several abscissae, computed concurrently.
pub fn modulus_profiles(n: u64, xs: &[f64], opts: &ProfileOptions) -> Result<Vec<ModulusProfile>> {
    let g = PrunedSum::new(n)?;
    par::map(xs, |&x| g.profile(x, opts)).into_iter().collect()
}

/// Upper extreme `b_{n,x₀}`.
pub fn upper_extreme(n: u64, x0: f64, tol: f64) -> Result<f64> {
    PrunedSum::new(n)?.upper_extreme(x0, tol)
}

/// Lower extreme `b⁻_{n,x₀}`.
pub fn lower_extreme(n: u64, x0: f64, tol: f64) -> Result<f64> {
    PrunedSum::new(n)?.lower_extreme(x0, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub n: u64,
    pub x0: Vec<f64>,
    pub upper_extremes: Vec<f64>,
    /// Smallest increment `b_{n,x₀(i+1)} − b_{n,x₀(i)}` along the grid.
    pub min_increment: f64,
    /// Index pairs where the extreme failed to increase by more than `tol`.
    pub failing_pairs: Vec<(usize, usize)>,
    pub verdict: Verdict,
}

/// Checks that `x₀ ↦ b_{n,x₀}` increases strictly along `x0_grid`.
pub fn extreme_monotonicity(n: u64, x0_grid: &[f64], tol: f64) -> Result<MonotonicityReport> {
    if x0_grid.windows(2).any(|w| !(w[1] - w[0] > 10.0 * tol)) {
        return Err(Error::precondition(
            "grid must increase with spacing above 10·tol",
        ));
    }
    let g = PrunedSum::new(n)?;
    let b: Vec<f64> = par::map(x0_grid, |&x0| g.upper_extreme(x0, tol))
        .into_iter()
        .collect::<Result<_>>()?;
    let incs: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let failing_pairs: Vec<(usize, usize)> = incs
        .iter()
        .enumerate()
        .filter(|(_, &d)| !(d > tol))
        .map(|(i, _)| (i, i + 1))
        .collect();
    Ok(MonotonicityReport {
        n,
        x0: x0_grid.to_vec(),
        upper_extremes: b,
        min_increment: incs.iter().copied().fold(f64::INFINITY, f64::min),
        verdict: Verdict::from_bool(failing_pairs.is_empty()),
        failing_pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub n: u64,
    /// Largest real part among certified zeros of `Gₙ*` up to `height`.
    pub b_star: f64,
    pub height: f64,
    pub zeros_used: usize,
    pub x0: Vec<f64>,
    pub upper_extremes: Vec<f64>,
    pub verdict: Verdict,
}

/// Empirical `b̂ₙ* = max Re z` over certified zeros of `Gₙ*` with
/// `0 < Im z ≤ height`; `None` when no zero is certified there.
pub fn empirical_bstar(catalog: &ZeroCatalog, n: u64, height: f64) -> Result<Option<(f64, usize)>> {
    let zeros = catalog.zeros(Family::GStar, n, height)?;
    let certified: Vec<f64> = zeros.iter().filter(|z| z.certified).map(|z| z.re).collect();
    Ok(certified
        .iter()
        .copied()
        .reduce(f64::max)
        .map(|b| (b, certified.len())))
}

/// Checks `b̂ₙ* < b_{n,x₀}` at each sample.
pub fn bstar_dominance(
    catalog: &ZeroCatalog,
    n: u64,
    x0_samples: &[f64],
    height: f64,
    tol: f64,
) -> Result<DominanceReport> {
    let g = PrunedSum::new(n)?;
    let (b_star, zeros_used) = empirical_bstar(catalog, n, height)?
        .ok_or_else(|| Error::SearchExhausted(format!("no zeros of G*_{n} below height {height}")))?;
    let b: Vec<f64> = par::map(x0_samples, |&x0| g.upper_extreme(x0, tol))
        .into_iter()
        .collect::<Result<_>>()?;
    let ok = b.iter().all(|&v| b_star < v);
    Ok(DominanceReport {
        n,
        b_star,
        height,
        zeros_used,
        x0: x0_samples.to_vec(),
        upper_extremes: b,
        verdict: Verdict::from_bool(ok),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn b3(x0: f64) -> f64 {
        (1.0 + 3f64.powf(x0)).ln() / LN_2
    }

    fn b4(x0: f64) -> f64 {
        (1.0 + 2.0 * 3f64.powf(x0 - 0.5)).ln() / 4f64.ln()
    }

    #[test]
    fn profile_examples() {
        for x in [-1.0, 0.0, 0.5] {
            let p = modulus_profile(3, x, &ProfileOptions::default()).unwrap();
            assert!((p.m_hat - (1.0 - 2f64.powf(x)).abs()).abs() < 1e-8);
            assert!((p.m_max - (1.0 + 2f64.powf(x))).abs() < 1e-14);
            assert!(p.refinement_meta.window_min >= p.m_hat);
        }
        let p = modulus_profile(3, 0.0, &ProfileOptions::default()).unwrap();
        assert!(p.m_hat < 1e-8 && p.m_max == 2.0);
        let p = modulus_profile(4, 0.0, &ProfileOptions::default()).unwrap();
        assert!(p.m_hat < 1e-6);
    }

    #[test]
    fn profile_preconditions() {
        let small = ProfileOptions { y_max: 10.0, step: None };
        assert!(matches!(modulus_profile(3, 0.0, &small), Err(Error::Precondition(_))));
        let coarse = ProfileOptions { y_max: 100.0, step: Some(1.0) };
        assert!(matches!(modulus_profile(3, 0.0, &coarse), Err(Error::Precondition(_))));
        assert!(modulus_profile(2, 0.0, &ProfileOptions::default()).is_err());
    }

    #[test]
    fn upper_extreme_closed_forms() {
        assert!((upper_extreme(3, 1.0, TOL).unwrap() - 2.0).abs() < 1e-8);
        assert!((upper_extreme(3, 0.0, TOL).unwrap() - 1.0).abs() < 1e-8);
        assert!((upper_extreme(3, -1.0, TOL).unwrap() - b3(-1.0)).abs() < 1e-8);
        let v = upper_extreme(4, 0.0, TOL).unwrap();
        assert!((v - b4(0.0)).abs() < 1e-8 && (v - 0.5538).abs() < 1e-4);
    }

    #[test]
    fn lower_extreme_closed_forms() {
        assert!((lower_extreme(3, 1.0, TOL).unwrap() - 1.0).abs() < 1e-10);
        assert!(lower_extreme(4, 1.0, TOL).unwrap().abs() < 1e-10);
        let want = (2.0f64 / 3.0).ln() / LN_2;
        assert!((lower_extreme(3, -1.0, TOL).unwrap() - want).abs() < 1e-8);
        assert!(matches!(lower_extreme(3, 0.0, TOL), Err(Error::Domain(_))));
    }

    #[test]
    fn monotone_examples() {
        let r = extreme_monotonicity(3, &[-2.0, -1.0, 0.0, 1.0], 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        for (b, x0) in r.upper_extremes.iter().zip(&r.x0) {
            assert!((b - b3(*x0)).abs() < 1e-8);
        }
        assert_eq!(extreme_monotonicity(4, &[-1.0, 0.0, 0.5], 1e-10).unwrap().verdict, Verdict::Pass);
        assert!(extreme_monotonicity(4, &[0.0, 0.0], 1e-10).is_err());
    }

    #[test]
    fn dominance_small_n() {
        let c = ZeroCatalog::new(1e-11);
        for n in [3, 4] {
            let r = bstar_dominance(&c, n, &[-1.0, 0.0, 1.0], 60.0, 1e-10).unwrap();
            assert!(r.b_star.abs() < 1e-10);
            assert_eq!(r.verdict, Verdict::Pass);
        }
    }
}
