//! Real-line tools: sign-change counting for exponential sums, brute-force
//! real-zero counting, a bracketed unique-root solver, and the integer
//! inequalities behind the drift constant `A_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gdpoly::{last_prime_leq, m_star, Base, GeneralizedDirichletPoly};

/// `poly(x) = level` for real `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealExpEquation {
    poly: GeneralizedDirichletPoly,
    level: f64,
    // (ln base, coefficient) with the level folded into base 1, ascending.
    merged: Vec<(f64, f64)>,
}

impl RealExpEquation {
    pub fn new(poly: GeneralizedDirichletPoly, level: f64) -> Result<Self> {
        if !level.is_finite() {
            return Err(Error::domain(format!("level {level} is not finite")));
        }
        let mut merged: Vec<(Base, f64)> =
            poly.terms().iter().map(|t| (t.base, t.coeff)).collect();
        match merged.iter_mut().find(|(b, _)| b.is_one()) {
            Some(slot) => slot.1 -= level,
            None => {
                merged.push((Base::integer(1), -level));
                merged.sort_by_key(|a| a.0);
            }
        }
        Ok(RealExpEquation {
            poly,
            level,
            merged: merged.into_iter().map(|(b, c)| (b.ln(), c)).collect(),
        })
    }

    pub fn poly(&self) -> &GeneralizedDirichletPoly {
        &self.poly
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Coefficients of `poly − level` ordered by ascending base.
    pub fn coefficients(&self) -> Vec<f64> {
        self.merged.iter().map(|&(_, c)| c).collect()
    }

    /// `poly(x) − level`.
    pub fn residual(&self, x: f64) -> f64 {
        self.merged
            .iter()
            .map(|&(l, c)| c * (x * l).min(crate::gdpoly::EXP_CLAMP).exp())
            .sum()
    }

    /// The residual divided by its largest exponential, so its sign is
    /// reliable far out on either side.
    fn scaled_residual(&self, x: f64) -> f64 {
        let m = self
            .merged
            .iter()
            .map(|&(l, _)| x * l)
            .fold(f64::NEG_INFINITY, f64::max);
        self.merged
            .iter()
            .map(|&(l, c)| c * (x * l - m).exp())
            .sum()
    }

    fn with_level(&self, level: f64) -> Self {
        RealExpEquation::new(self.poly.clone(), level).expect("finite level")
    }

    fn default_tol(&self) -> f64 {
        1e-12 * self.level.abs().max(1.0)
    }
}

/// Number of strict sign alternations in the base-ordered coefficients of
/// `poly − level`, zeros skipped.
pub fn sign_changes(eq: &RealExpEquation) -> Result<usize> {
    let signs: Vec<bool> = eq
        .coefficients()
        .into_iter()
        .filter(|&c| c != 0.0)
        .map(|c| c > 0.0)
        .collect();
    if signs.is_empty() {
        return Err(Error::domain("all coefficients vanish"));
    }
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

fn bisect_sign<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut fa = f(a);
    for _ in 0..2000 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return (m, m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a, b)
}

/// Real zeros located by sign crossings on a uniform grid, each refined by
/// bisection. Tangential zeros are not seen.
pub fn locate_real_zeros(
    eq: &RealExpEquation,
    lo: f64,
    hi: f64,
    grid_points: usize,
) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::precondition(format!("bad interval [{lo}, {hi}]")));
    }
    if grid_points < 1000 {
        return Err(Error::precondition(format!(
            "grid_points = {grid_points} < 1000"
        )));
    }
    let perturb = 1e-9 * eq.level.abs().max(1.0);
    for attempt in [0.0, perturb, -perturb] {
        let eq = if attempt == 0.0 {
            eq.clone()
        } else {
            eq.with_level(eq.level + attempt)
        };
        let xs: Vec<f64> = (0..grid_points)
            .map(|i| lo + (hi - lo) * i as f64 / (grid_points - 1) as f64)
            .collect();
        let vals: Vec<f64> = xs.iter().map(|&x| eq.scaled_residual(x)).collect();
        if vals.iter().all(|&v| v == 0.0) {
            return Err(Error::domain("residual vanishes on the whole grid"));
        }
        if vals.contains(&0.0) {
            continue;
        }
        let mut roots = Vec::new();
        for i in 1..grid_points {
            if (vals[i - 1] > 0.0) != (vals[i] > 0.0) {
                let (a, b) = bisect_sign(|x| eq.scaled_residual(x), xs[i - 1], xs[i], 1e-14);
                roots.push(0.5 * (a + b));
            }
        }
        return Ok(roots);
    }
    Err(Error::domain(
        "grid keeps hitting exact zeros of the residual after perturbation",
    ))
}

pub fn count_real_zeros_brute(
    eq: &RealExpEquation,
    lo: f64,
    hi: f64,
    grid_points: usize,
) -> Result<usize> {
    locate_real_zeros(eq, lo, hi, grid_points).map(|r| r.len())
}

/// The unique real root of an equation with exactly one coefficient sign
/// change. The bracket is doubled about its centre (at most ten times) until
/// it straddles the root; bisection then a secant step finish the job.
pub fn solve_unique_root(
    eq: &RealExpEquation,
    lo: f64,
    hi: f64,
    tol: Option<f64>,
) -> Result<f64> {
    let w = sign_changes(eq)?;
    if w != 1 {
        return Err(Error::precondition(format!(
            "unique-root solver needs one sign change, found {w}"
        )));
    }
    if !(lo < hi) {
        return Err(Error::precondition(format!("bad bracket [{lo}, {hi}]")));
    }
    let tol = tol.unwrap_or_else(|| eq.default_tol());
    let (mut a, mut b) = (lo, hi);
    let mut expansions = 0;
    while (eq.scaled_residual(a) > 0.0) == (eq.scaled_residual(b) > 0.0) {
        if eq.scaled_residual(a) == 0.0 {
            return Ok(a);
        }
        if eq.scaled_residual(b) == 0.0 {
            return Ok(b);
        }
        if expansions == 10 {
            return Err(Error::Bracket { lo: a, hi: b });
        }
        let (c, h) = (0.5 * (a + b), b - a);
        a = c - h;
        b = c + h;
        expansions += 1;
    }
    let (a, b) = bisect_sign(|x| eq.scaled_residual(x), a, b, tol);
    if a == b {
        return Ok(a);
    }
    let (ra, rb) = (eq.residual(a), eq.residual(b));
    let mid = 0.5 * (a + b);
    if ra.is_finite() && rb.is_finite() && ra != rb {
        let s = a - ra * (b - a) / (rb - ra);
        if s >= a && s <= b && eq.residual(s).abs() <= eq.residual(mid).abs() {
            return Ok(s);
        }
    }
    Ok(mid)
}

/// Sign changes `W` against a brute-force real-zero count `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChangeReport {
    pub sign_changes: usize,
    pub real_zeros: usize,
    pub parity_ok: bool,
}

pub fn polya_szego_check(eq: &RealExpEquation, lo: f64, hi: f64) -> Result<SignChangeReport> {
    let w = sign_changes(eq)?;
    let n = count_real_zeros_brute(eq, lo, hi, 20_000)?;
    Ok(SignChangeReport {
        sign_changes: w,
        real_zeros: n,
        parity_ok: w >= n && (w - n) % 2 == 0,
    })
}

/// Rigorous abscissa bounds for the complex zeros of `poly`.
///
/// At a zero the term with the smallest base cannot exceed the modulus of
/// all the others combined, and likewise for the largest base; each of these
/// is a one-sign-change equation with a unique real root.
pub fn zero_strip(poly: &GeneralizedDirichletPoly) -> Result<(f64, f64)> {
    let terms = poly.terms();
    if terms.len() < 2 {
        return Err(Error::domain("a single exponential has no zeros"));
    }
    let bound = |dominant: usize| -> Result<f64> {
        let t = terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let c = if i == dominant { -t.coeff.abs() } else { t.coeff.abs() };
                (c, t.base)
            })
            .collect::<Vec<_>>();
        let eq = RealExpEquation::new(GeneralizedDirichletPoly::new("envelope", t)?, 0.0)?;
        solve_unique_root(&eq, -1.0, 1.0, Some(1e-13))
    };
    Ok((bound(0)?, bound(terms.len() - 1)?))
}

/// Log-domain evaluation of `(k!)² > k^k` and `(k!)² > k^{k−1}(k−1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorialCheck {
    pub k: u64,
    pub holds_weak: bool,
    pub holds_sharp: bool,
    pub weak_margin: f64,
    pub sharp_margin: f64,
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

pub fn factorial_inequality_check(k: u64) -> Result<FactorialCheck> {
    if k < 2 {
        return Err(Error::precondition(format!("k = {k} < 2")));
    }
    let lhs = 2.0 * ln_factorial(k);
    let kf = k as f64;
    let weak_margin = lhs - kf * kf.ln();
    let sharp_margin = lhs - ((kf - 1.0) * kf.ln() + 2.0 * (kf - 1.0).ln());
    // Equality cases (k = 2 weak, k = 4 sharp) land within rounding of zero.
    let guard = 1e-12 * lhs.max(1.0);
    Ok(FactorialCheck {
        k,
        holds_weak: weak_margin > guard,
        holds_sharp: sharp_margin > guard,
        weak_margin,
        sharp_margin,
    })
}

/// `A_m = ln(m!/p)/(m−1)` with `p` the largest prime `≤ m`, and the margin
/// `2A_m − ln m*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConstant {
    pub m: u64,
    pub a_m: f64,
    pub margin: f64,
}

fn drift_from_ln_factorial(m: u64, ln_fact: f64) -> Result<DriftConstant> {
    let p = last_prime_leq(m)?;
    let a_m = (ln_fact - (p as f64).ln()) / (m as f64 - 1.0);
    let margin = 2.0 * a_m - (m_star(m)? as f64).ln();
    Ok(DriftConstant { m, a_m, margin })
}

pub fn hadamard_drift_constant(m: u64) -> Result<DriftConstant> {
    if m <= 4 {
        return Err(Error::precondition(format!("drift constant needs m > 4, got {m}")));
    }
    drift_from_ln_factorial(m, ln_factorial(m))
}

/// Drift constants for every `m` in `5..=m_max`, sharing one running log-factorial.
pub fn drift_margins(m_max: u64) -> Result<Vec<DriftConstant>> {
    let mut ln_fact = ln_factorial(4);
    let mut out = Vec::with_capacity(m_max.saturating_sub(4) as usize);
    for m in 5..=m_max {
        ln_fact += (m as f64).ln();
        out.push(drift_from_ln_factorial(m, ln_fact)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(terms: &[(f64, u64)], level: f64) -> RealExpEquation {
        let p = GeneralizedDirichletPoly::new(
            "t",
            terms.iter().map(|&(c, b)| (c, Base::integer(b))),
        )
        .unwrap();
        RealExpEquation::new(p, level).unwrap()
    }

    #[test]
    fn sign_change_examples() {
        assert_eq!(sign_changes(&eq(&[(1.0, 1), (1.0, 2), (1.0, 4)], 3.0)).unwrap(), 1);
        assert_eq!(sign_changes(&eq(&[(1.0, 1), (2.0, 3)], 0.0)).unwrap(), 0);
        assert_eq!(sign_changes(&eq(&[(-1.0, 1), (2.0, 2), (-1.0, 3)], 0.0)).unwrap(), 2);
        // level cancels the only term
        assert!(sign_changes(&eq(&[(2.0, 1)], 2.0)).is_err());
    }

    #[test]
    fn brute_count_examples() {
        assert_eq!(
            count_real_zeros_brute(&eq(&[(1.0, 1), (1.0, 2), (1.0, 4)], 3.0), -10.0, 10.0, 1001)
                .unwrap(),
            1
        );
        let roots = locate_real_zeros(&eq(&[(1.0, 1), (1.0, 2)], 3.0), -10.0, 10.0, 1000).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-12);
        assert_eq!(
            count_real_zeros_brute(&eq(&[(1.0, 1), (1.0, 2)], 0.5), -10.0, 10.0, 1000).unwrap(),
            0
        );
        assert!(count_real_zeros_brute(&eq(&[(1.0, 2)], 0.0), -1.0, 1.0, 10).is_err());
        assert!(count_real_zeros_brute(&eq(&[(1.0, 2)], 0.0), 1.0, -1.0, 1000).is_err());
    }

    #[test]
    fn unique_root_examples() {
        // t = 2^x solves t² + t − 2 = 0, so t = 1
        let r = solve_unique_root(&eq(&[(1.0, 1), (1.0, 2), (1.0, 4)], 3.0), -5.0, 5.0, None).unwrap();
        assert!(r.abs() < 1e-12, "{r}");
        let r = solve_unique_root(&eq(&[(1.0, 1), (1.0, 2), (-1.0, 3)], 0.0), 0.0, 3.0, None).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
        // bracket auto-expansion
        let r = solve_unique_root(&eq(&[(1.0, 1), (1.0, 2), (-1.0, 3)], 0.0), 5.0, 6.0, None).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn beta_four_root_is_between_one_and_three_halves() {
        let c = 2.0 / 3f64.sqrt();
        let p = GeneralizedDirichletPoly::new(
            "beta4",
            [(-1.0, Base::integer(1)), (-c, Base::integer(3)), (1.0, Base::integer(4))],
        )
        .unwrap();
        let e = RealExpEquation::new(p, 0.0).unwrap();
        assert!(e.residual(1.0) < 0.0 && e.residual(1.5) > 0.0);
        let r = solve_unique_root(&e, 0.0, 2.0, None).unwrap();
        assert!(r > 1.0 && r < 1.5);
    }

    #[test]
    fn unique_root_errors() {
        let two = eq(&[(-1.0, 1), (2.0, 2), (-1.0, 3)], 0.0);
        assert!(matches!(solve_unique_root(&two, -1.0, 1.0, None), Err(Error::Precondition(_))));
        // 3^x = 1e300 * 2^x has its root near x = 1704, beyond ten doublings
        let none = eq(&[(-1e300, 2), (1.0, 3)], 0.0);
        assert!(matches!(solve_unique_root(&none, -1.0, 1.0, None), Err(Error::Bracket { .. })));
    }

    #[test]
    fn polya_szego_examples() {
        let r = polya_szego_check(&eq(&[(1.0, 1), (1.0, 2), (1.0, 4)], 3.0), -10.0, 10.0).unwrap();
        assert_eq!((r.sign_changes, r.real_zeros, r.parity_ok), (1, 1, true));
        let r = polya_szego_check(&eq(&[(1.0, 1), (1.0, 2), (1.0, 3)], 0.0), -10.0, 10.0).unwrap();
        assert_eq!((r.sign_changes, r.real_zeros, r.parity_ok), (0, 0, true));
    }

    #[test]
    fn zero_strip_of_two_terms_is_degenerate() {
        let (l, r) = zero_strip(&GeneralizedDirichletPoly::pruned_sum(3).unwrap()).unwrap();
        assert!(l.abs() < 1e-12 && r.abs() < 1e-12);
        let (l, r) = zero_strip(&GeneralizedDirichletPoly::mirrored_sum(3).unwrap()).unwrap();
        // left: 2^x + 3^x = 1; right: 1 + 2^x = 3^x
        assert!((-0.80..-0.78).contains(&l), "{l}");
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorial_examples() {
        let c = factorial_inequality_check(3).unwrap();
        assert!(c.holds_weak);
        assert!((c.weak_margin - (36f64.ln() - 27f64.ln())).abs() < 1e-12);
        let c = factorial_inequality_check(6).unwrap();
        assert!(c.holds_sharp);
        assert!((c.sharp_margin - (518400f64.ln() - 194400f64.ln())).abs() < 1e-12);
        let c = factorial_inequality_check(300).unwrap();
        assert!(c.holds_weak && c.holds_sharp && c.weak_margin.is_finite());
        // equality at k = 4 for the sharp form: 576 = 4³·3²
        assert!(!factorial_inequality_check(4).unwrap().holds_sharp);
        assert!(factorial_inequality_check(1).is_err());
    }

    #[test]
    fn factorial_log_domain_matches_exact_integers() {
        for k in 2u64..=20 {
            let f: u128 = (1..=k as u128).product();
            let lhs = f * f;
            let weak = lhs > (k as u128).pow(k as u32);
            let sharp = lhs > (k as u128).pow(k as u32 - 1) * (k as u128 - 1).pow(2);
            let c = factorial_inequality_check(k).unwrap();
            assert_eq!((c.holds_weak, c.holds_sharp), (weak, sharp), "k = {k}");
        }
    }

    #[test]
    fn drift_examples() {
        let d = hadamard_drift_constant(5).unwrap();
        assert!((d.a_m - 24f64.ln() / 4.0).abs() < 1e-14);
        assert!((d.a_m - 0.7945).abs() < 1e-4);
        assert!(d.margin > 0.0);
        assert!(hadamard_drift_constant(6).unwrap().margin > 0.0);
        assert!(hadamard_drift_constant(10_000).unwrap().margin > 0.0);
        assert!(hadamard_drift_constant(4).is_err());
        let batch = drift_margins(200).unwrap();
        for d in &batch {
            let single = hadamard_drift_constant(d.m).unwrap();
            assert!((single.a_m - d.a_m).abs() < 1e-12);
        }
    }
}
