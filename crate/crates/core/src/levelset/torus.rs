//! Infimum of `|f(x + iy)|` over all real `y` for integer-base sums.
//!
//! Writing each base as a product of primes, `μ^{iy} = Π p^{i e_p y}`. The
//! logarithms of distinct primes are linearly independent over the
//! rationals, so by Kronecker's theorem the phases `(y ln p mod 2π)_p` are
//! dense in the torus. The infimum over `y` is therefore the minimum of
//! `|Σ aₖ μₖ^x e^{i⟨eₖ, θ⟩}|` over `θ ∈ [0, 2π)^d`, found here by a grid
//! search followed by damped Newton on `|f|²`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gdpoly::{GeneralizedDirichletPoly, EXP_CLAMP};

const STARTS: usize = 8;
const POLISH_ITER: usize = 100;

/// Exponent vectors of the bases of a polynomial over the primes involved.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimePhases {
    pub primes: Vec<u64>,
    /// One row per term, aligned with `poly.terms()`.
    pub exponents: Vec<Vec<i64>>,
}

fn factor(mut m: u64, out: &mut Vec<(u64, i64)>, sign: i64) {
    let mut p = 2;
    while p * p <= m {
        while m.is_multiple_of(p) {
            out.push((p, sign));
            m /= p;
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, sign));
    }
}

impl PrimePhases {
    pub fn of(poly: &GeneralizedDirichletPoly) -> Self {
        let factored: Vec<Vec<(u64, i64)>> = poly
            .terms()
            .iter()
            .map(|t| {
                let mut f = Vec::new();
                factor(t.base.numer(), &mut f, 1);
                factor(t.base.denom(), &mut f, -1);
                f
            })
            .collect();
        let mut primes: Vec<u64> = factored.iter().flatten().map(|&(p, _)| p).collect();
        primes.sort_unstable();
        primes.dedup();
        let exponents = factored
            .iter()
            .map(|f| {
                let mut e = vec![0i64; primes.len()];
                for &(p, s) in f {
                    let i = primes.binary_search(&p).expect("collected above");
                    e[i] += s;
                }
                e
            })
            .collect();
        PrimePhases { primes, exponents }
    }

    pub fn dimension(&self) -> usize {
        self.primes.len()
    }
}

/// Minimum of the modulus over the phase torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMinimum {
    pub value: f64,
    /// Prime phases `θ_p ∈ [0, 2π)` at which the minimum is attained.
    pub phases: Vec<f64>,
}

struct Amplitudes<'a> {
    amps: Vec<f64>,
    exps: &'a [Vec<i64>],
    log_scale: f64,
}

impl Amplitudes<'_> {
    fn phase(&self, k: usize, theta: &[f64]) -> f64 {
        self.exps[k].iter().zip(theta).map(|(&e, &t)| e as f64 * t).sum()
    }

    fn value(&self, theta: &[f64]) -> Complex64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, &a)| Complex64::from_polar(a, self.phase(k, theta)))
            .sum()
    }

    /// `|f|²`, its gradient and Hessian in `θ`.
    fn second_order(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = theta.len();
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = vec![Complex64::new(0.0, 0.0); d];
        let mut d2f = DMatrix::<Complex64>::zeros(d, d);
        for (k, &a) in self.amps.iter().enumerate() {
            let w = Complex64::from_polar(a, self.phase(k, theta));
            f += w;
            let e = &self.exps[k];
            for p in 0..d {
                if e[p] == 0 {
                    continue;
                }
                df[p] += Complex64::i() * e[p] as f64 * w;
                for q in 0..d {
                    d2f[(p, q)] -= (e[p] * e[q]) as f64 * w;
                }
            }
        }
        let grad = DVector::from_fn(d, |p, _| 2.0 * (f.conj() * df[p]).re);
        let hess = DMatrix::from_fn(d, d, |p, q| {
            2.0 * (df[q].conj() * df[p] + f.conj() * d2f[(p, q)]).re
        });
        (f.norm_sqr(), grad, hess)
    }

    fn polish(&self, mut theta: Vec<f64>) -> (f64, Vec<f64>) {
        let d = theta.len();
        let (mut val, mut grad, mut hess) = self.second_order(&theta);
        let mut lambda = 1e-6 * (1.0 + hess.diagonal().amax());
        for _ in 0..POLISH_ITER {
            if grad.amax() == 0.0 {
                break;
            }
            let system = &hess + DMatrix::<f64>::identity(d, d) * lambda;
            let Some(step) = system.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            let (tv, tg, th) = self.second_order(&trial);
            if tv < val {
                let small = step.amax() < 1e-15;
                theta = trial;
                val = tv;
                grad = tg;
                hess = th;
                lambda *= 0.3;
                if small {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e12 * (1.0 + hess.diagonal().amax()) {
                    break;
                }
            }
        }
        (self.value(&theta).norm(), theta)
    }
}

fn grid_size(d: usize) -> usize {
    match d {
        0 => 1,
        1 => 256,
        2 => 64,
        3 => 16,
        4 => 10,
        _ => (20_000f64.powf(1.0 / d as f64).floor() as usize).max(3),
    }
}

fn amplitudes<'a>(
    poly: &GeneralizedDirichletPoly,
    phases: &'a PrimePhases,
    x: f64,
) -> Result<Amplitudes<'a>> {
    if !x.is_finite() {
        return Err(Error::domain(format!("non-finite abscissa {x}")));
    }
    let log_scale = poly
        .terms()
        .iter()
        .map(|t| x * t.ln_base())
        .fold(f64::NEG_INFINITY, f64::max);
    let amps = poly
        .terms()
        .iter()
        .map(|t| t.coeff * (x * t.ln_base() - log_scale).exp())
        .collect();
    Ok(Amplitudes {
        amps,
        exps: &phases.exponents,
        log_scale,
    })
}

impl Amplitudes<'_> {
    fn scale(&self) -> f64 {
        self.log_scale.min(EXP_CLAMP).exp()
    }

    /// Walks the phase grid keeping the `STARTS` smallest samples. Returns
    /// `Err` with the phases of the first sample at or below `stop`.
    fn grid_scan(&self, d: usize, stop: f64) -> std::result::Result<Vec<(f64, Vec<f64>)>, Vec<f64>> {
        let g = grid_size(d);
        let total = g.pow(d as u32);
        let mut idx = vec![0usize; d];
        let mut theta = vec![0.0; d];
        let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(STARTS + 1);
        for _ in 0..total {
            let v = self.value(&theta).norm();
            if v <= stop {
                return Err(theta);
            }
            if best.len() < STARTS || v < best[best.len() - 1].0 {
                let pos = best.partition_point(|b| b.0 <= v);
                best.insert(pos, (v, theta.clone()));
                best.truncate(STARTS);
            }
            for p in 0..d {
                idx[p] += 1;
                if idx[p] < g {
                    theta[p] = TAU * idx[p] as f64 / g as f64;
                    break;
                }
                idx[p] = 0;
                theta[p] = 0.0;
            }
        }
        Ok(best)
    }
}

/// `inf_y |f(x + iy)|` for a polynomial with rational bases.
pub fn torus_min_modulus(
    poly: &GeneralizedDirichletPoly,
    phases: &PrimePhases,
    x: f64,
) -> Result<TorusMinimum> {
    let a = amplitudes(poly, phases, x)?;
    let best = a
        .grid_scan(phases.dimension(), f64::NEG_INFINITY)
        .expect("no early stop below -inf");
    let (value, theta) = best
        .into_iter()
        .map(|(_, t)| a.polish(t))
        .min_by(|l, r| l.0.total_cmp(&r.0))
        .expect("at least one grid point");
    Ok(TorusMinimum {
        value: value * a.scale(),
        phases: theta.iter().map(|t| t.rem_euclid(TAU)).collect(),
    })
}

/// Whether [`torus_min_modulus`] is at most `bound`, decided without
/// polishing when a grid sample already lies below it.
pub fn torus_min_at_most(
    poly: &GeneralizedDirichletPoly,
    phases: &PrimePhases,
    x: f64,
    bound: f64,
) -> Result<bool> {
    let a = amplitudes(poly, phases, x)?;
    let stop = bound / a.scale();
    match a.grid_scan(phases.dimension(), stop) {
        Err(_) => Ok(true),
        Ok(best) => Ok(best.into_iter().any(|(_, t)| a.polish(t).0 <= stop)),
    }
}
