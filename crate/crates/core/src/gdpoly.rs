//! Generalized Dirichlet polynomials `Σ aₖ μₖ^z` with real coefficients and
//! positive rational bases.
//!
//! The three families studied here are all instances:
//!
//! * the partial sum `ζₙ(z) = Σ_{k≤n} k^{-z}`, stored with bases `1/k`;
//! * the mirrored sum `Gₙ(z) = ζₙ(−z) = Σ_{k≤n} k^z`;
//! * the pruned sum `Gₙ*(z) = Gₙ(z) − p^z`, `p` the largest prime `≤ n`.
//!
//! Storing `ζₙ` with reciprocal bases lets one evaluator serve every family.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest real exponent passed to `exp`; larger values saturate.
pub const EXP_CLAMP: f64 = 700.0;

/// A positive rational base `num/den`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Base {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Base {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::domain(format!("base {num}/{den} is not positive")));
        }
        let g = gcd(num, den);
        Ok(Base {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(k: u64) -> Self {
        assert!(k > 0, "integer base must be positive");
        Base { num: k, den: 1 }
    }

    pub fn reciprocal_of(k: u64) -> Self {
        assert!(k > 0, "integer base must be positive");
        Base { num: 1, den: k }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn ln(&self) -> f64 {
        (self.num as f64).ln() - (self.den as f64).ln()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn inverse(&self) -> Self {
        Base {
            num: self.den,
            den: self.num,
        }
    }
}

impl Ord for Base {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Base {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// One term `coeff · base^z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub base: Base,
    ln_base: f64,
}

impl Term {
    pub fn ln_base(&self) -> f64 {
        self.ln_base
    }
}

/// A value `e^{log_scale} · value`, with `abs_sum = Σ|aₖ| μₖ^x e^{-log_scale}`.
///
/// The phase of the true value equals the phase of `value`, which is all the
/// argument principle needs; the magnitude is recovered only when it fits.
#[derive(Debug, Clone, Copy)]
pub struct Scaled {
    pub value: Complex64,
    pub derivative: Complex64,
    pub log_scale: f64,
    pub abs_sum: f64,
}

impl Scaled {
    /// `|f| / Σ|aₖ μₖ^z|`, a scale-free measure of how close `z` is to a zero.
    pub fn relative_modulus(&self) -> f64 {
        if self.abs_sum > 0.0 {
            self.value.norm() / self.abs_sum
        } else {
            0.0
        }
    }

    pub fn unscaled(&self) -> Complex64 {
        self.value * self.log_scale.min(EXP_CLAMP).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedDirichletPoly {
    label: String,
    terms: Vec<Term>,
}

impl GeneralizedDirichletPoly {
    /// Builds a polynomial, dropping zero coefficients and sorting by base.
    /// Repeated bases are rejected rather than merged.
    pub fn new<I>(label: impl Into<String>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Base)>,
    {
        let mut terms: Vec<Term> = terms
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(coeff, base)| Term {
                coeff,
                base,
                ln_base: base.ln(),
            })
            .collect();
        if let Some(t) = terms.iter().find(|t| !t.coeff.is_finite()) {
            return Err(Error::domain(format!("non-finite coefficient {}", t.coeff)));
        }
        if terms.is_empty() {
            return Err(Error::domain("polynomial has no nonzero terms"));
        }
        terms.sort_by_key(|a| a.base);
        if let Some(w) = terms.windows(2).find(|w| w[0].base == w[1].base) {
            return Err(Error::domain(format!("repeated base {}", w[0].base)));
        }
        Ok(GeneralizedDirichletPoly {
            label: label.into(),
            terms,
        })
    }

    /// `ζₙ(z) = Σ_{k=1}^n k^{-z}`, stored as `Σ (1/k)^z`.
    pub fn partial_sum(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("partial sum needs n >= 2, got {n}")));
        }
        Self::new("zeta_n", (1..=n).map(|k| (1.0, Base::reciprocal_of(k))))
    }

    /// `Gₙ(z) = ζₙ(−z) = Σ_{k=1}^n k^z`.
    pub fn mirrored_sum(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("mirrored sum needs n >= 2, got {n}")));
        }
        Self::new("G_n", (1..=n).map(|k| (1.0, Base::integer(k))))
    }

    /// `Gₙ*(z) = Gₙ(z) − p^z` where `p` is the largest prime not exceeding `n`.
    pub fn pruned_sum(n: u64) -> Result<Self> {
        if n <= 2 {
            return Err(Error::domain(format!("pruned sum needs n > 2, got {n}")));
        }
        let p = last_prime_leq(n)?;
        Self::new(
            "G_n_star",
            (1..=n).filter(|&k| k != p).map(|k| (1.0, Base::integer(k))),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_ln_base(&self) -> f64 {
        self.terms[0].ln_base
    }

    pub fn max_ln_base(&self) -> f64 {
        self.terms[self.terms.len() - 1].ln_base
    }

    /// Width of the frequency spectrum, `ln(μ_max / μ_min)`.
    pub fn frequency_span(&self) -> f64 {
        self.max_ln_base() - self.min_ln_base()
    }

    /// `f(−z)` as a polynomial in its own right (bases inverted).
    pub fn reflected(&self, label: impl Into<String>) -> Self {
        Self::new(label, self.terms.iter().map(|t| (t.coeff, t.base.inverse())))
            .expect("inverting distinct bases keeps them distinct")
    }

    /// Scaled value and derivative at `z`. Never overflows.
    pub fn scaled(&self, z: Complex64) -> Scaled {
        let log_scale = self
            .terms
            .iter()
            .map(|t| z.re * t.ln_base)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut value = Complex64::new(0.0, 0.0);
        let mut derivative = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        for t in &self.terms {
            let r = (z.re * t.ln_base - log_scale).exp();
            let (s, c) = (z.im * t.ln_base).sin_cos();
            let w = Complex64::new(t.coeff * r * c, t.coeff * r * s);
            value += w;
            derivative += w * t.ln_base;
            abs_sum += t.coeff.abs() * r;
        }
        Scaled {
            value,
            derivative,
            log_scale,
            abs_sum,
        }
    }

    /// `f(z)` by direct summation in the log domain. Exponents above
    /// [`EXP_CLAMP`] saturate instead of overflowing to infinity.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::domain(format!("non-finite argument {z}")));
        }
        Ok(self.scaled(z).unscaled())
    }

    /// `f′(z) = Σ aₖ ln μₖ μₖ^z`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::domain(format!("non-finite argument {z}")));
        }
        let s = self.scaled(z);
        Ok(s.derivative * s.log_scale.min(EXP_CLAMP).exp())
    }

    /// `f(x)` on the real line.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * (x * t.ln_base).min(EXP_CLAMP).exp())
            .sum()
    }

    /// `Σ |aₖ| μₖ^x`, the natural magnitude scale at abscissa `x`.
    pub fn abs_scale(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.abs() * (x * t.ln_base).min(EXP_CLAMP).exp())
            .sum()
    }

    pub fn squared_modulus_expansion(&self) -> SquaredModulusExpansion {
        let diagonal = self
            .terms
            .iter()
            .map(|t| DiagonalTerm {
                coeff: t.coeff * t.coeff,
                base: t.base,
                ln_base: t.ln_base,
            })
            .collect();
        let mut cross = Vec::new();
        for (j, tj) in self.terms.iter().enumerate() {
            for tm in &self.terms[j + 1..] {
                cross.push(CrossTerm {
                    lower: tj.base,
                    upper: tm.base,
                    amplitude: 2.0 * tj.coeff * tm.coeff,
                    ln_product: tj.ln_base + tm.ln_base,
                    frequency: tm.ln_base - tj.ln_base,
                });
            }
        }
        SquaredModulusExpansion { diagonal, cross }
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    label: String,
    terms: Vec<(f64, u64, u64)>,
}

impl Serialize for GeneralizedDirichletPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            label: self.label.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| (t.coeff, t.base.num, t.base.den))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneralizedDirichletPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        let terms = repr
            .terms
            .into_iter()
            .map(|(c, num, den)| Base::new(num, den).map(|b| (c, b)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        GeneralizedDirichletPoly::new(repr.label, terms).map_err(serde::de::Error::custom)
    }
}

/// `aₖ² μₖ^{2x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalTerm {
    pub coeff: f64,
    pub base: Base,
    ln_base: f64,
}

/// `2 aⱼ aₘ (μⱼ μₘ)^x cos(y ln(μₘ/μⱼ))` for `μⱼ < μₘ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerm {
    pub lower: Base,
    pub upper: Base,
    pub amplitude: f64,
    ln_product: f64,
    pub frequency: f64,
}

/// Cosine expansion of `|f(x+iy)|²` for real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredModulusExpansion {
    pub diagonal: Vec<DiagonalTerm>,
    pub cross: Vec<CrossTerm>,
}

impl SquaredModulusExpansion {
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let d: f64 = self
            .diagonal
            .iter()
            .map(|t| t.coeff * (2.0 * x * t.ln_base).exp())
            .sum();
        let c: f64 = self
            .cross
            .iter()
            .map(|t| t.amplitude * (x * t.ln_product).exp() * (y * t.frequency).cos())
            .sum();
        d + c
    }

    /// Sum of absolute values of the expansion's terms at `x`.
    pub fn magnitude(&self, x: f64) -> f64 {
        let d: f64 = self
            .diagonal
            .iter()
            .map(|t| t.coeff.abs() * (2.0 * x * t.ln_base).exp())
            .sum();
        let c: f64 = self
            .cross
            .iter()
            .map(|t| t.amplitude.abs() * (x * t.ln_product).exp())
            .sum();
        d + c
    }

    /// Every base value appearing in the expansion.
    pub fn bases(&self) -> Vec<Base> {
        let mut out: Vec<Base> = self
            .diagonal
            .iter()
            .map(|t| t.base)
            .chain(self.cross.iter().flat_map(|t| [t.lower, t.upper]))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// The three polynomial families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "zeta")]
    Zeta,
    #[serde(rename = "G")]
    G,
    #[serde(rename = "Gstar")]
    GStar,
}

impl Family {
    pub fn build(self, n: u64) -> Result<GeneralizedDirichletPoly> {
        match self {
            Family::Zeta => GeneralizedDirichletPoly::partial_sum(n),
            Family::G => GeneralizedDirichletPoly::mirrored_sum(n),
            Family::GStar => GeneralizedDirichletPoly::pruned_sum(n),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Zeta => "zeta",
            Family::G => "G",
            Family::GStar => "Gstar",
        }
    }

    pub const ALL: [Family; 3] = [Family::Zeta, Family::G, Family::GStar];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta" | "zeta_n" => Ok(Family::Zeta),
            "G" | "g" | "G_n" => Ok(Family::G),
            "Gstar" | "gstar" | "G_star" | "G_n_star" => Ok(Family::GStar),
            other => Err(Error::domain(format!("unknown family {other:?}"))),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Largest prime `p ≤ n`.
pub fn last_prime_leq(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::domain(format!("no prime below {n}")));
    }
    Ok((2..=n).rev().find(|&k| is_prime(k)).expect("2 is prime"))
}

/// Largest base appearing in `Gₘ*`: `m − 1` when `m` is prime, else `m`.
pub fn m_star(m: u64) -> Result<u64> {
    if m <= 2 {
        return Err(Error::domain(format!("m* needs m > 2, got {m}")));
    }
    Ok(if is_prime(m) { m - 1 } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partial_sum_two_terms() {
        let z2 = GeneralizedDirichletPoly::partial_sum(2).unwrap();
        let bases: Vec<_> = z2.terms().iter().map(|t| (t.coeff, t.base)).collect();
        assert_eq!(bases, vec![(1.0, Base::new(1, 2).unwrap()), (1.0, Base::integer(1))]);
        let v = z2.evaluate(c(0.0, PI / LN_2)).unwrap();
        assert!(v.norm() < 1e-12, "{v}");
        let z3 = GeneralizedDirichletPoly::partial_sum(3).unwrap();
        assert_eq!(z3.evaluate(c(0.0, 0.0)).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn mirrored_and_pruned_constructors() {
        let g2 = GeneralizedDirichletPoly::mirrored_sum(2).unwrap();
        assert_eq!(g2.len(), 2);
        let g3 = GeneralizedDirichletPoly::mirrored_sum(3).unwrap();
        assert!((g3.evaluate(c(1.0, 0.0)).unwrap() - c(6.0, 0.0)).norm() < 1e-14);

        let bases = |n| -> Vec<u64> {
            GeneralizedDirichletPoly::pruned_sum(n)
                .unwrap()
                .terms()
                .iter()
                .map(|t| t.base.numer())
                .collect()
        };
        assert_eq!(bases(3), vec![1, 2]);
        assert_eq!(bases(4), vec![1, 2, 4]);
        assert_eq!(bases(5), vec![1, 2, 3, 4]);
    }

    #[test]
    fn constructor_domain_errors() {
        assert!(GeneralizedDirichletPoly::partial_sum(1).is_err());
        assert!(GeneralizedDirichletPoly::mirrored_sum(0).is_err());
        assert!(GeneralizedDirichletPoly::pruned_sum(2).is_err());
        assert!(GeneralizedDirichletPoly::new("x", [(1.0, Base::integer(2)), (2.0, Base::new(4, 2).unwrap())]).is_err());
        assert!(GeneralizedDirichletPoly::new("x", [(0.0, Base::integer(2))]).is_err());
        assert!(Base::new(0, 3).is_err());
    }

    #[test]
    fn primes_and_m_star() {
        assert_eq!(last_prime_leq(3).unwrap(), 3);
        assert_eq!(last_prime_leq(4).unwrap(), 3);
        // trial-division oracle
        for n in 2..200u64 {
            let oracle = (2..=n)
                .filter(|&p| (2..p).all(|d| p % d != 0))
                .max()
                .unwrap();
            assert_eq!(last_prime_leq(n).unwrap(), oracle, "n = {n}");
        }
        assert_eq!(last_prime_leq(10).unwrap(), 7);
        assert_eq!(m_star(5).unwrap(), 4);
        assert_eq!(m_star(6).unwrap(), 6);
        assert_eq!(m_star(7).unwrap(), 6);
        assert!(m_star(2).is_err());
    }

    #[test]
    fn pruned_four_vanishes_at_closed_form_zero() {
        let g = GeneralizedDirichletPoly::pruned_sum(4).unwrap();
        assert_eq!(g.evaluate(c(0.0, 0.0)).unwrap(), c(3.0, 0.0));
        let v = g.evaluate(c(0.0, 2.0 * PI / (3.0 * LN_2))).unwrap();
        assert!(v.norm() < 1e-12, "{v}");
    }

    #[test]
    fn evaluate_rejects_non_finite() {
        let g = GeneralizedDirichletPoly::mirrored_sum(3).unwrap();
        assert!(g.evaluate(c(f64::NAN, 0.0)).is_err());
        assert!(g.evaluate(c(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn evaluate_saturates_instead_of_overflowing() {
        let g = GeneralizedDirichletPoly::mirrored_sum(12).unwrap();
        let v = g.evaluate(c(400.0, 1.0)).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
        let s = g.scaled(c(400.0, 1.0));
        assert!(s.value.norm().is_finite() && s.log_scale > EXP_CLAMP);
    }

    #[test]
    fn expansion_of_pruned_three_matches_closed_form() {
        let e = GeneralizedDirichletPoly::pruned_sum(3)
            .unwrap()
            .squared_modulus_expansion();
        for &(x, y) in &[(0.3, 1.7), (-2.0, 11.0), (1.5, -4.0)] {
            let closed = 1.0 + 2f64.powf(2.0 * x) + 2f64.powf(x + 1.0) * (y * LN_2).cos();
            assert!((e.evaluate(x, y) - closed).abs() <= 1e-13 * closed.abs().max(1.0));
        }
    }

    #[test]
    fn expansion_of_pruned_four_frequencies() {
        let e = GeneralizedDirichletPoly::pruned_sum(4)
            .unwrap()
            .squared_modulus_expansion();
        let mut freqs: Vec<f64> = e.cross.iter().map(|t| t.frequency).collect();
        freqs.sort_by(f64::total_cmp);
        let want = [LN_2, LN_2, 2.0 * LN_2];
        for (a, b) in freqs.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(e.cross.iter().all(|t| t.amplitude == 2.0));
        assert!(!e.bases().contains(&Base::integer(3)));
    }

    #[test]
    fn json_round_trip() {
        let z = GeneralizedDirichletPoly::partial_sum(4).unwrap();
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(
            s,
            r#"{"label":"zeta_n","terms":[[1.0,1,4],[1.0,1,3],[1.0,1,2],[1.0,1,1]]}"#
        );
        let back: GeneralizedDirichletPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        assert!(serde_json::from_str::<GeneralizedDirichletPoly>(r#"{"label":"x","terms":[[1.0,0,1]]}"#).is_err());
    }

    #[test]
    fn family_parse() {
        assert_eq!("Gstar".parse::<Family>().unwrap(), Family::GStar);
        assert_eq!("zeta".parse::<Family>().unwrap(), Family::Zeta);
        assert!("H".parse::<Family>().is_err());
    }
}
