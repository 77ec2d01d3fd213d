//! Polynomial phase-space symbols over holomorphic mode variables.
//!
//! A [`PolySymbol`] is an exact multivariate polynomial in the variables
//! `a_0, a*_0, a_1, a*_1, ...` (one conjugate pair per mode) with complex
//! rational coefficients. These are the classical observables the star
//! products act on; the variable pair of mode `j` plays the role of the
//! holomorphic amplitude and its conjugate.

mod algebra;

pub use algebra::{
    moyal_star, normal_star, poisson_bracket, s_transform, star_commutator, weyl_from_normal,
};

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::{self, cone, conj, is_zero, to_c64, CRat, Rat};
use crate::error::{Error, Result};

/// One variable of the symbol algebra: the amplitude of a mode or its
/// conjugate (`dagger = true` for `a*_j`, written `ad<j>` in the text grammar).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var {
    pub mode: usize,
    pub dagger: bool,
}

impl Var {
    pub fn a(mode: usize) -> Self {
        Var { mode, dagger: false }
    }

    pub fn ad(mode: usize) -> Self {
        Var { mode, dagger: true }
    }

    /// Flat slot in an exponent vector: `[e_a0, e_ad0, e_a1, e_ad1, ...]`.
    pub fn slot(self) -> usize {
        2 * self.mode + usize::from(self.dagger)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "ad{}", self.mode)
        } else {
            write!(f, "a{}", self.mode)
        }
    }
}

/// Exponent vector of one term, ordered by graded lexicographic comparison
/// (total degree first, then lexicographic on the flat exponent slots).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn unit(mode_count: usize) -> Self {
        Monomial(vec![0; 2 * mode_count].into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Exact polynomial in the mode variables; the canonical form stores no zero
/// coefficients, so equality of values is equality of representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySymbol {
    mode_count: usize,
    terms: BTreeMap<Monomial, CRat>,
}

impl PolySymbol {
    pub fn zero(mode_count: usize) -> Self {
        assert!(mode_count > 0, "mode_count must be positive");
        PolySymbol {
            mode_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(mode_count: usize, value: CRat) -> Self {
        let mut s = Self::zero(mode_count);
        s.add_term(Monomial::unit(mode_count), value);
        s
    }

    pub fn one(mode_count: usize) -> Self {
        Self::constant(mode_count, cone())
    }

    pub fn variable(mode_count: usize, var: Var) -> Result<Self> {
        if var.mode >= mode_count {
            return Err(Error::ModeIndex {
                index: var.mode,
                mode_count,
            });
        }
        let mut exps = vec![0u32; 2 * mode_count];
        exps[var.slot()] = 1;
        let mut s = Self::zero(mode_count);
        s.add_term(Monomial(exps.into_boxed_slice()), cone());
        Ok(s)
    }

    /// Single term from a flat exponent vector `[e_a0, e_ad0, ...]`.
    pub fn monomial(mode_count: usize, exponents: &[u32], coefficient: CRat) -> Result<Self> {
        if exponents.len() != 2 * mode_count {
            return Err(Error::ModeMismatch {
                expected: 2 * mode_count,
                found: exponents.len(),
            });
        }
        let mut s = Self::zero(mode_count);
        s.add_term(Monomial(exponents.to_vec().into_boxed_slice()), coefficient);
        Ok(s)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms in ascending graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CRat)> {
        self.terms.iter()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: CRat) {
        if is_zero(&c) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if is_zero(&sum) {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn scale(&self, c: &CRat) -> PolySymbol {
        if is_zero(c) {
            return PolySymbol::zero(self.mode_count);
        }
        let mut out = PolySymbol::zero(self.mode_count);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    /// Partial derivative with respect to one variable.
    pub fn partial(&self, var: Var) -> PolySymbol {
        let slot = var.slot();
        let mut out = PolySymbol::zero(self.mode_count);
        for (m, c) in &self.terms {
            let e = m.0[slot];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.to_vec();
            exps[slot] = e - 1;
            out.add_term(
                Monomial(exps.into_boxed_slice()),
                c.clone() * coeff::cint(i64::from(e)),
            );
        }
        out
    }

    pub fn pow(&self, n: u32) -> PolySymbol {
        let mut acc = PolySymbol::one(self.mode_count);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Swap `a_j <-> a*_j` and conjugate every coefficient. A symbol equal to
    /// its own conjugate quantizes to a Hermitian operator.
    pub fn conjugate(&self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.mode_count);
        for (m, c) in &self.terms {
            let mut exps = m.0.to_vec();
            for j in 0..self.mode_count {
                exps.swap(2 * j, 2 * j + 1);
            }
            out.add_term(Monomial(exps.into_boxed_slice()), conj(c));
        }
        out
    }

    /// Evaluate at a phase point, substituting `a_j = z_j`, `a*_j = conj(z_j)`.
    pub fn eval(&self, point: &PhasePoint) -> Result<Complex64> {
        if point.amplitudes.len() != self.mode_count {
            return Err(Error::ModeMismatch {
                expected: self.mode_count,
                found: point.amplitudes.len(),
            });
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = to_c64(c);
            for j in 0..self.mode_count {
                let z = point.amplitudes[j];
                v *= z.powu(m.0[2 * j]) * z.conj().powu(m.0[2 * j + 1]);
            }
            total += v;
        }
        Ok(total)
    }

    pub(crate) fn check_same_modes(&self, other: &PolySymbol) -> Result<()> {
        if self.mode_count != other.mode_count {
            return Err(Error::ModeMismatch {
                expected: self.mode_count,
                found: other.mode_count,
            });
        }
        Ok(())
    }

    /// Canonical JSON value: `{"modes": n, "terms": [{"exp": [...], "re": "p/q", "im": "p/q"}]}`,
    /// terms in descending graded lexicographic order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SymbolRepr::from(self)).expect("symbol serialization")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<PolySymbol> {
        let repr: SymbolRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("symbol json: {e}")))?;
        repr.try_into()
    }
}

impl std::ops::Add for &PolySymbol {
    type Output = PolySymbol;
    fn add(self, rhs: &PolySymbol) -> PolySymbol {
        assert_eq!(self.mode_count, rhs.mode_count, "mode count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &PolySymbol {
    type Output = PolySymbol;
    fn sub(self, rhs: &PolySymbol) -> PolySymbol {
        assert_eq!(self.mode_count, rhs.mode_count, "mode count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &PolySymbol {
    type Output = PolySymbol;
    fn mul(self, rhs: &PolySymbol) -> PolySymbol {
        assert_eq!(self.mode_count, rhs.mode_count, "mode count mismatch");
        let mut out = PolySymbol::zero(self.mode_count);
        for (ml, cl) in &self.terms {
            for (mr, cr) in &rhs.terms {
                out.add_term(ml.mul(mr), cl.clone() * cr.clone());
            }
        }
        out
    }
}

impl std::ops::Neg for &PolySymbol {
    type Output = PolySymbol;
    fn neg(self) -> PolySymbol {
        let mut out = PolySymbol::zero(self.mode_count);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

/// Evaluation point of symbols: one complex amplitude per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub amplitudes: Vec<Complex64>,
}

impl PhasePoint {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        PhasePoint { amplitudes }
    }

    /// Build from real quadrature pairs at unit frequency:
    /// `a_j = (Q_j + i P_j) / sqrt(2)`.
    pub fn from_qp(pairs: &[(f64, f64)]) -> Self {
        let amplitudes = pairs
            .iter()
            .map(|&(q, p)| Complex64::new(q, p) / 2f64.sqrt())
            .collect();
        PhasePoint { amplitudes }
    }
}

/// Ordering parameter of the quantization family: `0` is Weyl-symmetric,
/// `-1` is the normal (Husimi) ordering, `+1` the anti-normal
/// (Glauber-Sudarshan) ordering. Any exact rational value is accepted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SOrder(pub Rat);

impl SOrder {
    pub fn weyl() -> Self {
        SOrder(coeff::rat_int(0))
    }

    pub fn normal() -> Self {
        SOrder(coeff::rat_int(-1))
    }

    pub fn anti_normal() -> Self {
        SOrder(coeff::rat_int(1))
    }

    pub fn new(value: Rat) -> Self {
        SOrder(value)
    }

    pub fn value(&self) -> &Rat {
        &self.0
    }
}

impl fmt::Display for SOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", coeff::format_rat(&self.0))
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u32>,
    re: String,
    im: String,
}

#[derive(Serialize, Deserialize)]
struct SymbolRepr {
    modes: usize,
    terms: Vec<TermRepr>,
}

impl From<&PolySymbol> for SymbolRepr {
    fn from(s: &PolySymbol) -> Self {
        let terms = s
            .terms
            .iter()
            .rev()
            .map(|(m, c)| TermRepr {
                exp: m.0.to_vec(),
                re: coeff::format_rat(&c.re),
                im: coeff::format_rat(&c.im),
            })
            .collect();
        SymbolRepr {
            modes: s.mode_count,
            terms,
        }
    }
}

impl TryFrom<SymbolRepr> for PolySymbol {
    type Error = Error;

    fn try_from(repr: SymbolRepr) -> Result<PolySymbol> {
        if repr.modes == 0 {
            return Err(Error::Config("symbol json: modes must be positive".into()));
        }
        let mut s = PolySymbol::zero(repr.modes);
        for t in repr.terms {
            let re = coeff::parse_rat(&t.re)
                .ok_or_else(|| Error::Config(format!("symbol json: bad rational {:?}", t.re)))?;
            let im = coeff::parse_rat(&t.im)
                .ok_or_else(|| Error::Config(format!("symbol json: bad rational {:?}", t.im)))?;
            if t.exp.len() != 2 * repr.modes {
                return Err(Error::ModeMismatch {
                    expected: 2 * repr.modes,
                    found: t.exp.len(),
                });
            }
            s.add_term(Monomial(t.exp.into_boxed_slice()), CRat::new(re, im));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{cfrac, cint};

    fn a0(modes: usize) -> PolySymbol {
        PolySymbol::variable(modes, Var::a(0)).unwrap()
    }

    fn ad0(modes: usize) -> PolySymbol {
        PolySymbol::variable(modes, Var::ad(0)).unwrap()
    }

    #[test]
    fn product_is_commutative_and_canonical() {
        let f = &a0(2) + &ad0(2).scale(&cint(2));
        let g = &PolySymbol::variable(2, Var::a(1)).unwrap() - &PolySymbol::one(2);
        assert_eq!(&f * &g, &g * &f);
        let cancel = &f - &f;
        assert!(cancel.is_zero());
        assert_eq!(cancel.term_count(), 0);
    }

    #[test]
    fn derivative_follows_leibniz() {
        let f = &a0(1) * &a0(1);
        let g = ad0(1);
        let fg = &f * &g;
        let lhs = fg.partial(Var::a(0));
        let rhs = &(&f.partial(Var::a(0)) * &g) + &(&f * &g.partial(Var::a(0)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_substitutes_conjugates() {
        // a0 * ad0 at z = 1 + i evaluates to |z|^2 = 2
        let f = &a0(1) * &ad0(1);
        let z = PhasePoint::new(vec![Complex64::new(1.0, 1.0)]);
        let v = f.eval(&z).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f = &(&a0(2) * &ad0(2)).scale(&cfrac(3, 2)) + &PolySymbol::one(2).scale(&cint(-1));
        let j = f.to_json();
        assert_eq!(PolySymbol::from_json(&j).unwrap(), f);
    }

    #[test]
    fn mode_mismatch_detected() {
        let f = a0(1);
        let g = a0(2);
        assert!(matches!(
            poisson_bracket(&f, &g),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn variable_index_checked() {
        assert!(matches!(
            PolySymbol::variable(2, Var::a(3)),
            Err(Error::ModeIndex { .. })
        ));
    }

    #[test]
    fn grlex_orders_by_degree_then_slots() {
        let m1 = Monomial(vec![2, 0].into_boxed_slice());
        let m2 = Monomial(vec![1, 1].into_boxed_slice());
        let m3 = Monomial(vec![0, 1].into_boxed_slice());
        assert!(m1 > m2);
        assert!(m2 > m3);
    }
}
