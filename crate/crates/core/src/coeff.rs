//! Exact complex-rational scalars used as symbol coefficients.
//!
//! Coefficients are `Complex<BigRational>` so that the algebraic identities of
//! the star products (associativity, c-equivalence, the s-transform group law)
//! can be tested as exact coefficient equalities rather than up to a floating
//! tolerance.

use num::{BigInt, BigRational, One, Signed, Zero};
use num_complex::{Complex, Complex64};
use num_traits::ToPrimitive;

pub type Rat = BigRational;
pub type CRat = Complex<Rat>;

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn czero() -> CRat {
    Complex::new(rat_zero(), rat_zero())
}

pub fn cone() -> CRat {
    Complex::new(rat_one(), rat_zero())
}

/// The imaginary unit.
pub fn ci() -> CRat {
    Complex::new(rat_zero(), rat_one())
}

pub fn creal(r: Rat) -> CRat {
    Complex::new(r, rat_zero())
}

pub fn cint(n: i64) -> CRat {
    creal(rat_int(n))
}

pub fn cfrac(num: i64, den: i64) -> CRat {
    creal(rat_frac(num, den))
}

pub fn is_zero(c: &CRat) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

pub fn conj(c: &CRat) -> CRat {
    Complex::new(c.re.clone(), -c.im.clone())
}

/// Lossy conversion to double-precision complex, for numeric evaluation.
pub fn to_c64(c: &CRat) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// Canonical decimal-free rendering of a rational: `p` or `p/q` in lowest terms.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p` or `p/q` (optionally signed) into an exact rational.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: BigInt = text.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

pub fn rat_is_negative(r: &Rat) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_formatting_round_trips() {
        for (n, d) in [(1i64, 2i64), (-3, 4), (5, 1), (0, 1), (7, -2)] {
            let r = rat_frac(n, d);
            let s = format_rat(&r);
            assert_eq!(parse_rat(&s).unwrap(), r, "{s}");
        }
    }

    #[test]
    fn complex_arithmetic_is_exact() {
        let a = CRat::new(rat_frac(1, 3), rat_frac(1, 2));
        let b = CRat::new(rat_frac(2, 3), rat_frac(-1, 2));
        let s = a.clone() + b.clone();
        assert_eq!(s, cone());
        assert_eq!(a.clone() * b.clone() - b * a, czero());
    }
}
