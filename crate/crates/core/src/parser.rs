//! Text grammar for symbols: parser and canonical pretty-printer.
//!
//! The grammar is ASCII-only and whitespace-insensitive. `a<j>` is the mode-j
//! amplitude, `ad<j>` its conjugate; literals are exact rationals, optionally
//! with an `i` suffix (`3/2`, `i`, `2i`, `1+2i` via the sum rule). Precedence
//! is `^` above `*` above `+`/`-`, all left associative, and products must be
//! written explicitly with `*`.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary ('*' unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' nat)*
//! atom     := number | var | '(' expr ')'
//! number   := digits ('/' digits)? 'i'?  |  'i'
//! var      := 'a' digits | 'ad' digits
//! ```
//!
//! [`format`] emits terms in descending graded lexicographic order with the
//! sign folded into each coefficient, so `parse(format(F)) == F` exactly.

use std::fmt;

use num::{BigInt, BigUint, One, Signed, Zero};
use num_traits::ToPrimitive;

use crate::coeff::{self, CRat, Rat};
use crate::error::{Error, Result};
use crate::symbol::{Monomial, PolySymbol, Var};

/// Abstract syntax of the surface language. Lowering to [`PolySymbol`] is
/// canonical: distinct trees denoting the same polynomial lower to the same
/// value.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolExpr {
    /// Rational literal, imaginary when `imag` is set.
    Literal { value: Rat, imag: bool },
    Variable { dagger: bool, index: usize },
    Sum(Box<SymbolExpr>, Box<SymbolExpr>),
    Product(Box<SymbolExpr>, Box<SymbolExpr>),
    Power(Box<SymbolExpr>, u32),
    Group(Box<SymbolExpr>),
    Negate(Box<SymbolExpr>),
}

impl SymbolExpr {
    /// Lower the tree to its canonical polynomial.
    pub fn lower(&self, mode_count: usize) -> PolySymbol {
        match self {
            SymbolExpr::Literal { value, imag } => {
                let c = if *imag {
                    CRat::new(coeff::rat_zero(), value.clone())
                } else {
                    CRat::new(value.clone(), coeff::rat_zero())
                };
                PolySymbol::constant(mode_count, c)
            }
            SymbolExpr::Variable { dagger, index } => {
                let var = if *dagger { Var::ad(*index) } else { Var::a(*index) };
                PolySymbol::variable(mode_count, var)
                    .expect("variable indices are validated during parsing")
            }
            SymbolExpr::Sum(l, r) => &l.lower(mode_count) + &r.lower(mode_count),
            SymbolExpr::Product(l, r) => &l.lower(mode_count) * &r.lower(mode_count),
            SymbolExpr::Power(b, e) => b.lower(mode_count).pow(*e),
            SymbolExpr::Group(inner) => inner.lower(mode_count),
            SymbolExpr::Negate(inner) => -&inner.lower(mode_count),
        }
    }
}

/// Parse error with the byte offset of the offending token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: found {found}, expected {}", expected.join(" | "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown variable `{name}` at byte {offset}: index {index} out of range for {mode_count} mode(s)")]
    IndexOutOfRange {
        offset: usize,
        name: String,
        index: String,
        mode_count: usize,
    },
    #[error("invalid exponent at byte {offset}: {reason}")]
    Exponent { offset: usize, reason: ExponentKind },
    #[error("invalid number at byte {offset}: {message}")]
    Number { offset: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentKind {
    Negative,
    Fractional,
    Imaginary,
    TooLarge,
}

impl fmt::Display for ExponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentKind::Negative => write!(f, "exponents must be non-negative"),
            ExponentKind::Fractional => write!(f, "exponents must be integers"),
            ExponentKind::Imaginary => write!(f, "exponents must be real integers"),
            ExponentKind::TooLarge => write!(f, "exponent does not fit in 32 bits"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Number { value: Rat, imag: bool, fractional: bool },
    Var { dagger: bool, index: BigUint },
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Number { .. } => "number".into(),
            Tok::Var { dagger, index } => {
                format!("`{}{}`", if *dagger { "ad" } else { "a" }, index)
            }
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    /// Next token plus its starting byte offset.
    fn next(&mut self) -> std::result::Result<(usize, Tok), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::Eof));
        }
        let b = self.src[self.pos];
        let simple = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((start, t));
        }
        if b == b'i' {
            self.pos += 1;
            return Ok((
                start,
                Tok::Number {
                    value: coeff::rat_one(),
                    imag: true,
                    fractional: false,
                },
            ));
        }
        if b == b'a' {
            self.pos += 1;
            let dagger = self.pos < self.src.len() && self.src[self.pos] == b'd';
            if dagger {
                self.pos += 1;
            }
            let ds = self.digits();
            if ds.is_empty() {
                return Err(ParseError::Syntax {
                    offset: self.pos.min(self.src.len()),
                    found: "missing mode index".into(),
                    expected: vec!["digit"],
                });
            }
            let index: BigUint = std::str::from_utf8(ds)
                .expect("ascii digits")
                .parse()
                .expect("digit string");
            return Ok((start, Tok::Var { dagger, index }));
        }
        if b.is_ascii_digit() {
            let num = self.digits();
            let numer: BigInt = std::str::from_utf8(num)
                .expect("ascii digits")
                .parse()
                .expect("digit string");
            let mut fractional = false;
            let mut value = Rat::from_integer(numer);
            if self.pos < self.src.len() && self.src[self.pos] == b'/' {
                let slash = self.pos;
                self.pos += 1;
                let den = self.digits();
                if den.is_empty() {
                    return Err(ParseError::Syntax {
                        offset: self.pos.min(self.src.len()),
                        found: "missing denominator".into(),
                        expected: vec!["digit"],
                    });
                }
                let denom: BigInt = std::str::from_utf8(den)
                    .expect("ascii digits")
                    .parse()
                    .expect("digit string");
                if denom.is_zero() {
                    return Err(ParseError::Number {
                        offset: slash + 1,
                        message: "zero denominator".into(),
                    });
                }
                fractional = !(value.numer() % &denom).is_zero();
                value /= Rat::from_integer(denom);
            }
            let mut imag = false;
            if self.pos < self.src.len() && self.src[self.pos] == b'i' {
                self.pos += 1;
                imag = true;
            }
            return Ok((
                start,
                Tok::Number {
                    value,
                    imag,
                    fractional,
                },
            ));
        }
        Err(ParseError::Syntax {
            offset: start,
            found: format!("`{}`", char::from(b)),
            expected: vec!["number", "variable", "`(`", "`-`"],
        })
    }
}

/// Nesting bound for groups and unary minus; inputs deeper than this are
/// rejected instead of risking the parser stack.
const MAX_DEPTH: usize = 256;
/// Bound on the total degree a parsed expression may denote.
const MAX_DEGREE: u128 = 4096;

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
    mode_count: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, mode_count: usize) -> std::result::Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let peeked = lexer.next()?;
        Ok(Parser {
            lexer,
            peeked,
            mode_count,
            depth: 0,
        })
    }

    fn enter(&mut self, offset: usize) -> std::result::Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::Syntax {
                offset,
                found: "nesting deeper than the supported limit".into(),
                expected: vec!["shallower expression"],
            });
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn advance(&mut self) -> std::result::Result<(usize, Tok), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn expr(&mut self) -> std::result::Result<SymbolExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peeked.1 {
                Tok::Plus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    acc = SymbolExpr::Sum(Box::new(acc), Box::new(rhs));
                }
                Tok::Minus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    acc = SymbolExpr::Sum(
                        Box::new(acc),
                        Box::new(SymbolExpr::Negate(Box::new(rhs))),
                    );
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<SymbolExpr, ParseError> {
        let mut acc = self.unary()?;
        while self.peeked.1 == Tok::Star {
            self.advance()?;
            let rhs = self.unary()?;
            acc = SymbolExpr::Product(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> std::result::Result<SymbolExpr, ParseError> {
        if self.peeked.1 == Tok::Minus {
            let (off, _) = self.advance()?;
            self.enter(off)?;
            let inner = self.unary();
            self.leave();
            return Ok(SymbolExpr::Negate(Box::new(inner?)));
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<SymbolExpr, ParseError> {
        let mut acc = self.atom()?;
        while self.peeked.1 == Tok::Caret {
            self.advance()?;
            let (off, tok) = self.advance()?;
            let exponent = match tok {
                Tok::Number { imag: true, .. } => {
                    return Err(ParseError::Exponent {
                        offset: off,
                        reason: ExponentKind::Imaginary,
                    })
                }
                Tok::Number {
                    fractional: true, ..
                } => {
                    return Err(ParseError::Exponent {
                        offset: off,
                        reason: ExponentKind::Fractional,
                    })
                }
                Tok::Number { value, .. } => {
                    debug_assert!(value.denom().is_one());
                    let e = value.numer().to_u32().ok_or(ParseError::Exponent {
                        offset: off,
                        reason: ExponentKind::TooLarge,
                    })?;
                    if u128::from(e) * degree_bound(&acc) > MAX_DEGREE {
                        return Err(ParseError::Exponent {
                            offset: off,
                            reason: ExponentKind::TooLarge,
                        });
                    }
                    e
                }
                Tok::Minus => {
                    return Err(ParseError::Exponent {
                        offset: off,
                        reason: ExponentKind::Negative,
                    })
                }
                other => {
                    return Err(ParseError::Syntax {
                        offset: off,
                        found: other.describe(),
                        expected: vec!["non-negative integer exponent"],
                    })
                }
            };
            acc = SymbolExpr::Power(Box::new(acc), exponent);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> std::result::Result<SymbolExpr, ParseError> {
        let (off, tok) = self.advance()?;
        match tok {
            Tok::Number { value, imag, .. } => Ok(SymbolExpr::Literal { value, imag }),
            Tok::Var { dagger, index } => {
                let idx_usize = index.to_usize().filter(|&i| i < self.mode_count);
                match idx_usize {
                    Some(i) => Ok(SymbolExpr::Variable { dagger, index: i }),
                    None => Err(ParseError::IndexOutOfRange {
                        offset: off,
                        name: format!("{}{}", if dagger { "ad" } else { "a" }, index),
                        index: index.to_string(),
                        mode_count: self.mode_count,
                    }),
                }
            }
            Tok::LParen => {
                self.enter(off)?;
                let inner = self.expr();
                self.leave();
                let inner = inner?;
                let (off2, tok2) = self.advance()?;
                if tok2 != Tok::RParen {
                    return Err(ParseError::Syntax {
                        offset: off2,
                        found: tok2.describe(),
                        expected: vec!["`)`"],
                    });
                }
                Ok(SymbolExpr::Group(Box::new(inner)))
            }
            other => Err(ParseError::Syntax {
                offset: off,
                found: other.describe(),
                expected: vec!["number", "variable", "`(`", "`-`"],
            }),
        }
    }
}

/// Upper bound on the total degree an expression can denote, saturated at
/// `MAX_DEGREE + 1`; used to reject exponents that would blow up lowering.
fn degree_bound(expr: &SymbolExpr) -> u128 {
    let cap = MAX_DEGREE + 1;
    match expr {
        SymbolExpr::Literal { .. } => 0,
        SymbolExpr::Variable { .. } => 1,
        SymbolExpr::Sum(l, r) => degree_bound(l).max(degree_bound(r)),
        SymbolExpr::Product(l, r) => (degree_bound(l) + degree_bound(r)).min(cap),
        SymbolExpr::Power(b, e) => (degree_bound(b) * u128::from(*e)).min(cap),
        SymbolExpr::Group(inner) | SymbolExpr::Negate(inner) => degree_bound(inner),
    }
}

/// Parse an expression tree without lowering it.
pub fn parse_expr(text: &str, mode_count: usize) -> std::result::Result<SymbolExpr, ParseError> {
    let mut parser = Parser::new(text, mode_count)?;
    let expr = parser.expr()?;
    let (off, tok) = parser.advance()?;
    if tok != Tok::Eof {
        return Err(ParseError::Syntax {
            offset: off,
            found: tok.describe(),
            expected: vec!["`+`", "`-`", "`*`", "`^`", "end of input"],
        });
    }
    Ok(expr)
}

/// Parse a symbol in the text grammar into its canonical polynomial.
pub fn parse(text: &str, mode_count: usize) -> Result<PolySymbol> {
    assert!(mode_count > 0, "mode_count must be positive");
    let expr = parse_expr(text, mode_count).map_err(Error::Parse)?;
    Ok(expr.lower(mode_count))
}

fn format_coefficient(c: &CRat, has_vars: bool) -> Option<String> {
    let re_zero = c.re.is_zero();
    let im_zero = c.im.is_zero();
    if re_zero && im_zero {
        return Some("0".into());
    }
    if !re_zero && !im_zero {
        // both parts: parenthesized complex literal
        let re = coeff::format_rat(&c.re);
        let im_abs = coeff::format_rat(&c.im.abs());
        let sign = if c.im.is_negative() { "-" } else { "+" };
        let im = if c.im.abs().is_one() {
            "i".to_string()
        } else {
            format!("{im_abs}i")
        };
        return Some(format!("({re}{sign}{im})"));
    }
    if im_zero {
        if has_vars && c.re.is_one() {
            return None; // bare product of variables
        }
        if has_vars && (-c.re.clone()).is_one() {
            return Some("-".into());
        }
        return Some(coeff::format_rat(&c.re));
    }
    // purely imaginary
    if c.im.is_one() {
        Some("i".into())
    } else if (-c.im.clone()).is_one() {
        Some("-i".into())
    } else {
        Some(format!("{}i", coeff::format_rat(&c.im)))
    }
}

fn format_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (slot, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        let mode = slot / 2;
        let name = if slot % 2 == 0 {
            format!("a{mode}")
        } else {
            format!("ad{mode}")
        };
        if e == 1 {
            parts.push(name);
        } else {
            parts.push(format!("{name}^{e}"));
        }
    }
    parts.join("*")
}

/// Canonical text form: terms in descending graded lexicographic order,
/// joined with ` + `, each coefficient carrying its own sign.
pub fn format(symbol: &PolySymbol) -> String {
    if symbol.is_zero() {
        return "0".into();
    }
    let mut rendered = Vec::with_capacity(symbol.term_count());
    let terms: Vec<_> = symbol.terms().collect();
    for (m, c) in terms.into_iter().rev() {
        let vars = format_monomial(m);
        let has_vars = !vars.is_empty();
        match format_coefficient(c, has_vars) {
            None => rendered.push(vars),
            Some(prefix) if prefix == "-" => rendered.push(format!("-{vars}")),
            Some(prefix) if has_vars => rendered.push(format!("{prefix}*{vars}")),
            Some(prefix) => rendered.push(prefix),
        }
    }
    rendered.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{cfrac, cint};
    use crate::symbol::PolySymbol;

    fn sym(text: &str, modes: usize) -> PolySymbol {
        parse(text, modes).unwrap()
    }

    #[test]
    fn denotation_examples() {
        // a0*ad0 + 1/2
        let want = {
            let a = PolySymbol::variable(1, Var::a(0)).unwrap();
            let ad = PolySymbol::variable(1, Var::ad(0)).unwrap();
            &(&a * &ad) + &PolySymbol::constant(1, cfrac(1, 2))
        };
        assert_eq!(sym("a0*ad0 + 1/2", 1), want);
        assert_eq!(sym("  a0 * ad0+1/2 ", 1), want, "whitespace insensitive");

        // (1+2i)*ad1^2
        let want = {
            let ad1 = PolySymbol::variable(2, Var::ad(1)).unwrap();
            ad1.pow(2).scale(&CRat::new(coeff::rat_int(1), coeff::rat_int(2)))
        };
        assert_eq!(sym("(1+2i)*ad1^2", 2), want);
    }

    #[test]
    fn index_out_of_range_is_reported_with_name() {
        let err = parse("a3", 2).unwrap_err();
        match err {
            Error::Parse(ParseError::IndexOutOfRange { name, offset, .. }) => {
                assert_eq!(name, "a3");
                assert_eq!(offset, 0);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn exponent_errors() {
        assert!(matches!(
            parse_expr("a0^-1", 1),
            Err(ParseError::Exponent {
                reason: ExponentKind::Negative,
                ..
            })
        ));
        assert!(matches!(
            parse_expr("a0^(1/2)", 1),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("a0^1/2", 1),
            Err(ParseError::Exponent {
                reason: ExponentKind::Fractional,
                ..
            })
        ));
        assert!(matches!(
            parse_expr("a0^2i", 1),
            Err(ParseError::Exponent {
                reason: ExponentKind::Imaginary,
                ..
            })
        ));
    }

    #[test]
    fn syntax_error_carries_offset() {
        let err = parse_expr("a0 + + a0", 1).unwrap_err();
        match err {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 5),
            other => panic!("unexpected: {other:?}"),
        }
        let err = parse_expr("a0 a0", 1).unwrap_err();
        match err {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 3),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            parse_expr("1/0", 1),
            Err(ParseError::Number { .. })
        ));
    }

    #[test]
    fn canonical_formatting() {
        assert_eq!(format(&PolySymbol::zero(1)), "0");
        let f = {
            let a = PolySymbol::variable(1, Var::a(0)).unwrap();
            let ad = PolySymbol::variable(1, Var::ad(0)).unwrap();
            &(&a * &ad) - &PolySymbol::constant(1, cfrac(1, 2))
        };
        assert_eq!(format(&f), "a0*ad0 + -1/2");
        // precedence: power binds above product, descending graded order
        let g = sym("2*a0^2 + -3i*ad0 + (1+2i)", 1);
        assert_eq!(format(&g), "2*a0^2 + -3i*ad0 + (1+2i)");
        assert_eq!(sym(&format(&g), 1), g);
    }

    #[test]
    fn negative_one_coefficient_folds_into_sign() {
        let f = -&PolySymbol::variable(1, Var::a(0)).unwrap();
        assert_eq!(format(&f), "-a0");
        assert_eq!(sym("-a0", 1), f);
        let g = PolySymbol::constant(1, cint(-1));
        assert_eq!(format(&g), "-1");
    }

    #[test]
    fn power_precedence_and_unary() {
        // -a0^2 is -(a0^2)
        let f = sym("-a0^2", 1);
        let want = -&PolySymbol::variable(1, Var::a(0)).unwrap().pow(2);
        assert_eq!(f, want);
        // 2^3 as literal power
        let g = sym("2^3", 1);
        assert_eq!(g, PolySymbol::constant(1, cint(8)));
    }
}
