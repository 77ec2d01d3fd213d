//! Poisson bracket, star products and ordering transforms on symbols.
//!
//! Both star products are exponentials of constant-coefficient bidifferential
//! operators, so on polynomials every series terminates and all results are
//! exact. The Moyal product pairs derivatives antisymmetrically with weight
//! 1/2 per order; the normal product pairs `a`-derivatives on the left factor
//! with conjugate derivatives on the right factor at weight 1.

use crate::coeff::{cfrac, ci, cint, cone, CRat};
use crate::error::Result;

use super::{PolySymbol, SOrder, Var};

/// One derivative pairing of a bidifferential exponent: `left` acts on the
/// first factor, `right` on the second, `weight` multiplies each order.
struct BidiffPair {
    left: Var,
    right: Var,
    weight: CRat,
}

/// `F exp{ sum_i weight_i <-d_left_i  ->d_right_i } G`, expanded term by term.
/// Terminates because each derivative lowers a polynomial degree.
fn exp_bidiff(f: &PolySymbol, g: &PolySymbol, pairs: &[BidiffPair]) -> PolySymbol {
    fn recurse(
        level: usize,
        f_cur: &PolySymbol,
        g_cur: &PolySymbol,
        scale: &CRat,
        pairs: &[BidiffPair],
        acc: &mut PolySymbol,
    ) {
        if level == pairs.len() {
            let product = f_cur * g_cur;
            for (m, c) in product.terms() {
                acc.add_term(m.clone(), c.clone() * scale.clone());
            }
            return;
        }
        let pair = &pairs[level];
        let mut f_d = f_cur.clone();
        let mut g_d = g_cur.clone();
        let mut coef = scale.clone();
        let mut order: i64 = 0;
        loop {
            recurse(level + 1, &f_d, &g_d, &coef, pairs, acc);
            f_d = f_d.partial(pair.left);
            if f_d.is_zero() {
                break;
            }
            g_d = g_d.partial(pair.right);
            if g_d.is_zero() {
                break;
            }
            order += 1;
            coef = coef * pair.weight.clone() / cint(order);
        }
    }

    let mut acc = PolySymbol::zero(f.mode_count());
    recurse(0, f, g, &cone(), pairs, &mut acc);
    acc
}

/// Canonical bracket `{F, G} = -i sum_j (dF/da_j dG/da*_j - dF/da*_j dG/da_j)`,
/// the finite-mode form of `{a_j, a*_l} = -i delta_jl`.
pub fn poisson_bracket(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol> {
    f.check_same_modes(g)?;
    let mut acc = PolySymbol::zero(f.mode_count());
    for j in 0..f.mode_count() {
        let t1 = &f.partial(Var::a(j)) * &g.partial(Var::ad(j));
        let t2 = &f.partial(Var::ad(j)) * &g.partial(Var::a(j));
        acc = &acc + &(&t1 - &t2);
    }
    Ok(acc.scale(&-ci()))
}

/// Moyal star product
/// `F exp{ (1/2) sum_j (<-d_a_j ->d_a*_j - <-d_a*_j ->d_a_j) } G`.
pub fn moyal_star(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol> {
    f.check_same_modes(g)?;
    let mut pairs = Vec::with_capacity(2 * f.mode_count());
    for j in 0..f.mode_count() {
        pairs.push(BidiffPair {
            left: Var::a(j),
            right: Var::ad(j),
            weight: cfrac(1, 2),
        });
        pairs.push(BidiffPair {
            left: Var::ad(j),
            right: Var::a(j),
            weight: cfrac(-1, 2),
        });
    }
    Ok(exp_bidiff(f, g, &pairs))
}

/// Normal star product `F exp{ sum_j <-d_a_j ->d_a*_j } G`, the composition
/// rule of normal-ordered operators.
pub fn normal_star(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol> {
    f.check_same_modes(g)?;
    let pairs: Vec<BidiffPair> = (0..f.mode_count())
        .map(|j| BidiffPair {
            left: Var::a(j),
            right: Var::ad(j),
            weight: cone(),
        })
        .collect();
    Ok(exp_bidiff(f, g, &pairs))
}

/// `F (star) G - G (star) F` under the Moyal product.
pub fn star_commutator(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol> {
    Ok(&moyal_star(f, g)? - &moyal_star(g, f)?)
}

/// Re-order a symbol between members of the s-parametrized family:
/// `F_{s'} = exp{ ((s - s')/2) sum_j d_a_j d_a*_j } F_s`.
///
/// The transforms compose as a one-parameter group and are exactly invertible
/// on polynomials.
pub fn s_transform(f: &PolySymbol, from: &SOrder, to: &SOrder) -> PolySymbol {
    let c = CRat::new(
        (from.0.clone() - to.0.clone()) / crate::coeff::rat_int(2),
        crate::coeff::rat_zero(),
    );
    if c.re == crate::coeff::rat_zero() {
        return f.clone();
    }
    // exp{c L} with L = sum_j d_a_j d_a*_j applied as a terminating series.
    let laplace = |p: &PolySymbol| -> PolySymbol {
        let mut acc = PolySymbol::zero(p.mode_count());
        for j in 0..p.mode_count() {
            acc = &acc + &p.partial(Var::a(j)).partial(Var::ad(j));
        }
        acc
    };
    let mut acc = f.clone();
    let mut cur = f.clone();
    let mut coef = cone();
    let mut order: i64 = 0;
    loop {
        cur = laplace(&cur);
        if cur.is_zero() {
            break;
        }
        order += 1;
        coef = coef * c.clone() / cint(order);
        acc = &acc + &cur.scale(&coef);
    }
    acc
}

/// Weyl-symmetric symbol of an operator given its normal symbol:
/// the `s = -1 -> s = 0` member of [`s_transform`].
pub fn weyl_from_normal(f: &PolySymbol) -> PolySymbol {
    s_transform(f, &SOrder::normal(), &SOrder::weyl())
}
