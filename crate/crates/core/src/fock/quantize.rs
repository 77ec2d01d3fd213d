//! Quantization maps between polynomial symbols and truncated operators, and
//! symbol extraction from operators.
//!
//! `normal_quantize` sends each monomial `prod_j a*_j^m a_j^n` to
//! `prod_j (a^dag_j)^m (a_j)^n`; `weyl_quantize` first converts the symmetric
//! symbol to its normal form. The inverse direction is `husimi_symbol`
//! (coherent-state expectation, the normal symbol) and `weyl_symbol`
//! (displaced-parity trace, the symmetric symbol).
//!
//! The displaced-parity trace is an alternating series over occupation
//! numbers. For operators with decaying diagonals (density matrices) the
//! series converges absolutely and is summed directly. For polynomial
//! operators the displaced diagonal grows polynomially in `n` and the
//! partial sums oscillate; the series is then summed by Euler's
//! transformation, which is exact on polynomial sequences (forward
//! differences terminate) and uses only the low-occupation diagonal, where
//! truncation effects are negligible. A factor of 2 per mode normalizes the
//! parity kernel so that `weyl_symbol(weyl_quantize(F), z) = F(z)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coeff::to_c64;
use crate::error::{Error, Result};
use crate::symbol::{s_transform, PolySymbol, SOrder};

use super::{displacement, local_annihilation, CoherentAmplitudes, FockOp, FockTruncation};

/// Build the normal-ordered operator of a symbol: within each mode all
/// creation operators stand left of all annihilation operators.
pub fn normal_quantize(symbol: &PolySymbol, trunc: &FockTruncation) -> Result<FockOp> {
    if symbol.mode_count() != trunc.mode_count() {
        return Err(Error::ModeMismatch {
            expected: trunc.mode_count(),
            found: symbol.mode_count(),
        });
    }
    let dim = trunc.dim();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for (mono, coef) in symbol.terms() {
        let exps = mono.exponents();
        let mut term = DMatrix::<Complex64>::identity(1, 1);
        for j in 0..trunc.mode_count() {
            let e_a = exps[2 * j];
            let e_ad = exps[2 * j + 1];
            let local_a = local_annihilation(trunc.cutoff(j));
            let local_ad = local_a.adjoint();
            let d = trunc.cutoff(j) + 1;
            let mut local = DMatrix::<Complex64>::identity(d, d);
            for _ in 0..e_ad {
                local = &local_ad * local;
            }
            for _ in 0..e_a {
                local *= &local_a;
            }
            term = term.kronecker(&local);
        }
        acc += term * to_c64(coef);
    }
    FockOp::from_matrix(trunc.clone(), acc)
}

/// Build the Weyl-symmetric operator of a symbol by re-ordering it to its
/// normal form first.
pub fn weyl_quantize(symbol: &PolySymbol, trunc: &FockTruncation) -> Result<FockOp> {
    let normal = s_transform(symbol, &SOrder::weyl(), &SOrder::normal());
    normal_quantize(&normal, trunc)
}

/// Normal symbol of an operator: the coherent-state expectation `<z|op|z>`.
pub fn husimi_symbol(op: &FockOp, z: &CoherentAmplitudes) -> Result<Complex64> {
    let (v, _) = super::coherent_state(op.truncation(), z)?;
    Ok(v.dotc(&op.apply(&v)))
}

/// Tuning of the regularized displaced-parity trace.
#[derive(Clone, Debug)]
pub struct SymbolParams {
    /// Diagonal-mass fraction on the top-occupation block above which the
    /// plain sum is considered untrustworthy.
    pub tail_fraction: f64,
    /// Relative size at which the forward-difference cascade is treated as
    /// terminated.
    pub diff_stop: f64,
    /// Highest forward-difference order used by the Euler branch.
    pub max_diff_order: usize,
}

impl Default for SymbolParams {
    fn default() -> Self {
        SymbolParams {
            tail_fraction: 1e-6,
            diff_stop: 1e-9,
            max_diff_order: 8,
        }
    }
}

/// Symbol value with truncation diagnostics.
#[derive(Clone, Debug)]
pub struct SymbolEval {
    pub value: Complex64,
    /// Fraction of the diagonal mass of `D^dag op D` sitting on basis states
    /// with any mode at its cutoff.
    pub tail_fraction: f64,
    /// Set when the tail fraction exceeds the configured bound or the Euler
    /// cascade failed to terminate; the value is then untrustworthy.
    pub tail_warning: bool,
}

/// Regularized alternating reduction of one axis: plain summation when the
/// sequence has a negligible tail entry, Euler summation of the forward
/// differences otherwise. Returns the reduced value and whether the cascade
/// failed to stabilize.
fn alternating_reduce(seq: &[Complex64], params: &SymbolParams) -> (Complex64, bool) {
    let total: f64 = seq.iter().map(|c| c.norm()).sum();
    if total == 0.0 {
        return (Complex64::new(0.0, 0.0), false);
    }
    let last = seq[seq.len() - 1].norm();
    if last <= params.tail_fraction * total {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        for c in seq {
            acc += c * sign;
            sign = -sign;
        }
        return (acc, false);
    }
    // Euler branch: sum_k (-1)^k (Delta^k c)(0) / 2^(k+1)
    let order = params.max_diff_order.min(seq.len() - 1);
    let mut window: Vec<Complex64> = seq[..=order].to_vec();
    let scale = window.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    let mut weight = 0.5;
    let mut stabilized = false;
    for _ in 0..=order {
        if window[0].norm() <= params.diff_stop * scale {
            stabilized = true;
            break;
        }
        acc += window[0] * sign * weight;
        sign = -sign;
        weight *= 0.5;
        for i in 0..window.len() - 1 {
            window[i] = window[i + 1] - window[i];
        }
        window.pop();
        if window.is_empty() {
            break;
        }
    }
    (acc, !stabilized)
}

/// Weyl-symmetric symbol of an operator at a phase point, via the displaced
/// parity trace `2^M . tr{Pi D^dag(z) op D(z)}` with the alternating sums
/// over each mode's occupation regularized as described in the module docs.
pub fn weyl_symbol_with(
    op: &FockOp,
    z: &CoherentAmplitudes,
    params: &SymbolParams,
) -> Result<SymbolEval> {
    let trunc = op.truncation();
    if trunc.mode_count() != z.mode_count() {
        return Err(Error::ModeMismatch {
            expected: trunc.mode_count(),
            found: z.mode_count(),
        });
    }
    let d = displacement(trunc, z)?;
    let conjugated = &(&d.adjoint() * op) * &d;
    let dim = trunc.dim();
    let mut diag: Vec<Complex64> = (0..dim).map(|i| conjugated.matrix()[(i, i)]).collect();

    let total: f64 = diag.iter().map(|c| c.norm()).sum();
    let top: f64 = (0..dim)
        .filter(|&i| trunc.at_cutoff(i))
        .map(|i| diag[i].norm())
        .sum();
    let tail_fraction = if total > 0.0 { top / total } else { 0.0 };

    // Fold the last mode's axis repeatedly; it is contiguous in row-major
    // layout, so each pass reduces runs of length cutoff+1.
    let mut unstable = false;
    for j in (0..trunc.mode_count()).rev() {
        let base = trunc.cutoff(j) + 1;
        let mut reduced = Vec::with_capacity(diag.len() / base);
        for chunk in diag.chunks(base) {
            let (v, bad) = alternating_reduce(chunk, params);
            unstable |= bad;
            reduced.push(v);
        }
        diag = reduced;
    }
    debug_assert_eq!(diag.len(), 1);
    let scale = 2f64.powi(trunc.mode_count() as i32);
    Ok(SymbolEval {
        value: diag[0] * scale,
        tail_fraction,
        tail_warning: unstable || tail_fraction > params.tail_fraction,
    })
}

/// [`weyl_symbol_with`] under the default parameters.
pub fn weyl_symbol(op: &FockOp, z: &CoherentAmplitudes) -> Result<SymbolEval> {
    weyl_symbol_with(op, z, &SymbolParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::cfrac;
    use crate::fock::{self, basis_vector, identity, outer, FockTruncation};
    use crate::symbol::{moyal_star, PhasePoint, PolySymbol, Var};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn a(modes: usize, j: usize) -> PolySymbol {
        PolySymbol::variable(modes, Var::a(j)).unwrap()
    }

    fn ad(modes: usize, j: usize) -> PolySymbol {
        PolySymbol::variable(modes, Var::ad(j)).unwrap()
    }

    #[test]
    fn normal_quantize_number_symbol() {
        let t = FockTruncation::uniform(1, 6).unwrap();
        let n = normal_quantize(&(&ad(1, 0) * &a(1, 0)), &t).unwrap();
        for k in 0..=6usize {
            assert!((n.matrix()[(k, k)] - c(k as f64, 0.0)).norm() < 1e-13);
        }
        let one = normal_quantize(&PolySymbol::one(1), &t).unwrap();
        assert_eq!(one.matrix(), identity(&t).matrix());
    }

    #[test]
    fn normal_quantize_squared_ladder() {
        // a*^2 a^2 -> diag n(n-1)
        let t = FockTruncation::uniform(1, 8).unwrap();
        let sym = &(&ad(1, 0) * &ad(1, 0)) * &(&a(1, 0) * &a(1, 0));
        let op = normal_quantize(&sym, &t).unwrap();
        for k in 0..=8usize {
            let want = (k * k.saturating_sub(1)) as f64;
            assert!((op.matrix()[(k, k)] - c(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn weyl_quantize_examples() {
        let t = FockTruncation::uniform(1, 10).unwrap();
        // linear symbols quantize ordering-free
        let op_a = weyl_quantize(&a(1, 0), &t).unwrap();
        assert_eq!(op_a.matrix(), fock::annihilation(&t, 0).unwrap().matrix());
        // a a* -> a^dag a + 1/2
        let op = weyl_quantize(&(&a(1, 0) * &ad(1, 0)), &t).unwrap();
        let num = &fock::creation(&t, 0).unwrap() * &fock::annihilation(&t, 0).unwrap();
        let want = &num + &identity(&t).scale(c(0.5, 0.0));
        assert!((op.matrix() - want.matrix()).iter().all(|x| x.norm() < 1e-13));
        // symmetrized product oracle: (a a^dag + a^dag a)/2 computed directly
        let aop = fock::annihilation(&t, 0).unwrap();
        let sym_prod =
            (&(&aop * &aop.adjoint()) + &(&aop.adjoint() * &aop)).scale(c(0.5, 0.0));
        // truncation corrupts only the top diagonal entry of a a^dag
        for i in 0..t.dim() - 1 {
            for j in 0..t.dim() - 1 {
                assert!((op.matrix()[(i, j)] - sym_prod.matrix()[(i, j)]).norm() < 1e-13);
            }
        }
        // i(a* - a) is Hermitian
        let h = &ad(1, 0).scale(&crate::coeff::ci()) - &a(1, 0).scale(&crate::coeff::ci());
        let oph = weyl_quantize(&h, &t).unwrap();
        assert!(oph.hermiticity_deviation() < 1e-13);
    }

    #[test]
    fn hermitian_symbols_quantize_hermitian() {
        let t = FockTruncation::uniform(2, 4).unwrap();
        let f = &(&a(2, 0) * &ad(2, 0)) + &(&(&a(2, 1) * &a(2, 1)) + &(&ad(2, 1) * &ad(2, 1)));
        assert_eq!(f.conjugate(), f);
        let op = weyl_quantize(&f, &t).unwrap();
        assert!(op.hermiticity_deviation() < 1e-12);
    }

    #[test]
    fn husimi_symbol_of_number_operator() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let n = normal_quantize(&(&ad(1, 0) * &a(1, 0)), &t).unwrap();
        let z = CoherentAmplitudes::single(c(1.3, -0.4));
        let got = husimi_symbol(&n, &z).unwrap();
        assert!((got - c(z.alpha[0].norm_sqr(), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn husimi_projector_peak() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let alpha = CoherentAmplitudes::single(c(0.7, 0.2));
        let (v, _) = fock::coherent_state(&t, &alpha).unwrap();
        let proj = outer(&t, &v, &v);
        let got = husimi_symbol(&proj, &alpha).unwrap();
        assert!((got - c(1.0, 0.0)).norm() < 1e-10);
        // Gaussian overlap law
        let z = CoherentAmplitudes::single(c(-0.5, 1.0));
        let got = husimi_symbol(&proj, &z).unwrap();
        let want = (-(&z - &alpha).norm_sqr()).exp();
        assert!((got - c(want, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn weyl_symbol_normalization_on_projectors() {
        // the symmetric symbol of |0><0| is 2 e^{-2|z|^2}; of |1><1| it is
        // negative at the origin with value -2
        let t = FockTruncation::uniform(1, 40).unwrap();
        let zero = outer(&t, &basis_vector(&t, &[0]).unwrap(), &basis_vector(&t, &[0]).unwrap());
        let one = outer(&t, &basis_vector(&t, &[1]).unwrap(), &basis_vector(&t, &[1]).unwrap());
        let origin = CoherentAmplitudes::zero(1);
        let v0 = weyl_symbol(&zero, &origin).unwrap();
        let v1 = weyl_symbol(&one, &origin).unwrap();
        assert!((v0.value - c(2.0, 0.0)).norm() < 1e-12, "{:?}", v0.value);
        assert!((v1.value - c(-2.0, 0.0)).norm() < 1e-12, "{:?}", v1.value);
        assert!(!v0.tail_warning);
    }

    #[test]
    fn weyl_symbol_inverts_weyl_quantize() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let f = &(&a(1, 0) * &ad(1, 0)) + &a(1, 0).scale(&cfrac(1, 2));
        let op = weyl_quantize(&f, &t).unwrap();
        let z = CoherentAmplitudes::single(c(1.0, 1.0));
        let got = weyl_symbol(&op, &z).unwrap();
        let want = f
            .eval(&PhasePoint::new(vec![z.alpha[0]]))
            .unwrap();
        assert!((got.value - want).norm() < 1e-8, "{} vs {}", got.value, want);
        // the spec's worked value: symbol of weyl_quantize(a a*) at 1+i is 2
        let n = weyl_quantize(&(&a(1, 0) * &ad(1, 0)), &t).unwrap();
        let got = weyl_symbol(&n, &z).unwrap();
        assert!((got.value - c(2.0, 0.0)).norm() < 1e-6, "{}", got.value);
    }

    #[test]
    fn weyl_symbol_of_identity_is_one_everywhere() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let id = identity(&t);
        for z in [c(0.0, 0.0), c(0.5, -1.0), c(2.0, 0.0)] {
            let got = weyl_symbol(&id, &CoherentAmplitudes::single(z)).unwrap();
            assert!((got.value - c(1.0, 0.0)).norm() < 1e-9, "{}", got.value);
        }
    }

    #[test]
    fn weyl_symbol_matches_star_product_of_quantized_pair() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let f = &(&a(1, 0) * &a(1, 0)) + &ad(1, 0);
        let g = &(&ad(1, 0) * &a(1, 0)) + &PolySymbol::one(1);
        let op = &weyl_quantize(&f, &t).unwrap() * &weyl_quantize(&g, &t).unwrap();
        let star = moyal_star(&f, &g).unwrap();
        for z in [c(0.3, 0.4), c(-1.2, 0.9), c(2.0, 0.0)] {
            let got = weyl_symbol(&op, &CoherentAmplitudes::single(z)).unwrap();
            let want = star.eval(&PhasePoint::new(vec![z])).unwrap();
            assert!((got.value - want).norm() < 1e-6, "z={z}: {} vs {}", got.value, want);
        }
    }

    #[test]
    fn weyl_from_normal_consistency_two_modes() {
        let t = FockTruncation::uniform(2, 12).unwrap();
        let f = &(&a(2, 0) * &ad(2, 0)) + &a(2, 1).scale(&crate::coeff::cint(2));
        let op = normal_quantize(&f, &t).unwrap();
        let w = crate::symbol::weyl_from_normal(&f);
        let z = CoherentAmplitudes::new(vec![c(0.3, -0.1), c(0.0, 0.5)]);
        let got = weyl_symbol(&op, &z).unwrap();
        let want = w.eval(&PhasePoint::new(z.alpha.clone())).unwrap();
        assert!((got.value - want).norm() < 1e-7, "{} vs {}", got.value, want);
    }

    #[test]
    fn tail_diagnostic_flags_oversized_amplitudes() {
        let t = FockTruncation::uniform(1, 3).unwrap();
        let alpha = CoherentAmplitudes::single(c(2.0, 0.0));
        let (v, _) = fock::coherent_state(&t, &alpha).unwrap();
        let rho = outer(&t, &v, &v);
        let got = weyl_symbol(&rho, &CoherentAmplitudes::zero(1)).unwrap();
        assert!(got.tail_warning, "tail fraction {}", got.tail_fraction);
    }
}
