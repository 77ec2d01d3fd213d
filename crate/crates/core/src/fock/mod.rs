//! Truncated multimode Fock space: operator construction and coherent states.
//!
//! Every mode `j` is truncated at an inclusive occupation cutoff `N_j`, so
//! operators are dense complex matrices of dimension `prod_j (N_j + 1)` over
//! the tensor-product number basis, mode 0 slowest (row-major). Operator
//! identities hold up to tails controlled by the state amplitudes; see
//! [`recommended_cutoff`] for the coherent-state policy.

mod quantize;

pub use quantize::{
    husimi_symbol, normal_quantize, weyl_quantize, weyl_symbol, weyl_symbol_with, SymbolEval,
    SymbolParams,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the total truncated dimension.
pub const DEFAULT_DIM_LIMIT: usize = 20_000;

/// Per-mode occupation cutoffs (inclusive) of the truncated space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockTruncation {
    cutoffs: Vec<usize>,
}

impl FockTruncation {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        Self::with_limit(cutoffs, DEFAULT_DIM_LIMIT)
    }

    pub fn with_limit(cutoffs: Vec<usize>, limit: usize) -> Result<Self> {
        assert!(!cutoffs.is_empty(), "at least one mode required");
        let mut dim: usize = 1;
        for &n in &cutoffs {
            dim = dim.saturating_mul(n + 1);
        }
        if dim > limit {
            return Err(Error::DimensionLimit { dim, limit });
        }
        Ok(FockTruncation { cutoffs })
    }

    pub fn uniform(mode_count: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; mode_count])
    }

    pub fn mode_count(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.iter().map(|&n| n + 1).product()
    }

    /// Flat index of an occupation tuple, mode 0 slowest.
    pub fn flat_index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.cutoffs.len());
        let mut idx = 0;
        for (j, &n) in occupations.iter().enumerate() {
            debug_assert!(n <= self.cutoffs[j]);
            idx = idx * (self.cutoffs[j] + 1) + n;
        }
        idx
    }

    /// Occupation tuple of a flat index.
    pub fn occupations(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.cutoffs.len()];
        for j in (0..self.cutoffs.len()).rev() {
            let base = self.cutoffs[j] + 1;
            out[j] = flat % base;
            flat /= base;
        }
        out
    }

    /// Total occupation of a flat index (the parity exponent).
    pub fn total_occupation(&self, mut flat: usize) -> usize {
        let mut total = 0;
        for j in (0..self.cutoffs.len()).rev() {
            let base = self.cutoffs[j] + 1;
            total += flat % base;
            flat /= base;
        }
        total
    }

    /// True when any mode of the flat index sits at its cutoff.
    pub fn at_cutoff(&self, mut flat: usize) -> bool {
        for j in (0..self.cutoffs.len()).rev() {
            let base = self.cutoffs[j] + 1;
            if flat % base == self.cutoffs[j] {
                return true;
            }
            flat /= base;
        }
        false
    }

    fn check_modes(&self, mode_count: usize) -> Result<()> {
        if self.mode_count() != mode_count {
            return Err(Error::ModeMismatch {
                expected: self.mode_count(),
                found: mode_count,
            });
        }
        Ok(())
    }
}

/// One complex amplitude per mode; the argument of displacement operators and
/// coherent states, and the evaluation point of operator symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentAmplitudes {
    pub alpha: Vec<Complex64>,
}

impl CoherentAmplitudes {
    pub fn new(alpha: Vec<Complex64>) -> Self {
        CoherentAmplitudes { alpha }
    }

    pub fn zero(mode_count: usize) -> Self {
        CoherentAmplitudes {
            alpha: vec![Complex64::new(0.0, 0.0); mode_count],
        }
    }

    pub fn single(z: Complex64) -> Self {
        CoherentAmplitudes { alpha: vec![z] }
    }

    pub fn mode_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self, other> = sum_j conj(self_j) other_j`.
    pub fn inner(&self, other: &CoherentAmplitudes) -> Complex64 {
        self.alpha
            .iter()
            .zip(other.alpha.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl std::ops::Add for &CoherentAmplitudes {
    type Output = CoherentAmplitudes;
    fn add(self, rhs: &CoherentAmplitudes) -> CoherentAmplitudes {
        assert_eq!(self.alpha.len(), rhs.alpha.len());
        CoherentAmplitudes {
            alpha: self
                .alpha
                .iter()
                .zip(rhs.alpha.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &CoherentAmplitudes {
    type Output = CoherentAmplitudes;
    fn sub(self, rhs: &CoherentAmplitudes) -> CoherentAmplitudes {
        assert_eq!(self.alpha.len(), rhs.alpha.len());
        CoherentAmplitudes {
            alpha: self
                .alpha
                .iter()
                .zip(rhs.alpha.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Neg for &CoherentAmplitudes {
    type Output = CoherentAmplitudes;
    fn neg(self) -> CoherentAmplitudes {
        CoherentAmplitudes {
            alpha: self.alpha.iter().map(|a| -a).collect(),
        }
    }
}

/// Dense operator on the truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOp {
    trunc: FockTruncation,
    mat: DMatrix<Complex64>,
}

impl FockOp {
    pub fn from_matrix(trunc: FockTruncation, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = trunc.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::ModeMismatch {
                expected: dim,
                found: mat.nrows(),
            });
        }
        Ok(FockOp { trunc, mat })
    }

    pub fn truncation(&self) -> &FockTruncation {
        &self.trunc
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> FockOp {
        FockOp {
            trunc: self.trunc.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, c: Complex64) -> FockOp {
        FockOp {
            trunc: self.trunc.clone(),
            mat: &self.mat * c,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.mat * v
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.mat.adjoint();
        (&self.mat - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Debug export: `{"dims": [r, c], "entries": [[re, im], ...]}` row-major.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<[f64; 2]> = (0..self.mat.nrows())
            .flat_map(|i| (0..self.mat.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [self.mat[(i, j)].re, self.mat[(i, j)].im])
            .collect();
        serde_json::json!({
            "dims": [self.mat.nrows(), self.mat.ncols()],
            "entries": entries,
        })
    }
}

impl std::ops::Add for &FockOp {
    type Output = FockOp;
    fn add(self, rhs: &FockOp) -> FockOp {
        assert_eq!(self.trunc, rhs.trunc, "truncation mismatch");
        FockOp {
            trunc: self.trunc.clone(),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &FockOp {
    type Output = FockOp;
    fn sub(self, rhs: &FockOp) -> FockOp {
        assert_eq!(self.trunc, rhs.trunc, "truncation mismatch");
        FockOp {
            trunc: self.trunc.clone(),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl std::ops::Mul for &FockOp {
    type Output = FockOp;
    fn mul(self, rhs: &FockOp) -> FockOp {
        assert_eq!(self.trunc, rhs.trunc, "truncation mismatch");
        FockOp {
            trunc: self.trunc.clone(),
            mat: &self.mat * &rhs.mat,
        }
    }
}

/// Local single-mode lowering matrix `<n-1| a |n> = sqrt(n)` of size `n+1`.
fn local_annihilation(cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Embed a single-mode matrix into the full space by tensoring with
/// identities on every other mode.
fn embed(trunc: &FockTruncation, mode: usize, local: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut acc = DMatrix::<Complex64>::identity(1, 1);
    for j in 0..trunc.mode_count() {
        let f = if j == mode {
            local.clone()
        } else {
            DMatrix::identity(trunc.cutoff(j) + 1, trunc.cutoff(j) + 1)
        };
        acc = acc.kronecker(&f);
    }
    acc
}

pub fn identity(trunc: &FockTruncation) -> FockOp {
    FockOp {
        trunc: trunc.clone(),
        mat: DMatrix::identity(trunc.dim(), trunc.dim()),
    }
}

/// Annihilation operator of one mode.
pub fn annihilation(trunc: &FockTruncation, mode: usize) -> Result<FockOp> {
    if mode >= trunc.mode_count() {
        return Err(Error::ModeIndex {
            index: mode,
            mode_count: trunc.mode_count(),
        });
    }
    Ok(FockOp {
        trunc: trunc.clone(),
        mat: embed(trunc, mode, &local_annihilation(trunc.cutoff(mode))),
    })
}

/// Creation operator of one mode.
pub fn creation(trunc: &FockTruncation, mode: usize) -> Result<FockOp> {
    Ok(annihilation(trunc, mode)?.adjoint())
}

/// Total number operator `sum_j a^dag_j a_j`, diagonal in the number basis.
pub fn number_operator(trunc: &FockTruncation) -> FockOp {
    let dim = trunc.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        m[(idx, idx)] = Complex64::new(trunc.total_occupation(idx) as f64, 0.0);
    }
    FockOp {
        trunc: trunc.clone(),
        mat: m,
    }
}

/// Parity `(-1)^{N}` with `N` the total number operator; an exact involution
/// on the truncated space.
pub fn parity(trunc: &FockTruncation) -> FockOp {
    let dim = trunc.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let sign = if trunc.total_occupation(idx) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        m[(idx, idx)] = Complex64::new(sign, 0.0);
    }
    FockOp {
        trunc: trunc.clone(),
        mat: m,
    }
}

/// Displacement `D(xi) = exp{sum_j (xi_j a^dag_j - conj(xi_j) a_j)}` by dense
/// scaling-and-squaring matrix exponential. Exactly unitary on the truncated
/// space; it approximates the ideal displacement only while the displaced
/// amplitudes stay well inside the cutoffs.
pub fn displacement(trunc: &FockTruncation, xi: &CoherentAmplitudes) -> Result<FockOp> {
    trunc.check_modes(xi.mode_count())?;
    let dim = trunc.dim();
    let mut generator = DMatrix::<Complex64>::zeros(dim, dim);
    for (j, &amp) in xi.alpha.iter().enumerate() {
        let a = embed(trunc, j, &local_annihilation(trunc.cutoff(j)));
        let ad = a.adjoint();
        generator += ad * amp - a * amp.conj();
    }
    Ok(FockOp {
        trunc: trunc.clone(),
        mat: generator.exp(),
    })
}

/// Truncation loss of a coherent state: per-mode Poisson tail mass beyond the
/// cutoff and the resulting squared-norm deficit of the truncated vector.
#[derive(Clone, Debug)]
pub struct CoherentTail {
    pub per_mode: Vec<f64>,
    pub norm_sqr_deficit: f64,
}

/// Coherent state by its analytic number-basis expansion
/// `<n_1,...| alpha> = prod_j e^{-|alpha_j|^2/2} alpha_j^{n_j} / sqrt(n_j!)`.
pub fn coherent_state(
    trunc: &FockTruncation,
    alpha: &CoherentAmplitudes,
) -> Result<(DVector<Complex64>, CoherentTail)> {
    trunc.check_modes(alpha.mode_count())?;
    let mode_count = trunc.mode_count();
    let mut locals: Vec<Vec<Complex64>> = Vec::with_capacity(mode_count);
    let mut per_mode = Vec::with_capacity(mode_count);
    let mut kept = 1.0f64;
    for j in 0..mode_count {
        let a = alpha.alpha[j];
        let mut v = Vec::with_capacity(trunc.cutoff(j) + 1);
        let mut cur = Complex64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
        v.push(cur);
        for n in 1..=trunc.cutoff(j) {
            cur = cur * a / Complex64::new((n as f64).sqrt(), 0.0);
            v.push(cur);
        }
        let mass: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        per_mode.push((1.0 - mass).max(0.0));
        kept *= mass;
        locals.push(v);
    }
    let dim = trunc.dim();
    let mut out = DVector::zeros(dim);
    for idx in 0..dim {
        let occ = trunc.occupations(idx);
        let mut amp = Complex64::new(1.0, 0.0);
        for j in 0..mode_count {
            amp *= locals[j][occ[j]];
        }
        out[idx] = amp;
    }
    Ok((
        out,
        CoherentTail {
            per_mode,
            norm_sqr_deficit: (1.0 - kept).max(0.0),
        },
    ))
}

pub fn vacuum_vector(trunc: &FockTruncation) -> DVector<Complex64> {
    let mut v = DVector::zeros(trunc.dim());
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Number basis vector for an occupation tuple.
pub fn basis_vector(trunc: &FockTruncation, occupations: &[usize]) -> Result<DVector<Complex64>> {
    trunc.check_modes(occupations.len())?;
    for (j, &n) in occupations.iter().enumerate() {
        if n > trunc.cutoff(j) {
            return Err(Error::ModeIndex {
                index: n,
                mode_count: trunc.cutoff(j) + 1,
            });
        }
    }
    let mut v = DVector::zeros(trunc.dim());
    v[trunc.flat_index(occupations)] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Outer product `|u><v|`.
pub fn outer(trunc: &FockTruncation, u: &DVector<Complex64>, v: &DVector<Complex64>) -> FockOp {
    FockOp {
        trunc: trunc.clone(),
        mat: u * v.adjoint(),
    }
}

/// Cutoff policy for coherent-state work: Poisson tails beyond
/// `ceil(8 max|amplitude|^2 + 30)` are below 1e-10.
pub fn recommended_cutoff(max_amp_sqr: f64) -> usize {
    (8.0 * max_amp_sqr + 30.0).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ladder_matrix_single_mode() {
        let t = FockTruncation::uniform(1, 2).unwrap();
        let a = annihilation(&t, 0).unwrap();
        let m = a.matrix();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert!((m[(1, 2)] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let mut nonzero = 0;
        for v in m.iter() {
            if v.norm() > 0.0 {
                nonzero += 1;
            }
        }
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let t = FockTruncation::uniform(2, 3).unwrap();
        let a0 = annihilation(&t, 0).unwrap();
        let v = a0.apply(&vacuum_vector(&t));
        assert!(v.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn number_diagonal_matches_occupation() {
        let t = FockTruncation::uniform(1, 5).unwrap();
        let n = &creation(&t, 0).unwrap() * &annihilation(&t, 0).unwrap();
        for k in 0..=5usize {
            assert!((n.matrix()[(k, k)] - c(k as f64, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn commutator_holds_below_cutoff() {
        let t = FockTruncation::uniform(2, 4).unwrap();
        let a0 = annihilation(&t, 0).unwrap();
        let a1 = annihilation(&t, 1).unwrap();
        let comm = &(&a0 * &a0.adjoint()) - &(&a0.adjoint() * &a0);
        // identity except on states with n_0 = cutoff
        for idx in 0..t.dim() {
            let occ = t.occupations(idx);
            let want = if occ[0] == 4 { -4.0 } else { 1.0 };
            assert!((comm.matrix()[(idx, idx)] - c(want, 0.0)).norm() < 1e-12);
        }
        let cross = &(&a0 * &a1.adjoint()) - &(&a1.adjoint() * &a0);
        assert!(cross.matrix().iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn parity_is_involution_and_alternates() {
        let t = FockTruncation::uniform(1, 3).unwrap();
        let p = parity(&t);
        for (k, want) in [1.0, -1.0, 1.0, -1.0].iter().enumerate() {
            assert_eq!(p.matrix()[(k, k)], c(*want, 0.0));
        }
        let sq = &p * &p;
        assert_eq!(sq.matrix(), identity(&t).matrix());
    }

    #[test]
    fn parity_reflects_coherent_states() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let alpha = CoherentAmplitudes::single(c(0.8, -0.3));
        let (v, _) = coherent_state(&t, &alpha).unwrap();
        let (v_neg, _) = coherent_state(&t, &-&alpha).unwrap();
        let reflected = parity(&t).apply(&v);
        assert!((reflected - v_neg).norm() < 1e-12);
    }

    #[test]
    fn displaced_vacuum_matches_analytic_coherent_state() {
        let t = FockTruncation::uniform(1, 40).unwrap();
        let alpha = CoherentAmplitudes::single(c(1.0, 0.0));
        let d = displacement(&t, &alpha).unwrap();
        let from_exp = d.apply(&vacuum_vector(&t));
        let (analytic, tail) = coherent_state(&t, &alpha).unwrap();
        assert!((from_exp - &analytic).norm() < 1e-10);
        assert!(tail.norm_sqr_deficit < 1e-10);
        // <0|alpha> = e^{-1/2}, <1|alpha> = e^{-1/2}
        let e = (-0.5f64).exp();
        assert!((analytic[0].re - e).abs() < 1e-12);
        assert!((analytic[1].re - e).abs() < 1e-12);
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let t = FockTruncation::uniform(2, 3).unwrap();
        let d = displacement(&t, &CoherentAmplitudes::zero(2)).unwrap();
        assert!((d.matrix() - identity(&t).matrix()).iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn displacement_vacuum_overlap() {
        // <0|D(1)|0> = e^{-1/2} within 1e-10 at cutoff 40
        let t = FockTruncation::uniform(1, 40).unwrap();
        let d = displacement(&t, &CoherentAmplitudes::single(c(1.0, 0.0))).unwrap();
        let got = d.matrix()[(0, 0)].re;
        assert!((got - (-0.5f64).exp()).abs() < 1e-10, "{got}");
    }

    #[test]
    fn displacement_is_unitary_at_modest_amplitude() {
        let t = FockTruncation::uniform(1, 30).unwrap();
        let d = displacement(&t, &CoherentAmplitudes::single(c(0.7, 0.4))).unwrap();
        let u = &d.adjoint() * &d;
        let dev = (u.matrix() - identity(&t).matrix())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn coherent_overlap_formula() {
        // <beta|alpha> = e^{(<beta,alpha> - <alpha,beta>)/2} e^{-|beta-alpha|^2/2}
        let t = FockTruncation::uniform(2, 40).unwrap();
        let alpha = CoherentAmplitudes::new(vec![c(0.9, -0.2), c(-0.5, 0.7)]);
        let beta = CoherentAmplitudes::new(vec![c(-0.3, 0.4), c(0.6, 0.1)]);
        let (va, _) = coherent_state(&t, &alpha).unwrap();
        let (vb, _) = coherent_state(&t, &beta).unwrap();
        let got: Complex64 = vb.dotc(&va);
        let ba = beta.inner(&alpha);
        let ab = alpha.inner(&beta);
        let diff = &beta - &alpha;
        let want = ((ba - ab) / 2.0).exp() * (-diff.norm_sqr() / 2.0).exp();
        assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn coherent_tail_reported_when_cutoff_too_small() {
        let t = FockTruncation::uniform(1, 3).unwrap();
        let (_, tail) = coherent_state(&t, &CoherentAmplitudes::single(c(2.0, 0.0))).unwrap();
        assert!(tail.norm_sqr_deficit > 0.3, "{}", tail.norm_sqr_deficit);
    }

    #[test]
    fn dimension_limit_enforced() {
        assert!(matches!(
            FockTruncation::uniform(3, 40),
            Err(Error::DimensionLimit { .. })
        ));
    }

    #[test]
    fn flat_index_round_trip() {
        let t = FockTruncation::new(vec![2, 3, 1]).unwrap();
        for idx in 0..t.dim() {
            let occ = t.occupations(idx);
            assert_eq!(t.flat_index(&occ), idx);
            assert_eq!(t.total_occupation(idx), occ.iter().sum::<usize>());
        }
    }
}
