//! Quasiprobability evaluation through the displaced-parity series.
//!
//! `wigner_series` evaluates `tr{Pi D^dag(xi) rho D(xi)}` exactly as written:
//! conjugate the density by the displacement first, then take the alternating
//! diagonal sum. In this normalization the value is bounded by 1 in absolute
//! value; the conventional quasiprobability density is `(2/pi)^M` times it.
//! For coherent states the series sums to the closed form
//! `prod_j exp(-2 |alpha_j - xi_j|^2)`.

use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    self, coherent_state, displacement, normal_quantize, CoherentAmplitudes, FockOp,
    FockTruncation,
};
use crate::symbol::{PolySymbol, SOrder};

/// Validation and diagnostic thresholds for density-matrix evaluation.
#[derive(Clone, Debug)]
pub struct WignerParams {
    /// Absolute Hermiticity tolerance on the density matrix.
    pub hermiticity_tol: f64,
    /// Allowed deviation of the trace from 1.
    pub trace_tol: f64,
    /// Diagonal-mass fraction on the top-occupation block above which the
    /// truncated series is flagged.
    pub tail_fraction: f64,
}

impl Default for WignerParams {
    fn default() -> Self {
        WignerParams {
            hermiticity_tol: 1e-9,
            trace_tol: 1e-6,
            tail_fraction: 1e-6,
        }
    }
}

/// Result of one displaced-parity series evaluation.
#[derive(Clone, Debug)]
pub struct WignerEval {
    pub value: f64,
    /// Magnitude of the imaginary residue of the trace (zero in exact
    /// arithmetic for Hermitian input).
    pub imag_residue: f64,
    pub tail_fraction: f64,
    pub tail_warning: bool,
}

fn validate_density(rho: &FockOp, params: &WignerParams) -> Result<()> {
    let dev = rho.hermiticity_deviation();
    if dev > params.hermiticity_tol {
        return Err(Error::NonHermitian { deviation: dev });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > params.trace_tol || tr.im.abs() > params.trace_tol {
        return Err(Error::TraceDeviation {
            trace: tr.re,
            tolerance: params.trace_tol,
        });
    }
    Ok(())
}

/// Displaced-parity series
/// `W(xi) = sum_n (-1)^{|n|} <n| D^dag(xi) rho D(xi) |n>`.
pub fn wigner_series_with(
    rho: &FockOp,
    xi: &CoherentAmplitudes,
    params: &WignerParams,
) -> Result<WignerEval> {
    validate_density(rho, params)?;
    let trunc = rho.truncation();
    if trunc.mode_count() != xi.mode_count() {
        return Err(Error::ModeMismatch {
            expected: trunc.mode_count(),
            found: xi.mode_count(),
        });
    }
    let d = displacement(trunc, xi)?;
    let conjugated = &(&d.adjoint() * rho) * &d;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut total = 0.0f64;
    let mut top = 0.0f64;
    for idx in 0..trunc.dim() {
        let c = conjugated.matrix()[(idx, idx)];
        let sign = if trunc.total_occupation(idx) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += c * sign;
        total += c.norm();
        if trunc.at_cutoff(idx) {
            top += c.norm();
        }
    }
    let tail_fraction = if total > 0.0 { top / total } else { 0.0 };
    Ok(WignerEval {
        value: acc.re,
        imag_residue: acc.im.abs(),
        tail_fraction,
        tail_warning: tail_fraction > params.tail_fraction,
    })
}

/// [`wigner_series_with`] under default thresholds.
pub fn wigner_series(rho: &FockOp, xi: &CoherentAmplitudes) -> Result<WignerEval> {
    wigner_series_with(rho, xi, &WignerParams::default())
}

/// Closed form of the series for a coherent density `|alpha><alpha|`:
/// `prod_j exp(-2 |alpha_j - xi_j|^2)`.
pub fn wigner_coherent_closed_form(alpha: &CoherentAmplitudes, xi: &CoherentAmplitudes) -> f64 {
    assert_eq!(alpha.mode_count(), xi.mode_count(), "mode count mismatch");
    (-2.0 * (alpha - xi).norm_sqr()).exp()
}

/// State description that expands to a density matrix at a chosen truncation.
#[derive(Clone, Debug)]
pub enum StateSpec {
    Coherent(CoherentAmplitudes),
    Fock(Vec<usize>),
    Superposition(Vec<(Complex64, StateSpec)>),
    Density(FockOp),
}

impl StateSpec {
    pub fn vacuum(mode_count: usize) -> StateSpec {
        StateSpec::Fock(vec![0; mode_count])
    }

    pub fn mode_count(&self) -> usize {
        match self {
            StateSpec::Coherent(a) => a.mode_count(),
            StateSpec::Fock(occ) => occ.len(),
            StateSpec::Superposition(parts) => {
                parts.first().map_or(0, |(_, s)| s.mode_count())
            }
            StateSpec::Density(op) => op.truncation().mode_count(),
        }
    }

    /// Normalized state vector of a pure specification.
    pub fn state_vector(&self, trunc: &FockTruncation) -> Result<DVector<Complex64>> {
        match self {
            StateSpec::Coherent(alpha) => {
                let (v, _) = coherent_state(trunc, alpha)?;
                Ok(v.normalize())
            }
            StateSpec::Fock(occ) => fock::basis_vector(trunc, occ),
            StateSpec::Superposition(parts) => {
                let mut acc = DVector::zeros(trunc.dim());
                for (w, part) in parts {
                    acc += part.state_vector(trunc)? * *w;
                }
                let norm = acc.norm();
                if norm == 0.0 {
                    return Err(Error::Config(
                        "superposition weights cancel to the zero vector".into(),
                    ));
                }
                Ok(acc.normalize())
            }
            StateSpec::Density(_) => Err(Error::Config(
                "a density specification has no state vector".into(),
            )),
        }
    }

    /// Density matrix at the truncation, validated to unit trace within 1e-9
    /// and positive semidefinite within a -1e-9 eigenvalue floor.
    pub fn to_density(&self, trunc: &FockTruncation) -> Result<FockOp> {
        match self {
            StateSpec::Density(op) => {
                if op.truncation() != trunc {
                    return Err(Error::ModeMismatch {
                        expected: trunc.dim(),
                        found: op.dim(),
                    });
                }
                let dev = op.hermiticity_deviation();
                if dev > 1e-9 {
                    return Err(Error::NonHermitian { deviation: dev });
                }
                let tr = op.trace();
                if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
                    return Err(Error::TraceDeviation {
                        trace: tr.re,
                        tolerance: 1e-9,
                    });
                }
                let eig = op.matrix().clone().symmetric_eigen();
                let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -1e-9 {
                    return Err(Error::NotPositive { eigenvalue: min });
                }
                Ok(op.clone())
            }
            pure => {
                let v = pure.state_vector(trunc)?;
                Ok(fock::outer(trunc, &v, &v))
            }
        }
    }
}

/// Parse the state mini-language:
/// `vacuum`, `fock:n[,n...]`, `coherent:re[+im i][,...]`,
/// `sup:(w)state+(w)state`.
pub fn parse_state(text: &str, mode_count: usize) -> Result<StateSpec> {
    let text = text.trim();
    if text == "vacuum" {
        return Ok(StateSpec::vacuum(mode_count));
    }
    if let Some(rest) = text.strip_prefix("fock:") {
        let occ: Vec<usize> = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad occupation number {p:?}")))
            })
            .collect::<Result<_>>()?;
        let occ = broadcast_modes(occ, mode_count, "fock")?;
        return Ok(StateSpec::Fock(occ));
    }
    if let Some(rest) = text.strip_prefix("coherent:") {
        let amps: Vec<Complex64> = rest
            .split(',')
            .map(|p| parse_complex(p.trim()))
            .collect::<Result<_>>()?;
        let amps = broadcast_modes(amps, mode_count, "coherent")?;
        return Ok(StateSpec::Coherent(CoherentAmplitudes::new(amps)));
    }
    if let Some(rest) = text.strip_prefix("sup:") {
        let mut parts = Vec::new();
        let mut cursor = rest;
        loop {
            let inner = cursor.strip_prefix('(').ok_or_else(|| {
                Error::Config(format!("superposition expects `(weight)state`, got {cursor:?}"))
            })?;
            let close = inner.find(')').ok_or_else(|| {
                Error::Config("unterminated weight in superposition".into())
            })?;
            let weight = parse_complex(inner[..close].trim())?;
            let after = &inner[close + 1..];
            // the next component starts at a top-level `+(`
            let (spec_text, rest_text) = match after.find("+(") {
                Some(pos) => (&after[..pos], Some(&after[pos + 1..])),
                None => (after, None),
            };
            parts.push((weight, parse_state(spec_text, mode_count)?));
            match rest_text {
                Some(r) => cursor = r,
                None => break,
            }
        }
        return Ok(StateSpec::Superposition(parts));
    }
    Err(Error::Config(format!(
        "unknown state {text:?}; expected vacuum | fock:n | coherent:re+imi | sup:(w)s+(w)s"
    )))
}

fn broadcast_modes<T: Clone>(mut values: Vec<T>, mode_count: usize, what: &str) -> Result<Vec<T>> {
    if values.len() == mode_count {
        return Ok(values);
    }
    if values.len() == 1 && mode_count > 1 {
        let v = values.pop().expect("one element");
        return Ok(vec![v; mode_count]);
    }
    Err(Error::Config(format!(
        "{what} state lists {} mode(s), configuration has {mode_count}",
        values.len()
    )))
}

/// Parse a complex literal `a`, `bi`, `a+bi`, `a-bi` with decimal parts.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = || Error::Config(format!("bad complex literal {text:?}"));
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    // split before a sign that is not leading
    let bytes = t.as_bytes();
    let mut split = None;
    for i in 1..bytes.len() {
        if bytes[i] == b'+' || bytes[i] == b'-' {
            split = Some(i);
        }
    }
    let parse_part = |p: &str, imag_required: bool| -> Result<(f64, bool)> {
        let p = p.trim();
        let (body, imag) = match p.strip_suffix('i') {
            Some(b) => (b, true),
            None => (p, false),
        };
        if imag_required && !imag {
            return Err(bad());
        }
        let v = if imag && (body.is_empty() || body == "+" || body == "-") {
            format!("{body}1").parse::<f64>()
        } else {
            body.parse::<f64>()
        };
        v.map(|x| (x, imag)).map_err(|_| bad())
    };
    match split {
        Some(pos) => {
            let (re, re_imag) = parse_part(&t[..pos], false)?;
            if re_imag {
                return Err(bad());
            }
            let sign = if bytes[pos] == b'-' { -1.0 } else { 1.0 };
            let (im, _) = parse_part(&t[pos + 1..], true)?;
            Ok(Complex64::new(re, sign * im))
        }
        None => {
            let (v, imag) = parse_part(t, false)?;
            Ok(if imag {
                Complex64::new(0.0, v)
            } else {
                Complex64::new(v, 0.0)
            })
        }
    }
}

/// Rectangular raster in the complex amplitude plane.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub center: Complex64,
    pub half_width: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(center: Complex64, half_width: f64, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        if !(half_width > 0.0) {
            return Err(Error::Config("grid half-width must be positive".into()));
        }
        Ok(GridSpec {
            center,
            half_width,
            resolution,
        })
    }

    fn axis(&self, center: f64) -> Vec<f64> {
        let n = self.resolution;
        let step = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).map(|i| center - self.half_width + i as f64 * step).collect()
    }
}

/// Distribution values over a [`GridSpec`] raster, row-major with the real
/// axis outermost.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub max_imag_residue: f64,
    pub coverage_warning: bool,
}

impl PhaseGrid {
    pub fn value_at(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_re * self.im_axis.len() + i_im]
    }

    /// Smallest value and its flat index.
    pub fn min(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |(m, mi), (i, &v)| {
                if v < m {
                    (v, i)
                } else {
                    (m, mi)
                }
            })
    }

    /// Largest value and its flat index.
    pub fn max(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |(m, mi), (i, &v)| {
                if v > m {
                    (v, i)
                } else {
                    (m, mi)
                }
            })
    }

    pub fn point(&self, flat: usize) -> Complex64 {
        let i_re = flat / self.im_axis.len();
        let i_im = flat % self.im_axis.len();
        Complex64::new(self.re_axis[i_re], self.im_axis[i_im])
    }

    /// Quadrature mass `(step^2 / pi) sum values`.
    pub fn quadrature_mass(&self) -> f64 {
        let dre = self.re_axis[1] - self.re_axis[0];
        let dim = self.im_axis[1] - self.im_axis[0];
        self.values.iter().sum::<f64>() * dre * dim / std::f64::consts::PI
    }
}

fn require_single_mode(rho: &FockOp) -> Result<()> {
    let m = rho.truncation().mode_count();
    if m != 1 {
        return Err(Error::MultimodeGrid { mode_count: m });
    }
    Ok(())
}

fn coverage_warning(rho: &FockOp, spec: &GridSpec) -> f64 {
    // mean amplitude and mean occupation estimate the state's support
    let trunc = rho.truncation();
    let a = fock::annihilation(trunc, 0).expect("single mode");
    let mean_amp = (&a * rho).trace();
    let mean_occ = (&(&a.adjoint() * &a) * rho).trace().re.max(0.0);
    (mean_amp - spec.center).norm() + (mean_occ + 1.0).sqrt() + 2.0
}

/// Husimi raster `Q(z) = <z| rho |z>`, non-negative for density input.
pub fn husimi_grid(rho: &FockOp, spec: &GridSpec) -> Result<PhaseGrid> {
    require_single_mode(rho)?;
    let re_axis = spec.axis(spec.center.re);
    let im_axis = spec.axis(spec.center.im);
    let values: Vec<(f64, f64)> = re_axis
        .par_iter()
        .flat_map_iter(|&re| {
            im_axis.iter().map(move |&im| {
                let z = CoherentAmplitudes::single(Complex64::new(re, im));
                let v = fock::husimi_symbol(rho, &z).expect("mode counts checked");
                (v.re, v.im.abs())
            })
        })
        .collect();
    let max_imag_residue = values.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(PhaseGrid {
        re_axis,
        im_axis,
        values: values.into_iter().map(|v| v.0).collect(),
        max_imag_residue,
        coverage_warning: spec.half_width < coverage_warning(rho, spec),
    })
}

/// Displaced-parity raster of the series values.
pub fn wigner_grid(rho: &FockOp, spec: &GridSpec) -> Result<PhaseGrid> {
    wigner_grid_with(rho, spec, &WignerParams::default())
}

pub fn wigner_grid_with(
    rho: &FockOp,
    spec: &GridSpec,
    params: &WignerParams,
) -> Result<PhaseGrid> {
    require_single_mode(rho)?;
    validate_density(rho, params)?;
    let re_axis = spec.axis(spec.center.re);
    let im_axis = spec.axis(spec.center.im);
    let values: Vec<(f64, f64)> = re_axis
        .par_iter()
        .flat_map_iter(|&re| {
            im_axis.iter().map(move |&im| {
                let xi = CoherentAmplitudes::single(Complex64::new(re, im));
                let w = wigner_series_with(rho, &xi, params).expect("validated density");
                (w.value, w.imag_residue)
            })
        })
        .collect();
    let max_imag_residue = values.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(PhaseGrid {
        re_axis,
        im_axis,
        values: values.into_iter().map(|v| v.0).collect(),
        max_imag_residue,
        coverage_warning: spec.half_width < coverage_warning(rho, spec),
    })
}

/// s-ordered distribution value at one point. `s = 0` is the displaced-parity
/// series, `s = -1` the Husimi value; intermediate (and lower) orders are the
/// Gaussian smoothing of the series with variance `-s/2` per complex
/// coordinate and kernel mass `1 - s`, which keeps coherent-state peaks at
/// height 1 across the family and reproduces the Husimi value at `s = -1`.
pub fn s_distribution(rho: &FockOp, xi: &CoherentAmplitudes, s: &SOrder) -> Result<f64> {
    let s_val = s
        .value()
        .to_f64()
        .ok_or_else(|| Error::Config("s parameter out of range".into()))?;
    if s_val > 0.0 {
        return Err(Error::UnsupportedOrder { s: s.to_string() });
    }
    if s_val == 0.0 {
        return Ok(wigner_series(rho, xi)?.value);
    }
    if s_val == -1.0 {
        return Ok(fock::husimi_symbol(rho, xi)?.re);
    }
    require_single_mode(rho)?;
    if xi.mode_count() != 1 {
        return Err(Error::ModeMismatch {
            expected: 1,
            found: xi.mode_count(),
        });
    }
    let t = -s_val / 2.0;
    let mass = 1.0 - s_val;
    let h = t.sqrt() / 3.0;
    let r = 4.5 * t.sqrt();
    let steps = (2.0 * r / h).ceil() as i64;
    let center = xi.alpha[0];
    let params = WignerParams::default();
    let cells: Vec<(i64, i64)> = (0..steps)
        .flat_map(|i| (0..steps).map(move |j| (i, j)))
        .collect();
    let sum: f64 = cells
        .par_iter()
        .map(|&(i, j)| {
            let u = Complex64::new(
                -r + (i as f64 + 0.5) * h,
                -r + (j as f64 + 0.5) * h,
            );
            let w = wigner_series_with(rho, &CoherentAmplitudes::single(center + u), &params)
                .map(|e| e.value)
                .unwrap_or(f64::NAN);
            let kernel = (mass / (std::f64::consts::PI * t)) * (-u.norm_sqr() / t).exp();
            w * kernel * h * h
        })
        .sum();
    Ok(sum)
}

/// CSV export: `re,im,value` rows, row-major, 17 significant digits.
pub fn write_grid_csv<W: std::io::Write>(grid: &PhaseGrid, out: &mut W) -> Result<()> {
    writeln!(out, "re,im,value")?;
    for (flat, v) in grid.values.iter().enumerate() {
        let z = grid.point(flat);
        writeln!(out, "{:.16e},{:.16e},{:.16e}", z.re, z.im, v)?;
    }
    Ok(())
}

/// Companion metadata for JSON grid export.
#[derive(Clone, Debug, Serialize)]
pub struct GridMeta {
    pub state: String,
    pub cutoff: Vec<usize>,
    pub normalization: String,
}

pub fn grid_to_json(grid: &PhaseGrid, meta: &GridMeta) -> serde_json::Value {
    serde_json::json!({
        "re_axis": grid.re_axis,
        "im_axis": grid.im_axis,
        "values": grid.values,
        "max_imag_residue": grid.max_imag_residue,
        "coverage_warning": grid.coverage_warning,
        "metadata": meta,
    })
}
