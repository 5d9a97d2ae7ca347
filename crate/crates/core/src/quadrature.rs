//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The κ-integrals in this crate run over `[0, ∞)` with integrands that
//! decay like `κ⁻³`. They are split at a finite cutoff; the head is
//! integrated by globally adaptive 21-point Kronrod bisection and the tail
//! through the substitution `κ = K/t`, which maps `[K, ∞)` onto `(0, 1]`
//! and turns a `κ⁻³` tail into an integrand that vanishes linearly at
//! `t = 0`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Settings for the κ-integrals over the positive imaginary momentum axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Split point between the adaptive head and the mapped tail.
    pub kappa_max: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// When off, the integral is truncated at `kappa_max`.
    pub tail_estimate: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            kappa_max: 200.0,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            tail_estimate: true,
        }
    }
}

impl QuadratureSpec {
    /// Default spec scaled to a well of half-width `a` (cutoff `200/a`).
    pub fn for_half_width(a: f64) -> Self {
        Self {
            kappa_max: 200.0 / a,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_kappa_max(mut self, kappa_max: f64) -> Self {
        self.kappa_max = kappa_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_max.is_finite() && self.kappa_max > 0.0) {
            return Err(Error::Domain(format!(
                "kappa_max must be positive and finite, got {}",
                self.kappa_max
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::Domain(format!(
                "rel_tol must lie in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    /// Converts a non-converged result into [`Error::Quadrature`].
    pub fn into_result(self, what: impl Into<String>) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                what: what.into(),
                estimate: self.value,
                error: self.error,
            })
        }
    }

    fn combine(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < floor {
        err = floor;
    }
    (result, err)
}

/// Globally adaptive integration of `f` over `[lo, hi]`.
///
/// Stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`, or reports `converged = false` with the
/// best estimate once `max_subdivisions` segments are in use.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> QuadResult {
    if lo == hi {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let (v, e) = kronrod21(&f, lo, hi);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    let tolerance = |total: f64| abs_tol.max(rel_tol * total.abs());
    while total_err > tolerance(total) {
        if heap.len() >= max_subdivisions {
            break;
        }
        let seg = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // interval can no longer be split in floating point
            heap.push(seg);
            break;
        }
        let (v1, e1) = kronrod21(&f, seg.lo, mid);
        let (v2, e2) = kronrod21(&f, mid, seg.hi);
        evaluations += 42;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            lo: seg.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lo: mid,
            hi: seg.hi,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift of the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= tolerance(value),
    }
}

/// Integrates `f` over `[lo, ∞)` through `x = lo + scale·(1 − t)/t`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> QuadResult {
    let mapped = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let x = lo + scale * (1.0 - t) / t;
        let v = f(x) * scale / (t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, abs_tol, rel_tol, max_subdivisions)
}

/// Integrates `f` over `[K, ∞)` with `κ = K/t`, suited to algebraic tails.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    f: F,
    cutoff: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> QuadResult {
    let mapped = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let k = cutoff / t;
        let v = f(k) * cutoff / (t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, abs_tol, rel_tol, max_subdivisions)
}

/// `∫₀^∞ f(κ) dκ` as configured by `spec`.
///
/// `breaks` are interior points (inside `(0, kappa_max)`) where the
/// integrand changes scale; the head is split there before adaptation.
pub fn integrate_kappa<F: Fn(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
    breaks: &[f64],
    abs_tol: f64,
) -> QuadResult {
    let mut edges = vec![0.0];
    edges.extend(
        breaks
            .iter()
            .copied()
            .filter(|&b| b > 0.0 && b < spec.kappa_max),
    );
    edges.push(spec.kappa_max);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let pieces = edges.len() - 1 + usize::from(spec.tail_estimate);
    let budget = (spec.max_subdivisions / pieces).max(1);
    let piece_tol = abs_tol / pieces as f64;
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        converged: true,
    };
    for w in edges.windows(2) {
        out = out.combine(integrate(&f, w[0], w[1], piece_tol, spec.rel_tol, budget));
    }
    if spec.tail_estimate {
        out = out.combine(integrate_tail(
            &f,
            spec.kappa_max,
            piece_tol,
            spec.rel_tol,
            budget,
        ));
    }
    out.converged = out.error <= abs_tol.max(spec.rel_tol * out.value.abs());
    out
}

/// Composite trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Composite Simpson rule on a uniform grid with an even number of panels.
pub fn simpson_uniform(step: f64, y: &[f64]) -> Result<f64> {
    let n = y.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "Simpson rule needs an odd number (>= 3) of samples, got {n}"
        )));
    }
    let mut s = y[0] + y[n - 1];
    for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(s * step / 3.0)
}
