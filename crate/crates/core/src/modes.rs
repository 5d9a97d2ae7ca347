//! Scattering modes of the square barrier and their potential overlaps.
//!
//! Modes are real, even (`+`) or odd (`−`), and equal `cos(k|x| + δ)` (times
//! `sign x` when odd) outside the barrier. Inside they are built from the
//! entire functions
//!
//! ```text
//! c(P, x) = cos(√P x),   s(P, x) = sin(√P x)/√P,   P = k² − λV₀,
//! ```
//!
//! which continue to `cosh`/`sinh` below threshold and to `1`/`x` at it.
//! Below threshold both are stored with a factor `e^{−√(−P)·a}` removed.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::quadrature::integrate;
use crate::well::{greens_diag, WellConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Symmetric, Parity::Antisymmetric];

    pub fn symbol(self) -> char {
        match self {
            Parity::Symmetric => '+',
            Parity::Antisymmetric => '-',
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// `(c(P, x), s(P, x))·e^{−shift}`.
fn cs_scaled(p2: f64, x: f64, shift: f64) -> (f64, f64) {
    if p2 > 0.0 {
        let p = p2.sqrt();
        let e = (-shift).exp();
        ((p * x).cos() * e, (p * x).sin() / p * e)
    } else if p2 < 0.0 {
        let q = (-p2).sqrt();
        let up = (q * x - shift).exp();
        let dn = (-q * x - shift).exp();
        let s = if (q * x).abs() < 1e-3 {
            // sinh(qx)/q without cancellation
            let z2 = (q * x).powi(2);
            x * (1.0 + z2 / 6.0 * (1.0 + z2 / 20.0)) * (-shift).exp()
        } else {
            0.5 * (up - dn) / q
        };
        (0.5 * (up + dn), s)
    } else {
        let e = (-shift).exp();
        (e, x * e)
    }
}

/// A delta-normalized scattering mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFunction {
    pub k: f64,
    pub parity: Parity,
    pub a: f64,
    /// `P = k² − λV₀`.
    pub p2: f64,
    /// Interior coefficient with `e^{shift}` removed.
    pub amp: f64,
    /// `√(−P)·a` below threshold, else 0.
    pub shift: f64,
    /// Exterior phase shift `δ(k)`.
    pub delta: f64,
}

impl ModeFunction {
    /// Interior coefficient `A` (even) or `B` (odd) multiplying `c` or `s`.
    pub fn interior_coefficient(&self) -> f64 {
        self.amp * (-self.shift).exp()
    }

    fn interior(&self, x: f64) -> (f64, f64) {
        let (c, s) = cs_scaled(self.p2, x, self.shift);
        match self.parity {
            Parity::Symmetric => (self.amp * c, -self.amp * self.p2 * s),
            Parity::Antisymmetric => (self.amp * s, self.amp * c),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_and_slope(x).0
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.value_and_slope(x).1
    }

    /// `ψ''` from the mode equation.
    pub fn curvature(&self, x: f64) -> f64 {
        let psi = self.value(x);
        if x.abs() <= self.a {
            -self.p2 * psi
        } else {
            -self.k * self.k * psi
        }
    }

    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        if x.abs() <= self.a {
            return self.interior(x);
        }
        let phase = self.k * x.abs() + self.delta;
        let (c, s) = (phase.cos(), phase.sin());
        match self.parity {
            Parity::Symmetric => (c, -self.k * s * x.signum()),
            Parity::Antisymmetric => (c * x.signum(), -self.k * s),
        }
    }

    /// Largest mismatch of `ψ` and `ψ'` across the wall at `x = a`.
    pub fn matching_residual(&self) -> f64 {
        let (vi, si) = self.interior(self.a);
        // both parities reduce to cos(ka + δ) just outside x = a
        let phase = self.k * self.a + self.delta;
        let (vo, so) = (phase.cos(), -self.k * phase.sin());
        ((vi - vo).abs()).max((si - so).abs() / self.k)
    }
}

/// The mode of momentum `k` and given parity.
pub fn mode(cfg: &WellConfig, k: f64, parity: Parity) -> Result<ModeFunction> {
    if !(k.is_finite() && k > 0.0) {
        return domain(format!("k must be positive, got {k}"));
    }
    let a = cfg.a;
    let p2 = k * k - cfg.coupling();
    let shift = if p2 < 0.0 { (-p2).sqrt() * a } else { 0.0 };
    let (c, s) = cs_scaled(p2, a, shift);
    // value and slope of the bare interior solution at the wall
    let (v, d) = match parity {
        Parity::Symmetric => (c, -p2 * s),
        Parity::Antisymmetric => (s, c),
    };
    let amp = 1.0 / v.hypot(d / k);
    // A·v = cos(ka + δ), A·d = −k sin(ka + δ)
    let delta = (-(amp * d) / k).atan2(amp * v) - k * a;
    Ok(ModeFunction {
        k,
        parity,
        a,
        p2,
        amp,
        shift,
        delta,
    })
}

fn sinc_scaled(z: Complex64, shift: f64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        return (Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0) * (-shift).exp();
    }
    // sin(x + iy) = sin x cosh y + i cos x sinh y, with e^{-shift}
    let (x, y) = (z.re, z.im);
    let up = (y - shift).exp();
    let dn = (-y - shift).exp();
    Complex64::new(x.sin() * 0.5 * (up + dn), x.cos() * 0.5 * (up - dn)) / z
}

fn root(p2: f64) -> Complex64 {
    if p2 >= 0.0 {
        Complex64::new(p2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-p2).sqrt())
    }
}

/// `∫_{−a}^{a} s(P, x) s(Q, x) dx` by its power series, for small `|P|a²`, `|Q|a²`.
fn odd_overlap_series(p2: f64, q2: f64, a: f64) -> f64 {
    const TERMS: usize = 13;
    let mut cp = [0.0; TERMS];
    let mut cq = [0.0; TERMS];
    // s(P, x) = Σ (−P)^m x^{2m+1}/(2m+1)!
    let (mut fp, mut fq) = (1.0, 1.0);
    for m in 0..TERMS {
        if m > 0 {
            let d = ((2 * m) * (2 * m + 1)) as f64;
            fp *= -p2 * a * a / d;
            fq *= -q2 * a * a / d;
        }
        cp[m] = fp;
        cq[m] = fq;
    }
    let mut sum = 0.0;
    for m in 0..TERMS {
        for n in 0..TERMS - m {
            sum += cp[m] * cq[n] / (2 * m + 2 * n + 3) as f64;
        }
    }
    2.0 * a.powi(3) * sum
}

/// `C = ∫_{−a}^{a} λV ψ_k ψ_q dx` between two modes of the same barrier.
pub fn overlap_modes(cfg: &WellConfig, mk: &ModeFunction, mq: &ModeFunction) -> f64 {
    if mk.parity != mq.parity || cfg.is_free() {
        return 0.0;
    }
    let a = cfg.a;
    let shift = mk.shift + mq.shift;
    let pk = root(mk.p2);
    let pq = root(mq.p2);
    let integral = match mk.parity {
        Parity::Symmetric => {
            let sum = sinc_scaled((pk - pq) * a, shift) + sinc_scaled((pk + pq) * a, shift);
            a * sum.re
        }
        Parity::Antisymmetric => {
            let (zk, zq) = (pk.norm() * a, pq.norm() * a);
            if zk.max(zq) < 0.5 {
                odd_overlap_series(mk.p2, mq.p2, a) * (-shift).exp()
            } else if zk.min(zq) >= 0.05 {
                let diff = sinc_scaled((pk - pq) * a, shift) - sinc_scaled((pk + pq) * a, shift);
                (diff * a / (pk * pq)).re
            } else {
                // Wronskian: (Q − P)∫uv = [u'v − uv'] over the interval
                let (ck, sk) = cs_scaled(mk.p2, a, mk.shift);
                let (cq, sq) = cs_scaled(mq.p2, a, mq.shift);
                2.0 * (ck * sq - sk * cq) / (mq.p2 - mk.p2)
            }
        }
    };
    cfg.coupling() * mk.amp * mq.amp * integral
}

/// `C^{χ₁χ₂}_{k,q}`.
pub fn overlap(cfg: &WellConfig, k: f64, q: f64, parities: (Parity, Parity)) -> Result<f64> {
    let mk = mode(cfg, k, parities.0)?;
    let mq = mode(cfg, q, parities.1)?;
    Ok(overlap_modes(cfg, &mk, &mq))
}

/// `C` by direct quadrature of `λV ψ_k ψ_q` over the barrier.
pub fn overlap_quadrature(cfg: &WellConfig, k: f64, q: f64, parities: (Parity, Parity)) -> Result<f64> {
    let mk = mode(cfg, k, parities.0)?;
    let mq = mode(cfg, q, parities.1)?;
    if parities.0 != parities.1 {
        // odd integrand
        return Ok(0.0);
    }
    let v = cfg.coupling();
    // modes are O(1) under the barrier; cancellation can leave a result far below v·2a
    let r = integrate(
        |x| v * mk.value(x) * mq.value(x),
        -cfg.a,
        cfg.a,
        1e-13 * v * 2.0 * cfg.a,
        1e-11,
        2000,
    );
    r.into_result("overlap quadrature")
}

/// Overlaps on a tensor grid for all four parity pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTable {
    pub k: Vec<f64>,
    pub q: Vec<f64>,
    /// Indexed `[pair][i·q.len() + j]` with pairs `++, +−, −+, −−`.
    pub values: [Vec<f64>; 4],
}

impl OverlapTable {
    pub const PAIRS: [(Parity, Parity); 4] = [
        (Parity::Symmetric, Parity::Symmetric),
        (Parity::Symmetric, Parity::Antisymmetric),
        (Parity::Antisymmetric, Parity::Symmetric),
        (Parity::Antisymmetric, Parity::Antisymmetric),
    ];

    pub fn build(cfg: &WellConfig, k: &[f64], q: &[f64]) -> Result<Self> {
        let modes_of = |grid: &[f64]| -> Result<Vec<[ModeFunction; 2]>> {
            grid.iter()
                .map(|&m| {
                    Ok([
                        mode(cfg, m, Parity::Symmetric)?,
                        mode(cfg, m, Parity::Antisymmetric)?,
                    ])
                })
                .collect()
        };
        let mk = modes_of(k)?;
        let mq = modes_of(q)?;
        let rows: Vec<[Vec<f64>; 4]> = mk
            .par_iter()
            .map(|row| {
                let mut out: [Vec<f64>; 4] = Default::default();
                for (p, (c1, c2)) in Self::PAIRS.iter().enumerate() {
                    let a = &row[*c1 as usize];
                    out[p] = mq.iter().map(|col| overlap_modes(cfg, a, &col[*c2 as usize])).collect();
                }
                out
            })
            .collect();
        let mut values: [Vec<f64>; 4] = Default::default();
        for row in rows {
            for (p, r) in row.into_iter().enumerate() {
                values[p].extend(r);
            }
        }
        Ok(Self {
            k: k.to_vec(),
            q: q.to_vec(),
            values,
        })
    }

    pub fn get(&self, pair: usize, i: usize, j: usize) -> f64 {
        self.values[pair][i * self.q.len() + j]
    }

    /// Rows `k,q,parity_pair,c`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,q,parity_pair,c\n");
        for (p, (c1, c2)) in Self::PAIRS.iter().enumerate() {
            for (i, k) in self.k.iter().enumerate() {
                for (j, q) in self.q.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{}{},{}\n",
                        crate::io::fmt_f64(*k),
                        crate::io::fmt_f64(*q),
                        c1,
                        c2,
                        crate::io::fmt_f64(self.get(p, i, j))
                    ));
                }
            }
        }
        out
    }
}

/// Spectral check of the modes against the Green's function at `iκ`:
///
/// ```text
/// G_λ(x, x, iκ) − 1/2κ = ∫₀^∞ (dk/π) [Σ_χ ψ_k(x)² − 1] / (k² + κ²)
/// ```
///
/// Returns `|lhs − rhs|`; the momentum integral is cut at `100/a`.
pub fn greens_mode_identity(cfg: &WellConfig, x: f64, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return domain(format!("kappa must be positive, got {kappa}"));
    }
    let rhs = greens_diag(cfg, x, kappa)?.value - 0.5 / kappa;
    if cfg.is_free() {
        return Ok(rhs.abs());
    }
    let integrand = |k: f64| {
        if k <= 0.0 {
            return -1.0 / (kappa * kappa * PI);
        }
        let s = mode(cfg, k, Parity::Symmetric).expect("k > 0").value(x);
        let o = mode(cfg, k, Parity::Antisymmetric).expect("k > 0").value(x);
        (s * s + o * o - 1.0) / ((k * k + kappa * kappa) * PI)
    };
    let k_max = 100.0 / cfg.a;
    let threshold = cfg.coupling().sqrt();
    let mut edges = vec![0.0];
    if threshold < k_max {
        edges.push(threshold);
    }
    let n = 50;
    let step = k_max / n as f64;
    edges.extend((1..=n).map(|i| i as f64 * step).filter(|e| *e > threshold));
    let mut lhs = 0.0;
    for w in edges.windows(2) {
        lhs += integrate(integrand, w[0], w[1], 1e-14, 1e-11, 200).into_result("mode spectral sum")?;
    }
    Ok((lhs - rhs).abs())
}
