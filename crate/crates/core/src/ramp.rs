//! First-order response of the kinetic energy to a linear ramp-down
//! `f(t) = 1 − αt` of the barrier over `0 ≤ t ≤ 1/α`.
//!
//! ```text
//! dE_K/dt = −2α(1 − αt) D(t)
//! D(t)    = Σ ∬ dk dq  C²_{kq} (1 − cos((k+q)t)) / (4π² (k+q) k q)
//! ```
//!
//! The momentum integrals run on a hybrid grid: log-spaced on
//! `[k_min, 1/a]`, uniform on `[1/a, k_max]`, Simpson weights on both.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::e_ke_closed;
use crate::error::{domain, Error, Result};
use crate::modes::OverlapTable;
use crate::quadrature::{simpson_uniform, QuadratureSpec};
use crate::sampling::plateau_report;
use crate::well::WellConfig;

/// Barrier strength `λV₀a²` above which first-order results are flagged.
pub const PERTURBATIVE_STRENGTH: f64 = 0.3;

/// Ramp and discretization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampConfig {
    pub alpha: f64,
    pub cfg: WellConfig,
    pub k_max: f64,
    /// Smallest momentum on the log segment.
    pub k_min: f64,
    /// Intervals on the log segment (even).
    pub n_log: usize,
    /// Intervals on the uniform segment (even).
    pub n_lin: usize,
    /// Time samples over the ramp (odd).
    pub n_time: usize,
    /// Sampling decay rate for the post-ramp verdict; half the threshold if unset.
    pub eta: Option<f64>,
}

impl RampConfig {
    /// Defaults: `k_max = 50/a`, 40 log and 500 uniform intervals, 201 times.
    pub fn new(cfg: WellConfig, alpha: f64) -> Result<Self> {
        let r = Self {
            alpha,
            cfg: cfg.folded(),
            k_max: 50.0 / cfg.a,
            k_min: 1e-4 / cfg.a,
            n_log: 40,
            n_lin: 500,
            n_time: 201,
            eta: None,
        };
        r.validate()?;
        Ok(r)
    }

    /// Same ramp with momentum and time steps halved.
    pub fn refined(&self) -> Self {
        Self {
            n_log: 2 * self.n_log,
            n_lin: 2 * self.n_lin,
            n_time: 2 * self.n_time - 1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        let a = self.cfg.a;
        if !(self.k_min > 0.0 && self.k_min < 1.0 / a && self.k_max > 1.0 / a && self.k_max.is_finite()) {
            return domain(format!(
                "need 0 < k_min < 1/a < k_max, got k_min = {}, k_max = {}",
                self.k_min, self.k_max
            ));
        }
        if self.n_log < 2 || self.n_log % 2 == 1 || self.n_lin < 2 || self.n_lin % 2 == 1 {
            return domain("momentum interval counts must be even and at least 2");
        }
        if self.n_time < 3 || self.n_time.is_multiple_of(2) {
            return domain("time sample count must be odd and at least 3");
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return domain(format!("eta must be positive, got {eta}"));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        1.0 / self.alpha
    }

    /// `f(t) = 1 − αt` on the ramp, 0 after it, 1 before.
    pub fn profile(&self, t: f64) -> f64 {
        (1.0 - self.alpha * t).clamp(0.0, 1.0)
    }

    pub fn is_perturbative(&self) -> bool {
        self.cfg.strength() <= PERTURBATIVE_STRENGTH
    }

    /// Nodes and Simpson weights of the hybrid momentum grid.
    pub fn momentum_grid(&self) -> (Vec<f64>, Vec<f64>) {
        let a = self.cfg.a;
        let (l0, l1) = (self.k_min.ln(), (1.0 / a).ln());
        let hs = (l1 - l0) / self.n_log as f64;
        let mut nodes = Vec::with_capacity(self.n_log + self.n_lin + 1);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for i in 0..=self.n_log {
            let k = (l0 + i as f64 * hs).exp();
            // dk = k ds
            nodes.push(k);
            weights.push(simpson_weight(i, self.n_log) * hs / 3.0 * k);
        }
        let hk = (self.k_max - 1.0 / a) / self.n_lin as f64;
        let last = weights.len() - 1;
        weights[last] += simpson_weight(0, self.n_lin) * hk / 3.0;
        nodes[last] = 1.0 / a;
        for i in 1..=self.n_lin {
            nodes.push(1.0 / a + i as f64 * hk);
            weights.push(simpson_weight(i, self.n_lin) * hk / 3.0);
        }
        (nodes, weights)
    }

    pub fn time_grid(&self) -> Vec<f64> {
        let step = self.duration() / (self.n_time - 1) as f64;
        (0..self.n_time).map(|i| i as f64 * step).collect()
    }
}

fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// `B_kq(t) = −α{(i(k+q)t + 1) e^{−i(k+q)t}/(k+q)² − 1/(k+q)²}`.
pub fn b_kq(alpha: f64, k: f64, q: f64, t: f64) -> Result<Complex64> {
    if !(alpha > 0.0 && k > 0.0 && q > 0.0) {
        return domain("alpha, k and q must be positive");
    }
    if !(0.0..=1.0 / alpha).contains(&t) {
        return domain(format!("t = {t} lies outside the ramp [0, {}]", 1.0 / alpha));
    }
    let w = k + q;
    let phase = Complex64::new(0.0, -w * t).exp();
    let b = (Complex64::new(1.0, w * t) * phase - 1.0) / (w * w);
    Ok(-alpha * b)
}

/// `B e^{i(k+q)t} + B* e^{−i(k+q)t}`.
pub fn oscillation_combination(alpha: f64, k: f64, q: f64, t: f64) -> Result<f64> {
    let b = b_kq(alpha, k, q, t)?;
    let e = Complex64::new(0.0, (k + q) * t).exp();
    Ok((b * e + b.conj() * e.conj()).re)
}

/// Precomputed weights for `D(t)` on a fixed grid.
#[derive(Debug, Clone)]
pub struct DKernel {
    /// `k_i + q_j`
    sums: Vec<f64>,
    /// quadrature weight × `Σ C² / (4π²(k+q)kq)`
    weights: Vec<f64>,
}

impl DKernel {
    /// `table` must be built on `rcfg.momentum_grid()` in both directions.
    pub fn new(rcfg: &RampConfig, table: &OverlapTable) -> Result<Self> {
        let (nodes, w) = rcfg.momentum_grid();
        if table.k != nodes || table.q != nodes {
            return Err(Error::ConfigMismatch(
                "overlap table is not on the ramp momentum grid".into(),
            ));
        }
        let n = nodes.len();
        let mut sums = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (k, q) = (nodes[i], nodes[j]);
                let c2: f64 = (0..4).map(|p| table.get(p, i, j).powi(2)).sum();
                sums.push(k + q);
                weights.push(w[i] * w[j] * c2 / (4.0 * PI * PI * (k + q) * k * q));
            }
        }
        Ok(Self { sums, weights })
    }

    pub fn build(rcfg: &RampConfig) -> Result<Self> {
        let (nodes, _) = rcfg.momentum_grid();
        let table = OverlapTable::build(&rcfg.cfg, &nodes, &nodes)?;
        Self::new(rcfg, &table)
    }

    /// `D(t)`, with `1 − cos θ` written as `2 sin²(θ/2)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.sums
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| {
                let h = (0.5 * s * t).sin();
                2.0 * w * h * h
            })
            .sum()
    }
}

/// `D(t)` for one time.
pub fn d_of_t(rcfg: &RampConfig, table: &OverlapTable, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return domain(format!("t must be non-negative, got {t}"));
    }
    Ok(DKernel::new(rcfg, table)?.eval(t))
}

/// Tabulated ramp response and the post-ramp inequality verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RampResult {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub dedt: Vec<f64>,
    pub d_values: Vec<f64>,
    pub delta_e: f64,
    pub e_ke: f64,
    pub post_ramp_eta_star: f64,
    pub post_ramp_violated: bool,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct RampRecord {
    alpha: f64,
    delta_e: f64,
    e_ke: f64,
    post_ramp_eta_star: f64,
    post_ramp_violated: bool,
}

impl RampResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(RampRecord {
            alpha: self.alpha,
            delta_e: self.delta_e,
            e_ke: self.e_ke,
            post_ramp_eta_star: self.post_ramp_eta_star,
            post_ramp_violated: self.post_ramp_violated,
        })
        .expect("plain numeric record")
    }

    /// Rows `t,dEdt,D`.
    pub fn to_csv(&self) -> String {
        crate::io::csv_table(
            &["t", "dEdt", "D"],
            self.times
                .iter()
                .zip(&self.dedt)
                .zip(&self.d_values)
                .map(|((t, e), d)| vec![*t, *e, *d]),
        )
    }
}

/// Runs the ramp with a prebuilt kernel.
pub fn ramp_run_with(rcfg: &RampConfig, kernel: &DKernel, quad: &QuadratureSpec) -> Result<RampResult> {
    rcfg.validate()?;
    let times = rcfg.time_grid();
    let d_values: Vec<f64> = times.par_iter().map(|&t| kernel.eval(t)).collect();
    let dedt: Vec<f64> = times
        .iter()
        .zip(&d_values)
        .map(|(t, d)| -2.0 * rcfg.alpha * rcfg.profile(*t) * d)
        .collect();
    let step = rcfg.duration() / (rcfg.n_time - 1) as f64;
    let delta_e = simpson_uniform(step, &dedt)?;
    let e_ke = e_ke_closed(&rcfg.cfg, quad)?;
    let total = e_ke + delta_e;
    let plateau = rcfg.cfg.a + rcfg.duration();
    let eta_star = 12.0 * PI * total.abs();
    let mut warnings = Vec::new();
    if !rcfg.is_perturbative() {
        warnings.push(format!(
            "perturbation theory dubious: barrier strength V0*a^2 = {} exceeds {}",
            rcfg.cfg.strength(),
            PERTURBATIVE_STRENGTH
        ));
    }
    if e_ke != 0.0 && delta_e.abs() > PERTURBATIVE_STRENGTH * e_ke.abs() {
        warnings.push(format!(
            "first-order shift {delta_e:e} is not small against E_KE = {e_ke:e}"
        ));
    }
    let post_ramp_violated = match rcfg.eta.or((eta_star > 0.0).then_some(0.5 * eta_star)) {
        Some(eta) => plateau_report(rcfg.cfg.coupling(), plateau, total, eta)?.violated,
        None => false,
    };
    Ok(RampResult {
        alpha: rcfg.alpha,
        times,
        dedt,
        d_values,
        delta_e,
        e_ke,
        post_ramp_eta_star: eta_star,
        post_ramp_violated,
        warnings,
    })
}

/// Builds the overlap table and runs the ramp.
pub fn ramp_run(rcfg: &RampConfig, quad: &QuadratureSpec) -> Result<RampResult> {
    rcfg.validate()?;
    let kernel = DKernel::build(rcfg)?;
    ramp_run_with(rcfg, &kernel, quad)
}

/// Runs at the configured and at doubled resolution; fails if `ΔE_K`
/// moves by more than `tolerance` relative.
pub fn ramp_refinement_check(
    rcfg: &RampConfig,
    quad: &QuadratureSpec,
    tolerance: f64,
) -> Result<(RampResult, f64)> {
    let coarse = ramp_run(rcfg, quad)?;
    let fine = ramp_run(&rcfg.refined(), quad)?;
    let change = if fine.delta_e == 0.0 {
        coarse.delta_e.abs()
    } else {
        ((coarse.delta_e - fine.delta_e) / fine.delta_e).abs()
    };
    if change > tolerance {
        return Err(Error::Refinement {
            what: "ramp energy change".into(),
            change,
        });
    }
    Ok((fine, change))
}
