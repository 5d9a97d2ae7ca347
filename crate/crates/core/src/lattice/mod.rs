//! Lattice cross-check: a scalar field on the `M − 1` interior sites of the
//! Dirichlet box `[−L, L]`, with the barrier sampled on the sites.
//!
//! Fields carry continuum normalization: with spacing `h` the vacuum
//! covariances are `⟨φφ⟩ = K^{−1/2}/(2h)` and `⟨ππ⟩ = K^{1/2}/(2h)`, where
//! `K = −Δ/h² + diag(V)`. Site densities are differences against the free
//! lattice vacuum, so they converge to continuum densities as `h → 0`.
//!
//! Two solvers share the same conventions. The resolvent path handles the
//! static vacuum at large `M` in `O(M)` memory; the dense path keeps full
//! covariance matrices and supports the sudden quench.

mod dense;
mod resolvent;

use std::f64::consts::PI;

use serde::Serialize;

use crate::density::e_ke_closed;
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_kappa, QuadratureSpec};
use crate::well::WellConfig;

pub use dense::{build_vacuum, quench_evolve, LatticeState};
pub use resolvent::{lattice_greens_diag, static_moments, StaticMoments};

/// Minimum number of lattice spacings across `[−a, a]`.
pub const MIN_SITES_ACROSS_WELL: f64 = 50.0;
/// Minimum `L/a`.
pub const MIN_BOX_RATIO: f64 = 10.0;
/// Largest accepted `λV₀h²`.
pub const MAX_POTENTIAL_STEP: f64 = 0.01;

/// Box `[−L, L]` cut into `M` cells; the field vanishes at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeConfig {
    pub half_length: f64,
    pub sites: usize,
    pub cfg: WellConfig,
}

impl LatticeConfig {
    pub fn new(cfg: WellConfig, half_length: f64, sites: usize) -> Result<Self> {
        let lcfg = Self {
            half_length,
            sites,
            cfg: cfg.folded(),
        };
        lcfg.validate()?;
        Ok(lcfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.sites < 4 || !self.sites.is_multiple_of(2) {
            return domain(format!("M must be even and >= 4, got {}", self.sites));
        }
        if !(self.half_length.is_finite() && self.half_length >= MIN_BOX_RATIO * self.cfg.a) {
            return domain(format!(
                "L = {} must be at least {MIN_BOX_RATIO}·a",
                self.half_length
            ));
        }
        let h = self.spacing();
        if 2.0 * self.cfg.a / h < MIN_SITES_ACROSS_WELL {
            return domain(format!(
                "spacing {h} leaves fewer than {MIN_SITES_ACROSS_WELL} sites across the well"
            ));
        }
        if self.cfg.coupling() * h * h > MAX_POTENTIAL_STEP {
            return domain(format!(
                "λV₀h² = {} exceeds {MAX_POTENTIAL_STEP}",
                self.cfg.coupling() * h * h
            ));
        }
        Ok(())
    }

    /// `h = 2L/M`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.sites as f64
    }

    /// Number of interior sites, `M − 1`.
    pub fn dof(&self) -> usize {
        self.sites - 1
    }

    /// Coordinate of interior site `j` (zero-based).
    pub fn position(&self, j: usize) -> f64 {
        -self.half_length + (j + 1) as f64 * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.dof()).map(|j| self.position(j)).collect()
    }

    /// Index of the site at `x = 0`.
    pub fn center(&self) -> usize {
        self.sites / 2 - 1
    }

    /// Potential at site `j`, averaged over its cell `[xⱼ − h/2, xⱼ + h/2]`.
    /// A wall between sites then sits where it should to `O(h²)`; a wall on
    /// a site gives that site half the height.
    pub fn potential(&self, j: usize) -> f64 {
        let h = self.spacing();
        let x = self.position(j);
        let covered = ((x + 0.5 * h).min(self.cfg.a) - (x - 0.5 * h).max(-self.cfg.a)).max(0.0);
        let fraction = covered / h;
        // snap rounding noise so interior and exterior sites are exact
        let fraction = if fraction > 1.0 - 1e-9 {
            1.0
        } else if fraction < 1e-9 {
            0.0
        } else if (fraction - 0.5).abs() < 1e-9 {
            0.5
        } else {
            fraction
        };
        self.cfg.coupling() * fraction
    }

    /// Free lattice frequency `ωₙ = (2/h) sin(nπ/2M)` of sine mode `n ≥ 1`.
    pub fn free_frequency(&self, n: usize) -> f64 {
        2.0 / self.spacing() * (n as f64 * PI / (2.0 * self.sites as f64)).sin()
    }

    /// The same box and spacing without the barrier.
    pub fn free(&self) -> Self {
        Self {
            cfg: WellConfig {
                v0: 0.0,
                ..self.cfg
            },
            ..*self
        }
    }
}

/// Finite-difference form of `½⟨(∂ₓφ)²⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientScheme {
    /// Average of the two adjacent forward differences. The site sum is the
    /// lattice Hamiltonian exactly.
    #[default]
    Link,
    /// `(φ_{j+1} − φ_{j−1})/2h`.
    Central,
}

/// Equal-time moments at each site.
///
/// `link[l]` is `⟨(φ_l − φ_{l−1})²⟩` for `l = 0..=n` with `φ_{−1} = φ_n = 0`;
/// `cross[j]` is `⟨(φ_{j+1} − φ_j)(φ_j − φ_{j−1})⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMoments {
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub link: Vec<f64>,
    pub cross: Vec<f64>,
}

impl SiteMoments {
    pub(crate) fn zeros(n: usize) -> Self {
        Self {
            phi: vec![0.0; n],
            pi: vec![0.0; n],
            link: vec![0.0; n + 1],
            cross: vec![0.0; n],
        }
    }

    pub(crate) fn minus(&self, other: &Self) -> Self {
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        Self {
            phi: sub(&self.phi, &other.phi),
            pi: sub(&self.pi, &other.pi),
            link: sub(&self.link, &other.link),
            cross: sub(&self.cross, &other.cross),
        }
    }

    /// `½⟨π²⟩ + ½⟨(∇φ)²⟩` per site; linear in the moments, so it applies
    /// equally to subtracted moments.
    pub fn energy_density(&self, h: f64, scheme: GradientScheme) -> Vec<f64> {
        let h2 = h * h;
        let n = self.phi.len();
        // links touching a box wall belong wholly to their one interior site
        let share = |l: usize| if l == 0 || l == n { 0.5 } else { 0.25 };
        (0..n)
            .map(|j| {
                let grad = match scheme {
                    GradientScheme::Link => {
                        (share(j) * self.link[j] + share(j + 1) * self.link[j + 1]) / h2
                    }
                    GradientScheme::Central => {
                        (self.link[j] + self.link[j + 1] + 2.0 * self.cross[j]) / (8.0 * h2)
                    }
                };
                0.5 * self.pi[j] + grad
            })
            .collect()
    }
}

/// Subtracted energy density on the lattice sites at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDensity {
    pub lcfg: LatticeConfig,
    pub t: f64,
    pub x: Vec<f64>,
    pub t00: Vec<f64>,
}

impl LatticeDensity {
    pub(crate) fn new(lcfg: LatticeConfig, t: f64, t00: Vec<f64>) -> Self {
        Self {
            x: lcfg.positions(),
            lcfg,
            t,
            t00,
        }
    }

    /// `h Σⱼ T₀₀(xⱼ)`.
    pub fn total(&self) -> f64 {
        self.lcfg.spacing() * self.t00.iter().sum::<f64>()
    }

    /// `h Σ` over sites with `|x| ≤ a`.
    pub fn interior_total(&self) -> f64 {
        let a = self.lcfg.cfg.a;
        self.lcfg.spacing()
            * self
                .x
                .iter()
                .zip(&self.t00)
                .filter(|(x, _)| x.abs() <= a)
                .map(|(_, v)| v)
                .sum::<f64>()
    }

    /// Value at the site nearest to `x`.
    pub fn nearest(&self, x: f64) -> f64 {
        let j = ((x + self.lcfg.half_length) / self.lcfg.spacing()).round() as isize - 1;
        self.t00[j.clamp(0, self.t00.len() as isize - 1) as usize]
    }

    /// Rows `x,t00`.
    pub fn to_csv(&self) -> String {
        crate::io::csv_table(
            &["x", "t00"],
            self.x.iter().zip(&self.t00).map(|(x, v)| vec![*x, *v]),
        )
    }
}

/// Lattice total energy set against the continuum `E_KE`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyDiagnostics {
    pub total_energy: f64,
    pub e_ke_continuum: f64,
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "M")]
    pub sites: usize,
    pub interior_energy: f64,
    pub exterior_energy: f64,
    pub signs_agree: bool,
}

impl EnergyDiagnostics {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain numeric record")
    }

    pub fn verdict(&self) -> &'static str {
        if self.signs_agree {
            "lattice total and continuum E_KE have the same sign"
        } else {
            "lattice total and continuum E_KE have opposite signs"
        }
    }
}

/// Sums a lattice density and reports it beside `E_KE` from the branch-cut
/// closed form.
pub fn total_energy_diagnostics(
    density: &LatticeDensity,
    quad: &QuadratureSpec,
) -> Result<EnergyDiagnostics> {
    let lcfg = density.lcfg;
    let total_energy = density.total();
    let interior_energy = density.interior_total();
    let e_ke_continuum = e_ke_closed(&lcfg.cfg, quad)?;
    Ok(EnergyDiagnostics {
        total_energy,
        e_ke_continuum,
        half_length: lcfg.half_length,
        sites: lcfg.sites,
        interior_energy,
        exterior_energy: total_energy - interior_energy,
        signs_agree: sign(total_energy) == sign(e_ke_continuum),
    })
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

// Log-derivative -ψ'/ψ at x = 0⁺ of the even solution that vanishes at x = L.
fn box_log_derivative(cfg: &WellConfig, half_length: f64, kappa: f64) -> f64 {
    let kp = cfg.kappa_prime(kappa);
    let y_wall = kappa / (kappa * (half_length - cfg.a)).tanh();
    let t = (kp * cfg.a).tanh();
    kp * (y_wall + kp * t) / (kp + y_wall * t)
}

/// Continuum `⟨φ(0)²⟩_λ − ⟨φ(0)²⟩₀` in the Dirichlet box `[−L, L]`:
/// `(1/π)∫₀^∞ [G_λ(0,0;iκ) − G₀(0,0;iκ)] dκ` with box Green's functions.
pub fn box_phi2_shift(cfg: &WellConfig, half_length: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    let cfg = cfg.folded();
    if !(half_length > cfg.a) {
        return domain("box must be wider than the barrier");
    }
    if cfg.is_free() {
        return Ok(0.0);
    }
    let f = |k: f64| {
        let free = if k * half_length < 1e-8 {
            0.5 * half_length
        } else {
            0.5 * (k * half_length).tanh() / k
        };
        let y = if k == 0.0 {
            // κ → 0: the wall log-derivative tends to 1/(L − a)
            let kp = cfg.kappa_prime(0.0);
            let y_wall = 1.0 / (half_length - cfg.a);
            if kp == 0.0 {
                1.0 / half_length
            } else {
                let t = (kp * cfg.a).tanh();
                kp * (y_wall + kp * t) / (kp + y_wall * t)
            }
        } else {
            box_log_derivative(&cfg, half_length, k)
        };
        0.5 / y - free
    };
    let breaks = [1.0 / half_length, cfg.coupling().sqrt(), 1.0 / cfg.a];
    integrate_kappa(f, quad, &breaks, 0.0)
        .into_result("box field fluctuation shift")
        .map(|v| v / PI)
}

/// The same integral on the infinite line, cut off below at `kappa_min`.
/// It grows like `(1/2π) ln(1/κ_min)`: the massless shift has no infinite-
/// volume limit.
pub fn line_phi2_shift(cfg: &WellConfig, kappa_min: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if !(kappa_min > 0.0 && kappa_min < quad.kappa_max) {
        return Err(Error::Divergence(
            "the line integral needs a positive infrared cutoff".into(),
        ));
    }
    let cfg = cfg.folded();
    let f = |k: f64| {
        if k < kappa_min {
            return 0.0;
        }
        let g = crate::well::greens_diag(&cfg, 0.0, k).map(|g| g.value).unwrap_or(0.0);
        g - 0.5 / k
    };
    let breaks = [kappa_min, cfg.coupling().sqrt(), 1.0 / cfg.a];
    integrate_kappa(f, quad, &breaks, 0.0)
        .into_result("line field fluctuation shift")
        .map(|v| v / PI)
}
