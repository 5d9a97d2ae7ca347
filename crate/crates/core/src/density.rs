//! Regularized kinetic energy density `T₀₀R(x)` and the interior total `E_KE`.
//!
//! The branch-cut integrand `(4κ²G − 2κ) − (G'' − 2V G)` is assembled in
//! closed form before quadrature. Inside the barrier it reduces to
//!
//! ```text
//! V² (cosh 2κ'a − cosh 2κ'x) / (κ' D_κ)
//! ```
//!
//! which is non-negative, vanishes at the walls and decays like `κ⁻³`;
//! outside it is identically zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::dd::Dd;
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_kappa, trapezoid, QuadratureSpec};
use crate::well::{interval_and_slope_dd, KappaTerms, WellConfig};

/// Grid points closer than this fraction of `a` to a wall are left out of
/// default profiles.
pub const WALL_EXCLUSION: f64 = 1e-3;

/// Number of interior points used for the profile route to `E_KE`.
pub const PROFILE_POINTS: usize = 401;

/// Sampled `T₀₀R(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub quad: QuadratureSpec,
    pub cfg: WellConfig,
}

impl DensityProfile {
    /// Largest `|T₀₀R|` on the grid.
    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rows `x,t00r`.
    pub fn to_csv(&self) -> String {
        crate::io::csv_table(
            &["x", "t00r"],
            self.grid.iter().zip(&self.values).map(|(x, v)| vec![*x, *v]),
        )
    }

    /// Trapezoid integral over the grid points with `|x| ≤ a`.
    pub fn interior_integral(&self) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .grid
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() <= self.cfg.a)
            .map(|(x, y)| (*x, *y))
            .unzip();
        trapezoid(&x, &y)
    }
}

/// `E_KE` by three routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub e_ke_closed: f64,
    pub e_ke_direct: f64,
    pub e_ke_profile: f64,
    pub cfg: WellConfig,
    pub quad: QuadratureSpec,
}

#[derive(Serialize)]
struct EnergyRecord {
    v0: f64,
    a: f64,
    e_ke_closed: f64,
    e_ke_direct: f64,
    e_ke_profile: f64,
    rel_tol: f64,
    kappa_max: f64,
}

impl EnergyReport {
    /// Flat JSON object; `v0` is the effective height `λV₀`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(EnergyRecord {
            v0: self.cfg.coupling(),
            a: self.cfg.a,
            e_ke_closed: self.e_ke_closed,
            e_ke_direct: self.e_ke_direct,
            e_ke_profile: self.e_ke_profile,
            rel_tol: self.quad.rel_tol,
            kappa_max: self.quad.kappa_max,
        })
        .expect("plain numeric record")
    }
}

/// Branch-cut integrand at `(x, κ)`; `T₀₀R(x) = −(1/4π)∫₀^∞ (·) dκ`.
pub fn density_integrand(cfg: &WellConfig, x: f64, kappa: f64) -> f64 {
    let ax = x.abs();
    if ax >= cfg.a || cfg.is_free() {
        return 0.0;
    }
    let t = KappaTerms::new(cfg, kappa);
    let near = -(-2.0 * t.kp * (cfg.a - ax)).exp_m1();
    let far = -(-2.0 * t.kp * (cfg.a + ax)).exp_m1();
    t.v * t.v * near * far / (2.0 * t.kp * t.ds)
}

/// `λV(x)/4π`: the amount by which the mode sum over real momenta, cut off
/// at a common momentum, exceeds the branch-cut form at `x`.
///
/// Turning the real-momentum integral onto the imaginary axis drops a
/// large-arc piece, because `k²(G_λ − G₀)` falls only like `1/k` there. A
/// site-by-site lattice subtraction reproduces the real-axis value.
pub fn large_arc_term(cfg: &WellConfig, x: f64) -> f64 {
    if x.abs() < cfg.a {
        cfg.coupling() / (4.0 * std::f64::consts::PI)
    } else {
        0.0
    }
}

/// `T₀₀R(x)`; zero outside the barrier and at the walls.
pub fn density_at(cfg: &WellConfig, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if !x.is_finite() {
        return domain(format!("x must be finite, got {x}"));
    }
    let cfg = cfg.folded();
    let gap = cfg.a - x.abs();
    if gap <= 0.0 || cfg.is_free() {
        return Ok(0.0);
    }
    // the integrand turns over near κ ~ 1/gap
    let spec = quad.with_kappa_max(quad.kappa_max * (cfg.a / gap).min(1.0 / WALL_EXCLUSION));
    let breaks = [cfg.coupling().sqrt(), 1.0 / cfg.a, 1.0 / gap, 10.0 / gap];
    let r = integrate_kappa(|k| density_integrand(&cfg, x, k), &spec, &breaks, 0.0);
    let value = -r.value / (4.0 * std::f64::consts::PI);
    if r.converged {
        Ok(value)
    } else {
        Err(Error::Quadrature {
            what: format!("T00R at x = {x}"),
            estimate: value,
            error: r.error / (4.0 * std::f64::consts::PI),
        })
    }
}

/// `T₀₀R` on every grid point, evaluated in parallel.
pub fn density_profile(
    cfg: &WellConfig,
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<DensityProfile> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("grid must be strictly increasing");
    }
    let values = grid
        .par_iter()
        .map(|&x| density_at(cfg, x, quad))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityProfile {
        grid: grid.to_vec(),
        values,
        quad: *quad,
        cfg: *cfg,
    })
}

/// `n` uniform points on `[−xmax, xmax]`, minus those within
/// `WALL_EXCLUSION·a` of a wall.
pub fn default_grid(cfg: &WellConfig, n: usize, xmax: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return domain(format!("grid needs at least 2 points, got {n}"));
    }
    if !(xmax.is_finite() && xmax > 0.0) {
        return domain(format!("xmax must be positive, got {xmax}"));
    }
    let step = 2.0 * xmax / (n - 1) as f64;
    let zone = WALL_EXCLUSION * cfg.a;
    Ok((0..n)
        .map(|i| -xmax + i as f64 * step)
        .filter(|x| (x.abs() - cfg.a).abs() >= zone)
        .collect())
}

/// `n` uniform points on `[−a, a]` including both walls.
pub fn interior_grid(cfg: &WellConfig, n: usize) -> Vec<f64> {
    let step = 2.0 * cfg.a / (n - 1) as f64;
    (0..n).map(|i| -cfg.a + i as f64 * step).collect()
}

/// Integrand of the closed form for `E_KE`:
/// `V² (2aκ' cosh 2aκ' − sinh 2aκ') / (κ'² D_κ)`.
pub fn closed_integrand(cfg: &WellConfig, kappa: f64) -> f64 {
    if cfg.is_free() {
        return 0.0;
    }
    let t = KappaTerms::new(cfg, kappa);
    // (u cosh u − sinh u)·e^{-u}
    let bracket = if t.u < 0.5 {
        let u2 = t.u * t.u;
        let mut term = t.u;
        let mut sum = 0.0;
        for n in 1..=10 {
            term *= u2 / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term * (2 * n) as f64;
        }
        sum * (-t.u).exp()
    } else {
        0.5 * (t.u * (1.0 + t.e2u) + (-2.0 * t.u).exp_m1())
    };
    t.v * t.v * bracket / (t.kp * t.kp * t.ds)
}

/// Integrand of the term-by-term form for `E_KE`:
/// `(4κ²F − 4κa) + 2VF − (G'(a) − G'(−a))`.
///
/// The first group cancels to `O(κ⁻¹)` from `O(κ)` pieces, so it is
/// evaluated in double-double arithmetic.
pub fn direct_integrand(cfg: &WellConfig, kappa: f64) -> f64 {
    if cfg.is_free() {
        return 0.0;
    }
    let (f, slope) = interval_and_slope_dd(cfg, kappa);
    let k = Dd::new(kappa);
    let v = Dd::new(cfg.coupling());
    let a = Dd::new(cfg.a);
    let four = Dd::new(4.0);
    let r = (four * k * k * f - four * k * a) + Dd::new(2.0) * v * f - Dd::new(2.0) * slope;
    r.to_f64()
}

/// `|direct − closed|` at one `κ`.
pub fn appendix_identity_check(cfg: &WellConfig, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return domain(format!("kappa must be positive, got {kappa}"));
    }
    let cfg = cfg.folded();
    Ok((direct_integrand(&cfg, kappa) - closed_integrand(&cfg, kappa)).abs())
}

fn e_ke_route(
    cfg: &WellConfig,
    quad: &QuadratureSpec,
    what: &str,
    f: impl Fn(&WellConfig, f64) -> f64,
) -> Result<f64> {
    quad.validate()?;
    let cfg = cfg.folded();
    if cfg.is_free() {
        return Ok(0.0);
    }
    let breaks = [cfg.coupling().sqrt(), 1.0 / cfg.a, 10.0 / cfg.a];
    let r = integrate_kappa(|k| f(&cfg, k), quad, &breaks, 0.0);
    let scale = -1.0 / (4.0 * std::f64::consts::PI);
    if r.converged {
        Ok(scale * r.value)
    } else {
        Err(Error::Quadrature {
            what: what.into(),
            estimate: scale * r.value,
            error: r.error / (4.0 * std::f64::consts::PI),
        })
    }
}

/// `E_KE` from the closed form; `λ` is folded into `V₀`.
pub fn e_ke_closed(cfg: &WellConfig, quad: &QuadratureSpec) -> Result<f64> {
    e_ke_route(cfg, quad, "E_KE (closed form)", closed_integrand)
}

/// `E_KE` from the interval integral and the wall slopes.
pub fn e_ke_direct(cfg: &WellConfig, quad: &QuadratureSpec) -> Result<f64> {
    e_ke_route(cfg, quad, "E_KE (wall-derivative form)", direct_integrand)
}

/// Trapezoid integral of the profile on [`PROFILE_POINTS`] interior points.
pub fn e_ke_profile(cfg: &WellConfig, quad: &QuadratureSpec) -> Result<f64> {
    let grid = interior_grid(cfg, PROFILE_POINTS);
    let p = density_profile(cfg, &grid, quad)?;
    Ok(trapezoid(&p.grid, &p.values))
}

/// All three routes to `E_KE`.
pub fn energy_report(cfg: &WellConfig, quad: &QuadratureSpec) -> Result<EnergyReport> {
    Ok(EnergyReport {
        e_ke_closed: e_ke_closed(cfg, quad)?,
        e_ke_direct: e_ke_direct(cfg, quad)?,
        e_ke_profile: e_ke_profile(cfg, quad)?,
        cfg: *cfg,
        quad: *quad,
    })
}
