//! Spatial quantum inequality bound `ξ[ρ] = −(1/24π)∫ρ'²/ρ dx` and the
//! violation analysis for the exponential-plateau sampling family.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::density::{e_ke_closed, DensityProfile};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, trapezoid, QuadResult, QuadratureSpec};
use crate::well::WellConfig;

/// Relative slack under which the two sides of the inequality count as equal.
pub const EQUALITY_SLACK: f64 = 4.0 * f64::EPSILON;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Caller-supplied weight with its analytic derivative.
#[derive(Clone)]
pub struct GenericSampling {
    rho: RealFn,
    drho: RealFn,
    /// Points where `ρ` or `ρ'` is not smooth.
    breaks: Vec<f64>,
    /// Length scale of the decay at infinity.
    scale: f64,
}

/// Non-negative unit-normalized sampling weight.
#[derive(Clone)]
pub enum SamplingFunction {
    /// `N` on `|x| < a`, `N e^{η(a − |x|)}` outside, `N = η/(2(aη + 1))`.
    ExponentialPlateau { eta: f64, a: f64 },
    /// Centred normal density of width `sigma`.
    Gaussian { sigma: f64 },
    Generic(GenericSampling),
}

impl fmt::Debug for SamplingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExponentialPlateau { eta, a } => f
                .debug_struct("ExponentialPlateau")
                .field("eta", eta)
                .field("a", a)
                .finish(),
            Self::Gaussian { sigma } => f.debug_struct("Gaussian").field("sigma", sigma).finish(),
            Self::Generic(g) => f
                .debug_struct("Generic")
                .field("breaks", &g.breaks)
                .field("scale", &g.scale)
                .finish_non_exhaustive(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

impl SamplingFunction {
    pub fn exponential_plateau(eta: f64, a: f64) -> Result<Self> {
        positive("eta", eta)?;
        positive("a", a)?;
        Ok(Self::ExponentialPlateau { eta, a })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self::Gaussian { sigma })
    }

    /// Wraps a user weight; fails unless it integrates to 1 within `1e-8`.
    pub fn generic<R, D>(rho: R, drho: D, breaks: Vec<f64>, scale: f64) -> Result<Self>
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        positive("scale", scale)?;
        let mut breaks = breaks;
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let s = Self::Generic(GenericSampling {
            rho: Arc::new(rho),
            drho: Arc::new(drho),
            breaks,
            scale,
        });
        let total = s.total_weight(&QuadratureSpec::default().with_rel_tol(1e-12))?;
        if (total - 1.0).abs() > 1e-8 {
            return domain(format!("sampling function integrates to {total}, not 1"));
        }
        Ok(s)
    }

    /// `N = η/(2(aη + 1))` for the plateau family.
    pub fn norm_const(&self) -> Option<f64> {
        match self {
            Self::ExponentialPlateau { eta, a } => Some(eta / (2.0 * (a * eta + 1.0))),
            _ => None,
        }
    }

    pub fn rho(&self, x: f64) -> f64 {
        match self {
            Self::ExponentialPlateau { eta, a } => {
                let n = eta / (2.0 * (a * eta + 1.0));
                if x.abs() < *a {
                    n
                } else {
                    n * (eta * (a - x.abs())).exp()
                }
            }
            Self::Gaussian { sigma } => {
                (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Self::Generic(g) => (g.rho)(x),
        }
    }

    /// `ρ'(x)`; at the plateau kinks the exterior one-sided value.
    pub fn drho(&self, x: f64) -> f64 {
        match self {
            Self::ExponentialPlateau { eta, a } => {
                if x.abs() < *a {
                    0.0
                } else {
                    -x.signum() * eta * self.rho(x)
                }
            }
            Self::Gaussian { sigma } => -x / (sigma * sigma) * self.rho(x),
            Self::Generic(g) => (g.drho)(x),
        }
    }

    fn layout(&self) -> (Vec<f64>, f64) {
        match self {
            Self::ExponentialPlateau { eta, a } => (vec![-a, *a], 1.0 / eta),
            Self::Gaussian { sigma } => (vec![-sigma, 0.0, *sigma], *sigma),
            Self::Generic(g) => {
                let b = if g.breaks.is_empty() {
                    vec![0.0]
                } else {
                    g.breaks.clone()
                };
                (b, g.scale)
            }
        }
    }

    /// `∫ f` over the real line, split at the breakpoints.
    fn over_line(&self, f: impl Fn(f64) -> f64, quad: &QuadratureSpec) -> QuadResult {
        let (breaks, scale) = self.layout();
        let lo = breaks[0];
        let hi = breaks[breaks.len() - 1];
        let budget = quad.max_subdivisions;
        let mut parts = vec![
            integrate_to_infinity(|t| f(lo - t), 0.0, scale, 0.0, quad.rel_tol, budget),
            integrate_to_infinity(|t| f(hi + t), 0.0, scale, 0.0, quad.rel_tol, budget),
        ];
        for w in breaks.windows(2) {
            parts.push(integrate(&f, w[0], w[1], 0.0, quad.rel_tol, budget));
        }
        let value: f64 = parts.iter().map(|p| p.value).sum();
        let error: f64 = parts.iter().map(|p| p.error).sum();
        QuadResult {
            value,
            error,
            evaluations: parts.iter().map(|p| p.evaluations).sum(),
            converged: parts.iter().all(|p| p.converged),
        }
    }

    /// `∫ρ dx`, computed numerically.
    pub fn total_weight(&self, quad: &QuadratureSpec) -> Result<f64> {
        self.over_line(|x| self.rho(x), quad)
            .into_result("sampling function normalization")
    }
}

/// `−(1/24π)∫ρ'²/ρ dx` by quadrature; points with `ρ = ρ' = 0` contribute
/// nothing.
pub fn xi_min_numeric(rho: &SamplingFunction, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    let integrand = |x: f64| {
        let r = rho.rho(x);
        let d = rho.drho(x);
        if r > 0.0 {
            d * d / r
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let r = rho.over_line(integrand, quad);
    if !r.value.is_finite() || !r.converged {
        return Err(Error::Divergence(format!(
            "integral of rho'^2/rho does not converge (estimate {:e}, error {:e})",
            r.value, r.error
        )));
    }
    Ok(-r.value / (24.0 * PI))
}

/// `−ηN/(12π)` for the plateau family.
pub fn xi_min_exponential(eta: f64, a: f64) -> Result<f64> {
    positive("eta", eta)?;
    positive("a", a)?;
    let n = eta / (2.0 * (a * eta + 1.0));
    Ok(-eta * n / (12.0 * PI))
}

/// Where the density on the left-hand side comes from.
#[derive(Debug, Clone, Copy)]
pub enum DensitySource<'a> {
    /// Interior total only; the density is known to vanish outside `|x| < a`.
    Total { e_ke: f64, cfg: WellConfig },
    Profile(&'a DensityProfile),
}

/// `∫T₀₀R ρ dx`.
pub fn qi_lhs(source: DensitySource<'_>, rho: &SamplingFunction) -> Result<f64> {
    let cfg = match source {
        DensitySource::Total { cfg, .. } => cfg,
        DensitySource::Profile(p) => p.cfg,
    };
    if let SamplingFunction::ExponentialPlateau { a, .. } = rho {
        if *a != cfg.a {
            return Err(Error::ConfigMismatch(format!(
                "sampling plateau half-width {a} differs from barrier half-width {}",
                cfg.a
            )));
        }
        let n = rho.norm_const().expect("plateau has a norm");
        let e = match source {
            DensitySource::Total { e_ke, .. } => e_ke,
            DensitySource::Profile(p) => p.interior_integral(),
        };
        return Ok(e * n);
    }
    match source {
        DensitySource::Profile(p) => {
            let weighted: Vec<f64> = p
                .grid
                .iter()
                .zip(&p.values)
                .map(|(x, t)| t * rho.rho(*x))
                .collect();
            Ok(trapezoid(&p.grid, &weighted))
        }
        DensitySource::Total { .. } => {
            domain("a non-plateau sampling function needs a density profile")
        }
    }
}

/// Both sides of the inequality and the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QiReport {
    pub v0: f64,
    pub a: f64,
    pub eta: f64,
    pub e_ke: f64,
    pub eta_star: f64,
    pub xi_min: f64,
    pub lhs: f64,
    pub violated: bool,
}

impl QiReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain numeric record")
    }
}

/// `lhs < ξ` with equality (to [`EQUALITY_SLACK`]) counted as satisfied.
pub fn is_violated(lhs: f64, xi_min: f64) -> bool {
    lhs < xi_min && (xi_min - lhs) > EQUALITY_SLACK * xi_min.abs().max(lhs.abs())
}

/// Verdict for a plateau of half-width `a` holding total energy `e_ke`.
pub fn plateau_report(v0: f64, a: f64, e_ke: f64, eta: f64) -> Result<QiReport> {
    let rho = SamplingFunction::exponential_plateau(eta, a)?;
    let xi_min = xi_min_exponential(eta, a)?;
    let cfg = WellConfig { v0, a, lambda: 1.0 };
    let lhs = qi_lhs(DensitySource::Total { e_ke, cfg }, &rho)?;
    Ok(QiReport {
        v0,
        a,
        eta,
        e_ke,
        eta_star: 12.0 * PI * e_ke.abs(),
        xi_min,
        lhs,
        violated: is_violated(lhs, xi_min),
    })
}

/// Violation analysis for the barrier `cfg` sampled with plateau width `a`.
pub fn violation_report(cfg: &WellConfig, eta: f64, quad: &QuadratureSpec) -> Result<QiReport> {
    positive("eta", eta)?;
    let e_ke = e_ke_closed(cfg, quad)?;
    plateau_report(cfg.coupling(), cfg.a, e_ke, eta)
}
