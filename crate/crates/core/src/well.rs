//! Diagonal Green's function of a square barrier on the imaginary momentum axis.
//!
//! The barrier has height `λV₀` on `|x| < a`. Every hyperbolic function of
//! `u = 2aκ'` is carried as a mantissa times `e^{u}`; ratios cancel the
//! exponential symbolically, so nothing here overflows for any finite `κ`.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{domain, Error, Result};

/// Largest exponent for which `e^{u}` is returned unscaled.
pub const MAX_UNSCALED_EXPONENT: f64 = 700.0;

/// Square barrier `V(x) = λV₀` for `|x| < a`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellConfig {
    pub v0: f64,
    pub a: f64,
    pub lambda: f64,
}

impl WellConfig {
    /// Barrier with unit coupling.
    pub fn new(v0: f64, a: f64) -> Result<Self> {
        Self::with_lambda(v0, a, 1.0)
    }

    pub fn with_lambda(v0: f64, a: f64, lambda: f64) -> Result<Self> {
        let cfg = Self { v0, a, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `v0 = 0` is accepted and describes the free field.
    pub fn validate(&self) -> Result<()> {
        if !(self.v0.is_finite() && self.v0 >= 0.0) {
            return domain(format!("v0 must be finite and non-negative, got {}", self.v0));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return domain(format!("a must be finite and positive, got {}", self.a));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return domain(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            ));
        }
        Ok(())
    }

    /// Effective barrier height `λV₀`.
    pub fn coupling(&self) -> f64 {
        self.lambda * self.v0
    }

    /// The same barrier with `λ` folded into `V₀`.
    pub fn folded(&self) -> Self {
        Self {
            v0: self.coupling(),
            a: self.a,
            lambda: 1.0,
        }
    }

    pub fn is_free(&self) -> bool {
        self.coupling() == 0.0
    }

    /// `κ' = sqrt(κ² + λV₀)`.
    pub fn kappa_prime(&self, kappa: f64) -> f64 {
        kappa.hypot(self.coupling().sqrt())
    }

    /// `V(x)`; the wall itself belongs to the interior.
    pub fn potential(&self, x: f64) -> f64 {
        if x.abs() <= self.a {
            self.coupling()
        } else {
            0.0
        }
    }

    /// Dimensionless barrier strength `λV₀a²`.
    pub fn strength(&self) -> f64 {
        self.coupling() * self.a * self.a
    }
}

/// A positive number stored as `mantissa · e^{exponent}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: f64,
}

impl Scaled {
    /// Unscaled value, or [`Error::Overflow`] past [`MAX_UNSCALED_EXPONENT`].
    pub fn value(&self) -> Result<f64> {
        if self.exponent > MAX_UNSCALED_EXPONENT {
            return Err(Error::Overflow {
                exponent: self.exponent,
                limit: MAX_UNSCALED_EXPONENT,
            });
        }
        Ok(self.mantissa * self.exponent.exp())
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.exponent
    }
}

/// `∂ⁿG(x, x, iκ)/∂xⁿ` for `n = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensDiagonal {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Scaled hyperbolic building blocks at one `κ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KappaTerms {
    pub kappa: f64,
    pub kp: f64,
    pub v: f64,
    /// `u = 2aκ'`
    pub u: f64,
    /// `e^{-2u}`
    pub e2u: f64,
    /// `N·e^{-u}`
    pub ns: f64,
    /// `D·e^{-u}`
    pub ds: f64,
    /// `sinh(u)·e^{-u}`
    pub ss: f64,
}

impl KappaTerms {
    pub(crate) fn new(cfg: &WellConfig, kappa: f64) -> Self {
        let v = cfg.coupling();
        let kp = cfg.kappa_prime(kappa);
        let u = 2.0 * cfg.a * kp;
        let e2u = (-2.0 * u).exp();
        let one_minus = -(-2.0 * u).exp_m1();
        let s = kappa + kp;
        // κ' − κ without cancellation
        let d = if s > 0.0 { v / s } else { 0.0 };
        let ns = 0.5 * (s * s + d * d * e2u);
        let ds = 0.5 * (4.0 * kappa * kp + d * d * one_minus);
        Self {
            kappa,
            kp,
            v,
            u,
            e2u,
            ns,
            ds,
            ss: 0.5 * one_minus,
        }
    }

    /// `cosh(2κ'x)·e^{-u}` and `sinh(2κ'x)·e^{-u}` for `|x| ≤ a`.
    pub(crate) fn interior_hyperbolics(&self, x: f64) -> (f64, f64) {
        let p = (2.0 * self.kp * x - self.u).exp();
        let m = (-2.0 * self.kp * x - self.u).exp();
        (0.5 * (p + m), 0.5 * (p - m))
    }

    /// `r(iκ)·e^{-2κ|x|}` for `|x| ≥ a`.
    pub(crate) fn exterior_reflection(&self, x: f64, a: f64) -> f64 {
        let t = -(-2.0 * self.u).exp_m1() / (1.0 + self.e2u); // tanh(u)
        let den = 2.0 * self.kp * self.kappa + (self.kappa.powi(2) + self.kp.powi(2)) * t;
        -self.v * t * (-2.0 * self.kappa * (x.abs() - a)).exp() / den
    }
}

fn check_kappa(kappa: f64, allow_zero: bool) -> Result<()> {
    let ok = kappa.is_finite() && (kappa > 0.0 || (allow_zero && kappa == 0.0));
    if ok {
        Ok(())
    } else {
        domain(format!(
            "kappa must be finite and {}, got {kappa}",
            if allow_zero { "non-negative" } else { "positive" }
        ))
    }
}

/// `N_κ` in scaled form (exponent `2aκ'`).
pub fn n_kappa_scaled(cfg: &WellConfig, kappa: f64) -> Result<Scaled> {
    check_kappa(kappa, true)?;
    let t = KappaTerms::new(cfg, kappa);
    Ok(Scaled {
        mantissa: t.ns,
        exponent: t.u,
    })
}

/// `D_κ` in scaled form (exponent `2aκ'`).
pub fn d_kappa_scaled(cfg: &WellConfig, kappa: f64) -> Result<Scaled> {
    check_kappa(kappa, true)?;
    let t = KappaTerms::new(cfg, kappa);
    Ok(Scaled {
        mantissa: t.ds,
        exponent: t.u,
    })
}

/// `N_κ = (κ² + κ'²)cosh(2κ'a) + 2κ'κ sinh(2κ'a)`.
pub fn n_kappa(cfg: &WellConfig, kappa: f64) -> Result<f64> {
    n_kappa_scaled(cfg, kappa)?.value()
}

/// `D_κ = 2κ'κ cosh(2κ'a) + (κ² + κ'²) sinh(2κ'a)`.
pub fn d_kappa(cfg: &WellConfig, kappa: f64) -> Result<f64> {
    d_kappa_scaled(cfg, kappa)?.value()
}

/// Reflection amplitude `r(iκ)` at imaginary momentum.
///
/// Carries a factor `e^{2κa}`; for exterior points prefer
/// [`reflection_decay`], which folds in the `e^{-2κ|x|}` it multiplies.
pub fn reflection(cfg: &WellConfig, kappa: f64) -> Result<f64> {
    check_kappa(kappa, false)?;
    let exponent = 2.0 * kappa * cfg.a;
    let scaled = reflection_decay(cfg, kappa, cfg.a)?;
    if exponent > MAX_UNSCALED_EXPONENT {
        return Err(Error::Overflow {
            exponent,
            limit: MAX_UNSCALED_EXPONENT,
        });
    }
    Ok(scaled * exponent.exp())
}

/// `r(iκ)·e^{-2κ|x|}` for `|x| ≥ a`.
pub fn reflection_decay(cfg: &WellConfig, kappa: f64, x: f64) -> Result<f64> {
    check_kappa(kappa, false)?;
    if x.abs() < cfg.a {
        return domain(format!("reflection_decay needs |x| >= a, got x = {x}"));
    }
    Ok(KappaTerms::new(cfg, kappa).exterior_reflection(x, cfg.a))
}

/// `G(x, x, iκ)` and its first two derivatives in `x`.
///
/// `κ = 0` is accepted inside the barrier (finite limit) and rejected
/// outside, where the free part `1/2κ` diverges.
pub fn greens_diag(cfg: &WellConfig, x: f64, kappa: f64) -> Result<GreensDiagonal> {
    if !x.is_finite() {
        return domain(format!("x must be finite, got {x}"));
    }
    let interior = x.abs() <= cfg.a;
    check_kappa(kappa, interior && !cfg.is_free())?;
    let t = KappaTerms::new(cfg, kappa);
    Ok(greens_from_terms(&t, x, cfg.a))
}

pub(crate) fn greens_from_terms(t: &KappaTerms, x: f64, a: f64) -> GreensDiagonal {
    if x.abs() <= a {
        let (c, s) = t.interior_hyperbolics(x);
        GreensDiagonal {
            value: (t.ns + t.v * c) / (2.0 * t.kp * t.ds),
            d1: t.v * s / t.ds,
            d2: 2.0 * t.kp * t.v * c / t.ds,
        }
    } else {
        let r = t.exterior_reflection(x, a);
        GreensDiagonal {
            value: (1.0 + r) / (2.0 * t.kappa),
            d1: -x.signum() * r,
            d2: 2.0 * t.kappa * r,
        }
    }
}

/// `F(κ) = ∫_{-a}^{a} G(x, x, iκ) dx` in closed form.
pub fn interval_integral(cfg: &WellConfig, kappa: f64) -> Result<f64> {
    check_kappa(kappa, !cfg.is_free())?;
    let t = KappaTerms::new(cfg, kappa);
    Ok(interval_from_terms(&t, cfg.a))
}

pub(crate) fn interval_from_terms(t: &KappaTerms, a: f64) -> f64 {
    (2.0 * a * t.ns + t.v * t.ss / t.kp) / (2.0 * t.kp * t.ds)
}

/// `F(κ)` and the wall slope `∂ₓG(a, a, iκ)` in double-double arithmetic.
pub(crate) fn interval_and_slope_dd(cfg: &WellConfig, kappa: f64) -> (Dd, Dd) {
    let k = Dd::new(kappa);
    let v = Dd::new(cfg.coupling());
    let a = Dd::new(cfg.a);
    let two = Dd::new(2.0);
    let half = Dd::new(0.5);
    let kp = (k * k + v).sqrt();
    let u = two * a * kp;
    let e2u = (-(two * u)).exp();
    let one_minus = Dd::new(1.0) - e2u;
    let s = k + kp;
    let d = v / s;
    let ns = half * (s * s + d * d * e2u);
    let ds = half * (Dd::new(4.0) * k * kp + d * d * one_minus);
    let ss = half * one_minus;
    let f = (two * a * ns + v * ss / kp) / (two * kp * ds);
    (f, v * ss / ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> WellConfig {
        WellConfig::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn n_and_d_at_zero_momentum() {
        let cfg = unit();
        assert_relative_eq!(n_kappa(&cfg, 0.0).unwrap(), 2f64.cosh(), max_relative = 1e-15);
        assert_relative_eq!(d_kappa(&cfg, 0.0).unwrap(), 2f64.sinh(), max_relative = 1e-15);
    }

    #[test]
    fn n_and_d_coincide_for_free_field() {
        let cfg = WellConfig::with_lambda(1.0, 1.0, 0.0).unwrap();
        let want = 8.0 * 4f64.exp();
        assert_relative_eq!(n_kappa(&cfg, 2.0).unwrap(), want, max_relative = 1e-15);
        assert_relative_eq!(d_kappa(&cfg, 2.0).unwrap(), want, max_relative = 1e-15);
    }

    #[test]
    fn raw_values_refuse_large_exponents() {
        let cfg = unit();
        assert!(n_kappa(&cfg, 349.0).is_ok());
        assert!(matches!(n_kappa(&cfg, 400.0), Err(Error::Overflow { .. })));
        let s = d_kappa_scaled(&cfg, 1e6).unwrap();
        assert!(s.mantissa.is_finite() && s.mantissa > 0.0);
        assert!(reflection(&cfg, 400.0).is_err());
    }

    #[test]
    fn free_field_green_function() {
        let cfg = WellConfig::with_lambda(1.0, 1.0, 0.0).unwrap();
        for &x in &[-3.0, -0.2, 0.0, 1.0, 2.5] {
            let g = greens_diag(&cfg, x, 0.7).unwrap();
            assert_relative_eq!(g.value, 1.0 / 1.4, max_relative = 1e-15);
            assert_eq!(g.d1, 0.0);
            assert_eq!(g.d2, 0.0);
        }
        assert_eq!(reflection(&cfg, 0.3).unwrap(), 0.0);
        assert_relative_eq!(interval_integral(&cfg, 0.5).unwrap(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn interior_value_at_zero_momentum() {
        let g = greens_diag(&unit(), 0.0, 0.0).unwrap();
        let want = (2f64.cosh() + 1.0) / (2.0 * 2f64.sinh());
        assert_relative_eq!(g.value, want, max_relative = 1e-15);
        assert_eq!(g.d1, 0.0);
        assert!(greens_diag(&unit(), 1.5, 0.0).is_err());
        assert!(greens_diag(&unit(), 0.0, -1.0).is_err());
    }

    #[test]
    fn reflection_at_wall_matches_quoted_formula() {
        let kp = 2f64.sqrt();
        let t = (2.0 * kp).tanh();
        let want = -t / (2.0 * kp + 3.0 * t);
        assert_relative_eq!(reflection_decay(&unit(), 1.0, 1.0).unwrap(), want, max_relative = 1e-15);
        assert_relative_eq!(
            reflection(&unit(), 1.0).unwrap(),
            want * 2f64.exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn wall_continuity() {
        let cfg = WellConfig::new(3.0, 0.7).unwrap();
        for &k in &[1e-3, 0.4, 2.0, 30.0, 500.0] {
            let inside = greens_diag(&cfg, 0.7, k).unwrap();
            let outside = greens_diag(&cfg, 0.7 * (1.0 + 1e-15), k).unwrap();
            assert_relative_eq!(inside.value, outside.value, max_relative = 1e-10);
            assert_relative_eq!(inside.d1, outside.d1, max_relative = 1e-9);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cfg = WellConfig::new(2.0, 0.8).unwrap();
        let k = 1.1;
        for &x in &[0.3, -0.5, 1.4, -2.0] {
            let h = 1e-5;
            let g = |x| greens_diag(&cfg, x, k).unwrap();
            let fd1 = (g(x + h).value - g(x - h).value) / (2.0 * h);
            let fd2 = (g(x + h).d1 - g(x - h).d1) / (2.0 * h);
            assert_relative_eq!(g(x).d1, fd1, max_relative = 1e-7);
            assert_relative_eq!(g(x).d2, fd2, max_relative = 1e-7);
        }
    }

    #[test]
    fn extended_precision_pieces_agree() {
        let cfg = WellConfig::new(3.0, 0.7).unwrap();
        for &k in &[0.0, 0.05, 1.3, 40.0] {
            let (f, slope) = interval_and_slope_dd(&cfg, k);
            assert_relative_eq!(f.to_f64(), interval_integral(&cfg, k).unwrap(), max_relative = 1e-14);
            if k > 0.0 {
                let g = greens_diag(&cfg, cfg.a, k).unwrap();
                assert_relative_eq!(slope.to_f64(), g.d1, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn survives_huge_momentum() {
        let g = greens_diag(&unit(), 0.3, 1e8).unwrap();
        assert_relative_eq!(g.value, 0.5e-8, max_relative = 1e-12);
        assert!(interval_integral(&unit(), 1e8).unwrap().is_finite());
    }
}
