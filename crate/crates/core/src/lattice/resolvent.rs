//! Static vacuum moments from the tridiagonal resolvent `(K + s²)^{−1}`.
//!
//! `K^{−1/2} = (2/π)∫₀^∞ (K + s²)^{−1} ds` and
//! `K_λ^{1/2} − K₀^{1/2} = (2/π)∫₀^∞ s²[(K₀ + s²)^{−1} − (K_λ + s²)^{−1}] ds`.
//! At each `s` the diagonal and near-diagonal resolvent entries follow from
//! two continued-fraction sweeps. Differences against the free lattice are
//! propagated through the sweeps directly, so no large cancellation occurs.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{GradientScheme, LatticeConfig, LatticeDensity, SiteMoments};
use crate::error::Result;

/// Trapezoid step in `ln s`.
const LOG_STEP: f64 = 0.05;
/// The `s` integral runs over `[S_LOW/L, S_HIGH/h]`. Below the lower end
/// the integrands are flat and above the upper end they follow the large-`s`
/// expansion; both pieces are added in closed form.
const S_LOW: f64 = 1e-4;
const S_HIGH: f64 = 400.0;
/// `s` nodes summed per parallel task; fixed so results are reproducible.
const CHUNK: usize = 8;

/// Barrier-minus-free moments of the static vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticMoments {
    pub lcfg: LatticeConfig,
    pub diff: SiteMoments,
}

impl StaticMoments {
    /// `⟨φ(xⱼ)²⟩_λ − ⟨φ(xⱼ)²⟩₀`.
    pub fn phi2_shift(&self, j: usize) -> f64 {
        self.diff.phi[j]
    }

    pub fn density(&self, scheme: GradientScheme) -> LatticeDensity {
        let t00 = self.diff.energy_density(self.lcfg.spacing(), scheme);
        LatticeDensity::new(self.lcfg, 0.0, t00)
    }
}

#[inline]
fn ratio(z: f64) -> f64 {
    z / (1.0 + z)
}

// One resolvent evaluation, accumulated into `acc` with weight `w`
// (the 1/πh prefactor is applied at the end).
fn accumulate(lcfg: &LatticeConfig, pot: &[f64], s: f64, w: f64, acc: &mut SiteMoments) {
    let n = pot.len();
    let h = lcfg.spacing();
    let h2 = h * h;
    let d0 = s * s * h2;
    // forward sweep: λ_j = δ_j + λ_{j−1}/(1 + λ_{j−1}), λ_0 = 1 + δ_0
    let mut fl = vec![1.0; n];
    let mut fl0 = vec![1.0; n];
    let mut dfl = vec![0.0; n];
    let (mut lam, mut lam0, mut dlam) = (0.0, 0.0, 0.0);
    for j in 0..n {
        if j == 0 {
            lam = 1.0 + d0 + pot[0] * h2;
            lam0 = 1.0 + d0;
            dlam = pot[0] * h2;
        } else {
            fl[j] = ratio(lam);
            fl0[j] = ratio(lam0);
            dfl[j] = dlam / ((1.0 + lam) * (1.0 + lam0));
            lam = d0 + pot[j] * h2 + fl[j];
            lam0 = d0 + fl0[j];
            dlam = pot[j] * h2 + dfl[j];
        }
    }
    // backward sweep for ρ, then the moments
    let mut r = vec![0.0; n];
    let mut r0 = vec![0.0; n];
    let mut dr = vec![0.0; n];
    let mut fr = vec![1.0; n];
    let mut fr0 = vec![1.0; n];
    let mut dfr = vec![0.0; n];
    let (mut rho, mut rho0, mut drho) = (0.0, 0.0, 0.0);
    for j in (0..n).rev() {
        if j == n - 1 {
            rho = 1.0 + d0 + pot[j] * h2;
            rho0 = 1.0 + d0;
            drho = pot[j] * h2;
        } else {
            fr[j] = ratio(rho);
            fr0[j] = ratio(rho0);
            dfr[j] = drho / ((1.0 + rho) * (1.0 + rho0));
            rho = d0 + pot[j] * h2 + fr[j];
            rho0 = d0 + fr0[j];
            drho = pot[j] * h2 + dfr[j];
        }
        let den = fl[j] + rho;
        let den0 = fl0[j] + rho0;
        let dden = dfl[j] + drho;
        r[j] = h2 / den;
        r0[j] = h2 / den0;
        dr[j] = -h2 * dden / (den * den0);
    }
    let ws2 = w * s * s;
    for j in 0..n {
        acc.phi[j] += w * dr[j];
        acc.pi[j] -= ws2 * dr[j];
        acc.cross[j] -= w
            * (dfl[j] * r[j] * fr[j] + fl0[j] * dr[j] * fr[j] + fl0[j] * r0[j] * dfr[j]);
    }
    acc.link[0] += w * dr[0];
    acc.link[n] += w * dr[n - 1];
    for l in 1..n {
        let (i, k) = (l - 1, l);
        acc.link[l] += w
            * (dr[i] * fr[i] + r0[i] * dfr[i] + dr[k] * fl[k] + r0[k] * dfl[k]);
    }
}

fn add_into(a: &mut SiteMoments, b: &SiteMoments) {
    for (x, y) in [
        (&mut a.phi, &b.phi),
        (&mut a.pi, &b.pi),
        (&mut a.link, &b.link),
        (&mut a.cross, &b.cross),
    ] {
        x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
    }
}

/// Barrier-minus-free static vacuum moments for every site.
pub fn static_moments(lcfg: &LatticeConfig) -> Result<StaticMoments> {
    lcfg.validate()?;
    let n = lcfg.dof();
    let h = lcfg.spacing();
    let pot: Vec<f64> = (0..n).map(|j| lcfg.potential(j)).collect();
    let t_lo = (S_LOW / lcfg.half_length).ln();
    let s_max = S_HIGH / h;
    let t_hi = s_max.ln();
    let steps = ((t_hi - t_lo) / LOG_STEP).ceil() as usize;
    let dt = (t_hi - t_lo) / steps as f64;
    let nodes: Vec<usize> = (0..=steps).collect();
    let partials: Vec<SiteMoments> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = SiteMoments::zeros(n);
            for &k in chunk {
                let s = (t_lo + k as f64 * dt).exp();
                let end = k == 0 || k == steps;
                let w = dt * s * if end { 0.5 } else { 1.0 };
                accumulate(lcfg, &pot, s, w, &mut acc);
                if k == 0 {
                    // ∫₀^{s_lo} X ds ≈ s_lo X(s_lo), plus the trapezoid endpoint
                    // term for an integrand growing like e^τ
                    accumulate(lcfg, &pot, s, s * (1.0 + dt * dt / 12.0), &mut acc);
                }
            }
            acc
        })
        .collect();
    let mut total = SiteMoments::zeros(n);
    for p in &partials {
        add_into(&mut total, p);
    }
    // large-s tails from (K + s²)^{−1} = s^{−2} − K s^{−4} + K² s^{−6} − …
    let s3 = 3.0 * s_max.powi(3);
    let at = |j: isize| {
        if j < 0 || j as usize >= n {
            0.0
        } else {
            pot[j as usize]
        }
    };
    for j in 0..n {
        let v = pot[j];
        total.phi[j] -= v / s3;
        // the ⟨ππ⟩ integrand still falls only like V/s at the cut, so the
        // trapezoid's endpoint term −(dt²/12)f′ is removed as well
        total.pi[j] += v / s_max - (4.0 * v / (h * h) + v * v) / s3 + dt * dt * v / (12.0 * s_max);
        total.cross[j] += v / s3;
    }
    for l in 0..=n {
        total.link[l] -= (at(l as isize - 1) + at(l as isize)) / s3;
    }
    let scale = 1.0 / (PI * h);
    for v in total
        .phi
        .iter_mut()
        .chain(total.pi.iter_mut())
        .chain(total.link.iter_mut())
        .chain(total.cross.iter_mut())
    {
        *v *= scale;
    }
    Ok(StaticMoments {
        lcfg: *lcfg,
        diff: total,
    })
}

/// Lattice resolvent diagonal `[(K + κ²)^{−1}]ⱼⱼ / h`, the discrete
/// counterpart of `G(xⱼ, xⱼ; iκ)`.
pub fn lattice_greens_diag(lcfg: &LatticeConfig, j: usize, kappa: f64) -> Result<f64> {
    lcfg.validate()?;
    let n = lcfg.dof();
    if j >= n {
        return crate::error::domain(format!("site {j} out of range"));
    }
    let h = lcfg.spacing();
    let h2 = h * h;
    let d = |i: usize| (lcfg.potential(i) + kappa * kappa) * h2;
    let mut left = 1.0;
    if j > 0 {
        let mut lam = 1.0 + d(0);
        for i in 1..j {
            lam = d(i) + ratio(lam);
        }
        left = ratio(lam);
    }
    let mut rho = 1.0 + d(n - 1);
    for i in (j..n - 1).rev() {
        rho = d(i) + ratio(rho);
    }
    Ok(h / (left + rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::well::{greens_diag, WellConfig};
    use approx::assert_relative_eq;

    #[test]
    fn resolvent_diagonal_matches_continuum() {
        let cfg = WellConfig::new(1.0, 1.0).unwrap();
        let l = LatticeConfig::new(cfg, 40.0, 16384).unwrap();
        let j = l.center() + 102; // x = 0.498
        let x = l.position(j);
        let lat = lattice_greens_diag(&l, j, 0.8).unwrap();
        let cont = greens_diag(&cfg, x, 0.8).unwrap().value;
        assert_relative_eq!(lat, cont, max_relative = 1e-4);
    }

    #[test]
    fn free_lattice_has_no_shift() {
        let cfg = WellConfig::new(0.0, 1.0).unwrap();
        let l = LatticeConfig::new(cfg, 10.0, 1000).unwrap();
        let m = static_moments(&l).unwrap();
        assert!(m.diff.phi.iter().chain(&m.diff.pi).all(|v| *v == 0.0));
    }
}
