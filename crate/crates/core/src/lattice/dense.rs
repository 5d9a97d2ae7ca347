//! Full Gaussian states, stored in the free sine-mode basis where the free
//! evolution is diagonal.

use std::f64::consts::PI;

use faer::{Mat, Side};

use super::{GradientScheme, LatticeConfig, LatticeDensity, SiteMoments};
use crate::error::{domain, Error, Result};

/// Gaussian state fixed by `⟨φφ⟩`, `⟨ππ⟩` and `sym⟨φπ⟩`, all expressed in
/// the free normal modes `φ̃ₙ = Σⱼ Uₙⱼ φⱼ` with
/// `Uₙⱼ = √(2/M) sin(π(n+1)(j+1)/M)`.
#[derive(Debug, Clone)]
pub struct LatticeState {
    pub lcfg: LatticeConfig,
    /// Time since the quench.
    pub t: f64,
    pub phi: Mat<f64>,
    pub pi: Mat<f64>,
    /// `cross[(m, n)] = ½⟨φ̃ₘπ̃ₙ + π̃ₙφ̃ₘ⟩`.
    pub cross: Mat<f64>,
}

/// The sine transform; symmetric and its own inverse.
pub(crate) fn sine_basis(lcfg: &LatticeConfig) -> Mat<f64> {
    let n = lcfg.dof();
    let m = lcfg.sites as f64;
    let norm = (2.0 / m).sqrt();
    Mat::from_fn(n, n, |i, j| {
        // reduce the product mod 2M before scaling to keep the argument small
        let p = ((i + 1) * (j + 1)) % (2 * lcfg.sites);
        norm * (PI * p as f64 / m).sin()
    })
}

fn frequencies(lcfg: &LatticeConfig) -> Vec<f64> {
    (1..=lcfg.dof()).map(|n| lcfg.free_frequency(n)).collect()
}

/// Exact ground state of `K = −Δ/h² + diag(V)` by dense diagonalization.
pub fn build_vacuum(lcfg: &LatticeConfig) -> Result<LatticeState> {
    lcfg.validate()?;
    let n = lcfg.dof();
    let h = lcfg.spacing();
    let c = 1.0 / (h * h);
    let k = Mat::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * c + lcfg.potential(i)
        } else if i.abs_diff(j) == 1 {
            -c
        } else {
            0.0
        }
    });
    let eig = k
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Domain(format!("eigensolver failed: {e:?}")))?;
    let mu: Vec<f64> = (0..n).map(|i| eig.S().column_vector()[i]).collect();
    let smallest = mu.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > 0.0) {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    let u = sine_basis(lcfg);
    let b = &u * eig.U();
    let scaled = |p: f64| Mat::from_fn(n, n, |i, j| b[(i, j)] * mu[j].powf(p) / (2.0 * h));
    let phi = &scaled(-0.5) * b.transpose();
    let pi = &scaled(0.5) * b.transpose();
    Ok(LatticeState {
        lcfg: *lcfg,
        t: 0.0,
        phi: symmetrized(phi),
        pi: symmetrized(pi),
        cross: Mat::zeros(n, n),
    })
}

fn symmetrized(m: Mat<f64>) -> Mat<f64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Evolves `state` for a further time `t` under the free lattice
/// Hamiltonian. Each free mode rotates independently, so the step is exact.
pub fn quench_evolve(state: &LatticeState, t: f64) -> Result<LatticeState> {
    if !(t.is_finite() && t >= 0.0) {
        return domain(format!("t must be non-negative, got {t}"));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let w = frequencies(&state.lcfg);
    let c: Vec<f64> = w.iter().map(|w| (w * t).cos()).collect();
    let s: Vec<f64> = w.iter().map(|w| (w * t).sin()).collect();
    let n = w.len();
    let (p, q, x) = (&state.phi, &state.pi, &state.cross);
    let phi = Mat::from_fn(n, n, |i, j| {
        c[i] * c[j] * p[(i, j)]
            + c[i] * s[j] / w[j] * x[(i, j)]
            + s[i] / w[i] * c[j] * x[(j, i)]
            + s[i] * s[j] / (w[i] * w[j]) * q[(i, j)]
    });
    let pi = Mat::from_fn(n, n, |i, j| {
        w[i] * w[j] * s[i] * s[j] * p[(i, j)]
            - w[i] * s[i] * c[j] * x[(i, j)]
            - w[j] * c[i] * s[j] * x[(j, i)]
            + c[i] * c[j] * q[(i, j)]
    });
    let cross = Mat::from_fn(n, n, |i, j| {
        -w[j] * c[i] * s[j] * p[(i, j)] + c[i] * c[j] * x[(i, j)]
            - s[i] * s[j] * w[j] / w[i] * x[(j, i)]
            + s[i] * c[j] / w[i] * q[(i, j)]
    });
    Ok(LatticeState {
        lcfg: state.lcfg,
        t: state.t + t,
        phi,
        pi,
        cross,
    })
}

// Diagonal, first and second off-diagonals of U A U.
fn real_space_bands(u: &Mat<f64>, a: &Mat<f64>) -> [Vec<f64>; 3] {
    let n = u.nrows();
    let w = u * a;
    let dot = |i: usize, k: usize| (0..n).map(|m| w[(i, m)] * u[(k, m)]).sum::<f64>();
    let diag = (0..n).map(|i| dot(i, i)).collect();
    let off1 = (0..n.saturating_sub(1)).map(|i| dot(i, i + 1)).collect();
    let off2 = (0..n.saturating_sub(2)).map(|i| dot(i, i + 2)).collect();
    [diag, off1, off2]
}

fn moments_from_bands(phi: &[Vec<f64>; 3], pi: Vec<f64>) -> SiteMoments {
    let [d, o1, o2] = phi;
    let n = d.len();
    let mut link = vec![0.0; n + 1];
    link[0] = d[0];
    link[n] = d[n - 1];
    for l in 1..n {
        link[l] = d[l] + d[l - 1] - 2.0 * o1[l - 1];
    }
    let cross = (0..n)
        .map(|j| {
            let up = if j + 1 < n { o1[j] } else { 0.0 };
            let down = if j >= 1 { o1[j - 1] } else { 0.0 };
            let skip = if j >= 1 && j + 1 < n { o2[j - 1] } else { 0.0 };
            up - skip - d[j] + down
        })
        .collect();
    SiteMoments {
        phi: d.clone(),
        pi,
        link,
        cross,
    }
}

/// Site moments of the free lattice vacuum.
pub(crate) fn free_moments(lcfg: &LatticeConfig, u: &Mat<f64>) -> SiteMoments {
    let n = lcfg.dof();
    let h = lcfg.spacing();
    let w = frequencies(lcfg);
    let band = |k: usize, f: &dyn Fn(usize) -> f64| -> Vec<f64> {
        (0..n - k)
            .map(|i| (0..n).map(|m| u[(i, m)] * u[(i + k, m)] * f(m)).sum())
            .collect()
    };
    let g = |m: usize| 1.0 / (2.0 * h * w[m]);
    let bands = [band(0, &g), band(1, &g), band(2, &g)];
    let pi = band(0, &|m| w[m] / (2.0 * h));
    moments_from_bands(&bands, pi)
}

impl LatticeState {
    /// Absolute site moments.
    pub fn site_moments(&self) -> SiteMoments {
        self.moments_with(&sine_basis(&self.lcfg))
    }

    fn moments_with(&self, u: &Mat<f64>) -> SiteMoments {
        let bands = real_space_bands(u, &self.phi);
        let [pi, _, _] = real_space_bands(u, &self.pi);
        moments_from_bands(&bands, pi)
    }

    /// Per-site `½⟨π²⟩ + ½⟨(∇φ)²⟩` minus the same in the free lattice vacuum.
    pub fn kinetic_density(&self, scheme: GradientScheme) -> LatticeDensity {
        let u = sine_basis(&self.lcfg);
        let diff = self.moments_with(&u).minus(&free_moments(&self.lcfg, &u));
        let t00 = diff.energy_density(self.lcfg.spacing(), scheme);
        LatticeDensity::new(self.lcfg, self.t, t00)
    }

    /// `⟨φ(xⱼ)²⟩` minus its free-vacuum value.
    pub fn phi2_shift(&self, j: usize) -> f64 {
        let u = sine_basis(&self.lcfg);
        let mine = real_space_bands(&u, &self.phi)[0][j];
        let free = free_moments(&self.lcfg, &u).phi[j];
        mine - free
    }

    /// Expectation of the free lattice Hamiltonian, normal ordered:
    /// `h Σₙ ½[(⟨π̃ₙ²⟩ − ωₙ/2h) + ωₙ²(⟨φ̃ₙ²⟩ − 1/(2hωₙ))]`.
    pub fn free_energy(&self) -> f64 {
        let h = self.lcfg.spacing();
        frequencies(&self.lcfg)
            .iter()
            .enumerate()
            .map(|(n, w)| {
                0.5 * h
                    * ((self.pi[(n, n)] - w / (2.0 * h))
                        + w * w * (self.phi[(n, n)] - 1.0 / (2.0 * h * w)))
            })
            .sum()
    }

    /// Bound on `max |ν − ½|` over the symplectic eigenvalues `ν`.
    ///
    /// With canonical momenta `p = hπ` and `σ` the symmetrized covariance,
    /// `(σJ)²` has eigenvalues `−ν²`; the returned value is the largest
    /// absolute row sum of `(σJ)² + ¼`, which bounds every `|ν² − ¼|` and
    /// hence every `|ν − ½|`.
    pub fn symplectic_deviation(&self) -> f64 {
        let h = self.lcfg.spacing();
        let n = self.phi.nrows();
        let f = &self.phi;
        let p = Mat::from_fn(n, n, |i, j| h * h * self.pi[(i, j)]);
        let y = Mat::from_fn(n, n, |i, j| h * self.cross[(i, j)]);
        let yt = y.transpose();
        // σJ = [[−Y, Φ], [−P, Yᵀ]]
        let b11 = &(&y * &y) - &(f * &p);
        let b12 = &(f * yt) - &(&y * f);
        let b21 = &(&p * &y) - &(yt * &p);
        let b22 = &(yt * yt) - &(&p * f);
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut top = 0.0;
            let mut bottom = 0.0;
            for j in 0..n {
                let id = if i == j { 0.25 } else { 0.0 };
                top += (b11[(i, j)] + id).abs() + b12[(i, j)].abs();
                bottom += b21[(i, j)].abs() + (b22[(i, j)] + id).abs();
            }
            worst = worst.max(top).max(bottom);
        }
        worst
    }

    /// Real-space covariances `(⟨φφ⟩, ⟨ππ⟩, sym⟨φπ⟩)`.
    pub fn site_covariances(&self) -> (Mat<f64>, Mat<f64>, Mat<f64>) {
        let u = sine_basis(&self.lcfg);
        let back = |a: &Mat<f64>| &(&u * a) * &u;
        (back(&self.phi), back(&self.pi), back(&self.cross))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::well::WellConfig;
    use approx::assert_relative_eq;

    fn small(v0: f64) -> LatticeConfig {
        LatticeConfig::new(WellConfig::new(v0, 1.0).unwrap(), 10.0, 500).unwrap()
    }

    #[test]
    fn sine_basis_is_orthogonal() {
        let u = sine_basis(&small(1.0));
        let id = &u * &u;
        for i in 0..id.nrows() {
            for j in 0..id.ncols() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn free_vacuum_is_zero() {
        let s = build_vacuum(&small(0.0)).unwrap();
        let d = s.kinetic_density(GradientScheme::Link);
        assert!(d.t00.iter().all(|v| v.abs() < 1e-9));
        assert!(s.free_energy().abs() < 1e-9);
    }

    #[test]
    fn free_vacuum_matches_mode_sum() {
        let l = small(0.0);
        let s = build_vacuum(&l).unwrap();
        let (phi, _, _) = s.site_covariances();
        let h = l.spacing();
        let m = l.sites as f64;
        for j in [0usize, 100, l.center()] {
            let x = l.position(j);
            let sum: f64 = (1..l.sites)
                .map(|n| {
                    let arg = n as f64 * PI * (x + l.half_length) / (2.0 * l.half_length);
                    arg.sin().powi(2) / (m * h * l.free_frequency(n))
                })
                .sum();
            assert_relative_eq!(phi[(j, j)], sum, max_relative = 1e-10);
        }
    }

    #[test]
    fn vacuum_and_evolved_states_are_pure() {
        let s = build_vacuum(&small(1.0)).unwrap();
        assert!(s.symplectic_deviation() < 1e-10);
        let e = quench_evolve(&s, 1.3).unwrap();
        assert!(e.symplectic_deviation() < 1e-10);
    }

    #[test]
    fn evolution_composes() {
        let s = build_vacuum(&small(1.0)).unwrap();
        let once = quench_evolve(&s, 1.0).unwrap();
        let twice = quench_evolve(&quench_evolve(&s, 0.4).unwrap(), 0.6).unwrap();
        for i in (0..once.phi.nrows()).step_by(37) {
            for j in (0..once.phi.ncols()).step_by(41) {
                assert!((once.phi[(i, j)] - twice.phi[(i, j)]).abs() < 1e-9);
                assert!((once.cross[(i, j)] - twice.cross[(i, j)]).abs() < 1e-9);
            }
        }
    }
}
