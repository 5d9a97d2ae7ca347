//! Subcommand bodies.

use std::f64::consts::PI;
use std::path::Path;

use qilab::density::{default_grid, density_profile, e_ke_closed, energy_report};
use qilab::io::json_text;
use qilab::lattice::{
    build_vacuum, quench_evolve, static_moments, total_energy_diagnostics, GradientScheme,
    LatticeConfig, LatticeDensity,
};
use qilab::modes::OverlapTable;
use qilab::pulses::{evolve, quantum_interest_report};
use qilab::ramp::{ramp_run, RampConfig};
use qilab::sampling::violation_report;
use qilab::{QuadratureSpec, WellConfig};

use crate::manifest::{compare, RunManifest, Snapshot};
use crate::{Command, Eta, Failure, GridArgs, QuadArgs, Scheme, WellArgs};

/// Largest `M` for runs that evolve full covariance matrices.
const DENSE_MAX_SITES: usize = 4096;

impl WellArgs {
    fn config(&self) -> Result<WellConfig, Failure> {
        Ok(WellConfig::with_lambda(self.v0, self.a, self.lambda)?)
    }
}

impl QuadArgs {
    fn spec(&self, a: f64) -> Result<QuadratureSpec, Failure> {
        let mut q = QuadratureSpec::for_half_width(a).with_rel_tol(self.rtol);
        if let Some(k) = self.kmax {
            q = q.with_kappa_max(k);
        }
        q.validate()?;
        Ok(q)
    }
}

impl GridArgs {
    fn points(&self, cfg: &WellConfig) -> Result<Vec<f64>, Failure> {
        Ok(default_grid(cfg, self.grid, self.xmax.unwrap_or(2.0 * cfg.a))?)
    }
}

fn positive_times(ts: &[f64]) -> Result<(), Failure> {
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Failure::Usage("times must be finite and non-negative".into()));
    }
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Failure::Usage("times must be strictly increasing".into()));
    }
    Ok(())
}

fn json(value: &serde_json::Value) -> String {
    json_text(value)
}

pub fn run(cmd: &Command, out: &Path) -> Result<(), Failure> {
    let params = serde_json::to_value(cmd).expect("flags are plain data");
    let mut m = RunManifest::new(cmd.name(), params);
    match cmd {
        Command::Density { well, quad, grid } => {
            let cfg = well.config()?;
            let q = quad.spec(cfg.a)?;
            let profile = density_profile(&cfg, &grid.points(&cfg)?, &q)?;
            let report = energy_report(&cfg, &q)?;
            m.barrier = Some((cfg.coupling(), cfg.a));
            m.emit(out, "density.csv", &profile.to_csv())?;
            m.emit(out, "energy.json", &json(&report.to_json()))?;
            m.snapshots.push(Snapshot {
                t: 0.0,
                file: "density.csv".into(),
            });
            println!("E_KE = {:.16e}", report.e_ke_closed);
        }
        Command::Energy { well, quad } => {
            let cfg = well.config()?;
            let report = energy_report(&cfg, &quad.spec(cfg.a)?)?;
            m.barrier = Some((cfg.coupling(), cfg.a));
            m.emit(out, "energy.json", &json(&report.to_json()))?;
            println!("E_KE = {:.16e}", report.e_ke_closed);
        }
        Command::Qi { well, quad, eta } => {
            let cfg = well.config()?;
            let q = quad.spec(cfg.a)?;
            let eta = match *eta {
                Eta::Value(v) => v,
                Eta::Auto => {
                    let star = 12.0 * PI * e_ke_closed(&cfg, &q)?.abs();
                    // no threshold exists without negative energy
                    if star > 0.0 {
                        0.5 * star
                    } else {
                        1.0 / cfg.a
                    }
                }
            };
            let report = violation_report(&cfg, eta, &q)?;
            m.barrier = Some((cfg.coupling(), cfg.a));
            m.emit(out, "qi.json", &json(&report.to_json()))?;
            println!("violated = {}", report.violated);
        }
        Command::Modes { well, nk, qmax } => {
            let cfg = well.config()?;
            if *nk == 0 {
                return Err(Failure::Usage("--nk must be positive".into()));
            }
            let top = qmax.unwrap_or(10.0 / cfg.a);
            let k: Vec<f64> = (1..=*nk).map(|i| top * i as f64 / *nk as f64).collect();
            let table = OverlapTable::build(&cfg, &k, &k)?;
            m.barrier = Some((cfg.coupling(), cfg.a));
            m.emit(out, "overlap.csv", &table.to_csv())?;
        }
        Command::Ramp {
            well,
            alpha,
            kmax,
            nk,
            eta,
            rtol,
        } => {
            let cfg = well.config()?;
            let mut rcfg = RampConfig::new(cfg, *alpha)?;
            if let Some(k) = kmax {
                rcfg.k_max = *k;
            }
            if let Some(n) = nk {
                rcfg.n_lin = *n;
            }
            rcfg.eta = *eta;
            rcfg.validate()?;
            let q = QuadratureSpec::for_half_width(cfg.a).with_rel_tol(*rtol);
            let result = ramp_run(&rcfg, &q)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            m.barrier = Some((cfg.coupling(), cfg.a));
            m.emit(out, "ramp.csv", &result.to_csv())?;
            m.emit(out, "ramp.json", &json(&result.to_json()))?;
            println!("delta_E = {:.16e}", result.delta_e);
        }
        Command::Pulses {
            well,
            quad,
            grid,
            t,
            noise,
        } => {
            positive_times(t)?;
            let cfg = well.config()?;
            let q = quad.spec(cfg.a)?;
            let profile = density_profile(&cfg, &grid.points(&cfg)?, &q)?;
            let snaps = t
                .iter()
                .map(|&t| evolve(&profile, t))
                .collect::<qilab::Result<Vec<_>>>()?;
            let noise = noise.unwrap_or(1e-9 * profile.peak());
            let report = quantum_interest_report(&snaps, noise)?;
            m.barrier = Some((cfg.coupling(), cfg.a));
            for (i, s) in snaps.iter().enumerate() {
                let name = format!("pulse_{i}.csv");
                m.emit(out, &name, &s.to_csv())?;
                m.snapshots.push(Snapshot { t: s.t, file: name });
            }
            m.emit(out, "pulses.json", &json(&report.to_json()))?;
            println!("{}", report.verdict());
        }
        Command::Oracle {
            well,
            half_length,
            sites,
            t,
            scheme,
            rtol,
        } => {
            positive_times(t)?;
            let cfg = well.config()?;
            let lcfg = LatticeConfig::new(cfg, *half_length, *sites)?;
            let scheme = match scheme {
                Scheme::Link => GradientScheme::Link,
                Scheme::Central => GradientScheme::Central,
            };
            let densities: Vec<LatticeDensity> = if t.iter().all(|t| *t == 0.0) {
                let d = static_moments(&lcfg)?.density(scheme);
                vec![d; t.len()]
            } else {
                if *sites > DENSE_MAX_SITES {
                    return Err(Failure::Usage(format!(
                        "time evolution keeps full matrices; use M <= {DENSE_MAX_SITES}"
                    )));
                }
                let vacuum = build_vacuum(&lcfg)?;
                t.iter()
                    .map(|&t| Ok(quench_evolve(&vacuum, t)?.kinetic_density(scheme)))
                    .collect::<Result<_, Failure>>()?
            };
            let q = QuadratureSpec::for_half_width(cfg.a).with_rel_tol(*rtol);
            let diag = total_energy_diagnostics(&densities[0], &q)?;
            m.barrier = Some((cfg.coupling(), cfg.a));
            for (i, (d, t)) in densities.iter().zip(t).enumerate() {
                let name = format!("oracle_{i}.csv");
                m.emit(out, &name, &d.to_csv())?;
                m.snapshots.push(Snapshot { t: *t, file: name });
            }
            m.emit(out, "oracle.json", &json(&diag.to_json()))?;
            println!(
                "lattice total {:.6e}, continuum E_KE {:.6e}: {}",
                diag.total_energy,
                diag.e_ke_continuum,
                diag.verdict()
            );
        }
        Command::Compare => {
            m.outputs = compare(out)?;
            if m.outputs.is_empty() {
                return Err(Failure::Usage(format!(
                    "no matching continuum and lattice snapshots in {}",
                    out.display()
                )));
            }
            m.save(out)?;
            return Ok(());
        }
    }
    m.save(out)?;
    if matches!(
        cmd,
        Command::Density { .. } | Command::Pulses { .. } | Command::Oracle { .. }
    ) {
        compare(out)?;
    }
    Ok(())
}
