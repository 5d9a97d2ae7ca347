//! Acceptance run: one PASS/FAIL line per criterion, with the measured
//! numbers underneath. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qilab::density::{
    appendix_identity_check, closed_integrand, default_grid, density_at, density_profile,
    direct_integrand, e_ke_closed, e_ke_direct, e_ke_profile,
};
use qilab::lattice::{
    box_phi2_shift, build_vacuum, line_phi2_shift, quench_evolve, static_moments,
    total_energy_diagnostics, GradientScheme, LatticeConfig, LatticeDensity,
};
use qilab::pulses::evolve;
use qilab::ramp::{oscillation_combination, ramp_run, RampConfig};
use qilab::sampling::{
    violation_report, xi_min_exponential, xi_min_numeric, SamplingFunction,
};
use qilab::{QuadratureSpec, WellConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, detail: Vec::new() }
    }

    fn check(&mut self, label: &str, ok: bool, info: String) {
        self.pass &= ok;
        let tag = if ok { "ok  " } else { "FAIL" };
        self.detail.push(format!("{tag} {label}: {info}"));
    }

    fn note(&mut self, info: String) {
        self.detail.push(format!("     {info}"));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn unit() -> WellConfig {
    WellConfig::new(1.0, 1.0).unwrap()
}

fn quad(a: f64) -> QuadratureSpec {
    QuadratureSpec::for_half_width(a)
}

fn exterior_vanishing() -> Outcome {
    let mut o = Outcome::new();
    let cfg = unit();
    let q = quad(1.0);
    let inside = density_profile(&cfg, &default_grid(&cfg, 201, 1.0).unwrap(), &q).unwrap();
    let peak = inside.peak();
    let worst = (1..=50)
        .map(|i| {
            let x = 1.0 + 3.0 * i as f64 / 50.0;
            let x = if i % 2 == 0 { x } else { -x };
            density_at(&cfg, x, &q).unwrap().abs()
        })
        .fold(0.0, f64::max);
    o.check(
        "max |T00R| over 50 exterior points < 1e-8 x peak",
        worst < 1e-8 * peak,
        format!("{worst:.3e} vs peak {peak:.6e}"),
    );
    o
}

fn negative_total() -> Outcome {
    let mut o = Outcome::new();
    let levels: Vec<f64> = (0..5).map(|i| 0.1 * 100f64.powf(i as f64 / 4.0)).collect();
    let mut largest = f64::NEG_INFINITY;
    for &v0 in &levels {
        for &a in &levels {
            let e = e_ke_closed(&WellConfig::new(v0, a).unwrap(), &quad(a)).unwrap();
            largest = largest.max(e);
        }
    }
    o.check("E_KE < 0 on the 5x5 grid over [0.1, 10]^2", largest < 0.0, format!("largest {largest:.6e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut smallest = f64::INFINITY;
    for _ in 0..1000 {
        let cfg = WellConfig::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
        let k = 10f64.powf(rng.gen_range(-4.0..3.0));
        smallest = smallest.min(closed_integrand(&cfg, k));
    }
    o.check("closed integrand >= 0 at 1000 random kappa", smallest >= 0.0, format!("smallest {smallest:.3e}"));
    o
}

fn integrand_identity() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cfg = WellConfig::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
        let k = 10f64.powf(rng.gen_range(-3.0..2.0));
        let scale = direct_integrand(&cfg, k).abs();
        worst = worst.max(appendix_identity_check(&cfg, k).unwrap() / scale);
    }
    o.check("direct vs closed integrand at 100 random points <= 1e-12", worst <= 1e-12, format!("worst {worst:.3e}"));
    o
}

fn route_agreement() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_direct, mut worst_profile) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let a = rng.gen_range(0.1..10.0);
        let cfg = WellConfig::new(rng.gen_range(0.1..10.0), a).unwrap();
        let q = quad(a);
        let c = e_ke_closed(&cfg, &q).unwrap();
        worst_direct = worst_direct.max(rel(e_ke_direct(&cfg, &q).unwrap(), c));
        worst_profile = worst_profile.max(rel(e_ke_profile(&cfg, &q).unwrap(), c));
    }
    o.check("closed vs direct <= 1e-6", worst_direct <= 1e-6, format!("worst {worst_direct:.3e}"));
    o.check("closed vs profile <= 1e-3", worst_profile <= 1e-3, format!("worst {worst_profile:.3e}"));
    o
}

fn bound_closed_form() -> Outcome {
    let mut o = Outcome::new();
    let q = QuadratureSpec::default().with_rel_tol(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (eta, a) = (rng.gen_range(0.05..20.0), rng.gen_range(0.05..10.0));
        let s = SamplingFunction::exponential_plateau(eta, a).unwrap();
        worst = worst.max(rel(xi_min_numeric(&s, &q).unwrap(), xi_min_exponential(eta, a).unwrap()));
    }
    o.check("plateau numeric vs closed form <= 1e-8", worst <= 1e-8, format!("worst {worst:.3e}"));
    let mut worst = 0.0f64;
    for sigma in [0.05, 0.3, 1.0, 4.0] {
        let g = SamplingFunction::gaussian(sigma).unwrap();
        worst = worst.max(rel(xi_min_numeric(&g, &q).unwrap(), -1.0 / (24.0 * PI * sigma * sigma)));
    }
    o.check("Gaussian vs -1/(24 pi sigma^2) <= 1e-8", worst <= 1e-8, format!("worst {worst:.3e}"));
    o
}

fn violation_threshold() -> Outcome {
    let mut o = Outcome::new();
    let cfg = unit();
    let q = quad(1.0);
    let e = e_ke_closed(&cfg, &q).unwrap();
    let star = 12.0 * PI * e.abs();
    let below = violation_report(&cfg, 0.5 * star, &q).unwrap();
    let above = violation_report(&cfg, 2.0 * star, &q).unwrap();
    o.check("violated at eta*/2", below.violated, format!("lhs {:.6e} < xi {:.6e}", below.lhs, below.xi_min));
    o.check("not violated at 2 eta*", !above.violated, format!("lhs {:.6e} >= xi {:.6e}", above.lhs, above.xi_min));
    let mut worst = 0.0f64;
    for r in [&below, &above] {
        let n = r.eta / (2.0 * (cfg.a * r.eta + 1.0));
        worst = worst.max(rel(r.lhs, e * n));
    }
    o.check("lhs = E_KE N <= 1e-10", worst <= 1e-10, format!("worst {worst:.3e}"));
    o.note(format!("eta* = {star:.12}"));
    o
}

fn ramp_signs() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let alpha = 10f64.powf(rng.gen_range(-2.0..2.0));
        let (k, q) = (10f64.powf(rng.gen_range(-3.0..2.0)), 10f64.powf(rng.gen_range(-3.0..2.0)));
        let t = rng.gen_range(0.0..1.0) / alpha;
        let w = k + q;
        let lhs = oscillation_combination(alpha, k, q, t).unwrap();
        let rhs = -2.0 * alpha / (w * w) * (1.0 - (w * t).cos());
        // the phase wt itself carries an absolute rounding error of about ε·wt
        let scale = 2.0 * alpha / (w * w) * (w * t).max(1.0);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    o.check("oscillation identity <= 1e-14", worst <= 1e-14, format!("worst {worst:.3e} (scaled by max(1, wt))"));
    let q = quad(1.0);
    let run = |v0: f64| ramp_run(&RampConfig::new(WellConfig::new(v0, 1.0).unwrap(), 1.0).unwrap(), &q).unwrap();
    let r = run(0.1);
    let dmin = r.d_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let emax = r.dedt.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    o.check("D(t) >= 0", dmin >= 0.0, format!("min {dmin:.3e}"));
    o.check("dE_K/dt <= 0", emax <= 0.0, format!("max {emax:.3e}"));
    o.check("Delta E_K <= 0", r.delta_e <= 0.0, format!("{:.10e}", r.delta_e));
    let half = run(0.05);
    let ratio = r.delta_e / half.delta_e;
    o.check(
        "Delta E_K(0.1)/Delta E_K(0.05) within 10% of 4",
        (ratio / 4.0 - 1.0).abs() <= 0.1,
        format!("ratio {ratio:.4}"),
    );
    o.note("the overlap weight ~ 1/(kq) makes the small-momentum region".into());
    o.note("contribute V0^2 ln(1/(a sqrt V0)); the ratio tends to 4 only slowly".into());
    o
}

fn pulse_evolution() -> Outcome {
    let mut o = Outcome::new();
    let cfg = unit();
    let q = quad(1.0);
    let e = e_ke_closed(&cfg, &q).unwrap();
    let profile = density_profile(&cfg, &default_grid(&cfg, 401, 1.5).unwrap(), &q).unwrap();
    let s = evolve(&profile, 3.0).unwrap();
    let disjoint = s
        .grid
        .iter()
        .zip(&s.values)
        .all(|(x, v)| x.abs() >= 2.0 - 1e-9 || *v == 0.0);
    o.check("pulses disjoint at t = 3a", disjoint, "no support in |x| < 2a".into());
    let worst = rel(s.left_energy, 0.5 * e).max(rel(s.right_energy, 0.5 * e));
    o.check(
        "each pulse carries E_KE/2 within 1e-3",
        worst <= 1e-3,
        format!("left {:.8e}, right {:.8e}, E_KE/2 {:.8e}", s.left_energy, s.right_energy, 0.5 * e),
    );
    let mut worst = 0.0f64;
    for t in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0] {
        worst = worst.max(rel(evolve(&profile, t).unwrap().total_energy(), e));
    }
    o.check("total conserved at every sampled t within 1e-3", worst <= 1e-3, format!("worst {worst:.3e}"));
    o
}

fn bulk_discrepancy(d: &LatticeDensity, cont: &[(f64, f64)]) -> f64 {
    cont.iter().map(|(x, c)| rel(d.nearest(*x), *c)).fold(0.0, f64::max)
}

fn oracle_agreement() -> Outcome {
    let mut o = Outcome::new();
    let cfg = unit();
    let q = quad(1.0);
    let boxed = box_phi2_shift(&cfg, 40.0, &q).unwrap();
    let bulk: Vec<(f64, f64)> = (-4..=4)
        .map(|i| {
            let x = 0.2 * i as f64;
            (x, density_at(&cfg, x, &q).unwrap())
        })
        .collect();
    let mut phi_err = Vec::new();
    let mut bulk_err = Vec::new();
    for m in [8192, 16384] {
        let l = LatticeConfig::new(cfg, 40.0, m).unwrap();
        let s = static_moments(&l).unwrap();
        phi_err.push(rel(s.phi2_shift(l.center()), boxed));
        bulk_err.push(bulk_discrepancy(&s.density(GradientScheme::Link), &bulk));
        if m == 16384 {
            o.note(format!(
                "lattice phi^2 shift {:.10}, box continuum {:.10}",
                s.phi2_shift(l.center()),
                boxed
            ));
            o.note(format!(
                "lattice T00(0) {:.8}, continuum {:.8}, difference {:.8} (1/4pi = {:.8})",
                s.density(GradientScheme::Link).nearest(0.0),
                bulk[4].1,
                s.density(GradientScheme::Link).nearest(0.0) - bulk[4].1,
                1.0 / (4.0 * PI)
            ));
        }
    }
    o.check("phi^2 shift within 1% at (40, 16384)", phi_err[1] <= 1e-2, format!("{:.3e}", phi_err[1]));
    let line = line_phi2_shift(&cfg, PI / 80.0, &q).unwrap();
    o.note(format!(
        "the infinite-line integral diverges like ln(1/kappa_min)/2pi; cut at pi/2L it gives {line:.6}"
    ));
    o.check("bulk interior density within 5%", bulk_err[1] <= 0.05, format!("worst {:.3e}", bulk_err[1]));
    let phi_ratio = phi_err[0] / phi_err[1];
    let bulk_ratio = bulk_err[0] / bulk_err[1];
    o.check("phi^2 discrepancy halves from M = 8192 to 16384", phi_ratio >= 2.0, format!("ratio {phi_ratio:.3}"));
    o.check("bulk discrepancy halves from M = 8192 to 16384", bulk_ratio >= 2.0, format!("ratio {bulk_ratio:.3}"));
    o.note("the lattice sums modes over real momenta and keeps lambda V/4pi inside the barrier".into());
    o.note("that the imaginary-axis integral drops; the offset does not shrink with h".into());
    o
}

fn quench_continuity() -> Outcome {
    let mut o = Outcome::new();
    let cfg = unit();
    let q = quad(1.0);
    let l = LatticeConfig::new(cfg, 10.0, 2048).unwrap();
    let vacuum = build_vacuum(&l).unwrap();
    let before = vacuum.kinetic_density(GradientScheme::Link);
    let after = quench_evolve(&vacuum, 0.0).unwrap().kinetic_density(GradientScheme::Link);
    let peak = before.t00.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let jump = before.t00.iter().zip(&after.t00).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    o.check("density at 0+ equals 0-", jump <= 4.0 * f64::EPSILON * peak, format!("max jump {jump:.3e}"));
    let e0 = vacuum.free_energy();
    let mut worst = 0.0f64;
    let mut at_2a = None;
    for t in [0.5, 1.0, 2.0, 4.0] {
        let s = quench_evolve(&vacuum, t).unwrap();
        worst = worst.max(rel(s.free_energy(), e0));
        if t == 2.0 {
            at_2a = Some(s.kinetic_density(GradientScheme::Link));
        }
    }
    o.check("free energy conserved to 1e-10", worst <= 1e-10, format!("worst {worst:.3e}"));
    let lat = at_2a.unwrap();
    let profile = density_profile(&cfg, &default_grid(&cfg, 401, 1.5).unwrap(), &q).unwrap();
    let cont = evolve(&profile, 2.0).unwrap();
    let cont_peak = cont.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let own = evolve_lattice_profile(&before, 2.0);
    let away = |x: f64| [1.0, 3.0].iter().all(|e| (x.abs() - e).abs() > 0.1) && x.abs() < 3.0;
    let interp = qilab::pulses::Pchip::new(&cont.grid, &cont.values).unwrap();
    let (mut worst, mut worst_own) = (0.0f64, 0.0f64);
    let own_peak = own.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (j, (x, v)) in lat.x.iter().zip(&lat.t00).enumerate() {
        if away(*x) {
            worst = worst.max((v - interp.eval(*x)).abs());
            worst_own = worst_own.max((v - own[j]).abs());
        }
    }
    o.check(
        "t = 2a lattice vs evolved continuum within 10% of peak",
        worst <= 0.1 * cont_peak,
        format!("max difference {worst:.4e}, continuum peak {cont_peak:.4e}"),
    );
    o.note(format!(
        "against free propagation of its own t = 0 profile the lattice is within {:.1}% of peak",
        100.0 * worst_own / own_peak
    ));
    o
}

// ½(P(x + t) + P(x − t)) of a lattice profile, linear between sites
fn evolve_lattice_profile(d: &LatticeDensity, t: f64) -> Vec<f64> {
    let h = d.lcfg.spacing();
    let at = |x: f64| {
        let s = (x + d.lcfg.half_length) / h - 1.0;
        if s < 0.0 || s > (d.t00.len() - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(d.t00.len() - 2);
        let f = s - i as f64;
        d.t00[i] * (1.0 - f) + d.t00[i + 1] * f
    };
    d.x.iter().map(|x| 0.5 * (at(x + t) + at(x - t))).collect()
}

fn tension_probe() -> Outcome {
    let mut o = Outcome::new();
    let cfg = unit();
    let q = quad(1.0);
    let l = LatticeConfig::new(cfg, 40.0, 16384).unwrap();
    let report = || {
        let d = static_moments(&l).unwrap().density(GradientScheme::Link);
        total_energy_diagnostics(&d, &q).map(|r| qilab::io::json_text(&r.to_json()))
    };
    let first = report();
    let second = report();
    let ok = matches!((&first, &second), (Ok(a), Ok(b)) if a == b);
    o.check("diagnostics generated and identical on rerun", ok, "two runs compared byte for byte".into());
    if let Ok(text) = first {
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let has = ["total_energy", "e_ke_continuum"].iter().all(|k| v.get(k).is_some_and(|x| x.is_f64()));
        o.check("report carries lattice total and continuum E_KE", has, text.replace('\n', " "));
    }
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exterior vanishing", exterior_vanishing),
        ("negative total kinetic energy", negative_total),
        ("integrand identity", integrand_identity),
        ("route agreement", route_agreement),
        ("bound closed form", bound_closed_form),
        ("violation threshold", violation_threshold),
        ("ramp signs", ramp_signs),
        ("pulse evolution", pulse_evolution),
        ("oracle-continuum agreement", oracle_agreement),
        ("quench continuity", quench_continuity),
        ("energy tension probe", tension_probe),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {:>2} {}: {name} ({secs:.1} s)", i + 1, if o.pass { "PASS" } else { "FAIL" });
        for line in &o.detail {
            println!("    {line}");
        }
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
