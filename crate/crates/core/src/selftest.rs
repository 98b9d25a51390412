//! Quick built-in checks, runnable from the command line.
//!
//! Each check compares an implementation path against an independent closed
//! form or identity at small sample sizes (sub-second in release builds).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::channel::{db_to_linear, FadingModel, LinkBudget, ShadowedRician, ShadowedRicianParams, SPEED_OF_LIGHT_M_S};
use crate::formation::{build_cluster, FormationKind};
use crate::fronthaul::{advise, split_catalog, SplitName};
use crate::geometry::{sample_cap_uniform, sample_sphere_bpp, BodyConstants, CapSpec, UnitDirection};
use crate::montecarlo::{run_experiment, simulate, Execution, ExperimentConfig};
use crate::transmission::{
    desired_power_dps, desired_power_jt_egt, desired_power_jt_mrt, MrtPowerBudget, Scheme, SchemeConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        single_link_snr(),
        fading_moments(),
        combiner_identities(),
        fronthaul_golden(),
        geometry_sampling(),
        schedule_independence(),
    ]
}

/// Mean and standard error of the mean.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn single_link_snr() -> CheckOutcome {
    let b = LinkBudget::default();
    let lambda = SPEED_OF_LIGHT_M_S / b.carrier_hz;
    let rx = db_to_linear(b.eirp_density_dbw_per_hz)
        * b.bandwidth_hz
        * (lambda / (4.0 * std::f64::consts::PI)).powi(2)
        * 600e3f64.powf(-b.pathloss_exponent);
    let noise = db_to_linear(b.noise_density_dbm_per_hz - 30.0) * b.bandwidth_hz;
    let expected = rx / noise;
    let cfg = ExperimentConfig {
        n_satellites: 1,
        scheme: SchemeConfig::new(Scheme::Unclustered),
        fading: FadingModel::Fixed(1.0),
        pin_first_at_zenith: true,
        n_drops: 50,
        ..Default::default()
    };
    match run_experiment(&cfg, Execution::Sequential) {
        Ok(r) => {
            let got = (r.capacity.value).exp2() - 1.0;
            let rel = (got - expected).abs() / expected;
            outcome(
                "single-link SNR",
                rel < 0.01 && r.capacity.ci95_halfwidth == 0.0,
                format!("SNR {got:.3} vs closed form {expected:.3} (rel err {rel:.1e})"),
            )
        }
        Err(e) => outcome("single-link SNR", false, e.to_string()),
    }
}

fn fading_moments() -> CheckOutcome {
    let p = ShadowedRicianParams::default();
    let s = ShadowedRician::new(&p).expect("default fading parameters are valid");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let draws: Vec<f64> = (0..200_000).map(|_| s.sample(&mut rng)).collect();
    let squares: Vec<f64> = draws.iter().map(|x| x * x).collect();
    let (m1, se1) = mean_se(&draws);
    let (m2, se2) = mean_se(&squares);
    let z1 = (m1 - p.mean_power()) / se1;
    let z2 = (m2 - p.second_moment()) / se2;
    outcome(
        "shadowed-Rician moments",
        z1.abs() < 3.0 && z2.abs() < 3.0,
        format!("mean z={z1:.2}, second moment z={z2:.2}"),
    )
}

fn combiner_identities() -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0b);
    let mut failures = 0;
    for _ in 0..1000 {
        let k = rng.random_range(1..12);
        let g: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 10.0).collect();
        let max = g.iter().copied().fold(0.0, f64::max);
        let sum: f64 = g.iter().sum();
        let dps = desired_power_dps(&g).unwrap_or(f64::NAN);
        let egt = desired_power_jt_egt(&g).unwrap_or(f64::NAN);
        let mrt = desired_power_jt_mrt(&g, MrtPowerBudget::PerSatellite).unwrap_or(f64::NAN);
        let tol = 1e-12 * egt.max(1.0);
        if dps != max || egt + tol < sum || sum + tol < max || (mrt - egt).abs() > tol {
            failures += 1;
        }
    }
    outcome("combiner identities", failures == 0, format!("{failures} of 1000 random vectors violated an identity"))
}

fn fronthaul_golden() -> CheckOutcome {
    let rows: Vec<(f64, f64, f64)> =
        split_catalog().iter().map(|o| (o.ul_rate_gbps, o.dl_rate_gbps, o.latency_high_ms)).collect();
    let table_ok = rows == [(86.1, 86.1, 0.1), (3.0, 4.0, 1.0), (3.0, 4.0, 10.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cluster =
        build_cluster(UnitDirection::north_pole(), 9, FormationKind::Circular, 1f64.to_radians(), 0.0, &mut rng);
    let advice = cluster.and_then(|c| advise(&c, &BodyConstants::default(), 100.0, 100.0, 0.0, 1.0));
    match advice {
        Ok(r) => outcome(
            "fronthaul table and advice",
            table_ok && r.feasible() == [SplitName::IntraMac, SplitName::PdcpRlc],
            format!("latency {:.3} ms, feasible {:?}", r.isl.one_way_latency_ms, r.feasible()),
        ),
        Err(e) => outcome("fronthaul table and advice", false, e.to_string()),
    }
}

fn geometry_sampling() -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0);
    let n = 100_000;
    let pts = sample_sphere_bpp(n, &mut rng);
    let means = [0, 1, 2].map(|i| pts.iter().map(|p| p.as_vector()[i]).sum::<f64>() / n as f64);
    let theta_c = 1f64.to_radians();
    let cap = CapSpec::new(UnitDirection::new(0.3, 0.4, 0.5).expect("nonzero"), theta_c).expect("valid cap");
    let inside = sample_cap_uniform(&cap, n, &mut rng).iter().all(|d| cap.center.angle_to(d) <= theta_c + 1e-12);
    // 5 standard errors of a uniform coordinate (sd 1/sqrt(3)).
    let bound = 5.0 / (3.0 * n as f64).sqrt();
    outcome(
        "sphere and cap sampling",
        inside && means.iter().all(|m| m.abs() < bound),
        format!("coordinate means {means:.4?}, cap containment {inside}"),
    )
}

fn schedule_independence() -> CheckOutcome {
    let cfg = ExperimentConfig {
        n_satellites: 2000,
        n_drops: 64,
        scheme: SchemeConfig::new(Scheme::Dps),
        ..Default::default()
    };
    let a = simulate(&cfg, Execution::Sequential);
    let b = simulate(&cfg, Execution::Parallel { workers: Some(4) });
    match (a, b) {
        (Ok(a), Ok(b)) => outcome("sequential/parallel agreement", a == b, format!("{} drops compared", a.len())),
        (Err(e), _) | (_, Err(e)) => outcome("sequential/parallel agreement", false, e.to_string()),
    }
}
