use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use recoil_core::*;

const LAMBDA_I: f64 = 589e-9;
const KI: f64 = 2.0 * PI / LAMBDA_I;

/// Composite midpoint rule for `P(Δk)e^{iΔk d_p}` over the support, from `pdf` alone.
fn brute_integral(d: &MomentumTransferDistribution, d_p: f64, nodes: usize) -> Complex64 {
    let (lo, hi) = d.support();
    let (lo, hi) = (lo * KI, hi * KI);
    let h = (hi - lo) / nodes as f64;
    (0..nodes)
        .map(|j| {
            let q = lo + (j as f64 + 0.5) * h;
            Complex64::from_polar(d.pdf(q).unwrap(), q * d_p)
        })
        .sum::<Complex64>()
        * h
}

fn check(d: &MomentumTransferDistribution, ratio: f64) -> std::result::Result<(), TestCaseError> {
    let d_p = ratio * LAMBDA_I;
    let oracle = brute_integral(d, d_p, 40000);
    let a = d.analytic_visibility_phase(d_p).unwrap().integral();
    let n = d.numeric_visibility_phase(d_p).unwrap().integral();
    prop_assert!((a - oracle).norm() < 1e-6, "analytic {a} vs oracle {oracle}");
    prop_assert!((n - oracle).norm() < 1e-6, "numeric {n} vs oracle {oracle}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn half_gaussian_matches_brute_force(n in 0.2f64..1.5, upper in any::<bool>(), ratio in 0.0f64..2.0) {
        let eta = if upper { 2.0 } else { 0.0 };
        check(&MomentumTransferDistribution::half_gaussian(n, eta, KI).unwrap(), ratio)?;
    }

    #[test]
    fn general_gaussian_matches_brute_force(n in 0.2f64..1.5, eta in 0.0f64..2.0, ratio in 0.0f64..2.0) {
        check(&MomentumTransferDistribution::general_gaussian(n, eta, KI).unwrap(), ratio)?;
    }

    #[test]
    fn displaced_gaussian_matches_brute_force(n in 0.2f64..1.5, ratio in 0.0f64..2.0) {
        check(&MomentumTransferDistribution::displaced_gaussian(n, KI).unwrap(), ratio)?;
    }

    #[test]
    fn exponential_matches_brute_force(eps in 0.1f64..3.0, ratio in 0.0f64..2.0) {
        check(&MomentumTransferDistribution::exponential(eps, KI).unwrap(), ratio)?;
    }

    #[test]
    fn uniform_matches_brute_force(k1 in 0.0f64..1.5, width in 0.1f64..0.5, ratio in 0.0f64..2.0) {
        check(&MomentumTransferDistribution::uniform(k1, k1 + width, KI).unwrap(), ratio)?;
    }

    #[test]
    fn mandel_matches_brute_force(ratio in 0.0f64..2.0) {
        check(&MomentumTransferDistribution::mandel(KI).unwrap(), ratio)?;
    }

    #[test]
    fn rescaled_flux_leaves_fit_unchanged(scale in 1e-3f64..1e3, phi in -3.0f64..3.0) {
        let dx: Vec<f64> = (0..64).map(|j| j as f64 * 2.0 / 64.0).collect();
        let flux: Vec<f64> = dx.iter().map(|x| 2.0 + 0.5 * (2.0 * PI * x + phi).cos()).collect();
        let a = fit_fringe(&FluxScan { dx3_values: dx.clone(), flux_values: flux.clone() }, 1.0).unwrap();
        let b = fit_fringe(
            &FluxScan { dx3_values: dx, flux_values: flux.iter().map(|f| f * scale).collect() },
            1.0,
        )
        .unwrap();
        prop_assert!((a.contrast() - b.contrast()).abs() < 1e-12);
        prop_assert!((a.phase_rad.unwrap() - b.phase_rad.unwrap()).abs() < 1e-12);
    }
}

#[test]
fn tabulated_mandel_tracks_closed_form() {
    let mandel = MomentumTransferDistribution::mandel(KI).unwrap();
    let nodes: Vec<f64> = (0..=400).map(|j| j as f64 / 200.0).collect();
    let density = nodes.iter().map(|&s| mandel.scaled_density(s).unwrap()).collect();
    let table = MomentumTransferDistribution::tabulated(TabulatedDensity::new(nodes, density).unwrap(), KI).unwrap();
    for ratio in [0.1, 0.437, 1.3] {
        let t = table.numeric_visibility_phase(ratio * LAMBDA_I).unwrap().integral();
        let m = mandel.analytic_visibility_phase(ratio * LAMBDA_I).unwrap().integral();
        assert!((t - m).norm() < 1e-4, "{ratio}: {t} vs {m}");
    }
}
