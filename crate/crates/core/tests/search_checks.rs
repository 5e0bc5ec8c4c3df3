use gprlab_core::asymptotics::{
    goodput_regime_a, goodput_regime_c_with, inflection_regime_a, GammaTerm,
};
use gprlab_core::channel::{rate_thresholds, McConfig};
use gprlab_core::closed_form::{miso_upa_gpr, simo_gpr, siso_gpr};
use gprlab_core::search::{
    appendix_a_inequality_check, conjecture1_scan, exhaustive_best_allocation, maximize_upa_gpr,
    mc_upa_curve, schur_extreme_snr_check, tiso_counterexample, unimodality_check,
    ExhaustiveSearcher, GridMode, Objective, SimplexGrid, SnrRegime, Structure,
};
use gprlab_core::solvers::{miso_upa_optimal_power, simo_optimal_power, solve_nu};
use gprlab_core::{Error, SystemParams};

fn cfg(seed: u64, trials: u64) -> McConfig {
    McConfig::new(seed, trials).unwrap()
}

#[test]
fn miso_maximizer_matches_root() {
    for n_t in 1..=6 {
        let p = SystemParams::from_rho_db(n_t, 1, 10.0, 2.0, 5.0).unwrap();
        let c = maximize_upa_gpr(|x| miso_upa_gpr(x, &p), p.p_max(), 64).unwrap();
        let expected = miso_upa_optimal_power(&p).unwrap();
        assert!((c.p_star - expected).abs() <= 1e-6 * expected, "n_t={n_t}");
        assert!(c.gamma_star > 0.0);
        assert!(!c.multimodal);
        assert!(unimodality_check(&c, 0.0).unwrap().unimodal);
    }
    let p = SystemParams::from_rho_db(2, 1, 10.0, 1.0, 1.0).unwrap();
    let c = maximize_upa_gpr(|x| miso_upa_gpr(x, &p), 1.0, 32).unwrap();
    assert!((c.p_star - p.d() / solve_nu(2).unwrap()).abs() < 1e-6);
}

#[test]
fn simo_and_budget_bound_maximizers_are_nontrivial() {
    let p = SystemParams::from_rho_db(1, 3, 0.0, 1.0, 10.0).unwrap();
    let c = maximize_upa_gpr(|x| simo_gpr(x, &p), p.p_max(), 64).unwrap();
    let expected = simo_optimal_power(&p).unwrap();
    assert!((c.p_star - expected).abs() <= 1e-6 * expected);
    // budget below the interior optimum: the maximizer sits on the budget
    let tight = p.with_p_max(0.05).unwrap();
    let c = maximize_upa_gpr(|x| siso_gpr(x, &tight), 0.05, 32).unwrap();
    assert!((c.p_star - 0.05).abs() < 1e-9 && c.gamma_star > 0.0);
}

#[test]
fn sampled_two_by_two_curve() {
    let p = SystemParams::from_rho_db(2, 2, 10.0, 1.0, 1.0).unwrap();
    let m = mc_upa_curve(&p, &cfg(21, 100_000), 64).unwrap();
    let th = rate_thresholds(&[1.0, 1.0], &p, &cfg(22, 100_000)).unwrap();
    let fresh = th.gpr(m.curve.p_star, p.rate());
    let own_se = m.max_std_error();
    assert!((fresh.mean - m.curve.gamma_star).abs() < 4.0 * fresh.std_error.hypot(own_se));
    // flat top: p* lies within one grid step of the points inside
    // the noise band of the peak
    let band = 4.0 * own_se;
    let g = &m.curve.grid;
    let top: Vec<usize> = (0..g.len())
        .filter(|&i| g[i].1 >= m.curve.gamma_star - band)
        .collect();
    let lo = g[top[0].saturating_sub(1)].0;
    let hi = g[(*top.last().unwrap() + 1).min(g.len() - 1)].0;
    assert!(
        lo <= m.curve.p_star && m.curve.p_star <= hi,
        "{lo} {} {hi}",
        m.curve.p_star
    );
    assert!(unimodality_check(&m.curve, band).unwrap().unimodal);
}

#[test]
fn exhaustive_structures_match_figure_regimes() {
    let base = SystemParams::from_rho_db(2, 2, 3.0, 1.0, 1.0).unwrap();
    let c = cfg(31, 100_000);
    let low = SimplexGrid::new(2, 32, 0.05, GridMode::Full).unwrap();
    let best = exhaustive_best_allocation(&base, Objective::SuccessProbability, &low, &c).unwrap();
    assert_eq!(
        Structure::classify(&best.allocation),
        Structure::Beamforming
    );
    let high = SimplexGrid::new(2, 32, 0.5, GridMode::Full).unwrap();
    let best = exhaustive_best_allocation(&base, Objective::SuccessProbability, &high, &c).unwrap();
    assert_eq!(Structure::classify(&best.allocation), Structure::Upa);
    // canonical order: the returned vector is sorted
    let sorted = best.allocation.sorted_desc();
    assert_eq!(best.allocation.powers(), sorted.as_slice());
}

#[test]
fn exhaustive_single_antenna_is_one_dimensional() {
    let p = SystemParams::from_rho_db(1, 1, 10.0, 1.0, 1.0).unwrap();
    let g = SimplexGrid::new(1, 64, 1.0, GridMode::Interior).unwrap();
    let best = exhaustive_best_allocation(&p, Objective::Gpr, &g, &cfg(32, 100_000)).unwrap();
    // grid step 1/64 around the optimum p = c = 0.1
    assert!((best.allocation.total() - 0.1).abs() <= 2.0 / 64.0);
    assert!(best
        .value
        .agrees_with(siso_gpr(best.allocation.total(), &p).unwrap(), 4.0));
}

#[test]
fn conjecture_scan_on_reference_case() {
    let p = SystemParams::from_rho_db(2, 2, 3.0, 1.0, 0.5).unwrap();
    let bars: Vec<f64> = (1..=25).map(|i| 0.02 * i as f64).collect();
    let grid = SimplexGrid::new(2, 32, 0.5, GridMode::Interior).unwrap();
    let r = conjecture1_scan(&p, &bars, &grid, &cfg(41, 100_000)).unwrap();
    let t = r.threshold_estimate.unwrap();
    assert!((t - 0.16).abs() <= 0.03, "threshold {t}");
    assert!(r.violations.is_empty());
    assert_eq!(
        r.outage_regimes.first().unwrap().structure,
        Structure::Beamforming
    );
    assert_eq!(r.outage_regimes.last().unwrap().structure, Structure::Upa);
    for w in r.regimes.windows(2) {
        assert!(w[0].hi < w[1].lo);
    }
    // beyond saturation the GPR-optimal total stops growing
    let tail: Vec<f64> = r
        .points
        .iter()
        .filter(|x| x.p_max >= 0.4)
        .map(|x| x.gpr_best.allocation.total())
        .collect();
    assert!(tail.iter().all(|&x| x < 0.36), "{tail:?}");
}

#[test]
fn tiso_witness() {
    let p = SystemParams::new(2, 1, 0.1, 3.0, 1.0).unwrap();
    let w = tiso_counterexample(&p).unwrap();
    assert!(w.gamma_q0 > w.gamma_mid);
    assert!((w.gamma_q0 - w.gamma_0q).abs() <= 1e-12 * w.gamma_q0);
    assert!(!w.midpoint_in_level_set);
    assert!(tiso_counterexample(&p.with_antennas(3, 1).unwrap()).is_err());
}

#[test]
fn schur_extremes_closed_form() {
    let grid = SimplexGrid::new(2, 32, 1.0, GridMode::Full).unwrap();
    let c = cfg(51, 1000);
    let low = SystemParams::from_rho_db(2, 1, -10.0, 1.0, 1.0).unwrap();
    let v = schur_extreme_snr_check(&low, SnrRegime::Low, &grid, &c).unwrap();
    assert!(v.closed_form && v.holds && v.pairs_checked > 0);
    assert_eq!(v.argmax_structure, Structure::Beamforming);
    let high = SystemParams::from_rho_db(2, 1, 40.0, 1.0, 1.0).unwrap();
    let v = schur_extreme_snr_check(&high, SnrRegime::High, &grid, &c).unwrap();
    assert!(v.holds);
    assert_eq!(v.argmax_structure, Structure::Upa);
    assert!(matches!(
        schur_extreme_snr_check(&high, SnrRegime::Low, &grid, &c),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn schur_extremes_sampled() {
    let grid = SimplexGrid::new(3, 12, 1.0, GridMode::Full).unwrap();
    let c = cfg(52, 20_000);
    let high = SystemParams::from_rho_db(3, 2, 30.0, 1.0, 1.0).unwrap();
    let v = schur_extreme_snr_check(&high, SnrRegime::High, &grid, &c).unwrap();
    assert!(!v.closed_form && v.holds, "{:?}", v.violations);
    let low = SystemParams::from_rho_db(3, 2, -10.0, 1.0, 1.0).unwrap();
    let v = schur_extreme_snr_check(&low, SnrRegime::Low, &grid, &c).unwrap();
    assert!(v.holds, "{:?}", v.violations);
    assert_eq!(v.argmax_structure, Structure::Beamforming);
}

#[test]
fn appendix_a_on_random_instances() {
    for (n_t, n_r) in [(2, 2), (3, 1), (1, 3), (4, 4)] {
        let p = SystemParams::from_rho_db(n_t, n_r, 10.0, 1.0, 2.0).unwrap();
        let v = appendix_a_inequality_check(1000, &p, &cfg(61, 1)).unwrap();
        assert!(v.holds && v.max_e <= 1e-9, "{v:?}");
    }
}

#[test]
fn permuted_allocations_share_outage_statistics() {
    let p = SystemParams::from_rho_db(3, 2, 5.0, 1.0, 1.0).unwrap();
    let s = ExhaustiveSearcher::new(&p, 8, &cfg(71, 1)).unwrap();
    assert_eq!(s.resolution(), 8);
    let a = rate_thresholds(&[0.6, 0.3, 0.1], &p, &cfg(72, 50_000)).unwrap();
    let b = rate_thresholds(&[0.1, 0.6, 0.3], &p, &cfg(73, 50_000)).unwrap();
    for total in [0.1, 0.3, 0.6] {
        let (x, y) = (a.outage(total), b.outage(total));
        assert!((x.mean - y.mean).abs() < 4.0 * x.std_error.hypot(y.std_error));
    }
}

#[test]
fn regime_a_inflection_matches_second_difference() {
    let p = SystemParams::from_rho_db(2, 64, 10.0, 1.0, 1.0).unwrap();
    let target = inflection_regime_a(&p);
    let step = 5e-5;
    let grid: Vec<f64> = (0..200).map(|i| i as f64 * step).collect();
    let v: Vec<f64> = grid
        .iter()
        .map(|&x| goodput_regime_a(x, &p).unwrap())
        .collect();
    let d2: Vec<f64> = v.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let flip = d2
        .windows(2)
        .position(|w| w[0] > 0.0 && w[1] <= 0.0)
        .unwrap();
    let located = grid[flip + 1];
    assert!(
        (located - target).abs() <= step,
        "located {located} formula {target}"
    );
}

#[test]
fn regime_c_fidelity_needs_unit_consistent_gamma() {
    let p = SystemParams::from_rho_db(8, 8, 10.0, 1.0, 1.0).unwrap();
    let th = rate_thresholds(&[1.0; 8], &p, &cfg(81, 100_000)).unwrap();
    let worst = |term| {
        gprlab_core::search::log_grid(1e-3, 0.1, 20)
            .into_iter()
            .map(|x| {
                let mc = p.rate() * th.success_probability(x).mean;
                (goodput_regime_c_with(x, &p, 1.0, term).unwrap() - mc).abs()
            })
            .fold(0.0, f64::max)
    };
    assert!(worst(GammaTerm::Log2e) < 0.05 * p.rate());
    assert!(worst(GammaTerm::Verbatim) > 0.05 * p.rate());
}
