use gprlab_core::asymptotics::{goodput_regime_a, goodput_regime_b, goodput_regime_c};
use gprlab_core::channel::{mutual_information, outage_tally, sample_channel};
use gprlab_core::closed_form::{erlang_cdf, erlang_sf, miso_upa_gpr, subset_upa_gpr};
use gprlab_core::search::{appendix_a_quantity, log_grid};
use gprlab_core::solvers::{miso_optimal_precoder, phi, solve_c_thresholds, solve_nu};
use gprlab_core::{majorizes, Majorization, PowerAllocation, SystemParams};
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(0.0f64..1.0, n), 0.1f64..10.0).prop_filter_map(
        "nonzero",
        |(w, total)| {
            let s: f64 = w.iter().sum();
            (s > 1e-3).then(|| (w.iter().map(|x| x * total / s).collect(), total))
        },
    )
}

fn alloc(v: Vec<f64>) -> PowerAllocation {
    PowerAllocation::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extremal_vectors_bound_the_simplex((p, total) in (2usize..7).prop_flat_map(simplex)) {
        let n = p.len();
        let bf = PowerAllocation::beamforming(n, total, 0).unwrap();
        let upa = PowerAllocation::uniform(n, total).unwrap();
        let p = alloc(p);
        prop_assert_eq!(majorizes(&bf, &p).unwrap(), Majorization::Yes);
        prop_assert_eq!(majorizes(&p, &upa).unwrap(), Majorization::Yes);
        prop_assert_eq!(majorizes(&p, &p).unwrap(), Majorization::Yes);
    }

    #[test]
    fn majorization_is_transitive(
        (a, _t) in simplex(4),
        mix1 in 0.0f64..1.0,
        mix2 in 0.0f64..1.0,
    ) {
        // moving toward uniform along a segment yields a chain a > b > c
        let total: f64 = a.iter().sum();
        let mean = total / 4.0;
        let toward = |v: &[f64], t: f64| v.iter().map(|x| x + t * (mean - x)).collect::<Vec<f64>>();
        let b = toward(&a, mix1);
        let c = toward(&b, mix2);
        let (a, b, c) = (alloc(a), alloc(b), alloc(c));
        prop_assert_eq!(majorizes(&a, &b).unwrap(), Majorization::Yes);
        prop_assert_eq!(majorizes(&b, &c).unwrap(), Majorization::Yes);
        prop_assert_eq!(majorizes(&a, &c).unwrap(), Majorization::Yes);
    }

    #[test]
    fn erlang_cdf_is_monotone(k in 1usize..40, x in 0.0f64..200.0, dx in 0.0f64..5.0) {
        let lo = erlang_cdf(k, x);
        prop_assert!(lo <= erlang_cdf(k, x + dx));
        prop_assert!(erlang_cdf(k + 1, x) <= lo);
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!((lo + erlang_sf(k, x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mutual_information_grows_with_each_power(
        seed in any::<u64>(),
        (n_t, n_r) in (1usize..5, 1usize..5),
        bump in 1e-6f64..1.0,
        which in 0usize..4,
    ) {
        let p = SystemParams::from_rho_db(n_t, n_r, 10.0, 1.0, 10.0).unwrap();
        let h = sample_channel(&p, seed, 0);
        let base: Vec<f64> = (0..n_t).map(|i| 0.1 * (i as f64 + 1.0)).collect();
        let mut more = base.clone();
        more[which % n_t] += bump;
        let a = mutual_information(&h, &alloc(base), &p).unwrap();
        let b = mutual_information(&h, &alloc(more), &p).unwrap();
        prop_assert!(b >= a - 1e-12 * a.max(1.0));
    }

    #[test]
    fn tallies_merge_across_any_split(seed in any::<u64>(), split in 0u64..400) {
        let p = SystemParams::from_rho_db(2, 2, 3.0, 1.0, 1.0).unwrap();
        let a = PowerAllocation::uniform(2, 0.3).unwrap();
        let whole = outage_tally(&a, &p, seed, 0..400).unwrap();
        let left = outage_tally(&a, &p, seed, 0..split).unwrap();
        let right = outage_tally(&a, &p, seed, split..400).unwrap();
        prop_assert_eq!(whole, left.merge(right));
    }

    #[test]
    fn appendix_a_inequality(seed in any::<u64>(), (n_t, n_r) in (1usize..5, 1usize..5), raw in prop::collection::vec(0.0f64..5.0, 4)) {
        let p = SystemParams::from_rho_db(n_t, n_r, 10.0, 1.0, 5.0).unwrap();
        let h = sample_channel(&p, seed, 1);
        prop_assert!(appendix_a_quantity(&h, &raw[..n_t], p.rho()) <= 1e-9);
    }

    #[test]
    fn miso_upa_two_formula_paths(n_t in 1usize..12, x in 0.01f64..60.0, rate in 0.1f64..4.0) {
        // x = d / p; compare with the written-out sum R e^{-x} sum_i x^i / i! / p
        let params = SystemParams::new(n_t, 1, 0.3, rate, 1.0).unwrap();
        let p = params.d() / x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..n_t {
            term *= x / i as f64;
            sum += term;
        }
        let written = rate * (-x).exp() * sum / p;
        let ours = miso_upa_gpr(p, &params).unwrap();
        prop_assert!((ours - written).abs() <= 1e-12 * written.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn optimal_precoder_is_monotone_and_continuous(n_t in 2usize..7, rate in 0.5f64..4.0) {
        let base = SystemParams::new(n_t, 1, 0.1, rate, 1.0).unwrap();
        let c = base.c();
        let table = solve_c_thresholds(n_t).unwrap();
        let mut last = 0;
        for p_max in log_grid(c * 0.01, c * 100.0, 200) {
            let s = miso_optimal_precoder(&base.with_p_max(p_max).unwrap()).unwrap();
            prop_assert!(s.active_antennas >= last);
            prop_assert!(s.total_power() <= p_max * (1.0 + 1e-12));
            last = s.active_antennas;
        }
        for l in 1..n_t {
            let edge = c / table.c(l);
            let below = miso_optimal_precoder(&base.with_p_max(edge * (1.0 - 1e-9)).unwrap()).unwrap();
            let above = miso_optimal_precoder(&base.with_p_max(edge).unwrap()).unwrap();
            let (gb, ga) = (below.gpr(&base).unwrap(), above.gpr(&base).unwrap());
            prop_assert!((gb - ga).abs() <= 1e-6 * ga, "l={} {} {}", l, gb, ga);
        }
    }
}

#[test]
fn nu_residuals_and_sign_change() {
    for n in 1..=16 {
        let nu = solve_nu(n).unwrap();
        assert!(phi(n, nu).abs() < 1e-10);
        assert!(nu > 0.0 && nu <= n as f64);
        assert!(phi(n, nu * (1.0 - 1e-9)) <= 0.0 && phi(n, nu * (1.0 + 1e-9)) >= 0.0);
    }
}

#[test]
fn threshold_intervals_tile_the_half_line() {
    let t = solve_c_thresholds(6).unwrap();
    let iv = t.power_intervals(0.7);
    assert_eq!(iv.first().unwrap().1, 0.0);
    assert_eq!(iv.last().unwrap().2, f64::INFINITY);
    for w in iv.windows(2) {
        assert_eq!(w[0].2, w[1].1);
        assert!(w[0].1 < w[0].2);
    }
    for (l, lo, hi) in iv {
        let inside = if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            2.0 * lo
        };
        assert_eq!(t.active_antennas(inside, 0.7), l);
    }
}

#[test]
fn subset_gpr_is_continuous_at_thresholds() {
    let p = SystemParams::new(4, 1, 0.1, 3.0, 1.0).unwrap();
    let t = solve_c_thresholds(4).unwrap();
    for l in 1..4 {
        let budget = p.c() / t.c(l);
        let a = subset_upa_gpr(l, budget / l as f64, &p).unwrap();
        let b = subset_upa_gpr(l + 1, budget / (l + 1) as f64, &p).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }
}

fn second_difference_sign_changes(values: &[f64], floor: f64) -> usize {
    let signs: Vec<bool> = values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .filter(|d| d.abs() > floor)
        .map(|d| d > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[test]
fn goodput_curves_are_bounded_monotone_sigmoids() {
    let p = SystemParams::from_rho_db(4, 8, 10.0, 2.0, 1.0).unwrap();
    let grid = log_grid(1e-4, 10.0, 1000);
    type Curve = Box<dyn Fn(f64) -> f64>;
    let curves: Vec<(&str, Curve)> = vec![
        ("a", Box::new(move |x| goodput_regime_a(x, &p).unwrap())),
        ("b", Box::new(move |x| goodput_regime_b(x, &p).unwrap())),
        (
            "c",
            Box::new(move |x| goodput_regime_c(x, &p, 2.0).unwrap()),
        ),
    ];
    for (name, f) in &curves {
        let v: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        assert!(v.iter().all(|&g| (0.0..=p.rate()).contains(&g)), "{name}");
        assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-15), "{name}");
        let ratio: Vec<f64> = grid.iter().zip(&v).map(|(x, g)| g / x).collect();
        let interior_maxima = ratio
            .windows(3)
            .filter(|w| w[1] > w[0] && w[1] > w[2])
            .count();
        assert!(interior_maxima <= 1, "{name}");
        if *name == "a" {
            // N_a(0) > 0, so the ratio blows up at the origin instead of rising
            continue;
        }
        let peak = ratio
            .iter()
            .enumerate()
            .fold(0, |b, (i, &r)| if r > ratio[b] { i } else { b });
        assert!(
            ratio[..=peak]
                .windows(2)
                .all(|w| w[1] >= w[0] * (1.0 - 1e-12)),
            "{name}"
        );
        assert!(
            ratio[peak..]
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
            "{name}"
        );
    }
    for name in ["a", "b"] {
        let f = &curves.iter().find(|c| c.0 == name).unwrap().1;
        let v: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        assert_eq!(second_difference_sign_changes(&v, 1e-12), 1, "{name}");
    }
}
