//! Property tests for the library invariants.

use proptest::prelude::*;

use depbe::applications::ustat::{a_bold, big_xi, exact_ustat};
use depbe::applications::volatility::unit_times;
use depbe::applications::{u_statistic, volatility_bound, Kernel, UStatSpec, VolatilitySpec};
use depbe::bounds::{baseline, bound_delta_2_3, bound_delta_ge3, bound_linfty, Baseline};
use depbe::cumulants::{cumulants_to_moments, moments_to_cumulants};
use depbe::fourier::{exact_dkol, StandardizedLaw};
use depbe::generators::random_families;
use depbe::montecarlo::dkw_margin;
use depbe::{xi, Atom, MomentProfile};

/// Admissible bounded profile: per-vertex moments from a symmetric
/// two-point law at ±s plus a point mass at 0 with weight w, scaled by N.
fn bounded_profile() -> impl Strategy<Value = MomentProfile> {
    (1usize..1_000_000, 0usize..100, 0.1f64..2.0, 0.0f64..0.9, 0.01f64..=1.0).prop_map(|(n, d, s, w, frac)| {
        let d = d.min(n - 1);
        let nf = n as f64;
        let a = |delta: f64| nf * (1.0 - w) * s.powf(delta);
        let v2 = frac * (d as f64 + 1.0) * a(2.0);
        MomentProfile::new(n, d, v2.sqrt())
            .with_moment(2.0, a(2.0))
            .with_moment(2.5, a(2.5))
            .with_moment(3.0, a(3.0))
            .with_moment(4.0, a(4.0))
            .with_l(s)
    })
}

fn atoms() -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec((-5i32..=5, 0.05f64..1.0), 2..6).prop_map(|v| {
        let total: f64 = v.iter().map(|x| x.1).sum();
        v.into_iter().map(|(x, p)| Atom { x: x as f64 * 0.5, p: p / total }).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn linfty_decreases_with_variance(p in bounded_profile(), shrink in 0.1f64..1.0) {
        let mut q = p.clone();
        q.v *= shrink;
        prop_assert!(bound_linfty(&p).unwrap().raw <= bound_linfty(&q).unwrap().raw * (1.0 + 1e-12));
    }

    #[test]
    fn moment_bounds_increase_with_moment(p in bounded_profile(), grow in 1.0f64..10.0) {
        for delta in [2.5, 3.0, 4.0] {
            let a = p.a(delta).unwrap();
            let q = p.clone().with_moment(delta, a * grow);
            let (b0, b1) = if delta < 3.0 {
                (bound_delta_2_3(&p, delta).unwrap().raw, bound_delta_2_3(&q, delta).unwrap().raw)
            } else {
                (bound_delta_ge3(&p, delta).unwrap().raw, bound_delta_ge3(&q, delta).unwrap().raw)
            };
            prop_assert!(b0 <= b1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn linfty_dominated_by_fmn(p in bounded_profile()) {
        let lin = bound_linfty(&p).unwrap().raw;
        let fmn = baseline(&p, Baseline::FmnCorollary30).unwrap().raw;
        prop_assert!(lin <= fmn * (1.0 + 1e-12));
    }

    #[test]
    fn xi_in_unit_interval_and_monotone(p in bounded_profile()) {
        let xs: Vec<f64> = [2.0, 2.5, 3.0, 4.0].iter().map(|&d| xi(&p, d).unwrap()).collect();
        prop_assert!(xs[0] <= 1.0 + 1e-12);
        for w in xs.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dkol_invariant_under_relabeling(atoms in atoms(), seed in any::<u64>()) {
        let law = StandardizedLaw::from_atoms(&atoms);
        prop_assume!(law.is_ok());
        let base = exact_dkol(&law.unwrap());
        let mut shuffled = atoms.clone();
        let k = shuffled.len();
        shuffled.rotate_left((seed % k as u64) as usize);
        shuffled.reverse();
        shuffled.push(Atom { x: 17.0, p: 0.0 });
        let other = exact_dkol(&StandardizedLaw::from_atoms(&shuffled).unwrap());
        prop_assert!((base - other).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn u_statistic_permutation_invariant(
        data in prop::collection::vec(-10.0f64..10.0, 3..25),
        kernel in prop::sample::select(vec!["mean", "var", "absdiff", "product"]),
        rot in 0usize..25,
    ) {
        let kernel: Kernel = kernel.parse().unwrap();
        let spec = UStatSpec::new(kernel, data.len(), 0).unwrap();
        let u = u_statistic(&spec, &data).unwrap();
        let mut perm = data.clone();
        let k = perm.len();
        perm.rotate_left(rot % k);
        perm.reverse();
        let v = u_statistic(&spec, &perm).unwrap();
        prop_assert!((u - v).abs() <= 1e-10 * u.abs().max(1.0));
    }

    #[test]
    fn ustat_xi_in_unit_interval(seed in any::<u64>(), kernel in prop::sample::select(vec!["mean", "var", "absdiff", "product"])) {
        let kernel: Kernel = kernel.parse().unwrap();
        let f = random_families(seed, 1, 5)[0].to_family().unwrap();
        prop_assume!(f.n() >= kernel.ell());
        let e = exact_ustat(&f, &kernel, 3.0).unwrap();
        prop_assume!(e.var_vn > 1e-12);
        let (n, ell) = (f.n(), kernel.ell());
        for x in [big_xi(a_bold(e.a_delta, n, ell, 3.0), e.var_vn, n, ell, e.m), big_xi(e.l, e.var_vn, n, ell, e.m)] {
            prop_assert!(x > 0.0 && x <= 1.0 + 1e-12, "Xi = {}", x);
        }
    }

    #[test]
    fn volatility_bound_monotone(
        n in 10usize..500,
        delta in prop::sample::select(vec![5.0, 5.5, 6.5, 7.0]),
        k in 0.1f64..3.0,
        grow in 1.0f64..5.0,
        mom in 0.5f64..10.0,
    ) {
        let times = unit_times(n);
        let b = |k: f64, mom: f64| {
            volatility_bound(&VolatilitySpec::new(times.clone(), delta, 0, k, vec![mom; n]).unwrap()).unwrap().raw
        };
        let base = b(k, mom);
        prop_assert!(b(k * grow, mom) <= base * (1.0 + 1e-12));
        prop_assert!(b(k, mom * grow) >= base * (1.0 - 1e-12));
    }

    #[test]
    fn dkw_margin_shrinks_with_samples(n in 1usize..10_000_000, conf in 0.5f64..0.999) {
        prop_assert!(dkw_margin(n + 1, conf).unwrap() < dkw_margin(n, conf).unwrap());
    }

    #[test]
    fn cumulant_moment_round_trip(atoms in atoms()) {
        let m: Vec<f64> = (0..=6)
            .map(|j| atoms.iter().map(|a| a.p * a.x.powi(j)).sum())
            .collect();
        let back = cumulants_to_moments(&moments_to_cumulants(&m));
        for (x, y) in m.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}
