use proptest::prelude::*;

use multifractal::analysis::empirical_tau;
use multifractal::convex::{grid_step, legendre, AdmissibleClass};
use multifractal::dyadic::DyadicCube;
use multifractal::measure::{CubeMass, Environment, MeasureConfig, MoranMeasure, PrescribedSpectrum};
use multifractal::saturation::saturation_coefficients;
use multifractal::spectra::{Integrability, ZetaProfile};
use multifractal::wavelet::{analyze, besov_seminorm, leaders, leaders_brute_force, make_wavelet, synthesize, WaveletField};

const DEPTH: u32 = 10;

/// Tents through `(1, 1)`, the shape every prescribable spectrum on the line shares.
fn tent() -> impl Strategy<Value = PrescribedSpectrum> {
    (0.7..0.95f64, 0.0..0.6f64, 1.05..1.3f64, 0.0..0.6f64)
        .prop_map(|(lo, a, hi, b)| PrescribedSpectrum::new(1, vec![(lo, a), (1.0, 1.0), (hi, b)]).unwrap())
        .prop_filter("prescribable", |s| s.validate(AdmissibleClass::SdM).passed())
}

fn measure() -> impl Strategy<Value = MoranMeasure> {
    (tent(), 4..7u32).prop_map(|(s, n0)| MoranMeasure::build(&s, DEPTH, &MeasureConfig::desk().with_n0(n0)).unwrap())
}

fn exponent() -> impl Strategy<Value = Integrability> {
    prop_oneof![(1.0..8.0f64).prop_map(Integrability::Finite), Just(Integrability::Infinite)]
}

fn field(dim: usize, levels: u32) -> impl Strategy<Value = WaveletField> {
    let n: usize = (0..levels).map(|j| ((1usize << dim) - 1) << (dim as u32 * j)).sum();
    (-1.0..1.0f64, prop::collection::vec((-1.0..1.0f64, 0.0..6.0f64), n)).prop_map(move |(scaling, coeffs)| {
        let mut f = WaveletField::zeros(dim, levels, 2);
        f.scaling = scaling;
        for (c, (v, e)) in f.details.iter_mut().flatten().flatten().zip(coeffs) {
            *c = v * (-e).exp2();
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn legendre_biconjugation_recovers_concave_spectra(s in tent()) {
        let mut t = grid_step(-40.0, 40.0, 0.01);
        t.extend(s.nodes.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)));
        t.sort_by(f64::total_cmp);
        let (lo, hi) = (s.alpha_min(), s.alpha_max());
        let inside = grid_step(lo + 0.01, hi - 0.01, 0.01);
        let back = legendre(&legendre(&s.curve(), &t).unwrap(), &inside).unwrap();
        for (i, &a) in inside.iter().enumerate() {
            prop_assert!((back.values[i].to_f64() - s.eval(a)).abs() < 1e-6, "alpha = {}", a);
        }
    }

    #[test]
    fn masses_are_additive(m in measure(), j in 0..DEPTH, k in any::<u64>()) {
        let cube = DyadicCube::new(j, &[(k % (1u64 << j)) as i64]).unwrap();
        let kids: f64 = cube.children().iter().map(|c| m.mass(c)).sum();
        prop_assert!((kids - m.mass(&cube)).abs() <= 1e-12 * m.mass(&cube));
    }

    #[test]
    fn generations_are_mirror_symmetric(m in measure()) {
        for j in 1..=DEPTH {
            let v = m.log2_masses(j);
            prop_assert!(v.iter().zip(v.iter().rev()).all(|(a, b)| (a - b).abs() <= 1e-12), "j = {}", j);
        }
    }

    #[test]
    fn power_rescales_the_scaling_function(m in measure(), s in 0.25..3.0f64) {
        let t = grid_step(-4.0, 4.0, 0.5);
        let scaled: Vec<f64> = t.iter().map(|x| s * x).collect();
        let env = Environment::new(m.clone(), s, 0.0).unwrap();
        let a = empirical_tau(&env, &t, DEPTH);
        let b = empirical_tau(&m, &scaled, DEPTH);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x.to_f64() - y.to_f64()).abs() <= 1e-12);
        }
    }

    #[test]
    fn empirical_tau_is_concave_increasing_and_pinned(m in measure(), j in 1..=DEPTH) {
        let t = grid_step(-5.0, 5.0, 0.25);
        let tau: Vec<f64> = empirical_tau(&m, &t, j).values.iter().map(|v| v.to_f64()).collect();
        prop_assert!(tau.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(tau.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= 1e-9));
        let at = |x: f64| tau[t.iter().position(|&y| y == x).unwrap()];
        prop_assert!(at(1.0).abs() <= 1e-12);
        prop_assert!((at(0.0) + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zeta_is_concave(s in tent(), p in exponent()) {
        let z = ZetaProfile::from_spectrum(&s, p).unwrap();
        let v: Vec<f64> = grid_step(-10.0, 10.0, 0.05).iter().map(|&x| z.zeta(x)).collect();
        prop_assert!(v.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= 1e-9));
    }

    #[test]
    fn seminorm_is_homogeneous(m in measure(), a in 0.1..10.0f64, p in exponent(), q in exponent()) {
        let env = Environment::plain(m);
        let sat = saturation_coefficients(&env, p, q, 2, DEPTH);
        let base = besov_seminorm(&sat.field, &env, p, q).value;
        let scaled = besov_seminorm(&sat.field.scaled(a), &env, p, q).value;
        prop_assert!((scaled - a * base).abs() <= 1e-12 * a * base.max(1.0));
    }

    #[test]
    fn wavelet_round_trip(f in field(1, 10), order in 2..=10u32) {
        let w = make_wavelet(order).unwrap();
        let mut f = f;
        f.order = order;
        let back = analyze(&synthesize(&f, &w), 1, &w).unwrap();
        prop_assert!(back.max_difference(&f) <= 1e-8);
    }

    #[test]
    fn fast_leaders_match_brute_force_1d(f in field(1, 6)) {
        prop_assert_eq!(leaders(&f, 1), leaders_brute_force(&f, 1));
    }

    #[test]
    fn fast_leaders_match_brute_force_2d(f in field(2, 4)) {
        prop_assert_eq!(leaders(&f, 1), leaders_brute_force(&f, 1));
    }
}
