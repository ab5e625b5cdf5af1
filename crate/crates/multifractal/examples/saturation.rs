//! Synthesizes a saturation function for a prescribed environment and
//! estimates its spectrum with wavelet leaders.

use multifractal::convex::{grid_step, legendre};
use multifractal::measure::{MeasureConfig, PrescribedSpectrum};
use multifractal::saturation::saturation_coefficients;
use multifractal::spectra::{frisch_parisi_scale, Integrability};
use multifractal::wavelet::{analyze, leaders, make_wavelet, regularity_order, synthesize, zeta_f_estimate};

fn main() {
    let sigma = PrescribedSpectrum::new(1, vec![(0.9, 0.5), (1.0, 1.0), (7.0 / 6.0, 0.5)]).unwrap();
    let depth = 14;
    let env = frisch_parisi_scale(&sigma).unwrap().environment(depth, &MeasureConfig::desk()).unwrap();
    let p = Integrability::Infinite;
    let order = regularity_order(env.alpha_range().1, 1, p);
    let w = make_wavelet(order).unwrap();
    let sat = saturation_coefficients(&env, p, Integrability::Finite(2.0), order, depth);
    let signal = synthesize(&sat.field, &w);
    let lf = leaders(&analyze(&signal, 1, &w).unwrap(), 1);
    let est = zeta_f_estimate(&lf, &grid_step(-5.0, 5.0, 0.05), None).unwrap();
    println!("regression over generations {:?}", est.j_range);
    let h = grid_step(0.9, 1.15, 0.05);
    let spectrum = legendre(&est.curve, &h).unwrap();
    // estimates are heavily biased at this depth; see the README
    println!("   H   target  estimate");
    for (i, &x) in h.iter().enumerate() {
        println!("{x:.2}  {:>7.3}  {:>8.3}", sigma.eval(x), spectrum.values[i].to_f64());
    }
}
