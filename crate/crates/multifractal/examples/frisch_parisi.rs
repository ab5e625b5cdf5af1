//! Solves the inverse problem for a target spectrum with finite `p` and
//! checks that the predicted typical spectrum reproduces the target.

use multifractal::convex::grid_step;
use multifractal::measure::PrescribedSpectrum;
use multifractal::spectra::{exhaustion_map, frisch_parisi_scale, Integrability, ZetaProfile};

fn main() {
    let p = 6.0;
    let target = PrescribedSpectrum::new(1, vec![(0.8, 0.0), (1.0, 1.0), (1.2, 0.0)]).unwrap();
    let (tilde, report) = exhaustion_map(&target, p).unwrap();
    println!("exhaustion case: {:?}", report.case);
    let scale = frisch_parisi_scale(&tilde).unwrap();
    println!("power s = {:.4}, residual {:.1e}", scale.s, scale.residual);

    let profile = ZetaProfile::from_spectrum(&tilde, Integrability::Finite(p)).unwrap();
    let worst = grid_step(target.alpha_min(), target.alpha_max(), 0.01)
        .into_iter()
        .map(|h| (profile.zeta_star(h).to_f64() - target.eval(h)).abs())
        .fold(0.0, f64::max);
    println!("max |zeta* - target| = {worst:.2e}");
}
