//! Builds a measure with a prescribed tent spectrum and prints how far its
//! empirical scaling function is from the target at each schedule boundary.

use multifractal::analysis::empirical_tau;
use multifractal::convex::grid_step;
use multifractal::measure::{MeasureConfig, MoranMeasure, PrescribedSpectrum};

fn main() {
    let sigma = PrescribedSpectrum::new(1, vec![(0.9, 0.5), (1.0, 1.0), (7.0 / 6.0, 0.5)]).unwrap();
    let depth = 18;
    let m = MoranMeasure::build(&sigma, depth, &MeasureConfig::desk().with_n0(5)).unwrap();
    let t = grid_step(-5.0, 5.0, 0.05);
    let target = sigma.tau_curve(&t);
    println!("generation  sup|tau_j - tau|");
    for g in m.schedule().boundaries_up_to(depth as u64) {
        let g = g as u32;
        if g == 0 || g > depth {
            continue;
        }
        println!("{g:>10}  {:.4}", empirical_tau(&m, &t, g).sup_distance(&target, &t));
    }
}
