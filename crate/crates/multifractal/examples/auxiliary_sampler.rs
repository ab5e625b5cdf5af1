//! Draws points from the auxiliary measure at a few exponents and reports the
//! share whose local exponent lands within 0.1 of the target.

use multifractal::analysis::local_exponent;
use multifractal::dyadic::LetterRule;
use multifractal::measure::{AuxiliarySampler, MeasureConfig, MoranMeasure, PrescribedSpectrum};

fn main() {
    let sigma = PrescribedSpectrum::new(1, vec![(0.9, 0.5), (1.0, 1.0), (7.0 / 6.0, 0.5)]).unwrap();
    let depth = 18;
    let config = MeasureConfig::desk().with_n0(12).with_letters(LetterRule::Constant { letters: 1 });
    let m = MoranMeasure::build(&sigma, depth, &config).unwrap();
    for (seed, alpha) in [0.95, 1.0, 1.1].into_iter().enumerate() {
        let mut sampler = AuxiliarySampler::new(&m, alpha, seed as u64).unwrap();
        let points = sampler.draw_many(200);
        let hits = points.iter().filter(|x| (local_exponent(&m, x, (0, depth)).slope - alpha).abs() <= 0.1).count();
        println!("alpha = {alpha:.2}: {hits}/200 within 0.1");
    }
}
