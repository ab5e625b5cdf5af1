//! Leaders of a Weierstrass-type function: the estimated scaling function
//! should be close to the line `t -> h t - 1` with `h = 0.5`.

use multifractal::convex::grid_step;
use multifractal::wavelet::{analyze, leaders, make_wavelet, zeta_f_estimate};

fn main() {
    let levels: u32 = 14;
    let n = 1usize << levels;
    let h = 0.5;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (0..levels as i32).map(|k| 2f64.powf(-h * k as f64) * (std::f64::consts::TAU * 2f64.powi(k) * x).cos()).sum()
        })
        .collect();
    let w = make_wavelet(4).unwrap();
    let lf = leaders(&analyze(&samples, 1, &w).unwrap(), 1);
    let t = grid_step(-2.0, 4.0, 1.0);
    let est = zeta_f_estimate(&lf, &t, Some((4, levels - 2))).unwrap();
    for (i, &x) in t.iter().enumerate() {
        println!("t = {x:>4}: zeta = {:>7.4}  line {:>5.2}  (r2 {:.3})", est.curve.values[i].to_f64(), h * x - 1.0, est.r2[i]);
    }
}
