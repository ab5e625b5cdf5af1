//! Periodic separable fast wavelet transform on `[0,1)^d`.

use super::{filters::WaveletSpec, WaveletError, WaveletField};

fn check_grid(len: usize, dim: usize) -> Result<u32, WaveletError> {
    if dim == 0 || len == 0 {
        return Err(WaveletError::NotPowerOfTwo(len));
    }
    let side = (len as f64).powf(1.0 / dim as f64).round() as usize;
    if side.pow(dim as u32) != len || !side.is_power_of_two() || side < 2 {
        return Err(WaveletError::NotPowerOfTwo(len));
    }
    Ok(side.trailing_zeros())
}

/// One analysis step along `axis` on the leading `n`-cube of a `side^d` array.
fn analyze_axis(data: &mut [f64], side: usize, dim: usize, n: usize, axis: usize, w: &WaveletSpec, buf: &mut Vec<f64>) {
    let stride = side.pow((dim - 1 - axis) as u32);
    let half = n / 2;
    let lines = n.pow(dim as u32 - 1);
    for line in 0..lines {
        let base = line_base(line, side, dim, n, axis);
        buf.clear();
        buf.extend((0..n).map(|i| data[base + i * stride]));
        for m in 0..half {
            let (mut a, mut d) = (0.0, 0.0);
            for (k, (&h, &g)) in w.low.iter().zip(&w.high).enumerate() {
                let x = buf[(2 * m + k) % n];
                a += h * x;
                d += g * x;
            }
            data[base + m * stride] = a;
            data[base + (half + m) * stride] = d;
        }
    }
}

fn synthesize_axis(data: &mut [f64], side: usize, dim: usize, n: usize, axis: usize, w: &WaveletSpec, buf: &mut Vec<f64>) {
    let stride = side.pow((dim - 1 - axis) as u32);
    let half = n / 2;
    let lines = n.pow(dim as u32 - 1);
    for line in 0..lines {
        let base = line_base(line, side, dim, n, axis);
        buf.clear();
        buf.resize(n, 0.0);
        for m in 0..half {
            let a = data[base + m * stride];
            let d = data[base + (half + m) * stride];
            for (k, (&h, &g)) in w.low.iter().zip(&w.high).enumerate() {
                buf[(2 * m + k) % n] += h * a + g * d;
            }
        }
        for (i, &v) in buf.iter().enumerate() {
            data[base + i * stride] = v;
        }
    }
}

/// Flat offset of the `line`-th 1-D line along `axis` inside the leading
/// `n`-cube, with the other coordinates enumerated row-major.
fn line_base(line: usize, side: usize, dim: usize, n: usize, axis: usize) -> usize {
    let mut rest = line;
    let mut base = 0;
    for c in (0..dim).rev() {
        if c == axis {
            continue;
        }
        let coord = rest % n;
        rest /= n;
        base += coord * side.pow((dim - 1 - c) as u32);
    }
    base
}

/// Decomposes samples on the `2^J`-per-axis grid (row-major, first coordinate
/// most significant) into `L∞`-normalized coefficients.
pub fn analyze(samples: &[f64], dim: usize, spec: &WaveletSpec) -> Result<WaveletField, WaveletError> {
    let levels = check_grid(samples.len(), dim)?;
    let side = 1usize << levels;
    let mut data: Vec<f64> = samples.iter().map(|s| s * (-(dim as f64 * levels as f64) / 2.0).exp2()).collect();
    let mut buf = Vec::new();
    let mut field = WaveletField::zeros(dim, levels, spec.order);
    let mut n = side;
    for j in (0..levels).rev() {
        for axis in 0..dim {
            analyze_axis(&mut data, side, dim, n, axis, spec, &mut buf);
        }
        let half = n / 2;
        let norm = (dim as f64 * j as f64 / 2.0).exp2();
        for i in 1..(1usize << dim) {
            let level = &mut field.details[j as usize][i - 1];
            for (flat, slot) in level.iter_mut().enumerate() {
                *slot = data[subband_index(flat, i, half, side, dim)] * norm;
            }
        }
        n = half;
    }
    field.scaling = data[0];
    Ok(field)
}

/// Inverse of [`analyze`].
pub fn synthesize(field: &WaveletField, spec: &WaveletSpec) -> Vec<f64> {
    let dim = field.dim;
    let levels = field.levels;
    let side = 1usize << levels;
    let mut data = vec![0.0; side.pow(dim as u32)];
    data[0] = field.scaling;
    let mut buf = Vec::new();
    for j in 0..levels {
        let half = 1usize << j;
        let norm = (-(dim as f64) * j as f64 / 2.0).exp2();
        for i in 1..(1usize << dim) {
            for (flat, &c) in field.details[j as usize][i - 1].iter().enumerate() {
                data[subband_index(flat, i, half, side, dim)] = c * norm;
            }
        }
        for axis in (0..dim).rev() {
            synthesize_axis(&mut data, side, dim, 2 * half, axis, spec, &mut buf);
        }
    }
    let scale = (dim as f64 * levels as f64 / 2.0).exp2();
    data.iter_mut().for_each(|x| *x *= scale);
    data
}

/// Position in the Mallat layout of coefficient `flat` (row-major over a
/// `half`-cube) in orientation `i`: bit `c` of `i` selects the high band of
/// coordinate `c`.
fn subband_index(flat: usize, i: usize, half: usize, side: usize, dim: usize) -> usize {
    let mut rest = flat;
    let mut idx = 0;
    for c in (0..dim).rev() {
        let mut coord = rest % half;
        rest /= half;
        if i >> c & 1 == 1 {
            coord += half;
        }
        idx += coord * side.pow((dim - 1 - c) as u32);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::make_wavelet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_signal_has_zero_coefficients() {
        let w = make_wavelet(3).unwrap();
        let f = analyze(&vec![0.0; 64], 1, &w).unwrap();
        assert!(f.details.iter().flatten().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn rejects_non_power_of_two() {
        let w = make_wavelet(2).unwrap();
        assert!(analyze(&vec![0.0; 48], 1, &w).is_err());
        assert!(analyze(&vec![0.0; 32], 2, &w).is_err());
    }

    #[test]
    fn single_coefficient_round_trip() {
        for d in [1, 2] {
            let w = make_wavelet(4).unwrap();
            let levels = if d == 1 { 8 } else { 5 };
            let mut f = WaveletField::zeros(d, levels, 4);
            let i = (1 << d) - 1;
            f.details[3][i - 1][5] = 1.0;
            let back = analyze(&synthesize(&f, &w), d, &w).unwrap();
            for (j, lvl) in back.details.iter().enumerate() {
                for (ii, band) in lvl.iter().enumerate() {
                    for (k, &c) in band.iter().enumerate() {
                        let want = if j == 3 && ii == i - 1 && k == 5 { 1.0 } else { 0.0 };
                        assert!((c - want).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn parseval_in_orthonormal_scaling() {
        let w = make_wavelet(5).unwrap();
        let x = random(1 << 12, 3);
        let f = analyze(&x, 1, &w).unwrap();
        let energy_x: f64 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let mut energy_c = f.scaling * f.scaling;
        for (j, lvl) in f.details.iter().enumerate() {
            let s = (-(j as f64)).exp2();
            energy_c += lvl[0].iter().map(|c| c * c * s).sum::<f64>();
        }
        assert!((energy_x - energy_c).abs() <= 1e-10 * energy_x.max(1.0));
    }

    #[test]
    fn direct_inner_products_at_small_length() {
        // detail coefficient against the synthesized basis function
        let w = make_wavelet(2).unwrap();
        let x = random(64, 9);
        let f = analyze(&x, 1, &w).unwrap();
        for (j, k) in [(2usize, 1usize), (4, 7), (5, 30)] {
            let mut atom = WaveletField::zeros(1, 6, 2);
            atom.details[j][0][k] = 1.0;
            let psi = synthesize(&atom, &w);
            // ⟨x, ψ_λ⟩ over the sample measure equals c_λ 2^{-j}
            let ip: f64 = x.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>() / 64.0;
            let want = f.details[j][0][k] * (-(j as f64)).exp2();
            assert!((ip - want).abs() < 1e-12, "({j},{k}): {ip} vs {want}");
        }
    }

    #[test]
    fn polynomials_have_small_details_away_from_the_seam() {
        for r in 2..=6u32 {
            let w = make_wavelet(r).unwrap();
            let n = 1usize << 10;
            let x: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64).powi(r as i32 - 1)).collect();
            let f = analyze(&x, 1, &w).unwrap();
            let j = 8usize;
            let len = 2 * r as usize;
            let band = &f.details[j][0];
            let worst = band[..band.len() - len].iter().map(|c| c.abs()).fold(0.0, f64::max);
            assert!(worst < 1e-7, "order {r}: {worst}");
        }
    }
}
