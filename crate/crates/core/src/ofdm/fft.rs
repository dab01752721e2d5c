//! Unitary transform pair on power-of-two lengths.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Config(format!("transform length {n} is not a power of two")));
    }
    Ok(())
}

/// In-place transform scaled by `N^-1/2`.
fn transform(buf: &mut [Complex64], direction: FftDirection) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    fft.process(buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// `Y[i] = N^-1/2 sum_n y[n] exp(-j 2 pi n i / N)`
pub fn dft(y: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(y.len())?;
    let mut out = y.to_vec();
    transform(&mut out, FftDirection::Forward);
    Ok(out)
}

/// `x[i] = N^-1/2 sum_n X[n] exp(+j 2 pi n i / N)`
pub fn idft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    transform(&mut out, FftDirection::Inverse);
    Ok(out)
}

/// Forward transform of a real sequence.
pub fn dft_real(y: &[f64]) -> Result<Vec<Complex64>> {
    let buf: Vec<Complex64> = y.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    check_len(buf.len())?;
    let mut out = buf;
    transform(&mut out, FftDirection::Forward);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, v) in x.iter().enumerate() {
                    let ang = sign * 2.0 * std::f64::consts::PI * ((i * k) % n) as f64 / n as f64;
                    acc += v * Complex64::from_polar(1.0, ang);
                }
                acc / (n as f64).sqrt()
            })
            .collect()
    }

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_naive_sum() {
        for (n, seed) in [(1, 1), (2, 2), (8, 3), (64, 4), (256, 5)] {
            let x = random(n, seed);
            let fast = dft(&x).unwrap();
            let slow = naive(&x, -1.0);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
            let fast = idft(&x).unwrap();
            let slow = naive(&x, 1.0);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn scaled_impulse_gives_ones() {
        let n = 1024;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[0] = Complex64::new((n as f64).sqrt(), 0.0);
        for v in idft(&x).unwrap() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let x = random(1024, 7);
        let back = dft(&idft(&x).unwrap()).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        let e_time: f64 = idft(&x).unwrap().iter().map(|v| v.norm_sqr()).sum();
        let e_freq: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        assert!(((e_time - e_freq) / e_freq).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(dft(&[Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(idft(&[]).is_err());
        assert!(dft_real(&[0.0; 12]).is_err());
    }
}
