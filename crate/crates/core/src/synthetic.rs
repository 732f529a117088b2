//! Constructed acceleration signals with known ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::simulate::ExcitationSignal;

/// Adds a damped sine starting at `t0` whose largest sample magnitude is
/// exactly `peak`. Returns the sample index of that largest magnitude.
pub fn add_burst(samples: &mut [f64], rate: f64, t0: f64, peak: f64, freq_hz: f64, decay: f64) -> usize {
    let k0 = (t0 * rate).round() as usize;
    let len = ((8.0 / decay) * rate).ceil() as usize;
    let end = (k0 + len).min(samples.len());
    let shape: Vec<f64> = (k0..end)
        .map(|k| {
            let t = (k - k0) as f64 / rate;
            (-decay * t).exp() * (2.0 * std::f64::consts::PI * freq_hz * t).sin()
        })
        .collect();
    let (imax, amax) = shape
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
    for (i, v) in shape.iter().enumerate() {
        samples[k0 + i] += peak * v / amax;
    }
    k0 + imax
}

/// Zero-mean Gaussian noise.
pub fn noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, sigma).expect("sigma is finite");
    (0..n).map(|_| rng.sample(normal)).collect()
}

/// Event-like record: a sum of sines with random phases in a band around
/// `center_hz`, under a smooth envelope peaking at `peak_at` seconds.
pub fn narrowband_event(
    center_hz: f64,
    bandwidth_hz: f64,
    amplitude: f64,
    rate: f64,
    duration: f64,
    peak_at: f64,
    seed: u64,
) -> ExcitationSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tones: Vec<(f64, f64)> = (0..12)
        .map(|i| {
            let f = center_hz + bandwidth_hz * ((i as f64 + 0.5) / 12.0 - 0.5);
            (f, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let n = (duration * rate).round() as usize;
    let width = duration / 6.0;
    let raw: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / rate;
            let env = (-((t - peak_at) / width).powi(2)).exp();
            env * tones
                .iter()
                .map(|(f, ph)| (std::f64::consts::TAU * f * t + ph).sin())
                .sum::<f64>()
        })
        .collect();
    let m = raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    ExcitationSignal {
        sample_rate: rate,
        samples: raw.iter().map(|v| amplitude * v / m).collect(),
    }
}
