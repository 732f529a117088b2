//! Time integration of the reduced electromechanical system under sampled base
//! acceleration, and harvested energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modal::ReducedModel;

/// Uniformly sampled base acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSignal {
    /// [Hz]
    pub sample_rate: f64,
    /// [m/s^2]
    pub samples: Vec<f64>,
}

impl ExcitationSignal {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidInput(format!("sample rate {sample_rate} must be positive")));
        }
        if samples.len() < 2 {
            return Err(Error::EmptyRecord("an excitation needs at least two samples".into()));
        }
        if let Some(i) = samples.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self { sample_rate, samples })
    }

    /// `amplitude * sin(omega t)` sampled on `[0, duration]`.
    pub fn harmonic(amplitude: f64, omega: f64, sample_rate: f64, duration: f64) -> Self {
        let n = (duration * sample_rate).round() as usize + 1;
        let samples = (0..n).map(|k| amplitude * (omega * k as f64 / sample_rate).sin()).collect();
        Self { sample_rate, samples }
    }

    pub fn zeros(sample_rate: f64, duration: f64) -> Self {
        let n = (duration * sample_rate).round() as usize + 1;
        Self {
            sample_rate,
            samples: vec![0.0; n],
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len().saturating_sub(1)) as f64 / self.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|a| a * factor).collect(),
        }
    }

    /// Samples `start..=end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            sample_rate: self.sample_rate,
            samples: self.samples[start..=end.min(self.samples.len() - 1)].to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `[eta, eta', v]`; zeros when absent.
    pub initial_state: Option<Vec<f64>>,
    /// Store `v(t)` and `P(t)` on the excitation grid. Energy is always accumulated.
    pub keep_trace: bool,
    pub max_steps: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            initial_state: None,
            keep_trace: true,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationResult {
    pub sample_rate: f64,
    /// Output voltage on the excitation grid [V]; empty without a trace.
    pub voltage: Vec<f64>,
    /// `v^2 / R_l` [W].
    pub power: Vec<f64>,
    /// Trapezoidal integral of the power over the whole span [J].
    pub energy: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub final_state: Vec<f64>,
    pub resistance: f64,
}

impl SimulationResult {
    pub fn time(&self) -> Vec<f64> {
        (0..self.voltage.len()).map(|k| k as f64 / self.sample_rate).collect()
    }

    /// Trapezoidal energy over `[t1, t2]`, interpolating the power linearly at the ends.
    pub fn energy_between(&self, t1: f64, t2: f64) -> f64 {
        energy(&self.power, self.sample_rate, t1, t2)
    }
}

/// Trapezoidal integral of a uniformly sampled power signal on `[t1, t2]`.
pub fn energy(power: &[f64], sample_rate: f64, t1: f64, t2: f64) -> f64 {
    if power.len() < 2 || t2 <= t1 {
        return 0.0;
    }
    let dt = 1.0 / sample_rate;
    let t_end = (power.len() - 1) as f64 * dt;
    let (t1, t2) = (t1.max(0.0), t2.min(t_end));
    let at = |t: f64| -> f64 {
        let x = t / dt;
        let k = (x.floor() as usize).min(power.len() - 2);
        let s = x - k as f64;
        power[k] * (1.0 - s) + power[k + 1] * s
    };
    let k1 = (t1 / dt).ceil() as usize;
    let k2 = ((t2 / dt).floor() as usize).min(power.len() - 1);
    if k1 > k2 {
        return 0.5 * (at(t1) + at(t2)) * (t2 - t1);
    }
    let mut e = 0.5 * (at(t1) + power[k1]) * (k1 as f64 * dt - t1);
    for k in k1..k2 {
        e += 0.5 * (power[k] + power[k + 1]) * dt;
    }
    e + 0.5 * (power[k2] + at(t2)) * (t2 - k2 as f64 * dt)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side of the reduced system with state `[eta, eta', v]`.
struct Rhs<'a> {
    m: &'a ReducedModel,
    k: usize,
    inv_rc: f64,
    inv_c: f64,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, y: &[f64], a: f64, dy: &mut [f64]) {
        let k = self.k;
        let m = self.m;
        let v = y[2 * k];
        let mut flux = 0.0;
        for i in 0..k {
            let eta = y[i];
            let deta = y[k + i];
            dy[i] = deta;
            dy[k + i] = -m.damping[i] * deta - m.stiffness[i] * eta + m.theta[i] * v + m.forcing[i] * a;
            flux += m.coupling_row[i] * deta;
        }
        dy[2 * k] = -v * self.inv_rc - flux * self.inv_c;
    }
}

/// Integrates the reduced system over the full excitation with adaptive
/// Dormand-Prince 5(4). Steps are cut to land on every excitation sample, and
/// the acceleration is linear between samples.
pub fn integrate(reduced: &ReducedModel, excitation: &ExcitationSignal, opts: &SimulationOptions) -> Result<SimulationResult> {
    let k = reduced.num_modes();
    let n = 2 * k + 1;
    if !(reduced.capacitance > 0.0 && reduced.resistance > 0.0) {
        return Err(Error::InvalidInput("capacitance and resistance must be positive".into()));
    }
    if excitation.samples.len() < 2 {
        return Err(Error::EmptyRecord("excitation has fewer than two samples".into()));
    }
    let rhs = Rhs {
        m: reduced,
        k,
        inv_rc: 1.0 / (reduced.resistance * reduced.capacitance),
        inv_c: 1.0 / reduced.capacitance,
    };
    let mut y = match &opts.initial_state {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => {
            return Err(Error::InvalidInput(format!(
                "initial state has length {}, expected {n}",
                s.len()
            )))
        }
        None => vec![0.0; n],
    };

    let dt = excitation.dt();
    let samples = &excitation.samples;
    let inv_r = 1.0 / reduced.resistance;
    let mut voltage = Vec::new();
    let mut power = Vec::new();
    if opts.keep_trace {
        voltage.reserve(samples.len());
        power.reserve(samples.len());
        voltage.push(y[2 * k]);
        power.push(y[2 * k] * y[2 * k] * inv_r);
    }
    let mut energy = 0.0;
    let mut p_prev = y[2 * k] * y[2 * k] * inv_r;

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    rhs.eval(&y, samples[0], &mut k1);
    let mut h = initial_step(&rhs, &y, &k1, samples[0], dt, opts);
    let (mut steps, mut rejected) = (0usize, 0usize);
    let order_exp = -1.0 / 5.0;

    for j in 0..samples.len() - 1 {
        let (a0, a1) = (samples[j], samples[j + 1]);
        let slope = (a1 - a0) / dt;
        let acc = |s: f64| a0 + slope * s;
        let t0 = j as f64 * dt;
        let mut s = 0.0;
        while s < dt {
            let remaining = dt - s;
            let last = h >= remaining * (1.0 - 1e-12);
            let hs = if last { remaining } else { h };
            if hs < 1e-14 * (t0 + s).abs().max(dt) {
                return Err(Error::StepSizeUnderflow {
                    t: t0 + s,
                    h: hs,
                    steps,
                    rejected,
                });
            }
            for i in 0..n {
                tmp[i] = y[i] + hs * A21 * k1[i];
            }
            rhs.eval(&tmp, acc(s + C2 * hs), &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs.eval(&tmp, acc(s + C3 * hs), &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs.eval(&tmp, acc(s + C4 * hs), &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs.eval(&tmp, acc(s + C5 * hs), &mut k5);
            for i in 0..n {
                tmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let s_new = if last { dt } else { s + hs };
            rhs.eval(&tmp, acc(s_new), &mut k6);
            for i in 0..n {
                y_new[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            rhs.eval(&y_new, if last { a1 } else { acc(s_new) }, &mut k7);
            let mut err = 0.0;
            for i in 0..n {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                rejected += 1;
                h = hs * 0.2;
                continue;
            }
            if err <= 1.0 {
                steps += 1;
                if steps > opts.max_steps {
                    return Err(Error::StepSizeUnderflow {
                        t: t0 + s,
                        h: hs,
                        steps,
                        rejected,
                    });
                }
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                s = s_new;
                let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(order_exp)).clamp(0.2, 10.0) };
                // a step shortened to hit the grid does not shrink the proposal
                h = if last { h.max(hs * fac) } else { hs * fac };
            } else {
                rejected += 1;
                h = hs * (0.9 * err.powf(order_exp)).clamp(0.2, 1.0);
            }
        }
        let v = y[2 * k];
        let p = v * v * inv_r;
        energy += 0.5 * (p_prev + p) * dt;
        p_prev = p;
        if opts.keep_trace {
            voltage.push(v);
            power.push(p);
        }
    }

    Ok(SimulationResult {
        sample_rate: excitation.sample_rate,
        voltage,
        power,
        energy,
        steps,
        rejected_steps: rejected,
        final_state: y,
        resistance: reduced.resistance,
    })
}

/// Starting step following Hairer, Norsett and Wanner, capped at one sample interval.
fn initial_step(rhs: &Rhs, y: &[f64], f0: &[f64], a0: f64, dt: f64, opts: &SimulationOptions) -> f64 {
    let n = y.len();
    let sc: Vec<f64> = y.iter().map(|v| opts.abs_tol + opts.rel_tol * v.abs()).collect();
    let norm = |v: &[f64]| (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(dt);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    rhs.eval(&y1, a0, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(dt)
}
