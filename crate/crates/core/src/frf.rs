//! Voltage and power frequency response of the reduced harvester, first
//! resonance search and optimal load resistance.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modal::ReducedModel;
use crate::nelder_mead::{self, NelderMeadOptions};

type C64 = Complex<f64>;

/// Number of log-spaced samples used to bracket the first power peak.
pub const RESONANCE_GRID: usize = 200;

/// `g(w) = (1/R_l + i w C_p)^-1`.
fn load_admittance_inv(reduced: &ReducedModel, omega: f64) -> C64 {
    C64::new(1.0 / reduced.resistance, omega * reduced.capacitance).inv()
}

/// Complex voltage per unit base acceleration at `omega` [rad/s].
///
/// The modal matrix is diagonal plus a rank-one electrical term, so the solve is
/// done with the Sherman-Morrison identity in O(K).
pub fn voltage_frf(reduced: &ReducedModel, omega: f64) -> Result<C64> {
    if omega == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let iw = C64::new(0.0, omega);
    let g = load_admittance_inv(reduced, omega);
    let mut s = C64::new(0.0, 0.0);
    let mut t = C64::new(0.0, 0.0);
    for i in 0..reduced.num_modes() {
        let d = C64::new(reduced.stiffness[i] - omega * omega, omega * reduced.damping[i]);
        if d.norm() == 0.0 {
            return Err(Error::SingularSystem { omega });
        }
        let di = d.inv();
        s += di * (reduced.coupling_row[i] * reduced.forcing[i]);
        t += di * (reduced.coupling_row[i] * reduced.theta[i]);
    }
    let denom = C64::new(1.0, 0.0) + iw * g * t;
    if denom.norm() == 0.0 || !denom.is_finite() {
        return Err(Error::SingularSystem { omega });
    }
    // circuit equation gives v = -i w g (Theta^T Phi) eta
    Ok(-iw * g * s / denom)
}

/// Same quantity via a dense K x K complex LU solve.
pub fn voltage_frf_dense(reduced: &ReducedModel, omega: f64) -> Result<C64> {
    let k = reduced.num_modes();
    let iw = C64::new(0.0, omega);
    let g = load_admittance_inv(reduced, omega);
    let mut a = DMatrix::<C64>::from_fn(k, k, |r, c| iw * g * reduced.theta[r] * reduced.coupling_row[c]);
    for i in 0..k {
        a[(i, i)] += C64::new(reduced.stiffness[i] - omega * omega, omega * reduced.damping[i]);
    }
    let f = DVector::<C64>::from_iterator(k, reduced.forcing.iter().map(|&v| C64::new(v, 0.0)));
    let eta = a.lu().solve(&f).ok_or(Error::SingularSystem { omega })?;
    let ct: C64 = (0..k).map(|i| eta[i] * reduced.coupling_row[i]).sum();
    Ok(-iw * g * ct)
}

/// `|H_v|^2 / R_l`.
pub fn power_frf(reduced: &ReducedModel, omega: f64) -> Result<f64> {
    Ok(voltage_frf(reduced, omega)?.norm_sqr() / reduced.resistance)
}

/// Sampled FRF.
#[derive(Debug, Clone)]
pub struct FrfCurve {
    /// [rad/s]
    pub freqs: Vec<f64>,
    pub h_v: Vec<C64>,
    pub h_p: Vec<f64>,
    pub resistance: f64,
}

pub fn frf_curve(reduced: &ReducedModel, freqs: &[f64]) -> Result<FrfCurve> {
    let h_v = freqs.iter().map(|&w| voltage_frf(reduced, w)).collect::<Result<Vec<_>>>()?;
    let h_p = h_v.iter().map(|h| h.norm_sqr() / reduced.resistance).collect();
    Ok(FrfCurve {
        freqs: freqs.to_vec(),
        h_v,
        h_p,
        resistance: reduced.resistance,
    })
}

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    /// Frequency of the power maximum [rad/s].
    pub omega: f64,
    /// `H_p` there.
    pub power: f64,
    /// Peak is less than twice the larger bracket-end value.
    pub broad: bool,
}

/// First power peak, searched on `[0.5 w_1, 1.5 w_1]`.
pub fn find_resonance(reduced: &ReducedModel) -> Result<Resonance> {
    let w1 = *reduced
        .omegas
        .first()
        .ok_or_else(|| Error::InvalidInput("reduced model has no modes".into()))?;
    find_resonance_in(reduced, 0.5 * w1, 1.5 * w1)
}

/// Power peak inside `[lo, hi]`: log-grid scan followed by golden-section refinement.
pub fn find_resonance_in(reduced: &ReducedModel, lo: f64, hi: f64) -> Result<Resonance> {
    let grid = log_grid(lo, hi, RESONANCE_GRID);
    let vals = grid.iter().map(|&w| power_frf(reduced, w)).collect::<Result<Vec<_>>>()?;
    let (imax, _) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    if imax == 0 || imax == grid.len() - 1 {
        return Err(Error::NoPeak { lo, hi });
    }
    let f = |w: f64| power_frf(reduced, w).unwrap_or(0.0);
    let (mut a, mut b) = (grid[imax - 1], grid[imax + 1]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * grid[imax] {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let omega = 0.5 * (a + b);
    let mut power = f(omega);
    let mut omega = omega;
    if vals[imax] > power {
        omega = grid[imax];
        power = vals[imax];
    }
    let edge = vals[0].max(vals[vals.len() - 1]);
    Ok(Resonance {
        omega,
        power,
        broad: power < 2.0 * edge,
    })
}

/// Power peak near the first mode for load `resistance`. Falls back to the
/// largest bracket sample when the peak sits on the bracket edge.
pub fn peak_power(reduced: &ReducedModel, resistance: f64) -> Result<Resonance> {
    let r = reduced.with_resistance(resistance);
    match find_resonance(&r) {
        Ok(res) => Ok(res),
        Err(Error::NoPeak { lo, hi }) => {
            let grid = log_grid(lo, hi, RESONANCE_GRID);
            let mut best = Resonance {
                omega: lo,
                power: f64::NEG_INFINITY,
                broad: true,
            };
            for w in grid {
                let p = power_frf(&r, w)?;
                if p > best.power {
                    best.omega = w;
                    best.power = p;
                }
            }
            Ok(best)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ResistanceOptions {
    /// Resistance bounds [Ohm].
    pub bounds: (f64, f64),
    pub nelder_mead: NelderMeadOptions,
    /// Starting point in log10(Ohm); defaults to `log10(1 / (w_1 C_p))`.
    pub start: Option<f64>,
}

impl Default for ResistanceOptions {
    fn default() -> Self {
        Self {
            bounds: (1e2, 1e7),
            nelder_mead: NelderMeadOptions::default(),
            start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistanceOptimum {
    /// `R_l*` [Ohm].
    pub resistance: f64,
    /// `w_o(R_l*)` [rad/s].
    pub omega_o: f64,
    /// `H_o = H_p(w_o, R_l*)`.
    pub h_o: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out first.
    pub converged: bool,
}

/// Maximizes the first-peak power FRF over the load resistance. The search
/// variable is `log10 R_l`; `w_o` is re-located for every trial resistance.
pub fn optimize_resistance(reduced: &ReducedModel, opts: &ResistanceOptions) -> Result<ResistanceOptimum> {
    let (rlo, rhi) = opts.bounds;
    if !(rlo > 0.0 && rhi > rlo) {
        return Err(Error::InvalidInput(format!("resistance bounds [{rlo}, {rhi}] are invalid")));
    }
    let w1 = *reduced
        .omegas
        .first()
        .ok_or_else(|| Error::InvalidInput("reduced model has no modes".into()))?;
    let (lo, hi) = (rlo.log10(), rhi.log10());
    let x0 = opts
        .start
        .unwrap_or_else(|| (1.0 / (w1 * reduced.capacitance)).log10())
        .clamp(lo, hi);
    let mut failure = None;
    let result = nelder_mead::minimize(
        |x| match peak_power(reduced, 10f64.powf(x[0])) {
            Ok(r) => -r.power,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        &[x0],
        &[lo],
        &[hi],
        &opts.nelder_mead,
    );
    let resistance = 10f64.powf(result.x[0]);
    let best = match peak_power(reduced, resistance) {
        Ok(r) => r,
        Err(e) => return Err(failure.unwrap_or(e)),
    };
    if !result.converged {
        log::warn!(
            "resistance search stopped after {} iterations without meeting x-tol",
            result.iterations
        );
    }
    Ok(ResistanceOptimum {
        resistance,
        omega_o: best.omega,
        h_o: best.power,
        iterations: result.iterations,
        converged: result.converged,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn one_mode(zeta: f64, resistance: f64) -> ReducedModel {
        let w1 = 2.0 * std::f64::consts::PI * 30.0;
        ReducedModel {
            omegas: vec![w1],
            zetas: vec![zeta],
            stiffness: vec![w1 * w1],
            damping: vec![2.0 * zeta * w1],
            theta: vec![2e-3],
            forcing: vec![0.12],
            coupling_row: vec![2e-3],
            capacitance: 5e-8,
            resistance,
        }
    }

    pub(crate) fn three_modes(resistance: f64) -> ReducedModel {
        let w = [180.0, 1100.0, 3100.0];
        let z = [0.012, 0.02, 0.03];
        ReducedModel {
            omegas: w.to_vec(),
            zetas: z.to_vec(),
            stiffness: w.iter().map(|x| x * x).collect(),
            damping: w.iter().zip(z).map(|(x, z)| 2.0 * z * x).collect(),
            theta: vec![1.5e-3, -0.8e-3, 0.4e-3],
            forcing: vec![0.11, 0.06, -0.035],
            coupling_row: vec![1.5e-3, -0.8e-3, 0.4e-3],
            capacitance: 6e-8,
            resistance,
        }
    }

    /// Direct solve of the (K+1) x (K+1) harmonic system in (eta, v).
    fn coupled_solve(r: &ReducedModel, omega: f64) -> C64 {
        let k = r.num_modes();
        let iw = C64::new(0.0, omega);
        let mut a = DMatrix::<C64>::zeros(k + 1, k + 1);
        let mut b = DVector::<C64>::zeros(k + 1);
        for i in 0..k {
            a[(i, i)] = C64::new(r.stiffness[i] - omega * omega, omega * r.damping[i]);
            a[(i, k)] = C64::new(-r.theta[i], 0.0);
            a[(k, i)] = iw * r.coupling_row[i];
            b[i] = C64::new(r.forcing[i], 0.0);
        }
        a[(k, k)] = C64::new(1.0 / r.resistance, omega * r.capacitance);
        a.lu().solve(&b).unwrap()[k]
    }

    #[test]
    fn zero_frequency_gives_zero_voltage() {
        assert_eq!(voltage_frf(&three_modes(1e4), 0.0).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(power_frf(&three_modes(1e4), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_closed_form() {
        let r = one_mode(0.015, 3e4);
        for &w in &[20.0, 150.0, 188.5, 190.0, 400.0] {
            // v = -i w f cr / ((w1^2 - w^2 + i w c)(1/R + i w Cp) + i w theta cr)
            let iw = C64::new(0.0, w);
            let d = C64::new(r.stiffness[0] - w * w, w * r.damping[0]);
            let y = C64::new(1.0 / r.resistance, w * r.capacitance);
            let expected = -iw * r.forcing[0] * r.coupling_row[0] / (d * y + iw * r.theta[0] * r.coupling_row[0]);
            let got = voltage_frf(&r, w).unwrap();
            assert!((got - expected).norm() <= 1e-12 * expected.norm(), "w = {w}");
        }
    }

    #[test]
    fn rank_one_and_dense_paths_match_coupled_solve() {
        let r = three_modes(2e4);
        for w in log_grid(10.0, 5000.0, 60) {
            let oracle = coupled_solve(&r, w);
            let a = voltage_frf(&r, w).unwrap();
            let b = voltage_frf_dense(&r, w).unwrap();
            assert!((a - oracle).norm() <= 1e-10 * oracle.norm());
            assert!((b - oracle).norm() <= 1e-10 * oracle.norm());
        }
    }

    #[test]
    fn short_circuit_kills_voltage() {
        let w = 180.0;
        let big = voltage_frf(&three_modes(1e4), w).unwrap().norm();
        let small = voltage_frf(&three_modes(1e-3), w).unwrap().norm();
        assert!(small < 1e-6 * big);
    }

    #[test]
    fn first_peak_near_first_mode() {
        let r = one_mode(0.002, 1.0);
        let res = find_resonance(&r).unwrap();
        assert!((res.omega / r.omegas[0] - 1.0).abs() < 0.005);
        assert!(!res.broad);
        // local maximum: nearby samples on both sides do not exceed it
        for rel in [1e-6, 1e-5, 1e-4] {
            let h = rel * res.omega;
            assert!(power_frf(&r, res.omega + h).unwrap() <= res.power * (1.0 + 1e-12));
            assert!(power_frf(&r, res.omega - h).unwrap() <= res.power * (1.0 + 1e-12));
        }
    }

    #[test]
    fn overdamped_mode_is_flagged() {
        let r = one_mode(1.5, 1e4);
        match find_resonance(&r) {
            Err(Error::NoPeak { .. }) => {}
            Ok(res) => assert!(res.broad),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn resistance_matches_dense_grid() {
        for r in [one_mode(0.01, 1.0), three_modes(1.0)] {
            let opt = optimize_resistance(&r, &ResistanceOptions::default()).unwrap();
            assert!(opt.converged);
            let grid_best = log_grid(1e2, 1e7, 400)
                .into_iter()
                .map(|rl| peak_power(&r, rl).unwrap().power)
                .fold(0.0, f64::max);
            assert!(opt.h_o >= 0.98 * grid_best, "{} vs {}", opt.h_o, grid_best);
            assert!(opt.h_o >= grid_best * (1.0 - 1e-3));
        }
    }

    #[test]
    fn resistance_is_robust_to_initial_simplex() {
        let r = three_modes(1.0);
        let base = optimize_resistance(&r, &ResistanceOptions::default()).unwrap();
        let x0 = (1.0 / (r.omegas[0] * r.capacitance)).log10();
        for shift in [-0.2, 0.2] {
            let opts = ResistanceOptions {
                start: Some(x0 + shift),
                ..Default::default()
            };
            let o = optimize_resistance(&r, &opts).unwrap();
            assert!((o.resistance / base.resistance - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn power_is_continuous_in_resistance() {
        let r = three_modes(1.0);
        let grid = log_grid(1e3, 1e6, 2000);
        let p: Vec<f64> = grid.iter().map(|&rl| peak_power(&r, rl).unwrap().power).collect();
        for w in p.windows(2) {
            assert!((w[1] - w[0]).abs() / w[0].max(w[1]) < 0.01);
        }
    }

    #[test]
    fn invalid_bounds_rejected() {
        let opts = ResistanceOptions {
            bounds: (1e5, 1e3),
            ..Default::default()
        };
        assert!(optimize_resistance(&three_modes(1.0), &opts).is_err());
    }

    proptest! {
        #[test]
        fn doubling_forcing_doubles_voltage(w in 1.0f64..4000.0, rl in 1e2f64..1e7) {
            let r = three_modes(rl);
            let mut r2 = r.clone();
            r2.forcing.iter_mut().for_each(|f| *f *= 2.0);
            let a = voltage_frf(&r, w).unwrap();
            let b = voltage_frf(&r2, w).unwrap();
            prop_assert!((b - a * 2.0).norm() <= 1e-12 * b.norm().max(1e-300));
        }

        #[test]
        fn power_is_non_negative(w in 0.0f64..5000.0, rl in 1e2f64..1e7) {
            prop_assert!(power_frf(&three_modes(rl), w).unwrap() >= 0.0);
        }
    }
}
