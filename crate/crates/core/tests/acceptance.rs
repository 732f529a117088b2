//! Acceptance checks; one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use peh_core::clustering::select_k;
use peh_core::discretization::Refinement;
use peh_core::events::{extract_events, extract_quiet_windows, write_event, AccelerationRecord, EventParams};
use peh_core::frf::{log_grid, optimize_resistance, peak_power, voltage_frf, ResistanceOptions};
use peh_core::geometry::DesignVector;
use peh_core::materials::{Damping, MaterialSet};
use peh_core::modal::{build_reduced, projected_damping, ReducedModel};
use peh_core::optimize::{
    cluster_designs, cross_energy, evaluate_candidates, long_record_energy, occurrence_rates, optimize_event,
    EvaluationInput, OptimalDesign, OptimizationScenario, VariableBound,
};
use peh_core::pso::PsoParams;
use peh_core::simulate::{integrate, ExcitationSignal, SimulationOptions};
use peh_core::sweep::{sweep_design, DesignScenario, SweepSpec};
use peh_core::synthetic::{add_burst, narrowband_event, noise};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = std::f64::consts::TAU;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn verification_design() -> DesignVector {
    DesignVector::new(0.2, 1.0, 1.0, 0.25, 1e-3)
}

fn no_trace() -> SimulationOptions {
    SimulationOptions {
        keep_trace: false,
        ..Default::default()
    }
}

/// Verification device at its optimal load, 30 modes on the default mesh.
fn verification_model() -> ReducedModel {
    let (_, _, r) = build_reduced(&verification_design(), &MaterialSet::bronze_pzt5a(), Refinement::default(), 30, 1e4).unwrap();
    let opt = optimize_resistance(&r, &ResistanceOptions::default()).unwrap();
    r.with_resistance(opt.resistance)
}

/// Least-squares amplitude of `a cos(wt) + b sin(wt)` fitted to `v` on the given samples.
fn harmonic_amplitude(v: &[f64], rate: f64, omega: f64, from: usize) -> f64 {
    let (mut cc, mut ss, mut cs, mut vc, mut vs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &y) in v.iter().enumerate().skip(from) {
        let t = k as f64 / rate;
        let (c, s) = ((omega * t).cos(), (omega * t).sin());
        cc += c * c;
        ss += s * s;
        cs += c * s;
        vc += y * c;
        vs += y * s;
    }
    let det = cc * ss - cs * cs;
    let a = (vc * ss - vs * cs) / det;
    let b = (vs * cc - vc * cs) / det;
    a.hypot(b)
}

fn c1_frf_vs_time() -> Outcome {
    let start = Instant::now();
    let red = verification_model();
    let w1 = red.omegas[0];
    let amplitude = 1.0;
    let rate = 4000.0;
    let mut worst: f64 = 0.0;
    let mut parts = vec![];
    for f in [0.5, 0.8, 1.0, 1.4, 2.0] {
        let w = f * w1;
        let sig = ExcitationSignal::harmonic(amplitude, w, rate, 4.0);
        let res = integrate(&red, &sig, &SimulationOptions::default()).unwrap();
        // fit over the last whole periods after the transient has died out
        let period = TWO_PI / w;
        let span = (1.5 / period).floor() * period;
        let from = res.voltage.len() - (span * rate).round() as usize;
        let measured = harmonic_amplitude(&res.voltage, rate, w, from);
        let predicted = voltage_frf(&red, w).unwrap().norm() * amplitude;
        let err = (measured - predicted).abs() / predicted;
        worst = worst.max(err);
        parts.push(format!("{f}w1:{:.2e}", err));
    }
    let t = start.elapsed();
    outcome(
        worst < 0.01 && t < Duration::from_secs(60),
        format!("max rel err {worst:.2e} (< 1e-2) [{}], {:.1?} (< 60 s)", parts.join(" "), t),
    )
}

fn c2_modal_truncation() -> Outcome {
    let start = Instant::now();
    let (model, _, full) = build_reduced(&verification_design(), &MaterialSet::bronze_pzt5a(), Refinement::uniform(3, 6), usize::MAX, 1e4).unwrap();
    let full = full.with_resistance(optimize_resistance(&full, &ResistanceOptions::default()).unwrap().resistance);
    assert_eq!(full.num_modes(), model.num_free());
    let event = narrowband_event(full.omegas[0] / TWO_PI, 2.0, 1.0, 600.0, 30.0, 10.0, 11);
    let reference = integrate(&full, &event, &no_trace()).unwrap().energy;
    let mut errs = vec![];
    for k in [5, 10, 20, 30, 50] {
        let e = integrate(&full.truncate(k), &event, &no_trace()).unwrap().energy;
        errs.push((k, (e - reference).abs() / reference));
    }
    let at30 = errs.iter().find(|(k, _)| *k == 30).unwrap().1;
    let decreasing = errs.windows(2).all(|w| w[1].1 <= w[0].1);
    let t = start.elapsed();
    let list: Vec<String> = errs.iter().map(|(k, e)| format!("K{k}:{:.2}%", 100.0 * e)).collect();
    outcome(
        at30 < 0.03 && decreasing && t < Duration::from_secs(300),
        format!(
            "all {} modes as reference; {} (K30 < 3%, decreasing: {decreasing}), {:.1?} (< 300 s)",
            full.num_modes(),
            list.join(" "),
            t
        ),
    )
}

fn c3_speed() -> Outcome {
    let red = verification_model();
    let event = narrowband_event(red.omegas[0] / TWO_PI, 2.0, 1.0, 600.0, 30.0, 10.0, 3);
    let start = Instant::now();
    let res = integrate(&red, &event, &no_trace()).unwrap();
    let t = start.elapsed();
    outcome(
        t < Duration::from_secs(2) && res.energy > 0.0,
        format!("30 modes, {} samples at 600 Hz in {:.3?} (< 2 s), {} steps", event.len(), t, res.steps),
    )
}

fn c4_beam_limit() -> Outcome {
    let (length, ratio, piezo_ratio, h) = (0.2, 0.05, 1e-3, 1e-3);
    let x = DesignVector::new(length, ratio, 1.0, piezo_ratio, h);
    let mat = MaterialSet::bronze_pzt5a();
    let (_, basis, _) = build_reduced(&x, &mat, Refinement::new(3, 16, 4), 3, 1e4).unwrap();
    let f_model = basis.omegas[0] / TWO_PI;
    // Euler-Bernoulli cantilever, layered section per unit width
    let (e_s, rho_s) = (105e9, 9000.0);
    let tp = piezo_ratio * h;
    let hs = h - 2.0 * tp;
    let e_p = mat.piezo_stiffness[(0, 0)];
    let ei = e_s * hs.powi(3) / 12.0 + 2.0 * e_p * ((hs / 2.0 + tp).powi(3) - (hs / 2.0).powi(3)) / 3.0;
    let rho_a = rho_s * hs + 2.0 * mat.piezo_density * tp;
    let beta_l: f64 = 1.875_104_068_711_961;
    let f_beam = beta_l.powi(2) / (TWO_PI * length * length) * (ei / rho_a).sqrt();
    let err = (f_model - f_beam).abs() / f_beam;
    outcome(err < 0.05, format!("plate {f_model:.4} Hz vs beam {f_beam:.4} Hz, rel err {err:.2e} (< 5e-2)"))
}

fn c5_load_selection() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mat = MaterialSet::bronze_pzt5a();
    let opts = ResistanceOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x = DesignVector::new(
            rng.random_range(0.1..0.5),
            rng.random_range(0.3..1.0),
            rng.random_range(0.1..1.0),
            rng.random_range(0.05..0.45),
            1e-3,
        );
        let (_, _, red) = build_reduced(&x, &mat, Refinement::uniform(3, 10), 20, 1e4).unwrap();
        let nm = optimize_resistance(&red, &opts).unwrap();
        let grid_best = log_grid(opts.bounds.0, opts.bounds.1, 400)
            .into_iter()
            .map(|r| peak_power(&red, r).unwrap().power)
            .fold(0.0, f64::max);
        worst = worst.max((grid_best - nm.h_o) / grid_best);
    }
    let t = start.elapsed();
    outcome(
        worst < 0.02 && t < Duration::from_secs(120),
        format!("worst shortfall vs 400-point grid {worst:.2e} (< 2e-2) over 5 designs, {t:.1?} (< 120 s)"),
    )
}

fn design1_grid() -> Vec<peh_core::sweep::SweepRow> {
    sweep_design(&SweepSpec {
        scenario: DesignScenario::Design1,
        grid: (10, 10),
        materials: MaterialSet::bronze_pzt5a(),
        refinement: Refinement::uniform(3, 10),
        modes: 20,
        resistance: ResistanceOptions::default(),
    })
}

fn c6_trends(rows: &[peh_core::sweep::SweepRow]) -> Outcome {
    if rows.iter().any(|r| r.error.is_some()) {
        return outcome(false, "sweep points failed".into());
    }
    // rows[i * 10 + j]: L index i, R index j
    let at = |i: usize, j: usize| &rows[i * 10 + j];
    let omega_rows = (0..10)
        .filter(|&j| (1..10).all(|i| at(i, j).omega_o_rad_s < at(i - 1, j).omega_o_rad_s))
        .count();
    let h_cols = (0..10).filter(|&i| (1..10).all(|j| at(i, j).h_o > at(i, j - 1).h_o)).count();
    outcome(
        omega_rows == 10 && h_cols >= 9,
        format!("omega_o decreasing in L for {omega_rows}/10 R values (need 10); H_o increasing in R for {h_cols}/10 L values (need 9)"),
    )
}

fn c7_damping(rows: &[peh_core::sweep::SweepRow]) -> Outcome {
    let mat = MaterialSet::bronze_pzt5a();
    let (alpha, beta) = (14.65, 1e-5);
    assert_eq!(mat.damping, Damping::Rayleigh { alpha, beta });
    let mut worst: f64 = 0.0;
    for x in [verification_design(), DesignVector::new(0.35, 0.5, 0.6, 0.15, 1e-3)] {
        let (model, basis, _) = build_reduced(&x, &mat, Refinement::uniform(3, 8), 10, 1e4).unwrap();
        let d = projected_damping(&model, &basis);
        let w1 = basis.omegas[0];
        let zeta_formula = (alpha / w1 + beta * w1) / 2.0;
        let zeta_projected = d[(0, 0)] / (2.0 * w1);
        worst = worst.max((zeta_formula - zeta_projected).abs() / zeta_formula);
    }
    let rel_var = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)) / mean
    };
    let across_r = (0..10)
        .map(|i| rel_var(&(0..10).map(|j| rows[i * 10 + j].zeta1).collect::<Vec<_>>()))
        .fold(0.0, f64::max);
    let across_l = (0..10)
        .map(|j| rel_var(&(0..10).map(|i| rows[i * 10 + j].zeta1).collect::<Vec<_>>()))
        .fold(f64::MAX, f64::min);
    outcome(
        worst < 1e-8 && across_r * 10.0 <= across_l,
        format!(
            "formula vs projected rel err {worst:.1e} (< 1e-8); zeta1 variation across R {across_r:.3e} vs across L {across_l:.3e} (ratio {:.0}, need >= 10)",
            across_l / across_r
        ),
    )
}

fn c8_events() -> Outcome {
    let rate = 200.0;
    let mut a = noise((1200.0 * rate) as usize, 0.01, 8);
    let mut peaks = vec![];
    for i in 0..10 {
        let above = i % 10 < 7;
        let t0 = 20.0 + 115.0 * i as f64;
        let peak = if above { 0.3 + 0.1 * (i % 3) as f64 } else { 0.08 };
        let k = add_burst(&mut a, rate, t0, peak, 6.0 + i as f64, 1.5);
        if above {
            peaks.push(k);
        }
    }
    let rec = AccelerationRecord::new("acceptance", rate, a).unwrap();
    let params = EventParams::default();
    let evs = extract_events(&rec, &params).unwrap();
    let peak_ok = evs.len() == 7
        && evs.iter().zip(&peaks).all(|(e, &k)| {
            let at = e.peak_index as f64 / rate;
            (at - 10.0).abs() <= 1.0 / rate + 1e-12 && (e.start_index + e.peak_index).abs_diff(k) <= 1
        });
    let write_all = || {
        let dir = tempfile::tempdir().unwrap();
        for e in extract_events(&rec, &params).unwrap() {
            write_event(dir.path(), &e).unwrap();
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let identical = write_all() == write_all();
    outcome(
        peak_ok && identical,
        format!("{} events from 7 above / 3 below threshold, peaks at 10 s +- 1 sample: {peak_ok}; byte-identical rerun: {identical}", evs.len()),
    )
}

/// Small plate model for the optimization criteria.
fn scenario(free: Vec<VariableBound>, seed: u64) -> OptimizationScenario {
    let mut s = OptimizationScenario::new(free, DesignVector::new(0.3, 1.0, 1.0, 0.25, 1e-3), MaterialSet::bronze_pzt5a());
    s.refinement = Refinement::uniform(3, 5);
    s.modes = 6;
    s.pso = PsoParams {
        seed,
        ..Default::default()
    };
    s
}

fn c9_pso_vs_grid() -> Outcome {
    let start = Instant::now();
    let sc = scenario(vec![VariableBound::new("L", 0.1, 0.5), VariableBound::new("H", 0.05, 0.45)], 9);
    let event = narrowband_event(6.0, 1.0, 1.0, 100.0, 30.0, 10.0, 9);
    let best = optimize_event(&sc, 1, &event).unwrap();
    let t_pso = start.elapsed();
    let ls = peh_core::sweep::linspace(0.1, 0.5, 20);
    let hs = peh_core::sweep::linspace(0.05, 0.45, 20);
    let mut grid_best: f64 = 0.0;
    for &l in &ls {
        for &h in &hs {
            if let Ok(x) = sc.design_at(&[l, h]) {
                if let Ok((e, _)) = sc.energy(&x, &event) {
                    grid_best = grid_best.max(e);
                }
            }
        }
    }
    let ratio = best.energy / grid_best;
    let t = start.elapsed();
    outcome(
        ratio >= 0.99 && t < Duration::from_secs(600),
        format!(
            "PSO {:.4e} J vs grid {:.4e} J, ratio {ratio:.4} (>= 0.99), {} evaluations; PSO {t_pso:.1?}, total {t:.1?} (< 600 s)",
            best.energy, grid_best, best.evaluations
        ),
    )
}

fn c10_tracking() -> Outcome {
    let mut parts = vec![];
    let mut worst: f64 = 0.0;
    for (i, f0) in [4.0, 7.0, 12.0].into_iter().enumerate() {
        let sc = scenario(vec![VariableBound::new("L", 0.1, 0.5)], 10 + i as u64);
        let event = narrowband_event(f0, 0.5, 1.0, 100.0, 30.0, 10.0, 20 + i as u64);
        let best = optimize_event(&sc, 1, &event).unwrap();
        let red = sc.tuned_model(&best.design).unwrap();
        let w_o = peak_power(&red, red.resistance).unwrap().omega;
        let err = (w_o - TWO_PI * f0).abs() / (TWO_PI * f0);
        worst = worst.max(err);
        parts.push(format!("{f0} Hz -> {:.3} Hz (L {:.3} m)", w_o / TWO_PI, best.design.length));
    }
    outcome(worst < 0.05, format!("{}; worst rel err {worst:.3} (< 0.05)", parts.join(", ")))
}

fn c11_clustering() -> Outcome {
    let centers = [[0.0, 0.0, 0.0], [4.0, 0.0, 1.0], [0.0, 4.0, -1.0]];
    let mut data = vec![];
    for (c, center) in centers.iter().enumerate() {
        let n = noise(3 * 30, 0.4, 40 + c as u64);
        for p in n.chunks(3) {
            data.push(vec![center[0] + p[0], center[1] + p[1], center[2] + p[2]]);
        }
    }
    let sel = select_k(&data, 2, 10, 20, 11).unwrap();
    let nearest_own = data.iter().enumerate().all(|(i, p)| {
        let z = sel.standardizer.transform(p);
        let d = |c: &Vec<f64>| z.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let own = d(&sel.centroids_scaled[sel.labels[i]]);
        sel.centroids_scaled.iter().all(|c| own <= d(c) + 1e-12)
    });
    outcome(
        sel.k == 3 && nearest_own,
        format!("selected k = {} (need 3); every point nearest its own centroid: {nearest_own}", sel.k),
    )
}

/// Two frequency families of events, optimized, clustered into two candidates.
struct TwoFamilies {
    scenario: OptimizationScenario,
    events: Vec<ExcitationSignal>,
    family: Vec<usize>,
    designs: Vec<OptimalDesign>,
    clustering: peh_core::optimize::Clustering,
}

const FAMILY_HZ: [f64; 2] = [5.0, 11.0];

fn family_event(fam: usize, i: usize) -> ExcitationSignal {
    narrowband_event(FAMILY_HZ[fam], 0.8, 0.8 + 0.1 * (i % 3) as f64, 100.0, 30.0, 10.0, 200 + i as u64)
}

fn two_families() -> TwoFamilies {
    let mut sc = scenario(vec![VariableBound::new("L", 0.1, 0.5), VariableBound::new("H", 0.05, 0.45)], 12);
    sc.pso.particles = 12;
    sc.pso.iterations = 10;
    let family: Vec<usize> = (0..6).map(|i| i % 2).collect();
    let events: Vec<ExcitationSignal> = family.iter().enumerate().map(|(i, &f)| family_event(f, i)).collect();
    let designs: Vec<OptimalDesign> = events
        .iter()
        .enumerate()
        .map(|(i, e)| optimize_event(&sc, i + 1, e).unwrap())
        .collect();
    let cross = cross_energy(&sc, &designs, &events);
    let clustering = cluster_designs(&sc, &designs, &cross.totals, (2, 2), 20, 12).unwrap();
    TwoFamilies {
        scenario: sc,
        events,
        family,
        designs,
        clustering,
    }
}

fn c12_cross_structure(tf: &TwoFamilies) -> Outcome {
    let labels = &tf.clustering.selection.labels;
    let k = tf.clustering.selection.k;
    let classes: Vec<(String, Vec<&ExcitationSignal>)> = (0..k)
        .map(|g| {
            (
                format!("G{}", g + 1),
                tf.events.iter().zip(labels).filter(|(_, &l)| l == g).map(|(e, _)| e).collect(),
            )
        })
        .collect();
    let counts: Vec<usize> = classes.iter().map(|c| c.1.len()).collect();
    let rates: Vec<f64> = counts.iter().map(|&n| n as f64 / tf.events.len() as f64).collect();
    let ev = evaluate_candidates(
        &tf.scenario,
        &tf.clustering.candidates,
        &EvaluationInput {
            classes,
            rates: rates.clone(),
            record: None,
            chunk: 30.0,
        },
    )
    .unwrap();
    let own_best = (0..k).all(|c| {
        let row: Vec<f64> = ev.table[c].iter().zip(&rates).map(|(m, r)| m * r).collect();
        (0..k).all(|g| row[c] >= row[g])
    });
    let families_split = (0..tf.events.len()).all(|i| (0..tf.events.len()).all(|j| (labels[i] == labels[j]) == (tf.family[i] == tf.family[j])));
    let table: Vec<String> = ev.table.iter().map(|r| format!("{:?}", r.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>())).collect();
    let lengths: Vec<String> = tf.designs.iter().map(|d| format!("{:.3}", d.design.length)).collect();
    outcome(
        own_best && families_split,
        format!(
            "clusters match families: {families_split}; own-cluster maximum for every candidate: {own_best}; M = [{}]; optimal L [{}]",
            table.join(", "),
            lengths.join(" ")
        ),
    )
}

fn c13_expectation_scaling(tf: &TwoFamilies) -> Outcome {
    let start = Instant::now();
    // one hour of stationary traffic: an event every 120 s alternating families, low noise between
    let rate = 100.0;
    let total = 3600.0;
    let mut a = noise((total * rate) as usize, 0.01, 13);
    for i in 0..28 {
        let e = family_event(i % 2, 100 + i);
        let k0 = ((30.0 + 125.0 * i as f64) * rate) as usize;
        for (k, v) in e.samples.iter().enumerate() {
            a[k0 + k] += v;
        }
    }
    let rec = AccelerationRecord::new("stationary", rate, a).unwrap();
    let params = EventParams::default();
    let evs = extract_events(&rec, &params).unwrap();
    let quiet = extract_quiet_windows(&rec, params.threshold, params.window, 20).unwrap();
    // classify each event window by the candidate family it belongs to (dominant-frequency test)
    let sc = &tf.scenario;
    let sigs: Vec<ExcitationSignal> = evs.iter().map(|e| e.excitation()).collect();
    let dominant = |s: &ExcitationSignal| {
        let power_at = |f: f64| {
            let (mut c, mut si) = (0.0, 0.0);
            for (k, v) in s.samples.iter().enumerate() {
                let t = k as f64 / s.sample_rate;
                c += v * (TWO_PI * f * t).cos();
                si += v * (TWO_PI * f * t).sin();
            }
            c * c + si * si
        };
        if power_at(FAMILY_HZ[0]) > power_at(FAMILY_HZ[1]) { 0 } else { 1 }
    };
    let fam_to_cluster = |f: usize| {
        let idx = tf.family.iter().position(|&x| x == f).unwrap();
        tf.clustering.selection.labels[idx]
    };
    let k = tf.clustering.selection.k;
    let mut classes: Vec<(String, Vec<&ExcitationSignal>)> = (0..k).map(|g| (format!("G{}", g + 1), vec![])).collect();
    for s in &sigs {
        classes[fam_to_cluster(dominant(s))].1.push(s);
    }
    let counts: Vec<usize> = classes.iter().map(|c| c.1.len()).collect();
    classes.push(("quiet".into(), quiet.windows.iter().map(|w| &w.signal).collect()));
    let rates = occurrence_rates(&counts, rec.duration(), params.window);
    let record = ExcitationSignal::new(rate, rec.samples.clone()).unwrap();
    let ev = evaluate_candidates(
        sc,
        &tf.clustering.candidates,
        &EvaluationInput {
            classes,
            rates,
            record: Some(&record),
            chunk: 30.0,
        },
    )
    .unwrap();
    let scale = rec.duration() / params.window;
    let long = ev.long_window.as_ref().unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = vec![];
    for c in 0..ev.candidates.len() {
        let est = ev.expected[c] * scale;
        let err = (est - long[c]).abs() / long[c];
        worst = worst.max(err);
        parts.push(format!("{}: {:.4e} vs {:.4e} J", ev.candidates[c].label, est, long[c]));
    }
    // chunked integration agrees with a single pass
    let model = sc.tuned_model(&ev.candidates[0].design).unwrap();
    let single = long_record_energy(sc, &model, &record, rec.duration() * 2.0).unwrap();
    let chunk_err = (single - long[0]).abs() / single;
    outcome(
        worst < 0.2 && chunk_err < 1e-3,
        format!(
            "{} events, {} quiet windows; {}; worst rel err {worst:.3} (< 0.2); chunked vs single pass {chunk_err:.1e}; {:.1?}",
            evs.len(),
            quiet.windows.len(),
            parts.join(", "),
            start.elapsed()
        ),
    )
}

fn c14_linearity() -> Outcome {
    let red = verification_model();
    let event = narrowband_event(red.omegas[0] / TWO_PI, 2.0, 0.5, 600.0, 30.0, 10.0, 14);
    let e1 = integrate(&red, &event, &no_trace()).unwrap().energy;
    let e2 = integrate(&red, &event.scaled(2.0), &no_trace()).unwrap().energy;
    let ratio = e2 / e1;
    outcome((ratio - 4.0).abs() <= 0.02, format!("E(2a)/E(a) = {ratio:.6} (4.0 +- 0.5%)"))
}

fn main() {
    let started = Instant::now();
    let mut failures = 0;
    let mut report = |id: usize, name: &str, o: Outcome| {
        println!("[{}] {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failures += 1;
        }
    };
    report(1, "FRF vs time domain", c1_frf_vs_time());
    report(2, "modal truncation accuracy", c2_modal_truncation());
    report(3, "integration speed", c3_speed());
    report(4, "beam-limit frequency", c4_beam_limit());
    report(5, "load selection vs grid", c5_load_selection());
    let rows = design1_grid();
    report(6, "parametric trends", c6_trends(&rows));
    report(7, "damping study", c7_damping(&rows));
    report(8, "event extraction", c8_events());
    report(9, "PSO vs exhaustive grid", c9_pso_vs_grid());
    report(10, "resonance tracking", c10_tracking());
    report(11, "clustering", c11_clustering());
    let tf = two_families();
    report(12, "cross-energy structure", c12_cross_structure(&tf));
    report(13, "expectation scaling", c13_expectation_scaling(&tf));
    report(14, "linearity", c14_linearity());
    println!("acceptance: {} of 14 passed in {:.1?}", 14 - failures, started.elapsed());
    if failures > 0 {
        std::process::exit(1);
    }
}
