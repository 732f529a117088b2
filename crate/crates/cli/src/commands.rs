//! Single-device commands and record handling.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use peh_core::events::{self, AccelerationRecord, Event, EventParams};
use peh_core::frf::{self, optimize_resistance};
use peh_core::modal::build_reduced;
use peh_core::simulate::{integrate, ExcitationSignal, SimulationOptions};
use peh_core::sweep::{self, DesignScenario, SweepSpec};
use peh_core::{Error, Result};
use serde::Serialize;

use crate::settings::{write_json, write_with_header, Settings};
use crate::Outcome;

/// Load resistance: a value in ohms or `optimal`.
#[derive(Debug, Clone, Copy)]
pub enum LoadChoice {
    Ohms(f64),
    Optimal,
}

pub fn parse_load(s: &str) -> std::result::Result<LoadChoice, String> {
    if s.eq_ignore_ascii_case("optimal") {
        return Ok(LoadChoice::Optimal);
    }
    peh_core::config::parse_quantity(s, peh_core::config::Dimension::Resistance)
        .and_then(|r| if r > 0.0 { Ok(r) } else { Err("resistance must be positive".into()) })
        .map(LoadChoice::Ohms)
}

#[derive(Debug, Args)]
pub struct FrfArgs {
    /// Load resistance in ohms (units allowed, e.g. `10 kohm`) or `optimal`.
    #[arg(long, default_value = "optimal", value_parser = parse_load)]
    pub rl: LoadChoice,
    #[arg(long, default_value_t = 0.0)]
    pub f_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub f_max: f64,
    #[arg(long, default_value_t = 501)]
    pub points: usize,
    /// Also write the assembled matrices (dense text) to this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_matrices: Option<PathBuf>,
}

pub fn cmd_frf(s: &Settings, out: &Path, a: &FrfArgs) -> Result<Outcome> {
    if !(a.f_max > a.f_min && a.f_min >= 0.0 && a.points >= 2) {
        return Err(Error::InvalidInput("frequency grid needs 0 <= f_min < f_max and >= 2 points".into()));
    }
    let c = &s.config;
    let (model, _, reduced) = build_reduced(&c.design, &c.materials, c.refinement, c.modes, 1e4)?;
    if let Some(dir) = &a.dump_matrices {
        model.dump(dir)?;
    }
    let mut extra = vec![("modes", reduced.num_modes().to_string())];
    let reduced = match a.rl {
        LoadChoice::Ohms(r) => reduced.with_resistance(r),
        LoadChoice::Optimal => {
            let opt = optimize_resistance(&reduced, &c.resistance)?;
            extra.push(("R_l_ohm", format!("{}", opt.resistance)));
            extra.push(("omega_o_rad_s", format!("{}", opt.omega_o)));
            extra.push(("H_o", format!("{}", opt.h_o)));
            reduced.with_resistance(opt.resistance)
        }
    };
    if matches!(a.rl, LoadChoice::Ohms(_)) {
        extra.push(("R_l_ohm", format!("{}", reduced.resistance)));
    }
    let freqs: Vec<f64> = sweep::linspace(a.f_min, a.f_max, a.points);
    let omegas: Vec<f64> = freqs.iter().map(|f| 2.0 * std::f64::consts::PI * f).collect();
    let curve = frf::frf_curve(&reduced, &omegas)?;
    let mut body = String::from("freq_hz,Re_Hv,Im_Hv,Hp\n");
    for (i, f) in freqs.iter().enumerate() {
        writeln!(body, "{},{},{},{}", f, curve.h_v[i].re, curve.h_v[i].im, curve.h_p[i]).unwrap();
    }
    write_with_header(&out.join("frf.csv"), &s.header(&extra), &body)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    /// Acceleration record: CSV (`t,a` or `a`) or binary.
    #[arg(long)]
    pub input: PathBuf,
    /// Sample rate [Hz], required for CSV files without a time column.
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub record: RecordArgs,
    #[arg(long, default_value = "optimal", value_parser = parse_load)]
    pub rl: LoadChoice,
    /// Skip the per-sample trace file.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Serialize)]
struct SimulationSummary {
    provenance: serde_json::Value,
    #[serde(rename = "energy_J")]
    energy_j: f64,
    steps: usize,
    rejected_steps: usize,
    #[serde(rename = "R_l_ohm")]
    resistance: f64,
    modes: usize,
    samples: usize,
    sample_rate: f64,
}

pub fn cmd_simulate(s: &Settings, out: &Path, a: &SimulateArgs) -> Result<Outcome> {
    let c = &s.config;
    let rec = events::read_record(&a.record.input, a.record.rate)?;
    let signal = ExcitationSignal::new(rec.sample_rate, rec.samples)?;
    let (_, _, reduced) = build_reduced(&c.design, &c.materials, c.refinement, c.modes, 1e4)?;
    let reduced = match a.rl {
        LoadChoice::Ohms(r) => reduced.with_resistance(r),
        LoadChoice::Optimal => reduced.with_resistance(optimize_resistance(&reduced, &c.resistance)?.resistance),
    };
    let res = integrate(
        &reduced,
        &signal,
        &SimulationOptions {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            keep_trace: !a.summary_only,
            ..Default::default()
        },
    )?;
    let extra = [("R_l_ohm", format!("{}", reduced.resistance))];
    if !a.summary_only {
        let mut body = String::with_capacity(signal.len() * 64);
        body.push_str("t,a_b,v,p\n");
        for k in 0..signal.len() {
            writeln!(body, "{},{},{},{}", signal.time(k), signal.samples[k], res.voltage[k], res.power[k]).unwrap();
        }
        write_with_header(&out.join("simulation.csv"), &s.header(&extra), &body)?;
    }
    write_json(
        &out.join("simulation.json"),
        &SimulationSummary {
            provenance: s.provenance(),
            energy_j: res.energy,
            steps: res.steps,
            rejected_steps: res.rejected_steps,
            resistance: reduced.resistance,
            modes: reduced.num_modes(),
            samples: signal.len(),
            sample_rate: signal.sample_rate,
        },
    )?;
    println!("energy_J {}", res.energy);
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep L and R.
    #[arg(long, conflicts_with_all = ["design2", "design3"], required_unless_present_any = ["design2", "design3"])]
    pub design1: bool,
    /// Sweep L and H.
    #[arg(long, conflicts_with = "design3")]
    pub design2: bool,
    /// Sweep L and l.
    #[arg(long)]
    pub design3: bool,
    /// Grid size `N1xN2` along the two swept variables.
    #[arg(long, default_value = "20x20")]
    pub grid: String,
    /// Bins of the optimal front on log omega_o.
    #[arg(long, default_value_t = 20)]
    pub front_bins: usize,
}

pub fn cmd_sweep(s: &Settings, out: &Path, a: &SweepArgs) -> Result<Outcome> {
    let scenario = match (a.design1, a.design2, a.design3) {
        (true, _, _) => DesignScenario::Design1,
        (_, true, _) => DesignScenario::Design2,
        _ => DesignScenario::Design3,
    };
    let grid = match a.grid.split_once('x').map(|(x, y)| (x.trim().parse::<usize>(), y.trim().parse::<usize>())) {
        Some((Ok(x), Ok(y))) if x > 0 && y > 0 => (x, y),
        _ => return Err(Error::InvalidInput(format!("grid '{}' is not N1xN2", a.grid))),
    };
    let c = &s.config;
    let rows = sweep::sweep_design(&SweepSpec {
        scenario,
        grid,
        materials: c.materials.clone(),
        refinement: c.refinement,
        modes: c.modes,
        resistance: c.resistance,
    });
    let extra = [("scenario", format!("{scenario:?}")), ("grid", format!("{}x{}", grid.0, grid.1))];
    let header = s.header(&extra);
    let csv_of = |rows: &[sweep::SweepRow]| {
        let mut body = String::from("L,R,l,H,omega_o_rad_s,H_o,R_l_star_ohm,zeta1\n");
        for r in rows {
            writeln!(
                body,
                "{},{},{},{},{},{},{},{}",
                r.length, r.aspect_ratio, r.piezo_length, r.piezo_thickness, r.omega_o_rad_s, r.h_o, r.r_l_star_ohm, r.zeta1
            )
            .unwrap();
        }
        body
    };
    write_with_header(&out.join("sweep.csv"), &header, &csv_of(&rows))?;
    let front = sweep::optimal_front(&rows, a.front_bins);
    write_with_header(&out.join("sweep_front.csv"), &header, &csv_of(&front))?;
    write_json(
        &out.join("sweep.json"),
        &serde_json::json!({ "provenance": s.provenance(), "scenario": scenario, "rows": rows }),
    )?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} sweep points failed", rows.len());
        return Ok(Outcome::Partial(format!("{failed} of {} sweep points failed", rows.len())));
    }
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub record: RecordArgs,
    /// Trigger level on |a| [m/s^2]; defaults to the configuration.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Window length [s].
    #[arg(long)]
    pub window: Option<f64>,
    /// Peak position inside the window [s].
    #[arg(long)]
    pub peak_at: Option<f64>,
    /// Crossings closer than this belong to one event [s].
    #[arg(long)]
    pub min_separation: Option<f64>,
    /// Also extract this many quiet windows into `<out>/quiet`; defaults to the configuration.
    #[arg(long)]
    pub quiet: Option<usize>,
}

/// Summary of an extraction, kept next to the event files.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct EventsManifest {
    pub source: String,
    pub sample_rate: f64,
    pub record_duration: f64,
    pub params: EventParams,
    pub events: usize,
    pub quiet_windows: usize,
    pub quiet_insufficient: bool,
}

pub fn cmd_extract(s: &Settings, out: &Path, a: &ExtractArgs) -> Result<Outcome> {
    let mut params = s.config.events;
    params.threshold = a.threshold.unwrap_or(params.threshold);
    params.window = a.window.unwrap_or(params.window);
    params.peak_at = a.peak_at.unwrap_or(params.peak_at);
    params.min_separation = a.min_separation.unwrap_or(params.min_separation);
    let rec = events::read_record(&a.record.input, a.record.rate)?;
    let found = events::extract_events(&rec, &params)?;
    for ev in &found {
        events::write_event(out, ev)?;
    }
    let quiet_count = a.quiet.unwrap_or(s.config.quiet.count);
    let quiet = if quiet_count > 0 {
        let q = events::extract_quiet_windows(&rec, params.threshold, params.window, quiet_count)?;
        for (i, w) in q.windows.iter().enumerate() {
            events::write_event(&out.join("quiet"), &quiet_event(&rec, i + 1, w))?;
        }
        Some(q)
    } else {
        None
    };
    let manifest = EventsManifest {
        source: rec.channel.clone(),
        sample_rate: rec.sample_rate,
        record_duration: rec.duration(),
        params,
        events: found.len(),
        quiet_windows: quiet.as_ref().map_or(0, |q| q.windows.len()),
        quiet_insufficient: quiet.as_ref().is_some_and(|q| q.insufficient),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    println!("events {} quiet {}", manifest.events, manifest.quiet_windows);
    Ok(Outcome::Done)
}

fn quiet_event(rec: &AccelerationRecord, id: usize, w: &events::QuietWindow) -> Event {
    let (peak_index, peak_value) = w
        .signal
        .samples
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, &v)| if v.abs() > bv.abs() { (i, v) } else { (bi, bv) });
    Event {
        id,
        source: rec.channel.clone(),
        sample_rate: rec.sample_rate,
        samples: w.signal.samples.clone(),
        peak_index,
        peak_value,
        start_index: w.start_index,
    }
}
