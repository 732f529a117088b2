//! Multi-event design pipeline: per-event optimization, clustering, evaluation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use peh_core::events::{self, Event};
use peh_core::optimize::{
    self, cluster_designs, cross_energy, evaluate_candidates, occurrence_rates, quiet_candidate, Candidate,
    CrossEnergy, EvaluationInput, OptimalDesign,
};
use peh_core::simulate::ExcitationSignal;
use peh_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::EventsManifest;
use crate::settings::{read_json, write_json, write_with_header, Settings, SettingsRecord};
use crate::Outcome;

const SETTINGS_FILE: &str = "settings.json";
const REPORT_FILE: &str = "optimize.json";
const CLUSTERS_FILE: &str = "clusters.json";

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Directory written by `extract-events`.
    #[arg(long)]
    pub events: PathBuf,
    /// Reuse per-event results already present in the run directory.
    #[arg(long)]
    pub resume: bool,
}

/// One cached per-event result, valid while its key matches.
#[derive(Debug, Serialize, Deserialize)]
struct CachedDesign {
    key: String,
    design: OptimalDesign,
}

#[derive(Debug, Serialize, Deserialize)]
struct Failure {
    event_id: usize,
    error: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    status: String,
    completed: Vec<usize>,
    quiet_completed: Vec<usize>,
    failed: Vec<Failure>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OptimizeReport {
    provenance: serde_json::Value,
    events_dir: PathBuf,
    designs: Vec<OptimalDesign>,
    quiet_designs: Vec<OptimalDesign>,
    cross_energy: CrossEnergy,
    /// Event id of each cross-energy column.
    event_ids: Vec<usize>,
}

fn event_key(scenario_hash: &str, kind: &str, ev: &Event) -> String {
    let mut h = Sha256::new();
    h.update(scenario_hash.as_bytes());
    h.update(kind.as_bytes());
    h.update((ev.id as u64).to_le_bytes());
    h.update(ev.sample_rate.to_le_bytes());
    for v in &ev.samples {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn optimize_all(
    scenario: &optimize::OptimizationScenario,
    scenario_hash: &str,
    kind: &str,
    events: &[Event],
    dir: &Path,
    resume: bool,
) -> Result<Vec<std::result::Result<OptimalDesign, String>>> {
    std::fs::create_dir_all(dir)?;
    Ok(events
        .par_iter()
        .map(|ev| {
            let key = event_key(scenario_hash, kind, ev);
            let path = dir.join(format!("{kind}_{:05}.json", ev.id));
            if resume {
                if let Ok(c) = read_json::<CachedDesign>(&path) {
                    if c.key == key {
                        log::info!("{kind} {}: reusing {}", ev.id, path.display());
                        return Ok(c.design);
                    }
                }
            }
            let d = optimize::optimize_event(scenario, ev.id, &ev.excitation()).map_err(|e| e.to_string())?;
            write_json(&path, &CachedDesign { key, design: d.clone() }).map_err(|e| e.to_string())?;
            Ok(d)
        })
        .collect())
}

pub fn cmd_optimize(s: &Settings, out: &Path, a: &OptimizeArgs) -> Result<Outcome> {
    let scenario = s.config.scenario()?;
    let evs = events::read_events(&a.events)?;
    if evs.is_empty() {
        return Err(Error::InvalidInput(format!("no events in {}", a.events.display())));
    }
    let quiet_dir = a.events.join("quiet");
    let quiet = if quiet_dir.is_dir() { events::read_events(&quiet_dir)? } else { vec![] };
    std::fs::create_dir_all(out)?;
    write_json(&out.join(SETTINGS_FILE), &s.record)?;
    let scenario_hash = {
        let mut h = Sha256::new();
        h.update(format!("{scenario:?}").as_bytes());
        hex::encode(h.finalize())
    };
    write_json(
        &out.join("manifest.json"),
        &RunManifest {
            status: "running".into(),
            completed: vec![],
            quiet_completed: vec![],
            failed: vec![],
        },
    )?;

    let designs_dir = out.join("designs");
    let results = optimize_all(&scenario, &scenario_hash, "event", &evs, &designs_dir, a.resume)?;
    let quiet_results = optimize_all(&scenario, &scenario_hash, "quiet", &quiet, &designs_dir, a.resume)?;

    let mut failed = Vec::new();
    let mut designs = Vec::new();
    let mut ok_events = Vec::new();
    for (ev, r) in evs.iter().zip(results) {
        match r {
            Ok(d) => {
                designs.push(d);
                ok_events.push(ev);
            }
            Err(error) => failed.push(Failure { event_id: ev.id, error }),
        }
    }
    let mut quiet_designs = Vec::new();
    for (ev, r) in quiet.iter().zip(quiet_results) {
        match r {
            Ok(d) => quiet_designs.push(d),
            Err(e) => log::warn!("quiet window {} failed: {e}", ev.id),
        }
    }
    let signals: Vec<ExcitationSignal> = ok_events.iter().map(|e| e.excitation()).collect();
    let cross = cross_energy(&scenario, &designs, &signals);

    let header = s.header(&[]);
    let mut body = String::from("event_id,L,R,l,H,h,energy_J,R_l_ohm,evaluations,failures\n");
    for d in &designs {
        let x = &d.design;
        writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{}",
            d.event_id, x.length, x.aspect_ratio, x.piezo_length, x.piezo_thickness, x.thickness, d.energy, d.resistance, d.evaluations, d.failures
        )
        .unwrap();
    }
    write_with_header(&out.join("optimal_designs.csv"), &header, &body)?;

    let mut body = String::from("design_event_id");
    for ev in &ok_events {
        write!(body, ",e{}", ev.id).unwrap();
    }
    body.push_str(",total_J\n");
    for (d, (row, total)) in designs.iter().zip(cross.matrix.iter().zip(&cross.totals)) {
        write!(body, "{}", d.event_id).unwrap();
        for v in row {
            match v {
                Some(e) => write!(body, ",{e}").unwrap(),
                None => body.push_str(",NaN"),
            }
        }
        writeln!(body, ",{total}").unwrap();
    }
    write_with_header(&out.join("cross_energy.csv"), &header, &body)?;

    write_json(
        &out.join(REPORT_FILE),
        &OptimizeReport {
            provenance: s.provenance(),
            events_dir: a.events.clone(),
            designs: designs.clone(),
            quiet_designs: quiet_designs.clone(),
            cross_energy: cross,
            event_ids: ok_events.iter().map(|e| e.id).collect(),
        },
    )?;
    let status = if failed.is_empty() { "complete" } else { "partial" };
    let n_failed = failed.len();
    write_json(
        &out.join("manifest.json"),
        &RunManifest {
            status: status.into(),
            completed: designs.iter().map(|d| d.event_id).collect(),
            quiet_completed: quiet_designs.iter().map(|d| d.event_id).collect(),
            failed,
        },
    )?;
    println!("optimized {} events, {} quiet windows", designs.len(), quiet_designs.len());
    if n_failed > 0 {
        return Ok(Outcome::Partial(format!("{n_failed} events failed")));
    }
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run directory written by `optimize`.
    #[arg(long)]
    pub run: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterReport {
    provenance: serde_json::Value,
    k: usize,
    features: Vec<String>,
    /// `(event_id, cluster index)` per optimal design.
    assignments: Vec<(usize, usize)>,
    candidates: Vec<Candidate>,
    quiet_candidate: Option<Candidate>,
    silhouettes: Vec<(usize, f64)>,
    centroids: Vec<Vec<f64>>,
    inertia: f64,
}

/// Settings stored in a run directory; flags given now are ignored in favor of them.
fn run_settings(run: &Path) -> Result<Settings> {
    let rec: SettingsRecord = read_json(&run.join(SETTINGS_FILE))?;
    Settings::from_record(rec)
}

pub fn cmd_cluster(a: &RunArgs) -> Result<Outcome> {
    let s = run_settings(&a.run)?;
    let scenario = s.config.scenario()?;
    let report: OptimizeReport = read_json(&a.run.join(REPORT_FILE))?;
    let cp = s.config.clustering;
    let cl = cluster_designs(
        &scenario,
        &report.designs,
        &report.cross_energy.totals,
        (cp.k_min, cp.k_max),
        cp.restarts,
        s.config.seed,
    )?;
    let quiet = if report.quiet_designs.is_empty() {
        None
    } else {
        Some(quiet_candidate(&scenario, &report.quiet_designs)?)
    };
    let header = s.header(&[]);
    let mut body = String::from("k,silhouette\n");
    for (k, v) in &cl.selection.silhouettes {
        writeln!(body, "{k},{v}").unwrap();
    }
    write_with_header(&a.run.join("silhouette.csv"), &header, &body)?;

    let mut body = String::from("label,L,R,l,H,h,R_l_ohm,nearest_event_id,members\n");
    for (c, cand) in cl.candidates.iter().chain(quiet.iter()).enumerate() {
        let x = &cand.design;
        let nearest = cand.nearest_design.map_or(String::new(), |i| report.designs[i].event_id.to_string());
        let members = if c < cl.selection.k {
            cl.selection.labels.iter().filter(|&&l| l == c).count()
        } else {
            report.quiet_designs.len()
        };
        writeln!(
            body,
            "{},{},{},{},{},{},{},{},{}",
            cand.label, x.length, x.aspect_ratio, x.piezo_length, x.piezo_thickness, x.thickness, cand.resistance, nearest, members
        )
        .unwrap();
    }
    write_with_header(&a.run.join("candidates.csv"), &header, &body)?;

    write_json(
        &a.run.join(CLUSTERS_FILE),
        &ClusterReport {
            provenance: s.provenance(),
            k: cl.selection.k,
            features: cl.features,
            assignments: report
                .designs
                .iter()
                .zip(&cl.selection.labels)
                .map(|(d, &l)| (d.event_id, l))
                .collect(),
            candidates: cl.candidates,
            quiet_candidate: quiet,
            silhouettes: cl.selection.silhouettes,
            centroids: cl.selection.centroids,
            inertia: cl.selection.inertia,
        },
    )?;
    println!("k {}", cl.selection.k);
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Long acceleration record integrated directly for every candidate.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Sample rate of the record when its CSV has no time column [Hz].
    #[arg(long)]
    pub rate: Option<f64>,
    /// Chunk length of the long-record integration [s].
    #[arg(long, default_value_t = 30.0)]
    pub chunk: f64,
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<Outcome> {
    let run = &a.run.run;
    let s = run_settings(run)?;
    let scenario = s.config.scenario()?;
    let report: OptimizeReport = read_json(&run.join(REPORT_FILE))?;
    let clusters: ClusterReport = read_json(&run.join(CLUSTERS_FILE))?;
    let evs = events::read_events(&report.events_dir)?;
    let quiet_dir = report.events_dir.join("quiet");
    let quiet = if quiet_dir.is_dir() { events::read_events(&quiet_dir)? } else { vec![] };
    let signal_of: std::collections::HashMap<usize, ExcitationSignal> =
        evs.iter().map(|e| (e.id, e.excitation())).collect();
    let quiet_signals: Vec<ExcitationSignal> = quiet.iter().map(|e| e.excitation()).collect();

    let mut classes: Vec<(String, Vec<&ExcitationSignal>)> =
        (0..clusters.k).map(|g| (format!("G{}", g + 1), vec![])).collect();
    for (id, g) in &clusters.assignments {
        let sig = signal_of
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("event {id} is missing from {}", report.events_dir.display())))?;
        classes[*g].1.push(sig);
    }
    classes.push(("quiet".into(), quiet_signals.iter().collect()));

    let record = match &a.record {
        Some(p) => {
            let r = events::read_record(p, a.rate)?;
            Some(ExcitationSignal::new(r.sample_rate, r.samples)?)
        }
        None => None,
    };
    let manifest: Option<EventsManifest> = read_json(&report.events_dir.join("manifest.json")).ok();
    let (duration, window) = match (&manifest, &record) {
        (Some(m), _) => (m.record_duration, m.params.window),
        (None, Some(r)) => (r.duration(), s.config.events.window),
        (None, None) => {
            return Err(Error::InvalidInput(
                "occurrence rates need the events manifest or a --record".into(),
            ))
        }
    };
    let counts: Vec<usize> = classes[..clusters.k].iter().map(|(_, w)| w.len()).collect();
    let rates = occurrence_rates(&counts, duration, window);

    let mut candidates = clusters.candidates.clone();
    candidates.extend(clusters.quiet_candidate.clone());
    let ev = evaluate_candidates(
        &scenario,
        &candidates,
        &EvaluationInput {
            classes,
            rates,
            record: record.as_ref(),
            chunk: a.chunk,
        },
    )?;

    let header = s.header(&[("window_s", window.to_string())]);
    let mut body = String::from("candidate");
    for c in &ev.classes {
        write!(body, ",{c}").unwrap();
    }
    body.push_str(",expected_J\n");
    for (c, row) in ev.table.iter().enumerate() {
        write!(body, "{}", ev.candidates[c].label).unwrap();
        for v in row {
            write!(body, ",{v}").unwrap();
        }
        writeln!(body, ",{}", ev.expected[c]).unwrap();
    }
    write!(body, "rate").unwrap();
    for r in &ev.rates {
        write!(body, ",{r}").unwrap();
    }
    body.push_str(",\n");
    write_with_header(&run.join("candidate_table.csv"), &header, &body)?;

    let scale = duration / window;
    let mut body = String::from("rank,label,L,R,l,H,R_l_ohm,expected_J,scaled_expected_J,long_window_J\n");
    for (rank, &c) in ev.ranking.iter().enumerate() {
        let cand = &ev.candidates[c];
        let x = &cand.design;
        let long = ev.long_window.as_ref().map_or(String::new(), |l| l[c].to_string());
        writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{}",
            rank + 1,
            cand.label,
            x.length,
            x.aspect_ratio,
            x.piezo_length,
            x.piezo_thickness,
            cand.resistance,
            ev.expected[c],
            ev.expected[c] * scale,
            long
        )
        .unwrap();
    }
    write_with_header(&run.join("ranking.csv"), &header, &body)?;
    write_json(
        &run.join("evaluation.json"),
        &serde_json::json!({ "provenance": s.provenance(), "evaluation": ev }),
    )?;
    println!("best {}", ev.candidates[ev.ranking[0]].label);
    Ok(Outcome::Done)
}
