//! Event-driven shape optimization: per-event swarm search, cross-event
//! energies, clustering of optimal designs into candidates, and candidate
//! evaluation on long records.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{self, ClusterSelection};
use crate::discretization::Refinement;
use crate::error::{Error, Result};
use crate::frf::{optimize_resistance, ResistanceOptions};
use crate::geometry::DesignVector;
use crate::materials::MaterialSet;
use crate::modal::{build_reduced, ReducedModel};
use crate::pso::{self, PsoParams, PsoResult};
use crate::simulate::{integrate, ExcitationSignal, SimulationOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBound {
    /// One of `L`, `R`, `l`, `H`.
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl VariableBound {
    pub fn new(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationScenario {
    pub free: Vec<VariableBound>,
    /// Values of the fixed variables (and `h`).
    pub base: DesignVector,
    pub materials: MaterialSet,
    pub refinement: Refinement,
    pub modes: usize,
    pub resistance: ResistanceOptions,
    pub pso: PsoParams,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl OptimizationScenario {
    pub fn new(free: Vec<VariableBound>, base: DesignVector, materials: MaterialSet) -> Self {
        Self {
            free,
            base,
            materials,
            refinement: Refinement::default(),
            modes: 30,
            resistance: ResistanceOptions::default(),
            pso: PsoParams::default(),
            rel_tol: 1e-6,
            abs_tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::InvalidInput("scenario has no free design variable".into()));
        }
        for (i, v) in self.free.iter().enumerate() {
            if !matches!(v.name.as_str(), "L" | "R" | "l" | "H") {
                return Err(Error::InvalidInput(format!("'{}' is not an optimizable variable", v.name)));
            }
            if self.free[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidInput(format!("variable '{}' listed twice", v.name)));
            }
            if !(v.upper > v.lower) {
                return Err(Error::InvalidInput(format!("bounds of '{}' are empty", v.name)));
            }
        }
        // every corner of the box must be a valid device
        for mask in 0..(1usize << self.free.len()) {
            let corner: Vec<f64> = self
                .free
                .iter()
                .enumerate()
                .map(|(i, v)| if mask >> i & 1 == 1 { v.upper } else { v.lower })
                .collect();
            self.design_at(&corner)?.validate()?;
        }
        self.materials.validate()?;
        if self.modes == 0 {
            return Err(Error::InvalidInput("mode count must be positive".into()));
        }
        Ok(())
    }

    pub fn lower(&self) -> Vec<f64> {
        self.free.iter().map(|v| v.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.free.iter().map(|v| v.upper).collect()
    }

    pub fn design_at(&self, values: &[f64]) -> Result<DesignVector> {
        let mut x = self.base;
        for (v, &val) in self.free.iter().zip(values) {
            x.set(&v.name, val)?;
        }
        Ok(x)
    }

    pub fn free_values(&self, x: &DesignVector) -> Vec<f64> {
        self.free.iter().map(|v| x.get(&v.name).unwrap_or(f64::NAN)).collect()
    }

    /// Projects a design onto the box of free variables.
    pub fn clamp(&self, x: &DesignVector) -> DesignVector {
        let vals: Vec<f64> = self
            .free
            .iter()
            .map(|v| x.get(&v.name).unwrap_or(v.lower).clamp(v.lower, v.upper))
            .collect();
        self.design_at(&vals).unwrap_or(self.base)
    }

    fn sim_options(&self) -> SimulationOptions {
        SimulationOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            keep_trace: false,
            ..Default::default()
        }
    }

    /// Reduced model of `x` loaded with its own optimal resistance.
    pub fn tuned_model(&self, x: &DesignVector) -> Result<ReducedModel> {
        let (_, _, reduced) = build_reduced(x, &self.materials, self.refinement, self.modes, 1e4)?;
        let opt = optimize_resistance(&reduced, &self.resistance)?;
        Ok(reduced.with_resistance(opt.resistance))
    }

    /// Harvested energy of `x` under `signal`, with the load at `R_l*(x)`.
    pub fn energy(&self, x: &DesignVector, signal: &ExcitationSignal) -> Result<(f64, f64)> {
        let model = self.tuned_model(x)?;
        let res = integrate(&model, signal, &self.sim_options())?;
        Ok((res.energy, model.resistance))
    }

    /// Energy of an already tuned model under `signal`.
    pub fn energy_of(&self, model: &ReducedModel, signal: &ExcitationSignal) -> Result<f64> {
        Ok(integrate(model, signal, &self.sim_options())?.energy)
    }
}

/// Seed of the swarm for one event, derived from the run seed and the event id.
pub fn event_seed(seed: u64, event_id: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (event_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalDesign {
    pub event_id: usize,
    pub design: DesignVector,
    /// [J]
    pub energy: f64,
    /// [Ohm]
    pub resistance: f64,
    /// Best energy after each swarm iteration.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub failures: usize,
}

/// Swarm search for the design harvesting the most energy from one event.
pub fn optimize_event(scenario: &OptimizationScenario, event_id: usize, signal: &ExcitationSignal) -> Result<OptimalDesign> {
    scenario.validate()?;
    let params = PsoParams {
        seed: event_seed(scenario.pso.seed, event_id),
        ..scenario.pso
    };
    let objective = |vals: &[f64]| -> Option<f64> {
        let x = scenario.design_at(vals).ok()?;
        match scenario.energy(&x, signal) {
            Ok((e, _)) => Some(e),
            Err(e) => {
                log::warn!("event {event_id}: design {vals:?} failed: {e}");
                None
            }
        }
    };
    let PsoResult {
        best_x,
        best_value,
        trace,
        evaluations,
        failures,
    } = pso::maximize(objective, &scenario.lower(), &scenario.upper(), &params)?;
    let design = scenario.design_at(&best_x)?;
    let (energy, resistance) = scenario.energy(&design, signal)?;
    debug_assert!((energy - best_value).abs() <= 1e-9 * best_value.abs().max(1e-300));
    Ok(OptimalDesign {
        event_id,
        design,
        energy,
        resistance,
        trace,
        evaluations,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossEnergy {
    /// `matrix[i][j]` = energy of design `i` under event `j`; `None` if it failed.
    pub matrix: Vec<Vec<Option<f64>>>,
    /// Row sums over the successful entries.
    pub totals: Vec<f64>,
}

/// Energy of every optimal design under every event.
pub fn cross_energy(scenario: &OptimizationScenario, designs: &[OptimalDesign], events: &[ExcitationSignal]) -> CrossEnergy {
    let matrix: Vec<Vec<Option<f64>>> = designs
        .par_iter()
        .map(|d| {
            let model = scenario.tuned_model(&d.design).map(|m| m.with_resistance(d.resistance));
            events
                .par_iter()
                .map(|ev| match &model {
                    Ok(m) => scenario.energy_of(m, ev).ok(),
                    Err(_) => None,
                })
                .collect()
        })
        .collect();
    let totals = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let missing = row.iter().filter(|v| v.is_none()).count();
            if missing > 0 {
                log::warn!("design {i}: {missing} cross-energy entries missing from the total");
            }
            row.iter().flatten().sum()
        })
        .collect();
    CrossEnergy { matrix, totals }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub design: DesignVector,
    pub resistance: f64,
    /// Index of the optimal design closest to the centroid, when from a cluster.
    pub nearest_design: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub selection: ClusterSelection,
    pub candidates: Vec<Candidate>,
    /// Feature names in column order.
    pub features: Vec<String>,
}

/// Groups optimal designs on (free variables, total energy) and turns each
/// centroid into a candidate device.
pub fn cluster_designs(
    scenario: &OptimizationScenario,
    designs: &[OptimalDesign],
    totals: &[f64],
    k_range: (usize, usize),
    restarts: usize,
    seed: u64,
) -> Result<Clustering> {
    if designs.len() != totals.len() {
        return Err(Error::InvalidInput("one total energy per design is required".into()));
    }
    let features: Vec<Vec<f64>> = designs
        .iter()
        .zip(totals)
        .map(|(d, &e)| {
            let mut f = scenario.free_values(&d.design);
            f.push(e);
            f
        })
        .collect();
    let selection = clustering::select_k(&features, k_range.0, k_range.1, restarts, seed)?;
    let nf = scenario.free.len();
    let mut candidates = Vec::with_capacity(selection.k);
    for (c, centroid) in selection.centroids.iter().enumerate() {
        let design = scenario.clamp(&scenario.design_at(&centroid[..nf])?);
        let z = &selection.centroids_scaled[c];
        let nearest_design = (0..designs.len())
            .filter(|&i| selection.labels[i] == c)
            .min_by(|&a, &b| {
                let da = dist(&selection.standardizer.transform(&features[a]), z);
                let db = dist(&selection.standardizer.transform(&features[b]), z);
                da.total_cmp(&db)
            });
        let resistance = scenario
            .tuned_model(&design)
            .map(|m| m.resistance)
            .map_err(|e| Error::InvalidInput(format!("candidate {} is not simulable: {e}", c + 1)))?;
        candidates.push(Candidate {
            label: format!("C{}", c + 1),
            design,
            resistance,
            nearest_design,
        });
    }
    let mut names: Vec<String> = scenario.free.iter().map(|v| v.name.clone()).collect();
    names.push("energy".into());
    Ok(Clustering {
        selection,
        candidates,
        features: names,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Single candidate standing for the event-free windows: the mean of their
/// optimal designs, projected onto the bounds.
pub fn quiet_candidate(scenario: &OptimizationScenario, designs: &[OptimalDesign]) -> Result<Candidate> {
    if designs.is_empty() {
        return Err(Error::InvalidInput("no quiet-window designs".into()));
    }
    let nf = scenario.free.len();
    let mut mean = vec![0.0; nf];
    for d in designs {
        for (m, v) in mean.iter_mut().zip(scenario.free_values(&d.design)) {
            *m += v / designs.len() as f64;
        }
    }
    let design = scenario.clamp(&scenario.design_at(&mean)?);
    let resistance = scenario.tuned_model(&design)?.resistance;
    Ok(Candidate {
        label: "Q".into(),
        design,
        resistance,
        nearest_design: None,
    })
}

/// Fraction of fixed-length windows of a record that fall in each event
/// class; the remainder is the quiet class, returned last.
pub fn occurrence_rates(class_counts: &[usize], record_duration: f64, window: f64) -> Vec<f64> {
    let slots = (record_duration / window).max(1.0);
    let mut rates: Vec<f64> = class_counts.iter().map(|&n| n as f64 / slots).collect();
    let busy: f64 = rates.iter().sum();
    if busy > 1.0 {
        log::warn!("event windows exceed the record length; rates renormalized");
        rates.iter_mut().for_each(|r| *r /= busy);
        rates.push(0.0);
    } else {
        rates.push(1.0 - busy);
    }
    rates
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub candidates: Vec<Candidate>,
    /// Class names in column order (event clusters, then quiet).
    pub classes: Vec<String>,
    /// `table[c][g]` = mean energy of candidate `c` over the windows of class `g` [J].
    pub table: Vec<Vec<f64>>,
    /// Occurrence rate per class.
    pub rates: Vec<f64>,
    /// `sum_g table[c][g] rate[g]`, the expected energy of one window [J].
    pub expected: Vec<f64>,
    /// Directly integrated energy of the whole record, when given [J].
    pub long_window: Option<Vec<f64>>,
    /// Candidate indices, best first.
    pub ranking: Vec<usize>,
}

/// Options for [`evaluate_candidates`].
#[derive(Debug, Clone)]
pub struct EvaluationInput<'a> {
    /// Event windows grouped by class; the last group is the quiet class.
    pub classes: Vec<(String, Vec<&'a ExcitationSignal>)>,
    pub rates: Vec<f64>,
    pub record: Option<&'a ExcitationSignal>,
    /// Chunk length for long records [s].
    pub chunk: f64,
}

/// Per-class mean energies, occurrence-weighted expectation, optional long
/// record integration and ranking of the candidates.
pub fn evaluate_candidates(scenario: &OptimizationScenario, candidates: &[Candidate], input: &EvaluationInput) -> Result<Evaluation> {
    if input.rates.len() != input.classes.len() {
        return Err(Error::InvalidInput("one occurrence rate per class is required".into()));
    }
    let models: Vec<ReducedModel> = candidates
        .par_iter()
        .map(|c| {
            let (_, _, r) = build_reduced(&c.design, &scenario.materials, scenario.refinement, scenario.modes, c.resistance)?;
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<f64>> = models
        .par_iter()
        .map(|m| {
            input
                .classes
                .iter()
                .map(|(_, windows)| {
                    if windows.is_empty() {
                        return Ok(0.0);
                    }
                    let es = windows
                        .par_iter()
                        .map(|w| scenario.energy_of(m, w))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(es.iter().sum::<f64>() / es.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let expected: Vec<f64> = table
        .iter()
        .map(|row| row.iter().zip(&input.rates).map(|(e, r)| e * r).sum())
        .collect();
    let long_window = match input.record {
        Some(rec) => Some(
            models
                .par_iter()
                .map(|m| long_record_energy(scenario, m, rec, input.chunk))
                .collect::<Result<Vec<f64>>>()?,
        ),
        None => None,
    };
    let score = long_window.as_ref().unwrap_or(&expected);
    let mut ranking: Vec<usize> = (0..candidates.len()).collect();
    ranking.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    Ok(Evaluation {
        candidates: candidates.to_vec(),
        classes: input.classes.iter().map(|(n, _)| n.clone()).collect(),
        table,
        rates: input.rates.clone(),
        expected,
        long_window,
        ranking,
    })
}

/// Energy over a long record, integrated chunk by chunk with the state carried across.
pub fn long_record_energy(scenario: &OptimizationScenario, model: &ReducedModel, record: &ExcitationSignal, chunk: f64) -> Result<f64> {
    let n = record.samples.len();
    let step = ((chunk * record.sample_rate).round() as usize).max(1);
    let mut state: Option<Vec<f64>> = None;
    let mut total = 0.0;
    let mut start = 0;
    while start + 1 < n {
        let end = (start + step).min(n - 1);
        let piece = record.slice(start, end);
        let res = integrate(
            model,
            &piece,
            &SimulationOptions {
                initial_state: state.take(),
                ..scenario.sim_options()
            },
        )?;
        total += res.energy;
        state = Some(res.final_state);
        start = end;
    }
    Ok(total)
}
