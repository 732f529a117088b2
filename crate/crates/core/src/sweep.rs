//! Two-parameter design sweeps of the first power peak and its optimal load.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::Refinement;
use crate::error::{Error, Result};
use crate::frf::{optimize_resistance, ResistanceOptions};
use crate::geometry::DesignVector;
use crate::materials::MaterialSet;
use crate::modal::build_reduced;

/// Total thickness shared by the sweep scenarios [m].
pub const SWEEP_THICKNESS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignScenario {
    /// `L` and `R` vary; `H = 0.25`, `l = 1`.
    Design1,
    /// `L` and `H` vary; `R = 1`, `l = 1`.
    Design2,
    /// `L` and `l` vary; `R = 1`, `H = 0.25`.
    Design3,
}

impl DesignScenario {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "design1" | "1" => Ok(Self::Design1),
            "design2" | "2" => Ok(Self::Design2),
            "design3" | "3" => Ok(Self::Design3),
            _ => Err(Error::InvalidInput(format!("unknown design scenario '{s}'"))),
        }
    }

    /// Fixed values; the swept entries are overwritten per grid point.
    pub fn base(&self) -> DesignVector {
        DesignVector::new(0.3, 1.0, 1.0, 0.25, SWEEP_THICKNESS)
    }

    /// The two swept variables with their ranges.
    pub fn variables(&self) -> [(&'static str, f64, f64); 2] {
        match self {
            Self::Design1 => [("L", 0.1, 0.5), ("R", 0.3, 1.0)],
            Self::Design2 => [("L", 0.1, 0.5), ("H", 0.05, 0.45)],
            Self::Design3 => [("L", 0.1, 0.5), ("l", 0.1, 1.0)],
        }
    }
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: DesignScenario,
    /// Points along the first and second swept variable.
    pub grid: (usize, usize),
    pub materials: MaterialSet,
    pub refinement: Refinement,
    pub modes: usize,
    pub resistance: ResistanceOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "R")]
    pub aspect_ratio: f64,
    #[serde(rename = "l")]
    pub piezo_length: f64,
    #[serde(rename = "H")]
    pub piezo_thickness: f64,
    pub omega_o_rad_s: f64,
    #[serde(rename = "H_o")]
    pub h_o: f64,
    #[serde(rename = "R_l_star_ohm")]
    pub r_l_star_ohm: f64,
    pub zeta1: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(x: &DesignVector, e: &Error) -> Self {
        Self {
            length: x.length,
            aspect_ratio: x.aspect_ratio,
            piezo_length: x.piezo_length,
            piezo_thickness: x.piezo_thickness,
            omega_o_rad_s: f64::NAN,
            h_o: f64::NAN,
            r_l_star_ohm: f64::NAN,
            zeta1: f64::NAN,
            error: Some(e.to_string()),
        }
    }

    pub fn design(&self) -> DesignVector {
        DesignVector::new(
            self.length,
            self.aspect_ratio,
            self.piezo_length,
            self.piezo_thickness,
            SWEEP_THICKNESS,
        )
    }
}

/// First power peak, optimal load and first-mode damping ratio of one design.
pub fn evaluate_design(
    x: &DesignVector,
    materials: &MaterialSet,
    refinement: Refinement,
    modes: usize,
    ropts: &ResistanceOptions,
) -> Result<SweepRow> {
    let (_, _, reduced) = build_reduced(x, materials, refinement, modes, 1e4)?;
    let opt = optimize_resistance(&reduced, ropts)?;
    Ok(SweepRow {
        length: x.length,
        aspect_ratio: x.aspect_ratio,
        piezo_length: x.piezo_length,
        piezo_thickness: x.piezo_thickness,
        omega_o_rad_s: opt.omega_o,
        h_o: opt.h_o,
        r_l_star_ohm: opt.resistance,
        zeta1: reduced.zetas[0],
        error: None,
    })
}

/// Grid designs in row order: first variable outer, second inner.
pub fn grid_designs(scenario: DesignScenario, grid: (usize, usize)) -> Vec<DesignVector> {
    let [(n1, lo1, hi1), (n2, lo2, hi2)] = scenario.variables();
    let mut out = Vec::with_capacity(grid.0 * grid.1);
    for a in linspace(lo1, hi1, grid.0) {
        for b in linspace(lo2, hi2, grid.1) {
            let mut x = scenario.base();
            x.set(n1, a).expect("scenario variable names are valid");
            x.set(n2, b).expect("scenario variable names are valid");
            out.push(x);
        }
    }
    out
}

/// Evaluates every grid point in parallel; failed points keep their row with
/// NaN results and the error text.
pub fn sweep_design(spec: &SweepSpec) -> Vec<SweepRow> {
    grid_designs(spec.scenario, spec.grid)
        .par_iter()
        .map(|x| {
            evaluate_design(x, &spec.materials, spec.refinement, spec.modes, &spec.resistance).unwrap_or_else(|e| {
                log::warn!("sweep point {x:?} failed: {e}");
                SweepRow::failed(x, &e)
            })
        })
        .collect()
}

/// Best `H_o` per frequency band: the rows are binned on log `w_o` and the
/// maximum of each non-empty bin is kept, ordered by frequency.
pub fn optimal_front(rows: &[SweepRow], bins: usize) -> Vec<SweepRow> {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none() && r.omega_o_rad_s > 0.0).collect();
    if ok.is_empty() || bins == 0 {
        return vec![];
    }
    let lo = ok.iter().map(|r| r.omega_o_rad_s.ln()).fold(f64::INFINITY, f64::min);
    let hi = ok.iter().map(|r| r.omega_o_rad_s.ln()).fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut best: Vec<Option<&SweepRow>> = vec![None; bins];
    for r in ok {
        let b = (((r.omega_o_rad_s.ln() - lo) / width) as usize).min(bins - 1);
        if best[b].is_none_or(|cur| r.h_o > cur.h_o) {
            best[b] = Some(r);
        }
    }
    best.into_iter().flatten().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let xs = grid_designs(DesignScenario::Design1, (3, 2));
        assert_eq!(xs.len(), 6);
        assert_eq!(xs[0].length, 0.1);
        assert_eq!(xs[0].aspect_ratio, 0.3);
        assert_eq!(xs[1].aspect_ratio, 1.0);
        assert_eq!(xs[5].length, 0.5);
        assert!(xs.iter().all(|x| x.piezo_thickness == 0.25 && x.piezo_length == 1.0));
        let xs = grid_designs(DesignScenario::Design3, (2, 2));
        assert_eq!(xs[0].piezo_length, 0.1);
        assert_eq!(xs[0].aspect_ratio, 1.0);
    }

    #[test]
    fn scenario_names() {
        assert_eq!(DesignScenario::parse("design-2").unwrap(), DesignScenario::Design2);
        assert!(DesignScenario::parse("design4").is_err());
    }

    fn row(w: f64, h: f64) -> SweepRow {
        SweepRow {
            length: 0.1,
            aspect_ratio: 1.0,
            piezo_length: 1.0,
            piezo_thickness: 0.25,
            omega_o_rad_s: w,
            h_o: h,
            r_l_star_ohm: 1e4,
            zeta1: 0.01,
            error: None,
        }
    }

    #[test]
    fn front_keeps_the_best_per_band() {
        let rows = vec![row(10.0, 1.0), row(10.5, 3.0), row(100.0, 2.0), row(98.0, 0.5)];
        let f = optimal_front(&rows, 2);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].h_o, 3.0);
        assert_eq!(f[1].h_o, 2.0);
    }

    #[test]
    fn failed_points_keep_their_row() {
        let spec = SweepSpec {
            scenario: DesignScenario::Design1,
            grid: (2, 2),
            materials: MaterialSet::bronze_pzt5a(),
            refinement: Refinement::new(1, 4, 4),
            modes: 4,
            resistance: ResistanceOptions::default(),
        };
        let rows = sweep_design(&spec);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.error.as_deref().is_some_and(|e| e.contains("InvalidRefinement"))));
        assert!(rows.iter().all(|r| r.h_o.is_nan()));
    }

    #[test]
    fn small_sweep_rows_are_physical() {
        let spec = SweepSpec {
            scenario: DesignScenario::Design2,
            grid: (2, 2),
            materials: MaterialSet::bronze_pzt5a(),
            refinement: Refinement::uniform(3, 6),
            modes: 8,
            resistance: ResistanceOptions::default(),
        };
        let rows = sweep_design(&spec);
        for r in &rows {
            assert!(r.error.is_none());
            assert!(r.h_o > 0.0 && r.r_l_star_ohm >= 1e2 && r.r_l_star_ohm <= 1e7);
            assert!(r.zeta1 > 0.0);
        }
        // longer plates are softer
        assert!(rows[2].omega_o_rad_s < rows[0].omega_o_rad_s);
    }
}
