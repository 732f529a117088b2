//! TOML run configuration with unit-bearing quantities.
//!
//! A quantity is either a bare number in SI units or a string `"<number> <unit>"`,
//! e.g. `"20 cm"`, `"105 GPa"`, `"1800 eps0"`.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::discretization::Refinement;
use crate::error::{Error, Result};
use crate::events::EventParams;
use crate::frf::ResistanceOptions;
use crate::geometry::DesignVector;
use crate::materials::{
    from_strain_charge, plane_stress_condense, Damping, MaterialSet, PiezoStiffnessConstants, EPSILON_0,
};
use crate::optimize::{OptimizationScenario, VariableBound};
use crate::pso::PsoParams;

pub const VERIFICATION_DEVICE: &str = include_str!("../fixtures/verification_device.toml");
pub const COMMERCIAL_BIMORPH: &str = include_str!("../fixtures/commercial_bimorph.toml");

/// Physical dimension of a configuration value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Stress,
    Compliance,
    ChargeConstant,
    Coupling,
    Permittivity,
    Density,
    Resistance,
    Time,
    Acceleration,
}

impl Dimension {
    fn scale(&self, unit: &str) -> Option<f64> {
        let u = unit.replace(' ', "");
        let s = match self {
            Self::Dimensionless => match u.as_str() {
                "" | "-" => 1.0,
                "%" => 0.01,
                _ => return None,
            },
            Self::Length => match u.as_str() {
                "m" => 1.0,
                "cm" => 1e-2,
                "mm" => 1e-3,
                "um" => 1e-6,
                _ => return None,
            },
            Self::Stress => match u.as_str() {
                "Pa" | "N/m^2" => 1.0,
                "kPa" => 1e3,
                "MPa" => 1e6,
                "GPa" => 1e9,
                _ => return None,
            },
            Self::Compliance => match u.as_str() {
                "1/Pa" | "m^2/N" => 1.0,
                "1/GPa" => 1e-9,
                "1/TPa" | "pm^2/N" => 1e-12,
                _ => return None,
            },
            Self::ChargeConstant => match u.as_str() {
                "C/N" | "m/V" => 1.0,
                "pC/N" | "pm/V" => 1e-12,
                _ => return None,
            },
            Self::Coupling => match u.as_str() {
                "C/m^2" => 1.0,
                _ => return None,
            },
            Self::Permittivity => match u.as_str() {
                "F/m" => 1.0,
                "nF/m" => 1e-9,
                "pF/m" => 1e-12,
                "eps0" => EPSILON_0,
                _ => return None,
            },
            Self::Density => match u.as_str() {
                "kg/m^3" => 1.0,
                "g/cm^3" => 1e3,
                _ => return None,
            },
            Self::Resistance => match u.as_str() {
                "ohm" | "Ohm" => 1.0,
                "kohm" | "kOhm" => 1e3,
                "Mohm" | "MOhm" => 1e6,
                _ => return None,
            },
            Self::Time => match u.as_str() {
                "s" => 1.0,
                "ms" => 1e-3,
                "min" => 60.0,
                "h" => 3600.0,
                _ => return None,
            },
            Self::Acceleration => match u.as_str() {
                "m/s^2" => 1.0,
                "g" => 9.80665,
                _ => return None,
            },
        };
        Some(s)
    }
}

/// Parses `"<number> <unit>"` (the space is optional) into SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> std::result::Result<f64, String> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && is_exponent(t, i)))
        })
        .map_or(t.len(), |(i, _)| i);
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("'{text}' does not start with a number"))?;
    let scale = dim
        .scale(unit.trim())
        .ok_or_else(|| format!("unit '{}' is not a {dim:?} unit", unit.trim()))?;
    Ok(value * scale)
}

fn is_exponent(t: &str, i: usize) -> bool {
    // an 'e' followed by a digit or sign is part of the number
    t[i + 1..].chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+')
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawQuantity {
    Number(f64),
    Int(i64),
    Text(String),
}

type Q = Spanned<RawQuantity>;

/// Resolves spans to `file:line` for error messages.
struct Ctx<'a> {
    source: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.source[..offset.min(self.source.len())].matches('\n').count() + 1
    }

    fn err(&self, offset: usize, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("{}:{}: {key}: {msg}", self.origin, self.line_of(offset)))
    }

    fn q(&self, q: &Q, key: &str, dim: Dimension) -> Result<f64> {
        let v = match q.get_ref() {
            RawQuantity::Number(v) => *v,
            RawQuantity::Int(v) => *v as f64,
            RawQuantity::Text(s) => parse_quantity(s, dim).map_err(|m| self.err(q.span().start, key, m))?,
        };
        if !v.is_finite() {
            return Err(self.err(q.span().start, key, "value is not finite"));
        }
        Ok(v)
    }

    fn opt(&self, q: &Option<Q>, key: &str, dim: Dimension, default: f64) -> Result<f64> {
        q.as_ref().map_or(Ok(default), |q| self.q(q, key, dim))
    }

    fn req(&self, q: &Option<Q>, key: &str, dim: Dimension, at: usize) -> Result<f64> {
        match q {
            Some(q) => self.q(q, key, dim),
            None => Err(self.err(at, key, "missing")),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    modes: Option<usize>,
    threads: Option<usize>,
    output_dir: Option<String>,
    design: Option<Spanned<RawDesign>>,
    materials: Option<Spanned<RawMaterials>>,
    mesh: Option<RawMesh>,
    solver: Option<RawSolver>,
    resistance: Option<RawResistance>,
    scenario: Option<RawScenario>,
    pso: Option<RawPso>,
    events: Option<RawEvents>,
    quiet: Option<RawQuiet>,
    clustering: Option<RawClustering>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    #[serde(rename = "L")]
    length: Option<Q>,
    #[serde(rename = "R")]
    aspect_ratio: Option<Q>,
    l: Option<Q>,
    #[serde(rename = "H")]
    piezo_thickness: Option<Q>,
    h: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterials {
    preset: Option<String>,
    name: Option<String>,
    substrate: Option<Spanned<RawSubstrate>>,
    piezo: Option<Spanned<RawPiezo>>,
    damping: Option<Spanned<RawDamping>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubstrate {
    density: Option<Q>,
    youngs_modulus: Option<Q>,
    poisson: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiezo {
    density: Option<Q>,
    c11: Option<Q>,
    c12: Option<Q>,
    c13: Option<Q>,
    c33: Option<Q>,
    c66: Option<Q>,
    e31: Option<Q>,
    e33: Option<Q>,
    eps33: Option<Q>,
    s11: Option<Q>,
    d31: Option<Q>,
    eps33_t: Option<Q>,
    nu: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDamping {
    kind: String,
    alpha: Option<Q>,
    beta: Option<Q>,
    ratio: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    degree: Option<usize>,
    elements: Option<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResistance {
    min: Option<Q>,
    max: Option<Q>,
    max_iterations: Option<usize>,
    x_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    free: Vec<RawBound>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBound {
    name: String,
    lower: Q,
    upper: Q,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPso {
    particles: Option<usize>,
    inertia: Option<f64>,
    cognitive: Option<f64>,
    social: Option<f64>,
    iterations: Option<usize>,
    plateau_tol: Option<f64>,
    patience: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvents {
    threshold: Option<Q>,
    window: Option<Q>,
    peak_at: Option<Q>,
    min_separation: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuiet {
    count: Option<usize>,
    window: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClustering {
    k_min: Option<usize>,
    k_max: Option<usize>,
    restarts: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteringParams {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 10,
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuietParams {
    pub count: usize,
    /// [s]
    pub window: f64,
}

/// Fully resolved run configuration, SI units throughout.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub modes: usize,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
    pub design: DesignVector,
    pub materials: MaterialSet,
    pub refinement: Refinement,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub resistance: ResistanceOptions,
    pub free: Vec<VariableBound>,
    pub pso: PsoParams,
    pub events: EventParams,
    pub quiet: QuietParams,
    pub clustering: ClusteringParams,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// A bundled configuration by name.
    pub fn fixture(name: &str) -> Result<Self> {
        Self::parse(fixture_source(name)?, name)
    }

    /// Parses TOML text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            match line {
                Some(l) => Error::Config(format!("{origin}:{l}: {}", e.message())),
                None => Error::Config(format!("{origin}: {}", e.message())),
            }
        })?;
        let ctx = Ctx { source: text, origin };

        let materials = match &raw.materials {
            Some(m) => resolve_materials(&ctx, m)?,
            None => MaterialSet::bronze_pzt5a(),
        };

        let design = match &raw.design {
            Some(d) => {
                let at = d.span().start;
                let d = d.get_ref();
                DesignVector::new(
                    ctx.req(&d.length, "design.L", Dimension::Length, at)?,
                    ctx.opt(&d.aspect_ratio, "design.R", Dimension::Dimensionless, 1.0)?,
                    ctx.opt(&d.l, "design.l", Dimension::Dimensionless, 1.0)?,
                    ctx.opt(&d.piezo_thickness, "design.H", Dimension::Dimensionless, 0.25)?,
                    ctx.opt(&d.h, "design.h", Dimension::Length, 1e-3)?,
                )
            }
            None => DesignVector::new(0.2, 1.0, 1.0, 0.25, 1e-3),
        };

        let mut refinement = Refinement::default();
        if let Some(m) = &raw.mesh {
            if let Some(p) = m.degree {
                refinement.degree = p;
            }
            if let Some([a, b]) = m.elements {
                refinement.elements_xi = a;
                refinement.elements_eta = b;
            }
        }

        let (rel_tol, abs_tol) = match &raw.solver {
            Some(s) => (s.rel_tol.unwrap_or(1e-6), s.abs_tol.unwrap_or(1e-9)),
            None => (1e-6, 1e-9),
        };
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(Error::Config(format!("{origin}: solver tolerances must be positive")));
        }

        let mut resistance = ResistanceOptions::default();
        if let Some(r) = &raw.resistance {
            resistance.bounds = (
                ctx.opt(&r.min, "resistance.min", Dimension::Resistance, 1e2)?,
                ctx.opt(&r.max, "resistance.max", Dimension::Resistance, 1e7)?,
            );
            if let Some(n) = r.max_iterations {
                resistance.nelder_mead.max_iterations = n;
            }
            if let Some(x) = r.x_tol {
                resistance.nelder_mead.x_tol = x;
            }
        }

        let free = match &raw.scenario {
            Some(s) => s
                .free
                .iter()
                .map(|b| {
                    let dim = if b.name == "L" { Dimension::Length } else { Dimension::Dimensionless };
                    let key = format!("scenario.free.{}", b.name);
                    Ok(VariableBound::new(&b.name, ctx.q(&b.lower, &key, dim)?, ctx.q(&b.upper, &key, dim)?))
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![],
        };

        let seed = raw.seed.unwrap_or(0);
        let mut pso = PsoParams {
            seed,
            ..Default::default()
        };
        if let Some(p) = &raw.pso {
            pso.particles = p.particles.unwrap_or(pso.particles);
            pso.inertia = p.inertia.unwrap_or(pso.inertia);
            pso.cognitive = p.cognitive.unwrap_or(pso.cognitive);
            pso.social = p.social.unwrap_or(pso.social);
            pso.iterations = p.iterations.unwrap_or(pso.iterations);
            pso.plateau_tol = p.plateau_tol.unwrap_or(pso.plateau_tol);
            pso.patience = p.patience.unwrap_or(pso.patience);
        }

        let mut events = EventParams::default();
        if let Some(e) = &raw.events {
            events.threshold = ctx.opt(&e.threshold, "events.threshold", Dimension::Acceleration, events.threshold)?;
            events.window = ctx.opt(&e.window, "events.window", Dimension::Time, events.window)?;
            events.peak_at = ctx.opt(&e.peak_at, "events.peak_at", Dimension::Time, events.peak_at)?;
            events.min_separation = ctx.opt(
                &e.min_separation,
                "events.min_separation",
                Dimension::Time,
                events.min_separation,
            )?;
        }

        let quiet = QuietParams {
            count: raw.quiet.as_ref().and_then(|q| q.count).unwrap_or(100),
            window: match &raw.quiet {
                Some(q) => ctx.opt(&q.window, "quiet.window", Dimension::Time, events.window)?,
                None => events.window,
            },
        };

        let mut clustering = ClusteringParams::default();
        if let Some(c) = &raw.clustering {
            clustering.k_min = c.k_min.unwrap_or(clustering.k_min);
            clustering.k_max = c.k_max.unwrap_or(clustering.k_max);
            clustering.restarts = c.restarts.unwrap_or(clustering.restarts);
        }

        Ok(Self {
            seed,
            modes: raw.modes.unwrap_or(30),
            threads: raw.threads.unwrap_or(0),
            output_dir: raw.output_dir.map(PathBuf::from),
            design,
            materials,
            refinement,
            rel_tol,
            abs_tol,
            resistance,
            free,
            pso,
            events,
            quiet,
            clustering,
        })
    }

    /// Optimization scenario built from the `[scenario]` bounds and the design as base.
    pub fn scenario(&self) -> Result<OptimizationScenario> {
        let s = OptimizationScenario {
            free: self.free.clone(),
            base: self.design,
            materials: self.materials.clone(),
            refinement: self.refinement,
            modes: self.modes,
            resistance: self.resistance,
            pso: self.pso,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
        };
        s.validate()?;
        Ok(s)
    }
}

fn fixture_source(name: &str) -> Result<&'static str> {
    match name {
        "verification_device" => Ok(VERIFICATION_DEVICE),
        "commercial_bimorph" => Ok(COMMERCIAL_BIMORPH),
        other => Err(Error::Config(format!(
            "unknown bundled fixture '{other}' (known: verification_device, commercial_bimorph)"
        ))),
    }
}

fn resolve_materials(ctx: &Ctx, m: &Spanned<RawMaterials>) -> Result<MaterialSet> {
    let at = m.span().start;
    let m = m.get_ref();
    if let Some(preset) = &m.preset {
        if m.substrate.is_some() || m.piezo.is_some() || m.damping.is_some() {
            return Err(ctx.err(at, "materials", "give either a preset or explicit tables, not both"));
        }
        let src = fixture_source(preset).map_err(|_| ctx.err(at, "materials.preset", format!("unknown preset '{preset}'")))?;
        return RunConfig::parse(src, preset).map(|c| c.materials);
    }
    let name = m.name.clone().unwrap_or_else(|| "custom".into());
    let sub = m.substrate.as_ref().ok_or_else(|| ctx.err(at, "materials.substrate", "missing"))?;
    let sub_at = sub.span().start;
    let sub = sub.get_ref();
    let pz = m.piezo.as_ref().ok_or_else(|| ctx.err(at, "materials.piezo", "missing"))?;
    let pz_at = pz.span().start;
    let pz = pz.get_ref();

    let piezo = if pz.s11.is_some() || pz.d31.is_some() {
        from_strain_charge(
            ctx.req(&pz.s11, "materials.piezo.s11", Dimension::Compliance, pz_at)?,
            ctx.req(&pz.d31, "materials.piezo.d31", Dimension::ChargeConstant, pz_at)?,
            ctx.req(&pz.eps33_t, "materials.piezo.eps33_t", Dimension::Permittivity, pz_at)?,
            ctx.opt(&pz.nu, "materials.piezo.nu", Dimension::Dimensionless, 0.0)?,
        )
    } else {
        let s = Dimension::Stress;
        plane_stress_condense(&PiezoStiffnessConstants {
            c11: ctx.req(&pz.c11, "materials.piezo.c11", s, pz_at)?,
            c12: ctx.req(&pz.c12, "materials.piezo.c12", s, pz_at)?,
            c13: ctx.req(&pz.c13, "materials.piezo.c13", s, pz_at)?,
            c33: ctx.req(&pz.c33, "materials.piezo.c33", s, pz_at)?,
            c66: ctx.req(&pz.c66, "materials.piezo.c66", s, pz_at)?,
            e31: ctx.req(&pz.e31, "materials.piezo.e31", Dimension::Coupling, pz_at)?,
            e33: ctx.req(&pz.e33, "materials.piezo.e33", Dimension::Coupling, pz_at)?,
            eps33: ctx.req(&pz.eps33, "materials.piezo.eps33", Dimension::Permittivity, pz_at)?,
        })
    }
    .map_err(|e| ctx.err(pz_at, "materials.piezo", e))?;

    let damping = match &m.damping {
        None => Damping::Rayleigh { alpha: 0.0, beta: 0.0 },
        Some(d) => {
            let d_at = d.span().start;
            let d = d.get_ref();
            match d.kind.as_str() {
                "rayleigh" => Damping::Rayleigh {
                    alpha: ctx.opt(&d.alpha, "materials.damping.alpha", Dimension::Dimensionless, 0.0)?,
                    beta: ctx.opt(&d.beta, "materials.damping.beta", Dimension::Dimensionless, 0.0)?,
                },
                "modal" => Damping::Modal {
                    ratio: ctx.req(&d.ratio, "materials.damping.ratio", Dimension::Dimensionless, d_at)?,
                },
                other => return Err(ctx.err(d_at, "materials.damping.kind", format!("unknown kind '{other}'"))),
            }
        }
    };

    MaterialSet::new(
        name,
        ctx.req(&sub.density, "materials.substrate.density", Dimension::Density, sub_at)?,
        ctx.req(&sub.youngs_modulus, "materials.substrate.youngs_modulus", Dimension::Stress, sub_at)?,
        ctx.opt(&sub.poisson, "materials.substrate.poisson", Dimension::Dimensionless, 0.3)?,
        ctx.req(&pz.density, "materials.piezo.density", Dimension::Density, pz_at)?,
        piezo,
        damping,
    )
    .map_err(|e| ctx.err(at, "materials", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantities() {
        assert_relative_eq!(parse_quantity("20 cm", Dimension::Length).unwrap(), 0.2);
        assert_relative_eq!(parse_quantity("0.25mm", Dimension::Length).unwrap(), 2.5e-4);
        assert_relative_eq!(parse_quantity("105 GPa", Dimension::Stress).unwrap(), 105e9);
        assert_relative_eq!(parse_quantity("15.2 pm^2/N", Dimension::Compliance).unwrap(), 15.2e-12);
        assert_relative_eq!(parse_quantity("-190 pC/N", Dimension::ChargeConstant).unwrap(), -190e-12);
        assert_relative_eq!(parse_quantity("1e-3 m", Dimension::Length).unwrap(), 1e-3);
        assert_relative_eq!(parse_quantity("1800 eps0", Dimension::Permittivity).unwrap(), 1800.0 * EPSILON_0);
        assert!(parse_quantity("20 GPa", Dimension::Length).is_err());
        assert!(parse_quantity("cm", Dimension::Length).is_err());
    }

    #[test]
    fn verification_fixture_matches_builtin_set() {
        let c = RunConfig::fixture("verification_device").unwrap();
        let b = MaterialSet::bronze_pzt5a();
        assert_eq!(c.materials.name, b.name);
        assert!((c.materials.substrate_stiffness - b.substrate_stiffness).abs().max() < 1e-3);
        assert!((c.materials.piezo_stiffness - b.piezo_stiffness).abs().max() < 1e-3);
        assert_relative_eq!(c.materials.permittivity, b.permittivity, max_relative = 1e-14);
        assert_eq!(c.materials.damping, b.damping);
        assert_relative_eq!(c.design.length, 0.2);
        let g = c.design.to_geometry().unwrap();
        assert_relative_eq!(g.substrate_thickness, 0.5e-3, max_relative = 1e-12);
        assert_eq!(c.refinement, Refinement::default());
    }

    #[test]
    fn commercial_fixture() {
        let c = RunConfig::fixture("commercial_bimorph").unwrap();
        let g = c.design.to_geometry().unwrap();
        assert_relative_eq!(g.piezo_thickness, 0.245e-3, max_relative = 1e-9);
        assert_relative_eq!(g.substrate_thickness, 0.232e-3, max_relative = 1e-9);
        assert_relative_eq!(g.width, 10.3e-3, max_relative = 1e-9);
        assert_eq!(c.materials.damping, Damping::Modal { ratio: 0.0126 });
        assert_relative_eq!(c.materials.piezo_coupling[0], 292.8e-12 / 15.2e-12, max_relative = 1e-12);
    }

    #[test]
    fn preset_and_scenario() {
        let text = r#"
seed = 9
[materials]
preset = "verification_device"
[design]
L = "30 cm"
[scenario]
free = [{ name = "L", lower = "10 cm", upper = "50 cm" }, { name = "H", lower = 0.05, upper = 0.45 }]
[events]
threshold = "0.2 m/s^2"
"#;
        let c = RunConfig::parse(text, "inline").unwrap();
        assert_eq!(c.pso.seed, 9);
        let s = c.scenario().unwrap();
        assert_eq!(s.free.len(), 2);
        assert_relative_eq!(s.free[0].upper, 0.5);
        assert_relative_eq!(c.events.threshold, 0.2);
    }

    #[test]
    fn errors_carry_file_and_line() {
        let text = "seed = 1\n[design]\nL = \"20 parsecs\"\n";
        let e = RunConfig::parse(text, "bad.toml").unwrap_err().to_string();
        assert!(e.contains("bad.toml:3"), "{e}");
        let e = RunConfig::parse("seed = 1\nbogus = 2\n", "bad.toml").unwrap_err().to_string();
        assert!(e.contains("bad.toml:2"), "{e}");
        assert!(RunConfig::fixture("nope").is_err());
    }
}
