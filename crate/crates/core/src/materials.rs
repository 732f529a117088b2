//! Constitutive data for the substructure and the piezo skins.
//!
//! The plate model works with plane-stress matrices in Voigt order `(xx, yy, xy)`,
//! engineering shear. Three-dimensional piezo constants are condensed by
//! eliminating the transverse normal stress `T3 = 0`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854e-12;

/// Three-dimensional stiffness-form constants of a transversely isotropic piezo
/// ceramic poled along the thickness. SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiezoStiffnessConstants {
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c33: f64,
    pub c66: f64,
    pub e31: f64,
    pub e33: f64,
    /// Permittivity at constant strain [F/m].
    pub eps33: f64,
}

/// Plane-stress piezo constants consumed by the plate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedPiezo {
    pub stiffness: Matrix3<f64>,
    /// Effective `(e31, e32)` [C/m^2].
    pub coupling: [f64; 2],
    /// Effective permittivity [F/m].
    pub permittivity: f64,
}

/// Statically condenses out the transverse normal stress.
pub fn plane_stress_condense(raw: &PiezoStiffnessConstants) -> Result<CondensedPiezo> {
    let PiezoStiffnessConstants {
        c11,
        c12,
        c13,
        c33,
        c66,
        e31,
        e33,
        eps33,
    } = *raw;
    if !(c33 > 0.0) {
        return Err(Error::SingularMaterial(format!("c33 = {c33} must be positive")));
    }
    let c11b = c11 - c13 * c13 / c33;
    let c12b = c12 - c13 * c13 / c33;
    let e31b = e31 - e33 * c13 / c33;
    let stiffness = Matrix3::new(c11b, c12b, 0.0, c12b, c11b, 0.0, 0.0, 0.0, c66);
    Ok(CondensedPiezo {
        stiffness,
        coupling: [e31b, e31b],
        permittivity: eps33 + e33 * e33 / c33,
    })
}

/// Converts strain-charge constants of an in-plane isotropic sheet (`s11`, `d31`,
/// stress-free permittivity, in-plane Poisson ratio) to the plane-stress
/// stiffness form. With `nu = 0` this reduces to `e31 = d31 / s11`.
pub fn from_strain_charge(s11: f64, d31: f64, eps33_t: f64, nu: f64) -> Result<CondensedPiezo> {
    if !(s11 > 0.0) || !(nu > -1.0 && nu < 0.5) {
        return Err(Error::SingularMaterial(format!(
            "compliance s11 = {s11}, nu = {nu} not admissible"
        )));
    }
    let c11 = 1.0 / (s11 * (1.0 - nu * nu));
    let c12 = nu * c11;
    let c66 = 1.0 / (2.0 * s11 * (1.0 + nu));
    let e31 = d31 / (s11 * (1.0 - nu));
    let eps = eps33_t - 2.0 * d31 * d31 / (s11 * (1.0 - nu));
    if !(eps > 0.0) {
        return Err(Error::SingularMaterial(format!(
            "clamped permittivity {eps} is not positive"
        )));
    }
    Ok(CondensedPiezo {
        stiffness: Matrix3::new(c11, c12, 0.0, c12, c11, 0.0, 0.0, 0.0, c66),
        coupling: [e31, e31],
        permittivity: eps,
    })
}

/// Plane-stress matrix of an isotropic material.
pub fn isotropic_plane_stress(youngs: f64, nu: f64) -> Matrix3<f64> {
    let f = youngs / (1.0 - nu * nu);
    Matrix3::new(f, f * nu, 0.0, f * nu, f, 0.0, 0.0, 0.0, f * 0.5 * (1.0 - nu))
}

/// Mechanical dissipation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Damping {
    /// `C = alpha M + beta K`.
    Rayleigh { alpha: f64, beta: f64 },
    /// The same modal damping ratio on every retained mode.
    Modal { ratio: f64 },
}

impl Damping {
    /// Damping ratio of a mode with natural frequency `omega`.
    pub fn ratio(&self, omega: f64) -> f64 {
        match *self {
            Damping::Rayleigh { alpha, beta } => 0.5 * (alpha / omega + beta * omega),
            Damping::Modal { ratio } => ratio,
        }
    }

    /// Coefficients of the proportional damping matrix, `(0, 0)` for modal damping.
    pub fn rayleigh_coefficients(&self) -> (f64, f64) {
        match *self {
            Damping::Rayleigh { alpha, beta } => (alpha, beta),
            Damping::Modal { .. } => (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSet {
    pub name: String,
    /// Substructure density [kg/m^3].
    pub substrate_density: f64,
    /// Substructure plane-stress stiffness [Pa].
    pub substrate_stiffness: Matrix3<f64>,
    /// Piezo density [kg/m^3].
    pub piezo_density: f64,
    /// Piezo plane-stress stiffness at constant field [Pa].
    pub piezo_stiffness: Matrix3<f64>,
    /// Effective `(e31, e32)` [C/m^2].
    pub piezo_coupling: [f64; 2],
    /// Effective permittivity at constant strain [F/m].
    pub permittivity: f64,
    pub damping: Damping,
}

impl MaterialSet {
    pub fn new(
        name: impl Into<String>,
        substrate_density: f64,
        substrate_youngs: f64,
        substrate_poisson: f64,
        piezo_density: f64,
        piezo: CondensedPiezo,
        damping: Damping,
    ) -> Result<Self> {
        let set = Self {
            name: name.into(),
            substrate_density,
            substrate_stiffness: isotropic_plane_stress(substrate_youngs, substrate_poisson),
            piezo_density,
            piezo_stiffness: piezo.stiffness,
            piezo_coupling: piezo.coupling,
            permittivity: piezo.permittivity,
            damping,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.substrate_density >= 0.0 && self.piezo_density >= 0.0) {
            return Err(Error::SingularMaterial("densities must be non-negative".into()));
        }
        if !(self.permittivity > 0.0) {
            return Err(Error::SingularMaterial(format!(
                "permittivity {} must be positive",
                self.permittivity
            )));
        }
        for (label, c) in [
            ("substructure", &self.substrate_stiffness),
            ("piezo", &self.piezo_stiffness),
        ] {
            if !is_spd(c) {
                return Err(Error::SingularMaterial(format!(
                    "{label} stiffness is not symmetric positive definite"
                )));
            }
        }
        Ok(())
    }

    /// Bronze substructure with PZT-5A skins, used for the model-reduction
    /// verification device and the parametric design studies.
    pub fn bronze_pzt5a() -> Self {
        let raw = PiezoStiffnessConstants {
            c11: 120.3e9,
            c12: 75.2e9,
            c13: 75.1e9,
            c33: 110.9e9,
            c66: 22.7e9,
            e31: -5.2,
            e33: 15.9,
            eps33: 1800.0 * EPSILON_0,
        };
        let piezo = plane_stress_condense(&raw).expect("bundled constants are admissible");
        Self::new(
            "verification_device",
            9000.0,
            105e9,
            0.3,
            7800.0,
            piezo,
            Damping::Rayleigh {
                alpha: 14.65,
                beta: 1e-5,
            },
        )
        .expect("bundled material set is valid")
    }

    /// Copy with both densities multiplied by `s`.
    pub fn scale_density(&self, s: f64) -> Self {
        Self {
            substrate_density: self.substrate_density * s,
            piezo_density: self.piezo_density * s,
            ..self.clone()
        }
    }

    /// Copy with both stiffness matrices multiplied by `s`.
    pub fn scale_stiffness(&self, s: f64) -> Self {
        Self {
            substrate_stiffness: self.substrate_stiffness * s,
            piezo_stiffness: self.piezo_stiffness * s,
            ..self.clone()
        }
    }
}

fn is_spd(c: &Matrix3<f64>) -> bool {
    let sym = (c - c.transpose()).abs().max() <= 1e-12 * c.abs().max();
    sym && c.cholesky().is_some()
}
