//! Undamped modes of the clamped plate and the mass-normalized reduced system
//!
//! ```text
//! eta'' + c_o eta' + k_o eta - theta_o v = f_o a_b
//! C_p v' + v / R_l + (Theta^T Phi) eta' = 0
//! ```

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assembly::AssembledModel;
use crate::error::{Error, Result};
use crate::materials::Damping;

/// Smallest `count` eigenpairs of `K phi = w^2 M phi`, mass-normalized.
///
/// `M` is Cholesky-factored and the pencil reduced to a standard symmetric
/// problem. Returns `(w^2 ascending, Phi)` with `Phi^T M Phi = I`.
pub fn generalized_eigen(stiffness: &DMatrix<f64>, mass: &DMatrix<f64>, count: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = mass.nrows();
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("requested {count} modes of a {n}-dof system")));
    }
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigenFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(stiffness)
        .ok_or_else(|| Error::EigenFailure("triangular solve failed".into()))?;
    let mut a = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::EigenFailure("triangular solve failed".into()))?;
    for r in 0..n {
        for c in r + 1..n {
            let v = 0.5 * (a[(r, c)] + a[(c, r)]);
            a[(r, c)] = v;
            a[(c, r)] = v;
        }
    }
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(count);

    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if let Some(bad) = lambdas.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::EigenFailure(format!("non-positive eigenvalue {bad}")));
    }
    let y = DMatrix::from_fn(n, count, |r, c| eig.eigenvectors[(r, order[c])]);
    let phi = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::EigenFailure("back substitution failed".into()))?;
    Ok((lambdas, phi))
}

/// Retained undamped modes on the free dofs.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    /// Natural frequencies, ascending [rad/s].
    pub omegas: Vec<f64>,
    /// Mode shapes as columns, free-dof length.
    pub shapes: DMatrix<f64>,
    /// `Phi^T M Phi`; identity up to round-off.
    pub modal_mass: DMatrix<f64>,
}

impl ModalBasis {
    pub fn solve(model: &AssembledModel, count: usize) -> Result<Self> {
        let free = model.constrained();
        if count == 0 || count > free.mass.nrows() {
            return Err(Error::InvalidInput(format!(
                "mode count {count} outside 1..={}",
                free.mass.nrows()
            )));
        }
        let (lambdas, shapes) = generalized_eigen(&free.stiffness, &free.mass, count)?;
        let modal_mass = shapes.transpose() * &free.mass * &shapes;
        Ok(Self {
            omegas: lambdas.iter().map(|l| l.sqrt()).collect(),
            shapes,
            modal_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// The first `count` modes.
    pub fn truncate(&self, count: usize) -> Self {
        let k = count.min(self.len());
        Self {
            omegas: self.omegas[..k].to_vec(),
            shapes: self.shapes.columns(0, k).into_owned(),
            modal_mass: self.modal_mass.view((0, 0), (k, k)).into_owned(),
        }
    }
}

/// Mass-normalized modal system with a resistive load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedModel {
    /// Natural frequencies [rad/s].
    pub omegas: Vec<f64>,
    /// Modal damping ratios.
    pub zetas: Vec<f64>,
    /// Diagonal of `k_o` (`w_i^2`).
    pub stiffness: Vec<f64>,
    /// Diagonal of `c_o` (`2 zeta_i w_i`).
    pub damping: Vec<f64>,
    /// `theta_o = m_o^-1 Phi^T Theta`.
    pub theta: Vec<f64>,
    /// `f_o = m_o^-1 Phi^T F`.
    pub forcing: Vec<f64>,
    /// `Theta^T Phi`, drives the circuit equation.
    pub coupling_row: Vec<f64>,
    /// Piezo capacitance [F].
    pub capacitance: f64,
    /// Load resistance [Ohm].
    pub resistance: f64,
}

impl ReducedModel {
    pub fn reduce(model: &AssembledModel, basis: &ModalBasis, resistance: f64) -> Result<Self> {
        let capacitance = model
            .capacitance
            .ok_or_else(|| Error::NoPiezo("device carries no piezo layers".into()))?;
        if !(resistance > 0.0 && resistance.is_finite()) {
            return Err(Error::InvalidInput(format!("load resistance {resistance} must be positive")));
        }
        let free = model.constrained();
        let mo = &basis.modal_mass;
        let phi_t = basis.shapes.transpose();
        let theta_raw = &phi_t * &free.coupling;
        let force_raw = &phi_t * &free.forcing;
        // m_o is diagonal after mass normalization
        let inv = |v: &DVector<f64>| -> Vec<f64> { (0..v.len()).map(|i| v[i] / mo[(i, i)]).collect() };
        let zetas: Vec<f64> = basis.omegas.iter().map(|&w| model.materials.damping.ratio(w)).collect();
        Ok(Self {
            stiffness: basis.omegas.iter().map(|w| w * w).collect(),
            damping: basis.omegas.iter().zip(&zetas).map(|(w, z)| 2.0 * z * w).collect(),
            theta: inv(&theta_raw),
            forcing: inv(&force_raw),
            coupling_row: theta_raw.iter().copied().collect(),
            omegas: basis.omegas.clone(),
            zetas,
            capacitance,
            resistance,
        })
    }

    pub fn with_resistance(&self, resistance: f64) -> Self {
        Self {
            resistance,
            ..self.clone()
        }
    }

    pub fn num_modes(&self) -> usize {
        self.omegas.len()
    }

    /// Same modal system with the given damping model.
    pub fn with_damping(&self, damping: Damping) -> Self {
        let zetas: Vec<f64> = self.omegas.iter().map(|&w| damping.ratio(w)).collect();
        Self {
            damping: self.omegas.iter().zip(&zetas).map(|(w, z)| 2.0 * z * w).collect(),
            zetas,
            ..self.clone()
        }
    }

    /// Keeps the first `count` modes.
    pub fn truncate(&self, count: usize) -> Self {
        let k = count.min(self.num_modes());
        Self {
            omegas: self.omegas[..k].to_vec(),
            zetas: self.zetas[..k].to_vec(),
            stiffness: self.stiffness[..k].to_vec(),
            damping: self.damping[..k].to_vec(),
            theta: self.theta[..k].to_vec(),
            forcing: self.forcing[..k].to_vec(),
            coupling_row: self.coupling_row[..k].to_vec(),
            ..self.clone()
        }
    }
}

/// `m_o^-1 Phi^T C Phi` formed explicitly from the full damping matrix.
pub fn projected_damping(model: &AssembledModel, basis: &ModalBasis) -> DMatrix<f64> {
    let free = model.constrained();
    let proj = basis.shapes.transpose() * &free.damping * &basis.shapes;
    let mo_inv = basis.modal_mass.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(basis.len(), basis.len()));
    mo_inv * proj
}

/// Everything needed to go from a design to a reduced system.
pub fn build_reduced(
    design: &crate::geometry::DesignVector,
    materials: &crate::materials::MaterialSet,
    refinement: crate::discretization::Refinement,
    modes: usize,
    resistance: f64,
) -> Result<(AssembledModel, ModalBasis, ReducedModel)> {
    let geom = design.to_geometry()?;
    let patch = crate::discretization::BSplinePatch::build(&geom, refinement)?;
    let model = AssembledModel::assemble(&patch, &geom, materials)?;
    let count = modes.min(model.num_free());
    let basis = ModalBasis::solve(&model, count)?;
    let reduced = ReducedModel::reduce(&model, &basis, resistance)?;
    Ok((model, basis, reduced))
}
