//! Full-order electromechanical system
//!
//! ```text
//! M w'' + C w' + K w - Theta v = F a_b
//! C_p v' + v / R_l + Theta^T w' = 0
//! ```
//!
//! Through-thickness integrals are evaluated in closed form per layer. Under the
//! skins (`x <= L_pzt`) the section is substructure core plus two piezo layers;
//! beyond it the substructure fills the full thickness `h_s + 2 h_p`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::discretization::{BSplinePatch, BasisValues, DofMap};
use crate::error::{Error, Result};
use crate::geometry::DeviceGeometry;
use crate::materials::MaterialSet;

/// Per-area section resultants of one laminate zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    /// `int rho dz` [kg/m^2].
    pub mass: f64,
    /// `int rho z^2 dz` [kg].
    pub rotary_inertia: f64,
    /// `int z^2 c dz` [N m].
    pub bending: Matrix3<f64>,
    /// Coupling resultant `(e31, e32, 0) (h_s + h_p) / 2` for the series pair [C/m].
    pub coupling: Vector3<f64>,
}

impl Section {
    /// Substructure core with a piezo skin on each face.
    pub fn covered(geom: &DeviceGeometry, mat: &MaterialSet) -> Self {
        let hs = geom.substrate_thickness;
        let hp = geom.piezo_thickness;
        let zb = 0.5 * hs;
        let zt = zb + hp;
        // both skins together
        let skin_z2 = 2.0 * (zt.powi(3) - zb.powi(3)) / 3.0;
        let core_z2 = hs.powi(3) / 12.0;
        let arm = 0.5 * (hs + hp);
        let [e31, e32] = mat.piezo_coupling;
        Self {
            mass: mat.substrate_density * hs + 2.0 * mat.piezo_density * hp,
            rotary_inertia: mat.substrate_density * core_z2 + mat.piezo_density * skin_z2,
            bending: mat.substrate_stiffness * core_z2 + mat.piezo_stiffness * skin_z2,
            coupling: if hp > 0.0 {
                Vector3::new(e31 * arm, e32 * arm, 0.0)
            } else {
                Vector3::zeros()
            },
        }
    }

    /// Full-thickness substructure beyond the piezo edge.
    pub fn uncovered(geom: &DeviceGeometry, mat: &MaterialSet) -> Self {
        let h = geom.total_thickness();
        let z2 = h.powi(3) / 12.0;
        Self {
            mass: mat.substrate_density * h,
            rotary_inertia: mat.substrate_density * z2,
            bending: mat.substrate_stiffness * z2,
            coupling: Vector3::zeros(),
        }
    }
}

/// Series-connected bimorph capacitance `eps W L_pzt / (2 h_p)`.
pub fn capacitance(geom: &DeviceGeometry, mat: &MaterialSet) -> Result<f64> {
    if !(geom.piezo_thickness > 0.0) || !(geom.piezo_length > 0.0) {
        return Err(Error::NoPiezo(format!(
            "h_p = {}, L_pzt = {}",
            geom.piezo_thickness, geom.piezo_length
        )));
    }
    Ok(mat.permittivity * geom.piezo_area() / (2.0 * geom.piezo_thickness))
}

/// `C = alpha M + beta K`.
pub fn rayleigh_damping(mass: &DMatrix<f64>, stiffness: &DMatrix<f64>, alpha: f64, beta: f64) -> DMatrix<f64> {
    mass * alpha + stiffness * beta
}

/// Matrices restricted to the free (unclamped) dofs.
#[derive(Debug, Clone)]
pub struct FreeSystem {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub coupling: DVector<f64>,
    pub forcing: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct AssembledModel {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub coupling: DVector<f64>,
    /// `F = translational + rotary`.
    pub forcing: DVector<f64>,
    pub forcing_translational: DVector<f64>,
    pub forcing_rotary: DVector<f64>,
    /// `None` for a plate without piezo material.
    pub capacitance: Option<f64>,
    pub dof_map: DofMap,
    pub geometry: DeviceGeometry,
    pub materials: MaterialSet,
}

impl AssembledModel {
    pub fn assemble(patch: &BSplinePatch, geom: &DeviceGeometry, materials: &MaterialSet) -> Result<Self> {
        let n = patch.num_basis();
        let covered = Section::covered(geom, materials);
        let uncovered = Section::uncovered(geom, materials);

        let mut mass = DMatrix::<f64>::zeros(n, n);
        let mut stiffness = DMatrix::<f64>::zeros(n, n);
        let mut coupling = DVector::<f64>::zeros(n);
        let mut f_trans = DVector::<f64>::zeros(n);
        let mut f_rot = DVector::<f64>::zeros(n);

        let jac = patch.jacobian();
        let mut b = BasisValues::default();
        let mut curv: Vec<Vector3<f64>> = Vec::new();
        let mut dcurv: Vec<Vector3<f64>> = Vec::new();

        for e in &patch.elements {
            let s = if e.covered { &covered } else { &uncovered };
            let xi_pts: Vec<(f64, f64, Vec<Vec<f64>>)> = patch
                .rule
                .mapped(e.xi.0, e.xi.1)
                .map(|(u, w)| (u, w, patch.knots_xi.basis_derivatives(e.span_xi, u, 2)))
                .collect();
            let eta_pts: Vec<(f64, f64, Vec<Vec<f64>>)> = patch
                .rule
                .mapped(e.eta.0, e.eta.1)
                .map(|(v, w)| (v, w, patch.knots_eta.basis_derivatives(e.span_eta, v, 2)))
                .collect();

            for (_, wu, bx) in &xi_pts {
                for (_, wv, by) in &eta_pts {
                    patch.combine(e.span_xi, e.span_eta, bx, by, &mut b);
                    let da = wu * wv * jac;
                    let m = b.n.len();

                    // B_I = -(N_xx, N_yy, 2 N_xy)
                    curv.clear();
                    curv.extend((0..m).map(|a| -Vector3::new(b.nxx[a], b.nyy[a], 2.0 * b.nxy[a])));
                    dcurv.clear();
                    dcurv.extend(curv.iter().map(|c| s.bending * c));

                    let sum_nx: f64 = b.nx.iter().sum();
                    let sum_ny: f64 = b.ny.iter().sum();
                    for a in 0..m {
                        let i = b.indices[a];
                        f_trans[i] += da * s.mass * b.n[a];
                        // sum over every J of the rotary term
                        f_rot[i] += da * s.rotary_inertia * (b.nx[a] * sum_nx + b.ny[a] * sum_ny);
                        coupling[i] += da * s.coupling.dot(&curv[a]);
                        for c in 0..m {
                            let j = b.indices[c];
                            mass[(i, j)] += da
                                * (s.mass * b.n[a] * b.n[c]
                                    + s.rotary_inertia * (b.nx[a] * b.nx[c] + b.ny[a] * b.ny[c]));
                            stiffness[(i, j)] += da * curv[a].dot(&dcurv[c]);
                        }
                    }
                }
            }
        }

        symmetrize(&mut mass);
        symmetrize(&mut stiffness);
        let (alpha, beta) = materials.damping.rayleigh_coefficients();
        let damping = rayleigh_damping(&mass, &stiffness, alpha, beta);
        let dof_map = patch.clamped_dofs();
        if dof_map.num_free() == 0 {
            return Err(Error::Constraint("clamp removes every degree of freedom".into()));
        }
        let capacitance = capacitance(geom, materials).ok();

        Ok(Self {
            mass,
            stiffness,
            damping,
            coupling,
            forcing: &f_trans + &f_rot,
            forcing_translational: f_trans,
            forcing_rotary: f_rot,
            capacitance,
            dof_map,
            geometry: *geom,
            materials: materials.clone(),
        })
    }

    /// Restriction to the free dofs.
    pub fn constrained(&self) -> FreeSystem {
        let free = &self.dof_map.free;
        let nf = free.len();
        let pick = |m: &DMatrix<f64>| DMatrix::from_fn(nf, nf, |r, c| m[(free[r], free[c])]);
        let pick_v = |v: &DVector<f64>| DVector::from_fn(nf, |r, _| v[free[r]]);
        FreeSystem {
            mass: pick(&self.mass),
            stiffness: pick(&self.stiffness),
            damping: pick(&self.damping),
            coupling: pick_v(&self.coupling),
            forcing: pick_v(&self.forcing),
        }
    }

    pub fn num_free(&self) -> usize {
        self.dof_map.num_free()
    }

    /// Writes `M` and `K` as dense row-major text into `dir`.
    pub fn dump(&self, dir: &std::path::Path) -> Result<()> {
        use std::io::Write;
        std::fs::create_dir_all(dir)?;
        for (name, m) in [("M.txt", &self.mass), ("K.txt", &self.stiffness), ("C.txt", &self.damping)] {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
            for r in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
                writeln!(f, "{}", row.join(" "))?;
            }
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("vectors.txt"))?);
        writeln!(f, "# Theta F")?;
        for i in 0..self.coupling.len() {
            writeln!(f, "{:e} {:e}", self.coupling[i], self.forcing[i])?;
        }
        Ok(())
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in r + 1..n {
            let avg = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = avg;
            m[(c, r)] = avg;
        }
    }
}
