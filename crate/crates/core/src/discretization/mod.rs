//! Tensor-product B-spline patch over the rectangular mid-surface.
//!
//! The geometry map is affine, `x = L xi`, `y = W eta`, realized by placing the
//! control points at the Greville abscissae. Physical derivatives follow from the
//! constant Jacobian `diag(L, W)`. Control point `(i, j)` (i along the length)
//! has global index `i * n_eta + j`.

mod knots;
mod quadrature;

pub use knots::KnotVector;
pub use quadrature::GaussRule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DeviceGeometry;

/// Spline degree and element counts per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub degree: usize,
    pub elements_xi: usize,
    pub elements_eta: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            degree: 3,
            elements_xi: 16,
            elements_eta: 16,
        }
    }
}

impl Refinement {
    pub fn new(degree: usize, elements_xi: usize, elements_eta: usize) -> Self {
        Self {
            degree,
            elements_xi,
            elements_eta,
        }
    }

    pub fn uniform(degree: usize, elements: usize) -> Self {
        Self::new(degree, elements, elements)
    }
}

/// One non-empty knot span of the patch.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub xi: (f64, f64),
    pub eta: (f64, f64),
    pub span_xi: usize,
    pub span_eta: usize,
    /// True when the element lies under the piezo skins (`x <= L_pzt`).
    pub covered: bool,
}

/// Basis functions active at one point together with their physical derivatives.
#[derive(Debug, Clone, Default)]
pub struct BasisValues {
    pub indices: Vec<usize>,
    pub n: Vec<f64>,
    pub nx: Vec<f64>,
    pub ny: Vec<f64>,
    pub nxx: Vec<f64>,
    pub nyy: Vec<f64>,
    pub nxy: Vec<f64>,
}

impl BasisValues {
    fn resize(&mut self, len: usize) {
        for v in [
            &mut self.n,
            &mut self.nx,
            &mut self.ny,
            &mut self.nxx,
            &mut self.nyy,
            &mut self.nxy,
        ] {
            v.clear();
            v.resize(len, 0.0);
        }
        self.indices.clear();
        self.indices.resize(len, 0);
    }
}

#[derive(Debug, Clone)]
pub struct BSplinePatch {
    pub knots_xi: KnotVector,
    pub knots_eta: KnotVector,
    pub length: f64,
    pub width: f64,
    /// Piezo coverage `L_pzt / L`; a knot sits exactly there when it is interior.
    pub interface: f64,
    /// Control net `(x, y)` in global index order.
    pub control_points: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub rule: GaussRule,
}

impl BSplinePatch {
    /// Builds the patch for `geom`, inserting a knot at the piezo edge.
    pub fn build(geom: &DeviceGeometry, refinement: Refinement) -> Result<Self> {
        let Refinement {
            degree,
            elements_xi,
            elements_eta,
        } = refinement;
        if elements_xi < 2 || elements_eta < 2 {
            return Err(Error::InvalidRefinement(format!(
                "need at least 2 elements per direction, got {elements_xi} x {elements_eta}"
            )));
        }
        let interface = geom.coverage();
        let knots_xi = KnotVector::uniform(degree, elements_xi, Some(interface))?;
        let knots_eta = KnotVector::uniform(degree, elements_eta, None)?;

        let gx = knots_xi.greville();
        let gy = knots_eta.greville();
        let mut control_points = Vec::with_capacity(gx.len() * gy.len());
        for &u in &gx {
            for &v in &gy {
                control_points.push([u * geom.length, v * geom.width]);
            }
        }

        let mut elements = Vec::new();
        for &(sx, a, b) in &knots_xi.spans() {
            for &(sy, c, d) in &knots_eta.spans() {
                elements.push(Element {
                    xi: (a, b),
                    eta: (c, d),
                    span_xi: sx,
                    span_eta: sy,
                    covered: 0.5 * (a + b) < interface,
                });
            }
        }

        Ok(Self {
            rule: GaussRule::new(degree + 1),
            knots_xi,
            knots_eta,
            length: geom.length,
            width: geom.width,
            interface,
            control_points,
            elements,
        })
    }

    pub fn degree(&self) -> usize {
        self.knots_xi.degree()
    }

    pub fn n_xi(&self) -> usize {
        self.knots_xi.len()
    }

    pub fn n_eta(&self) -> usize {
        self.knots_eta.len()
    }

    /// Total number of basis functions.
    pub fn num_basis(&self) -> usize {
        self.n_xi() * self.n_eta()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_eta() + j
    }

    /// Area Jacobian `dx dy = L W dxi deta`.
    pub fn jacobian(&self) -> f64 {
        self.length * self.width
    }

    /// Evaluates the active functions at `(xi, eta)` (clamped to the unit square).
    pub fn eval_basis(&self, xi: f64, eta: f64) -> BasisValues {
        let xi = xi.clamp(0.0, 1.0);
        let eta = eta.clamp(0.0, 1.0);
        let sx = self.knots_xi.find_span(xi);
        let sy = self.knots_eta.find_span(eta);
        let mut out = BasisValues::default();
        self.eval_into(sx, sy, xi, eta, &mut out);
        out
    }

    /// Evaluates into `out` on known spans; avoids reallocating in assembly loops.
    pub fn eval_into(&self, span_xi: usize, span_eta: usize, xi: f64, eta: f64, out: &mut BasisValues) {
        let p = self.degree();
        let q = self.knots_eta.degree();
        let bx = self.knots_xi.basis_derivatives(span_xi, xi, 2);
        let by = self.knots_eta.basis_derivatives(span_eta, eta, 2);
        self.combine(span_xi, span_eta, &bx, &by, out);
        debug_assert_eq!(out.n.len(), (p + 1) * (q + 1));
    }

    /// Forms tensor products of 1-D tables `[value, d1, d2][local]`.
    pub fn combine(&self, span_xi: usize, span_eta: usize, bx: &[Vec<f64>], by: &[Vec<f64>], out: &mut BasisValues) {
        let p = self.degree();
        let q = self.knots_eta.degree();
        let (il, jl) = (1.0 / self.length, 1.0 / self.width);
        out.resize((p + 1) * (q + 1));
        let mut k = 0;
        for a in 0..=p {
            let i = span_xi - p + a;
            for b in 0..=q {
                let j = span_eta - q + b;
                out.indices[k] = self.index(i, j);
                out.n[k] = bx[0][a] * by[0][b];
                out.nx[k] = bx[1][a] * by[0][b] * il;
                out.ny[k] = bx[0][a] * by[1][b] * jl;
                out.nxx[k] = bx[2][a] * by[0][b] * il * il;
                out.nyy[k] = bx[0][a] * by[2][b] * jl * jl;
                out.nxy[k] = bx[1][a] * by[1][b] * il * jl;
                k += 1;
            }
        }
    }

    /// Physical point of parametric `(xi, eta)` through the control net.
    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        let b = self.eval_basis(xi, eta);
        let mut x = [0.0; 2];
        for (k, &idx) in b.indices.iter().enumerate() {
            x[0] += b.n[k] * self.control_points[idx][0];
            x[1] += b.n[k] * self.control_points[idx][1];
        }
        x
    }

    /// Clamp along `x = 0`: the first two control-point columns are fixed.
    pub fn clamped_dofs(&self) -> DofMap {
        let n = self.num_basis();
        let constrained: Vec<usize> = (0..2)
            .flat_map(|i| (0..self.n_eta()).map(move |j| (i, j)))
            .map(|(i, j)| self.index(i, j))
            .collect();
        DofMap::new(n, constrained)
    }
}

/// Which control points are free after clamping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub total: usize,
    pub constrained: Vec<usize>,
    /// Global indices of free dofs, ascending.
    pub free: Vec<usize>,
}

impl DofMap {
    pub fn new(total: usize, mut constrained: Vec<usize>) -> Self {
        constrained.sort_unstable();
        constrained.dedup();
        let free = (0..total).filter(|i| constrained.binary_search(i).is_err()).collect();
        Self {
            total,
            constrained,
            free,
        }
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Scatters a free-dof vector back to full length, zero on constrained dofs.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.total];
        for (&g, &v) in self.free.iter().zip(free_values) {
            full[g] = v;
        }
        full
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DesignVector;
    use approx::assert_relative_eq;

    fn square(l: f64) -> DeviceGeometry {
        DesignVector::new(0.2, 1.0, l, 0.25, 0.001).to_geometry().unwrap()
    }

    #[test]
    fn basis_counts() {
        let p = BSplinePatch::build(&square(1.0), Refinement::uniform(2, 8)).unwrap();
        assert_eq!(p.num_basis(), 100);
        let p = BSplinePatch::build(&square(0.5), Refinement::uniform(2, 8)).unwrap();
        assert_eq!(p.n_xi(), 10);
        let p = BSplinePatch::build(&square(0.3), Refinement::uniform(2, 8)).unwrap();
        assert_eq!(p.n_xi(), 11);
        assert!(p.knots_xi.knots().iter().any(|&k| (k - 0.3).abs() < 1e-15));
        // elements never straddle the piezo edge
        for e in &p.elements {
            assert!(e.xi.1 <= 0.3 + 1e-12 || e.xi.0 >= 0.3 - 1e-12);
            assert_eq!(e.covered, e.xi.1 <= 0.3 + 1e-12);
        }
    }

    #[test]
    fn rejects_coarse_or_linear() {
        let g = square(1.0);
        assert!(BSplinePatch::build(&g, Refinement::uniform(1, 8)).is_err());
        assert!(BSplinePatch::build(&g, Refinement::new(3, 1, 8)).is_err());
    }

    #[test]
    fn partition_of_unity_and_derivatives() {
        let p = BSplinePatch::build(&square(0.6), Refinement::uniform(3, 5)).unwrap();
        for s in 0..=20 {
            for t in 0..=20 {
                let b = p.eval_basis(s as f64 / 20.0, t as f64 / 20.0);
                assert_relative_eq!(b.n.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                assert!(b.nx.iter().sum::<f64>().abs() < 1e-10);
                assert!(b.ny.iter().sum::<f64>().abs() < 1e-10);
                assert!(b.nxx.iter().sum::<f64>().abs() < 1e-10 * 400.0);
                assert!(b.nyy.iter().sum::<f64>().abs() < 1e-10 * 400.0);
                assert!(b.nxy.iter().sum::<f64>().abs() < 1e-10 * 400.0);
            }
        }
    }

    #[test]
    fn reproduces_linear_fields() {
        let g = DesignVector::new(0.3, 0.4, 0.55, 0.25, 0.001).to_geometry().unwrap();
        let p = BSplinePatch::build(&g, Refinement::uniform(3, 6)).unwrap();
        let (ax, ay, c) = (2.5, -1.25, 0.3);
        let coeffs: Vec<f64> = p.control_points.iter().map(|x| ax * x[0] + ay * x[1] + c).collect();
        for s in 0..=10 {
            for t in 0..=10 {
                let (xi, eta) = (s as f64 / 10.0, t as f64 / 10.0);
                let b = p.eval_basis(xi, eta);
                let dot = |v: &[f64]| -> f64 { b.indices.iter().zip(v).map(|(&i, &n)| coeffs[i] * n).sum() };
                assert_relative_eq!(dot(&b.nx), ax, epsilon = 1e-11);
                assert_relative_eq!(dot(&b.ny), ay, epsilon = 1e-11);
                assert!(dot(&b.nxx).abs() < 1e-8);
                let x = p.map(xi, eta);
                assert_relative_eq!(x[0], xi * g.length, epsilon = 1e-14);
                assert_relative_eq!(x[1], eta * g.width, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn clamp_enforces_zero_deflection_and_slope() {
        let p = BSplinePatch::build(&square(0.7), Refinement::uniform(3, 6)).unwrap();
        let dofs = p.clamped_dofs();
        assert_eq!(dofs.constrained.len(), 2 * p.n_eta());
        // arbitrary free coefficients
        let free: Vec<f64> = (0..dofs.num_free()).map(|k| ((k * 7919) % 97) as f64 / 13.0 - 3.0).collect();
        let w = dofs.expand(&free);
        for s in 0..50 {
            let eta = s as f64 / 49.0;
            let b = p.eval_basis(0.0, eta);
            let val: f64 = b.indices.iter().zip(&b.n).map(|(&i, &n)| w[i] * n).sum();
            let slope: f64 = b.indices.iter().zip(&b.nx).map(|(&i, &n)| w[i] * n).sum();
            assert!(val.abs() < 1e-12 && slope.abs() < 1e-12, "eta = {eta}: {val} {slope}");
        }
    }

    #[test]
    fn element_quadrature_integrates_mass_products_exactly() {
        // degree p+1 rule vs a 12-point reference on every element
        let p = BSplinePatch::build(&square(0.45), Refinement::uniform(3, 4)).unwrap();
        let reference = GaussRule::new(12);
        let n = p.num_basis();
        let integrate = |rule: &GaussRule| {
            let mut m = vec![0.0; n * n];
            for e in &p.elements {
                for (u, wu) in rule.mapped(e.xi.0, e.xi.1) {
                    for (v, wv) in rule.mapped(e.eta.0, e.eta.1) {
                        let mut b = BasisValues::default();
                        p.eval_into(e.span_xi, e.span_eta, u, v, &mut b);
                        for (a, &i) in b.indices.iter().enumerate() {
                            for (c, &j) in b.indices.iter().enumerate() {
                                m[i * n + j] += wu * wv * p.jacobian() * b.n[a] * b.n[c];
                            }
                        }
                    }
                }
            }
            m
        };
        let lo = integrate(&p.rule);
        let hi = integrate(&reference);
        let scale = hi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in lo.iter().zip(&hi) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }
}
