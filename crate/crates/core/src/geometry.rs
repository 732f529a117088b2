//! Harvester geometry: the normalized design vector and the physical device it maps to.
//!
//! The device is a cantilevered three-layer plate. A substructure core of thickness
//! `h_s` is covered on both faces, over the first `L_pzt` of its length, by piezo
//! skins of thickness `h_p`. Beyond `L_pzt` the substructure fills the full
//! thickness `h_s + 2 h_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized harvester parameters `(L, R, l, H, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    /// Total length `L` [m].
    #[serde(rename = "L")]
    pub length: f64,
    /// Aspect ratio `R = W / L`.
    #[serde(rename = "R")]
    pub aspect_ratio: f64,
    /// Piezo coverage `l = L_pzt / L`.
    #[serde(rename = "l")]
    pub piezo_length: f64,
    /// Piezo thickness ratio `H = h_p / h`.
    #[serde(rename = "H")]
    pub piezo_thickness: f64,
    /// Total thickness `h` [m].
    #[serde(rename = "h")]
    pub thickness: f64,
}

impl DesignVector {
    pub fn new(length: f64, aspect_ratio: f64, piezo_length: f64, piezo_thickness: f64, thickness: f64) -> Self {
        Self {
            length,
            aspect_ratio,
            piezo_length,
            piezo_thickness,
            thickness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            length,
            aspect_ratio,
            piezo_length,
            piezo_thickness,
            thickness,
        } = *self;
        let finite = [length, aspect_ratio, piezo_length, piezo_thickness, thickness]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidDesign(format!("non-finite parameter in {self:?}")));
        }
        if length <= 0.0 || thickness <= 0.0 {
            return Err(Error::InvalidDesign(format!(
                "L = {length} and h = {thickness} must be positive"
            )));
        }
        if !(aspect_ratio > 0.0 && aspect_ratio <= 1.0) {
            return Err(Error::InvalidDesign(format!("R = {aspect_ratio} outside (0, 1]")));
        }
        if !(piezo_length > 0.0 && piezo_length <= 1.0) {
            return Err(Error::InvalidDesign(format!("l = {piezo_length} outside (0, 1]")));
        }
        if !(piezo_thickness > 0.0 && piezo_thickness < 0.5) {
            return Err(Error::InvalidDesign(format!(
                "H = {piezo_thickness} outside (0, 0.5); substructure thickness would vanish"
            )));
        }
        Ok(())
    }

    /// Maps the design onto physical dimensions.
    pub fn to_geometry(&self) -> Result<DeviceGeometry> {
        self.validate()?;
        let width = self.aspect_ratio * self.length;
        let piezo_length = self.piezo_length * self.length;
        let piezo_thickness = self.piezo_thickness * self.thickness;
        let substrate_thickness = self.thickness - 2.0 * piezo_thickness;
        DeviceGeometry::new(self.length, width, piezo_length, substrate_thickness, piezo_thickness)
    }

    /// Returns the named component (`"L"`, `"R"`, `"l"`, `"H"`, `"h"`).
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "L" => Some(self.length),
            "R" => Some(self.aspect_ratio),
            "l" => Some(self.piezo_length),
            "H" => Some(self.piezo_thickness),
            "h" => Some(self.thickness),
            _ => None,
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "L" => self.length = value,
            "R" => self.aspect_ratio = value,
            "l" => self.piezo_length = value,
            "H" => self.piezo_thickness = value,
            "h" => self.thickness = value,
            other => return Err(Error::InvalidInput(format!("unknown design variable '{other}'"))),
        }
        Ok(())
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1] x [z0, z1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
}

impl Cuboid {
    pub fn volume(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0) * (self.z.1 - self.z.0)
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        p[0] > self.x.0
            && p[0] < self.x.1
            && p[1] > self.y.0
            && p[1] < self.y.1
            && p[2] > self.z.0
            && p[2] < self.z.1
    }

    /// True when the open interiors intersect.
    pub fn overlaps(&self, other: &Cuboid) -> bool {
        let open = |a: (f64, f64), b: (f64, f64)| a.0.max(b.0) < a.1.min(b.1);
        open(self.x, other.x) && open(self.y, other.y) && open(self.z, other.z)
    }
}

/// Physical dimensions of the device, all in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    pub length: f64,
    pub width: f64,
    pub piezo_length: f64,
    pub substrate_thickness: f64,
    pub piezo_thickness: f64,
}

impl DeviceGeometry {
    /// `piezo_thickness` may be zero (bare substructure plate); every other
    /// dimension must be strictly positive.
    pub fn new(
        length: f64,
        width: f64,
        piezo_length: f64,
        substrate_thickness: f64,
        piezo_thickness: f64,
    ) -> Result<Self> {
        let positive = [length, width, piezo_length, substrate_thickness];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidDesign(format!(
                "dimensions must be positive: L = {length}, W = {width}, L_pzt = {piezo_length}, h_s = {substrate_thickness}"
            )));
        }
        if !(piezo_thickness.is_finite() && piezo_thickness >= 0.0) {
            return Err(Error::InvalidDesign(format!("h_p = {piezo_thickness} must be non-negative")));
        }
        if piezo_length > length * (1.0 + 1e-12) {
            return Err(Error::InvalidDesign(format!(
                "L_pzt = {piezo_length} exceeds L = {length}"
            )));
        }
        Ok(Self {
            length,
            width,
            piezo_length: piezo_length.min(length),
            substrate_thickness,
            piezo_thickness,
        })
    }

    pub fn total_thickness(&self) -> f64 {
        self.substrate_thickness + 2.0 * self.piezo_thickness
    }

    /// Piezo coverage as a fraction of the length.
    pub fn coverage(&self) -> f64 {
        self.piezo_length / self.length
    }

    /// Recovers the design vector; exact inverse of [`DesignVector::to_geometry`].
    pub fn to_design(&self) -> DesignVector {
        let h = self.total_thickness();
        DesignVector {
            length: self.length,
            aspect_ratio: self.width / self.length,
            piezo_length: self.piezo_length / self.length,
            piezo_thickness: self.piezo_thickness / h,
            thickness: h,
        }
    }

    /// The two piezo skins (upper, lower). Empty boxes when `h_p = 0`.
    pub fn piezo_domain(&self) -> [Cuboid; 2] {
        let hs2 = 0.5 * self.substrate_thickness;
        let hp = self.piezo_thickness;
        let plan = |z| Cuboid {
            x: (0.0, self.piezo_length),
            y: (0.0, self.width),
            z,
        };
        [plan((hs2, hs2 + hp)), plan((-hs2 - hp, -hs2))]
    }

    /// Substructure core under the skins plus the full-thickness tail beyond `L_pzt`.
    pub fn substructure_domain(&self) -> Vec<Cuboid> {
        let hs2 = 0.5 * self.substrate_thickness;
        let half = 0.5 * self.total_thickness();
        let mut boxes = vec![Cuboid {
            x: (0.0, self.piezo_length),
            y: (0.0, self.width),
            z: (-hs2, hs2),
        }];
        if self.piezo_length < self.length {
            boxes.push(Cuboid {
                x: (self.piezo_length, self.length),
                y: (0.0, self.width),
                z: (-half, half),
            });
        }
        boxes
    }

    pub fn substructure_volume(&self) -> f64 {
        self.substructure_domain().iter().map(Cuboid::volume).sum()
    }

    pub fn piezo_volume(&self) -> f64 {
        self.piezo_domain().iter().map(Cuboid::volume).sum()
    }

    pub fn planform_area(&self) -> f64 {
        self.length * self.width
    }

    pub fn piezo_area(&self) -> f64 {
        self.piezo_length * self.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn verification_device_dimensions() {
        let g = DesignVector::new(0.2, 1.0, 1.0, 0.25, 0.001).to_geometry().unwrap();
        assert_relative_eq!(g.width, 0.2);
        assert_relative_eq!(g.piezo_length, 0.2);
        assert_relative_eq!(g.piezo_thickness, 0.25e-3, max_relative = 1e-14);
        assert_relative_eq!(g.substrate_thickness, 0.5e-3, max_relative = 1e-12);
    }

    #[test]
    fn half_thickness_ratio_is_invalid() {
        let err = DesignVector::new(0.2, 1.0, 1.0, 0.5, 0.001).to_geometry().unwrap_err();
        assert!(matches!(err, Error::InvalidDesign(_)));
        assert!(DesignVector::new(0.2, 1.0, 1.0, 0.4999, 0.001).to_geometry().is_ok());
    }

    #[test]
    fn commercial_bimorph_dimensions() {
        let h = 0.232e-3 + 2.0 * 0.245e-3;
        let x = DesignVector::new(0.0239, 10.3 / 23.9, 1.0, 0.245e-3 / h, h);
        let g = x.to_geometry().unwrap();
        assert_relative_eq!(g.piezo_thickness, 0.245e-3, max_relative = 1e-12);
        assert_relative_eq!(g.substrate_thickness, 0.232e-3, max_relative = 1e-12);
        assert_relative_eq!(g.width, 10.3e-3, max_relative = 1e-12);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        for x in [
            DesignVector::new(-0.2, 1.0, 1.0, 0.25, 0.001),
            DesignVector::new(0.2, 1.2, 1.0, 0.25, 0.001),
            DesignVector::new(0.2, 1.0, 0.0, 0.25, 0.001),
            DesignVector::new(0.2, 1.0, 1.0, 0.0, 0.001),
            DesignVector::new(0.2, 1.0, 1.0, 0.6, 0.001),
            DesignVector::new(0.2, 1.0, 1.0, 0.25, f64::NAN),
        ] {
            assert!(x.to_geometry().is_err(), "{x:?}");
        }
    }

    #[test]
    fn domains_partition_the_device() {
        let g = DesignVector::new(0.3, 0.5, 0.4, 0.2, 0.001).to_geometry().unwrap();
        let mut boxes = g.substructure_domain();
        boxes.extend(g.piezo_domain());
        let total: f64 = boxes.iter().map(Cuboid::volume).sum();
        assert_relative_eq!(total, g.planform_area() * g.total_thickness(), max_relative = 1e-12);
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                assert!(!a.overlaps(b), "{a:?} overlaps {b:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn design_geometry_round_trip(
            length in 0.05f64..0.6,
            r in 0.05f64..=1.0,
            l in 0.05f64..=1.0,
            hh in 0.01f64..0.49,
            h in 2e-4f64..3e-3,
        ) {
            let x = DesignVector::new(length, r, l, hh, h);
            let g = x.to_geometry().unwrap();
            let back = g.to_design().to_geometry().unwrap();
            prop_assert!((back.length - g.length).abs() <= 1e-15 * g.length);
            prop_assert!((back.width - g.width).abs() <= 1e-14 * g.width);
            prop_assert!((back.piezo_length - g.piezo_length).abs() <= 1e-14 * g.piezo_length);
            prop_assert!((back.piezo_thickness - g.piezo_thickness).abs() <= 1e-14 * g.piezo_thickness);
            prop_assert!((back.substrate_thickness - g.substrate_thickness).abs() <= 1e-12 * g.substrate_thickness);
        }
    }
}
