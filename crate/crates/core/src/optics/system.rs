use std::sync::Arc;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::pattern::Bitmap;
use crate::{Error, Result};

/// One refracting surface of a sequential prescription.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensSurface {
    /// Signed curvature radius in mm; 0 encodes a plane.
    pub radius: f64,
    /// Axial distance to the next surface (or to the sensor after the last
    /// surface), mm.
    pub thickness: f64,
    /// Refractive index of the medium following the surface.
    pub index_after: f64,
    pub semi_aperture: f64,
}

impl LensSurface {
    pub fn validate(&self) -> Result<()> {
        if !(self.thickness >= 0.0) {
            return Err(Error::config(format!(
                "surface thickness {} is negative",
                self.thickness
            )));
        }
        if !(self.semi_aperture > 0.0) {
            return Err(Error::config("surface semi-aperture must be positive"));
        }
        if !(self.index_after >= 1.0) {
            return Err(Error::config(format!(
                "refractive index {} below 1",
                self.index_after
            )));
        }
        if !self.radius.is_finite() {
            return Err(Error::config(
                "surface radius must be finite (use 0 for a plane)",
            ));
        }
        if self.radius != 0.0 && self.radius.abs() < self.semi_aperture {
            return Err(Error::config(format!(
                "semi-aperture {} exceeds |radius| {}",
                self.semi_aperture, self.radius
            )));
        }
        Ok(())
    }
}

/// Rigid placement error of a single element: translations in mm, tilts
/// about x and y in degrees, applied about the element's axial midpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Perturbation {
    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            dx: v[0],
            dy: v[1],
            dz: v[2],
            rx: v[3],
            ry: v[4],
        }
    }

    pub fn is_identity(&self) -> bool {
        [self.dx, self.dy, self.dz, self.rx, self.ry]
            .iter()
            .all(|&v| v == 0.0)
    }

    fn isometry(&self, center_z: f64) -> Isometry3<f64> {
        if self.is_identity() {
            return Isometry3::identity();
        }
        let rot = rotation_xyz(self.rx, self.ry, 0.0);
        about_point(
            rot,
            Point3::new(0.0, 0.0, center_z),
            Vector3::new(self.dx, self.dy, self.dz),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensElement {
    pub surfaces: [LensSurface; 2],
    #[serde(default, skip_serializing_if = "Perturbation::is_identity")]
    pub perturbation: Perturbation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub semi_diameter: f64,
    /// Axial position in stack coordinates (front vertex at 0), mm.
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub width_mm: f64,
    pub height_mm: f64,
    pub width_px: usize,
    pub height_px: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emitter {
    /// Distance from the front vertex to the emitter plane, mm.
    pub distance: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub pattern: Option<Arc<Bitmap>>,
}

/// Stack pose in physical units: translations in mm, rotations in degrees,
/// ordered (x, y, z, Rx, Ry, Rz).
pub type PhysicalPose = [f64; 6];

/// A sequential lens stack in front of a fixed sensor.
///
/// Stack coordinates put the first vertex at z = 0 with light travelling
/// toward +z; the sensor sits at the sum of all surface thicknesses. World
/// coordinates coincide with stack coordinates at the nominal pose, so the
/// sensor and emitter stay put while the stack moves.
#[derive(Debug, Clone, PartialEq)]
pub struct LensSystem {
    pub elements: Vec<LensElement>,
    pub stop: Option<Stop>,
    pub sensor: Sensor,
    pub emitter: Emitter,
    /// Axial position of the pivot for stack rotations, stack coordinates.
    pub pivot_z: f64,
    stack_pose: Isometry3<f64>,
}

pub(crate) fn rotation_xyz(rx_deg: f64, ry_deg: f64, rz_deg: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(
        rx_deg.to_radians(),
        ry_deg.to_radians(),
        rz_deg.to_radians(),
    )
}

/// Rotation about `pivot` followed by a translation.
fn about_point(
    rot: UnitQuaternion<f64>,
    pivot: Point3<f64>,
    shift: Vector3<f64>,
) -> Isometry3<f64> {
    let to_pivot = Translation3::from(pivot.coords);
    let from_pivot = Translation3::from(-pivot.coords);
    Isometry3::from_parts(Translation3::from(shift), UnitQuaternion::identity())
        * Isometry3::from_parts(to_pivot, rot)
        * Isometry3::from_parts(from_pivot, UnitQuaternion::identity())
}

impl LensSystem {
    pub fn new(
        elements: Vec<LensElement>,
        stop: Option<Stop>,
        sensor: Sensor,
        emitter: Emitter,
        pivot_z: f64,
    ) -> Result<Self> {
        let system = Self {
            elements,
            stop,
            sensor,
            emitter,
            pivot_z,
            stack_pose: Isometry3::identity(),
        };
        system.validate()?;
        Ok(system)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            for s in &e.surfaces {
                s.validate()
                    .map_err(|err| Error::config(format!("element {i}: {err}")))?;
            }
        }
        // element front vertices strictly increasing
        let fronts: Vec<f64> = (0..self.elements.len())
            .map(|i| self.vertex_z(2 * i))
            .collect();
        if fronts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "element axial positions must be strictly increasing",
            ));
        }
        if let Some(stop) = &self.stop {
            if !(stop.semi_diameter > 0.0) {
                return Err(Error::config("stop semi-diameter must be positive"));
            }
            let end = self.last_vertex_z().unwrap_or(0.0);
            if stop.z < 0.0 || stop.z > end {
                return Err(Error::config(format!(
                    "stop at z = {} lies outside the stack [0, {end}]",
                    stop.z
                )));
            }
        }
        if !(self.emitter.distance > 0.0) {
            return Err(Error::config("emitter distance must be positive"));
        }
        Ok(())
    }

    pub fn surface_count(&self) -> usize {
        2 * self.elements.len()
    }

    pub fn surface(&self, k: usize) -> &LensSurface {
        &self.elements[k / 2].surfaces[k % 2]
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &LensSurface> {
        self.elements.iter().flat_map(|e| e.surfaces.iter())
    }

    /// Nominal axial vertex position of flattened surface `k`.
    pub fn vertex_z(&self, k: usize) -> f64 {
        self.surfaces().take(k).map(|s| s.thickness).sum()
    }

    fn last_vertex_z(&self) -> Option<f64> {
        (self.surface_count() > 0).then(|| self.vertex_z(self.surface_count() - 1))
    }

    /// Sensor plane position (world z).
    pub fn sensor_z(&self) -> f64 {
        self.surfaces().map(|s| s.thickness).sum()
    }

    /// Emitter plane position (world z).
    pub fn emitter_z(&self) -> f64 {
        -self.emitter.distance
    }

    pub fn stack_pose(&self) -> &Isometry3<f64> {
        &self.stack_pose
    }

    /// World-from-element transform (stack pose composed with the element's
    /// own placement error).
    pub fn element_transform(&self, i: usize) -> Isometry3<f64> {
        let center = 0.5 * (self.vertex_z(2 * i) + self.vertex_z(2 * i + 1));
        self.stack_pose * self.elements[i].perturbation.isometry(center)
    }

    /// World positions of every surface vertex, front to back.
    pub fn surface_vertices(&self) -> Vec<Point3<f64>> {
        (0..self.surface_count())
            .map(|k| self.element_transform(k / 2) * Point3::new(0.0, 0.0, self.vertex_z(k)))
            .collect()
    }

    /// World position of the rotation pivot.
    pub fn pivot(&self) -> Point3<f64> {
        self.stack_pose * Point3::new(0.0, 0.0, self.pivot_z)
    }

    /// Rigidly moves the whole stack: rotation (Rx, then Ry, then Rz) about the
    /// pivot followed by translation. Composes with any earlier pose.
    pub fn apply_pose(&self, pose: &PhysicalPose) -> LensSystem {
        let rot = rotation_xyz(pose[3], pose[4], pose[5]);
        let pivot = self.pivot();
        let motion = about_point(rot, pivot, Vector3::new(pose[0], pose[1], pose[2]));
        let mut moved = self.clone();
        moved.stack_pose = motion * self.stack_pose;
        moved
    }

    /// Replaces the per-element placement errors.
    pub fn with_perturbations(&self, perturbations: &[Perturbation]) -> Result<LensSystem> {
        if perturbations.len() != self.elements.len() {
            return Err(Error::invalid(format!(
                "{} perturbations for {} elements",
                perturbations.len(),
                self.elements.len()
            )));
        }
        let mut out = self.clone();
        for (e, p) in out.elements.iter_mut().zip(perturbations) {
            e.perturbation = *p;
        }
        Ok(out)
    }

    pub fn with_stop_semi_diameter(&self, semi_diameter: f64) -> LensSystem {
        let mut out = self.clone();
        if let Some(stop) = out.stop.as_mut() {
            stop.semi_diameter = semi_diameter;
        }
        out
    }

    pub fn with_pattern(&self, pattern: Arc<Bitmap>) -> LensSystem {
        let mut out = self.clone();
        out.emitter.pattern = Some(pattern);
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn singlet_system() -> LensSystem {
        let elements = vec![LensElement {
            surfaces: [
                LensSurface {
                    radius: 20.0,
                    thickness: 2.0,
                    index_after: 1.5,
                    semi_aperture: 5.0,
                },
                LensSurface {
                    radius: -20.0,
                    thickness: 18.0,
                    index_after: 1.0,
                    semi_aperture: 5.0,
                },
            ],
            perturbation: Perturbation::default(),
        }];
        LensSystem::new(
            elements,
            Some(Stop {
                semi_diameter: 4.0,
                z: 1.0,
            }),
            Sensor {
                width_mm: 2.0,
                height_mm: 2.0,
                width_px: 8,
                height_px: 8,
            },
            Emitter {
                distance: 1000.0,
                width_mm: 100.0,
                height_mm: 100.0,
                pattern: None,
            },
            1.0,
        )
        .unwrap()
    }

    fn assert_close(a: &Point3<f64>, b: &Point3<f64>, tol: f64) {
        assert!((a - b).norm() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn identity_pose_keeps_vertices() {
        let s = singlet_system();
        let moved = s.apply_pose(&[0.0; 6]);
        for (a, b) in s.surface_vertices().iter().zip(moved.surface_vertices()) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn z_translation_shifts_vertices() {
        let s = singlet_system();
        let delta = 0.37;
        let moved = s.apply_pose(&[0.0, 0.0, delta, 0.0, 0.0, 0.0]);
        for (a, b) in s.surface_vertices().iter().zip(moved.surface_vertices()) {
            assert!((b.z - a.z - delta).abs() < 1e-15);
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
    }

    #[test]
    fn rotation_fixes_pivot() {
        let s = singlet_system();
        let pivot = s.pivot();
        let moved = s.apply_pose(&[0.0, 0.0, 0.0, 3.0, 0.0, 0.0]);
        assert_close(&moved.pivot(), &pivot, 1e-15);
        // a point off the pivot does move
        let v0 = s.surface_vertices()[0];
        let v1 = moved.surface_vertices()[0];
        assert!((v0 - v1).norm() > 1e-3);
        // and keeps its distance to the pivot
        assert!(((v0 - pivot).norm() - (v1 - pivot).norm()).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let p = Perturbation::default();
        assert!(p.is_identity());
        assert_eq!(p.isometry(3.0), Isometry3::identity());
    }

    #[test]
    fn perturbation_composes_after_stack_pose() {
        let s = singlet_system();
        let pert = Perturbation {
            dx: 0.1,
            ..Default::default()
        };
        let perturbed = s.with_perturbations(&[pert]).unwrap();
        let moved = perturbed.apply_pose(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let v = moved.surface_vertices()[0];
        assert_close(&v, &Point3::new(0.1, 0.0, 1.0), 1e-15);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut s = singlet_system();
        s.stop = Some(Stop {
            semi_diameter: 1.0,
            z: 50.0,
        });
        assert!(s.validate().is_err());
        let mut s = singlet_system();
        s.elements[0].surfaces[0].thickness = -1.0;
        assert!(s.validate().is_err());
        let mut s = singlet_system();
        s.elements[0].surfaces[0].index_after = 0.9;
        assert!(s.validate().is_err());
        let mut s = singlet_system();
        let e = s.elements[0].clone();
        s.elements[0].surfaces[1].thickness = 0.0;
        s.elements.push(e);
        s.elements[1].surfaces[0].thickness = 0.0;
        // second element front vertex equals first element back vertex + 0
        // which is > first front vertex, still valid; collapse it fully:
        s.elements[0].surfaces[0].thickness = 0.0;
        assert!(s.validate().is_err());
    }
}
