use nalgebra::Matrix2;

use super::system::LensSystem;

/// First-order properties of the nominal (unperturbed) prescription.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaxialProperties {
    /// Effective focal length, mm; infinite for an afocal stack.
    pub efl: f64,
    /// Back focal length measured from the last vertex, mm.
    pub bfl: f64,
    /// Working f-number (EFL over entrance pupil diameter), when a stop is
    /// defined and the EFL is finite.
    pub f_number: Option<f64>,
}

/// Composes paraxial refraction and transfer matrices acting on
/// (height, reduced angle n·u) over all surfaces, front to back.
fn system_matrix(system: &LensSystem, upto: Option<f64>) -> (Matrix2<f64>, f64) {
    let mut m = Matrix2::identity();
    let mut n_before = 1.0;
    let count = system.surface_count();
    let mut z = 0.0;
    for k in 0..count {
        let s = system.surface(k);
        let vz = system.vertex_z(k);
        if let Some(limit) = upto {
            if vz > limit {
                m = Matrix2::new(1.0, (limit - z) / n_before, 0.0, 1.0) * m;
                return (m, n_before);
            }
        }
        if k > 0 {
            m = Matrix2::new(1.0, (vz - z) / n_before, 0.0, 1.0) * m;
        }
        z = vz;
        let power = if s.radius == 0.0 {
            0.0
        } else {
            (s.index_after - n_before) / s.radius
        };
        m = Matrix2::new(1.0, 0.0, -power, 1.0) * m;
        n_before = s.index_after;
    }
    if let Some(limit) = upto {
        m = Matrix2::new(1.0, (limit - z) / n_before, 0.0, 1.0) * m;
    }
    (m, n_before)
}

pub fn paraxial_properties(system: &LensSystem) -> ParaxialProperties {
    let (m, n_image) = system_matrix(system, None);
    let c = m[(1, 0)];
    if c.abs() < 1e-15 {
        return ParaxialProperties {
            efl: f64::INFINITY,
            bfl: f64::INFINITY,
            f_number: None,
        };
    }
    let efl = -1.0 / c;
    let bfl = -m[(0, 0)] / c * n_image;
    let f_number = system.stop.and_then(|stop| {
        // marginal ray parallel to the axis at unit height, traced to the stop
        let (ms, _) = system_matrix(system, Some(stop.z));
        let y_stop = ms[(0, 0)];
        (y_stop.abs() > 1e-15).then(|| {
            let pupil_radius = stop.semi_diameter / y_stop.abs();
            efl.abs() / (2.0 * pupil_radius)
        })
    });
    ParaxialProperties { efl, bfl, f_number }
}
