use nalgebra::{Point3, Vector3};

/// Smallest accepted hit distance along a ray, millimeters.
pub const INTERSECT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    /// Unit direction.
    pub direction: Vector3<f64>,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}

/// Intersects a ray with a rotationally symmetric spherical cap whose vertex
/// sits on the z axis at `vertex_z`. A `radius` of 0 denotes a plane.
///
/// Only the hemisphere containing the vertex counts as the surface, and hits
/// farther than `semi_aperture` from the axis are rejected. Returns the
/// smallest valid distance greater than [`INTERSECT_EPSILON`].
#[inline]
pub fn intersect_surface(ray: &Ray, vertex_z: f64, radius: f64, semi_aperture: f64) -> Option<f64> {
    let inv = if radius == 0.0 { 0.0 } else { 1.0 / radius };
    intersect_cap(ray, vertex_z, radius, inv, semi_aperture * semi_aperture)
}

/// [`intersect_surface`] with `1 / radius` and the squared aperture
/// precomputed.
#[inline]
pub(crate) fn intersect_cap(
    ray: &Ray,
    vertex_z: f64,
    radius: f64,
    inv_radius: f64,
    aperture2: f64,
) -> Option<f64> {
    let o = &ray.origin;
    let d = &ray.direction;
    let within = |t: f64| {
        let x = o.x + d.x * t;
        let y = o.y + d.y * t;
        x * x + y * y <= aperture2
    };

    if radius == 0.0 {
        if d.z == 0.0 {
            return None;
        }
        let t = (vertex_z - o.z) / d.z;
        return (t > INTERSECT_EPSILON && within(t)).then_some(t);
    }

    let cz = vertex_z + radius;
    let oc = Vector3::new(o.x, o.y, o.z - cz);
    let b = oc.dot(d);
    let c = oc.norm_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = if b > 0.0 { -b - sq } else { -b + sq };
    let (mut t0, mut t1) = (q, if q != 0.0 { c / q } else { q });
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let on_cap = |t: f64| (cz - (o.z + d.z * t)) * inv_radius > 0.0;
    [t0, t1]
        .into_iter()
        .find(|&t| t > INTERSECT_EPSILON && on_cap(t) && within(t))
}

/// Refracts `direction` at an interface with unit `normal` (either
/// orientation), where `n_ratio` is n_incident / n_transmitted. Returns
/// `None` on total internal reflection.
#[inline]
pub fn refract(
    direction: &Vector3<f64>,
    normal: &Vector3<f64>,
    n_ratio: f64,
) -> Option<Vector3<f64>> {
    refract_unit(direction, normal, n_ratio).map(|t| t.normalize())
}

/// [`refract`] without the final renormalization, for unit inputs inside
/// the tracer.
#[inline]
pub(crate) fn refract_unit(
    direction: &Vector3<f64>,
    normal: &Vector3<f64>,
    n_ratio: f64,
) -> Option<Vector3<f64>> {
    let mut n = *normal;
    let mut cos_i = -n.dot(direction);
    if cos_i < 0.0 {
        n = -n;
        cos_i = -cos_i;
    }
    let sin2_t = n_ratio * n_ratio * (1.0 - cos_i * cos_i);
    if sin2_t > 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    Some(direction * n_ratio + n * (n_ratio * cos_i - cos_t))
}
