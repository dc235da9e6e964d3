use nalgebra::{Isometry3, Matrix3, Point2, Point3, Vector3};

use super::geometry::{intersect_cap, refract_unit, Ray, INTERSECT_EPSILON};
use super::system::LensSystem;

/// A rigid frame cached as a rotation matrix plus translation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Frame {
    rot: Matrix3<f64>,
    trans: Vector3<f64>,
}

impl Frame {
    const IDENTITY: Frame = Frame {
        rot: Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0),
        trans: Vector3::new(0.0, 0.0, 0.0),
    };

    fn new(iso: &Isometry3<f64>) -> Self {
        Self {
            rot: iso.rotation.to_rotation_matrix().into_inner(),
            trans: iso.translation.vector,
        }
    }

    fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self {
            rot: rt,
            trans: -(rt * self.trans),
        }
    }

    /// `self` applied after `other`.
    fn compose(&self, other: &Frame) -> Self {
        Self {
            rot: self.rot * other.rot,
            trans: self.rot * other.trans + self.trans,
        }
    }

    #[inline]
    fn apply(&self, ray: &Ray) -> Ray {
        Ray {
            origin: Point3::from(self.rot * ray.origin.coords + self.trans),
            direction: self.rot * ray.direction,
        }
    }

    #[inline]
    fn point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rot * p.coords + self.trans)
    }

    /// `None` when the change of frame is exactly the identity.
    fn nontrivial(self) -> Option<Self> {
        (self != Self::IDENTITY).then_some(self)
    }
}

#[derive(Debug, Clone, Copy)]
enum Interface {
    Surface {
        frame: usize,
        vertex_z: f64,
        radius: f64,
        semi_aperture: f64,
        /// Index on the emitter side of the surface.
        n_front: f64,
        /// Index on the sensor side of the surface.
        n_back: f64,
    },
    Stop {
        frame: usize,
        z: f64,
        semi_diameter: f64,
    },
}

impl Interface {
    fn frame(&self) -> usize {
        match *self {
            Interface::Surface { frame, .. } | Interface::Stop { frame, .. } => frame,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Surface {
        vertex_z: f64,
        radius: f64,
        inv_radius: f64,
        aperture2: f64,
        /// n_incident / n_transmitted along this travel direction.
        ratio: f64,
    },
    Stop {
        z: f64,
        aperture2: f64,
    },
}

/// One interface in travel order, with the change of frame needed to reach
/// its local coordinates from the previous step.
#[derive(Debug, Clone, Copy)]
struct Step {
    enter: Option<Frame>,
    op: Op,
}

#[derive(Debug, Clone)]
struct Path {
    steps: Vec<Step>,
    exit: Option<Frame>,
}

impl Path {
    fn build<'a>(
        frames: &[Frame],
        interfaces: impl Iterator<Item = &'a Interface>,
        backward: bool,
    ) -> Self {
        let mut steps = Vec::new();
        let mut current = Frame::IDENTITY;
        let mut current_idx = usize::MAX;
        for iface in interfaces {
            let f = iface.frame();
            let enter = if f != current_idx {
                let to_local = frames[f].inverse().compose(&current);
                current = frames[f];
                current_idx = f;
                to_local.nontrivial()
            } else {
                None
            };
            let op = match *iface {
                Interface::Surface {
                    vertex_z,
                    radius,
                    semi_aperture,
                    n_front,
                    n_back,
                    ..
                } => Op::Surface {
                    vertex_z,
                    radius,
                    inv_radius: if radius == 0.0 { 0.0 } else { 1.0 / radius },
                    aperture2: semi_aperture * semi_aperture,
                    ratio: if backward {
                        n_back / n_front
                    } else {
                        n_front / n_back
                    },
                },
                Interface::Stop {
                    z, semi_diameter, ..
                } => Op::Stop {
                    z,
                    aperture2: semi_diameter * semi_diameter,
                },
            };
            steps.push(Step { enter, op });
        }
        Self {
            steps,
            exit: current.nontrivial(),
        }
    }

    #[inline]
    fn run(&self, ray: &Ray) -> Option<Ray> {
        let mut local = *ray;
        for step in &self.steps {
            if let Some(enter) = &step.enter {
                local = enter.apply(&local);
            }
            match step.op {
                Op::Surface {
                    vertex_z,
                    radius,
                    inv_radius,
                    aperture2,
                    ratio,
                } => {
                    let t = intersect_cap(&local, vertex_z, radius, inv_radius, aperture2)?;
                    let p = local.at(t);
                    if ratio != 1.0 {
                        let normal = if radius == 0.0 {
                            Vector3::new(0.0, 0.0, -1.0)
                        } else {
                            Vector3::new(p.x, p.y, p.z - vertex_z - radius) * inv_radius
                        };
                        local.direction = refract_unit(&local.direction, &normal, ratio)?;
                    }
                    local.origin = p;
                }
                Op::Stop { z, aperture2 } => {
                    if local.direction.z == 0.0 {
                        return None;
                    }
                    let t = (z - local.origin.z) / local.direction.z;
                    if t <= INTERSECT_EPSILON {
                        return None;
                    }
                    let p = local.at(t);
                    if p.x * p.x + p.y * p.y > aperture2 {
                        return None;
                    }
                    local.origin = p;
                }
            }
        }
        Some(match &self.exit {
            Some(exit) => exit.apply(&local),
            None => local,
        })
    }
}

/// Ray state after leaving the lens stack on the emitter side.
#[derive(Debug, Clone, Copy)]
pub struct TracedRay {
    /// Hit point on the emitter plane (x, y), mm.
    pub hit: Point2<f64>,
    /// World-space ray at the emitter hit, pointing away from the lens.
    pub ray: Ray,
}

/// A lens system flattened into ordered interface paths with precomputed
/// frame changes, ready for repeated tracing. Read-only once built.
#[derive(Debug, Clone)]
pub struct TraceScene {
    backward: Path,
    forward: Path,
    sensor_z: f64,
    emitter_z: f64,
    aperture_frame: Frame,
    aperture_z: f64,
    aperture_radius: f64,
}

impl TraceScene {
    pub fn new(system: &LensSystem) -> Self {
        // frame 0: the stack frame (stop lives there); 1..: elements
        let mut frames = vec![Frame::new(system.stack_pose())];
        frames.extend((0..system.elements.len()).map(|i| Frame::new(&system.element_transform(i))));

        let mut interfaces = Vec::with_capacity(system.surface_count() + 1);
        let mut n_front = 1.0;
        for k in 0..system.surface_count() {
            let s = system.surface(k);
            interfaces.push(Interface::Surface {
                frame: 1 + k / 2,
                vertex_z: system.vertex_z(k),
                radius: s.radius,
                semi_aperture: s.semi_aperture,
                n_front,
                n_back: s.index_after,
            });
            n_front = s.index_after;
        }
        if let Some(stop) = system.stop {
            // the stop goes before the first surface whose vertex lies beyond it
            let pos = (0..system.surface_count())
                .position(|k| system.vertex_z(k) > stop.z)
                .unwrap_or(system.surface_count());
            interfaces.insert(
                pos,
                Interface::Stop {
                    frame: 0,
                    z: stop.z,
                    semi_diameter: stop.semi_diameter,
                },
            );
        }

        let (aperture_frame, aperture_z, aperture_radius) = interfaces
            .last()
            .map(|i| match *i {
                Interface::Surface {
                    frame,
                    vertex_z,
                    semi_aperture,
                    ..
                } => (frame, vertex_z, semi_aperture),
                Interface::Stop {
                    frame,
                    z,
                    semi_diameter,
                } => (frame, z, semi_diameter),
            })
            .unwrap_or((0, 0.0, 0.0));

        Self {
            backward: Path::build(&frames, interfaces.iter().rev(), true),
            forward: Path::build(&frames, interfaces.iter(), false),
            sensor_z: system.sensor_z(),
            emitter_z: system.emitter_z(),
            aperture_frame: frames[aperture_frame],
            aperture_z,
            aperture_radius,
        }
    }

    pub fn sensor_z(&self) -> f64 {
        self.sensor_z
    }

    /// Radius of the rearmost aperture (last surface, or the stop when no
    /// surfaces exist); 0 for an empty stack.
    pub fn aperture_radius(&self) -> f64 {
        self.aperture_radius
    }

    /// World position of a point given in local coordinates (x, y) on the
    /// rearmost aperture disk.
    #[inline]
    pub fn aperture_point(&self, x: f64, y: f64) -> Point3<f64> {
        self.aperture_frame
            .point(&Point3::new(x, y, self.aperture_z))
    }

    /// Traces a ray leaving the sensor toward the stack. Returns `None` when
    /// it is blocked, totally internally reflected, misses a surface or never
    /// reaches the emitter plane.
    #[inline]
    pub fn trace_backward(&self, ray: &Ray) -> Option<TracedRay> {
        let out = self.backward.run(ray)?;
        if out.direction.z >= 0.0 {
            return None;
        }
        let t = (self.emitter_z - out.origin.z) / out.direction.z;
        if t <= 0.0 {
            return None;
        }
        let p = out.at(t);
        Some(TracedRay {
            hit: Point2::new(p.x, p.y),
            ray: Ray {
                origin: p,
                direction: out.direction,
            },
        })
    }

    /// Traces a ray travelling from the emitter side toward the sensor and
    /// returns its intersection with the sensor plane.
    pub fn trace_forward(&self, ray: &Ray) -> Option<Point3<f64>> {
        let out = self.forward.run(ray)?;
        if out.direction.z <= 0.0 {
            return None;
        }
        let t = (self.sensor_z - out.origin.z) / out.direction.z;
        (t >= 0.0).then(|| out.at(t))
    }
}

/// Backward trace of a single ray through `system` to the emitter plane.
pub fn trace_backward(ray: &Ray, system: &LensSystem) -> Option<Point2<f64>> {
    TraceScene::new(system).trace_backward(ray).map(|r| r.hit)
}

/// Forward trace of a single ray to the sensor plane.
pub fn trace_forward(ray: &Ray, system: &LensSystem) -> Option<Point3<f64>> {
    TraceScene::new(system).trace_forward(ray)
}
