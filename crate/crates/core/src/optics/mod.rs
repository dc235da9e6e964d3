//! Sequential lens-stack geometry, backward ray tracing and Monte Carlo
//! sensor rendering.

mod geometry;
mod paraxial;
mod render;
mod system;
mod trace;

pub use geometry::{intersect_surface, refract, Ray, INTERSECT_EPSILON};
pub use paraxial::{paraxial_properties, ParaxialProperties};
#[cfg(feature = "parallel")]
pub use render::render_parallel;
pub use render::{render, render_sequential, RenderParams};
pub use system::{
    Emitter, LensElement, LensSurface, LensSystem, Perturbation, PhysicalPose, Sensor, Stop,
};
pub use trace::{trace_backward, trace_forward, TraceScene, TracedRay};
