//! Scalar abstraction: the simulator's probability math runs on any IEEE
//! float (`f32` or `f64`).

use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point scalar usable throughout the simulator.
pub trait Real: Float + Debug + Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + Debug + Display + Send + Sync + 'static {}

/// Convert an `f64` into the working scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// finite constants and uniform draws this crate feeds through it.
pub fn cast<T: Real>(x: f64) -> T {
    T::from(x).expect("finite f64 converts to the working scalar")
}
