//! Seeded sampling of valid evaluation points.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::Result;
use crate::frame::{FrameComponents, Parameters};
use crate::kernel::{self, AngleCoords};

/// Width of the sampled `eta` window above `eta_min + margin`.
pub const ETA_SPAN: f64 = 2.5;

/// Uniform angles with `margin` kept from `eta_min`, the polar axis and the
/// pole of `U` (or the equator when `p = 1`).
pub fn sample_angles<R: Rng + ?Sized>(rng: &mut R, params: &Parameters, margin: f64) -> Result<AngleCoords> {
    let eta_min = params.domain()?.eta_min;
    let eta = rng.random_range(eta_min + margin..eta_min + margin + ETA_SPAN);
    let theta = rng.random_range(margin..params.theta_pole() - margin);
    let phi = rng.random_range(0.0..TAU);
    Ok(AngleCoords::new(eta, theta, phi))
}

/// A valid vector (frame components) with norm in `[0.5, 2)`.
pub fn sample_vector<R: Rng + ?Sized>(
    rng: &mut R,
    params: &Parameters,
    margin: f64,
) -> Result<(AngleCoords, f64, FrameComponents)> {
    let angles = sample_angles(rng, params, margin)?;
    let big_f = rng.random_range(0.5..2.0);
    let fc = kernel::vector_from_angles(&angles, big_f, params)?;
    Ok((angles, big_f, fc))
}
