//! The spatially isotropic case `p = 1` and its pseudo-Euclidean limit.

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FinsleroidError, Result};
use crate::frame::{Parameters, Tetrad};
use crate::kernel;
use crate::tensors;

/// Tolerance for every row of a reduction report.
pub const REDUCTION_TOLERANCE: f64 = 1e-10;

/// Samples keep at least this relative distance from `r_sup`.
pub const R_SUP_MARGIN: f64 = 1e-3;

/// Exponent data of the `p = 1` closed form of `V^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixClosedForm {
    pub g_plus: f64,
    pub g_minus: f64,
    pub c_tilde: f64,
}

impl AppendixClosedForm {
    pub fn new(h: f64) -> Self {
        let root = (h * h - 1.0).max(0.0).sqrt();
        AppendixClosedForm {
            g_plus: h - root,
            g_minus: -h - root,
            c_tilde: h,
        }
    }

    /// `V^2(r)` at `p = 1`.
    pub fn v_squared(&self, r: f64) -> Result<f64> {
        let h = self.c_tilde;
        let base_minus = self.c_tilde + self.g_minus * r;
        let base_plus = self.c_tilde + self.g_plus * r;
        for base in [base_minus, base_plus] {
            if base < 0.0 {
                return Err(FinsleroidError::OutsideClosedFormDomain { base });
            }
        }
        Ok(base_minus.powf(self.g_plus / h) * base_plus.powf(-self.g_minus / h) / (h * h))
    }
}

/// `V^2` from the closed form valid at `p = 1` (with `C1 = C2 = 1`).
pub fn appendix_v_squared(r: f64, h: f64) -> Result<f64> {
    if !(h >= 1.0) || !(r >= 0.0) {
        return Err(FinsleroidError::InvalidParameters(format!(
            "need H >= 1 and r >= 0, got H = {h}, r = {r}"
        )));
    }
    AppendixClosedForm::new(h).v_squared(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub p: f64,
    pub samples: usize,
    /// `max |V^2_pipeline - V^2_closed| / V^2_closed`.
    pub max_rel_dev_v2: f64,
    /// `max |F^2 - (b^2 - |y_s|^2)|`; only at `H = p = 1`.
    pub max_abs_dev_f2: Option<f64>,
    /// `max |det g + 1|`; only at `H = p = 1`.
    pub max_abs_dev_det: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub tolerance: f64,
    pub seed: u64,
    pub rows: Vec<ReductionRow>,
}

impl ReductionReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn isotropic_row(h: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<ReductionRow> {
    let params = Parameters::new(h, 1.0)?;
    let dom = kernel::domain_info(&params)?;
    let closed = AppendixClosedForm::new(h);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let r = dom.r_sup * rng.random_range(R_SUP_MARGIN..1.0 - R_SUP_MARGIN);
        let eta = kernel::eta_from_r(r, &params)?.eta;
        let v = kernel::structural_profile(eta, &params)?.v;
        let expected = closed.v_squared(r)?;
        worst = worst.max((v * v - expected).abs() / expected);
    }
    Ok(ReductionRow {
        h,
        p: 1.0,
        samples,
        max_rel_dev_v2: worst,
        max_abs_dev_f2: None,
        max_abs_dev_det: None,
        pass: worst <= REDUCTION_TOLERANCE,
    })
}

fn pseudo_euclidean_row(samples: usize, rng: &mut ChaCha8Rng) -> Result<ReductionRow> {
    let params = Parameters::new(1.0, 1.0)?;
    let tetrad = Tetrad::canonical();
    let mut base = isotropic_row(1.0, samples, rng)?;
    let (mut dev_f2, mut dev_det): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let b = rng.random_range(0.5..2.0);
        let speed = rng.random_range(0.0..0.95);
        let dir = random_direction(rng);
        let y = Vector4::new(b, b * speed * dir[0], b * speed * dir[1], b * speed * dir[2]);
        let f = kernel::finsler_norm(&y, &tetrad, &params)?;
        let minkowski = b * b * (1.0 - speed * speed);
        dev_f2 = dev_f2.max((f * f - minkowski).abs());
        let det = tensors::metric_tensor(&y, &tetrad, &params)?.det_g;
        dev_det = dev_det.max((det + 1.0).abs());
    }
    base.max_abs_dev_f2 = Some(dev_f2);
    base.max_abs_dev_det = Some(dev_det);
    base.pass = base.pass && dev_f2 <= REDUCTION_TOLERANCE && dev_det <= REDUCTION_TOLERANCE;
    Ok(base)
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Compare the pipeline against the `p = 1` closed form for each `H`, plus
/// the pseudo-Euclidean point `H = p = 1`.
pub fn reduction_report(h_grid: &[f64], samples: usize, seed: u64) -> Result<ReductionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(h_grid.len() + 1);
    for &h in h_grid {
        if h == 1.0 {
            continue;
        }
        rows.push(isotropic_row(h, samples, &mut rng)?);
    }
    rows.push(pseudo_euclidean_row(samples, &mut rng)?);
    Ok(ReductionReport {
        tolerance: REDUCTION_TOLERANCE,
        seed,
        rows,
    })
}
