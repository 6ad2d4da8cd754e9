//! Report documents behind the command-line front end.
//!
//! Every builder is deterministic for a fixed seed: samples are drawn
//! sequentially from one generator, evaluated in parallel, and collected in
//! sample order.

use std::fmt::Write as _;

use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FinsleroidError, Result};
use crate::frame::{Background, FrameComponents, Parameters};
use crate::indicatrix;
use crate::kernel::{self, AngleCoords, DomainInfo, EvalBundle};
use crate::limits::ReductionReport;
use crate::sampling;
use crate::tensors;

pub const DEFAULT_SEED: u64 = 0x5EED_F1E5;

/// Distance kept from `eta_min` and the chart poles when sampling curvature.
pub const CURVATURE_MARGIN: f64 = 0.2;
pub const CURVATURE_TOLERANCE: f64 = 1e-3;

pub const CURVATURE_CSV_HEADER: &str = "index,eta,theta,phi,K_eta_theta,K_eta_phi,K_theta_phi,max_abs_dev";
pub const DOMAIN_CSV_HEADER: &str = "H,p,eta_min,r_min,r_sup,status";
pub const REDUCTION_CSV_HEADER: &str = "H,p,samples,max_rel_dev_v2,max_abs_dev_f2,max_abs_dev_det,pass";
pub const SCAN_CSV_HEADER: &str = "w_perp,w3,F,detG,status";

fn rows_of(m: &Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

/// Floats in CSV: 17 significant digits, lossless on round trip.
fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalFlags {
    /// `eta` sits on the `eta_min` boundary.
    pub near_boundary: bool,
    /// `y` lies on the polar axis, so the angle-form angular metric is skipped.
    pub polar_axis: bool,
    pub isotropic: bool,
}

/// Evaluation of one vector. Tensors are in natural coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalDocument {
    #[serde(rename = "H")]
    pub big_h: f64,
    pub p: f64,
    pub y: [f64; 4],
    pub frame: FrameComponents,
    pub angles: AngleCoords,
    pub bundle: EvalBundle,
    pub domain: DomainInfo,
    pub newton_iterations: usize,
    pub l: [f64; 4],
    pub h: [[f64; 4]; 4],
    pub h_angle_form: Option<[[f64; 4]; 4]>,
    pub g: [[f64; 4]; 4],
    #[serde(rename = "detG_closed")]
    pub det_g_closed: f64,
    #[serde(rename = "detG_numeric")]
    pub det_g_numeric: f64,
    pub flags: EvalFlags,
}

pub fn eval_document(bg: &Background, y: &Vector4<f64>) -> Result<EvalDocument> {
    let params = &bg.params;
    let tetrad = &bg.tetrad;
    let ev = kernel::evaluate(y, tetrad, params)?;
    let tb = tensors::metric_tensor_at(&ev, params)?;
    let angle_form = match tensors::angular_metric_angle_form_at(&ev, params) {
        Ok(h) => Some(h),
        Err(FinsleroidError::PolarAxisSingular { .. }) => None,
        Err(e) => return Err(e),
    };
    let g = tetrad.tensor_to_natural(&tb.g);
    let jac = tetrad.frame_matrix().determinant();
    Ok(EvalDocument {
        big_h: params.h(),
        p: params.p(),
        y: [y[0], y[1], y[2], y[3]],
        frame: ev.frame,
        angles: ev.angles,
        bundle: ev.bundle,
        domain: *params.domain()?,
        newton_iterations: ev.newton_iterations,
        l: tetrad.covector_to_natural(&tb.l).into(),
        h: rows_of(&tetrad.tensor_to_natural(&tb.h)),
        h_angle_form: angle_form.map(|h| rows_of(&tetrad.tensor_to_natural(&h))),
        g: rows_of(&g),
        det_g_closed: tb.det_g_closed * jac * jac,
        det_g_numeric: g.lu().determinant(),
        flags: EvalFlags {
            near_boundary: ev.bundle.near_boundary,
            polar_axis: angle_form.is_none(),
            isotropic: params.is_isotropic(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub index: usize,
    pub angles: AngleCoords,
    /// `K(eta, theta), K(eta, phi), K(theta, phi)`.
    pub sectional: [f64; 3],
    /// `max |K + H^2|` over the three planes.
    pub max_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    #[serde(rename = "H")]
    pub h: f64,
    pub p: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub samples: Vec<CurvatureSample>,
    pub max_abs_dev: f64,
    pub pass: bool,
}

impl CurvatureReport {
    pub fn summary(&self) -> String {
        let rel = if self.pass { "<" } else { ">=" };
        format!("max|K+H^2| = {:.3e} {rel} {:.0e}", self.max_abs_dev, self.tolerance)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CURVATURE_CSV_HEADER}\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.index,
                csv_float(s.angles.eta),
                csv_float(s.angles.theta),
                csv_float(s.angles.phi),
                csv_float(s.sectional[0]),
                csv_float(s.sectional[1]),
                csv_float(s.sectional[2]),
                csv_float(s.max_abs_dev),
            );
        }
        out
    }
}

/// Sectional curvatures of the indicatrix at `samples` random interior points.
pub fn curvature_report(params: &Parameters, samples: usize, seed: u64) -> Result<CurvatureReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..samples)
        .map(|_| sampling::sample_angles(&mut rng, params, CURVATURE_MARGIN))
        .collect::<Result<Vec<_>>>()?;
    let h2 = params.h() * params.h();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, angles)| {
            let sectional = indicatrix::indicatrix_curvature(angles, params)?;
            let max_abs_dev = sectional.iter().map(|k| (k + h2).abs()).fold(0.0, f64::max);
            Ok(CurvatureSample {
                index,
                angles: *angles,
                sectional,
                max_abs_dev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_dev = rows.iter().map(|s| s.max_abs_dev).fold(0.0, f64::max);
    Ok(CurvatureReport {
        h: params.h(),
        p: params.p(),
        seed,
        tolerance: CURVATURE_TOLERANCE,
        samples: rows,
        max_abs_dev,
        pass: max_abs_dev < CURVATURE_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub p: f64,
    pub eta_min: Option<f64>,
    pub r_min: Option<f64>,
    pub r_sup: Option<f64>,
    /// `ok`, or the error code when the domain is empty.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    pub rows: Vec<DomainRow>,
}

impl DomainReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{DOMAIN_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_float(r.h),
                csv_float(r.p),
                csv_opt(r.eta_min),
                csv_opt(r.r_min),
                csv_opt(r.r_sup),
                r.status
            );
        }
        out
    }
}

/// `eta_min`, `r_min`, `r_sup` over the grid `h_grid x p_grid` (H outer).
pub fn domain_report(h_grid: &[f64], p_grid: &[f64]) -> Result<DomainReport> {
    let mut rows = Vec::with_capacity(h_grid.len() * p_grid.len());
    for &h in h_grid {
        for &p in p_grid {
            let params = Parameters::new(h, p)?;
            rows.push(match params.domain() {
                Ok(d) => DomainRow {
                    h,
                    p,
                    eta_min: Some(d.eta_min),
                    r_min: Some(d.r_min),
                    r_sup: Some(d.r_sup),
                    status: "ok".into(),
                },
                Err(e) => DomainRow {
                    h,
                    p,
                    eta_min: None,
                    r_min: None,
                    r_sup: None,
                    status: e.code().into(),
                },
            });
        }
    }
    Ok(DomainReport { rows })
}

pub fn reduction_csv(report: &ReductionReport) -> String {
    let mut out = format!("{REDUCTION_CSV_HEADER}\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_float(r.h),
            csv_float(r.p),
            r.samples,
            csv_float(r.max_rel_dev_v2),
            csv_opt(r.max_abs_dev_f2),
            csv_opt(r.max_abs_dev_det),
            r.pass
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub w_perp: f64,
    pub w3: f64,
    #[serde(rename = "F")]
    pub big_f: Option<f64>,
    #[serde(rename = "detG")]
    pub det_g: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    #[serde(rename = "H")]
    pub h: f64,
    pub p: f64,
    pub n: usize,
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SCAN_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_float(r.w_perp),
                csv_float(r.w3),
                csv_opt(r.big_f),
                csv_opt(r.det_g),
                r.status
            );
        }
        out
    }
}

fn scan_point(w_perp: f64, w3: f64, params: &Parameters) -> ScanRow {
    let fc = FrameComponents::from_ratios(1.0, w_perp, 0.0, w3);
    let result = kernel::evaluate_frame(&fc, params)
        .and_then(|ev| Ok((ev.bundle.big_f, tensors::metric_tensor_at(&ev, params)?.det_g)));
    match result {
        Ok((f, det)) if f.is_finite() && det.is_finite() => ScanRow {
            w_perp,
            w3,
            big_f: Some(f),
            det_g: Some(det),
            status: "ok".into(),
        },
        Ok(_) => ScanRow {
            w_perp,
            w3,
            big_f: None,
            det_g: None,
            status: "NonFinite".into(),
        },
        Err(e) => ScanRow {
            w_perp,
            w3,
            big_f: None,
            det_g: None,
            status: e.code().into(),
        },
    }
}

/// `F` and `det g` at `y = (1, w_perp, 0, w3)` in frame components, over the
/// cell centres of an `n x n` grid on `w_perp in (0, 1)`, `w3 in (-1, 1)`.
/// Rows run over `w3` fastest.
pub fn scan_report(params: &Parameters, n: usize) -> Result<ScanReport> {
    if n == 0 {
        return Err(FinsleroidError::InvalidParameters("scan grid needs n >= 1".into()));
    }
    params.domain()?;
    let cells: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let w_perp = (i as f64 + 0.5) / n as f64;
            let w3 = -1.0 + (2 * j + 1) as f64 / n as f64;
            (w_perp, w3)
        })
        .collect();
    let rows = cells.par_iter().map(|&(wp, w3)| scan_point(wp, w3, params)).collect();
    Ok(ScanReport {
        h: params.h(),
        p: params.p(),
        n,
        rows,
    })
}
