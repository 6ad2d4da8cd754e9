//! Background pseudo-Riemannian structure of a single tangent space.
//!
//! A [`Tetrad`] holds the orthonormal coframe `(b, i, j, i3)` together with
//! the metric `a_ij` it is supposed to span; [`frame_components`] resolves a
//! tangent vector into the ratios the metric function is built from.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{FinsleroidError, Result};
use crate::kernel::{self, DomainInfo};

/// Tolerance on every Gram / reciprocity residual in [`validate_tetrad`].
pub const TETRAD_TOLERANCE: f64 = 1e-12;

/// The extension scalars `H`, `p` and the fixed integration constants.
///
/// The radial domain is computed once here, so a shared instance can be used
/// from many threads without further synchronisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    h: f64,
    p: f64,
    q: f64,
    k: f64,
    s: f64,
    domain: Option<DomainInfo>,
}

impl Parameters {
    pub fn new(h: f64, p: f64) -> Result<Self> {
        if !(h.is_finite() && p.is_finite()) {
            return Err(FinsleroidError::InvalidParameters(format!(
                "non-finite H = {h}, p = {p}"
            )));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(FinsleroidError::InvalidParameters(format!(
                "p must satisfy 0 < p <= 1, got {p}"
            )));
        }
        if h < 1.0 {
            return Err(FinsleroidError::InvalidParameters(format!(
                "H must satisfy H >= 1, got {h}"
            )));
        }
        let mut params = Parameters {
            h,
            p,
            q: (1.0 / (p * p) - 1.0).max(0.0).sqrt(),
            k: (1.0 - 1.0 / (h * h)).max(0.0).sqrt(),
            s: (1.0 - p * p).max(0.0).sqrt(),
            domain: None,
        };
        params.domain = kernel::compute_domain(&params).ok();
        Ok(params)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `sqrt(1/p^2 - 1)`, the logarithmic rate of `I(theta)`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `sqrt(1 - 1/H^2)`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `sqrt(1 - p^2)`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn c1(&self) -> f64 {
        1.0
    }

    pub fn c2(&self) -> f64 {
        1.0
    }

    pub fn c17(&self) -> f64 {
        1.0
    }

    pub fn c11(&self) -> f64 {
        self.p
    }

    /// `p = 1`: no spatial direction is distinguished.
    pub fn is_isotropic(&self) -> bool {
        self.p == 1.0
    }

    /// The cached radial domain, or `EmptyDomain`.
    pub fn domain(&self) -> Result<&DomainInfo> {
        self.domain.as_ref().ok_or(FinsleroidError::EmptyDomain {
            h: self.h,
            p: self.p,
        })
    }

    /// Location of the pole of `U`, where `R2(theta) = 0`.
    pub fn theta_pole(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 + self.q.atan()
    }
}

/// Minkowski metric `diag(1, -1, -1, -1)`.
pub fn minkowski() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// Orthonormal coframe `(b, i, j, i3)` and the background metric it spans.
#[derive(Debug, Clone, PartialEq)]
pub struct Tetrad {
    /// Rows are the covectors `b_i, i_i, j_i, i3_i` in natural coordinates.
    frame: Matrix4<f64>,
    metric: Matrix4<f64>,
}

impl Tetrad {
    /// Identity coframe with `a = diag(1, -1, -1, -1)`.
    pub fn canonical() -> Self {
        Tetrad {
            frame: Matrix4::identity(),
            metric: minkowski(),
        }
    }

    pub fn new(rows: [[f64; 4]; 4], metric: Matrix4<f64>) -> Self {
        Tetrad {
            frame: Matrix4::from_fn(|r, c| rows[r][c]),
            metric,
        }
    }

    /// Covectors over the default background `diag(1, -1, -1, -1)`.
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        Self::new(rows, minkowski())
    }

    pub fn frame_matrix(&self) -> &Matrix4<f64> {
        &self.frame
    }

    pub fn metric(&self) -> &Matrix4<f64> {
        &self.metric
    }

    pub fn covector(&self, n: usize) -> Vector4<f64> {
        self.frame.row(n).transpose()
    }

    /// `b_i b_j - i_i i_j - j_i j_j - i3_i i3_j`.
    pub fn assembled_metric(&self) -> Matrix4<f64> {
        self.frame.transpose() * minkowski() * self.frame
    }

    /// Transversal tensor `i_i i_j + j_i j_j`.
    pub fn transversal(&self) -> Matrix4<f64> {
        let i = self.covector(1);
        let j = self.covector(2);
        i * i.transpose() + j * j.transpose()
    }

    /// Frame components `(b, i, j, i3)` of a natural-coordinate vector.
    pub fn to_frame(&self, y: &Vector4<f64>) -> Vector4<f64> {
        self.frame * y
    }

    /// Congruence transform of a frame-basis covariant tensor to natural coordinates.
    pub fn tensor_to_natural(&self, t: &Matrix4<f64>) -> Matrix4<f64> {
        self.frame.transpose() * t * self.frame
    }

    /// Pull a frame-basis covector back to natural coordinates.
    pub fn covector_to_natural(&self, l: &Vector4<f64>) -> Vector4<f64> {
        self.frame.transpose() * l
    }
}

impl Default for Tetrad {
    fn default() -> Self {
        Self::canonical()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TetradReport {
    /// `a^{ij} e_i e_j - (+1, -1, -1, -1)` for `e = b, i, j, i3`.
    pub norm_residuals: [f64; 4],
    /// Largest off-diagonal Gram entry.
    pub orthogonality_residual: f64,
    /// `max |a_ij - assembled_ij|`.
    pub decomposition_residual: f64,
    /// `max |a^{ij} a_{jn} - delta|` with `a^{ij}` assembled from the raised frame.
    pub reciprocity_residual: f64,
    pub signature_ok: bool,
    pub pass: bool,
}

impl TetradReport {
    pub fn worst_residual(&self) -> f64 {
        self.norm_residuals
            .iter()
            .map(|r| r.abs())
            .chain([
                self.orthogonality_residual,
                self.decomposition_residual,
                self.reciprocity_residual,
            ])
            .fold(0.0, f64::max)
    }
}

/// Gram, decomposition, reciprocity and signature checks of a tetrad
/// against its stored background metric.
pub fn validate_tetrad(tetrad: &Tetrad) -> Result<TetradReport> {
    let a = tetrad.metric();
    let a_inv = a
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or(FinsleroidError::TetradDegenerate)?;
    if a.determinant().abs() < 1e-300 {
        return Err(FinsleroidError::TetradDegenerate);
    }

    let gram = tetrad.frame * a_inv * tetrad.frame.transpose();
    let expected = [1.0, -1.0, -1.0, -1.0];
    let norm_residuals: [f64; 4] = std::array::from_fn(|n| gram[(n, n)] - expected[n]);
    let mut orthogonality_residual: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if r != c {
                orthogonality_residual = orthogonality_residual.max(gram[(r, c)].abs());
            }
        }
    }

    let decomposition_residual = (tetrad.assembled_metric() - a).abs().max();

    // a^{ij} = b^i b^j - i^i i^j - ..., with indices raised by the stored metric.
    let raised = a_inv * tetrad.frame.transpose();
    let contravariant = raised * minkowski() * raised.transpose();
    let reciprocity_residual = (contravariant * a - Matrix4::identity()).abs().max();

    let eig = SymmetricEigen::new(*a);
    let positive = eig.eigenvalues.iter().filter(|&&v| v > 0.0).count();
    let negative = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    let signature_ok = positive == 1 && negative == 3;

    let mut report = TetradReport {
        norm_residuals,
        orthogonality_residual,
        decomposition_residual,
        reciprocity_residual,
        signature_ok,
        pass: false,
    };
    report.pass = signature_ok && report.worst_residual() <= TETRAD_TOLERANCE;
    Ok(report)
}

/// A tangent vector resolved against the tetrad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameComponents {
    pub b: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w_perp: f64,
    /// `w_perp / w3`.
    pub w: f64,
    /// `w2 / w1 = tan(phi)`.
    pub t: f64,
    pub y_perp: f64,
    /// Pseudo-Riemannian norm squared, `b^2 (1 - w3^2 - w_perp^2)`.
    pub s2: f64,
}

impl FrameComponents {
    pub fn from_ratios(b: f64, w1: f64, w2: f64, w3: f64) -> Self {
        let w_perp = w1.hypot(w2);
        FrameComponents {
            b,
            w1,
            w2,
            w3,
            w_perp,
            w: w_perp / w3,
            t: w2 / w1,
            y_perp: b * w_perp,
            s2: b * b * (1.0 - w3 * w3 - w_perp * w_perp),
        }
    }

    /// Frame-coordinate vector `(b, b w1, b w2, b w3)`.
    pub fn frame_vector(&self) -> Vector4<f64> {
        Vector4::new(self.b, self.b * self.w1, self.b * self.w2, self.b * self.w3)
    }
}

/// Resolve `y` without the axial restriction (only `b > 0` is required).
pub(crate) fn resolve(y: &Vector4<f64>, tetrad: &Tetrad) -> Result<FrameComponents> {
    let yf = tetrad.to_frame(y);
    resolve_frame(&yf)
}

pub(crate) fn resolve_frame(yf: &Vector4<f64>) -> Result<FrameComponents> {
    let b = yf[0];
    if !(b > 0.0) {
        return Err(FinsleroidError::NotFutureTimelike { b });
    }
    Ok(FrameComponents::from_ratios(b, yf[1] / b, yf[2] / b, yf[3] / b))
}

/// Resolve `y` (natural coordinates) into `b`, the ratios `w_a`, and derived scalars.
pub fn frame_components(y: &Vector4<f64>, tetrad: &Tetrad) -> Result<FrameComponents> {
    let fc = resolve(y, tetrad)?;
    if !(fc.w3 > 0.0) {
        return Err(FinsleroidError::OutsideAxialRegion { w3: fc.w3 });
    }
    Ok(fc)
}

/// JSON form of the background: `{"H": .., "p": .., "tetrad": [[..4]; 4], "metric": [[..4]; 4]}`.
///
/// `tetrad` rows are the `b, i, j, i3` covectors. A missing tetrad means the
/// canonical frame; a missing metric means `diag(1, -1, -1, -1)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundDocument {
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tetrad: Option<[[f64; 4]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<[[f64; 4]; 4]>,
}

impl BackgroundDocument {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn tetrad(&self) -> Tetrad {
        match (self.tetrad, self.metric) {
            (None, None) => Tetrad::canonical(),
            (rows, metric) => Tetrad::new(
                rows.unwrap_or([
                    [1.0, 0.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0],
                ]),
                metric
                    .map(|m| Matrix4::from_fn(|r, c| m[r][c]))
                    .unwrap_or_else(minkowski),
            ),
        }
    }
}

/// A validated tangent-space background: parameters, tetrad, non-empty domain.
#[derive(Debug, Clone)]
pub struct Background {
    pub params: Parameters,
    pub tetrad: Tetrad,
}

impl Background {
    pub fn new(params: Parameters, tetrad: Tetrad) -> Result<Self> {
        params.domain()?;
        let report = validate_tetrad(&tetrad)?;
        if !report.pass {
            return Err(FinsleroidError::TetradInvalid {
                worst_residual: report.worst_residual(),
            });
        }
        Ok(Background { params, tetrad })
    }

    pub fn canonical(h: f64, p: f64) -> Result<Self> {
        Self::new(Parameters::new(h, p)?, Tetrad::canonical())
    }
}
