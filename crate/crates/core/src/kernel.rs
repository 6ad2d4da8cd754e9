//! Structural functions of the metric and the maps between tangent vectors
//! and the angle triple `(eta, theta, phi)`.
//!
//! The metric function is `F = b V(eta)` where `eta` is defined implicitly by
//! `r(eta) = w3 U(theta)`. Everything except that last inversion is closed
//! form; [`eta_from_r`] solves it with a bracketed Newton iteration.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector4;
use serde::Serialize;

use crate::dual::Scalar;
use crate::error::{FinsleroidError, Result};
use crate::frame::{self, FrameComponents, Parameters, Tetrad};

/// `A` below this value is reported as sitting on the `eta_min` boundary.
pub const BOUNDARY_FLAG_THRESHOLD: f64 = 1e-8;

/// Relative tolerance of the `eta` root finder.
pub const ETA_TOLERANCE: f64 = 1e-12;

pub const MAX_NEWTON_ITERATIONS: usize = 100;

/// Hyperbolic, azimuthal and polar angle of a direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleCoords {
    pub eta: f64,
    pub theta: f64,
    pub phi: f64,
}

impl AngleCoords {
    pub fn new(eta: f64, theta: f64, phi: f64) -> Self {
        AngleCoords { eta, theta, phi }
    }
}

/// The `eta`-dependent structural functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaProfile {
    pub a: f64,
    pub r1: f64,
    pub j: f64,
    pub y1: f64,
    pub v: f64,
    pub r: f64,
    pub near_boundary: bool,
}

/// The `theta`-dependent structural functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularProfile {
    pub r2: f64,
    pub i: f64,
    pub u: f64,
}

/// All structural-function values at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalBundle {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Y1")]
    pub y1: f64,
    pub r: f64,
    pub f: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    pub near_boundary: bool,
}

impl EvalBundle {
    fn assemble(eta: &EtaProfile, ang: &AngularProfile, f: f64, big_f: f64) -> Self {
        EvalBundle {
            a: eta.a,
            r1: eta.r1,
            r2: ang.r2,
            j: eta.j,
            i: ang.i,
            u: ang.u,
            v: eta.v,
            y1: eta.y1,
            r: eta.r,
            f,
            big_f,
            near_boundary: eta.near_boundary,
        }
    }
}

/// Where the `eta` parametrisation is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainInfo {
    pub eta_min: f64,
    pub r_min: f64,
    pub r_sup: f64,
}

impl DomainInfo {
    pub fn contains_r(&self, r: f64) -> bool {
        r >= self.r_min && r < self.r_sup
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub eta: f64,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// Generic closed forms

/// `1 - 1/p^2 + (1 - 1/H^2) sinh^2 eta`; its root is `eta_min`.
pub(crate) fn radicand<S: Scalar>(eta: S, params: &Parameters) -> S {
    let p = params.p();
    let k = params.k();
    eta.sinh().powi2() * (k * k) + (1.0 - 1.0 / (p * p))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EtaParts<S> {
    pub a: S,
    pub r1: S,
    pub j: S,
    pub y1: S,
    pub v: S,
    pub r: S,
}

fn root_of_radicand<S: Scalar>(rad: S) -> S {
    // Rounding can leave the radicand a hair below zero at eta_min.
    if rad.re() <= 0.0 {
        S::cst(0.0)
    } else {
        rad.sqrt()
    }
}

/// `J`, normalised so that it equals `exp(k arccosh(c cosh eta))`.
pub(crate) fn j_factor<S: Scalar>(eta: S, a: S, params: &Parameters) -> S {
    let k = params.k();
    if k == 0.0 {
        return S::cst(1.0);
    }
    let p = params.p();
    let h = params.h();
    let m = 1.0 / (p * p) - 1.0 / (h * h);
    ((eta.cosh() * k + a) / m.sqrt()).powf(k)
}

/// `Y1(eta)` on the branch continuous over `[eta_min, inf)`.
pub(crate) fn y1_factor<S: Scalar>(eta: S, a: S, params: &Parameters) -> S {
    let q = params.q();
    if q == 0.0 {
        return S::cst(1.0);
    }
    let (num, den) = y1_arctan_args(eta, a, params);
    (num.atan2(den) * (-0.5 * q)).exp()
}

/// Numerator and denominator of the arctangent argument of `Y1`.
pub(crate) fn y1_arctan_args<S: Scalar>(eta: S, a: S, params: &Parameters) -> (S, S) {
    let q = params.q();
    let k = params.k();
    let p = params.p();
    let h = params.h();
    let base = 1.0 / (h * h) - 1.0 / (p * p);
    let ch = eta.cosh();
    let num = ch * a * (2.0 * q);
    let den = ch.powi2() * (base + 2.0 * k * k) + base;
    (num, den)
}

pub(crate) fn eta_parts<S: Scalar>(eta: S, params: &Parameters) -> EtaParts<S> {
    let a = root_of_radicand(radicand(eta, params));
    let r1 = eta.cosh() + a;
    let j = j_factor(eta, a, params);
    let y1 = y1_factor(eta, a, params);
    EtaParts {
        a,
        r1,
        j,
        y1,
        v: j / r1,
        r: eta.sinh() * y1 / r1,
    }
}

/// `r_eta = r / (p^2 R1 sinh eta)`.
pub(crate) fn r_eta<S: Scalar>(eta: S, parts: &EtaParts<S>, params: &Parameters) -> S {
    let p = params.p();
    parts.r / (parts.r1 * eta.sinh() * (p * p))
}

/// The three-dimensional Finsleroid function `r(w) = w3 U(p w)`.
///
/// At `p = 1` this is the Euclidean length, defined for any sign of `w3`.
pub(crate) fn radial<S: Scalar>(w: [S; 3], params: &Parameters) -> S {
    if params.is_isotropic() {
        return (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    }
    let q = params.q();
    let w_perp = (w[0] * w[0] + w[1] * w[1]).sqrt();
    let f = w_perp / w[2] * params.p();
    let theta = f.atan2(S::cst(1.0) - f * q);
    let r2 = theta.cos() + theta.sin() * q;
    let u = (theta * q).exp() / r2;
    w[2] * u
}

/// `eta(r)` lifted to any scalar type: the root is found on the real part,
/// then Newton steps in the dual algebra propagate derivatives through the
/// implicit-function rule.
pub(crate) fn eta_of_r<S: Scalar>(r: S, params: &Parameters) -> Result<S> {
    let root = eta_from_r(r.re(), params)?.eta;
    let mut eta = S::cst(root);
    for _ in 0..3 {
        let parts = eta_parts(eta, params);
        eta = eta - (parts.r - r) / r_eta(eta, &parts, params);
    }
    Ok(eta)
}

/// `F` from frame-coordinate components, on any scalar type.
pub(crate) fn norm_generic<S: Scalar>(y: [S; 4], params: &Parameters) -> Result<S> {
    let b = y[0];
    if !(b.re() > 0.0) {
        return Err(FinsleroidError::NotFutureTimelike { b: b.re() });
    }
    let w = [y[1] / b, y[2] / b, y[3] / b];
    if !params.is_isotropic() && !(w[2].re() > 0.0) {
        return Err(FinsleroidError::OutsideAxialRegion { w3: w[2].re() });
    }
    let r = radial(w, params);
    let eta = eta_of_r(r, params)?;
    Ok(b * eta_parts(eta, params).v)
}

// ---------------------------------------------------------------------------
// Public operations

fn eta_profile_from_parts(parts: &EtaParts<f64>, params: &Parameters) -> EtaProfile {
    EtaProfile {
        a: parts.a,
        r1: parts.r1,
        j: parts.j,
        y1: parts.y1,
        v: parts.v,
        r: parts.r,
        // With k = 0 the radicand is constant and there is no boundary.
        near_boundary: params.k() > 0.0 && parts.a < BOUNDARY_FLAG_THRESHOLD,
    }
}

/// `A, R1, J, Y1, V, r` at `eta`.
pub fn structural_profile(eta: f64, params: &Parameters) -> Result<EtaProfile> {
    let rad = radicand(eta, params);
    // Tolerate rounding at the root itself.
    if !(rad >= -1e-12) || !eta.is_finite() || eta < 0.0 {
        let eta_min = params.domain().map(|d| d.eta_min).unwrap_or(f64::NAN);
        return Err(FinsleroidError::OutsideEtaDomain { eta, eta_min });
    }
    Ok(eta_profile_from_parts(&eta_parts(eta, params), params))
}

/// `R2, I, U` at `theta`.
pub fn angular_profile(theta: f64, params: &Parameters) -> Result<AngularProfile> {
    let q = params.q();
    let r2 = theta.cos() + q * theta.sin();
    if !(r2 > 0.0) {
        return Err(FinsleroidError::ThetaPole {
            theta,
            theta_pole: params.theta_pole(),
        });
    }
    let i = (q * theta).exp();
    Ok(AngularProfile { r2, i, u: i / r2 })
}

/// Invert `f = sin(theta) / R2(theta)`.
pub fn theta_from_f(f: f64, params: &Parameters) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(FinsleroidError::InvalidParameters(format!(
            "f must be non-negative, got {f}"
        )));
    }
    Ok(f.atan2(1.0 - params.q() * f))
}

/// `eta_min`, `r_min = r(eta_min)` and `r_sup = lim r(eta)`.
pub fn domain_info(params: &Parameters) -> Result<DomainInfo> {
    params.domain().copied()
}

pub(crate) fn compute_domain(params: &Parameters) -> Result<DomainInfo> {
    let (h, p, k) = (params.h(), params.p(), params.k());
    if p < 1.0 && k == 0.0 {
        return Err(FinsleroidError::EmptyDomain { h, p });
    }
    let eta_min = if p < 1.0 {
        ((1.0 / (p * p) - 1.0) / (k * k)).sqrt().asinh()
    } else {
        0.0
    };
    let r_min = eta_parts(eta_min, params).r;
    let mut eta = 10.0;
    let mut r_prev = eta_parts(eta, params).r;
    let r_sup = loop {
        eta *= 2.0;
        let r = eta_parts(eta, params).r;
        if (r - r_prev).abs() <= 1e-12 * r || eta > 320.0 {
            break r.max(r_prev);
        }
        r_prev = r;
    };
    Ok(DomainInfo {
        eta_min,
        r_min,
        r_sup,
    })
}

/// Solve `r(eta) = r` by Newton's method safeguarded with bisection.
pub fn eta_from_r(r: f64, params: &Parameters) -> Result<Inversion> {
    let dom = params.domain()?;
    if !dom.contains_r(r) {
        return Err(FinsleroidError::OutsideRadialDomain {
            r,
            r_min: dom.r_min,
            r_sup: dom.r_sup,
        });
    }
    if r == dom.r_min {
        return Ok(Inversion {
            eta: dom.eta_min,
            iterations: 0,
        });
    }
    let r_at = |eta: f64| eta_parts(eta, params).r;

    let mut lo = dom.eta_min;
    let mut hi = dom.eta_min.max(1.0) * 10.0;
    while r_at(hi) < r {
        lo = hi;
        hi *= 2.0;
        if hi > 700.0 {
            return Err(FinsleroidError::OutsideRadialDomain {
                r,
                r_min: dom.r_min,
                r_sup: dom.r_sup,
            });
        }
    }

    let mut eta = initial_guess(r, dom, params).clamp(lo, hi);
    for iteration in 1..=MAX_NEWTON_ITERATIONS {
        let parts = eta_parts(eta, params);
        let resid = parts.r - r;
        if resid == 0.0 {
            return Ok(Inversion {
                eta,
                iterations: iteration,
            });
        }
        if resid < 0.0 {
            lo = eta;
        } else {
            hi = eta;
        }
        let slope = r_eta(eta, &parts, params);
        let newton = eta - resid / slope;
        let next = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - eta).abs();
        eta = next;
        if step <= ETA_TOLERANCE * eta.abs().max(1.0) || hi - lo <= ETA_TOLERANCE * hi {
            return Ok(Inversion {
                eta,
                iterations: iteration,
            });
        }
    }
    Err(FinsleroidError::NoConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
    })
}

/// Starting point from the isotropic-limit shape `r ~ r_sup tanh(eta - eta_min)`.
fn initial_guess(r: f64, dom: &DomainInfo, _params: &Parameters) -> f64 {
    let frac = ((r - dom.r_min) / (dom.r_sup - dom.r_min)).clamp(0.0, 1.0 - 1e-16);
    dom.eta_min + frac.atanh()
}

/// Full pointwise evaluation of a resolved vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub frame: FrameComponents,
    pub angles: AngleCoords,
    pub bundle: EvalBundle,
    pub newton_iterations: usize,
}

fn normalize_phi(phi: f64) -> f64 {
    if phi < 0.0 {
        phi + TAU
    } else {
        phi
    }
}

/// Angles and structural functions of a resolved vector.
pub fn evaluate_frame(fc: &FrameComponents, params: &Parameters) -> Result<Evaluation> {
    if !(fc.b > 0.0) {
        return Err(FinsleroidError::NotFutureTimelike { b: fc.b });
    }
    let phi = normalize_phi(fc.w2.atan2(fc.w1));
    let (theta, ang, f, r) = if params.is_isotropic() {
        let theta = fc.w_perp.atan2(fc.w3);
        let r2 = theta.cos();
        let ang = AngularProfile {
            r2,
            i: 1.0,
            u: 1.0 / r2,
        };
        let r = fc.w_perp.hypot(fc.w3);
        (theta, ang, fc.w, r)
    } else {
        if !(fc.w3 > 0.0) {
            return Err(FinsleroidError::OutsideAxialRegion { w3: fc.w3 });
        }
        let f = params.p() * fc.w;
        let theta = theta_from_f(f, params)?;
        let ang = angular_profile(theta, params)?;
        (theta, ang, f, fc.w3 * ang.u)
    };
    let inv = eta_from_r(r, params)?;
    let prof = structural_profile(inv.eta, params)?;
    let mut bundle = EvalBundle::assemble(&prof, &ang, f, fc.b * prof.v);
    // Report the input r rather than r(eta) re-evaluated.
    bundle.r = r;
    Ok(Evaluation {
        frame: *fc,
        angles: AngleCoords::new(inv.eta, theta, phi),
        bundle,
        newton_iterations: inv.iterations,
    })
}

/// Evaluate a natural-coordinate vector against a tetrad.
pub fn evaluate(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<Evaluation> {
    let fc = if params.is_isotropic() {
        frame::resolve(y, tetrad)?
    } else {
        frame::frame_components(y, tetrad)?
    };
    evaluate_frame(&fc, params)
}

/// The metric function `F(y) = b V`.
pub fn finsler_norm(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<f64> {
    Ok(evaluate(y, tetrad, params)?.bundle.big_f)
}

/// Resolve the angle triple (and structural functions) of a vector.
pub fn angles_from_vector(
    fc: &FrameComponents,
    params: &Parameters,
) -> Result<(AngleCoords, EvalBundle)> {
    let ev = evaluate_frame(fc, params)?;
    Ok((ev.angles, ev.bundle))
}

/// Vector with angles `angles` and norm `big_f`.
pub fn vector_from_angles(
    angles: &AngleCoords,
    big_f: f64,
    params: &Parameters,
) -> Result<FrameComponents> {
    if !(big_f > 0.0) {
        return Err(FinsleroidError::InvalidParameters(format!(
            "F must be positive, got {big_f}"
        )));
    }
    if !(angles.theta >= 0.0) {
        return Err(FinsleroidError::InvalidParameters(format!(
            "theta must be non-negative, got {}",
            angles.theta
        )));
    }
    let dom = params.domain()?;
    if angles.eta < dom.eta_min {
        return Err(FinsleroidError::OutsideEtaDomain {
            eta: angles.eta,
            eta_min: dom.eta_min,
        });
    }
    let prof = structural_profile(angles.eta, params)?;
    let (w3, w_perp) = if params.is_isotropic() {
        if angles.theta > PI {
            return Err(FinsleroidError::ThetaPole {
                theta: angles.theta,
                theta_pole: PI,
            });
        }
        (prof.r * angles.theta.cos(), prof.r * angles.theta.sin())
    } else {
        let ang = angular_profile(angles.theta, params)?;
        (
            prof.r * ang.r2 / ang.i,
            prof.r * angles.theta.sin() / (params.p() * ang.i),
        )
    };
    Ok(FrameComponents::from_ratios(
        big_f / prof.v,
        w_perp * angles.phi.cos(),
        w_perp * angles.phi.sin(),
        w3,
    ))
}

/// Evaluation at known angles, bypassing the `eta` root finder.
pub fn evaluate_angles(angles: &AngleCoords, big_f: f64, params: &Parameters) -> Result<Evaluation> {
    let fc = vector_from_angles(angles, big_f, params)?;
    let prof = structural_profile(angles.eta, params)?;
    let (ang, f) = if params.is_isotropic() {
        let r2 = angles.theta.cos();
        (
            AngularProfile {
                r2,
                i: 1.0,
                u: 1.0 / r2,
            },
            fc.w,
        )
    } else {
        (angular_profile(angles.theta, params)?, params.p() * fc.w)
    };
    Ok(Evaluation {
        frame: fc,
        angles: *angles,
        bundle: EvalBundle::assemble(&prof, &ang, f, big_f),
        newton_iterations: 0,
    })
}

/// Numerically integrated increments of `ln r` and `ln V` over `[eta0, eta1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub d_ln_r: f64,
    pub d_ln_v: f64,
    pub d_ln_r_error: f64,
    pub d_ln_v_error: f64,
}

pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Integrate the defining differential equations of `r` and `V` directly.
///
/// Deliberately uses only `R1` (never `J`, `Y1` or `r`), so it can serve as
/// an independent check of the closed forms.
pub fn oracle_quadrature(eta0: f64, eta1: f64, params: &Parameters) -> Result<QuadratureResult> {
    let dom = params.domain()?;
    if !(dom.eta_min < eta0 && eta0 < eta1 && eta1.is_finite()) {
        return Err(FinsleroidError::OutsideEtaDomain {
            eta: eta0,
            eta_min: dom.eta_min,
        });
    }
    let p = params.p();
    let h = params.h();
    let k = params.k();
    let r1 = move |eta: f64| {
        let rad = 1.0 - 1.0 / (p * p) + k * k * eta.sinh().powi(2);
        eta.cosh() + rad.max(0.0).sqrt()
    };
    let ln_r = quadrature::double_exponential::integrate(
        |eta| 1.0 / (r1(eta) * eta.sinh()),
        eta0,
        eta1,
        QUADRATURE_TOLERANCE * p * p,
    );
    let ln_v = quadrature::double_exponential::integrate(
        |eta| eta.sinh() / r1(eta),
        eta0,
        eta1,
        QUADRATURE_TOLERANCE * h * h,
    );
    Ok(QuadratureResult {
        d_ln_r: ln_r.integral / (p * p),
        d_ln_v: -ln_v.integral / (h * h),
        d_ln_r_error: ln_r.error_estimate / (p * p),
        d_ln_v_error: ln_v.error_estimate / (h * h),
    })
}

/// `eta` at which the `Y1` arctangent denominator changes sign, if it does.
pub fn y1_branch_transition(params: &Parameters) -> Option<f64> {
    let (h, p, k) = (params.h(), params.p(), params.k());
    if params.q() == 0.0 {
        return None;
    }
    let base = 1.0 / (h * h) - 1.0 / (p * p);
    let lead = base + 2.0 * k * k;
    if lead <= 0.0 {
        return None;
    }
    let cosh2 = -base / lead;
    (cosh2 >= 1.0).then(|| cosh2.sqrt().acosh())
}
