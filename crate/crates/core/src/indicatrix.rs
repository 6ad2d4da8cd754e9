//! Geometry of the indicatrix `F = 1` and of its horizontal section.

use nalgebra::{Matrix2, Matrix3, Matrix4x3, SMatrix, Vector3};
use serde::Serialize;

use crate::curvature::sectional_curvatures;
use crate::dual::{gradient, Scalar, ScalarFn};
use crate::error::{FinsleroidError, Result};
use crate::frame::Parameters;
use crate::kernel::{self, AngleCoords, Evaluation};
use crate::tensors::{angular_metric_at, finsleroid3_metric, radial_derivatives};

/// Base finite-difference step for curvature stencils (per angle).
pub const CURVATURE_STEP: f64 = 1e-3;

/// Induced metric on the indicatrix in `(eta, theta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatrixMetric {
    /// Positive-definite form.
    pub metric: Matrix3<f64>,
    /// Sign relating `metric` to the raw contraction `-h_ij l^i_a l^j_b`.
    pub raw_sign: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatrixBundle {
    /// `l^i_a`, rows `i = 0..3`, columns `a = eta, theta, phi`.
    pub l_derivs: Matrix4x3<f64>,
    pub i_metric: Matrix3<f64>,
    pub raw_sign: f64,
    /// `K(eta, theta), K(eta, phi), K(theta, phi)`.
    pub sectional: [f64; 3],
}

fn check_chart(angles: &AngleCoords, params: &Parameters) -> Result<()> {
    if !(angles.theta > 0.0) {
        return Err(FinsleroidError::PolarAxisSingular { w_perp: 0.0 });
    }
    let pole = if params.is_isotropic() {
        std::f64::consts::PI
    } else {
        params.theta_pole()
    };
    if !(angles.theta < pole) {
        return Err(FinsleroidError::ThetaPole {
            theta: angles.theta,
            theta_pole: pole,
        });
    }
    Ok(())
}

fn unit_vector_derivs_at(ev: &Evaluation, params: &Parameters) -> Matrix4x3<f64> {
    let (h, p, q) = (params.h(), params.p(), params.q());
    let AngleCoords { eta, theta, phi } = ev.angles;
    let b = &ev.bundle;
    let fc = &ev.frame;
    let v = b.v;
    let (sh, st, ct) = (eta.sinh(), theta.sin(), theta.cos());

    let l0 = 1.0 / v;
    let l = [fc.w1 / v, fc.w2 / v, fc.w3 / v];
    // V_eta / V and r_eta / r
    let v_eta = -sh / (h * h * b.r1);
    let r_eta = 1.0 / (p * p * b.r1 * sh);

    // l^1, l^2 = (r sin(theta) / (p I V)) (cos phi, sin phi); the theta
    // derivative is written without dividing by sin(theta).
    let lateral = b.r / (p * b.i * v);
    let d_theta_perp = lateral * (ct - q * st);

    let mut m = Matrix4x3::zeros();
    m[(0, 0)] = -v_eta * l0;
    for a in 0..3 {
        m[(a + 1, 0)] = (-v_eta + r_eta) * l[a];
    }
    m[(1, 1)] = d_theta_perp * phi.cos();
    m[(2, 1)] = d_theta_perp * phi.sin();
    m[(3, 1)] = -st * b.r / (p * p * v * b.i);
    m[(1, 2)] = -l[1];
    m[(2, 2)] = l[0];
    m
}

/// Closed-form derivatives of the unit vector `l^i = y^i / F` along the angles.
pub fn unit_vector_angle_derivatives(angles: &AngleCoords, params: &Parameters) -> Result<Matrix4x3<f64>> {
    check_chart(angles, params)?;
    let ev = kernel::evaluate_angles(angles, 1.0, params)?;
    Ok(unit_vector_derivs_at(&ev, params))
}

fn indicatrix_metric_at(ev: &Evaluation, params: &Parameters) -> Result<IndicatrixMetric> {
    let h = angular_metric_at(&radial_derivatives(ev, params)?);
    let l = unit_vector_derivs_at(ev, params);
    let raw: Matrix3<f64> = -(l.transpose() * h * l);
    let raw_sign = if raw.trace() >= 0.0 { 1.0 } else { -1.0 };
    Ok(IndicatrixMetric {
        metric: raw * raw_sign,
        raw_sign,
    })
}

/// `i_ab = -h_ij l^i_a l^j_b`, reported positive definite.
pub fn indicatrix_metric(angles: &AngleCoords, params: &Parameters) -> Result<IndicatrixMetric> {
    check_chart(angles, params)?;
    let ev = kernel::evaluate_angles(angles, 1.0, params)?;
    indicatrix_metric_at(&ev, params)
}

fn stencil_check(angles: &AngleCoords, params: &Parameters, reach: f64) -> Result<()> {
    let dom = params.domain()?;
    if angles.eta - reach <= dom.eta_min {
        return Err(FinsleroidError::StencilOutOfDomain(format!(
            "eta = {} within {reach} of eta_min = {}",
            angles.eta, dom.eta_min
        )));
    }
    let pole = if params.is_isotropic() {
        std::f64::consts::PI
    } else {
        params.theta_pole()
    };
    if angles.theta - reach <= 0.0 || angles.theta + reach >= pole {
        return Err(FinsleroidError::StencilOutOfDomain(format!(
            "theta = {} within {reach} of a chart pole",
            angles.theta
        )));
    }
    Ok(())
}

/// Sectional curvatures `K(eta, theta), K(eta, phi), K(theta, phi)` of the
/// indicatrix at `angles`.
pub fn indicatrix_curvature(angles: &AngleCoords, params: &Parameters) -> Result<[f64; 3]> {
    stencil_check(angles, params, 2.0 * CURVATURE_STEP)?;
    let metric = |x: &[f64; 3]| -> Result<SMatrix<f64, 3, 3>> {
        Ok(indicatrix_metric(&AngleCoords::new(x[0], x[1], x[2]), params)?.metric)
    };
    let k = sectional_curvatures(&metric, [angles.eta, angles.theta, angles.phi], CURVATURE_STEP)?;
    Ok([k[(0, 1)], k[(0, 2)], k[(1, 2)]])
}

pub fn indicatrix_bundle(angles: &AngleCoords, params: &Parameters) -> Result<IndicatrixBundle> {
    check_chart(angles, params)?;
    let ev = kernel::evaluate_angles(angles, 1.0, params)?;
    let im = indicatrix_metric_at(&ev, params)?;
    Ok(IndicatrixBundle {
        l_derivs: unit_vector_derivs_at(&ev, params),
        i_metric: im.metric,
        raw_sign: im.raw_sign,
        sectional: indicatrix_curvature(angles, params)?,
    })
}

/// Point on the unit sphere `r(w) = 1` of the three-dimensional Finsleroid.
struct SectionChart<'a> {
    params: &'a Parameters,
    component: usize,
}

impl ScalarFn<2> for SectionChart<'_> {
    fn eval<S: Scalar>(&self, x: [S; 2]) -> Result<S> {
        Ok(section_point(x[0], x[1], self.params)[self.component])
    }
}

fn section_point<S: Scalar>(theta: S, phi: S, params: &Parameters) -> [S; 3] {
    let q = params.q();
    let i = (theta * q).exp();
    let r2 = theta.cos() + theta.sin() * q;
    let w_perp = theta.sin() / (i * params.p());
    [w_perp * phi.cos(), w_perp * phi.sin(), r2 / i]
}

/// Metric induced on the horizontal section `r = 1` in `(theta, phi)`.
pub fn section_metric(theta: f64, phi: f64, params: &Parameters) -> Result<Matrix2<f64>> {
    let mut jac = SMatrix::<f64, 3, 2>::zeros();
    let mut w = Vector3::zeros();
    for c in 0..3 {
        let (value, grad) = gradient(&SectionChart { params, component: c }, [theta, phi])?;
        w[c] = value;
        jac[(c, 0)] = grad[0];
        jac[(c, 1)] = grad[1];
    }
    let g = finsleroid3_metric(&w, params)?;
    Ok(jac.transpose() * g * jac)
}

/// Gaussian curvature of the horizontal section `r(w) = 1` at azimuth `theta`.
pub fn section_curvature(theta: f64, params: &Parameters) -> Result<f64> {
    let reach = 2.0 * CURVATURE_STEP;
    let pole = params.theta_pole();
    if theta - reach <= 0.0 || theta + reach >= pole {
        return Err(FinsleroidError::StencilOutOfDomain(format!(
            "theta = {theta} within {reach} of a chart pole"
        )));
    }
    let metric = |x: &[f64; 2]| section_metric(x[0], x[1], params);
    let k = sectional_curvatures(&metric, [theta, 0.0], CURVATURE_STEP)?;
    Ok(k[(0, 1)])
}
