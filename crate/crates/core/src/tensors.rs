//! Unit covector, angular metric, metric tensor and determinant.
//!
//! All tensors are expressed in the frame basis: index 0 is the `b`
//! component, indices 1..3 the `i, j, i3` components. Use
//! [`Tetrad::tensor_to_natural`] for natural coordinates.
//!
//! The angular metric is available by three independent routes:
//! [`angular_metric`] (derivatives of `V(r)` and `r(w)`),
//! [`angular_metric_angle_form`] (gradients of the angle triple), and
//! [`metric_tensor_numeric`] (nested-dual Hessian of `F^2 / 2`).

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};
use serde::Serialize;

use crate::dual::{gradient, hessian, Scalar, ScalarFn};
use crate::error::{FinsleroidError, Result};
use crate::frame::{Parameters, Tetrad};
use crate::kernel::{self, Evaluation};

/// Relative `w_perp / |w3|` below which the polar angle is treated as undefined.
pub const POLAR_AXIS_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorBundle {
    pub l: Vector4<f64>,
    pub h: Matrix4<f64>,
    pub g: Matrix4<f64>,
    /// Determinant of `g` by LU factorisation.
    pub det_g: f64,
    /// Closed-form determinant.
    pub det_g_closed: f64,
}

/// Gradients of `eta`, `theta`, `phi` with respect to frame components of `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleGradients {
    pub eta_grad: Vector4<f64>,
    pub theta_grad: Vector4<f64>,
    pub phi_grad: Vector4<f64>,
}

struct RadialFn<'a>(&'a Parameters);

impl ScalarFn<3> for RadialFn<'_> {
    fn eval<S: Scalar>(&self, w: [S; 3]) -> Result<S> {
        Ok(kernel::radial(w, self.0))
    }
}

struct HalfRadialSquared<'a>(&'a Parameters);

impl ScalarFn<3> for HalfRadialSquared<'_> {
    fn eval<S: Scalar>(&self, w: [S; 3]) -> Result<S> {
        Ok(kernel::radial(w, self.0).powi2() * 0.5)
    }
}

/// `f = p w_perp / w3`.
struct AzimuthRatio(f64);

impl ScalarFn<3> for AzimuthRatio {
    fn eval<S: Scalar>(&self, w: [S; 3]) -> Result<S> {
        Ok((w[0] * w[0] + w[1] * w[1]).sqrt() / w[2] * self.0)
    }
}

/// `theta = atan2(w_perp, w3)`, the isotropic azimuth.
struct IsotropicAzimuth;

impl ScalarFn<3> for IsotropicAzimuth {
    fn eval<S: Scalar>(&self, w: [S; 3]) -> Result<S> {
        Ok((w[0] * w[0] + w[1] * w[1]).sqrt().atan2(w[2]))
    }
}

struct PolarAngle;

impl ScalarFn<3> for PolarAngle {
    fn eval<S: Scalar>(&self, w: [S; 3]) -> Result<S> {
        Ok(w[1].atan2(w[0]))
    }
}

struct HalfNormSquared<'a>(&'a Parameters);

impl ScalarFn<4> for HalfNormSquared<'_> {
    fn eval<S: Scalar>(&self, y: [S; 4]) -> Result<S> {
        Ok(kernel::norm_generic(y, self.0)?.powi2() * 0.5)
    }
}

struct NormFn<'a>(&'a Parameters);

impl ScalarFn<4> for NormFn<'_> {
    fn eval<S: Scalar>(&self, y: [S; 4]) -> Result<S> {
        kernel::norm_generic(y, self.0)
    }
}

/// Derivatives of `V` and `eta` with respect to `r`, plus `r(w)` derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialDerivatives {
    pub v: f64,
    pub v_r: f64,
    pub v_rr: f64,
    pub eta_r: f64,
    pub r: f64,
    pub r_w: Vector3<f64>,
    pub r_ww: Matrix3<f64>,
}

pub(crate) fn radial_derivatives(ev: &Evaluation, params: &Parameters) -> Result<RadialDerivatives> {
    let fc = &ev.frame;
    let (r, grad, hess) = hessian(&RadialFn(params), [fc.w1, fc.w2, fc.w3])?;
    let (h, p) = (params.h(), params.p());
    let sh = ev.angles.eta.sinh();
    let v = ev.bundle.v;
    let eta_r = p * p * ev.bundle.r1 * sh / r;
    Ok(RadialDerivatives {
        v,
        v_r: -v * p * p * sh * sh / (h * h * r),
        v_rr: -v * eta_r * eta_r / (h * h),
        eta_r,
        r,
        r_w: Vector3::from(grad),
        r_ww: Matrix3::from_fn(|i, j| hess[i][j]),
    })
}

fn unit_covector_at(ev: &Evaluation, d: &RadialDerivatives, params: &Parameters) -> Vector4<f64> {
    let (h, p) = (params.h(), params.p());
    let sh = ev.angles.eta.sinh();
    Vector4::new(
        d.v * (1.0 + p * p * sh * sh / (h * h)),
        d.v_r * d.r_w[0],
        d.v_r * d.r_w[1],
        d.v_r * d.r_w[2],
    )
}

pub(crate) fn angular_metric_at(d: &RadialDerivatives) -> Matrix4<f64> {
    let vv_rr = d.v * d.v_rr;
    let vv_r = d.v * d.v_r;
    let mut h = Matrix4::zeros();
    h[(0, 0)] = vv_rr * d.r * d.r;
    for a in 0..3 {
        let h0a = -vv_rr * d.r * d.r_w[a];
        h[(0, a + 1)] = h0a;
        h[(a + 1, 0)] = h0a;
        for b in 0..3 {
            h[(a + 1, b + 1)] = vv_rr * d.r_w[a] * d.r_w[b] + vv_r * d.r_ww[(a, b)];
        }
    }
    h
}

fn closed_determinant(ev: &Evaluation, params: &Parameters) -> f64 {
    let (h, p) = (params.h(), params.p());
    let b = &ev.bundle;
    let core = p.powi(4) * b.i.powi(3) * b.v.powi(4) * b.r1;
    let ratio = ev.angles.eta.sinh() / b.r;
    -core * core * ratio.powi(6) / h.powi(6)
}

/// Covariant unit vector `l_i = dF/dy^i`.
pub fn unit_covector(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<Vector4<f64>> {
    let ev = kernel::evaluate(y, tetrad, params)?;
    let d = radial_derivatives(&ev, params)?;
    Ok(unit_covector_at(&ev, &d, params))
}

/// Angular metric `h_ij = F dl_i/dy^j` from derivatives of `V(r)` and `r(w)`.
pub fn angular_metric(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<Matrix4<f64>> {
    let ev = kernel::evaluate(y, tetrad, params)?;
    Ok(angular_metric_at(&radial_derivatives(&ev, params)?))
}

pub(crate) fn angle_gradients_at(ev: &Evaluation, params: &Parameters) -> Result<AngleGradients> {
    let fc = &ev.frame;
    if !(fc.w_perp > POLAR_AXIS_THRESHOLD * fc.w3.abs()) {
        return Err(FinsleroidError::PolarAxisSingular { w_perp: fc.w_perp });
    }
    let w = [fc.w1, fc.w2, fc.w3];
    let b = fc.b;
    // d/dy^0 of a function of w is -(w . grad_w)/b; d/dy^a is grad_w[a]/b.
    let lift = |g: [f64; 3]| {
        let euler = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
        Vector4::new(-euler / b, g[0] / b, g[1] / b, g[2] / b)
    };

    let d = radial_derivatives(ev, params)?;
    let eta_grad = lift([d.r_w[0], d.r_w[1], d.r_w[2]]) * d.eta_r;

    let theta_grad = if params.is_isotropic() && fc.w3 <= 0.0 {
        lift(gradient(&IsotropicAzimuth, w)?.1)
    } else {
        // theta_f = I^2 / U^2 = R2^2
        let theta_f = ev.bundle.r2 * ev.bundle.r2;
        lift(gradient(&AzimuthRatio(params.p()), w)?.1) * theta_f
    };
    let phi_grad = lift(gradient(&PolarAngle, w)?.1);

    Ok(AngleGradients {
        eta_grad,
        theta_grad,
        phi_grad,
    })
}

pub fn angle_gradients(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<AngleGradients> {
    let ev = kernel::evaluate(y, tetrad, params)?;
    angle_gradients_at(&ev, params)
}

pub(crate) fn angular_metric_angle_form_at(ev: &Evaluation, params: &Parameters) -> Result<Matrix4<f64>> {
    let grads = angle_gradients_at(ev, params)?;
    let sh2 = ev.angles.eta.sinh().powi(2);
    let st2 = ev.angles.theta.sin().powi(2);
    let f2 = ev.bundle.big_f * ev.bundle.big_f;
    let e = grads.eta_grad;
    let t = grads.theta_grad;
    let ph = grads.phi_grad;
    let inner = e * e.transpose() + (t * t.transpose() + ph * ph.transpose() * st2) * sh2;
    Ok(inner * (-f2 / (params.h() * params.h())))
}

/// Angular metric assembled from the angle gradients.
pub fn angular_metric_angle_form(
    y: &Vector4<f64>,
    tetrad: &Tetrad,
    params: &Parameters,
) -> Result<Matrix4<f64>> {
    let ev = kernel::evaluate(y, tetrad, params)?;
    angular_metric_angle_form_at(&ev, params)
}

pub(crate) fn metric_tensor_at(ev: &Evaluation, params: &Parameters) -> Result<TensorBundle> {
    let d = radial_derivatives(ev, params)?;
    let l = unit_covector_at(ev, &d, params);
    let h = angular_metric_at(&d);
    let g = h + l * l.transpose();
    Ok(TensorBundle {
        l,
        h,
        g,
        det_g: g.lu().determinant(),
        det_g_closed: closed_determinant(ev, params),
    })
}

/// `g = h + l l`, with both determinants.
pub fn metric_tensor(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<TensorBundle> {
    let ev = kernel::evaluate(y, tetrad, params)?;
    metric_tensor_at(&ev, params)
}

/// Closed-form `det(g)`; independent of the polar angle.
pub fn metric_determinant_closed(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<f64> {
    let ev = kernel::evaluate(y, tetrad, params)?;
    Ok(closed_determinant(&ev, params))
}

/// Metric tensor as the Hessian of `F^2 / 2`, by nested duals through the
/// implicit `eta(r)`.
pub fn metric_tensor_numeric(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<Matrix4<f64>> {
    let yf = tetrad.to_frame(y);
    let (_, _, hess) = hessian(&HalfNormSquared(params), [yf[0], yf[1], yf[2], yf[3]])?;
    Ok(Matrix4::from_fn(|i, j| hess[i][j]))
}

/// Value and gradient of `F` by first-order duals.
pub fn norm_gradient_numeric(
    y: &Vector4<f64>,
    tetrad: &Tetrad,
    params: &Parameters,
) -> Result<(f64, Vector4<f64>)> {
    let yf = tetrad.to_frame(y);
    let (f, grad) = gradient(&NormFn(params), [yf[0], yf[1], yf[2], yf[3]])?;
    Ok((f, Vector4::from(grad)))
}

/// Angular metric from the numeric Hessian: `g - l l`.
pub fn angular_metric_numeric(y: &Vector4<f64>, tetrad: &Tetrad, params: &Parameters) -> Result<Matrix4<f64>> {
    let g = metric_tensor_numeric(y, tetrad, params)?;
    let (_, l) = norm_gradient_numeric(y, tetrad, params)?;
    Ok(g - l * l.transpose())
}

/// Metric tensor of the three-dimensional Finsleroid `r(w)`: Hessian of `r^2 / 2`.
pub fn finsleroid3_metric(w: &Vector3<f64>, params: &Parameters) -> Result<Matrix3<f64>> {
    if !params.is_isotropic() {
        if !(w[2] > 0.0) {
            return Err(FinsleroidError::OutsideAxialRegion { w3: w[2] });
        }
        let w_perp = w[0].hypot(w[1]);
        if !(w_perp > POLAR_AXIS_THRESHOLD * w[2]) {
            return Err(FinsleroidError::PolarAxisSingular { w_perp });
        }
    }
    let (_, _, hess) = hessian(&HalfRadialSquared(params), [w[0], w[1], w[2]])?;
    Ok(Matrix3::from_fn(|i, j| hess[i][j]))
}

/// Counts of positive and negative eigenvalues of a symmetric matrix.
pub fn inertia(m: &Matrix4<f64>) -> (usize, usize) {
    let eig = SymmetricEigen::new(*m);
    let pos = eig.eigenvalues.iter().filter(|&&v| v > 0.0).count();
    let neg = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    (pos, neg)
}

/// Inertia of `g` by congruence with the basis `{y, e_j - (l_j / F) y}`.
///
/// Near the boundary of the cone `g` is badly conditioned and its one small
/// positive eigenvalue drowns in roundoff; pivoting on `y` first keeps it
/// exact (`g(y, y) = F^2`) and leaves a 3x3 block on `ker l`.
pub fn metric_inertia(g: &Matrix4<f64>, l: &Vector4<f64>, y: &Vector4<f64>) -> (usize, usize) {
    let f = l.dot(y);
    let m = y.iamax();
    let mut basis = Matrix4::zeros();
    basis.set_column(0, y);
    for (col, j) in (1..).zip((0..4).filter(|&j| j != m)) {
        let mut v = -y * (l[j] / f);
        v[j] += 1.0;
        basis.set_column(col, &v);
    }
    let c = basis.transpose() * g * basis;
    let pivot = c[(0, 0)];
    let cross = c.fixed_view::<3, 1>(1, 0).into_owned();
    let schur = c.fixed_view::<3, 3>(1, 1) - cross * cross.transpose() / pivot;
    let eig = SymmetricEigen::new(schur).eigenvalues;
    let pos = eig.iter().filter(|&&v| v > 0.0).count() + usize::from(pivot > 0.0);
    let neg = eig.iter().filter(|&&v| v < 0.0).count() + usize::from(pivot < 0.0);
    (pos, neg)
}

/// `max |a - b| / max(|a|, |b|)` over all entries.
pub fn relative_difference<const R: usize, const C: usize>(
    a: &nalgebra::SMatrix<f64, R, C>,
    b: &nalgebra::SMatrix<f64, R, C>,
) -> f64 {
    let scale = a.abs().max().max(b.abs().max());
    if scale == 0.0 {
        return 0.0;
    }
    (a - b).abs().max() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical(h: f64, p: f64) -> (Tetrad, Parameters) {
        (Tetrad::canonical(), Parameters::new(h, p).unwrap())
    }

    #[test]
    fn pseudo_euclidean_axis_limit() {
        let (t, ps) = canonical(1.0, 1.0);
        // The deviation from the rest-direction values is O(w3).
        for w3 in [1e-4, 1e-6, 1e-8] {
            let y = Vector4::new(1.0, 0.0, 0.0, w3);
            let l = unit_covector(&y, &t, &ps).unwrap();
            assert!((l - Vector4::new(1.0, 0.0, 0.0, 0.0)).abs().max() < 2.0 * w3);
            let h = angular_metric(&y, &t, &ps).unwrap();
            let expected = Matrix4::from_diagonal(&Vector4::new(0.0, -1.0, -1.0, -1.0));
            assert!((h - expected).abs().max() < 2.0 * w3);
        }
    }

    #[test]
    fn pseudo_euclidean_metric_is_minkowski() {
        let (t, ps) = canonical(1.0, 1.0);
        let tb = metric_tensor(&Vector4::new(2.0, 0.3, -0.4, 0.7), &t, &ps).unwrap();
        assert!((tb.g - crate::frame::minkowski()).abs().max() < 1e-12);
        assert!((tb.det_g + 1.0).abs() < 1e-12);
        assert!((tb.det_g_closed + 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_identity_at_reference_point() {
        let (t, ps) = canonical(1.25, 0.8);
        let y = Vector4::new(2.0, 0.2, 0.1, 0.5);
        let f = kernel::finsler_norm(&y, &t, &ps).unwrap();
        let l = unit_covector(&y, &t, &ps).unwrap();
        assert!((l.dot(&y) - f).abs() < 1e-12 * f);
    }

    #[test]
    fn finsleroid3_metric_isotropic_is_identity() {
        let ps = Parameters::new(1.7, 1.0).unwrap();
        let g = finsleroid3_metric(&Vector3::new(0.2, -0.3, 0.5), &ps).unwrap();
        assert!((g - Matrix3::identity()).abs().max() < 1e-14);
    }

    #[test]
    fn finsleroid3_metric_euler_and_positivity() {
        let ps = Parameters::new(1.5, 0.6).unwrap();
        let w = Vector3::new(0.2, -0.3, 0.5);
        let g = finsleroid3_metric(&w, &ps).unwrap();
        let r = kernel::radial([w[0], w[1], w[2]], &ps);
        assert!(((g * w).dot(&w) - r * r).abs() < 1e-13);
        assert!(g.symmetric_eigenvalues().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn finsleroid3_axis_is_flagged() {
        let ps = Parameters::new(1.5, 0.6).unwrap();
        assert!(matches!(
            finsleroid3_metric(&Vector3::new(0.0, 0.0, 0.5), &ps),
            Err(FinsleroidError::PolarAxisSingular { .. })
        ));
    }

    #[test]
    fn polar_axis_gradients_are_flagged() {
        let (t, ps) = canonical(1.0, 1.0);
        assert!(matches!(
            angle_gradients(&Vector4::new(1.0, 0.0, 0.0, 0.5), &t, &ps),
            Err(FinsleroidError::PolarAxisSingular { .. })
        ));
    }
}
