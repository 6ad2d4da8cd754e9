//! Sectional curvature of a metric given only as a function of coordinates.
//!
//! Metric derivatives come from fourth-order central stencils; the curvature
//! computed at steps `h` and `h/2` is combined by Richardson extrapolation.

use nalgebra::SMatrix;

use crate::error::Result;

const FIRST: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// Sectional curvatures `K[a][b]` of the coordinate planes at `x`.
///
/// Convention: the unit sphere returns `+1`, the unit hyperboloid `-1`.
pub fn sectional_curvatures<F, const N: usize>(
    metric: &F,
    x: [f64; N],
    step: f64,
) -> Result<SMatrix<f64, N, N>>
where
    F: Fn(&[f64; N]) -> Result<SMatrix<f64, N, N>>,
{
    let coarse = sectional_at_step(metric, x, step)?;
    let fine = sectional_at_step(metric, x, 0.5 * step)?;
    Ok((fine * 16.0 - coarse) / 15.0)
}

fn shifted<const N: usize>(x: &[f64; N], moves: &[(usize, f64)]) -> [f64; N] {
    let mut y = *x;
    for &(c, d) in moves {
        y[c] += d;
    }
    y
}

/// Unextrapolated sectional curvatures at a single step size.
pub fn sectional_at_step<F, const N: usize>(
    metric: &F,
    x: [f64; N],
    h: f64,
) -> Result<SMatrix<f64, N, N>>
where
    F: Fn(&[f64; N]) -> Result<SMatrix<f64, N, N>>,
{
    let g = metric(&x)?;
    let g_inv = g
        .try_inverse()
        .ok_or_else(|| crate::error::FinsleroidError::StencilOutOfDomain("singular metric".into()))?;

    // dg[c] = d_c g, ddg[c][d] = d_c d_d g
    let mut dg = [SMatrix::<f64, N, N>::zeros(); N];
    let mut ddg = [[SMatrix::<f64, N, N>::zeros(); N]; N];
    for c in 0..N {
        let at = |m: f64| metric(&shifted(&x, &[(c, m * h)]));
        let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        dg[c] = (m2 - m1 * 8.0 + p1 * 8.0 - p2) / (12.0 * h);
        ddg[c][c] = (-m2 + m1 * 16.0 - g * 30.0 + p1 * 16.0 - p2) / (12.0 * h * h);
        for d in 0..c {
            let mut acc = SMatrix::<f64, N, N>::zeros();
            for &(mc, wc) in &FIRST {
                for &(md, wd) in &FIRST {
                    acc += metric(&shifted(&x, &[(c, mc * h), (d, md * h)]))? * (wc * wd);
                }
            }
            ddg[c][d] = acc / (144.0 * h * h);
            ddg[d][c] = ddg[c][d];
        }
    }

    // Gamma^e_{bc} = 1/2 g^{ef} (d_b g_fc + d_c g_fb - d_f g_bc)
    let mut gamma = [[[0.0; N]; N]; N];
    for e in 0..N {
        for b in 0..N {
            for c in 0..N {
                let mut s = 0.0;
                for f in 0..N {
                    s += g_inv[(e, f)] * (dg[b][(f, c)] + dg[c][(f, b)] - dg[f][(b, c)]);
                }
                gamma[e][b][c] = 0.5 * s;
            }
        }
    }

    // R_abcd = 1/2 (g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)
    //          + g_ef (G^e_bc G^f_ad - G^e_bd G^f_ac)
    let riemann = |a: usize, b: usize, c: usize, d: usize| {
        let second = 0.5
            * (ddg[b][c][(a, d)] + ddg[a][d][(b, c)] - ddg[b][d][(a, c)] - ddg[a][c][(b, d)]);
        let mut quad = 0.0;
        for e in 0..N {
            for f in 0..N {
                quad += g[(e, f)]
                    * (gamma[e][b][c] * gamma[f][a][d] - gamma[e][b][d] * gamma[f][a][c]);
            }
        }
        second + quad
    };

    let mut k = SMatrix::<f64, N, N>::zeros();
    for a in 0..N {
        for b in (a + 1)..N {
            let area = g[(a, a)] * g[(b, b)] - g[(a, b)] * g[(a, b)];
            let value = riemann(a, b, a, b) / area;
            k[(a, b)] = value;
            k[(b, a)] = value;
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix3};

    #[test]
    fn unit_sphere_has_curvature_one() {
        let sphere = |x: &[f64; 2]| Ok(Matrix2::new(1.0, 0.0, 0.0, x[0].sin().powi(2)));
        let k = sectional_curvatures(&sphere, [0.9, 0.3], 1e-3).unwrap();
        assert!((k[(0, 1)] - 1.0).abs() < 1e-8, "{}", k[(0, 1)]);
    }

    #[test]
    fn hyperbolic_space_has_constant_negative_curvature() {
        let radius2 = 0.25f64;
        let hyp = |x: &[f64; 3]| {
            let s2 = x[0].sinh().powi(2);
            Ok(Matrix3::from_diagonal(&nalgebra::Vector3::new(
                radius2,
                radius2 * s2,
                radius2 * s2 * x[1].sin().powi(2),
            )))
        };
        let k = sectional_curvatures(&hyp, [1.1, 0.7, 2.0], 1e-3).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((k[(a, b)] + 4.0).abs() < 1e-7, "K{a}{b} = {}", k[(a, b)]);
        }
    }

    #[test]
    fn flat_polar_metric_has_zero_curvature() {
        let polar = |x: &[f64; 2]| Ok(Matrix2::new(1.0, 0.0, 0.0, x[0] * x[0]));
        let k = sectional_curvatures(&polar, [1.3, 0.2], 1e-3).unwrap();
        assert!(k[(0, 1)].abs() < 1e-8);
    }
}
