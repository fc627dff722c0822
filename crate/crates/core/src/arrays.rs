//! Antenna/RIS element layouts, steering vectors, and the diagonal
//! angle-derivative weights that feed every FIM block.

use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::{Complex, DVector, Matrix3xX, Vector3};

/// Element coordinates of one array in its local frame, centroid at the
/// origin, one column per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T> {
    delta: Matrix3xX<T>,
}

impl<T: Real> ArrayGeometry<T> {
    /// Wrap explicit element coordinates; the centroid is subtracted so the
    /// column mean is zero.
    pub fn from_elements(delta: Matrix3xX<T>) -> Result<Self> {
        if delta.ncols() == 0 {
            return Err(Error::Argument("array needs at least one element".into()));
        }
        let n = T::of(delta.ncols() as f64);
        let centroid = delta.column_sum() / n;
        let mut d = delta;
        for mut col in d.column_iter_mut() {
            col -= centroid;
        }
        Ok(ArrayGeometry { delta: d })
    }

    /// Uniform rectangular array in the local x-y plane (z = 0), centered on
    /// the origin, listed row-major with x fastest.
    pub fn ura(nx: usize, ny: usize, spacing: T) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Argument("URA axis counts must be >= 1".into()));
        }
        let mut delta = Matrix3xX::zeros(nx * ny);
        let half = T::of(0.5);
        let cx = (T::of(nx as f64) - T::one()) * half;
        let cy = (T::of(ny as f64) - T::one()) * half;
        for iy in 0..ny {
            for ix in 0..nx {
                let col = iy * nx + ix;
                delta[(0, col)] = (T::of(ix as f64) - cx) * spacing;
                delta[(1, col)] = (T::of(iy as f64) - cy) * spacing;
            }
        }
        Ok(ArrayGeometry { delta })
    }

    pub fn count(&self) -> usize {
        self.delta.ncols()
    }

    pub fn delta(&self) -> &Matrix3xX<T> {
        &self.delta
    }

    /// True when all element z coordinates are zero (planar array with its
    /// normal along local z).
    pub fn is_z_normal(&self) -> bool {
        self.delta.row(2).iter().all(|z| *z == T::zero())
    }
}

/// Wavenumber vector `k(theta, phi) = (2 pi / lambda) [cos phi sin theta,
/// sin phi sin theta, cos theta]`.
pub fn wavenumber<T: Real>(theta: T, phi: T, lambda: T) -> Result<Vector3<T>> {
    if lambda <= T::zero() {
        return Err(Error::Argument("wavelength must be positive".into()));
    }
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let scale = T::two_pi() / lambda;
    Ok(Vector3::new(cp * st, sp * st, ct) * scale)
}

/// d k / d theta.
pub fn wavenumber_dtheta<T: Real>(theta: T, phi: T, lambda: T) -> Vector3<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(cp * ct, sp * ct, -st) * (T::two_pi() / lambda)
}

/// d k / d phi.
pub fn wavenumber_dphi<T: Real>(theta: T, phi: T, lambda: T) -> Vector3<T> {
    let (st, _) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(-sp * st, cp * st, T::zero()) * (T::two_pi() / lambda)
}

/// Steering vector plus the diagonal phase-slope weights of one array at one
/// direction.
///
/// `a_n = exp(-j delta_n^T k)`; `k[n] = delta_n^T dk/dtheta` and
/// `p[n] = delta_n^T dk/dphi` are the diagonals of the elevation/azimuth
/// derivative matrices (stored as vectors, every use is elementwise).
#[derive(Debug, Clone)]
pub struct SteeringBundle<T> {
    pub a: DVector<Complex<T>>,
    pub k: DVector<T>,
    pub p: DVector<T>,
}

/// Steering vector and derivative weights for `geom` at direction
/// `(theta, phi)` and wavelength `lambda`.
pub fn steering<T: Real>(
    geom: &ArrayGeometry<T>,
    theta: T,
    phi: T,
    lambda: T,
) -> Result<SteeringBundle<T>> {
    let kvec = wavenumber(theta, phi, lambda)?;
    let dk_t = wavenumber_dtheta(theta, phi, lambda);
    let dk_p = wavenumber_dphi(theta, phi, lambda);
    let n = geom.count();
    let mut a = DVector::from_element(n, Complex::new(T::zero(), T::zero()));
    let mut k = DVector::zeros(n);
    let mut p = DVector::zeros(n);
    for (i, col) in geom.delta().column_iter().enumerate() {
        let phase = -col.dot(&kvec);
        let (s, c) = phase.sin_cos();
        a[i] = Complex::new(c, s);
        k[i] = col.dot(&dk_t);
        p[i] = col.dot(&dk_p);
    }
    Ok(SteeringBundle { a, k, p })
}

/// Coefficients linking the incidence-angle phase slopes of a z-normal
/// planar array to its reflection-angle slopes: solves the 2x2 systems
/// `V [a1, a2]^T = nu3` and `V [a3, a4]^T = nu4`, where the columns of `V`
/// are the (y, x) slope coefficients of the reflection elevation and azimuth
/// and `nu3`/`nu4` those of the incidence angles. With the returned
/// coefficients, `a1 K_tl + a2 P_tl = K_rl` and `a3 K_tl + a4 P_tl = P_rl`
/// hold elementwise.
pub fn ura_angle_coefficients<T: Real>(
    theta_tl: T,
    phi_tl: T,
    theta_rl: T,
    phi_rl: T,
) -> Result<([T; 2], [T; 2])> {
    let (st, ct) = theta_tl.sin_cos();
    let (sp, cp) = phi_tl.sin_cos();
    // det V = -cos(theta_tl) sin(theta_tl).
    let det = -(ct * st);
    if det.abs() < T::of(1e-12) {
        return Err(Error::Geometry(
            "reflection direction is axial; the slope system is rank deficient".into(),
        ));
    }
    let (srt, crt) = theta_rl.sin_cos();
    let (srp, crp) = phi_rl.sin_cos();
    // V = [[ct*sp, st*cp], [ct*cp, -st*sp]], solved in closed form.
    let solve = |b0: T, b1: T| -> [T; 2] {
        [
            (-st * sp * b0 - st * cp * b1) / det,
            (-ct * cp * b0 + ct * sp * b1) / det,
        ]
    };
    Ok((
        solve(crt * srp, crt * crp),
        solve(srt * crp, -(srt * srp)),
    ))
}
