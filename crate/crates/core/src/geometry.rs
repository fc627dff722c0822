//! Poses, rotations, and the mapping from scenario geometry to path angles
//! and delays.
//!
//! Angles follow the local-frame convention: a terminal's frame is rotated by
//! `Q = Q_z(phi0) * Q_{-x}(theta0)` relative to the global frame, and a
//! direction vector `w` expressed in that frame is `w~ = Q^T w`. Elevation is
//! measured from the local +z axis, azimuth counter-clockwise from +x in the
//! local x-y plane.

use crate::error::{Error, Result};
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::scenario::Scenario;
use crate::waveform;
use nalgebra::{Complex, Matrix3, Vector3};

/// Position plus the two orientation angles (theta0, phi0) of a terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose<T> {
    pub position: Vector3<T>,
    pub theta0: T,
    pub phi0: T,
}

impl<T: Real> Pose<T> {
    pub fn new(position: Vector3<T>, theta0: T, phi0: T) -> Result<Self> {
        for v in position.iter() {
            if !v.is_finite_val() {
                return Err(Error::Argument("pose position must be finite".into()));
            }
        }
        Ok(Pose {
            position,
            theta0: wrap_angle(theta0),
            phi0: wrap_angle(phi0),
        })
    }

    pub fn rotation(&self) -> Matrix3<T> {
        rotation_matrix(self.theta0, self.phi0)
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a % two_pi;
    if w > T::pi() {
        w -= two_pi;
    } else if w <= -T::pi() {
        w += two_pi;
    }
    w
}

/// Counter-clockwise rotation around the z-axis.
pub fn rot_z<T: Real>(phi: T) -> Matrix3<T> {
    let (s, c) = phi.sin_cos();
    Matrix3::new(
        c,
        -s,
        T::zero(),
        s,
        c,
        T::zero(),
        T::zero(),
        T::zero(),
        T::one(),
    )
}

/// Clockwise rotation around the x-axis.
pub fn rot_neg_x<T: Real>(theta: T) -> Matrix3<T> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        T::one(),
        T::zero(),
        T::zero(),
        T::zero(),
        c,
        s,
        T::zero(),
        -s,
        c,
    )
}

/// The terminal rotation `Q(theta0, phi0) = Q_z(phi0) * Q_{-x}(theta0)`.
pub fn rotation_matrix<T: Real>(theta0: T, phi0: T) -> Matrix3<T> {
    rot_z(phi0) * rot_neg_x(theta0)
}

/// Coordinates of `target` in the local frame of `origin_pose`:
/// `Q^{-1}(theta0, phi0) * (target - origin)`.
pub fn translated_coords<T: Real>(target: &Vector3<T>, origin_pose: &Pose<T>) -> Vector3<T> {
    origin_pose.rotation().transpose() * (target - origin_pose.position)
}

/// Elevation/azimuth of a direction vector: `(arccos(v_z/|v|), atan2(v_y, v_x))`.
///
/// A vector on the z-axis has no azimuth direction; by convention the azimuth
/// is 0 there (callers that need the azimuth derivative must reject that
/// geometry, see the localization module).
pub fn elevation_azimuth<T: Real>(v: &Vector3<T>) -> Result<(T, T)> {
    let n = v.norm();
    if n == T::zero() || !n.is_finite_val() {
        return Err(Error::Geometry(
            "cannot take angles of a zero-norm vector".into(),
        ));
    }
    let elevation = (v.z / n).clamp(-T::one(), T::one()).acos();
    let azimuth = if v.x == T::zero() && v.y == T::zero() {
        T::zero()
    } else {
        v.y.atan2(v.x)
    };
    Ok((elevation, azimuth))
}

/// Unit direction for an (elevation, azimuth) pair; inverse of
/// [`elevation_azimuth`] up to scale.
pub fn unit_from_angles<T: Real>(theta: T, phi: T) -> Vector3<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(cp * st, sp * st, ct)
}

/// The four angles a RIS path adds on top of the BS/UE angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisAngles<T> {
    /// Elevation/azimuth of incidence at the RIS (from the BS).
    pub theta_rl: T,
    pub phi_rl: T,
    /// Elevation/azimuth of reflection at the RIS (towards the UE).
    pub theta_tl: T,
    pub phi_tl: T,
}

/// Geometric channel parameters of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathParams<T> {
    /// Departure angles at the BS (global frame).
    pub theta_tu: T,
    pub phi_tu: T,
    /// Incidence/reflection angles at the RIS; `None` for the LOS path.
    pub ris: Option<RisAngles<T>>,
    /// Arrival angles at the UE (UE local frame).
    pub theta_ru: T,
    pub phi_ru: T,
    /// Time of arrival in seconds.
    pub tau: T,
    /// Complex path gain.
    pub beta: Complex<T>,
    /// Pathloss factor 1/rho.
    pub rho_inv: T,
}

impl<T: Real> PathParams<T> {
    /// Effective complex amplitude `beta / sqrt(rho)`.
    pub fn amplitude(&self) -> Complex<T> {
        self.beta * Complex::new(self.rho_inv.sqrt(), T::zero())
    }
}

/// Frame vectors backing the angle chain of one path; the localization
/// Jacobian differentiates through these.
#[derive(Debug, Clone)]
pub struct PathFrames<T> {
    /// BS -> endpoint in the global frame (`g`); endpoint is the RIS for RIS
    /// paths and the UE for the LOS path.
    pub g: Vector3<T>,
    /// BS relative to the RIS, raw and in the RIS frame (`c`, `c~`); RIS
    /// paths only.
    pub c: Option<(Vector3<T>, Vector3<T>)>,
    /// UE relative to the RIS, raw and in the RIS frame (`v`, `v~`); RIS
    /// paths only.
    pub v: Option<(Vector3<T>, Vector3<T>)>,
    /// Far terminal relative to the UE, raw and in the UE frame (`e`, `e~`).
    pub e: (Vector3<T>, Vector3<T>),
}

/// Frame vectors for path `path_index` (0 = LOS, 1..=M1 = RIS).
pub fn path_frames<T: Real>(scenario: &Scenario<T>, path_index: usize) -> Result<PathFrames<T>> {
    let p_bs = scenario.bs.pose.position;
    let p_ue = scenario.ue.pose.position;
    if path_index == 0 {
        let g = p_ue - p_bs;
        require_distinct(&g, "BS and UE")?;
        let e = p_bs - p_ue;
        let e_t = scenario.ue.pose.rotation().transpose() * e;
        Ok(PathFrames {
            g,
            c: None,
            v: None,
            e: (e, e_t),
        })
    } else {
        let ris = scenario
            .ris
            .get(path_index - 1)
            .ok_or_else(|| Error::Argument(format!("no RIS path {path_index}")))?;
        let p_m = ris.pose.position;
        let q_m = ris.pose.rotation();
        let g = p_m - p_bs;
        require_distinct(&g, "BS and RIS")?;
        let c = p_bs - p_m;
        let v = p_ue - p_m;
        require_distinct(&v, "UE and RIS")?;
        let e = p_m - p_ue;
        Ok(PathFrames {
            g,
            c: Some((c, q_m.transpose() * c)),
            v: Some((v, q_m.transpose() * v)),
            e: (e, scenario.ue.pose.rotation().transpose() * e),
        })
    }
}

fn require_distinct<T: Real>(d: &Vector3<T>, what: &str) -> Result<()> {
    if d.norm() == T::zero() {
        return Err(Error::Geometry(format!("{what} positions coincide")));
    }
    Ok(())
}

/// Full geometric channel parameters of one path (0 = LOS, 1..=M1 = RIS).
///
/// The path gain comes from the scenario's deterministic gain realization and
/// the pathloss from the waveform module's models.
pub fn derive_path_params<T: Real>(
    scenario: &Scenario<T>,
    path_index: usize,
) -> Result<PathParams<T>> {
    let realization = scenario.realize();
    derive_path_params_realized(scenario, path_index, &realization.betas[path_index])
}

pub(crate) fn derive_path_params_realized<T: Real>(
    scenario: &Scenario<T>,
    path_index: usize,
    beta: &Complex<T>,
) -> Result<PathParams<T>> {
    let frames = path_frames(scenario, path_index)?;
    let lambda = scenario.waveform.wavelength();
    let c_light = T::of(SPEED_OF_LIGHT);
    let (theta_tu, phi_tu) = elevation_azimuth(&frames.g)?;
    let (theta_ru, phi_ru) = elevation_azimuth(&frames.e.1)?;
    if path_index == 0 {
        let d = frames.g.norm();
        Ok(PathParams {
            theta_tu,
            phi_tu,
            ris: None,
            theta_ru,
            phi_ru,
            tau: d / c_light,
            beta: *beta,
            rho_inv: waveform::los_pathloss(lambda, d)?,
        })
    } else {
        let (c_raw, c_t) = frames.c.as_ref().unwrap();
        let (v_raw, v_t) = frames.v.as_ref().unwrap();
        let (theta_rl, phi_rl) = elevation_azimuth(c_t)?;
        let (theta_tl, phi_tl) = elevation_azimuth(v_t)?;
        let d_rl = c_raw.norm();
        let d_tl = v_raw.norm();
        Ok(PathParams {
            theta_tu,
            phi_tu,
            ris: Some(RisAngles {
                theta_rl,
                phi_rl,
                theta_tl,
                phi_tl,
            }),
            theta_ru,
            phi_ru,
            tau: (d_rl + d_tl) / c_light,
            beta: *beta,
            rho_inv: waveform::ris_pathloss(lambda, theta_tl, theta_rl, d_tl, d_rl)?,
        })
    }
}
