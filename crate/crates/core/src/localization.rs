//! Transformation from geometric channel parameters to location parameters,
//! Bayesian UE-block EFIMs with RIS pose priors, and the squared
//! position/orientation error bounds.

use crate::efim::{efim, pinv_tol, EfimResult};
use crate::error::{Error, Result};
use crate::fim::assemble_bayesian_fim;
use crate::geometry::{path_frames, rot_z};
use crate::labels::{LabeledMatrix, LocKind, LocationLabel, ParamKind, ParamLabel};
use crate::linalg::{self, SolveKind};
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::scenario::Scenario;
use crate::waveform::{is_unitary_gram, is_zero_sum};
use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

/// Gradient of the geometric channel parameters with respect to the location
/// parameters: rows are location labels (UE block then one block per RIS),
/// columns are channel-parameter labels.
#[derive(Debug, Clone)]
pub struct Jacobian<T> {
    pub rows: Vec<LocationLabel>,
    pub cols: Vec<ParamLabel>,
    pub m: DMatrix<T>,
}

/// Elevation gradient of `arccos(w_z / |w|)` with respect to `w`.
fn d_elevation<T: Real>(w: &Vector3<T>) -> Vector3<T> {
    let r2 = w.norm_squared();
    let rho = (w.x * w.x + w.y * w.y).sqrt();
    Vector3::new(w.x * w.z, w.y * w.z, -(w.x * w.x + w.y * w.y)) / (r2 * rho)
}

/// Azimuth gradient of `atan2(w_y, w_x)` with respect to `w`.
fn d_azimuth<T: Real>(w: &Vector3<T>) -> Vector3<T> {
    let rho2 = w.x * w.x + w.y * w.y;
    Vector3::new(-w.y, w.x, T::zero()) / rho2
}

fn check_regular<T: Real>(w: &Vector3<T>, path: usize, angle: &'static str) -> Result<()> {
    let rho = (w.x * w.x + w.y * w.y).sqrt();
    if rho <= T::of(1e-9) * w.norm() {
        return Err(Error::JacobianSingular { path, angle });
    }
    Ok(())
}

/// Derivative of the rotated vector `w~ = Q^T(theta0, phi0) w` with respect
/// to the frame's elevation rotation angle.
fn d_tilde_theta0<T: Real>(w_tilde: &Vector3<T>) -> Vector3<T> {
    Vector3::new(T::zero(), -w_tilde.z, w_tilde.y)
}

/// Same, with respect to the azimuth rotation angle.
fn d_tilde_phi0<T: Real>(w: &Vector3<T>, w_tilde: &Vector3<T>, theta0: T, phi0: T) -> Vector3<T> {
    let w_prime = rot_z(phi0).transpose() * w;
    let (s, c) = theta0.sin_cos();
    Vector3::new(w_prime.y, -c * w_tilde.x, -s * w_tilde.x)
}

/// One local-frame angle chain: raw vector, rotated vector and the owning
/// pose's rotation.
struct FrameChain<T> {
    w: Vector3<T>,
    w_tilde: Vector3<T>,
    q: Matrix3<T>,
    theta0: T,
    phi0: T,
}

impl<T: Real> FrameChain<T> {
    fn angle_grads(&self, elevation: bool) -> (Vector3<T>, T, T) {
        let d_tilde = if elevation {
            d_elevation(&self.w_tilde)
        } else {
            d_azimuth(&self.w_tilde)
        };
        // Chain rule through w~ = Q^T w for the raw-vector gradient, and
        // through the rotation angles for the pose gradients.
        let d_w = self.q * d_tilde;
        let d_theta0 = d_tilde.dot(&d_tilde_theta0(&self.w_tilde));
        let d_phi0 = d_tilde.dot(&d_tilde_phi0(&self.w, &self.w_tilde, self.theta0, self.phi0));
        (d_w, d_theta0, d_phi0)
    }
}

/// Build the transformation for the requested channel columns. Every
/// geometric kind is supported, including the angles of incidence; gain
/// labels are a contract error.
pub fn jacobian<T: Real>(
    scenario: &Scenario<T>,
    cols: &[ParamLabel],
) -> Result<Jacobian<T>> {
    let m1 = scenario.m1();
    let mut rows: Vec<LocationLabel> = LocationLabel::ue_block().to_vec();
    for m in 1..=m1 {
        rows.extend(LocationLabel::ris_block(m));
    }
    let row_index = |l: LocationLabel| rows.iter().position(|r| *r == l).unwrap();

    let mut out = DMatrix::zeros(rows.len(), cols.len());
    let c_light = T::of(SPEED_OF_LIGHT);
    let ue_pose = &scenario.ue.pose;
    let q_ue = ue_pose.rotation();

    let ue_pos = [
        LocationLabel::ue(LocKind::UePx),
        LocationLabel::ue(LocKind::UePy),
        LocationLabel::ue(LocKind::UePz),
    ];
    let ris_pos = |m: usize| {
        [
            LocationLabel::ris(LocKind::RisPx, m),
            LocationLabel::ris(LocKind::RisPy, m),
            LocationLabel::ris(LocKind::RisPz, m),
        ]
    };

    for (j, label) in cols.iter().enumerate() {
        if label.kind.is_gain() {
            return Err(Error::Label(format!(
                "gain label {label} has no location gradient"
            )));
        }
        let path = label.path;
        let frames = path_frames(scenario, path)?;
        // (label, value) assignments gathered per column.
        let mut entries: Vec<(LocationLabel, T)> = Vec::new();
        let push3 = |entries: &mut Vec<(LocationLabel, T)>,
                     labels: [LocationLabel; 3],
                     v: &Vector3<T>| {
            entries.push((labels[0], v.x));
            entries.push((labels[1], v.y));
            entries.push((labels[2], v.z));
        };

        match label.kind {
            ParamKind::ThetaRu | ParamKind::PhiRu => {
                let elevation = label.kind == ParamKind::ThetaRu;
                let (e, e_tilde) = (frames.e.0, frames.e.1);
                check_regular(&e_tilde, path, label.kind.name())?;
                let chain = FrameChain {
                    w: e,
                    w_tilde: e_tilde,
                    q: q_ue,
                    theta0: ue_pose.theta0,
                    phi0: ue_pose.phi0,
                };
                let (d_w, d_t0, d_p0) = chain.angle_grads(elevation);
                entries.push((LocationLabel::ue(LocKind::UeTheta0), d_t0));
                entries.push((LocationLabel::ue(LocKind::UePhi0), d_p0));
                // e = (far terminal) - p, so the UE position enters with a
                // negative sign; a RIS endpoint enters positively.
                push3(&mut entries, ue_pos, &(-d_w));
                if path > 0 {
                    push3(&mut entries, ris_pos(path), &d_w);
                }
            }
            ParamKind::ThetaTu | ParamKind::PhiTu => {
                let elevation = label.kind == ParamKind::ThetaTu;
                check_regular(&frames.g, path, label.kind.name())?;
                let d_g = if elevation {
                    d_elevation(&frames.g)
                } else {
                    d_azimuth(&frames.g)
                };
                if path == 0 {
                    push3(&mut entries, ue_pos, &d_g);
                } else {
                    push3(&mut entries, ris_pos(path), &d_g);
                }
            }
            ParamKind::ThetaTl | ParamKind::PhiTl => {
                let elevation = label.kind == ParamKind::ThetaTl;
                let pose = &scenario.ris[path - 1].pose;
                let (v, v_tilde) = frames.v.as_ref().copied().unwrap();
                check_regular(&v_tilde, path, label.kind.name())?;
                let chain = FrameChain {
                    w: v,
                    w_tilde: v_tilde,
                    q: pose.rotation(),
                    theta0: pose.theta0,
                    phi0: pose.phi0,
                };
                let (d_w, d_t0, d_p0) = chain.angle_grads(elevation);
                entries.push((LocationLabel::ris(LocKind::RisTheta0, path), d_t0));
                entries.push((LocationLabel::ris(LocKind::RisPhi0, path), d_p0));
                // v = p - p^[m].
                push3(&mut entries, ue_pos, &d_w);
                push3(&mut entries, ris_pos(path), &(-d_w));
            }
            ParamKind::ThetaRl | ParamKind::PhiRl => {
                let elevation = label.kind == ParamKind::ThetaRl;
                let pose = &scenario.ris[path - 1].pose;
                let (c, c_tilde) = frames.c.as_ref().copied().unwrap();
                check_regular(&c_tilde, path, label.kind.name())?;
                let chain = FrameChain {
                    w: c,
                    w_tilde: c_tilde,
                    q: pose.rotation(),
                    theta0: pose.theta0,
                    phi0: pose.phi0,
                };
                let (d_w, d_t0, d_p0) = chain.angle_grads(elevation);
                entries.push((LocationLabel::ris(LocKind::RisTheta0, path), d_t0));
                entries.push((LocationLabel::ris(LocKind::RisPhi0, path), d_p0));
                // c = p_BS - p^[m].
                push3(&mut entries, ris_pos(path), &(-d_w));
            }
            ParamKind::Tau => {
                if path == 0 {
                    let d = frames.g.norm();
                    push3(&mut entries, ue_pos, &(frames.g / (c_light * d)));
                } else {
                    let (v, _) = frames.v.as_ref().copied().unwrap();
                    let unit_ue = v / v.norm();
                    push3(&mut entries, ue_pos, &(unit_ue / c_light));
                    let d_ris = frames.g / frames.g.norm() - unit_ue;
                    push3(&mut entries, ris_pos(path), &(d_ris / c_light));
                }
            }
            ParamKind::BetaRe | ParamKind::BetaIm => unreachable!(),
        }

        for (l, v) in entries {
            out[(row_index(l), j)] = v;
        }
    }

    Ok(Jacobian {
        rows,
        cols: cols.to_vec(),
        m: out,
    })
}

/// Congruence transform of a channel-parameter EFIM into location space.
pub fn location_fim<T: Real>(
    scenario: &Scenario<T>,
    channel_efim: &LabeledMatrix<T, ParamLabel>,
) -> Result<LabeledMatrix<T, LocationLabel>> {
    let upsilon = jacobian(scenario, channel_efim.labels())?;
    let values = &upsilon.m * channel_efim.values() * upsilon.m.transpose();
    LabeledMatrix::new(upsilon.rows, values)
}

/// Reduced geometric channel labels of a scenario: the LOS block (when
/// present) and the seven per-RIS kinds with the angles of incidence
/// excluded.
pub fn reduced_channel_labels<T: Real>(scenario: &Scenario<T>) -> Vec<ParamLabel> {
    let mut labels = Vec::new();
    if scenario.include_los {
        for kind in [
            ParamKind::ThetaRu,
            ParamKind::PhiRu,
            ParamKind::ThetaTu,
            ParamKind::PhiTu,
            ParamKind::Tau,
        ] {
            labels.push(ParamLabel::new(kind, 0));
        }
    }
    for kind in ParamKind::REDUCED_KINDS {
        for m in 1..=scenario.m1() {
            labels.push(ParamLabel::new(kind, m));
        }
    }
    labels
}

fn ue_labels() -> Vec<LocationLabel> {
    LocationLabel::ue_block().to_vec()
}

fn location_prior_diag<T: Real>(scenario: &Scenario<T>, labels: &[LocationLabel]) -> DMatrix<T> {
    let n = labels.len();
    let mut p = DMatrix::zeros(n, n);
    for (i, l) in labels.iter().enumerate() {
        let var = match l.ris_index {
            None => scenario.ue_prior,
            Some(m) => {
                if scenario.ris[m - 1].known {
                    None
                } else {
                    scenario.ris[m - 1].sigma2_m
                }
            }
        };
        if let Some(v) = var {
            if v.is_finite_val() {
                p[(i, i)] = T::of(2.0) / v;
            }
        }
    }
    p
}

/// Location labels that are actually unknown: the UE block plus one block
/// per perturbed RIS.
pub fn unknown_location_labels<T: Real>(scenario: &Scenario<T>) -> Vec<LocationLabel> {
    let mut labels = ue_labels();
    for m in 1..=scenario.m1() {
        if !scenario.ris[m - 1].known {
            labels.extend(LocationLabel::ris_block(m));
        }
    }
    labels
}

/// UE-block Bayesian EFIM through the general route: full channel FIM,
/// Schur reduction onto the reduced geometric labels, congruence into
/// location space, location priors, then elimination of the perturbed RIS
/// blocks.
pub fn ue_efim_monolithic<T: Real>(
    scenario: &Scenario<T>,
) -> Result<EfimResult<T, LocationLabel>> {
    ue_efim_monolithic_with_labels(scenario, &reduced_channel_labels(scenario))
}

/// Same route but without excluding the angles of incidence from the channel
/// parameterization. Used to certify that the reduced parameterization loses
/// nothing on well-posed scenarios.
pub fn ue_efim_nine_kind<T: Real>(scenario: &Scenario<T>) -> Result<EfimResult<T, LocationLabel>> {
    let mut labels = Vec::new();
    if scenario.include_los {
        for kind in [
            ParamKind::ThetaRu,
            ParamKind::PhiRu,
            ParamKind::ThetaTu,
            ParamKind::PhiTu,
            ParamKind::Tau,
        ] {
            labels.push(ParamLabel::new(kind, 0));
        }
    }
    for kind in ParamKind::GEOMETRIC_KINDS {
        for m in 1..=scenario.m1() {
            labels.push(ParamLabel::new(kind, m));
        }
    }
    ue_efim_monolithic_with_labels(scenario, &labels)
}

fn ue_efim_monolithic_with_labels<T: Real>(
    scenario: &Scenario<T>,
    channel_labels: &[ParamLabel],
) -> Result<EfimResult<T, LocationLabel>> {
    let j = assemble_bayesian_fim(scenario)?;
    // Excluded kinds (the angles of incidence in the reduced
    // parameterization) are dropped from the model, not Schur-eliminated:
    // restrict to the kept labels plus the gain nuisances first.
    let mut with_gains: Vec<ParamLabel> = channel_labels.to_vec();
    for l in j.labels() {
        if l.kind.is_gain() {
            with_gains.push(*l);
        }
    }
    let sub = j.submatrix(&with_gains)?;
    let channel = efim(&sub, channel_labels)?;
    let loc = location_fim(scenario, &channel.efim)?;
    let unknowns = unknown_location_labels(scenario);
    let pruned = loc.submatrix(&unknowns)?;
    let prior = location_prior_diag(scenario, &unknowns);
    let full = LabeledMatrix::new(unknowns.clone(), pruned.values() + prior)?;

    if unknowns.len() == 5 {
        let zeros = LabeledMatrix::zeros(ue_labels())?;
        return Ok(EfimResult {
            efim: full,
            info_loss: zeros,
            nuisance_condition: channel.nuisance_condition,
            degraded: channel.degraded,
        });
    }
    let mut reduced = efim(&full, &ue_labels())?;
    reduced.degraded = reduced.degraded || channel.degraded;
    Ok(reduced)
}

/// UE-block Bayesian EFIM through the separable route: per-path channel
/// EFIMs composed with per-path transformation blocks, with each perturbed
/// RIS eliminated against its pose prior. Requires a unitary sequence
/// correlation, and zero column sums when a LOS path is present.
pub fn ue_efim_per_path<T: Real>(scenario: &Scenario<T>) -> Result<EfimResult<T, LocationLabel>> {
    let realization = scenario.realize();
    if scenario.m1() > 0 {
        if !is_unitary_gram(&realization.d_gamma, T::of(1e-10)) {
            return Err(Error::Argument(
                "per-path composition requires a unitary sequence correlation".into(),
            ));
        }
        if scenario.include_los && !is_zero_sum(&realization.d_gamma, T::of(1e-10)) {
            return Err(Error::Argument(
                "per-path composition with a LOS path requires zero-sum sequences".into(),
            ));
        }
    }

    let j = assemble_bayesian_fim(scenario)?;
    let cols = reduced_channel_labels(scenario);
    let upsilon = jacobian(scenario, &cols)?;
    let ue = ue_labels();
    let ue_rows = (0..5).collect::<Vec<_>>();

    let mut gain = DMatrix::<T>::zeros(5, 5);
    let mut loss = DMatrix::<T>::zeros(5, 5);
    let mut degraded = false;
    let mut worst_condition = T::one();

    // Per-path channel EFIM over the kept kinds of that path.
    let path_efim = |path: usize| -> Result<(Vec<ParamLabel>, DMatrix<T>)> {
        let kept: Vec<ParamLabel> = cols
            .iter()
            .copied()
            .filter(|l| l.path == path)
            .collect();
        let mut with_gains = kept.clone();
        with_gains.push(ParamLabel::new(ParamKind::BetaRe, path));
        with_gains.push(ParamLabel::new(ParamKind::BetaIm, path));
        let sub = j.submatrix(&with_gains)?;
        let r = efim(&sub, &kept)?;
        Ok((kept, r.efim.into_values()))
    };

    let block_rows = |labels: &[LocationLabel]| -> Vec<usize> {
        labels
            .iter()
            .map(|l| upsilon.rows.iter().position(|r| r == l).unwrap())
            .collect()
    };
    let col_indices = |labels: &[ParamLabel]| -> Vec<usize> {
        labels
            .iter()
            .map(|l| upsilon.cols.iter().position(|c| c == l).unwrap())
            .collect()
    };
    let sub_m = |rows: &[usize], cs: &[usize]| -> DMatrix<T> {
        DMatrix::from_fn(rows.len(), cs.len(), |i, k| upsilon.m[(rows[i], cs[k])])
    };

    for path in scenario.path_indices() {
        let (kept, j_path) = path_efim(path)?;
        let cidx = col_indices(&kept);
        let ups_ue = sub_m(&ue_rows, &cidx);
        gain += &ups_ue * &j_path * ups_ue.transpose();

        if path == 0 {
            continue;
        }
        let node = &scenario.ris[path - 1];
        if node.known {
            continue;
        }
        // Perturbed RIS: its own block absorbs information, returned only
        // through the prior-regularized coupling.
        let ris_rows = block_rows(&LocationLabel::ris_block(path));
        let ups_ris = sub_m(&ris_rows, &cidx);
        let cross = &ups_ue * &j_path * ups_ris.transpose();
        let mut own = &ups_ris * &j_path * ups_ris.transpose();
        if let Some(var) = node.sigma2_m {
            if var.is_finite_val() {
                own += DMatrix::identity(5, 5) * (T::of(2.0) / var);
            }
        }
        let out = linalg::schur_complement(&DMatrix::zeros(5, 5), &cross, &own, pinv_tol::<T>());
        loss += &out.loss;
        degraded = degraded || out.solve == SolveKind::PseudoInverse;
        worst_condition = worst_condition.max(out.condition);
    }

    if let Some(var) = scenario.ue_prior {
        if var.is_finite_val() {
            gain += DMatrix::identity(5, 5) * (T::of(2.0) / var);
        }
    }

    Ok(EfimResult {
        efim: LabeledMatrix::new(ue.clone(), &gain - &loss)?,
        info_loss: LabeledMatrix::new(ue, loss)?,
        nuisance_condition: worst_condition,
        degraded,
    })
}

/// UE-block Bayesian EFIM, choosing the separable route when the sequence
/// matrix allows it and the general route otherwise.
pub fn location_bayesian_efim<T: Real>(
    scenario: &Scenario<T>,
) -> Result<EfimResult<T, LocationLabel>> {
    let realization = scenario.realize();
    let separable = scenario.m1() == 0
        || (is_unitary_gram(&realization.d_gamma, T::of(1e-10))
            && (!scenario.include_los || is_zero_sum(&realization.d_gamma, T::of(1e-10))));
    if separable {
        ue_efim_per_path(scenario)
    } else {
        ue_efim_monolithic(scenario)
    }
}

/// Position and orientation error bounds for one scenario evaluation.
#[derive(Debug, Clone)]
pub struct BoundsReport<T> {
    /// Squared position error bound (m^2); infinite when the EFIM is singular.
    pub speb: T,
    /// Squared orientation error bound (rad^2).
    pub soeb: T,
    pub location_efim: LabeledMatrix<T, LocationLabel>,
    /// True when the UE EFIM was numerically singular.
    pub singular: bool,
    /// True when any eliminated block needed a pseudo-inverse.
    pub degraded: bool,
    /// Basis of the unobservable subspace when singular (columns).
    pub nullspace: Option<DMatrix<T>>,
}

impl<T: Real> BoundsReport<T> {
    pub fn peb(&self) -> T {
        self.speb.sqrt()
    }

    pub fn oeb(&self) -> T {
        self.soeb.sqrt()
    }
}

/// Bounds from a 5x5 UE-block EFIM: the orientation bound sums the first two
/// diagonal entries of the inverse, the position bound the last three.
pub fn speb_soeb<T: Real>(
    efim: &LabeledMatrix<T, LocationLabel>,
    degraded: bool,
) -> Result<BoundsReport<T>> {
    let ordered = efim.submatrix(&ue_labels())?;
    let eig = SymmetricEigen::new(ordered.values().clone());
    let max = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    let cut = max * T::of(1e-14);
    let singular = max == T::zero() || eig.eigenvalues.iter().any(|l| *l <= cut);
    if singular {
        let cols: Vec<DVector<T>> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| **l <= cut)
            .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
            .collect();
        let nullspace = DMatrix::from_columns(&cols);
        return Ok(BoundsReport {
            speb: T::infinity(),
            soeb: T::infinity(),
            location_efim: ordered,
            singular: true,
            degraded,
            nullspace: Some(nullspace),
        });
    }
    let mut inv = DMatrix::zeros(5, 5);
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        inv += DMatrix::from_fn(5, 5, |r, c| v[r] * v[c] / *lam);
    }
    Ok(BoundsReport {
        speb: inv[(2, 2)] + inv[(3, 3)] + inv[(4, 4)],
        soeb: inv[(0, 0)] + inv[(1, 1)],
        location_efim: ordered,
        singular: false,
        degraded,
        nullspace: None,
    })
}

/// Scenario in, bounds out.
pub fn evaluate_bounds<T: Real>(scenario: &Scenario<T>) -> Result<BoundsReport<T>> {
    let r = location_bayesian_efim(scenario)?;
    speb_soeb(&r.efim, r.degraded)
}
