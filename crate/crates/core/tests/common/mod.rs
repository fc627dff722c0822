//! Helpers shared by the integration suites.

use ris_bounds::geometry::{derive_path_params, wrap_angle};
use ris_bounds::labels::{LocKind, LocationLabel, ParamKind, ParamLabel};
use ris_bounds::localization::jacobian;
use ris_bounds::scenario::Scenario;

/// Channel-parameter value of one label on a scenario.
pub fn channel_value(sc: &Scenario<f64>, label: ParamLabel) -> f64 {
    let p = derive_path_params(sc, label.path).unwrap();
    match label.kind {
        ParamKind::ThetaRu => p.theta_ru,
        ParamKind::PhiRu => p.phi_ru,
        ParamKind::ThetaTu => p.theta_tu,
        ParamKind::PhiTu => p.phi_tu,
        ParamKind::ThetaTl => p.ris.as_ref().unwrap().theta_tl,
        ParamKind::PhiTl => p.ris.as_ref().unwrap().phi_tl,
        ParamKind::ThetaRl => p.ris.as_ref().unwrap().theta_rl,
        ParamKind::PhiRl => p.ris.as_ref().unwrap().phi_rl,
        ParamKind::Tau => p.tau,
        _ => unreachable!(),
    }
}

/// Scenario copy with one location coordinate shifted by `h`.
pub fn perturbed(sc: &Scenario<f64>, row: LocationLabel, h: f64) -> Scenario<f64> {
    let mut out = sc.clone();
    match (row.kind, row.ris_index) {
        (LocKind::UeTheta0, _) => out.ue.pose.theta0 += h,
        (LocKind::UePhi0, _) => out.ue.pose.phi0 += h,
        (LocKind::UePx, _) => out.ue.pose.position.x += h,
        (LocKind::UePy, _) => out.ue.pose.position.y += h,
        (LocKind::UePz, _) => out.ue.pose.position.z += h,
        (LocKind::RisTheta0, Some(m)) => out.ris[m - 1].pose.theta0 += h,
        (LocKind::RisPhi0, Some(m)) => out.ris[m - 1].pose.phi0 += h,
        (LocKind::RisPx, Some(m)) => out.ris[m - 1].pose.position.x += h,
        (LocKind::RisPy, Some(m)) => out.ris[m - 1].pose.position.y += h,
        (LocKind::RisPz, Some(m)) => out.ris[m - 1].pose.position.z += h,
        _ => unreachable!(),
    }
    out
}

/// Worst relative error of the analytic transformation entries against
/// central finite differences of the angle/delay chains. Panics above `tol`.
pub fn check_jacobian_fd(sc: &Scenario<f64>, tol: f64) -> f64 {
    let cols: Vec<ParamLabel> = sc
        .channel_labels()
        .into_iter()
        .filter(|l| !l.kind.is_gain())
        .collect();
    let ups = jacobian(sc, &cols).unwrap();
    let mut worst = 0.0f64;
    for (j, col) in ups.cols.iter().enumerate() {
        let scale = (0..ups.rows.len())
            .map(|i| ups.m[(i, j)].abs())
            .fold(0.0, f64::max);
        for (i, row) in ups.rows.iter().enumerate() {
            let h = match row.kind {
                LocKind::UeTheta0 | LocKind::UePhi0 | LocKind::RisTheta0 | LocKind::RisPhi0 => {
                    1e-6
                }
                _ => 1e-4,
            };
            let vp = channel_value(&perturbed(sc, *row, h), *col);
            let vm = channel_value(&perturbed(sc, *row, -h), *col);
            let diff = if col.kind == ParamKind::Tau {
                (vp - vm) / (2.0 * h)
            } else {
                wrap_angle(vp - vm) / (2.0 * h)
            };
            let err = (ups.m[(i, j)] - diff).abs() / scale.max(1e-12);
            worst = worst.max(err);
            assert!(
                err <= tol,
                "transformation entry ({row:?}, {col}): analytic {} vs fd {diff} (err {err})",
                ups.m[(i, j)]
            );
        }
    }
    worst
}
