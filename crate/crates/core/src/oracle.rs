//! Independent ground truth: the noise-free received signal built from the
//! raw channel model, and Fisher information by central finite differences.
//!
//! Nothing here goes through the closed-form factor tables. Steering vectors
//! and channel products are recomputed from their definitions so that an
//! agreement between this module and the `fim` module certifies the
//! transcription of every block formula.

use crate::error::{Error, Result};
use crate::geometry::derive_path_params_realized;
use crate::labels::{LabeledMatrix, LocationLabel, ParamKind, ParamLabel};
use crate::scalar::Real;
use crate::scenario::Scenario;
use crate::waveform::directional_precoder;
use nalgebra::{Complex, DMatrix, DVector, Matrix3xX, Vector3};

type CVec<T> = DVector<Complex<T>>;

/// Flat channel-parameter vector aligned with a label list.
#[derive(Debug, Clone)]
pub struct ParamVec<T> {
    pub labels: Vec<ParamLabel>,
    pub values: Vec<T>,
}

impl<T: Real> ParamVec<T> {
    pub fn get(&self, label: ParamLabel) -> Option<T> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .map(|i| self.values[i])
    }
}

/// Noise-free received signal for one pilot excitation: `values[t][n][rx]`
/// flattened row-major, dimensions `T x N x N_R`.
#[derive(Debug, Clone)]
pub struct MuTensor<T> {
    pub values: Vec<Complex<T>>,
    pub n_symbols: usize,
    pub n_subcarriers: usize,
    pub n_rx: usize,
    /// Scenario fingerprint: the seed the realization was drawn from.
    pub seed: u64,
}

/// Finite-difference configuration. Steps were frozen after a step-halving
/// study; `richardson` switches on the extrapolated (fourth-order) stencil.
#[derive(Debug, Clone)]
pub struct FdOptions<T> {
    pub angle_step: T,
    /// Delay step as a fraction of the sample period.
    pub delay_step_rel: T,
    pub gain_step: T,
    /// Position step in meters (location-space differentiation).
    pub position_step: T,
    pub richardson: bool,
}

impl<T: Real> Default for FdOptions<T> {
    fn default() -> Self {
        FdOptions {
            angle_step: T::of(1e-6),
            delay_step_rel: T::of(1e-3),
            gain_step: T::of(1e-6),
            position_step: T::of(1e-4),
            richardson: false,
        }
    }
}

/// Everything the signal model needs besides the free parameters.
struct OracleModel<T: Real> {
    m1: usize,
    include_los: bool,
    n_symbols: usize,
    n_subcarriers: usize,
    n_rx: usize,
    n_beams: usize,
    seed: u64,
    lambda: T,
    n_ts: T,
    sigma2: T,
    pilot_energy: Vec<T>,
    /// Known pathloss factors per path index (0 = LOS slot, unused if absent).
    rho_inv: Vec<T>,
    ue_delta: Matrix3xX<T>,
    bs_delta: Matrix3xX<T>,
    ris_delta: Vec<Matrix3xX<T>>,
    gammas: Vec<CVec<T>>,
    d_gamma: DMatrix<Complex<T>>,
    precoder: DMatrix<Complex<T>>,
}

/// Steering vector straight from its definition `a = exp(-j Delta^T k)`.
fn raw_steering<T: Real>(delta: &Matrix3xX<T>, theta: T, phi: T, lambda: T) -> CVec<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let k = Vector3::new(cp * st, sp * st, ct) * (T::two_pi() / lambda);
    CVec::from_iterator(
        delta.ncols(),
        delta.column_iter().map(|col| {
            let phase = -col.dot(&k);
            let (s, c) = phase.sin_cos();
            Complex::new(c, s)
        }),
    )
}

impl<T: Real> OracleModel<T> {
    fn new(scenario: &Scenario<T>) -> Result<Self> {
        scenario.validate()?;
        let realization = scenario.realize();
        let cfg = &scenario.waveform;
        let lambda = cfg.wavelength();
        let mut rho_inv = vec![T::one(); scenario.m1() + 1];
        for path in scenario.path_indices() {
            let p = derive_path_params_realized(scenario, path, &realization.betas[path])?;
            rho_inv[path] = p.rho_inv;
        }
        Ok(OracleModel {
            m1: scenario.m1(),
            include_los: scenario.include_los,
            n_symbols: cfg.n_symbols,
            n_subcarriers: cfg.n_subcarriers,
            n_rx: scenario.ue.geometry.count(),
            n_beams: cfg.n_beams(),
            seed: scenario.seed,
            lambda,
            n_ts: T::of(cfg.n_subcarriers as f64) * cfg.sample_period(),
            sigma2: scenario.sigma2(),
            pilot_energy: cfg.pilot_energy.clone(),
            rho_inv,
            ue_delta: scenario.ue.geometry.delta().clone(),
            bs_delta: scenario.bs.geometry.delta().clone(),
            ris_delta: scenario
                .ris
                .iter()
                .map(|r| r.geometry.delta().clone())
                .collect(),
            gammas: realization.gammas.clone(),
            d_gamma: realization.d_gamma.clone(),
            precoder: directional_precoder(&scenario.bs.geometry, &cfg.beam_angles, lambda)?,
        })
    }

    fn value(&self, params: &ParamVec<T>, kind: ParamKind, path: usize) -> T {
        params
            .get(ParamLabel::new(kind, path))
            .expect("parameter present")
    }

    /// Per-path rank-one factors at the given parameter point: amplitude x
    /// RIS gain, receive steering, transmit match against each beam.
    #[allow(clippy::type_complexity)]
    fn path_factors(
        &self,
        params: &ParamVec<T>,
    ) -> Vec<(usize, Complex<T>, CVec<T>, CVec<T>, T)> {
        let mut paths = Vec::new();
        if self.include_los {
            paths.push(0);
        }
        paths.extend(1..=self.m1);
        paths
            .into_iter()
            .map(|path| {
                let beta = Complex::new(
                    self.value(params, ParamKind::BetaRe, path),
                    self.value(params, ParamKind::BetaIm, path),
                );
                let amp = beta * Complex::new(self.rho_inv[path].sqrt(), T::zero());
                let gain = if path == 0 {
                    Complex::new(T::one(), T::zero())
                } else {
                    let delta = &self.ris_delta[path - 1];
                    let a_tl = raw_steering(
                        delta,
                        self.value(params, ParamKind::ThetaTl, path),
                        self.value(params, ParamKind::PhiTl, path),
                        self.lambda,
                    );
                    let a_rl = raw_steering(
                        delta,
                        self.value(params, ParamKind::ThetaRl, path),
                        self.value(params, ParamKind::PhiRl, path),
                        self.lambda,
                    );
                    let gamma = &self.gammas[path - 1];
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for i in 0..a_tl.len() {
                        acc += a_tl[i].conj() * gamma[i] * a_rl[i];
                    }
                    acc
                };
                let a_ru = raw_steering(
                    &self.ue_delta,
                    self.value(params, ParamKind::ThetaRu, path),
                    self.value(params, ParamKind::PhiRu, path),
                    self.lambda,
                );
                let a_tu = raw_steering(
                    &self.bs_delta,
                    self.value(params, ParamKind::ThetaTu, path),
                    self.value(params, ParamKind::PhiTu, path),
                    self.lambda,
                );
                let tau = self.value(params, ParamKind::Tau, path);
                (path, amp * gain, a_ru, a_tu, tau)
            })
            .collect()
    }

    /// Noise-free signal for pilot excitation `beam`, flattened over
    /// (symbol, subcarrier, receive element).
    fn mu(&self, params: &ParamVec<T>, beam: usize) -> MuTensor<T> {
        let factors = self.path_factors(params);
        let f_col = self.precoder.column(beam);
        let mut values =
            vec![Complex::new(T::zero(), T::zero());
                self.n_symbols * self.n_subcarriers * self.n_rx];
        for (path, scale, a_ru, a_tu, tau) in &factors {
            // (a_tu^H f_beam), constant over symbols and subcarriers.
            let tx: Complex<T> = a_tu
                .iter()
                .zip(f_col.iter())
                .map(|(a, f)| a.conj() * f)
                .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z);
            for t in 0..self.n_symbols {
                let seq = if *path == 0 {
                    Complex::new(T::one(), T::zero())
                } else {
                    self.d_gamma[(t, path - 1)]
                };
                let front = *scale * seq * tx;
                for n in 1..=self.n_subcarriers {
                    let phase = -T::two_pi() * T::of(n as f64) * *tau / self.n_ts;
                    let (s, c) = phase.sin_cos();
                    let energy = Complex::new(self.pilot_energy[n - 1].sqrt(), T::zero());
                    let coeff = front * Complex::new(c, s) * energy;
                    let base = (t * self.n_subcarriers + (n - 1)) * self.n_rx;
                    for (r, a) in a_ru.iter().enumerate() {
                        values[base + r] += coeff * a;
                    }
                }
            }
        }
        MuTensor {
            values,
            n_symbols: self.n_symbols,
            n_subcarriers: self.n_subcarriers,
            n_rx: self.n_rx,
            seed: self.seed,
        }
    }

    /// All beams stacked into one observation vector.
    fn mu_stacked(&self, params: &ParamVec<T>) -> CVec<T> {
        let block = self.n_symbols * self.n_subcarriers * self.n_rx;
        let mut out = CVec::from_element(block * self.n_beams, Complex::new(T::zero(), T::zero()));
        for beam in 0..self.n_beams {
            let mu = self.mu(params, beam);
            for (i, v) in mu.values.iter().enumerate() {
                out[beam * block + i] = *v;
            }
        }
        out
    }

    fn step_for(&self, kind: ParamKind, options: &FdOptions<T>) -> T {
        match kind {
            ParamKind::Tau => options.delay_step_rel * self.n_ts / T::of(self.n_subcarriers as f64),
            ParamKind::BetaRe | ParamKind::BetaIm => options.gain_step,
            _ => options.angle_step,
        }
    }
}

/// Baseline channel-parameter vector of a scenario: geometry-derived angles
/// and delays plus the realized gains, in canonical label order.
pub fn baseline_params<T: Real>(scenario: &Scenario<T>) -> Result<ParamVec<T>> {
    let realization = scenario.realize();
    let labels = scenario.channel_labels();
    let mut values = Vec::with_capacity(labels.len());
    let mut cache: Vec<Option<crate::geometry::PathParams<T>>> =
        vec![None; scenario.m1() + 1];
    for path in scenario.path_indices() {
        cache[path] = Some(derive_path_params_realized(
            scenario,
            path,
            &realization.betas[path],
        )?);
    }
    for label in &labels {
        let p = cache[label.path].as_ref().expect("path derived");
        let v = match label.kind {
            ParamKind::ThetaRu => p.theta_ru,
            ParamKind::PhiRu => p.phi_ru,
            ParamKind::ThetaTu => p.theta_tu,
            ParamKind::PhiTu => p.phi_tu,
            ParamKind::ThetaTl => p.ris.as_ref().unwrap().theta_tl,
            ParamKind::PhiTl => p.ris.as_ref().unwrap().phi_tl,
            ParamKind::ThetaRl => p.ris.as_ref().unwrap().theta_rl,
            ParamKind::PhiRl => p.ris.as_ref().unwrap().phi_rl,
            ParamKind::Tau => p.tau,
            ParamKind::BetaRe => p.beta.re,
            ParamKind::BetaIm => p.beta.im,
        };
        values.push(v);
    }
    Ok(ParamVec { labels, values })
}

/// Noise-free received tensor for one pilot excitation (`beam` indexes the
/// precoder column driven with unit energy; summing Fisher contributions
/// over beams realizes the identity pilot covariance).
pub fn compute_mu<T: Real>(
    scenario: &Scenario<T>,
    params: &ParamVec<T>,
    beam: usize,
) -> Result<MuTensor<T>> {
    let model = OracleModel::new(scenario)?;
    if beam >= model.n_beams {
        return Err(Error::Argument(format!(
            "beam {beam} out of range ({} beams)",
            model.n_beams
        )));
    }
    Ok(model.mu(params, beam))
}

fn central_column<T: Real>(
    model: &OracleModel<T>,
    params: &ParamVec<T>,
    index: usize,
    h: T,
) -> CVec<T> {
    let mut plus = params.clone();
    plus.values[index] += h;
    let mut minus = params.clone();
    minus.values[index] -= h;
    let two_h = Complex::new(T::of(2.0) * h, T::zero());
    let mu_p = model.mu_stacked(&plus);
    let mu_m = model.mu_stacked(&minus);
    CVec::from_iterator(
        mu_p.len(),
        mu_p.iter().zip(mu_m.iter()).map(|(a, b)| (a - b) / two_h),
    )
}

fn derivative_column<T: Real>(
    model: &OracleModel<T>,
    params: &ParamVec<T>,
    index: usize,
    h: T,
    richardson: bool,
) -> CVec<T> {
    let d_h = central_column(model, params, index, h);
    if !richardson {
        return d_h;
    }
    let d_half = central_column(model, params, index, h / T::of(2.0));
    let third = Complex::new(T::one() / T::of(3.0), T::zero());
    CVec::from_iterator(
        d_h.len(),
        d_half
            .iter()
            .zip(d_h.iter())
            .map(|(fine, coarse)| (fine * Complex::new(T::of(4.0), T::zero()) - coarse) * third),
    )
}

/// Data FIM by central finite differences at the given parameter point.
pub fn fd_fim_at<T: Real>(
    scenario: &Scenario<T>,
    params: &ParamVec<T>,
    options: &FdOptions<T>,
) -> Result<LabeledMatrix<T, ParamLabel>> {
    let model = OracleModel::new(scenario)?;
    let p = params.labels.len();
    let mut columns = Vec::with_capacity(p);
    for (i, label) in params.labels.iter().enumerate() {
        let h = model.step_for(label.kind, options);
        columns.push(derivative_column(&model, params, i, h, options.richardson));
    }
    let scale = T::of(2.0) / model.sigma2;
    let mut values = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = columns[i].dotc(&columns[j]).re * scale;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    LabeledMatrix::new(params.labels.clone(), values)
}

/// Data FIM by central finite differences at the scenario's geometric
/// baseline.
pub fn fd_fim<T: Real>(
    scenario: &Scenario<T>,
    options: &FdOptions<T>,
) -> Result<LabeledMatrix<T, ParamLabel>> {
    let params = baseline_params(scenario)?;
    fd_fim_at(scenario, &params, options)
}

// ---------------------------------------------------------------------------
// Location-space differentiation
// ---------------------------------------------------------------------------

/// Apply a location perturbation to a scenario copy.
fn perturb_location<T: Real>(scenario: &mut Scenario<T>, label: LocationLabel, h: T) {
    use crate::labels::LocKind::*;
    match (label.kind, label.ris_index) {
        (UeTheta0, _) => scenario.ue.pose.theta0 += h,
        (UePhi0, _) => scenario.ue.pose.phi0 += h,
        (UePx, _) => scenario.ue.pose.position.x += h,
        (UePy, _) => scenario.ue.pose.position.y += h,
        (UePz, _) => scenario.ue.pose.position.z += h,
        (RisTheta0, Some(m)) => scenario.ris[m - 1].pose.theta0 += h,
        (RisPhi0, Some(m)) => scenario.ris[m - 1].pose.phi0 += h,
        (RisPx, Some(m)) => scenario.ris[m - 1].pose.position.x += h,
        (RisPy, Some(m)) => scenario.ris[m - 1].pose.position.y += h,
        (RisPz, Some(m)) => scenario.ris[m - 1].pose.position.z += h,
        _ => unreachable!("RIS label without index"),
    }
}

/// Channel parameters implied by a perturbed geometry, with gains and
/// pathloss pinned to the baseline (the location transformation maps only
/// through angles and delays).
fn params_for_geometry<T: Real>(
    scenario: &Scenario<T>,
    baseline: &ParamVec<T>,
) -> Result<ParamVec<T>> {
    let realization = scenario.realize();
    let mut out = baseline.clone();
    for path in scenario.path_indices() {
        let p = derive_path_params_realized(scenario, path, &realization.betas[path])?;
        for (i, label) in out.labels.iter().enumerate() {
            if label.path != path {
                continue;
            }
            out.values[i] = match label.kind {
                ParamKind::ThetaRu => p.theta_ru,
                ParamKind::PhiRu => p.phi_ru,
                ParamKind::ThetaTu => p.theta_tu,
                ParamKind::PhiTu => p.phi_tu,
                ParamKind::ThetaTl => p.ris.as_ref().unwrap().theta_tl,
                ParamKind::PhiTl => p.ris.as_ref().unwrap().phi_tl,
                ParamKind::ThetaRl => p.ris.as_ref().unwrap().theta_rl,
                ParamKind::PhiRl => p.ris.as_ref().unwrap().phi_rl,
                ParamKind::Tau => p.tau,
                // Gains are independent coordinates, not geometry.
                ParamKind::BetaRe | ParamKind::BetaIm => out.values[i],
            };
        }
    }
    Ok(out)
}

/// Data FIM over location labels (and, appended, the per-path gain
/// components) by differentiating the full chain geometry -> channel
/// parameters -> noise-free signal. The gain columns allow the caller to
/// eliminate the nuisance parameters exactly as the closed-form route does.
pub fn fd_location_fim<T: Real>(
    scenario: &Scenario<T>,
    loc_labels: &[LocationLabel],
    options: &FdOptions<T>,
) -> Result<(DMatrix<T>, Vec<ParamLabel>)> {
    let model = OracleModel::new(scenario)?;
    let baseline = baseline_params(scenario)?;
    // The model of a perturbed scenario differs only through its parameter
    // point; rho and the realization stay pinned, so one model serves all.
    let mu_of = |sc: &Scenario<T>| -> Result<CVec<T>> {
        let p = params_for_geometry(sc, &baseline)?;
        Ok(model.mu_stacked(&p))
    };

    let mut columns: Vec<CVec<T>> = Vec::new();
    for label in loc_labels {
        let h = match label.kind {
            crate::labels::LocKind::UeTheta0
            | crate::labels::LocKind::UePhi0
            | crate::labels::LocKind::RisTheta0
            | crate::labels::LocKind::RisPhi0 => options.angle_step,
            _ => options.position_step,
        };
        let column = |step: T| -> Result<CVec<T>> {
            let mut plus = scenario.clone();
            perturb_location(&mut plus, *label, step);
            let mut minus = scenario.clone();
            perturb_location(&mut minus, *label, -step);
            let two_h = Complex::new(T::of(2.0) * step, T::zero());
            let mu_p = mu_of(&plus)?;
            let mu_m = mu_of(&minus)?;
            Ok(CVec::from_iterator(
                mu_p.len(),
                mu_p.iter().zip(mu_m.iter()).map(|(a, b)| (a - b) / two_h),
            ))
        };
        let d = if options.richardson {
            let coarse = column(h)?;
            let fine = column(h / T::of(2.0))?;
            let third = Complex::new(T::one() / T::of(3.0), T::zero());
            CVec::from_iterator(
                coarse.len(),
                fine.iter()
                    .zip(coarse.iter())
                    .map(|(f, c)| (f * Complex::new(T::of(4.0), T::zero()) - c) * third),
            )
        } else {
            column(h)?
        };
        columns.push(d);
    }

    // Gain columns in canonical label order.
    let mut gain_labels = Vec::new();
    for (i, label) in baseline.labels.iter().enumerate() {
        if label.kind.is_gain() {
            gain_labels.push(*label);
            let h = model.step_for(label.kind, options);
            columns.push(derivative_column(
                &model,
                &baseline,
                i,
                h,
                options.richardson,
            ));
        }
    }

    let p = columns.len();
    let scale = T::of(2.0) / model.sigma2;
    let mut values = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = columns[i].dotc(&columns[j]).re * scale;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok((values, gain_labels))
}

/// Central finite differences of the geometric channel parameters with
/// respect to the location parameters: the independent check of the
/// closed-form transformation matrix. Angle differences are wrapped across
/// the +-pi branch cut.
pub fn fd_transformation<T: Real>(
    scenario: &Scenario<T>,
    rows: &[LocationLabel],
    cols: &[ParamLabel],
    options: &FdOptions<T>,
) -> Result<DMatrix<T>> {
    use crate::labels::LocKind;
    let value = |sc: &Scenario<T>, label: &ParamLabel| -> Result<T> {
        let realization = sc.realize();
        let p = derive_path_params_realized(sc, label.path, &realization.betas[label.path])?;
        Ok(match label.kind {
            ParamKind::ThetaRu => p.theta_ru,
            ParamKind::PhiRu => p.phi_ru,
            ParamKind::ThetaTu => p.theta_tu,
            ParamKind::PhiTu => p.phi_tu,
            ParamKind::ThetaTl => p.ris.as_ref().unwrap().theta_tl,
            ParamKind::PhiTl => p.ris.as_ref().unwrap().phi_tl,
            ParamKind::ThetaRl => p.ris.as_ref().unwrap().theta_rl,
            ParamKind::PhiRl => p.ris.as_ref().unwrap().phi_rl,
            ParamKind::Tau => p.tau,
            _ => {
                return Err(Error::Label(
                    "gain labels have no location gradient".into(),
                ))
            }
        })
    };
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (i, row) in rows.iter().enumerate() {
        let h = match row.kind {
            LocKind::UeTheta0 | LocKind::UePhi0 | LocKind::RisTheta0 | LocKind::RisPhi0 => {
                options.angle_step
            }
            _ => options.position_step,
        };
        let mut plus = scenario.clone();
        perturb_location(&mut plus, *row, h);
        let mut minus = scenario.clone();
        perturb_location(&mut minus, *row, -h);
        for (j, col) in cols.iter().enumerate() {
            let vp = value(&plus, col)?;
            let vm = value(&minus, col)?;
            let diff = if col.kind == ParamKind::Tau {
                vp - vm
            } else {
                crate::geometry::wrap_angle(vp - vm)
            };
            out[(i, j)] = diff / (T::of(2.0) * h);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::desk_scenario;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gains_give_zero_signal() {
        let sc = desk_scenario(1);
        let mut params = baseline_params(&sc).unwrap();
        for (i, l) in params.labels.iter().enumerate() {
            if l.kind.is_gain() {
                params.values[i] = 0.0;
            }
        }
        let mu = compute_mu(&sc, &params, 0).unwrap();
        assert!(mu.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn signal_is_linear_in_gains() {
        let sc = desk_scenario(1);
        let params = baseline_params(&sc).unwrap();
        let mut doubled = params.clone();
        for (i, l) in doubled.labels.iter().enumerate() {
            if l.kind.is_gain() {
                doubled.values[i] *= 2.0;
            }
        }
        let a = compute_mu(&sc, &params, 1).unwrap();
        let b = compute_mu(&sc, &doubled, 1).unwrap();
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert_relative_eq!((x * 2.0).re, y.re, epsilon = 1e-18, max_relative = 1e-12);
            assert_relative_eq!((x * 2.0).im, y.im, epsilon = 1e-18, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_path_single_element_matches_hand_formula() {
        // One RIS path, single-element arrays, unit gamma: mu_t[n] reduces to
        // amp * gamma_t * exp(-j 2 pi n tau / (N T_s)) with unit steering.
        let mut sc = desk_scenario(1);
        sc.include_los = false;
        sc.bs.geometry = crate::arrays::ArrayGeometry::ura(1, 1, 0.005).unwrap();
        sc.ue.geometry = crate::arrays::ArrayGeometry::ura(1, 1, 0.005).unwrap();
        sc.ris[0].geometry = crate::arrays::ArrayGeometry::ura(1, 1, 0.005).unwrap();
        sc.ris[0].gamma = crate::scenario::GammaSpec::Ones;
        sc.waveform.beam_angles = vec![(0.3, 0.2)];
        let params = baseline_params(&sc).unwrap();
        let mu = compute_mu(&sc, &params, 0).unwrap();
        let realization = sc.realize();
        let p = crate::geometry::derive_path_params(&sc, 1).unwrap();
        let amp = p.amplitude();
        let nts = 16.0 * sc.waveform.sample_period();
        for t in 0..mu.n_symbols {
            for n in 1..=mu.n_subcarriers {
                let phase = -2.0 * std::f64::consts::PI * n as f64 * p.tau / nts;
                let expect = amp
                    * realization.d_gamma[(t, 0)]
                    * Complex::new(phase.cos(), phase.sin());
                let got = mu.values[(t * mu.n_subcarriers + n - 1) * mu.n_rx];
                assert_relative_eq!(got.re, expect.re, max_relative = 1e-12);
                assert_relative_eq!(got.im, expect.im, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn gain_derivative_is_exact_at_any_step() {
        // mu is linear in beta_re, so the finite difference equals the
        // analytic derivative regardless of the step size.
        let mut sc = desk_scenario(1);
        sc.include_los = false;
        let coarse = fd_fim(
            &sc,
            &FdOptions {
                gain_step: 1e-1,
                ..FdOptions::default()
            },
        )
        .unwrap();
        let fine = fd_fim(
            &sc,
            &FdOptions {
                gain_step: 1e-4,
                ..FdOptions::default()
            },
        )
        .unwrap();
        let l = ParamLabel::new(ParamKind::BetaRe, 1);
        assert_relative_eq!(
            coarse.get(l, l).unwrap(),
            fine.get(l, l).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn fd_fim_is_symmetric() {
        let mut sc = desk_scenario(1);
        sc.include_los = false;
        let j = fd_fim(&sc, &FdOptions::default()).unwrap();
        assert_eq!(j.asymmetry(), 0.0);
    }
}
