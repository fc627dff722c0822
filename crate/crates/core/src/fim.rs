//! Closed-form Fisher information blocks and the full labeled Bayesian FIM.
//!
//! Every sub-block of the channel-parameter FIM has the same five-factor
//! shape: a receive factor, a RIS gain outer product, the sequence
//! correlation, a transmit factor and a delay signal factor, combined
//! elementwise and scaled by `2/sigma^2`. Which matrix fills each slot, and
//! the sign, is driven by a per-kind dispatch table below; the
//! finite-difference oracle exercises every pair of kinds against it.

use crate::arrays::steering;
use crate::error::{Error, Result};
use crate::geometry::{derive_path_params_realized, PathParams};
use crate::labels::{LabeledMatrix, ParamKind, ParamLabel};
use crate::scalar::Real;
use crate::scenario::Scenario;
use crate::waveform::{directional_precoder, signal_factor_pairs};
use nalgebra::{Complex, DMatrix, DVector};

type CMat<T> = DMatrix<Complex<T>>;
type CVec<T> = DVector<Complex<T>>;

/// Per-path factors for the LOS path.
#[derive(Debug, Clone)]
pub struct LosTerms<T: Real> {
    /// Receive-side vectors: steering, elevation- and azimuth-weighted.
    pub a_ru: CVec<T>,
    pub k_ru: CVec<T>,
    pub p_ru: CVec<T>,
    /// Transmit-side vectors.
    pub a_tu: CVec<T>,
    pub k_tu: CVec<T>,
    pub p_tu: CVec<T>,
    /// Effective amplitude beta_0 / sqrt(rho_0).
    pub b0: Complex<T>,
    /// Gain-derivative weight 1 / sqrt(rho_0).
    pub s0: T,
    /// Signal factors coupling the LOS row to the RIS columns (1 x M1).
    pub r_l1: [CMat<T>; 3],
    /// LOS-only signal factors (scalars).
    pub r_l2: [Complex<T>; 3],
}

/// Precomputed factor matrices for one scenario evaluation.
#[derive(Debug, Clone)]
pub struct FimContext<T: Real> {
    pub m1: usize,
    pub include_los: bool,
    pub sigma2: T,
    pub t_symbols: usize,
    /// Receive stacks, one column per RIS path (N_R x M1).
    pub a_ru: CMat<T>,
    pub k_ru: CMat<T>,
    pub p_ru: CMat<T>,
    /// Transmit stacks (N_T x M1).
    pub a_tu: CMat<T>,
    pub k_tu: CMat<T>,
    pub p_tu: CMat<T>,
    /// RIS gain vectors (length M1), conjugated as printed in their
    /// definition (trailing Hermitian transpose).
    pub k_l: CVec<T>,
    pub k_tl: CVec<T>,
    pub p_tl: CVec<T>,
    pub k_rl: CVec<T>,
    pub p_rl: CVec<T>,
    /// Effective amplitudes beta_m / sqrt(rho_m) (length M1).
    pub b: CVec<T>,
    /// Gain-derivative weights 1 / sqrt(rho_m) (length M1).
    pub s: CVec<T>,
    /// Sequence Gram D^H D (M1 x M1) and LOS coupling row 1^H D (1 x M1).
    pub d_gram: CMat<T>,
    pub d_los: CMat<T>,
    /// Precoder product F F^H (N_T x N_T).
    pub ffh: CMat<T>,
    /// RIS signal factors R_0, R_1, R_2 (M1 x M1).
    pub r: [CMat<T>; 3],
    pub los: Option<LosTerms<T>>,
    /// Geometric parameters per path (index 0 = LOS when present).
    pub params: Vec<Option<PathParams<T>>>,
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn weighted<T: Real>(weights: &DVector<T>, v: &CVec<T>) -> CVec<T> {
    CVec::from_iterator(
        v.len(),
        v.iter()
            .zip(weights.iter())
            .map(|(z, w)| z * Complex::new(*w, T::zero())),
    )
}

/// `x^H (gamma .* y)` with a diagonal gamma given as a vector.
fn gamma_inner<T: Real>(x: &CVec<T>, gamma: &CVec<T>, y: &CVec<T>) -> Complex<T> {
    let mut acc = czero();
    for i in 0..x.len() {
        acc += x[i].conj() * gamma[i] * y[i];
    }
    acc
}

/// Precompute every factor the closed-form blocks need.
pub fn build_context<T: Real>(scenario: &Scenario<T>) -> Result<FimContext<T>> {
    scenario.validate()?;
    let realization = scenario.realize();
    let cfg = &scenario.waveform;
    let lambda = cfg.wavelength();
    let m1 = scenario.m1();
    let n_r = scenario.ue.geometry.count();
    let n_t = scenario.bs.geometry.count();

    let mut a_ru = CMat::from_element(n_r, m1, czero());
    let mut k_ru = a_ru.clone();
    let mut p_ru = a_ru.clone();
    let mut a_tu = CMat::from_element(n_t, m1, czero());
    let mut k_tu = a_tu.clone();
    let mut p_tu = a_tu.clone();
    let mut k_l = CVec::from_element(m1, czero());
    let mut k_tl = k_l.clone();
    let mut p_tl = k_l.clone();
    let mut k_rl = k_l.clone();
    let mut p_rl = k_l.clone();
    let mut b = k_l.clone();
    let mut s = k_l.clone();
    let mut taus = Vec::with_capacity(m1);
    let mut params: Vec<Option<PathParams<T>>> = vec![None; m1 + 1];

    for m in 1..=m1 {
        let p = derive_path_params_realized(scenario, m, &realization.betas[m])?;
        let ru = steering(&scenario.ue.geometry, p.theta_ru, p.phi_ru, lambda)?;
        let tu = steering(&scenario.bs.geometry, p.theta_tu, p.phi_tu, lambda)?;
        a_ru.set_column(m - 1, &ru.a);
        k_ru.set_column(m - 1, &weighted(&ru.k, &ru.a));
        p_ru.set_column(m - 1, &weighted(&ru.p, &ru.a));
        a_tu.set_column(m - 1, &tu.a);
        k_tu.set_column(m - 1, &weighted(&tu.k, &tu.a));
        p_tu.set_column(m - 1, &weighted(&tu.p, &tu.a));

        let angles = p.ris.as_ref().expect("RIS path has RIS angles");
        let geom = &scenario.ris[m - 1].geometry;
        let rl = steering(geom, angles.theta_rl, angles.phi_rl, lambda)?;
        let tl = steering(geom, angles.theta_tl, angles.phi_tl, lambda)?;
        let gamma = &realization.gammas[m - 1];
        // Entry m of each gain vector carries the trailing Hermitian
        // transpose of its definition, i.e. the conjugate of the printed
        // inner product.
        k_l[m - 1] = gamma_inner(&tl.a, gamma, &rl.a).conj();
        k_tl[m - 1] = gamma_inner(&weighted(&tl.k, &tl.a), gamma, &rl.a).conj();
        p_tl[m - 1] = gamma_inner(&weighted(&tl.p, &tl.a), gamma, &rl.a).conj();
        k_rl[m - 1] = gamma_inner(&tl.a, gamma, &weighted(&rl.k, &rl.a)).conj();
        p_rl[m - 1] = gamma_inner(&tl.a, gamma, &weighted(&rl.p, &rl.a)).conj();

        let amp = p.rho_inv.sqrt();
        b[m - 1] = p.beta * Complex::new(amp, T::zero());
        s[m - 1] = Complex::new(amp, T::zero());
        taus.push(p.tau);
        params[m] = Some(p);
    }

    let d_gram = realization.d_gamma.adjoint() * &realization.d_gamma;
    let d_los = CMat::from_fn(1, m1, |_, v| {
        (0..cfg.n_symbols).fold(czero(), |acc, t| acc + realization.d_gamma[(t, v)])
    });

    let f = directional_precoder(&scenario.bs.geometry, &cfg.beam_angles, lambda)?;
    let ffh = &f * f.adjoint();

    let r = [
        signal_factor_pairs(0, &taus, &taus, cfg)?,
        signal_factor_pairs(1, &taus, &taus, cfg)?,
        signal_factor_pairs(2, &taus, &taus, cfg)?,
    ];

    let los = if scenario.include_los {
        let p = derive_path_params_realized(scenario, 0, &realization.betas[0])?;
        let ru = steering(&scenario.ue.geometry, p.theta_ru, p.phi_ru, lambda)?;
        let tu = steering(&scenario.bs.geometry, p.theta_tu, p.phi_tu, lambda)?;
        let amp = p.rho_inv.sqrt();
        let tau0 = [p.tau];
        let terms = LosTerms {
            a_ru: ru.a.clone(),
            k_ru: weighted(&ru.k, &ru.a),
            p_ru: weighted(&ru.p, &ru.a),
            a_tu: tu.a.clone(),
            k_tu: weighted(&tu.k, &tu.a),
            p_tu: weighted(&tu.p, &tu.a),
            b0: p.beta * Complex::new(amp, T::zero()),
            s0: amp,
            r_l1: [
                signal_factor_pairs(0, &tau0, &taus, cfg)?,
                signal_factor_pairs(1, &tau0, &taus, cfg)?,
                signal_factor_pairs(2, &tau0, &taus, cfg)?,
            ],
            r_l2: [
                signal_factor_pairs(0, &tau0, &tau0, cfg)?[(0, 0)],
                signal_factor_pairs(1, &tau0, &tau0, cfg)?[(0, 0)],
                signal_factor_pairs(2, &tau0, &tau0, cfg)?[(0, 0)],
            ],
        };
        params[0] = Some(p);
        Some(terms)
    } else {
        None
    };

    Ok(FimContext {
        m1,
        include_los: scenario.include_los,
        sigma2: scenario.sigma2(),
        t_symbols: cfg.n_symbols,
        a_ru,
        k_ru,
        p_ru,
        a_tu,
        k_tu,
        p_tu,
        k_l,
        k_tl,
        p_tl,
        k_rl,
        p_rl,
        b,
        s,
        d_gram,
        d_los,
        ffh,
        r,
        los,
        params,
    })
}

// ---------------------------------------------------------------------------
// Dispatch table: factor selection and score phase per parameter kind
// ---------------------------------------------------------------------------

impl<T: Real> FimContext<T> {
    /// Receive-factor stack for a kind.
    fn rx_stack(&self, kind: ParamKind) -> &CMat<T> {
        match kind {
            ParamKind::ThetaRu => &self.k_ru,
            ParamKind::PhiRu => &self.p_ru,
            _ => &self.a_ru,
        }
    }

    /// Transmit-factor stack for a kind.
    fn tx_stack(&self, kind: ParamKind) -> &CMat<T> {
        match kind {
            ParamKind::ThetaTu => &self.k_tu,
            ParamKind::PhiTu => &self.p_tu,
            _ => &self.a_tu,
        }
    }

    /// RIS gain vector for a kind.
    fn gain_vec(&self, kind: ParamKind) -> &CVec<T> {
        match kind {
            ParamKind::ThetaTl => &self.k_tl,
            ParamKind::PhiTl => &self.p_tl,
            ParamKind::ThetaRl => &self.k_rl,
            ParamKind::PhiRl => &self.p_rl,
            _ => &self.k_l,
        }
    }

    /// Amplitude weight vector: effective gains for geometric kinds,
    /// pathloss-only for the gain components themselves.
    fn weight_vec(&self, kind: ParamKind) -> &CVec<T> {
        if kind.is_gain() {
            &self.s
        } else {
            &self.b
        }
    }

    fn rx_los(&self, kind: ParamKind) -> &CVec<T> {
        let los = self.los.as_ref().expect("LOS terms present");
        match kind {
            ParamKind::ThetaRu => &los.k_ru,
            ParamKind::PhiRu => &los.p_ru,
            _ => &los.a_ru,
        }
    }

    fn tx_los(&self, kind: ParamKind) -> &CVec<T> {
        let los = self.los.as_ref().expect("LOS terms present");
        match kind {
            ParamKind::ThetaTu => &los.k_tu,
            ParamKind::PhiTu => &los.p_tu,
            _ => &los.a_tu,
        }
    }

    fn weight_los(&self, kind: ParamKind) -> Complex<T> {
        let los = self.los.as_ref().expect("LOS terms present");
        if kind.is_gain() {
            Complex::new(los.s0, T::zero())
        } else {
            los.b0
        }
    }

    fn two_over_sigma2(&self) -> T {
        T::of(2.0) / self.sigma2
    }
}

/// Complex unit carried by the score of each kind: the derivative of the
/// noise-free signal with respect to the parameter is `unit * (real-weighted
/// factor)`; block signs are products of these units.
fn score_unit<T: Real>(kind: ParamKind) -> Complex<T> {
    let j = Complex::new(T::zero(), T::one());
    match kind {
        ParamKind::ThetaRu | ParamKind::PhiRu => -j,
        ParamKind::ThetaTl | ParamKind::PhiTl => j,
        ParamKind::ThetaRl | ParamKind::PhiRl => -j,
        ParamKind::ThetaTu | ParamKind::PhiTu => j,
        ParamKind::Tau => -j,
        ParamKind::BetaRe => Complex::new(T::one(), T::zero()),
        ParamKind::BetaIm => j,
    }
}

fn delay_order(row: ParamKind, col: ParamKind) -> usize {
    usize::from(row == ParamKind::Tau) + usize::from(col == ParamKind::Tau)
}

// ---------------------------------------------------------------------------
// Block evaluation
// ---------------------------------------------------------------------------

/// RIS-path block: the M1 x M1 FIM sub-matrix for a (row kind, column kind)
/// pair.
pub fn fim_block<T: Real>(ctx: &FimContext<T>, row: ParamKind, col: ParamKind) -> DMatrix<T> {
    let m1 = ctx.m1;
    let rx = ctx.rx_stack(row).adjoint() * ctx.rx_stack(col);
    let tx = (ctx.tx_stack(col).adjoint() * &ctx.ffh * ctx.tx_stack(row)).transpose();
    let gain = ctx.gain_vec(row) * ctx.gain_vec(col).adjoint();
    let w = ctx.weight_vec(row).conjugate() * ctx.weight_vec(col).transpose();
    let sig = &ctx.r[delay_order(row, col)];
    let unit = score_unit::<T>(row).conj() * score_unit::<T>(col);
    let scale = Complex::new(ctx.two_over_sigma2(), T::zero()) * unit;
    let mut out = DMatrix::zeros(m1, m1);
    for u in 0..m1 {
        for v in 0..m1 {
            let z = rx[(u, v)]
                * w[(u, v)]
                * gain[(u, v)]
                * ctx.d_gram[(u, v)]
                * tx[(u, v)]
                * sig[(u, v)];
            out[(u, v)] = (scale * z).re;
        }
    }
    out
}

/// LOS-row cross block: 1 x M1 coupling between one LOS kind and one RIS
/// kind. Zero whenever the sequence columns sum to zero.
pub fn fim_block_los_cross<T: Real>(
    ctx: &FimContext<T>,
    los_kind: ParamKind,
    ris_kind: ParamKind,
) -> DMatrix<T> {
    let m1 = ctx.m1;
    let los = ctx.los.as_ref().expect("scenario has no LOS path");
    let rx = ctx.rx_los(los_kind).adjoint() * ctx.rx_stack(ris_kind);
    let tx = (ctx.tx_stack(ris_kind).adjoint() * &ctx.ffh * ctx.tx_los(los_kind)).transpose();
    let gain = ctx.gain_vec(ris_kind).conjugate();
    let w_row = ctx.weight_los(los_kind).conj();
    let sig = &los.r_l1[delay_order(los_kind, ris_kind)];
    let unit = score_unit::<T>(los_kind).conj() * score_unit::<T>(ris_kind);
    let scale = Complex::new(ctx.two_over_sigma2(), T::zero()) * unit;
    let w_col = ctx.weight_vec(ris_kind);
    let mut out = DMatrix::zeros(1, m1);
    for v in 0..m1 {
        let z = rx[(0, v)] * w_row * w_col[v] * gain[v] * ctx.d_los[(0, v)] * tx[(0, v)]
            * sig[(0, v)];
        out[(0, v)] = (scale * z).re;
    }
    out
}

/// LOS-only scalar block. The per-symbol terms are constant, so the symbol
/// count multiplies instead of a sequence Gram.
pub fn fim_block_los<T: Real>(ctx: &FimContext<T>, k1: ParamKind, k2: ParamKind) -> T {
    let los = ctx.los.as_ref().expect("scenario has no LOS path");
    let rx = ctx.rx_los(k1).dotc(ctx.rx_los(k2));
    let tx = ctx.tx_los(k2).dotc(&(&ctx.ffh * ctx.tx_los(k1)));
    let w = ctx.weight_los(k1).conj() * ctx.weight_los(k2);
    let sig = los.r_l2[delay_order(k1, k2)];
    let unit = score_unit::<T>(k1).conj() * score_unit::<T>(k2);
    let t = Complex::new(T::of(ctx.t_symbols as f64), T::zero());
    (Complex::new(ctx.two_over_sigma2(), T::zero()) * unit * t * rx * w * tx * sig).re
}

/// Right-hand side of the unitary-correlation gain-block identity: the
/// elementwise product `(2/sigma^2) (A^H A) .* (k_l k_l^H) .* (D^H D) .*
/// (A^H F F^H A)^T .* R_0` with the pathloss weights in place.
pub fn remark1_rhs<T: Real>(ctx: &FimContext<T>) -> CMat<T> {
    let m1 = ctx.m1;
    let rx = ctx.a_ru.adjoint() * &ctx.a_ru;
    let tx = (ctx.a_tu.adjoint() * &ctx.ffh * &ctx.a_tu).transpose();
    let gain = &ctx.k_l * ctx.k_l.adjoint();
    let w = ctx.s.conjugate() * ctx.s.transpose();
    let scale = Complex::new(ctx.two_over_sigma2(), T::zero());
    let mut out = CMat::from_element(m1, m1, czero());
    for u in 0..m1 {
        for v in 0..m1 {
            out[(u, v)] = scale
                * rx[(u, v)]
                * w[(u, v)]
                * gain[(u, v)]
                * ctx.d_gram[(u, v)]
                * tx[(u, v)]
                * ctx.r[0][(u, v)];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Priors and assembly
// ---------------------------------------------------------------------------

/// Prior FIM over an arbitrary label list: zero except `2/sigma^2_beta` on
/// the gain-component diagonal. `None` (no prior) and an infinite variance
/// both give the zero matrix.
pub fn prior_fim_for_labels<T: Real>(
    sigma2_beta: Option<T>,
    labels: &[ParamLabel],
) -> Result<LabeledMatrix<T, ParamLabel>> {
    let n = labels.len();
    let mut m = DMatrix::zeros(n, n);
    if let Some(var) = sigma2_beta {
        if var <= T::zero() {
            return Err(Error::Argument(
                "gain prior variance must be positive".into(),
            ));
        }
        if var.is_finite_val() {
            let d = T::of(2.0) / var;
            for (i, l) in labels.iter().enumerate() {
                if l.kind.is_gain() {
                    m[(i, i)] = d;
                }
            }
        }
    }
    LabeledMatrix::new(labels.to_vec(), m)
}

/// Prior FIM over the RIS-path parameter vector (11 M1 labels).
pub fn prior_fim<T: Real>(
    sigma2_beta: Option<T>,
    m1: usize,
) -> Result<LabeledMatrix<T, ParamLabel>> {
    let mut labels = Vec::new();
    for kind in ParamKind::RIS_KINDS {
        for m in 1..=m1 {
            labels.push(ParamLabel::new(kind, m));
        }
    }
    prior_fim_for_labels(sigma2_beta, &labels)
}

fn place_block<T: Real>(
    out: &mut DMatrix<T>,
    rows: &[usize],
    cols: &[usize],
    block: &DMatrix<T>,
) {
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            out[(r, c)] = block[(i, j)];
            out[(c, r)] = block[(i, j)];
        }
    }
}

/// Data FIM over the scenario's channel labels (no priors), symmetric by
/// construction of the block formulas.
pub fn assemble_data_fim<T: Real>(scenario: &Scenario<T>) -> Result<LabeledMatrix<T, ParamLabel>> {
    let ctx = build_context(scenario)?;
    assemble_data_fim_from_context(scenario, &ctx)
}

pub fn assemble_data_fim_from_context<T: Real>(
    scenario: &Scenario<T>,
    ctx: &FimContext<T>,
) -> Result<LabeledMatrix<T, ParamLabel>> {
    let labels = scenario.channel_labels();
    let n = labels.len();
    let m1 = ctx.m1;
    let mut values = DMatrix::zeros(n, n);

    let ris_indices = |kind: ParamKind| -> Vec<usize> {
        (1..=m1)
            .map(|m| {
                labels
                    .iter()
                    .position(|l| *l == ParamLabel::new(kind, m))
                    .expect("RIS label present")
            })
            .collect()
    };

    if m1 > 0 {
        for (i, &row_kind) in ParamKind::RIS_KINDS.iter().enumerate() {
            let rows = ris_indices(row_kind);
            for &col_kind in ParamKind::RIS_KINDS.iter().skip(i) {
                let cols = ris_indices(col_kind);
                let block = fim_block(ctx, row_kind, col_kind);
                place_block(&mut values, &rows, &cols, &block);
            }
        }
    }

    if ctx.include_los {
        let los_index = |kind: ParamKind| -> usize {
            labels
                .iter()
                .position(|l| *l == ParamLabel::new(kind, 0))
                .expect("LOS label present")
        };
        for (i, &k1) in ParamKind::LOS_KINDS.iter().enumerate() {
            let r = los_index(k1);
            for &k2 in ParamKind::LOS_KINDS.iter().skip(i) {
                let c = los_index(k2);
                let v = fim_block_los(ctx, k1, k2);
                values[(r, c)] = v;
                values[(c, r)] = v;
            }
            if m1 > 0 {
                for &ris_kind in ParamKind::RIS_KINDS.iter() {
                    let cols = ris_indices(ris_kind);
                    let block = fim_block_los_cross(ctx, k1, ris_kind);
                    place_block(&mut values, &[r], &cols, &block);
                }
            }
        }
    }

    LabeledMatrix::new(labels, values)
}

/// Bayesian FIM: data FIM plus the gain prior, symmetrized.
pub fn assemble_bayesian_fim<T: Real>(
    scenario: &Scenario<T>,
) -> Result<LabeledMatrix<T, ParamLabel>> {
    let data = assemble_data_fim(scenario)?;
    let prior = prior_fim_for_labels(scenario.beta_prior, data.labels())?;
    Ok(data.add(&prior)?.symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::desk_scenario;
    use crate::scenario::GammaSpec;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    #[test]
    fn context_shapes() {
        let sc = desk_scenario(2);
        let ctx = build_context(&sc).unwrap();
        assert_eq!(ctx.a_ru.shape(), (4, 2));
        assert_eq!(ctx.a_tu.shape(), (4, 2));
        assert_eq!(ctx.d_gram.shape(), (2, 2));
        assert_eq!(ctx.k_l.len(), 2);
        assert_eq!(ctx.r[0].shape(), (2, 2));
        assert_eq!(ctx.ffh.shape(), (4, 4));
        assert!(ctx.los.is_some());
    }

    #[test]
    fn single_element_ris_gain_scalar() {
        let mut sc = desk_scenario(1);
        sc.ris[0].geometry = crate::arrays::ArrayGeometry::ura(1, 1, 0.005).unwrap();
        sc.ris[0].gamma = GammaSpec::Ones;
        let ctx = build_context(&sc).unwrap();
        // Single element at the centroid: both steering entries are 1, so the
        // printed inner product is 1 and so is its conjugate.
        assert_relative_eq!(ctx.k_l[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(ctx.k_l[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_gamma_kills_every_block() {
        let mut sc = desk_scenario(2);
        for r in &mut sc.ris {
            r.gamma = GammaSpec::Zero;
        }
        let ctx = build_context(&sc).unwrap();
        for v in [&ctx.k_l, &ctx.k_tl, &ctx.p_tl, &ctx.k_rl, &ctx.p_rl] {
            assert_relative_eq!(v.norm(), 0.0);
        }
        for row in ParamKind::RIS_KINDS {
            for col in ParamKind::RIS_KINDS {
                assert_relative_eq!(fim_block(&ctx, row, col).norm(), 0.0);
            }
        }
        assert_relative_eq!(
            fim_block_los_cross(&ctx, ParamKind::Tau, ParamKind::Tau).norm(),
            0.0
        );
    }

    #[test]
    fn gain_blocks_match_each_other() {
        let sc = desk_scenario(2);
        let ctx = build_context(&sc).unwrap();
        let rr = fim_block(&ctx, ParamKind::BetaRe, ParamKind::BetaRe);
        let ii = fim_block(&ctx, ParamKind::BetaIm, ParamKind::BetaIm);
        assert_relative_eq!((rr.clone() - &ii).norm(), 0.0, epsilon = 1e-10 * rr.norm());
        // Unitary Hadamard correlation makes the cross block vanish.
        let ri = fim_block(&ctx, ParamKind::BetaRe, ParamKind::BetaIm);
        assert!(ri.norm() <= 1e-12 * rr.norm());
        // And the identity block matches the printed right-hand side.
        let rhs = remark1_rhs(&ctx);
        for u in 0..2 {
            for v in 0..2 {
                assert_relative_eq!(ii[(u, v)], rhs[(u, v)].re, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn hadamard_decouples_los_cross_blocks() {
        let sc = desk_scenario(2);
        let ctx = build_context(&sc).unwrap();
        for k1 in ParamKind::LOS_KINDS {
            for k2 in ParamKind::RIS_KINDS {
                assert_eq!(fim_block_los_cross(&ctx, k1, k2).norm(), 0.0);
            }
        }
    }

    #[test]
    fn assembled_fim_shape_and_symmetry() {
        let mut sc = desk_scenario(1);
        sc.include_los = false;
        let j = assemble_data_fim(&sc).unwrap();
        assert_eq!(j.dim(), 11);
        assert_eq!(j.labels()[0], ParamLabel::new(ParamKind::ThetaRu, 1));
        assert!(j.asymmetry() <= 1e-12);

        let sc = desk_scenario(2);
        let j = assemble_bayesian_fim(&sc).unwrap();
        assert_eq!(j.dim(), 29);
        assert!(j.asymmetry() <= 1e-13);
        let eig = SymmetricEigen::new(j.values().clone());
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        for ev in eig.eigenvalues.iter() {
            assert!(*ev >= -1e-8 * max, "eigenvalue {ev} below PSD tolerance");
        }
    }

    #[test]
    fn prior_fim_values() {
        let p = prior_fim(Some(2.0f64), 3).unwrap();
        let mut count = 0;
        for (i, l) in p.labels().iter().enumerate() {
            if l.kind.is_gain() {
                assert_relative_eq!(p.values()[(i, i)], 1.0);
                count += 1;
            } else {
                assert_relative_eq!(p.values().row(i).norm(), 0.0);
            }
        }
        assert_eq!(count, 6);
        assert_relative_eq!(prior_fim::<f64>(None, 2).unwrap().values().norm(), 0.0);
        assert_relative_eq!(
            prior_fim(Some(f64::INFINITY), 2).unwrap().values().norm(),
            0.0
        );
        assert!(prior_fim(Some(-1.0), 2).is_err());

        // Bayesian gain block is the data block plus 2/sigma^2_beta.
        let sc = desk_scenario(1);
        let data = assemble_data_fim(&sc).unwrap();
        let bayes = assemble_bayesian_fim(&sc).unwrap();
        let l = ParamLabel::new(ParamKind::BetaRe, 1);
        assert_relative_eq!(
            bayes.get(l, l).unwrap(),
            data.get(l, l).unwrap() + 2.0,
            max_relative = 1e-12
        );
    }
}
