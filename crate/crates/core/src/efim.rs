//! Equivalent-FIM machinery: label-addressed Schur complements, the
//! structured information-loss identities that hold under unitary sequence
//! correlation, and per-parameter estimability.

use crate::error::{Error, Result};
use crate::fim::{assemble_bayesian_fim, build_context, fim_block};
use crate::labels::{LabeledMatrix, ParamKind, ParamLabel};
use crate::linalg::{self, SolveKind};
use crate::scalar::Real;
use crate::scenario::Scenario;
use crate::waveform::is_unitary_gram;
use nalgebra::{Complex, DMatrix};
use std::fmt;

/// Relative eigenvalue threshold for pseudo-inverse fallbacks.
pub fn pinv_tol<T: Real>() -> T {
    T::of(1e-12)
}

/// EFIM of a kept label set plus the subtracted information loss.
#[derive(Debug, Clone)]
pub struct EfimResult<T, L> {
    pub efim: LabeledMatrix<T, L>,
    pub info_loss: LabeledMatrix<T, L>,
    /// Condition estimate of the eliminated block.
    pub nuisance_condition: T,
    /// True when the eliminated block was singular and a pseudo-inverse was
    /// used.
    pub degraded: bool,
}

/// Schur-complement reduction of `j` onto the `keep` labels.
pub fn efim<T: Real, L: Copy + Eq + fmt::Display>(
    j: &LabeledMatrix<T, L>,
    keep: &[L],
) -> Result<EfimResult<T, L>> {
    if keep.is_empty() {
        return Err(Error::Argument("EFIM keep set is empty".into()));
    }
    let drop = j.labels_not_in(keep);
    if drop.is_empty() {
        return Err(Error::Argument(
            "EFIM keep set covers every label; nothing to eliminate".into(),
        ));
    }
    let a = j.block(keep, keep)?;
    let b = j.block(keep, &drop)?;
    let c = j.block(&drop, &drop)?;
    let out = linalg::schur_complement(&a, &b, &c, pinv_tol::<T>());
    Ok(EfimResult {
        efim: LabeledMatrix::new(keep.to_vec(), out.complement)?,
        info_loss: LabeledMatrix::new(keep.to_vec(), out.loss)?,
        nuisance_condition: out.condition,
        degraded: out.solve == SolveKind::PseudoInverse,
    })
}

fn kind_labels(kind: ParamKind, m1: usize) -> Vec<ParamLabel> {
    (1..=m1).map(|m| ParamLabel::new(kind, m)).collect()
}

/// Residual of one structured-loss comparison.
#[derive(Debug, Clone, Copy)]
pub struct PairResidual<T> {
    pub row: ParamKind,
    pub col: ParamKind,
    pub residual: T,
}

/// Report of the structured information-loss checks.
#[derive(Debug, Clone)]
pub struct LossReport<T> {
    pub pairs: Vec<PairResidual<T>>,
    pub max_residual: T,
}

/// Residual relative to the compared blocks, floored at a small fraction of
/// the pair's natural scale so that true-zero blocks compare as equal instead
/// of amplifying rounding noise.
fn rel_residual<T: Real>(direct: &DMatrix<T>, closed: &DMatrix<T>, pair_scale: T) -> T {
    let denom = direct
        .norm()
        .max(closed.norm())
        .max(pair_scale * T::of(1e-6));
    if denom == T::zero() {
        T::zero()
    } else {
        (direct - closed).norm() / denom
    }
}

/// Geometric-mean scale of the two diagonal blocks of a kind pair.
fn pair_scale<T: Real>(
    j: &LabeledMatrix<T, ParamLabel>,
    row: ParamKind,
    col: ParamKind,
    m1: usize,
) -> Result<T> {
    let a = j.block(&kind_labels(row, m1), &kind_labels(row, m1))?.norm();
    let b = j.block(&kind_labels(col, m1), &kind_labels(col, m1))?.norm();
    Ok((a * b).sqrt())
}

/// The RIS-path Bayesian FIM of a scenario, with the LOS block left out.
fn ris_bayesian_fim<T: Real>(scenario: &Scenario<T>) -> Result<LabeledMatrix<T, ParamLabel>> {
    let mut sc = scenario.clone();
    sc.include_los = false;
    assemble_bayesian_fim(&sc)
}

fn require_unitary<T: Real>(scenario: &Scenario<T>) -> Result<()> {
    let realization = scenario.realize();
    if !is_unitary_gram(&realization.d_gamma, T::of(1e-10)) {
        return Err(Error::Argument(
            "loss factorization checks require a unitary sequence correlation".into(),
        ));
    }
    Ok(())
}

/// Direct information loss of a (row kind, col kind) pair: the gain columns
/// of the Bayesian FIM pushed through the eliminated gain block.
fn direct_loss<T: Real>(
    j: &LabeledMatrix<T, ParamLabel>,
    row: ParamKind,
    col: ParamKind,
    m1: usize,
) -> Result<DMatrix<T>> {
    let mut gains = kind_labels(ParamKind::BetaRe, m1);
    gains.extend(kind_labels(ParamKind::BetaIm, m1));
    let b1 = j.block(&kind_labels(row, m1), &gains)?;
    let b2 = j.block(&kind_labels(col, m1), &gains)?;
    let c = j.block(&gains, &gains)?;
    let pinv = linalg::pinv_symmetric(&c, pinv_tol::<T>());
    Ok(&b1 * pinv * b2.transpose())
}

/// Kind pairs whose loss does NOT follow the common factorized structure:
/// same-side receive/transmit elevation-azimuth pairs and the ToA diagonal.
fn is_exempt_pair(a: ParamKind, b: ParamKind) -> bool {
    use ParamKind::*;
    let ru = |k: ParamKind| matches!(k, ThetaRu | PhiRu);
    let tu = |k: ParamKind| matches!(k, ThetaTu | PhiTu);
    (ru(a) && ru(b)) || (tu(a) && tu(b)) || (a == Tau && b == Tau)
}

/// Verify that, under a unitary sequence correlation, every covered
/// information-loss block factors as `J~_bb^{-1} J_bb J_{v1 v2}`.
pub fn verify_loss_factorization<T: Real>(scenario: &Scenario<T>) -> Result<LossReport<T>> {
    require_unitary(scenario)?;
    let m1 = scenario.m1();
    let j = ris_bayesian_fim(scenario)?;
    let brr = kind_labels(ParamKind::BetaRe, m1);
    let j_bb = j.block(&brr, &brr)?;
    // Data-likelihood gain block: subtract the prior from the Bayesian one.
    let prior = match scenario.beta_prior {
        Some(v) if v.is_finite_val() => T::of(2.0) / v,
        _ => T::zero(),
    };
    let data_bb = &j_bb - DMatrix::identity(m1, m1) * prior;
    let factor = linalg::pinv_symmetric(&j_bb, pinv_tol::<T>()) * data_bb;

    let mut pairs = Vec::new();
    let mut max_residual = T::zero();
    let kinds = ParamKind::GEOMETRIC_KINDS;
    for (i, &row) in kinds.iter().enumerate() {
        for &col in kinds.iter().skip(i) {
            if is_exempt_pair(row, col) {
                continue;
            }
            let direct = direct_loss(&j, row, col, m1)?;
            let block = j.block(&kind_labels(row, m1), &kind_labels(col, m1))?;
            let closed = &factor * block;
            let residual = rel_residual(&direct, &closed, pair_scale(&j, row, col, m1)?);
            max_residual = max_residual.max(residual);
            pairs.push(PairResidual {
                row,
                col,
                residual,
            });
        }
    }
    Ok(LossReport {
        pairs,
        max_residual,
    })
}

/// Evaluate the closed forms of the exempt loss blocks (receive-angle pairs,
/// transmit-angle pairs, ToA diagonal) and compare them to the direct
/// Schur-complement losses.
pub fn special_loss_blocks<T: Real>(scenario: &Scenario<T>) -> Result<LossReport<T>> {
    require_unitary(scenario)?;
    let m1 = scenario.m1();
    let mut sc = scenario.clone();
    sc.include_los = false;
    let ctx = build_context(&sc)?;
    let j = ris_bayesian_fim(scenario)?;
    let brr = kind_labels(ParamKind::BetaRe, m1);
    let j_bb_inv = linalg::pinv_symmetric(&j.block(&brr, &brr)?, pinv_tol::<T>());

    // Complex gain-coupling block C_v = J_{v, beta_I} + j J_{v, beta_R}.
    let coupling = |v: ParamKind| -> DMatrix<Complex<T>> {
        let re = fim_block(&ctx, v, ParamKind::BetaIm);
        let im = fim_block(&ctx, v, ParamKind::BetaRe);
        DMatrix::from_fn(m1, m1, |r, c| Complex::new(re[(r, c)], im[(r, c)]))
    };

    use ParamKind::*;
    let cases = [
        (ThetaRu, ThetaRu),
        (ThetaRu, PhiRu),
        (PhiRu, PhiRu),
        (ThetaTu, ThetaTu),
        (ThetaTu, PhiTu),
        (PhiTu, PhiTu),
        (Tau, Tau),
    ];
    let mut pairs = Vec::new();
    let mut max_residual = T::zero();
    for (row, col) in cases {
        let c1 = coupling(row);
        let c2 = coupling(col);
        let inv_c = j_bb_inv.map(|x| Complex::new(x, T::zero()));
        let closed = (&c1 * inv_c * c2.adjoint()).map(|z| z.re);
        let direct = direct_loss(&j, row, col, m1)?;
        let residual = rel_residual(&direct, &closed, pair_scale(&j, row, col, m1)?);
        max_residual = max_residual.max(residual);
        pairs.push(PairResidual {
            row,
            col,
            residual,
        });
    }
    Ok(LossReport {
        pairs,
        max_residual,
    })
}

/// Estimability of one geometric kind under the scenario's priors.
#[derive(Debug, Clone, Copy)]
pub struct EstimabilityEntry<T> {
    pub kind: ParamKind,
    pub estimable: bool,
    /// Largest EFIM entry of the kind's diagonal block, relative to the data
    /// FIM scale.
    pub relative_level: T,
}

/// Flag each geometric channel-parameter kind as estimable or not: its EFIM
/// diagonal block (gains eliminated) must be full rank at a level that is
/// not vanishing against the data FIM.
pub fn estimability_report<T: Real>(
    scenario: &Scenario<T>,
) -> Result<Vec<EstimabilityEntry<T>>> {
    let m1 = scenario.m1();
    if m1 == 0 {
        return Ok(Vec::new());
    }
    let j = ris_bayesian_fim(scenario)?;
    let keep: Vec<ParamLabel> = ParamKind::GEOMETRIC_KINDS
        .iter()
        .flat_map(|k| kind_labels(*k, m1))
        .collect();
    let reduced = efim(&j, &keep)?;
    let mut out = Vec::new();
    for kind in ParamKind::GEOMETRIC_KINDS {
        let block = reduced
            .efim
            .submatrix(&kind_labels(kind, m1))?
            .into_values();
        let level = block
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        // Scale against the same kind's data block: the kinds carry wildly
        // different units (rad vs s), so a global scale would be meaningless.
        let own = j
            .block(&kind_labels(kind, m1), &kind_labels(kind, m1))?
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        let relative_level = if own == T::zero() { T::zero() } else { level / own };
        let estimable = relative_level > T::of(1e-8)
            && linalg::numerical_rank(&block, T::of(1e-9)) == m1;
        out.push(EstimabilityEntry {
            kind,
            estimable,
            relative_level,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::desk_scenario;
    use crate::scenario::GammaSpec;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_schur_complement() {
        let a = ParamLabel::new(ParamKind::Tau, 1);
        let b = ParamLabel::new(ParamKind::BetaRe, 1);
        let j = LabeledMatrix::new(vec![a, b], dmatrix![4.0, 2.0; 2.0, 2.0]).unwrap();
        let r = efim(&j, &[a]).unwrap();
        assert_relative_eq!(r.efim.values()[(0, 0)], 2.0);
        assert!(!r.degraded);
        assert!(efim(&j, &[]).is_err());
        assert!(efim(&j, &[a, b]).is_err());
    }

    #[test]
    fn zero_cross_block_is_lossless() {
        let a = ParamLabel::new(ParamKind::Tau, 1);
        let b = ParamLabel::new(ParamKind::BetaRe, 1);
        let j = LabeledMatrix::new(vec![a, b], dmatrix![4.0, 0.0; 0.0, 2.0]).unwrap();
        let r = efim(&j, &[a]).unwrap();
        assert_relative_eq!(r.efim.values()[(0, 0)], 4.0);
        assert_relative_eq!(r.info_loss.values()[(0, 0)], 0.0);
    }

    #[test]
    fn no_gain_prior_zeroes_ris_angle_efim() {
        let mut sc = desk_scenario(2);
        sc.beta_prior = None;
        sc.include_los = false;
        let report = estimability_report(&sc).unwrap();
        for e in &report {
            if e.kind.is_ris_angle() {
                assert!(!e.estimable, "{} should not be estimable", e.kind);
                assert!(e.relative_level <= 1e-8);
            }
        }
    }

    #[test]
    fn finite_gain_prior_restores_estimability() {
        let sc = desk_scenario(2);
        let report = estimability_report(&sc).unwrap();
        for e in &report {
            assert!(e.estimable, "{} should be estimable", e.kind);
        }
    }

    #[test]
    fn dead_surface_kills_estimability() {
        let mut sc = desk_scenario(1);
        for r in &mut sc.ris {
            r.gamma = GammaSpec::Zero;
        }
        let report = estimability_report(&sc).unwrap();
        assert!(report.iter().all(|e| !e.estimable));
    }

    #[test]
    fn factorization_limit_cases() {
        // No prior: the factor is the identity, so the loss equals the data
        // block and the factorization is exact.
        let mut sc = desk_scenario(2);
        sc.beta_prior = None;
        let r = verify_loss_factorization(&sc).unwrap();
        assert!(r.max_residual <= 1e-8, "residual {}", r.max_residual);

        // Tight prior: the loss tends to zero; the factorized form follows.
        sc.beta_prior = Some(1e-12);
        let r = verify_loss_factorization(&sc).unwrap();
        assert!(r.max_residual <= 1e-8, "residual {}", r.max_residual);
    }

    #[test]
    fn special_blocks_match_direct_losses() {
        let sc = desk_scenario(2);
        let r = special_loss_blocks(&sc).unwrap();
        assert!(r.max_residual <= 1e-8, "residual {}", r.max_residual);
    }
}
