//! Label-addressed matrices.
//!
//! All FIM/EFIM algebra in this crate is addressed by typed labels instead of
//! raw indices: a channel-parameter label is a (kind, path) pair, a location
//! label is a (kind, RIS index) pair. [`LabeledMatrix`] carries the label list
//! alongside a dense real matrix so that sub-blocks, Schur complements and
//! congruence transforms can be requested by label set.

use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::DMatrix;
use std::fmt;

/// Channel-parameter kinds, in the canonical kind-major ordering of the
/// RIS-path parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamKind {
    ThetaRu,
    PhiRu,
    ThetaTl,
    PhiTl,
    ThetaRl,
    PhiRl,
    ThetaTu,
    PhiTu,
    Tau,
    BetaRe,
    BetaIm,
}

impl ParamKind {
    /// The 11 kinds carried by a RIS path, in canonical order.
    pub const RIS_KINDS: [ParamKind; 11] = [
        ParamKind::ThetaRu,
        ParamKind::PhiRu,
        ParamKind::ThetaTl,
        ParamKind::PhiTl,
        ParamKind::ThetaRl,
        ParamKind::PhiRl,
        ParamKind::ThetaTu,
        ParamKind::PhiTu,
        ParamKind::Tau,
        ParamKind::BetaRe,
        ParamKind::BetaIm,
    ];

    /// The 7 kinds carried by the LOS path, in canonical order.
    pub const LOS_KINDS: [ParamKind; 7] = [
        ParamKind::ThetaRu,
        ParamKind::PhiRu,
        ParamKind::ThetaTu,
        ParamKind::PhiTu,
        ParamKind::Tau,
        ParamKind::BetaRe,
        ParamKind::BetaIm,
    ];

    /// The 9 geometric kinds of a RIS path (everything but the gains).
    pub const GEOMETRIC_KINDS: [ParamKind; 9] = [
        ParamKind::ThetaRu,
        ParamKind::PhiRu,
        ParamKind::ThetaTl,
        ParamKind::PhiTl,
        ParamKind::ThetaRl,
        ParamKind::PhiRl,
        ParamKind::ThetaTu,
        ParamKind::PhiTu,
        ParamKind::Tau,
    ];

    /// The reduced geometric kinds with the angles of incidence excluded.
    pub const REDUCED_KINDS: [ParamKind; 7] = [
        ParamKind::ThetaRu,
        ParamKind::PhiRu,
        ParamKind::ThetaTl,
        ParamKind::PhiTl,
        ParamKind::ThetaTu,
        ParamKind::PhiTu,
        ParamKind::Tau,
    ];

    pub fn is_gain(self) -> bool {
        matches!(self, ParamKind::BetaRe | ParamKind::BetaIm)
    }

    pub fn is_ris_angle(self) -> bool {
        matches!(
            self,
            ParamKind::ThetaTl | ParamKind::PhiTl | ParamKind::ThetaRl | ParamKind::PhiRl
        )
    }

    pub fn is_aoi(self) -> bool {
        matches!(self, ParamKind::ThetaRl | ParamKind::PhiRl)
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamKind::ThetaRu => "theta_ru",
            ParamKind::PhiRu => "phi_ru",
            ParamKind::ThetaTl => "theta_tl",
            ParamKind::PhiTl => "phi_tl",
            ParamKind::ThetaRl => "theta_rl",
            ParamKind::PhiRl => "phi_rl",
            ParamKind::ThetaTu => "theta_tu",
            ParamKind::PhiTu => "phi_tu",
            ParamKind::Tau => "tau",
            ParamKind::BetaRe => "beta_re",
            ParamKind::BetaIm => "beta_im",
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A channel-parameter label: a kind attached to a path index.
///
/// Path 0 is the LOS path and only carries the kinds in
/// [`ParamKind::LOS_KINDS`]; paths `1..=M1` are RIS paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamLabel {
    pub kind: ParamKind,
    pub path: usize,
}

impl ParamLabel {
    pub fn new(kind: ParamKind, path: usize) -> Self {
        ParamLabel { kind, path }
    }

    pub fn is_los(self) -> bool {
        self.path == 0
    }
}

impl fmt::Display for ParamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.kind, self.path)
    }
}

/// Location-parameter kinds for the UE and the RISs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocKind {
    UeTheta0,
    UePhi0,
    UePx,
    UePy,
    UePz,
    RisTheta0,
    RisPhi0,
    RisPx,
    RisPy,
    RisPz,
}

impl LocKind {
    pub fn is_ue(self) -> bool {
        matches!(
            self,
            LocKind::UeTheta0 | LocKind::UePhi0 | LocKind::UePx | LocKind::UePy | LocKind::UePz
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            LocKind::UeTheta0 => "ue_theta0",
            LocKind::UePhi0 => "ue_phi0",
            LocKind::UePx => "ue_px",
            LocKind::UePy => "ue_py",
            LocKind::UePz => "ue_pz",
            LocKind::RisTheta0 => "ris_theta0",
            LocKind::RisPhi0 => "ris_phi0",
            LocKind::RisPx => "ris_px",
            LocKind::RisPy => "ris_py",
            LocKind::RisPz => "ris_pz",
        }
    }
}

/// A location label. `ris_index` is `None` for the UE block and `Some(m)`
/// (1-based, matching path indices) for RIS blocks.
///
/// The UE block is ordered `[theta0, phi0, px, py, pz]` so that the
/// orientation bound reads off indices (0, 0), (1, 1) and the position bound
/// off (2, 2), (3, 3), (4, 4) of the inverse EFIM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocationLabel {
    pub kind: LocKind,
    pub ris_index: Option<usize>,
}

impl LocationLabel {
    pub fn ue(kind: LocKind) -> Self {
        LocationLabel {
            kind,
            ris_index: None,
        }
    }

    pub fn ris(kind: LocKind, m: usize) -> Self {
        LocationLabel {
            kind,
            ris_index: Some(m),
        }
    }

    /// The five UE labels in canonical order.
    pub fn ue_block() -> [LocationLabel; 5] {
        [
            LocationLabel::ue(LocKind::UeTheta0),
            LocationLabel::ue(LocKind::UePhi0),
            LocationLabel::ue(LocKind::UePx),
            LocationLabel::ue(LocKind::UePy),
            LocationLabel::ue(LocKind::UePz),
        ]
    }

    /// The five labels of RIS `m` in canonical order.
    pub fn ris_block(m: usize) -> [LocationLabel; 5] {
        [
            LocationLabel::ris(LocKind::RisTheta0, m),
            LocationLabel::ris(LocKind::RisPhi0, m),
            LocationLabel::ris(LocKind::RisPx, m),
            LocationLabel::ris(LocKind::RisPy, m),
            LocationLabel::ris(LocKind::RisPz, m),
        ]
    }
}

impl fmt::Display for LocationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ris_index {
            None => f.write_str(self.kind.name()),
            Some(m) => write!(f, "{}[{}]", self.kind.name(), m),
        }
    }
}

/// A real square matrix whose rows and columns carry typed labels.
#[derive(Debug, Clone)]
pub struct LabeledMatrix<T, L> {
    labels: Vec<L>,
    values: DMatrix<T>,
}

impl<T: Real, L: Copy + Eq + fmt::Display> LabeledMatrix<T, L> {
    /// Wrap a square matrix with its label list. The labels must be
    /// duplicate-free and match the matrix dimension.
    pub fn new(labels: Vec<L>, values: DMatrix<T>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::Label(format!(
                "matrix is {}x{}, not square",
                values.nrows(),
                values.ncols()
            )));
        }
        if labels.len() != values.nrows() {
            return Err(Error::Label(format!(
                "{} labels for a {}-dim matrix",
                labels.len(),
                values.nrows()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::Label(format!("duplicate label {a}")));
                }
            }
        }
        Ok(LabeledMatrix { labels, values })
    }

    pub fn zeros(labels: Vec<L>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<T> {
        self.values
    }

    pub fn index_of(&self, label: L) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    pub fn get(&self, row: L, col: L) -> Result<T> {
        let r = self
            .index_of(row)
            .ok_or_else(|| Error::Label(format!("row label {row} not present")))?;
        let c = self
            .index_of(col)
            .ok_or_else(|| Error::Label(format!("column label {col} not present")))?;
        Ok(self.values[(r, c)])
    }

    /// Extract the square sub-matrix addressed by `keep`, in `keep` order.
    pub fn submatrix(&self, keep: &[L]) -> Result<Self> {
        let idx = self.indices_of(keep)?;
        let n = idx.len();
        let mut out = DMatrix::zeros(n, n);
        for (i, &ri) in idx.iter().enumerate() {
            for (j, &cj) in idx.iter().enumerate() {
                out[(i, j)] = self.values[(ri, cj)];
            }
        }
        LabeledMatrix::new(keep.to_vec(), out)
    }

    /// Extract the rectangular block with the given row and column labels.
    pub fn block(&self, rows: &[L], cols: &[L]) -> Result<DMatrix<T>> {
        let ri = self.indices_of(rows)?;
        let ci = self.indices_of(cols)?;
        let mut out = DMatrix::zeros(ri.len(), ci.len());
        for (i, &r) in ri.iter().enumerate() {
            for (j, &c) in ci.iter().enumerate() {
                out[(i, j)] = self.values[(r, c)];
            }
        }
        Ok(out)
    }

    pub fn indices_of(&self, labels: &[L]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index_of(*l)
                    .ok_or_else(|| Error::Label(format!("label {l} not present")))
            })
            .collect()
    }

    /// Labels present in `self` but not in `other_set`.
    pub fn labels_not_in(&self, other_set: &[L]) -> Vec<L> {
        self.labels
            .iter()
            .copied()
            .filter(|l| !other_set.contains(l))
            .collect()
    }

    /// Replace the values with `(J + J^T) / 2`.
    pub fn symmetrized(mut self) -> Self {
        let half = T::of(0.5);
        let sym = (&self.values + self.values.transpose()) * half;
        self.values = sym;
        self
    }

    /// `||J - J^T||_F / ||J||_F` (0 for the zero matrix).
    pub fn asymmetry(&self) -> T {
        let norm = self.values.norm();
        if norm == T::zero() {
            return T::zero();
        }
        (&self.values - self.values.transpose()).norm() / norm
    }

    /// Add another labeled matrix with an identical label list.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::Label("label lists differ in add".into()));
        }
        LabeledMatrix::new(self.labels.clone(), &self.values + &other.values)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}
