//! Scenario description: poses, arrays, RIS control, waveform, priors and the
//! deterministic realization of random quantities (path gains, slow RIS
//! coefficients) from the scenario seed.

use crate::arrays::ArrayGeometry;
use crate::error::{Error, Result};
use crate::geometry::{elevation_azimuth, Pose};
use crate::labels::{ParamKind, ParamLabel};
use crate::scalar::Real;
use crate::waveform::{self, SequenceKind, WaveformConfig};
use nalgebra::{Complex, ComplexField, DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// A BS or UE terminal: pose plus array layout.
#[derive(Debug, Clone)]
pub struct Terminal<T> {
    pub pose: Pose<T>,
    pub geometry: ArrayGeometry<T>,
}

/// Slow-varying RIS coefficient specification (the diagonal of Gamma).
#[derive(Debug, Clone)]
pub enum GammaSpec<T> {
    /// All elements reflect with unit gain and zero phase.
    Ones,
    /// Unit gain, per-element phase drawn uniformly from the scenario seed.
    RandomPhase,
    /// Switched-off surface.
    Zero,
    /// Explicit coefficients (entries must have magnitude <= 1).
    Explicit(Vec<Complex<T>>),
}

/// One RIS: pose, layout, reflection spec, and pose-knowledge state.
#[derive(Debug, Clone)]
pub struct RisNode<T> {
    pub pose: Pose<T>,
    pub geometry: ArrayGeometry<T>,
    pub gamma: GammaSpec<T>,
    /// True when the pose is perfectly known (no location unknowns).
    pub known: bool,
    /// Prior variance sigma^2_m for a perturbed pose; `None` means perturbed
    /// with no prior.
    pub sigma2_m: Option<T>,
}

/// Complex path gain specification, LOS first.
#[derive(Debug, Clone)]
pub enum BetaSpec<T> {
    /// Unit magnitude, uniform random phase per path from the scenario seed.
    UnitRandomPhase,
    /// Explicit gains indexed by path (0 = LOS, then RIS paths).
    Explicit(Vec<Complex<T>>),
}

/// Full physical description of one evaluation.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub bs: Terminal<T>,
    pub ue: Terminal<T>,
    pub ris: Vec<RisNode<T>>,
    pub waveform: WaveformConfig<T>,
    pub sequence: SequenceKind,
    pub beta: BetaSpec<T>,
    /// Prior variance sigma^2_beta shared by all path gains; `None` = no prior.
    pub beta_prior: Option<T>,
    /// Prior variance for the UE pose block; `None` = no prior.
    pub ue_prior: Option<T>,
    pub include_los: bool,
    pub seed: u64,
}

/// Concrete draws of the seeded quantities.
#[derive(Debug, Clone)]
pub struct Realization<T> {
    /// Path gains indexed by path (0 = LOS, 1..=M1 = RIS), always populated.
    pub betas: Vec<Complex<T>>,
    /// Slow RIS coefficient diagonals, one per RIS.
    pub gammas: Vec<DVector<Complex<T>>>,
    /// T x M1 sequence matrix.
    pub d_gamma: DMatrix<Complex<T>>,
}

impl<T: Real> Scenario<T> {
    pub fn m1(&self) -> usize {
        self.ris.len()
    }

    /// Path indices in play: 0 when LOS is included, then 1..=M1.
    pub fn path_indices(&self) -> Vec<usize> {
        let mut v = Vec::new();
        if self.include_los {
            v.push(0);
        }
        v.extend(1..=self.m1());
        v
    }

    pub fn sigma2(&self) -> T {
        waveform::effective_sigma2(&self.waveform)
    }

    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        if self.bs.pose.theta0 != T::zero() || self.bs.pose.phi0 != T::zero() {
            return Err(Error::Scenario(
                "BS orientation must be zero: departure angles are defined in the global frame"
                    .into(),
            ));
        }
        if !self.include_los && self.ris.is_empty() {
            return Err(Error::Scenario("scenario has no propagation path".into()));
        }
        if !self.ris.is_empty() && self.waveform.n_symbols <= self.m1() {
            return Err(Error::Capacity(format!(
                "{} OFDM symbols for {} RISs; discrete sequences need T > M1",
                self.waveform.n_symbols,
                self.m1()
            )));
        }
        if let Some(v) = self.beta_prior {
            if v <= T::zero() {
                return Err(Error::Argument("beta prior variance must be positive".into()));
            }
        }
        for (i, r) in self.ris.iter().enumerate() {
            if let Some(v) = r.sigma2_m {
                if v <= T::zero() {
                    return Err(Error::Argument(format!(
                        "RIS {} prior variance must be positive",
                        i + 1
                    )));
                }
            }
            if let GammaSpec::Explicit(g) = &r.gamma {
                if g.len() != r.geometry.count() {
                    return Err(Error::Scenario(format!(
                        "RIS {} has {} elements but {} gamma entries",
                        i + 1,
                        r.geometry.count(),
                        g.len()
                    )));
                }
                if g.iter().any(|z| z.modulus() > T::one() + T::of(1e-12)) {
                    return Err(Error::Scenario(format!(
                        "RIS {} gamma entries must have magnitude <= 1",
                        i + 1
                    )));
                }
            }
        }
        if let BetaSpec::Explicit(b) = &self.beta {
            if b.len() != self.m1() + 1 {
                return Err(Error::Scenario(format!(
                    "explicit gain list must have {} entries (LOS first)",
                    self.m1() + 1
                )));
            }
        }
        Ok(())
    }

    /// Draw the seeded quantities. Each path gain and each RIS draws from
    /// its own derived stream, so the realization of a shared entity does
    /// not depend on how many paths a scenario has or whether LOS is
    /// enabled; nested-scenario comparisons see identical states.
    pub fn realize(&self) -> Realization<T> {
        let m1 = self.m1();
        let mut betas = Vec::with_capacity(m1 + 1);
        for path in 0..=m1 {
            let mut rng = derived_stream(self.seed, 0x62_65_74_61, path as u64);
            let phase = T::of(rng.gen::<f64>()) * T::two_pi();
            let drawn = Complex::new(phase.cos(), phase.sin());
            let beta = match &self.beta {
                BetaSpec::UnitRandomPhase => drawn,
                BetaSpec::Explicit(b) => b[path],
            };
            betas.push(beta);
        }
        let mut gammas = Vec::with_capacity(m1);
        for (idx, r) in self.ris.iter().enumerate() {
            let mut rng = derived_stream(self.seed, 0x67_61_6d_61, idx as u64);
            let n = r.geometry.count();
            let phases: Vec<T> = (0..n)
                .map(|_| T::of(rng.gen::<f64>()) * T::two_pi())
                .collect();
            let g = match &r.gamma {
                GammaSpec::Ones => {
                    DVector::from_element(n, Complex::new(T::one(), T::zero()))
                }
                GammaSpec::RandomPhase => DVector::from_iterator(
                    n,
                    phases.iter().map(|p| Complex::new(p.cos(), p.sin())),
                ),
                GammaSpec::Zero => DVector::from_element(n, Complex::new(T::zero(), T::zero())),
                GammaSpec::Explicit(v) => DVector::from_vec(v.clone()),
            };
            gammas.push(g);
        }
        let d_gamma = if m1 > 0 {
            waveform::sequence_matrix(self.waveform.n_symbols, m1, self.sequence)
                .expect("validated scenario has T > M1")
        } else {
            DMatrix::from_element(
                self.waveform.n_symbols,
                0,
                Complex::new(T::zero(), T::zero()),
            )
        };
        Realization {
            betas,
            gammas,
            d_gamma,
        }
    }

    /// Canonical channel-parameter label order: the LOS block (when present)
    /// followed by the RIS-path kinds, kind-major.
    pub fn channel_labels(&self) -> Vec<ParamLabel> {
        let mut labels = Vec::new();
        if self.include_los {
            for kind in ParamKind::LOS_KINDS {
                labels.push(ParamLabel::new(kind, 0));
            }
        }
        for kind in ParamKind::RIS_KINDS {
            for m in 1..=self.m1() {
                labels.push(ParamLabel::new(kind, m));
            }
        }
        labels
    }

    /// Indices (into `ris`) of the perturbed set M1^b.
    pub fn perturbed_ris(&self) -> Vec<usize> {
        (0..self.m1()).filter(|i| !self.ris[*i].known).collect()
    }
}

/// Independent substream for entity `index` under purpose `tag` (splitmix64
/// mixing of the scenario seed).
fn derived_stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut z = seed
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Beam directions used when a scenario file does not pin them: departure
/// angles towards the UE (when LOS is used) and towards each RIS, cycled to
/// the requested beam count.
pub fn default_beam_angles<T: Real>(
    bs_position: &Vector3<T>,
    ue_position: &Vector3<T>,
    ris_positions: &[Vector3<T>],
    include_los: bool,
    n_beams: usize,
) -> Result<Vec<(T, T)>> {
    let mut dirs = Vec::new();
    if include_los {
        dirs.push(elevation_azimuth(&(ue_position - bs_position))?);
    }
    for p in ris_positions {
        dirs.push(elevation_azimuth(&(p - bs_position))?);
    }
    if dirs.is_empty() {
        return Err(Error::Scenario("no directions to point beams at".into()));
    }
    Ok((0..n_beams).map(|i| dirs[i % dirs.len()]).collect())
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: Option<u64>,
    include_los: Option<bool>,
    waveform: RawWaveform,
    sequence: Option<RawSequence>,
    prior: Option<RawPrior>,
    bs: RawTerminal,
    ue: RawTerminal,
    #[serde(default)]
    ris: Vec<RawRis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveform {
    carrier_ghz: f64,
    bandwidth_ghz: f64,
    n_subcarriers: usize,
    n_symbols: usize,
    n_beams: Option<usize>,
    beam_angles_deg: Option<Vec<[f64; 2]>>,
    tx_power_dbm: f64,
    tx_gain_db: f64,
    rx_gain_db: f64,
    noise_density_dbm_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    sigma2_beta: Option<f64>,
    sigma2_ue: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    nx: usize,
    ny: usize,
    spacing_wavelengths: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerminal {
    position_m: [f64; 3],
    orientation_deg: Option<[f64; 2]>,
    array: RawArray,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRis {
    position_m: [f64; 3],
    orientation_deg: Option<[f64; 2]>,
    array: RawArray,
    known: Option<bool>,
    sigma2_m: Option<f64>,
    gamma: Option<String>,
}

fn vec3<T: Real>(v: [f64; 3]) -> Vector3<T> {
    Vector3::new(T::of(v[0]), T::of(v[1]), T::of(v[2]))
}

fn pose<T: Real>(position: [f64; 3], orientation_deg: Option<[f64; 2]>) -> Result<Pose<T>> {
    let o = orientation_deg.unwrap_or([0.0, 0.0]);
    Pose::new(
        vec3(position),
        T::of(o[0].to_radians()),
        T::of(o[1].to_radians()),
    )
}

fn array<T: Real>(raw: &RawArray, lambda: T) -> Result<ArrayGeometry<T>> {
    ArrayGeometry::ura(raw.nx, raw.ny, T::of(raw.spacing_wavelengths) * lambda)
}

/// Parse a scenario from TOML text.
pub fn scenario_from_toml<T: Real>(text: &str) -> Result<Scenario<T>> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let include_los = raw.include_los.unwrap_or(true);
    let carrier = T::of(raw.waveform.carrier_ghz * 1e9);
    let lambda = T::of(crate::scalar::SPEED_OF_LIGHT) / carrier;

    let bs = Terminal {
        pose: pose(raw.bs.position_m, raw.bs.orientation_deg)?,
        geometry: array(&raw.bs.array, lambda)?,
    };
    let ue = Terminal {
        pose: pose(raw.ue.position_m, raw.ue.orientation_deg)?,
        geometry: array(&raw.ue.array, lambda)?,
    };
    let mut ris = Vec::new();
    for r in &raw.ris {
        let gamma = match r.gamma.as_deref() {
            None | Some("random-phase") => GammaSpec::RandomPhase,
            Some("ones") => GammaSpec::Ones,
            Some("zero") => GammaSpec::Zero,
            Some(other) => {
                return Err(Error::Parse(format!(
                    "ris.gamma must be one of random-phase/ones/zero, got {other:?}"
                )))
            }
        };
        ris.push(RisNode {
            pose: pose(r.position_m, r.orientation_deg)?,
            geometry: array(&r.array, lambda)?,
            gamma,
            known: r.known.unwrap_or(true),
            sigma2_m: r.sigma2_m.map(T::of),
        });
    }

    let n_beams = raw.waveform.n_beams.unwrap_or(raw.bs.array.nx * raw.bs.array.ny);
    let beam_angles = match &raw.waveform.beam_angles_deg {
        Some(list) => list
            .iter()
            .map(|[t, p]| (T::of(t.to_radians()), T::of(p.to_radians())))
            .collect(),
        None => default_beam_angles(
            &bs.pose.position,
            &ue.pose.position,
            &ris.iter().map(|r| r.pose.position).collect::<Vec<_>>(),
            include_los,
            n_beams,
        )?,
    };

    let waveform = WaveformConfig {
        carrier_hz: carrier,
        bandwidth_hz: T::of(raw.waveform.bandwidth_ghz * 1e9),
        n_subcarriers: raw.waveform.n_subcarriers,
        n_symbols: raw.waveform.n_symbols,
        beam_angles,
        pilot_energy: WaveformConfig::unit_pilots(raw.waveform.n_subcarriers),
        tx_power_dbm: T::of(raw.waveform.tx_power_dbm),
        tx_gain_db: T::of(raw.waveform.tx_gain_db),
        rx_gain_db: T::of(raw.waveform.rx_gain_db),
        noise_density_dbm_hz: T::of(raw.waveform.noise_density_dbm_hz),
    };

    let sequence = match raw.sequence.as_ref().map(|s| s.kind.as_str()) {
        None | Some("hadamard") => SequenceKind::Hadamard,
        Some("dft") => SequenceKind::Dft,
        Some(other) => {
            return Err(Error::Parse(format!(
                "sequence.kind must be hadamard or dft, got {other:?}"
            )))
        }
    };

    let scenario = Scenario {
        bs,
        ue,
        ris,
        waveform,
        sequence,
        beta: BetaSpec::UnitRandomPhase,
        beta_prior: raw.prior.as_ref().and_then(|p| p.sigma2_beta).map(T::of),
        ue_prior: raw.prior.as_ref().and_then(|p| p.sigma2_ue).map(T::of),
        include_los,
        seed: raw.seed.unwrap_or(0),
    };
    scenario.validate()?;
    Ok(scenario)
}

// ---------------------------------------------------------------------------
// Built-in scenario builders (desk-scale tests, Monte-Carlo placements)
// ---------------------------------------------------------------------------

/// Ready-made scenario builders: the desk-scale reference, randomized
/// property-test geometry, and the Monte-Carlo placement template.
pub mod presets {
    use super::*;

    /// Desk-scale scenario: M1 RISs, 2x2 BS and UE arrays, 4x4 RISs, 16
    /// subcarriers, 4 Hadamard symbols, all RIS poses known, unit beta prior.
    pub fn desk_scenario(m1: usize) -> Scenario<f64> {
        desk_scenario_t::<f64>(m1)
    }

    pub fn desk_scenario_t<T: Real>(m1: usize) -> Scenario<T> {
        assert!(m1 <= 3, "desk scenario supports at most 3 RISs");
        let carrier = 30e9;
        let lambda = crate::scalar::SPEED_OF_LIGHT / carrier;
        let half = T::of(lambda / 2.0);
        let bs_pos = Vector3::new(T::zero(), T::zero(), T::of(40.0));
        let ue_pos = Vector3::new(T::of(28.0), T::of(67.0), T::of(5.0));
        let ris_xy = [(22.0, 18.0), (45.0, 27.0), (9.0, 30.0)];
        let mut ris = Vec::new();
        for (x, y) in ris_xy.iter().take(m1) {
            ris.push(RisNode {
                pose: Pose::new(
                    Vector3::new(T::of(*x), T::of(*y), T::of(35.0)),
                    T::of(45f64.to_radians()),
                    T::of(35f64.to_radians()),
                )
                .unwrap(),
                geometry: ArrayGeometry::ura(4, 4, half).unwrap(),
                gamma: GammaSpec::RandomPhase,
                known: true,
                sigma2_m: Some(T::of(0.1)),
            });
        }
        let ris_positions: Vec<_> = ris.iter().map(|r| r.pose.position).collect();
        let beam_angles =
            default_beam_angles(&bs_pos, &ue_pos, &ris_positions, true, 4).unwrap();
        Scenario {
            bs: Terminal {
                pose: Pose::new(bs_pos, T::zero(), T::zero()).unwrap(),
                geometry: ArrayGeometry::ura(2, 2, half).unwrap(),
            },
            ue: Terminal {
                pose: Pose::new(ue_pos, T::of(10f64.to_radians()), T::zero()).unwrap(),
                geometry: ArrayGeometry::ura(2, 2, half).unwrap(),
            },
            ris,
            waveform: WaveformConfig {
                carrier_hz: T::of(carrier),
                bandwidth_hz: T::of(0.1e9),
                n_subcarriers: 16,
                n_symbols: 4,
                beam_angles,
                pilot_energy: WaveformConfig::unit_pilots(16),
                tx_power_dbm: T::of(5.0),
                tx_gain_db: T::of(6.0),
                rx_gain_db: T::of(2.0),
                noise_density_dbm_hz: T::of(-174.0),
            },
            sequence: SequenceKind::Hadamard,
            beta: BetaSpec::UnitRandomPhase,
            beta_prior: Some(T::one()),
            ue_prior: None,
            include_los: true,
            seed: 42,
        }
    }

    /// Random desk-scale scenario for property suites. Geometry is drawn in
    /// the facing region of the default RIS orientation so every path is
    /// physically valid.
    pub fn random_scenario(rng: &mut impl Rng, m1: usize) -> Scenario<f64> {
        loop {
            let mut sc = desk_scenario(m1);
            sc.seed = rng.gen();
            sc.ue.pose.position =
                Vector3::new(rng.gen_range(5.0..95.0), rng.gen_range(55.0..95.0), 5.0);
            sc.ue.pose.theta0 = rng.gen_range(-0.6..0.6);
            sc.ue.pose.phi0 = rng.gen_range(-3.0..3.0);
            for r in &mut sc.ris {
                r.pose.position =
                    Vector3::new(rng.gen_range(20.0..95.0), rng.gen_range(5.0..40.0), 35.0);
            }
            let ris_positions: Vec<_> = sc.ris.iter().map(|r| r.pose.position).collect();
            sc.waveform.beam_angles = default_beam_angles(
                &sc.bs.pose.position,
                &ue_pos_of(&sc),
                &ris_positions,
                sc.include_los,
                4,
            )
            .unwrap();
            if scenario_paths_valid(&sc) {
                return sc;
            }
        }
    }

    fn ue_pos_of(sc: &Scenario<f64>) -> Vector3<f64> {
        sc.ue.pose.position
    }

    /// True when every enabled path has valid geometry (distinct points,
    /// front-side RIS illumination, non-degenerate azimuths).
    pub fn scenario_paths_valid<T: Real>(sc: &Scenario<T>) -> bool {
        let margin = T::of(0.05);
        for path in sc.path_indices() {
            match crate::geometry::path_frames(sc, path) {
                Ok(frames) => {
                    let vs: Vec<Vector3<T>> = [
                        Some(frames.g),
                        frames.c.map(|c| c.1),
                        frames.v.map(|v| v.1),
                        Some(frames.e.1),
                    ]
                    .into_iter()
                    .flatten()
                    .collect();
                    for v in &vs {
                        let rho_xy = (v.x * v.x + v.y * v.y).sqrt();
                        if rho_xy < margin * v.norm() {
                            return false;
                        }
                    }
                }
                Err(_) => return false,
            }
            if crate::geometry::derive_path_params(sc, path).is_err() {
                return false;
            }
        }
        true
    }

    /// Monte-Carlo placement template following the numerical-results setup:
    /// BS at (0,0,40 m), RIS height 35 m, UE height 5 m, random (x, y).
    #[derive(Debug, Clone)]
    pub struct PlacementConfig {
        pub m1: usize,
        /// Number of perturbed RISs (the first `n_perturbed` of the list).
        pub n_perturbed: usize,
        /// UE array side (elements = side^2).
        pub rx_side: usize,
        /// RIS array side per surface.
        pub ris_side: usize,
        pub sigma2_m: Option<f64>,
        pub include_los: bool,
        pub tx_power_dbm: f64,
        pub n_subcarriers: usize,
        /// OFDM symbols; must exceed m1 and be a power of two for Hadamard.
        pub n_symbols: usize,
        pub beta_prior: Option<f64>,
    }

    impl Default for PlacementConfig {
        fn default() -> Self {
            PlacementConfig {
                m1: 3,
                n_perturbed: 0,
                rx_side: 2,
                ris_side: 4,
                sigma2_m: Some(0.1),
                include_los: false,
                tx_power_dbm: 5.0,
                n_subcarriers: 16,
                n_symbols: 4,
                beta_prior: None,
            }
        }
    }

    /// Redraw the UE and RIS (x, y) coordinates at the standard heights
    /// (UE 5 m, RIS 35 m) until every path is geometrically valid, then
    /// repoint the default beams. Deterministic in the supplied generator.
    pub fn randomize_placements(sc: &mut Scenario<f64>, rng: &mut impl Rng) -> Result<()> {
        for _ in 0..500 {
            sc.ue.pose.position =
                Vector3::new(rng.gen_range(5.0..95.0), rng.gen_range(55.0..95.0), 5.0);
            for r in &mut sc.ris {
                r.pose.position =
                    Vector3::new(rng.gen_range(20.0..95.0), rng.gen_range(5.0..40.0), 35.0);
            }
            let ris_positions: Vec<_> = sc.ris.iter().map(|r| r.pose.position).collect();
            sc.waveform.beam_angles = default_beam_angles(
                &sc.bs.pose.position,
                &sc.ue.pose.position,
                &ris_positions,
                sc.include_los,
                sc.bs.geometry.count(),
            )?;
            if scenario_paths_valid(sc) {
                return Ok(());
            }
        }
        Err(Error::Geometry(
            "no valid placement found in 500 attempts".into(),
        ))
    }

    /// Draw one placement; retries until the geometry is valid for every
    /// path. Deterministic in `seed`.
    pub fn placement_scenario(cfg: &PlacementConfig, seed: u64) -> Result<Scenario<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut sc = desk_scenario(0);
        sc.seed = seed;
        sc.include_los = cfg.include_los;
        sc.beta_prior = cfg.beta_prior;
        sc.waveform.tx_power_dbm = cfg.tx_power_dbm;
        sc.waveform.n_subcarriers = cfg.n_subcarriers;
        sc.waveform.pilot_energy = WaveformConfig::unit_pilots(cfg.n_subcarriers);
        sc.waveform.n_symbols = cfg.n_symbols;
        let lambda = crate::scalar::SPEED_OF_LIGHT / sc.waveform.carrier_hz;
        sc.ue.geometry = ArrayGeometry::ura(cfg.rx_side, cfg.rx_side, lambda / 2.0)?;
        for i in 0..cfg.m1 {
            sc.ris.push(RisNode {
                pose: Pose::new(
                    Vector3::new(50.0, 20.0, 35.0),
                    45f64.to_radians(),
                    35f64.to_radians(),
                )?,
                geometry: ArrayGeometry::ura(cfg.ris_side, cfg.ris_side, lambda / 2.0)?,
                gamma: GammaSpec::RandomPhase,
                known: i >= cfg.n_perturbed,
                sigma2_m: cfg.sigma2_m,
            });
        }
        randomize_placements(&mut sc, &mut rng)?;
        sc.validate()?;
        Ok(sc)
    }
}
