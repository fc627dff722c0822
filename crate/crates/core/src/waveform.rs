//! Precoder, pilot-energy model, RIS sequence matrices, signal factors,
//! pathloss models and noise level.

use crate::arrays::{steering, ArrayGeometry};
use crate::error::{Error, Result};
use crate::scalar::{db_to_linear, dbm_to_watts, Real, SPEED_OF_LIGHT};
use nalgebra::{Complex, ComplexField, DMatrix, DVector};

/// OFDM waveform, beam set and link-budget parameters.
#[derive(Debug, Clone)]
pub struct WaveformConfig<T> {
    pub carrier_hz: T,
    /// Bandwidth B; the sampling period is T_s = 1/B.
    pub bandwidth_hz: T,
    /// Number of subcarriers N.
    pub n_subcarriers: usize,
    /// Number of OFDM symbols T.
    pub n_symbols: usize,
    /// Beam directions (elevation, azimuth) of the precoder columns; the
    /// number of beams N_B is the list length.
    pub beam_angles: Vec<(T, T)>,
    /// Per-subcarrier pilot energy s[n], n = 1..N.
    pub pilot_energy: Vec<T>,
    pub tx_power_dbm: T,
    pub tx_gain_db: T,
    pub rx_gain_db: T,
    /// Noise power spectral density N_0 in dBm/Hz.
    pub noise_density_dbm_hz: T,
}

impl<T: Real> WaveformConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.n_symbols == 0 {
            return Err(Error::Argument(
                "need at least one subcarrier and one symbol".into(),
            ));
        }
        if self.beam_angles.is_empty() {
            return Err(Error::Argument("need at least one beam".into()));
        }
        if self.carrier_hz <= T::zero() || self.bandwidth_hz <= T::zero() {
            return Err(Error::Argument("carrier and bandwidth must be positive".into()));
        }
        if self.pilot_energy.len() != self.n_subcarriers {
            return Err(Error::Argument(format!(
                "pilot energy list has {} entries for {} subcarriers",
                self.pilot_energy.len(),
                self.n_subcarriers
            )));
        }
        if self.pilot_energy.iter().any(|s| *s < T::zero()) {
            return Err(Error::Argument("pilot energy must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> T {
        T::of(SPEED_OF_LIGHT) / self.carrier_hz
    }

    pub fn sample_period(&self) -> T {
        T::one() / self.bandwidth_hz
    }

    pub fn n_beams(&self) -> usize {
        self.beam_angles.len()
    }

    /// Unit pilot energy on every subcarrier.
    pub fn unit_pilots(n_subcarriers: usize) -> Vec<T> {
        vec![T::one(); n_subcarriers]
    }
}

/// Which orthogonal sequence family drives the fast-varying RIS coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Hadamard,
    Dft,
}

/// Directional precoder: column `l` is a steering vector towards beam `l`,
/// the whole matrix rescaled so `trace(F^H F) = 1`.
pub fn directional_precoder<T: Real>(
    geom: &ArrayGeometry<T>,
    beam_angles: &[(T, T)],
    lambda: T,
) -> Result<DMatrix<Complex<T>>> {
    if beam_angles.is_empty() {
        return Err(Error::Argument("empty beam list".into()));
    }
    let nt = geom.count();
    let nb = beam_angles.len();
    let mut f = DMatrix::from_element(nt, nb, Complex::new(T::zero(), T::zero()));
    for (l, (theta, phi)) in beam_angles.iter().enumerate() {
        let bundle = steering(geom, *theta, *phi, lambda)?;
        f.set_column(l, &bundle.a);
    }
    // Unit-modulus entries make trace(F^H F) = nt * nb before scaling.
    let scale = T::one() / (T::of(nt as f64) * T::of(nb as f64)).sqrt();
    Ok(f * Complex::new(scale, T::zero()))
}

/// T x M1 sequence matrix of fast-varying RIS coefficients.
///
/// Columns are distinct non-constant Hadamard (or non-DC DFT) columns scaled
/// by `1/sqrt(T)`, so `D^H D = I` and `D^H 1 = 0`.
pub fn sequence_matrix<T: Real>(
    t_symbols: usize,
    m1: usize,
    kind: SequenceKind,
) -> Result<DMatrix<Complex<T>>> {
    if m1 == 0 {
        return Err(Error::Argument("need at least one RIS column".into()));
    }
    if t_symbols <= m1 {
        return Err(Error::Capacity(format!(
            "{t_symbols} OFDM symbols cannot carry {m1} orthogonal zero-sum sequences"
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut d = DMatrix::from_element(t_symbols, m1, zero);
    let scale = T::one() / T::of(t_symbols as f64).sqrt();
    match kind {
        SequenceKind::Hadamard => {
            if !t_symbols.is_power_of_two() {
                return Err(Error::Argument(format!(
                    "Hadamard size {t_symbols} is not a power of two"
                )));
            }
            // Sylvester Hadamard entry H[t, c] = (-1)^popcount(t & c); column
            // 0 is all ones and is skipped.
            for c in 1..=m1 {
                for t in 0..t_symbols {
                    let sign = if (t & c).count_ones() % 2 == 0 {
                        scale
                    } else {
                        -scale
                    };
                    d[(t, c - 1)] = Complex::new(sign, T::zero());
                }
            }
        }
        SequenceKind::Dft => {
            for c in 1..=m1 {
                for t in 0..t_symbols {
                    let phase = -T::two_pi() * T::of((c * t) as f64) / T::of(t_symbols as f64);
                    let (s, co) = phase.sin_cos();
                    d[(t, c - 1)] = Complex::new(co * scale, s * scale);
                }
            }
        }
    }
    Ok(d)
}

/// Signal factor over one delay list: `[R_k]_{uv} = sum_n (2 pi n / (N T_s))^k
/// s[n] exp(-j 2 pi n (tau_v - tau_u) / (N T_s))`.
pub fn signal_factor<T: Real>(
    k: u8,
    delays: &[T],
    cfg: &WaveformConfig<T>,
) -> Result<DMatrix<Complex<T>>> {
    signal_factor_pairs(k, delays, delays, cfg)
}

/// Signal factor with distinct row/column delay lists (used for the
/// LOS-to-RIS coupling row and the LOS-only scalar).
pub fn signal_factor_pairs<T: Real>(
    k: u8,
    row_delays: &[T],
    col_delays: &[T],
    cfg: &WaveformConfig<T>,
) -> Result<DMatrix<Complex<T>>> {
    if k > 2 {
        return Err(Error::Argument("signal factor order k must be 0, 1 or 2".into()));
    }
    cfg.validate()?;
    let n_sub = cfg.n_subcarriers;
    let nts = T::of(n_sub as f64) * cfg.sample_period();
    let mut out = DMatrix::from_element(
        row_delays.len(),
        col_delays.len(),
        Complex::new(T::zero(), T::zero()),
    );
    for (u, tu) in row_delays.iter().enumerate() {
        for (v, tv) in col_delays.iter().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for n in 1..=n_sub {
                let w = T::two_pi() * T::of(n as f64) / nts;
                let weight = match k {
                    0 => T::one(),
                    1 => w,
                    _ => w * w,
                };
                let phase = -T::two_pi() * T::of(n as f64) * (*tv - *tu) / nts;
                let (s, c) = phase.sin_cos();
                let e = Complex::new(c, s);
                acc += e * Complex::new(weight * cfg.pilot_energy[n - 1], T::zero());
            }
            out[(u, v)] = acc;
        }
    }
    Ok(out)
}

/// Non-specular RIS reflection pathloss
/// `1/rho = lambda^4 (cos theta_tl cos theta_rl)^0.57 / (512 pi^2 d_rl^2 d_tl^2)`.
pub fn ris_pathloss<T: Real>(lambda: T, theta_tl: T, theta_rl: T, d_tl: T, d_rl: T) -> Result<T> {
    if d_tl <= T::zero() || d_rl <= T::zero() {
        return Err(Error::Argument("pathloss distances must be positive".into()));
    }
    let ct = theta_tl.cos();
    let cr = theta_rl.cos();
    if ct <= T::zero() || cr <= T::zero() {
        return Err(Error::ModelDomain(
            "RIS illuminated at or behind grazing incidence (cos <= 0)".into(),
        ));
    }
    let num = lambda.powi(4) * (ct * cr).powf(T::of(0.57));
    let den = T::of(512.0) * T::pi() * T::pi() * d_rl * d_rl * d_tl * d_tl;
    Ok(num / den)
}

/// Free-space LOS pathloss `1/rho = (lambda / (4 pi d))^2`.
pub fn los_pathloss<T: Real>(lambda: T, d: T) -> Result<T> {
    if d <= T::zero() {
        return Err(Error::Argument("LOS distance must be positive".into()));
    }
    let r = lambda / (T::of(4.0) * T::pi() * d);
    Ok(r * r)
}

/// Noise-to-signal scale `sigma^2 = N_0 B / (P_tx G_tx G_rx)` in linear
/// units. Pathloss is not folded in here; it enters each path's amplitude as
/// `beta / sqrt(rho)`.
pub fn effective_sigma2<T: Real>(cfg: &WaveformConfig<T>) -> T {
    let noise = dbm_to_watts(cfg.noise_density_dbm_hz) * cfg.bandwidth_hz;
    let signal =
        dbm_to_watts(cfg.tx_power_dbm) * db_to_linear(cfg.tx_gain_db) * db_to_linear(cfg.rx_gain_db);
    noise / signal
}

/// Gram-identity check used by the EFIM analysis preconditions.
pub fn is_unitary_gram<T: Real>(d_gamma: &DMatrix<Complex<T>>, tol: T) -> bool {
    let gram = d_gamma.adjoint() * d_gamma;
    let m = gram.ncols();
    let mut err = T::zero();
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { T::one() } else { T::zero() };
            err = err.max((gram[(i, j)] - Complex::new(target, T::zero())).modulus());
        }
    }
    err <= tol
}

/// Zero-column-sum check (the LOS separation restriction).
pub fn is_zero_sum<T: Real>(d_gamma: &DMatrix<Complex<T>>, tol: T) -> bool {
    let ones = DVector::from_element(d_gamma.nrows(), Complex::new(T::one(), T::zero()));
    let sums = d_gamma.adjoint() * ones;
    sums.iter().all(|z| z.modulus() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(n: usize, t: usize) -> WaveformConfig<f64> {
        WaveformConfig {
            carrier_hz: 30e9,
            bandwidth_hz: 0.1e9,
            n_subcarriers: n,
            n_symbols: t,
            beam_angles: vec![(0.5, 0.0)],
            pilot_energy: WaveformConfig::unit_pilots(n),
            tx_power_dbm: 5.0,
            tx_gain_db: 6.0,
            rx_gain_db: 2.0,
            noise_density_dbm_hz: -174.0,
        }
    }

    #[test]
    fn precoder_trace_is_one() {
        let lambda = 0.01f64;
        let g = ArrayGeometry::ura(2, 2, lambda / 2.0).unwrap();
        let beams = vec![(0.3, 0.1), (0.8, -1.0), (1.2, 2.0), (0.5, 0.5)];
        let f = directional_precoder(&g, &beams, lambda).unwrap();
        let trace: f64 = (f.adjoint() * &f).diagonal().iter().map(|z| z.re).sum();
        assert_relative_eq!(trace, 1.0, epsilon = 1e-12);
        // Unit-modulus entries imply equal column norms = 1/N_B.
        for c in f.column_iter() {
            assert_relative_eq!(c.norm_squared(), 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn precoder_single_element_single_beam() {
        let g = ArrayGeometry::ura(1, 1, 0.5f64).unwrap();
        let f = directional_precoder(&g, &[(0.4, 0.2)], 0.01).unwrap();
        assert_relative_eq!(f[(0, 0)].re, 1.0);
        assert_relative_eq!(f[(0, 0)].im, 0.0);
        assert!(directional_precoder(&g, &[], 0.01).is_err());
    }

    #[test]
    fn hadamard_sequences() {
        let d = sequence_matrix::<f64>(2, 1, SequenceKind::Hadamard).unwrap();
        assert_relative_eq!(d[(0, 0)].re, std::f64::consts::FRAC_1_SQRT_2);
        assert_relative_eq!(d[(1, 0)].re, -std::f64::consts::FRAC_1_SQRT_2);

        let d = sequence_matrix::<f64>(4, 3, SequenceKind::Hadamard).unwrap();
        assert!(is_unitary_gram(&d, 0.0));
        assert!(is_zero_sum(&d, 0.0));
    }

    #[test]
    fn dft_sequences() {
        let d = sequence_matrix::<f64>(4, 2, SequenceKind::Dft).unwrap();
        assert!(is_unitary_gram(&d, 1e-12));
        assert!(is_zero_sum(&d, 1e-12));
        let d = sequence_matrix::<f64>(5, 3, SequenceKind::Dft).unwrap();
        assert!(is_unitary_gram(&d, 1e-12));
        assert!(is_zero_sum(&d, 1e-12));
    }

    #[test]
    fn sequence_capacity_and_size_errors() {
        assert!(matches!(
            sequence_matrix::<f64>(4, 4, SequenceKind::Hadamard),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            sequence_matrix::<f64>(6, 2, SequenceKind::Hadamard),
            Err(Error::Argument(_))
        ));
        assert!(sequence_matrix::<f64>(3, 2, SequenceKind::Dft).is_ok());
    }

    #[test]
    fn signal_factor_trivia() {
        let c = cfg(1, 2);
        let r0 = signal_factor(0, &[1e-7, 1e-7], &c).unwrap();
        for z in r0.iter() {
            assert_relative_eq!(z.re, 1.0, epsilon = 1e-12);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-12);
        }
        // Diagonal of R_1 is sum_n 2 pi n / (N T_s) regardless of delays.
        let c = cfg(8, 2);
        let nts = 8.0 * c.sample_period();
        let expect: f64 = (1..=8).map(|n| 2.0 * std::f64::consts::PI * n as f64 / nts).sum();
        let r1 = signal_factor(1, &[3e-7, 5e-7], &c).unwrap();
        assert_relative_eq!(r1[(0, 0)].re, expect, max_relative = 1e-12);
        assert_relative_eq!(r1[(1, 1)].re, expect, max_relative = 1e-12);
    }

    #[test]
    fn signal_factor_matches_direct_sum() {
        // Brute-force oracle for two delays differing by one sample period.
        let c = cfg(8, 2);
        let ts = c.sample_period();
        let delays = [2e-7, 2e-7 + ts];
        let nts = 8.0 * ts;
        for k in 0..=2u8 {
            let r = signal_factor(k, &delays, &c).unwrap();
            for u in 0..2 {
                for v in 0..2 {
                    let mut acc = Complex::new(0.0, 0.0);
                    for n in 1..=8 {
                        let w = 2.0 * std::f64::consts::PI * n as f64 / nts;
                        let phase = -2.0 * std::f64::consts::PI * n as f64
                            * (delays[v] - delays[u])
                            / nts;
                        acc += Complex::new(phase.cos(), phase.sin()) * w.powi(k as i32);
                    }
                    assert_relative_eq!(r[(u, v)].re, acc.re, max_relative = 1e-12);
                    assert_relative_eq!(r[(u, v)].im, acc.im, max_relative = 1e-10, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn r0_is_hermitian_psd() {
        let c = cfg(16, 4);
        let delays = [1e-7, 1.3e-7, 2.9e-7];
        let r0 = signal_factor(0, &delays, &c).unwrap();
        assert_relative_eq!((&r0 - r0.adjoint()).norm(), 0.0, epsilon = 1e-9);
        let eig = nalgebra::SymmetricEigen::new(r0);
        for ev in eig.eigenvalues.iter() {
            assert!(*ev >= -1e-9);
        }
    }

    #[test]
    fn pathloss_models() {
        // cos = 1 on both legs reduces to lambda^4 / (512 pi^2 d^4).
        let lambda = 0.01f64;
        let v = ris_pathloss(lambda, 0.0, 0.0, 10.0, 10.0).unwrap();
        assert_relative_eq!(
            v,
            lambda.powi(4) / (512.0 * std::f64::consts::PI.powi(2) * 1e4),
            max_relative = 1e-12
        );
        // d^2 law on each leg.
        let base = ris_pathloss(lambda, 0.5, 0.4, 20.0, 15.0).unwrap();
        let doubled = ris_pathloss(lambda, 0.5, 0.4, 40.0, 15.0).unwrap();
        assert_relative_eq!(base / doubled, 4.0, max_relative = 1e-12);
        // Hand evaluation: lambda = 0.01, both angles 30 deg, both legs 20 m.
        let th = 30f64.to_radians();
        let hand = 1e-8 * (th.cos() * th.cos()).powf(0.57)
            / (512.0 * std::f64::consts::PI.powi(2) * 20f64.powi(2) * 20f64.powi(2));
        assert_relative_eq!(
            ris_pathloss(0.01, th, th, 20.0, 20.0).unwrap(),
            hand,
            max_relative = 1e-12
        );
        assert!(ris_pathloss(0.01, 1.6, 0.3, 10.0, 10.0).is_err());

        assert_relative_eq!(
            los_pathloss(0.01f64, 0.01 / (4.0 * std::f64::consts::PI)).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        let b = los_pathloss(0.01f64, 10.0).unwrap();
        assert_relative_eq!(b, (0.01 / (40.0 * std::f64::consts::PI)).powi(2));
        assert_relative_eq!(b / los_pathloss(0.01f64, 20.0).unwrap(), 4.0, max_relative = 1e-12);
        assert!(los_pathloss(0.01f64, 0.0).is_err());
    }

    #[test]
    fn sigma2_db_arithmetic() {
        let c = cfg(16, 4);
        // dB -> linear oracle: 10^((-174 - 30)/10) * 1e8 / (10^((5-30)/10) * 10^0.8).
        let expect = 10f64.powf(-20.4) * 1e8 / (10f64.powf(-2.5) * 10f64.powf(0.8));
        assert_relative_eq!(effective_sigma2(&c), expect, max_relative = 1e-12);

        // P = N_0 B with zero gains gives sigma^2 = 1.
        let mut c1 = c.clone();
        c1.tx_gain_db = 0.0;
        c1.rx_gain_db = 0.0;
        c1.noise_density_dbm_hz = -174.0;
        c1.tx_power_dbm = -174.0 + 80.0; // N_0 * 1e8 in dBm
        assert_relative_eq!(effective_sigma2(&c1), 1.0, max_relative = 1e-12);

        // +3 dB transmit power scales sigma^2 by 10^(-0.3).
        let mut c2 = c.clone();
        c2.tx_power_dbm += 3.0;
        assert_relative_eq!(
            effective_sigma2(&c2) / effective_sigma2(&c),
            10f64.powf(-0.3),
            max_relative = 1e-12
        );
    }
}
