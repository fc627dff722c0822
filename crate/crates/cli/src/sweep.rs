//! Monte-Carlo sweeps: one scenario variable stepped over a value list, with
//! random (x, y) placements per trial and deterministic per-trial seeds.

use crate::output::{write_sweep_csv, SweepRow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ris_bounds::arrays::ArrayGeometry;
use ris_bounds::localization::evaluate_bounds;
use ris_bounds::scenario::presets::randomize_placements;
use ris_bounds::waveform::{SequenceKind, WaveformConfig};
use ris_bounds::{BoundsReport64, Scenario64};
use serde::Deserialize;
use std::path::Path;

pub enum SweepError {
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variable {
    RxElements,
    RisElements,
    RisCount,
    SigmaM,
    TxPower,
}

impl Variable {
    fn parse(s: &str) -> Result<Self, SweepError> {
        match s {
            "n_rx_elements" => Ok(Variable::RxElements),
            "n_ris_elements" => Ok(Variable::RisElements),
            "n_ris" => Ok(Variable::RisCount),
            "sigma_m" => Ok(Variable::SigmaM),
            "tx_power" => Ok(Variable::TxPower),
            other => Err(SweepError::Input(format!(
                "unknown sweep variable {other:?}; expected one of \
                 n_rx_elements, n_ris_elements, n_ris, sigma_m, tx_power"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Variable::RxElements => "n_rx_elements",
            Variable::RisElements => "n_ris_elements",
            Variable::RisCount => "n_ris",
            Variable::SigmaM => "sigma_m",
            Variable::TxPower => "tx_power",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: String,
    values: Vec<f64>,
    trials: Option<usize>,
}

fn square_side(value: f64, what: &str) -> Result<usize, String> {
    let n = value.round() as usize;
    let side = (n as f64).sqrt().round() as usize;
    if n == 0 || side * side != n {
        return Err(format!("{what} = {value} is not a positive perfect square"));
    }
    Ok(side)
}

/// Trial seed derived from (base seed, value index, trial index) only, so
/// sweeps are reproducible across worker counts.
fn trial_seed(base: u64, value_index: u64, trial: u64) -> u64 {
    let mut z = base ^ (value_index << 40 | trial).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn apply_variable(sc: &mut Scenario64, variable: Variable, value: f64) -> Result<(), String> {
    let lambda = sc.waveform.wavelength();
    match variable {
        Variable::RxElements => {
            let side = square_side(value, "n_rx_elements")?;
            sc.ue.geometry =
                ArrayGeometry::ura(side, side, lambda / 2.0).map_err(|e| e.to_string())?;
        }
        Variable::RisElements => {
            let side = square_side(value, "n_ris_elements")?;
            for r in &mut sc.ris {
                r.geometry =
                    ArrayGeometry::ura(side, side, lambda / 2.0).map_err(|e| e.to_string())?;
                // Element-count changes invalidate explicit coefficient lists.
                if matches!(r.gamma, ris_bounds::scenario::GammaSpec::Explicit(_)) {
                    r.gamma = ris_bounds::scenario::GammaSpec::RandomPhase;
                }
            }
        }
        Variable::RisCount => {
            let count = value.round() as usize;
            if count == 0 {
                return Err("n_ris must be at least 1".into());
            }
            if sc.ris.is_empty() {
                return Err("base scenario has no RIS to replicate".into());
            }
            let template = sc.ris.last().unwrap().clone();
            sc.ris.truncate(count);
            while sc.ris.len() < count {
                sc.ris.push(template.clone());
            }
            // Keep the symbol budget legal for the new surface count.
            if sc.waveform.n_symbols <= count {
                let mut t = sc.waveform.n_symbols.max(2);
                while t <= count || (sc.sequence == SequenceKind::Hadamard && !t.is_power_of_two())
                {
                    t += 1;
                }
                sc.waveform.n_symbols = t;
            }
        }
        Variable::SigmaM => {
            if value <= 0.0 {
                return Err("sigma_m must be positive".into());
            }
            for r in &mut sc.ris {
                if !r.known {
                    r.sigma2_m = Some(value);
                }
            }
        }
        Variable::TxPower => {
            sc.waveform.tx_power_dbm = value;
        }
    }
    // Pilot list follows the subcarrier count (untouched here, but keep the
    // invariant in case future variables resize it).
    if sc.waveform.pilot_energy.len() != sc.waveform.n_subcarriers {
        sc.waveform.pilot_energy = WaveformConfig::unit_pilots(sc.waveform.n_subcarriers);
    }
    Ok(())
}

fn run_trial(
    base: &Scenario64,
    variable: Variable,
    value: f64,
    seed: u64,
) -> Result<BoundsReport64, String> {
    let mut sc = base.clone();
    sc.seed = seed;
    apply_variable(&mut sc, variable, value)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5be5_d395_37bd_2c61);
    randomize_placements(&mut sc, &mut rng).map_err(|e| e.to_string())?;
    sc.validate().map_err(|e| e.to_string())?;
    evaluate_bounds(&sc).map_err(|e| e.to_string())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn run(
    base: &Scenario64,
    spec_path: &Path,
    out: Option<&Path>,
    trials_override: Option<usize>,
    workers: Option<usize>,
) -> Result<(), SweepError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| SweepError::Input(format!("cannot read {}: {e}", spec_path.display())))?;
    let raw: RawSweep = toml::from_str(&text)
        .map_err(|e| SweepError::Input(format!("{}: {e}", spec_path.display())))?;
    let variable = Variable::parse(&raw.variable)?;
    if raw.values.is_empty() {
        return Err(SweepError::Input("sweep value list is empty".into()));
    }
    let trials = trials_override.or(raw.trials).unwrap_or(200);
    if trials == 0 {
        return Err(SweepError::Input("trials must be at least 1".into()));
    }

    let jobs: Vec<(usize, u64)> = raw
        .values
        .iter()
        .enumerate()
        .flat_map(|(vi, _)| (0..trials as u64).map(move |t| (vi, t)))
        .collect();

    let execute = || {
        jobs.par_iter()
            .map(|(vi, t)| {
                let value = raw.values[*vi];
                let seed = trial_seed(base.seed, *vi as u64, *t);
                (*vi, *t, seed, run_trial(base, variable, value, seed))
            })
            .collect::<Vec<_>>()
    };
    let mut results = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SweepError::Input(e.to_string()))?
            .install(execute),
        None => execute(),
    };
    results.sort_by_key(|(vi, t, _, _)| (*vi, *t));

    let mut rows = Vec::new();
    for (vi, value) in raw.values.iter().enumerate() {
        let mut pebs = Vec::new();
        let mut oebs = Vec::new();
        let mut spebs = Vec::new();
        let mut soebs = Vec::new();
        let mut failures = 0usize;
        for (_, t, seed, outcome) in results.iter().filter(|(i, _, _, _)| *i == vi) {
            match outcome {
                Ok(report) => {
                    if report.speb.is_finite() {
                        pebs.push(report.peb());
                        oebs.push(report.oeb());
                        spebs.push(report.speb);
                        soebs.push(report.soeb);
                    }
                    rows.push(SweepRow {
                        variable: variable.name().to_string(),
                        value: *value,
                        trial: Some(*t),
                        stat: String::new(),
                        seed: Some(*seed),
                        speb: Some(report.speb),
                        soeb: Some(report.soeb),
                        peb: Some(report.peb()),
                        oeb: Some(report.oeb()),
                        singular: Some(report.singular),
                        degraded: Some(report.degraded),
                        failures: None,
                        error: String::new(),
                    });
                }
                Err(msg) => {
                    failures += 1;
                    rows.push(SweepRow {
                        variable: variable.name().to_string(),
                        value: *value,
                        trial: Some(*t),
                        stat: String::new(),
                        seed: Some(*seed),
                        speb: None,
                        soeb: None,
                        peb: None,
                        oeb: None,
                        singular: None,
                        degraded: None,
                        failures: None,
                        error: msg.clone(),
                    });
                }
            }
        }
        let mut sorted_peb = pebs.clone();
        sorted_peb.sort_by(f64::total_cmp);
        let mut sorted_oeb = oebs.clone();
        sorted_oeb.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        for (stat, peb, oeb) in [
            ("mean", mean(&pebs), mean(&oebs)),
            ("p05", percentile(&sorted_peb, 0.05), percentile(&sorted_oeb, 0.05)),
            ("p95", percentile(&sorted_peb, 0.95), percentile(&sorted_oeb, 0.95)),
        ] {
            rows.push(SweepRow {
                variable: variable.name().to_string(),
                value: *value,
                trial: None,
                stat: stat.to_string(),
                seed: None,
                speb: if stat == "mean" { Some(mean(&spebs)) } else { None },
                soeb: if stat == "mean" { Some(mean(&soebs)) } else { None },
                peb: Some(peb),
                oeb: Some(oeb),
                singular: None,
                degraded: None,
                failures: Some(failures),
                error: String::new(),
            });
        }
    }

    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| SweepError::Input(format!("cannot create {}: {e}", path.display())))?;
            write_sweep_csv(&mut f, &rows).map_err(|e| SweepError::Input(e.to_string()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_sweep_csv(&mut lock, &rows).map_err(|e| SweepError::Input(e.to_string()))?;
        }
    }
    Ok(())
}
