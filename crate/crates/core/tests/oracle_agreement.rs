//! Closed-form FIM blocks against the finite-difference oracle.

use ris_bounds::fim::{assemble_bayesian_fim, assemble_data_fim};
use ris_bounds::labels::ParamKind;
use ris_bounds::linalg::rel_frobenius;
use ris_bounds::oracle::{fd_fim, FdOptions};
use ris_bounds::scenario::presets::{desk_scenario, random_scenario};
use ris_bounds::scenario::GammaSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn richardson() -> FdOptions<f64> {
    FdOptions {
        richardson: true,
        ..FdOptions::default()
    }
}

#[test]
fn desk_scenario_block_by_block() {
    let sc = desk_scenario(2);
    let closed = assemble_data_fim(&sc).unwrap();
    let fd = fd_fim(&sc, &richardson()).unwrap();
    assert_eq!(closed.labels(), fd.labels());
    // Per kind-pair diagnostics give a sharper failure than one global norm.
    let labels = closed.labels().to_vec();
    let mut worst: (f64, String) = (0.0, String::new());
    for ka in ParamKind::RIS_KINDS {
        for kb in ParamKind::RIS_KINDS {
            let rows: Vec<_> = labels.iter().copied().filter(|l| l.kind == ka && l.path > 0).collect();
            let cols: Vec<_> = labels.iter().copied().filter(|l| l.kind == kb && l.path > 0).collect();
            let a = closed.block(&rows, &cols).unwrap();
            let b = fd.block(&rows, &cols).unwrap();
            let denom = a.norm().max(fd.values().norm() * 1e-12);
            let frac = if denom == 0.0 { (a - b).norm() } else { (a - b).norm() / denom };
            if frac > worst.0 {
                worst = (frac, format!("{ka} x {kb}"));
            }
        }
    }
    eprintln!("worst RIS block pair: {} at {}", worst.1, worst.0);
    let err = rel_frobenius(fd.values(), closed.values());
    eprintln!("relative Frobenius (full matrix): {err:.3e}");
    assert!(err <= 1e-6, "oracle mismatch {err}, worst pair {} ({})", worst.1, worst.0);
}

#[test]
fn random_scenarios_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..3 {
        let mut sc = random_scenario(&mut rng, 1 + trial % 2);
        if trial == 1 {
            sc.include_los = false;
        }
        if trial == 2 {
            for r in &mut sc.ris {
                r.gamma = GammaSpec::Ones;
            }
        }
        let closed = assemble_bayesian_fim(&sc).unwrap();
        let mut fd = fd_fim(&sc, &richardson()).unwrap();
        let prior =
            ris_bounds::fim::prior_fim_for_labels(sc.beta_prior, fd.labels()).unwrap();
        fd = fd.add(&prior).unwrap();
        let err = rel_frobenius(fd.values(), closed.values());
        eprintln!("trial {trial}: relative Frobenius {err:.3e}");
        assert!(err <= 1e-6, "trial {trial} mismatch {err}");
    }
}
