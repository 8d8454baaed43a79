//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spectrum_auction::harness::{
    audit_truthfulness, derive_seed, dominant_values, generate_instance, generate_values,
    welfare_experiment, AuditConfig, GeneratorSpec, WelfareConfig, CONFIDENCE_Z,
};
use spectrum_auction::mechanism::prefilter;
use spectrum_auction::model::{
    check_feasible, downward_closure_probe, sinr_ratio, EnvironmentKind, Instance, PowerScheme,
    DEFAULT_TOLERANCE,
};
use spectrum_auction::oracle::{
    brute_force_max_cardinality, brute_force_max_welfare, ExactPacking, OracleLimits,
};
use spectrum_auction::packing::{
    unweighted_packing_pc, Memoized, MultiChannelExtension, Packer, PackerSpec,
};

const ALL: [EnvironmentKind; 4] = EnvironmentKind::ALL;

type Check = fn() -> Verdict;

struct Verdict {
    passed: bool,
    detail: String,
}

/// A generator spec with randomized geometry and physics, sized `n × k`.
fn varied_spec(kind: EnvironmentKind, n: usize, k: usize, rng: &mut ChaCha8Rng) -> GeneratorSpec {
    let mut spec = GeneratorSpec::new(kind, n, k);
    spec.alpha = rng.random_range(2.0..4.0);
    spec.beta = rng.random_range(0.5..2.5);
    spec.noise = if rng.random_bool(0.2) {
        0.0
    } else {
        rng.random_range(0.1..2.0)
    };
    spec.area = rng.random_range(3.0..60.0);
    spec.max_length = rng.random_range(1.0..8.0);
    spec.min_length = rng.random_range(0.5..=spec.max_length);
    spec.density = rng.random_range(0.0..0.6);
    spec.scheme = [
        PowerScheme::Uniform,
        PowerScheme::Linear,
        PowerScheme::SquareRoot,
    ][rng.random_range(0..3)];
    spec.base_power = rng.random_range(1.0..500.0);
    spec.grid_side = 3;
    spec.edge_keep = rng.random_range(0.4..0.8);
    spec
}

fn draw_instance(kind: EnvironmentKind, n_max: usize, channels: &[usize], seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=n_max);
    let k = channels[rng.random_range(0..channels.len())];
    let spec = varied_spec(kind, n, k, &mut rng);
    generate_instance(&spec, rng.random()).expect("valid generator spec")
}

fn criterion_1() -> Verdict {
    let per_env: Vec<(usize, usize, f64, Option<String>)> = ALL
        .par_iter()
        .map(|&kind| {
            let results: Vec<_> = (0..200u64)
                .into_par_iter()
                .map(|i| {
                    let seed = derive_seed(1000 + kind as u64, i);
                    let instance = draw_instance(kind, 12, &[1, 2, 3], seed);
                    let values = generate_values(instance.num_bidders(), seed);
                    let epsilon = [0.1, 0.3, 0.5][(i % 3) as usize];
                    let packer = PackerSpec::default_for(kind).build();
                    let config = AuditConfig {
                        epsilon,
                        tapes: 10,
                        deviations: 20,
                        seed,
                    };
                    let report = audit_truthfulness(&instance, &values, packer.as_ref(), &config)
                        .expect("audit runs");
                    let replay = report.violations.first().map(|v| {
                        format!(
                            "{kind} instance seed {seed} tape {} bidder {}",
                            v.tape_seed, v.bidder
                        )
                    });
                    (
                        report.entries.len(),
                        report.violation_count(),
                        report.max_violation,
                        replay,
                    )
                })
                .collect();
            results.into_iter().fold((0, 0, 0.0, None), |acc, r| {
                (
                    acc.0 + r.0,
                    acc.1 + r.1,
                    f64::max(acc.2, r.2),
                    acc.3.or(r.3),
                )
            })
        })
        .collect();
    let comparisons: usize = per_env.iter().map(|r| r.0).sum();
    let violations: usize = per_env.iter().map(|r| r.1).sum();
    let max = per_env.iter().map(|r| r.2).fold(0.0, f64::max);
    let mut detail = format!(
        "{comparisons} comparisons over 800 instances, {violations} violations, max gain {max:e}"
    );
    if let Some(replay) = per_env.into_iter().find_map(|r| r.3) {
        detail += &format!("; first: {replay}");
    }
    Verdict {
        passed: violations == 0 && comparisons > 0,
        detail,
    }
}

fn criterion_2() -> Verdict {
    let exact = ExactPacking::default();
    let rows: Vec<(bool, f64, f64)> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let kind = ALL[(i % 4) as usize];
            let seed = derive_seed(2000, i);
            let instance = draw_instance(kind, 8, &[1, 2], seed);
            let values = generate_values(instance.num_bidders(), seed);
            let cached = Memoized::new(&exact, &instance);
            let config = WelfareConfig {
                epsilon: 0.1,
                trials: 2000,
                seed,
                oracle: true,
            };
            let (stats, _) =
                welfare_experiment(&instance, &values, &cached, &config).expect("experiment runs");
            let floor = stats.floor.expect("exact packer has psi = 1");
            (stats.passed(), stats.welfare.mean, floor)
        })
        .collect();
    let failures = rows.iter().filter(|r| !r.0).count();
    let worst = rows
        .iter()
        .filter(|r| r.2 > 0.0)
        .map(|r| r.1 / r.2)
        .fold(f64::INFINITY, f64::min);
    Verdict {
        passed: failures == 0,
        detail: format!(
            "50 instances x 2000 tapes, {failures} below floor - 3 SE, min mean/floor {worst:.2}"
        ),
    }
}

fn criterion_3() -> Verdict {
    let epsilon = 0.1;
    let rows: Vec<(bool, f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let kind = ALL[(i % 4) as usize];
            let seed = derive_seed(3000, i);
            let instance = draw_instance(kind, 10, &[1, 2, 3], seed);
            let n = instance.num_bidders();
            let survivors = prefilter(&instance).expect("prefilter");
            let (mut values, star) = dominant_values(n, 100.0, seed).expect("valid");
            if let Some(&first) = survivors.first() {
                if !survivors.contains(&star) {
                    values.swap(star, first);
                }
            }
            let b_star = if survivors.is_empty() { 0.0 } else { 100.0 };
            let packer = PackerSpec::default_for(kind).build();
            let config = WelfareConfig {
                epsilon,
                trials: 2000,
                seed,
                oracle: false,
            };
            let (stats, _) =
                welfare_experiment(&instance, &values, packer.as_ref(), &config).expect("runs");
            let target = epsilon * b_star;
            let met = stats.welfare.mean >= target - CONFIDENCE_Z * stats.welfare.std_error;
            (met && stats.passed(), stats.welfare.mean, target)
        })
        .collect();
    let failures = rows.iter().filter(|r| !r.0).count();
    let min_mean = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Verdict {
        passed: failures == 0,
        detail: format!("20 instances x 2000 tapes, eps*B* = 10, min mean welfare {min_mean:.3}, {failures} failures"),
    }
}

fn criterion_4() -> Verdict {
    let kinds = [
        EnvironmentKind::SinrPowerControl,
        EnvironmentKind::SinrFixedPower,
        EnvironmentKind::ConflictGraph,
    ];
    let bound = 1.0 - (-1.0f64).exp();
    let rows: Vec<(bool, f64, bool)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let kind = kinds[(i % 3) as usize];
            let seed = derive_seed(4000, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(5..=10);
            let mut spec = varied_spec(kind, n, rng.random_range(2..=3), &mut rng);
            spec.area = rng.random_range(2.0..20.0);
            spec.density = rng.random_range(0.4..0.9);
            let instance = generate_instance(&spec, seed).expect("valid generator spec");
            let extension = MultiChannelExtension::new(Box::new(ExactPacking::default()));
            let all: Vec<usize> = instance.bidders().collect();
            let alloc = extension.pack(&all, &instance).expect("packs");
            let feasible = check_feasible(&instance, &alloc, DEFAULT_TOLERANCE)
                .expect("checks")
                .is_feasible();
            let opt = brute_force_max_cardinality(&instance, &all, OracleLimits::default())
                .expect("solves")
                .best_value;
            let got = alloc.num_winners() as f64;
            let ratio = if opt > 0.0 { got / opt } else { 1.0 };
            (
                feasible && got >= bound * opt - 1e-12,
                ratio,
                opt < all.len() as f64,
            )
        })
        .collect();
    let failures = rows.iter().filter(|r| !r.0).count();
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Verdict {
        passed: failures == 0,
        detail: format!(
            "500 instances ({} with OPT < n), min ratio {min:.4} vs bound {bound:.4}, {failures} violations",
            rows.iter().filter(|r| r.2).count()
        ),
    }
}

fn criterion_5() -> Verdict {
    let rows: Vec<Result<usize, String>> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(5000, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..=30);
            let k = rng.random_range(1..=3);
            let spec = varied_spec(EnvironmentKind::SinrPowerControl, n, k, &mut rng);
            let instance = generate_instance(&spec, seed).map_err(|e| e.to_string())?;
            let candidates: Vec<usize> = instance
                .bidders()
                .filter(|_| rng.random_bool(0.8))
                .collect();
            let alloc = unweighted_packing_pc(&candidates, &instance)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let powers = alloc.powers.as_ref().ok_or("no powers")?;
            for set in &alloc.channels {
                for &link in set {
                    let sinr =
                        sinr_ratio(&instance, link, set, powers).map_err(|e| e.to_string())?;
                    if sinr < instance.params().beta - 1e-9 {
                        return Err(format!("seed {seed}: link {link} sinr {sinr}"));
                    }
                }
            }
            Ok(alloc.num_winners())
        })
        .collect();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    let winners: usize = rows.iter().filter_map(|r| r.as_ref().ok()).sum();
    Verdict {
        passed: errors.is_empty(),
        detail: format!(
            "1000 instances, {winners} winners checked, {} failures{}",
            errors.len(),
            errors
                .first()
                .map(|e| format!("; first: {e}"))
                .unwrap_or_default()
        ),
    }
}

fn criterion_6() -> Verdict {
    let rows: Vec<Result<(), String>> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let kind = ALL[(i % 4) as usize];
            let seed = derive_seed(6000, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let instance = draw_instance(kind, 10, &[1, 2, 3], seed);
            let candidates: Vec<usize> = instance
                .bidders()
                .filter(|_| rng.random_bool(0.7))
                .collect();
            let alloc = if i % 8 < 2 && instance.num_bidders() <= 8 {
                brute_force_max_cardinality(&instance, &candidates, OracleLimits::default())
                    .map_err(|e| e.to_string())?
                    .witness
            } else {
                PackerSpec::default_for(kind)
                    .build()
                    .pack(&candidates, &instance)
                    .map_err(|e| e.to_string())?
            };
            if !check_feasible(&instance, &alloc, DEFAULT_TOLERANCE)
                .map_err(|e| e.to_string())?
                .is_feasible()
            {
                return Err(format!("{kind} seed {seed}: base allocation infeasible"));
            }
            let winners = alloc.winners();
            if winners.is_empty() {
                return Ok(());
            }
            let removed = winners[rng.random_range(0..winners.len())];
            let report =
                downward_closure_probe(&instance, &alloc, removed).map_err(|e| e.to_string())?;
            if report {
                Ok(())
            } else {
                Err(format!(
                    "{kind} seed {seed}: removing {removed} broke feasibility"
                ))
            }
        })
        .collect();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    Verdict {
        passed: errors.is_empty(),
        detail: format!(
            "1000 probes, {} violations{}",
            errors.len(),
            errors
                .first()
                .map(|e| format!("; first: {e}"))
                .unwrap_or_default()
        ),
    }
}

fn cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_spectrum-auction"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .expect("dir")
        .map(|e| {
            let e = e.expect("entry");
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).expect("read"),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_7() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();
    let p = |name: &str| root.join(name).to_string_lossy().into_owned();
    let mut problems = Vec::new();
    let mut compared = 0;
    for kind in ALL {
        let inst = p(&format!("{kind}.json"));
        let k = if kind == EnvironmentKind::SecondaryNetwork {
            "2"
        } else {
            "1"
        };
        let code = cli(&[
            "gen",
            "--env",
            kind.name(),
            "--n",
            "7",
            "--k",
            k,
            "--seed",
            "17",
            "--out",
            &inst,
        ]);
        if code != 0 {
            problems.push(format!("gen {kind} exited {code}"));
            continue;
        }
        for rep in 0..2 {
            let run_out = p(&format!("{kind}-run-{rep}.json"));
            let codes = [
                cli(&[
                    "run",
                    "--instance",
                    &inst,
                    "--seed",
                    "5",
                    "--epsilon",
                    "0.3",
                    "--out",
                    &run_out,
                ]),
                cli(&[
                    "bench",
                    "--instance",
                    &inst,
                    "--seed",
                    "5",
                    "--trials",
                    "300",
                    "--oracle",
                    "--out",
                    &p(&format!("{kind}-bench-{rep}")),
                ]),
                cli(&[
                    "audit",
                    "--instance",
                    &inst,
                    "--seed",
                    "5",
                    "--epsilon",
                    "0.3",
                    "--out",
                    &p(&format!("{kind}-audit-{rep}")),
                ]),
            ];
            if codes.iter().any(|&c| c != 0) {
                problems.push(format!("{kind} run/bench/audit exit codes {codes:?}"));
            }
        }
        let same_run = fs::read(p(&format!("{kind}-run-0.json"))).ok()
            == fs::read(p(&format!("{kind}-run-1.json"))).ok();
        let same_bench = dir_bytes(&root.join(format!("{kind}-bench-0")))
            == dir_bytes(&root.join(format!("{kind}-bench-1")));
        let same_audit = dir_bytes(&root.join(format!("{kind}-audit-0")))
            == dir_bytes(&root.join(format!("{kind}-audit-1")));
        compared += 3;
        for (name, same) in [
            ("run", same_run),
            ("bench", same_bench),
            ("audit", same_audit),
        ] {
            if !same {
                problems.push(format!("{kind} {name} output differs"));
            }
        }
    }
    let bad_input = cli(&["run", "--instance", &p("missing.json")]);
    if bad_input != 2 {
        problems.push(format!("missing instance exited {bad_input}, expected 2"));
    }
    Verdict {
        passed: problems.is_empty(),
        detail: format!(
            "{compared} repeated invocations compared byte-for-byte, {} problems{}",
            problems.len(),
            problems
                .first()
                .map(|e| format!("; first: {e}"))
                .unwrap_or_default()
        ),
    }
}

fn criterion_8() -> Verdict {
    let rows: Vec<Result<bool, String>> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let kind = ALL[(i % 4) as usize];
            let seed = derive_seed(8000, i);
            let instance = draw_instance(kind, 10, &[1, 2, 3], seed);
            let n = instance.num_bidders();
            let all: Vec<usize> = instance.bidders().collect();
            let limits = OracleLimits::default();
            let err = |e: spectrum_auction::Error| format!("{kind} seed {seed}: {e}");
            let unit = brute_force_max_welfare(&instance, &vec![1.0; n], limits).map_err(err)?;
            let card = brute_force_max_cardinality(&instance, &all, limits).map_err(err)?;
            if unit.best_value != card.best_value {
                return Err(format!(
                    "{kind} seed {seed}: unit welfare {} vs cardinality {}",
                    unit.best_value, card.best_value
                ));
            }
            let values = generate_values(n, seed);
            let best = brute_force_max_welfare(&instance, &values, limits).map_err(err)?;
            let default = PackerSpec::default_for(kind);
            for spec in [default.clone(), PackerSpec::Extend(Box::new(default))] {
                let alloc = spec.build().pack(&all, &instance).map_err(err)?;
                if alloc.num_winners() as f64 > card.best_value {
                    return Err(format!(
                        "{kind} seed {seed}: {spec} packed {} > {}",
                        alloc.num_winners(),
                        card.best_value
                    ));
                }
                if alloc.welfare(&values) > best.best_value + 1e-9 {
                    return Err(format!(
                        "{kind} seed {seed}: {spec} welfare exceeds optimum"
                    ));
                }
            }
            Ok(card.best_value < n as f64)
        })
        .collect();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    Verdict {
        passed: errors.is_empty(),
        detail: format!(
            "100 instances ({} with OPT < n), {} inconsistencies{}",
            rows.iter().filter(|r| matches!(r, Ok(true))).count(),
            errors.len(),
            errors
                .first()
                .map(|e| format!("; first: {e}"))
                .unwrap_or_default()
        ),
    }
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1 universal truthfulness audit", criterion_1),
        ("2 welfare floor with exact packer", criterion_2),
        ("3 dominant bidder", criterion_3),
        ("4 multi-channel extension bound", criterion_4),
        ("5 power-control packing soundness", criterion_5),
        ("6 downward closure", criterion_6),
        ("7 CLI determinism", criterion_7),
        ("8 oracle self-consistency", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let status = if verdict.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{name}] {} ({:.1}s)",
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        if !verdict.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
