//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Long-running criteria (full density-matrix runs and the m = 50 scan
//! point) are skipped unless `--include-ignored` or `--ignored` is given:
//!
//! ```text
//! cargo test --release --test acceptance -- --include-ignored
//! ```
//!
//! A trailing positional argument filters criteria by id, e.g. `6b`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::Instant;

use paritygate::dynamics::{
    evolve_lindblad, evolve_schrodinger, expm_oracle, CollapseChannel, ConvergenceCheck, IntegratorConfig,
    TimeDependentHamiltonian,
};
use paritygate::encoding::{make_encoding, EncodingFamilySpec};
use paritygate::experiments::{run_and_write, run_experiment, Experiment, Profile, ResultRow, SweepSpec};
use paritygate::gate::{verify_truth_table, GateSpec};
use paritygate::ghz::{build_scenario, prepare_ideal, GhzKind, ScenarioInput};
use paritygate::hilbert::{coherent_state, mode_operators, tensor_state, DensityMatrix, HilbertLayout, Ket};
use paritygate::model::{
    build_hamiltonian, derive_detunings, effective_params, solve_coupling, DecoherenceParams, HamiltonianTier,
    SystemParams, TargetParity, Toggles,
};
use paritygate::{rad_per_s_to_ghz as ghz, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn table1() -> SystemParams {
    SystemParams::table1()
        .with_solved_couplings(TargetParity::Even, 10)
        .expect("reference parameters solve")
}

fn gate_numbers() -> (f64, i64) {
    let p = table1();
    let det = derive_detunings(&p).unwrap();
    let eff = effective_params(&p, &det).unwrap();
    let t = eff.gate_time().unwrap();
    (t, (eff.eta * t / (2.0 * PI)).round() as i64)
}

fn alpha() -> C64 {
    C64::new(1.1, 0.0)
}

fn truth_table_identity() -> Outcome {
    let (t, s) = gate_numbers();
    let families = EncodingFamilySpec::catalogue();
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 2..=4 {
        let mut sets: Vec<Vec<&EncodingFamilySpec>> = families.iter().map(|f| vec![f; n]).collect();
        sets.push((0..n).map(|j| &families[j % families.len()]).collect());
        for set in sets {
            let encs = match set.iter().map(|f| make_encoding(f, 20)).collect::<Result<Vec<_>, _>>() {
                Ok(e) => e,
                Err(e) => return outcome(false, format!("encoding failed: {e}")),
            };
            match verify_truth_table(&GateSpec::exact(encs, t, s, 10)) {
                Ok((table, _)) => worst = worst.max(table.deviation_from_ideal()),
                Err(e) => return outcome(false, format!("n = {n}: {e}")),
            }
            count += 1;
        }
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:.2e} over {count} tables (limit 1e-9)"))
}

fn parameter_pipeline() -> Outcome {
    let p = SystemParams::table1();
    let det = derive_detunings(&p).unwrap();
    let g2 = ghz(solve_coupling(TargetParity::Even, 10, det.delta[0], det.delta[1]).unwrap());
    let g3 = ghz(solve_coupling(TargetParity::Even, 10, det.delta[0], det.delta[2]).unwrap());
    let (t, _) = gate_numbers();
    let t_us = t * 1e6;
    let pass = (g2 - 0.198).abs() <= 0.001 && (g3 - 0.303).abs() <= 0.001 && (0.62..=0.64).contains(&t_us);
    outcome(pass, format!("g2 = {g2:.5} GHz, g3 = {g3:.5} GHz, gate time {t_us:.4} us"))
}

fn ideal_ghz() -> Outcome {
    let dim = 16;
    let layout = HilbertLayout::new(&[dim, dim, dim]).unwrap();
    let (t, s) = gate_numbers();
    let gate = GateSpec::for_cavities(3, t, s);
    let cat = make_encoding(&EncodingFamilySpec::CatPair { alpha: alpha() }, dim).unwrap();
    let cases = [
        (GhzKind::Nonhybrid, ScenarioInput::Encodings(vec![cat.clone(), cat.clone(), cat])),
        (GhzKind::CatCoherent, ScenarioInput::Alpha(alpha())),
        (GhzKind::CatSpin, ScenarioInput::Alpha(alpha())),
        (GhzKind::SpinCoherent, ScenarioInput::Alpha(alpha())),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (kind, input) in cases {
        let f = build_scenario(kind, input, 0.0, &layout)
            .and_then(|sc| prepare_ideal(&sc, &gate))
            .map(|(_, f)| f)
            .unwrap_or(f64::NAN);
        worst = worst.max((f - 1.0).abs());
        parts.push(format!("{kind:?} {f:.12}"));
    }
    outcome(worst <= 1e-6, parts.join(", "))
}

fn quasi_orthogonality() -> Outcome {
    let q = coherent_state(alpha(), 24)
        .unwrap()
        .inner(&coherent_state(-alpha(), 24).unwrap())
        .norm_sqr();
    let closed = (-4.84f64).exp();
    outcome(
        (q - closed).abs() <= 1e-10 && q < 1e-2,
        format!("|<a|-a>|^2 = {q:.12e}, closed form {closed:.12e}"),
    )
}

fn two_cavity_params() -> SystemParams {
    let mut p = table1();
    p.omega_c.truncate(2);
    p.g.truncate(2);
    p.g_prime = Some(p.g.clone());
    p.set_uniform_crosstalk(0.01);
    p
}

fn oracle_match() -> Outcome {
    let p = two_cavity_params();
    let det = derive_detunings(&p).unwrap();
    let layout = HilbertLayout::new(&[3, 3]).unwrap();
    let h = build_hamiltonian(HamiltonianTier::Dispersive, &p, &det, &layout, Toggles::default()).unwrap();
    let spread = |d: usize| {
        let amps = (0..d).map(|k| C64::from_polar(1.0, 0.7 * k as f64)).collect();
        Ket::new(HilbertLayout::single_mode(d).unwrap(), amps).unwrap().normalized()
    };
    let q = Ket::new(
        HilbertLayout::qutrit_only(),
        vec![C64::new(0.8, 0.0), C64::new(0.0, 0.36), C64::new(0.48, 0.0)],
    )
    .unwrap()
    .normalized();
    let psi0 = tensor_state(&[&q, &spread(3), &spread(3)], &layout).unwrap();
    let (t, _) = gate_numbers();
    let cfg = IntegratorConfig {
        max_frequency_resolution: 800,
        check: ConvergenceCheck::Off,
        ..Default::default()
    };
    let (psi, _) = evolve_schrodinger(&h, &psi0, t, &cfg).unwrap();
    let exact = expm_oracle(&h.evaluate(0.0), t).unwrap().apply(&psi0);
    let d = psi.distance(&exact);
    outcome(d <= 1e-8, format!("qutrit x (3,3) dispersive tier over {:.0} ns: distance {d:.2e}", t * 1e9))
}

fn amplitude_damping() -> Outcome {
    let dim = 4;
    let kappa = 1.0 / 20e-6;
    let a = mode_operators(dim).unwrap().annihilation;
    let layout = a.layout().clone();
    let h = TimeDependentHamiltonian::from_static(paritygate::hilbert::Operator::zero(layout)).unwrap();
    let rho0 = DensityMatrix::from_ket(&Ket::fock(dim, 1).unwrap());
    let cfg = IntegratorConfig {
        max_frequency_resolution: 200,
        check: ConvergenceCheck::Off,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for t in [5e-6, 20e-6, 60e-6] {
        let (rho, _) = evolve_lindblad(&h, &[CollapseChannel::new(a.clone(), kappa).unwrap()], &[], &rho0, t, &cfg).unwrap();
        worst = worst.max((rho.get(1, 1).re - (-kappa * t).exp()).abs());
    }
    outcome(worst <= 1e-6, format!("max |P1 - exp(-kt)| = {worst:.2e} at t = 5, 20, 60 us"))
}

/// Cache of lossy sweep rows keyed by (profile, T, 1/κ, x).
static LOSSY: Mutex<Option<HashMap<String, ResultRow>>> = Mutex::new(None);

fn lossy_row(profile: Profile, experiment: Experiment, t_us: f64, kappa_inv_us: f64, x: f64) -> ResultRow {
    let key = format!("{profile:?}/{t_us}/{kappa_inv_us}/{x}");
    if let Some(row) = LOSSY.lock().unwrap().get_or_insert_with(HashMap::new).get(&key) {
        return row.clone();
    }
    let p = table1();
    let mut spec = SweepSpec::new(experiment, profile, 3);
    spec.grid.t_us = vec![t_us];
    spec.grid.kappa_inv_us = vec![kappa_inv_us];
    spec.grid.x = vec![x];
    let dec = DecoherenceParams::from_t(t_us * 1e-6, kappa_inv_us * 1e-6, 3).unwrap();
    let start = Instant::now();
    let row = run_experiment(&spec, &p, &dec).unwrap().remove(0);
    eprintln!("  [{key}: fidelity {:.5} after {:.0} s]", row.fidelity, start.elapsed().as_secs_f64());
    LOSSY.lock().unwrap().as_mut().unwrap().insert(key, row.clone());
    row
}

fn lossy_smoke_run() -> Outcome {
    let row = lossy_row(Profile::Smoke, Experiment::Fig6, 10.0, 20.0, 0.0);
    let min_eig = row.diagnostic("min_eigenvalue").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    outcome(
        row.status == "ok" && row.trace_drift <= 1e-8 && min_eig >= -1e-6,
        format!(
            "trace drift {:.2e}, min eigenvalue {min_eig:.2e}, converged {} ({})",
            row.trace_drift, row.converged, row.status
        ),
    )
}

fn scan_rows(ms: &[u32]) -> Vec<ResultRow> {
    let mut spec = SweepSpec::new(Experiment::Fig8, Profile::Smoke, 3);
    spec.grid.m = ms.to_vec();
    spec.grid.crosstalk = vec![false];
    run_experiment(&spec, &table1(), &DecoherenceParams::none(3)).unwrap()
}

fn describe(rows: &[ResultRow]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "m={} F={:.5} (err {:.1e})",
                r.coord("m").and_then(|v| v.as_f64()).unwrap_or(f64::NAN),
                r.fidelity,
                r.diagnostic("convergence_error").and_then(|v| v.as_f64()).unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn scan_trend() -> Outcome {
    let rows = scan_rows(&[10, 20, 30]);
    let f: Vec<f64> = rows.iter().map(|r| r.fidelity).collect();
    outcome(f[0] < f[1] && f[1] < f[2], describe(&rows))
}

fn scan_m50() -> Outcome {
    let rows = scan_rows(&[50]);
    outcome(rows[0].fidelity > 0.99, format!("{} (needs > 0.99)", describe(&rows)))
}

fn band(profile: Profile, experiment: Experiment, points: &[(f64, f64, f64)], expect: f64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(t_us, kappa_inv_us, x) in points {
        let row = lossy_row(profile, experiment, t_us, kappa_inv_us, x);
        pass &= (row.fidelity - expect).abs() <= 0.02;
        parts.push(format!("T={t_us} 1/k={kappa_inv_us} x={x}: F={:.5}", row.fidelity));
    }
    outcome(pass, format!("{} (band {expect} +- 0.02)", parts.join(", ")))
}

fn fig6_point() -> Outcome {
    band(Profile::Reproduce, Experiment::Fig6, &[(10.0, 20.0, 0.0)], 0.9307)
}

fn fig7_low() -> Outcome {
    band(Profile::Reproduce, Experiment::Fig7, &[(10.0, 20.0, -0.1), (10.0, 20.0, 0.1)], 0.9248)
}

fn fig7_high() -> Outcome {
    band(Profile::Reproduce, Experiment::Fig7, &[(10.0, 100.0, -0.1), (10.0, 100.0, 0.1)], 0.9307)
}

fn qutrit_insensitivity() -> Outcome {
    let a = lossy_row(Profile::Smoke, Experiment::Fig6, 10.0, 20.0, 0.0).fidelity;
    let b = lossy_row(Profile::Smoke, Experiment::Fig6, 20.0, 20.0, 0.0).fidelity;
    outcome((a - b).abs() < 0.01, format!("F(T=10) = {a:.5}, F(T=20) = {b:.5}, change {:.4} (< 0.01)", (a - b).abs()))
}

fn cavity_sensitivity() -> Outcome {
    let a = lossy_row(Profile::Smoke, Experiment::Fig6, 10.0, 20.0, 0.0).fidelity;
    let b = lossy_row(Profile::Smoke, Experiment::Fig6, 10.0, 100.0, 0.0).fidelity;
    outcome((a - b).abs() > 0.01, format!("F(1/k=20) = {a:.5}, F(1/k=100) = {b:.5}, change {:.4} (> 0.01)", (a - b).abs()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = table1();
    let dec = DecoherenceParams::none(3);
    let mut same = true;
    let mut parts = Vec::new();
    for experiment in [Experiment::TruthTable, Experiment::Fig8] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let mut spec = SweepSpec::new(experiment, Profile::Smoke, 3);
            spec.grid.m = vec![10];
            spec.grid.crosstalk = vec![false];
            let path = dir.path().join(format!("{experiment}-{run}.csv"));
            spec.output_path = Some(path.clone());
            run_and_write(&spec, &p, &dec).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        let eq = bytes[0] == bytes[1];
        same &= eq;
        parts.push(format!("{experiment}: {} bytes, identical {eq}", bytes[0].len()));
    }
    outcome(same, parts.join(", "))
}

type Criterion = (&'static str, &'static str, bool, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    ("1", "truth-table identity", false, truth_table_identity),
    ("2", "parameter pipeline", false, parameter_pipeline),
    ("3", "ideal GHZ identities", false, ideal_ghz),
    ("4", "quasi-orthogonality", false, quasi_orthogonality),
    ("5a", "integrator vs oracle", false, oracle_match),
    ("5b", "amplitude damping", false, amplitude_damping),
    ("5c", "lossy smoke run trace and positivity", true, lossy_smoke_run),
    ("6a", "m scan trend m = 10, 20, 30", false, scan_trend),
    ("6b", "m scan m = 50 above 0.99", true, scan_m50),
    ("7", "lossy single point, reproduce truncation", true, fig6_point),
    ("8a", "x endpoints at 1/kappa = 20 us", true, fig7_low),
    ("8b", "x endpoints at 1/kappa = 100 us", true, fig7_high),
    ("9a", "insensitive to qutrit decoherence", true, qutrit_insensitivity),
    ("9b", "sensitive to cavity decay", true, cavity_sensitivity),
    ("10", "sweep determinism", false, determinism),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let include = args.iter().any(|a| a == "--include-ignored");
    let only_long = args.iter().any(|a| a == "--ignored");
    let filter = args.iter().find(|a| !a.starts_with('-')).cloned();
    if args.iter().any(|a| a == "--list") {
        for (id, name, long, _) in CRITERIA {
            println!("{id}: {name}{}", if *long { " (long-running)" } else { "" });
        }
        return;
    }
    let mut failed = 0;
    for &(id, name, long, run) in CRITERIA {
        if filter.as_ref().is_some_and(|f| id != f && !(id.starts_with(f.as_str()) && id[f.len()..].chars().all(|c| c.is_ascii_alphabetic()))) {
            continue;
        }
        let selected = if only_long { long } else { include || !long };
        if !selected {
            println!("criterion {id:<3} {name}: SKIP (long-running; pass --include-ignored)");
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:<3} {name}: {verdict} [{:.1} s] {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
