//! Randomized invariants across the crate.

use paritygate::dynamics::{
    evolve_lindblad, evolve_schrodinger, CollapseChannel, ConvergenceCheck, IntegratorConfig, TimeDependentHamiltonian,
};
use paritygate::encoding::{make_encoding, validate_encoding, EncodingFamilySpec};
use paritygate::experiments::{format_float, write_results, ResultRow, Value};
use paritygate::gate::{diagonal_gate, exact_diagonal_gate, verify_truth_table, GateSpec};
use paritygate::ghz::{build_scenario, prepare_ideal, GhzKind, ScenarioInput};
use paritygate::hilbert::{
    coherent_state, embed, mode_operators, CsrMatrix, DensityMatrix, HilbertLayout, Ket, Operator, G,
};
use paritygate::model::{
    build_hamiltonian, derive_detunings, effective_energy, effective_params, solve_coupling, EffectiveParams,
    HamiltonianTier, SystemParams, TargetParity, Toggles,
};
use paritygate::{ghz_to_rad_per_s as w, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex() -> impl Strategy<Value = C64> {
    (0.2f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn amplitude() -> impl Strategy<Value = C64> {
    (0.4f64..1.4, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn family() -> impl Strategy<Value = EncodingFamilySpec> {
    prop_oneof![
        Just(EncodingFamilySpec::Fock01),
        (0usize..4, 0usize..4).prop_map(|(m, n)| EncodingFamilySpec::FockPair { m, n }),
        (prop::collection::vec(complex(), 1..4), prop::collection::vec(complex(), 1..4))
            .prop_map(|(even, odd)| EncodingFamilySpec::FockSuperposition { even, odd }),
        amplitude().prop_map(|alpha| EncodingFamilySpec::CatPair { alpha }),
        (0usize..3, 0usize..3, complex(), complex(), complex(), complex(), amplitude()).prop_map(
            |(m, n, c0, c1, d0, d1, alpha)| EncodingFamilySpec::FockCatMix {
                m,
                n,
                c: [c0, c1],
                d: [d0, d1],
                alpha
            }
        ),
        (0.0f64..0.3, 0.0f64..std::f64::consts::TAU, amplitude())
            .prop_map(|(r, theta, alpha)| EncodingFamilySpec::SqueezedVsCat { r, theta, alpha }),
        (amplitude(), complex(), complex(), complex(), complex())
            .prop_map(|(alpha, c0, c1, d0, d1)| EncodingFamilySpec::MulticomponentCat {
                alpha,
                c: [c0, c1],
                d: [d0, d1]
            }),
    ]
}

/// Random qutrit-cavity system in the dispersive layout of the reference
/// device: positive detunings with `δ₁ < δ₂ < δ₃`.
fn system() -> impl Strategy<Value = SystemParams> {
    (1.0f64..3.0, 0.2f64..1.0, 0.2f64..1.0, 0.05f64..0.3, 0.05f64..0.4, 0.05f64..0.4).prop_map(
        |(d1, gap2, gap3, g1, g2, g3)| {
            let mut p = SystemParams::table1();
            p.omega_c = vec![w(20.0 - d1), w(12.0 - (d1 + gap2)), w(12.0 - (d1 + gap2 + gap3))];
            p.g = vec![w(g1), w(g2), w(g3)];
            p.g_prime = Some(p.g.clone());
            p.set_uniform_crosstalk(0.01);
            p
        },
    )
}

fn random_hermitian(dim: usize, entries: &[(usize, usize, f64, f64)]) -> CsrMatrix {
    let mut t = Vec::new();
    for &(i, j, re, im) in entries {
        let (i, j) = (i % dim, j % dim);
        if i == j {
            t.push((i, i, c(re, 0.0)));
        } else {
            t.push((i, j, c(re, im)));
            t.push((j, i, c(re, -im)));
        }
    }
    CsrMatrix::from_triplets(dim, dim, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parity_squares_to_identity(dim in 2usize..30) {
        let p = mode_operators(dim).unwrap().parity;
        let id = Operator::identity(p.layout().clone());
        prop_assert_eq!(p.mul(&p).max_abs_diff(&id), 0.0);
    }

    #[test]
    fn truncated_commutator(dim in 2usize..30) {
        let m = mode_operators(dim).unwrap();
        let comm = m.annihilation.commutator(&m.creation);
        for n in 0..dim {
            let expect = if n + 1 < dim { 1.0 } else { -((dim - 1) as f64) };
            prop_assert!((comm.get(n, n).re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn flatten_unflatten_round_trip(dims in prop::collection::vec(2usize..6, 1..4), qutrit in any::<bool>()) {
        let layout = if qutrit {
            HilbertLayout::new(&dims).unwrap()
        } else {
            HilbertLayout::cavities_only(&dims).unwrap()
        };
        for i in 0..layout.total_dim() {
            prop_assert_eq!(layout.flatten(&layout.unflatten(i)), i);
        }
    }

    #[test]
    fn embedding_repeats_spectrum(dims in prop::collection::vec(2usize..4, 2..4), which in 0usize..3,
                                  entries in prop::collection::vec((0usize..4, 0usize..4, -1.0f64..1.0, -1.0f64..1.0), 1..8)) {
        // equal power traces up to the dimension give equal eigenvalue multisets
        let layout = HilbertLayout::cavities_only(&dims).unwrap();
        let pos = which % dims.len();
        let d = dims[pos];
        let op = Operator::new(HilbertLayout::single_mode(d).unwrap(), random_hermitian(d, &entries), "h").unwrap();
        let big = embed(&op, pos, &layout).unwrap();
        let rep = (layout.total_dim() / d) as f64;
        let (mut small_k, mut big_k) = (op.clone(), big.clone());
        for _ in 0..d {
            let ts: C64 = (0..d).map(|i| small_k.get(i, i)).sum();
            let tb: C64 = (0..big.dim()).map(|i| big_k.get(i, i)).sum();
            prop_assert!((tb - ts * rep).norm() < 1e-9 * (1.0 + tb.norm()));
            small_k = small_k.mul(&op);
            big_k = big_k.mul(&big);
        }
    }

    #[test]
    fn encodings_are_parity_qubits(spec in family()) {
        let Ok(enc) = make_encoding(&spec, 20) else {
            return Err(TestCaseError::reject("tail above limit"));
        };
        let r = validate_encoding(&enc);
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn coherent_pair_overlap(r in 0.1f64..2.0, th in 0.0f64..std::f64::consts::TAU) {
        let a = C64::from_polar(r, th);
        let q = coherent_state(a, 24).unwrap().inner(&coherent_state(-a, 24).unwrap()).norm_sqr();
        prop_assert!((q - (-4.0 * r * r).exp()).abs() < 1e-10);
    }

    #[test]
    fn effective_tier_is_diagonal_and_parity_symmetric(p in system()) {
        let det = derive_detunings(&p).unwrap();
        let layout = HilbertLayout::cavities_only(&[3, 3, 3]).unwrap();
        let h = build_hamiltonian(HamiltonianTier::Effective, &p, &det, &layout, Toggles::default()).unwrap().evaluate(0.0);
        let scale = h.matrix().triplets().map(|(_, _, v)| v.norm()).fold(1.0, f64::max);
        let mut parity = Operator::identity(layout.clone());
        for j in 0..3 {
            let m = mode_operators(3).unwrap();
            let n = embed(&m.number, layout.cavity_position(j), &layout).unwrap();
            prop_assert!(h.commutator(&n).max_abs_diff(&Operator::zero(layout.clone())) <= 1e-12 * scale);
            parity = parity.mul(&embed(&m.parity, layout.cavity_position(j), &layout).unwrap());
        }
        prop_assert!(h.commutator(&parity).max_abs_diff(&Operator::zero(layout)) <= 1e-12 * scale);
    }

    #[test]
    fn solved_couplings_do_not_depend_on_g1(p in system(), g1 in 0.02f64..0.5, m in 1u32..40) {
        let a = p.clone().with_solved_couplings(TargetParity::Even, m).unwrap();
        let mut q = p;
        q.g[0] = w(g1);
        let b = q.with_solved_couplings(TargetParity::Even, m).unwrap();
        prop_assert_eq!(&a.g[1..], &b.g[1..]);
    }

    #[test]
    fn solved_coupling_meets_condition(d1 in 0.5f64..3.0, gap in 0.1f64..2.0, m in 1u32..60, odd in any::<bool>()) {
        let (d1, dl) = (w(d1), w(d1 + gap));
        let g1 = w(0.16);
        let parity = if odd { TargetParity::Odd } else { TargetParity::Even };
        let gl = solve_coupling(parity, m, d1, dl).unwrap();
        let lambda_1l = 0.5 * g1 * gl * (1.0 / d1 + 1.0 / dl);
        let chi = lambda_1l * lambda_1l / (dl - d1);
        let lambda_1 = g1 * g1 / d1;
        let want = if odd { lambda_1 / (2 * m + 1) as f64 } else { lambda_1 / (2 * m) as f64 };
        prop_assert!(((chi - want) / want).abs() < 1e-12);
    }

    #[test]
    fn every_tier_is_hermitian(p in system(), t in 0.0f64..1e-6) {
        let det = derive_detunings(&p).unwrap();
        let layout = HilbertLayout::new(&[2, 3, 3]).unwrap();
        for tier in [HamiltonianTier::Ideal, HamiltonianTier::Dispersive, HamiltonianTier::Effective, HamiltonianTier::Full] {
            let h = build_hamiltonian(tier, &p, &det, &layout, Toggles::all()).unwrap();
            let op = h.evaluate(t);
            prop_assert!(op.hermiticity_defect() <= 1e-12 * h.norm_bound().max(1.0), "{tier}");
        }
    }

    #[test]
    fn dispersive_ground_row_is_effective(p in system()) {
        let det = derive_detunings(&p).unwrap();
        let eff = effective_params(&p, &det).unwrap();
        let layout = HilbertLayout::new(&[3, 3, 3]).unwrap();
        let h = build_hamiltonian(HamiltonianTier::Dispersive, &p, &det, &layout, Toggles::default()).unwrap().evaluate(0.0);
        for idx in 0..27 {
            let n = HilbertLayout::cavities_only(&[3, 3, 3]).unwrap().unflatten(idx);
            let i = layout.flatten(&[G, n[0], n[1], n[2]]);
            let (n1, n2, n3) = (n[0] as f64, n[1] as f64, n[2] as f64);
            let lhs = -eff.lambda_1 * n1 + eff.chi_1l[0] * n1 * (1.0 + n2) + eff.chi_1l[1] * n1 * (1.0 + n3);
            let scale = eff.lambda_1.abs() * 10.0;
            prop_assert!((h.get(i, i).re - lhs).abs() <= 1e-12 * scale);
            prop_assert!((lhs - effective_energy(&eff, &n)).abs() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagonal_gate_is_unitary(chi in prop::collection::vec(1e5f64..1e7, 1..3), eta in -1e8f64..1e8, t in 1e-8f64..1e-6) {
        let n = chi.len() + 1;
        let eff = EffectiveParams { lambda_1: 0.0, lambda_l: vec![0.0; n - 1], lambda_1l: vec![0.0; n - 1], chi_1l: chi, eta };
        let layout = HilbertLayout::cavities_only(&vec![4; n]).unwrap();
        let u = diagonal_gate(&eff, t, &layout).unwrap();
        prop_assert!(u.matrix().is_diagonal());
        for i in 0..layout.total_dim() {
            prop_assert!((u.get(i, i).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn excited_control_applies_parity(amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
        let dim = 8;
        let psi = Ket::new(HilbertLayout::single_mode(dim).unwrap(), amps.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
        prop_assume!(psi.norm() > 0.1);
        let psi = psi.normalized();
        let layout = HilbertLayout::cavities_only(&[3, dim]).unwrap();
        let u = exact_diagonal_gate(&layout).unwrap();
        let one = Ket::fock(3, 1).unwrap();
        let input = paritygate::hilbert::tensor_state(&[&one, &psi], &layout).unwrap();
        let p = mode_operators(dim).unwrap().parity;
        let expect = paritygate::hilbert::tensor_state(&[&one, &p.apply(&psi)], &layout).unwrap();
        prop_assert!(u.apply(&input).distance(&expect) < 1e-12);
    }

    #[test]
    fn truth_table_is_encoding_independent(specs in prop::collection::vec(family(), 2..4), s in -12i64..12, m in 1u32..30) {
        let encs: Result<Vec<_>, _> = specs.iter().map(|f| make_encoding(f, 16)).collect();
        let Ok(encs) = encs else {
            return Err(TestCaseError::reject("tail above limit"));
        };
        let spec = GateSpec::exact(encs, 625e-9, s, m);
        let (table, residual) = verify_truth_table(&spec).unwrap();
        prop_assert!(table.deviation_from_ideal() <= 1e-9);
        prop_assert!(residual <= 1e-9);
    }

    #[test]
    fn phase_error_is_bounded_by_photon_numbers(m in 0usize..3, n in 0usize..3, k in 2usize..4) {
        // Fock encodings stay eigenvectors, so the off-condition phases are exact
        let eps = 1e-3;
        let t = 625e-9;
        let enc = make_encoding(&EncodingFamilySpec::FockPair { m, n }, 8).unwrap();
        let mut spec = GateSpec::exact(vec![enc; k], t, -9, 10);
        spec.exact = false;
        for chi in &mut spec.chi {
            *chi = (std::f64::consts::PI + eps) / t;
        }
        spec.eta = 2.0 * -9.0 * std::f64::consts::PI / t;
        let (table, _) = verify_truth_table(&spec).unwrap();
        let nbar = (2 * m).max(2 * n + 1) as f64;
        let dev = table.deviation_from_ideal();
        prop_assert!(dev > 0.0);
        prop_assert!(dev <= eps * (k - 1) as f64 * nbar * nbar * (1.0 + 1e-9));
    }

    #[test]
    fn general_branches_are_orthogonal(specs in prop::collection::vec(family(), 3)) {
        let encs: Result<Vec<_>, _> = specs.iter().map(|f| make_encoding(f, 12)).collect();
        let Ok(encs) = encs else {
            return Err(TestCaseError::reject("tail above limit"));
        };
        let layout = HilbertLayout::new(&[12, 12, 12]).unwrap();
        let s = build_scenario(GhzKind::General, ScenarioInput::Encodings(encs.clone()), 0.0, &layout).unwrap();
        let cav = layout.without_qutrit().unwrap();
        let branch = |b: u8| {
            let mut parts = vec![encs[0].logical(b)];
            parts.extend(encs[1..].iter().map(|e| e.logical(b)));
            paritygate::hilbert::tensor_state(&parts, &cav).unwrap()
        };
        prop_assert!(branch(0).inner(&branch(1)).norm() < 1e-8);
        let (out, f) = prepare_ideal(&s, &GateSpec::for_cavities(3, 625e-9, -9)).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-9);
        let q = out.reduced_density(0);
        prop_assert!((q[0] - c(1.0, 0.0)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lindblad_keeps_trace_and_hermiticity(entries in prop::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 2..10),
                                            rate in 0.0f64..0.5, t in 0.1f64..2.0) {
        let layout = HilbertLayout::single_mode(6).unwrap();
        let h = Operator::new(layout.clone(), random_hermitian(6, &entries), "h").unwrap();
        let a = mode_operators(6).unwrap().annihilation;
        let chan = CollapseChannel::new(a, rate).unwrap();
        let psi = coherent_state(c(0.8, 0.3), 6).unwrap().normalized();
        let rho0 = DensityMatrix::from_ket(&psi);
        let cfg = IntegratorConfig { max_frequency_resolution: 40, check: ConvergenceCheck::Off, ..Default::default() };
        let (rho, traj) = evolve_lindblad(&TimeDependentHamiltonian::from_static(h).unwrap(), &[chan], &[], &rho0, t, &cfg).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() <= 1e-8);
        prop_assert!(rho.hermiticity_defect() <= 1e-10);
        prop_assert!(traj.min_eigenvalue.unwrap() >= -1e-6);
    }

    #[test]
    fn schrodinger_keeps_norm(entries in prop::collection::vec((0usize..8, 0usize..8, -1.0f64..1.0, -1.0f64..1.0), 2..12), t in 0.1f64..3.0) {
        let layout = HilbertLayout::single_mode(8).unwrap();
        let h = Operator::new(layout.clone(), random_hermitian(8, &entries), "h").unwrap();
        let psi0 = Ket::basis(layout, 0);
        let (psi, traj) = evolve_schrodinger(&TimeDependentHamiltonian::from_static(h).unwrap(), &psi0, t, &IntegratorConfig::default()).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-4);
        prop_assert!(traj.final_drift < 1e-4);
    }

    #[test]
    fn csv_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..6)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows: Vec<ResultRow> = values.iter().enumerate().map(|(i, &v)| ResultRow {
            coords: vec![("i".into(), Value::Int(i as i64))],
            fidelity: v,
            fidelity_at_max: v,
            trace_drift: 0.0,
            runtime_s: 0.0,
            converged: true,
            within_budget: true,
            diagnostics: vec![],
            status: "ok".into(),
        }).collect();
        write_results(&rows, &path).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        for (rec, v) in r.records().zip(&values) {
            let rec = rec.unwrap();
            let back: f64 = rec[1].parse().unwrap();
            let text = format_float(*v);
            prop_assert_eq!(&rec[1], text.as_str());
            prop_assert!((back - v).abs() <= 1e-11 * v.abs());
        }
    }
}
