//! Lossy gate on Fock-encoded qubits with two levels per cavity: full
//! Hamiltonian, cavity decay and qutrit relaxation and dephasing.

use paritygate::dynamics::IntegratorConfig;
use paritygate::encoding::{make_encoding, EncodingFamilySpec};
use paritygate::ghz::{build_scenario, prepare_full, GhzKind, ScenarioInput};
use paritygate::hilbert::HilbertLayout;
use paritygate::model::{DecoherenceParams, SystemParams, TargetParity, Toggles};

fn main() -> paritygate::Result<()> {
    let p = SystemParams::table1().with_solved_couplings(TargetParity::Even, 10)?;
    let layout = HilbertLayout::new(&[2, 2, 2])?;
    let fock = make_encoding(&EncodingFamilySpec::Fock01, 2)?;
    let cfg = IntegratorConfig {
        max_frequency_resolution: 60,
        ..Default::default()
    };
    let s = build_scenario(GhzKind::General, ScenarioInput::Encodings(vec![fock; 3]), 0.0, &layout)?;
    for (t_us, kappa_us) in [(10.0, 20.0), (10.0, 100.0)] {
        let dec = DecoherenceParams::from_t(t_us * 1e-6, kappa_us * 1e-6, 3)?;
        let (rho, traj) = prepare_full(&s, &p, &dec, Toggles::all(), &cfg)?;
        println!(
            "T = {t_us} us, 1/kappa = {kappa_us} us: fidelity {:.5}, purity {:.5}, trace drift {:.1e}, min eig {:.1e}, converged {}",
            traj.records.last().and_then(|r| r.fidelity).unwrap_or(f64::NAN),
            rho.purity(),
            traj.final_drift,
            traj.min_eigenvalue.unwrap_or(f64::NAN),
            traj.converged
        );
    }
    Ok(())
}
