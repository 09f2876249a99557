//! One point of the dissipation-free m scan: pure-state evolution under the
//! interaction-picture Hamiltonian with δ₁ = m g₁.
//!
//! Usage: `cargo run --release --example scan_point -- [m]`

use paritygate::dynamics::{ConvergenceCheck, IntegratorConfig};
use paritygate::experiments::scan_params;
use paritygate::ghz::{build_scenario, prepare_pure, GhzKind, ScenarioInput};
use paritygate::hilbert::HilbertLayout;
use paritygate::model::{HamiltonianTier, SystemParams, Toggles};
use paritygate::C64;

fn main() -> paritygate::Result<()> {
    let m: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let (p, t) = scan_params(&SystemParams::table1(), m)?;
    let layout = HilbertLayout::new(&[4, 10, 10])?;
    let s = build_scenario(GhzKind::SpinCoherent, ScenarioInput::Alpha(C64::new(1.1, 0.0)), 0.0, &layout)?;
    let cfg = IntegratorConfig {
        check: ConvergenceCheck::Off,
        ..Default::default()
    };
    let (_, traj) = prepare_pure(&s, &p, HamiltonianTier::Full, Toggles::default(), t, &cfg)?;
    let last = traj.records.last().and_then(|r| r.fidelity).unwrap_or(f64::NAN);
    println!("m = {m}: t = {:.3} us, {} steps", t * 1e6, traj.steps);
    println!("fidelity at t = {last:.6}, max over run = {:.6}", traj.max_fidelity().unwrap_or(f64::NAN));
    Ok(())
}
