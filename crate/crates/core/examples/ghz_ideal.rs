//! GHZ states from one application of the diagonal gate, for each scenario.

use paritygate::encoding::{make_encoding, EncodingFamilySpec};
use paritygate::gate::GateSpec;
use paritygate::ghz::{build_scenario, prepare_ideal, GhzKind, ScenarioInput};
use paritygate::hilbert::HilbertLayout;
use paritygate::C64;

fn main() -> paritygate::Result<()> {
    let dim = 16;
    let layout = HilbertLayout::new(&[dim, dim, dim])?;
    let alpha = C64::new(1.1, 0.0);
    let fock = make_encoding(&EncodingFamilySpec::Fock01, dim)?;
    let gate = GateSpec::for_cavities(3, 625e-9, -9);
    let cases = [
        (GhzKind::Nonhybrid, ScenarioInput::Encodings(vec![fock.clone(), fock.clone(), fock])),
        (GhzKind::CatCoherent, ScenarioInput::Alpha(alpha)),
        (GhzKind::CatSpin, ScenarioInput::Alpha(alpha)),
        (GhzKind::SpinCoherent, ScenarioInput::Alpha(alpha)),
    ];
    for (kind, input) in cases {
        let s = build_scenario(kind, input, 0.0, &layout)?;
        let (_, f) = prepare_ideal(&s, &gate)?;
        println!("{kind:?}: fidelity {f:.12}, tail {:.1e}", s.tail_mass);
    }
    Ok(())
}
