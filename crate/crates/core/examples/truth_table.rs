//! Truth table of a hybrid three-qubit gate: cat control, Fock and squeezed
//! targets, under the exact gate conditions.

use paritygate::encoding::{make_encoding, EncodingFamilySpec};
use paritygate::gate::{hybridization_class, verify_truth_table, GateSpec};
use paritygate::C64;

fn main() -> paritygate::Result<()> {
    let alpha = C64::new(1.1, 0.0);
    let encodings = vec![
        make_encoding(&EncodingFamilySpec::CatPair { alpha }, 16)?,
        make_encoding(&EncodingFamilySpec::Fock01, 16)?,
        make_encoding(&EncodingFamilySpec::SqueezedVsCat { r: 0.3, theta: 0.0, alpha }, 16)?,
    ];
    println!("class: {:?}", hybridization_class(&encodings));
    let spec = GateSpec::exact(encodings, 625e-9, -9, 10);
    let (table, residual) = verify_truth_table(&spec)?;
    for e in &table.entries {
        println!("{:?} -> {:+.6}", e.bits, e.phase);
    }
    println!("max deviation {:.2e}, eigenvector residual {:.2e}", table.deviation_from_ideal(), residual);
    Ok(())
}
