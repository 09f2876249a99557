//! Ladder and parity operators on a truncated mode, embedded in the
//! qutrit ⊗ cavities space.

use paritygate::hilbert::{coherent_state, embed, mode_operators, HilbertLayout};
use paritygate::C64;

fn main() -> paritygate::Result<()> {
    let dim = 12;
    let m = mode_operators(dim)?;
    let alpha = C64::new(1.1, 0.0);
    let psi = coherent_state(alpha, dim)?;
    let flipped = m.parity.apply(&psi);
    let minus = coherent_state(-alpha, dim)?;
    println!("|| P|a> - |-a> || = {:.3e}", flipped.distance(&minus));
    println!("|<a|-a>|^2 = {:.6e}  (exp(-4|a|^2) = {:.6e})", psi.inner(&minus).norm_sqr(), (-4.84f64).exp());

    let layout = HilbertLayout::new(&[4, 6, 6])?;
    let n2 = embed(&mode_operators(6)?.number, layout.cavity_position(1), &layout)?;
    println!("layout dims {:?}, total {}, n_2 nonzeros {}", layout.dims(), layout.total_dim(), n2.matrix().nnz());
    Ok(())
}
