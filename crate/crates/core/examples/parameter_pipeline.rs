//! Detunings, second-order rates, solved target couplings, gate time and the
//! dispersive-regime ratios for the reference parameter set.

use paritygate::model::{
    check_gate_condition, check_regime, derive_detunings, effective_params, quality_factor, SystemParams, TargetParity,
    DEFAULT_REGIME_THRESHOLD,
};
use paritygate::rad_per_s_to_ghz as ghz;

fn main() -> paritygate::Result<()> {
    let p = SystemParams::table1().with_solved_couplings(TargetParity::Even, 10)?;
    let det = derive_detunings(&p)?;
    let eff = effective_params(&p, &det)?;
    let t = eff.gate_time()?;
    println!("delta/2pi   = {:?} GHz", det.delta.iter().map(|&d| ghz(d)).collect::<Vec<_>>());
    println!("delta'/2pi  = {:?} GHz", det.delta_prime.iter().map(|&d| ghz(d)).collect::<Vec<_>>());
    println!("g/2pi       = {:?} GHz", p.g.iter().map(|&g| ghz(g)).collect::<Vec<_>>());
    println!("chi_1l/2pi  = {:?} MHz", eff.chi_1l.iter().map(|&c| 1e3 * ghz(c)).collect::<Vec<_>>());
    println!("gate time   = {:.4} us", t * 1e6);
    let cond = check_gate_condition(&eff, t, p.n_cavities());
    println!("s = {}, conditions met: {}", cond.s, cond.passed);
    println!("Q_1 at 20 us = {:.3e}", quality_factor(p.omega_c[0], 20e-6)?);
    for e in check_regime(&p, &det, &eff, DEFAULT_REGIME_THRESHOLD).entries {
        println!("  {:<22} {:>8.3} {}", e.name, e.ratio, if e.flagged { "below threshold" } else { "" });
    }
    Ok(())
}
