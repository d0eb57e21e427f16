//! Prints R_1, R_2 and R_tot relative to independent decay for one parameter set.

use nonrecip::lindblad::EvolveOptions;
use nonrecip::two_qubit::{solve_two_qubit, TwoQubitParams};

fn main() -> nonrecip::error::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let (gs, ja) = (args.first().copied().unwrap_or(0.5), args.get(1).copied().unwrap_or(0.0));
    let t = solve_two_qubit(&TwoQubitParams::new(1.0, gs, ja), &EvolveOptions::new(30.0, 0.01))?;
    for k in (0..t.len()).step_by(100) {
        let e = (-t.times[k]).exp();
        println!(
            "tau={:5.2} R1/e={:.4} R2/e={:.4} Rtot/2e={:.4}",
            t.times[k],
            t.r1[k] / e,
            t.r2[k] / e,
            (t.r1[k] + t.r2[k]) / (2.0 * e)
        );
    }
    Ok(())
}
