//! Largest probability-flow asymmetry along a reciprocal (k0 = 0) run.

use nalgebra::DMatrix;
use nonrecip::ferro::{coupling_matrices, MaterialFile};
use nonrecip::lindblad::{evolve_fully_excited, nonreciprocity_metrics, EvolveOptions};
use nonrecip::modes::{diagonalize_decoherence, probability_flow, project_block};

fn main() -> nonrecip::error::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(5, |a| a.parse().expect("N"));
    let k0: f64 = std::env::args().nth(2).map_or(0.0, |a| a.parse().expect("k0"));
    let (p, arr) = MaterialFile::default().with_k0(k0).with_n(n).resolve()?;
    let m = coupling_matrices(&arr, &p)?;
    let modes = diagonalize_decoherence(&m)?;
    let ev = evolve_fully_excited(&m, &EvolveOptions::new(30.0, 0.05))?;
    let mut worst: f64 = 0.0;
    for blk in &ev.trajectory.single_excitation {
        let ms = project_block(&DMatrix::from_row_slice(n, n, blk), &modes)?;
        let f = probability_flow(&ms, &modes)?;
        worst = worst.max(f.delta_p.amax());
    }
    let nr = nonreciprocity_metrics(&ev.trajectory)?;
    println!("N={n} k0={k0} max|dP|={worst:.3e} max|d1N|={:.3e}", nr.peak_abs_delta_1n);
    let pair = nr.delta_r.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    println!("max pair |dR|={pair:.3e}");
    Ok(())
}
