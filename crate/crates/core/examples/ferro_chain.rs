//! Evolves a nine-qubit NV chain above a YIG-like film and prints the edge
//! asymmetry and run statistics for a few DMI strengths.

use nonrecip::ferro::{coupling_matrices, MaterialFile};
use nonrecip::lindblad::{
    evolve_fully_excited, nonreciprocity_metrics, total_emission_slope, DensityMatrix, EvolveOptions,
};

fn main() -> nonrecip::error::Result<()> {
    let k0s: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("k0 values must be numbers"))
        .collect();
    let k0s = if k0s.is_empty() { vec![0.003] } else { k0s };
    for k0 in k0s {
        let (p, arr) = MaterialFile::default().with_k0(k0).resolve()?;
        let m = coupling_matrices(&arr, &p)?;
        let ev = evolve_fully_excited(&m, &EvolveOptions::new(30.0, 0.01))?;
        let nr = nonreciprocity_metrics(&ev.trajectory)?;
        let (peak, at) = ev.trajectory.peak_total_rate();
        let slope = total_emission_slope(&DensityMatrix::fully_excited(m.n())?, &m)?;
        println!(
            "k0={k0} slope0={slope:.3} peak|d1N|={:.6} at {:.3}  peakRtot={peak:.4} at {at:.3}  closure={:.2e}  steps={} wall={:.1}s",
            nr.peak_abs_delta_1n, nr.peak_time, ev.diagnostics.excitation_closure,
            ev.diagnostics.integrator.accepted_steps, ev.diagnostics.wall_seconds
        );
    }
    Ok(())
}
