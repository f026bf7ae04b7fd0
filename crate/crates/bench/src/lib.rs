//! Benchmark fixtures shared by the criterion targets.

use alphagauge::matter::build_fluxonium;
use alphagauge::{CircuitParams, GaugeContext, MatterSpectrum};

/// Reference circuit with the given kept-level and Fock cutoffs and a matching oscillator basis.
pub fn circuit(nkeep: usize, nc: usize) -> CircuitParams {
    CircuitParams::default().with_cutoffs(4 * nkeep.max(30), nkeep, nc)
}

/// Material spectrum and gauge context of `circuit(nkeep, nc)` in gauge α.
pub fn prepared(nkeep: usize, nc: usize, alpha: f64) -> (CircuitParams, MatterSpectrum, GaugeContext) {
    let p = circuit(nkeep, nc);
    let m = build_fluxonium(&p).expect("reference circuit builds");
    let ctx = GaugeContext::new(&m, p.delta, p.eta, alpha).expect("reference gauge context");
    (p, m, ctx)
}
