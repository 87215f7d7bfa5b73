//! Desk-scale run: synthetic mixture, tuned δ, farthest-first on P vs on Q.
//!
//! cargo run --release -p kcenter --example desk_scale -- [n] [d] [m] [spread]

use kcenter::harness::{bench, tune_delta};
use kcenter::report::RunParams;
use kcenter::{ingest, ScanOrder, SeedPolicy};

fn main() -> kcenter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(default);
    let (n, d, m, spread) = (
        arg(0, 1e5) as usize,
        arg(1, 16.0) as usize,
        arg(2, 50.0) as usize,
        arg(3, 1.0) as f32,
    );

    let ps = ingest::synth_gaussian_mixture(n, d, m, spread, 7)?;
    let (delta, cover) = tune_delta(&ps, 0.015, 0.03, ScanOrder::Natural)?;
    println!(
        "delta {delta} |Q| {} ({:.2}%)",
        cover.cover.len(),
        100.0 * cover.cover.len() as f64 / n as f64
    );
    for r in bench(
        &ps,
        delta,
        &[100, 500],
        3,
        SeedPolicy::FirstIndex,
        ScanOrder::Natural,
        &RunParams::default(),
    )? {
        println!(
            "k={:>4} ff(P)={:.4} ff(Q)={:.4} ratio={:.4} gap={:.4} speedup={:.1}x (P {:.1} ms, Q {:.1} ms)",
            r.params.k.unwrap(),
            r.cost_ff_p_on_p.unwrap(),
            r.cost_ff_q_on_p.unwrap(),
            r.ratio.unwrap(),
            r.radius_gap.unwrap(),
            r.speedup.unwrap(),
            r.timings.ff_p_ms.unwrap(),
            r.timings.ff_q_ms.unwrap(),
        );
    }
    Ok(())
}
