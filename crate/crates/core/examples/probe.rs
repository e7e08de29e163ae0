use rauzylab_core::diagram::RauzyDiagram;
use rauzylab_core::four_band;
use rauzylab_core::montecarlo::{diameter_decay_experiment, normality_experiment};
use std::time::Instant;

fn main() {
    let g = RauzyDiagram::build(&four_band::base_arrangement());
    let sink = g.sinks[0].clone();

    let t = Instant::now();
    let report = normality_experiment(&g, &sink, 3, 8, 200, 5_000, 1024, 20260809);
    println!(
        "normality: {} sequences, min {}, total {}, halted {}, elapsed {:?}",
        report.sequences, report.min_count, report.total_occurrences, report.halted_orbits, t.elapsed()
    );

    let t = Instant::now();
    let decay = diameter_decay_experiment(&g, 0, 500, 300, &[50, 100, 200, 300], 8, 256, 20260809);
    println!(
        "decay: medians {:?}, violations {}, checks {} fail {}, R {:.4}, halted {}, elapsed {:?}",
        decay.medians, decay.monotonicity_violations, decay.shrink_checks, decay.shrink_failures,
        decay.shrink_factor, decay.halted_orbits, t.elapsed()
    );
}
