//! The experiment suite behind `rauzylab experiments`: sampler calibration,
//! Monte Carlo split probabilities against exact values, diameter decay,
//! normality coverage, and visit-frequency stability. Each gate writes a
//! CSV with its configuration in a leading comment row; the summary JSON
//! carries one pass/fail entry per gate.

use rauzylab_core::combinatorics::{GeneralizedPermutation, Side};
use rauzylab_core::diagram::RauzyDiagram;
use rauzylab_core::expansion::Stage;
use rauzylab_core::geometry::ConfigurationSpace;
use rauzylab_core::montecarlo::{
    diameter_decay_experiment, estimate_split_probability, normality_experiment,
    visit_frequency_experiment, PolytopeSampler,
};
use rauzylab_core::numeric::to_f64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

pub struct SuiteOutcome {
    pub gates: Vec<Gate>,
    /// (file name, contents) pairs, CSVs plus the summary JSON.
    pub files: Vec<(String, String)>,
}

pub fn run_suite(
    pi: &GeneralizedPermutation,
    seed: u64,
    n_samples: usize,
    max_steps: usize,
    c_values: &[u32],
    k: usize,
) -> Result<SuiteOutcome, String> {
    let mut gates = Vec::new();
    let mut files = Vec::new();
    let c_max = *c_values.iter().max().ok_or("at least one C threshold")?;
    if c_values.iter().any(|&c| c <= 1) {
        return Err("all C thresholds must exceed 1".into());
    }

    let diagram = RauzyDiagram::build(pi);
    let node = diagram.node_id(pi).expect("seed is in its own diagram");
    let sink = diagram
        .sinks
        .iter()
        .find(|s| s.contains(&node))
        .cloned()
        .or_else(|| diagram.sinks.first().cloned())
        .ok_or("diagram has no sink")?;
    let start_node = if sink.contains(&node) { node } else { sink[0] };

    // Gate 1: sampler calibration. Sample mean within 4 sigma of the
    // centroid, per coordinate.
    {
        let space = ConfigurationSpace::of(pi);
        let sampler = PolytopeSampler::new(&space).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n_samples.max(1000);
        let d = pi.d();
        let mut sums = vec![0.0f64; d];
        let mut sq = vec![0.0f64; d];
        for _ in 0..n {
            let p = sampler.sample(&mut rng);
            for i in 0..d {
                let x = to_f64(&p[i]);
                sums[i] += x;
                sq[i] += x * x;
            }
        }
        let centroid = space.centroid();
        let mut worst = 0.0f64;
        let mut csv = format!("# seed={seed} n={n}\ncoordinate,mean,centroid,sigmas\n");
        let mut pass = true;
        for i in 0..d {
            let mean = sums[i] / n as f64;
            let var = (sq[i] / n as f64 - mean * mean).max(0.0);
            let sigma = (var / n as f64).sqrt().max(f64::EPSILON);
            let expected = to_f64(&centroid[i]);
            let sigmas = (mean - expected).abs() / sigma;
            worst = worst.max(sigmas);
            pass &= sigmas < 4.0;
            let _ = writeln!(csv, "{},{:.12e},{:.12e},{:.3}", i + 1, mean, expected, sigmas);
        }
        files.push(("sampler_calibration.csv".into(), csv));
        gates.push(Gate {
            name: "sampler-centroid".into(),
            pass,
            details: format!("worst deviation {worst:.2} sigma over {} coordinates", pi.d()),
        });
    }

    // Gate 2: Monte Carlo split probability vs the exact measure ratio at
    // the identity stage, both directions where defined.
    {
        let stage = Stage::from_replay(pi, &[]).expect("empty replay");
        let mut csv = format!("# seed={seed} n={n_samples}\nside,exact,estimate,stderr,sigmas\n");
        let mut pass = true;
        let mut worst = 0.0f64;
        for (ji, side) in [Side::Top, Side::Bottom].into_iter().enumerate() {
            if stage.current.critical_band(side) == stage.current.critical_band(side.other()) {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(100 + ji as u64);
            let est = estimate_split_probability(&stage, side, n_samples, &mut rng)
                .map_err(|e| e.to_string())?;
            let sigmas = est.sigmas_off();
            // A forced split has zero variance; exact match required there.
            let ok = if est.stderr == 0.0 {
                est.estimate == est.exact
            } else {
                sigmas < 4.0
            };
            pass &= ok;
            worst = worst.max(sigmas);
            let _ = writeln!(
                csv,
                "{side:?},{:.12e},{:.12e},{:.12e},{sigmas:.3}",
                est.exact, est.estimate, est.stderr
            );
        }
        files.push(("split_probability.csv".into(), csv));
        gates.push(Gate {
            name: "split-probability".into(),
            pass,
            details: format!("worst deviation {worst:.2} sigma at N = {n_samples}"),
        });
    }

    // Gate 3: diameter decay. No monotonicity violations; medians decrease
    // across checkpoints.
    {
        let steps = max_steps.min(400);
        let checkpoints: Vec<usize> = [steps / 8, steps / 4, steps / 2, steps]
            .into_iter()
            .filter(|&c| c > 0)
            .collect();
        let orbits = 100;
        let report = diameter_decay_experiment(
            &diagram,
            start_node,
            orbits,
            steps,
            &checkpoints,
            c_max,
            512,
            seed,
        );
        let mut csv = format!(
            "# seed={seed} orbits={orbits} steps={steps} C={c_max}\ncheckpoint,median_diameter\n"
        );
        for (cp, m) in report.checkpoints.iter().zip(&report.medians) {
            let _ = writeln!(csv, "{cp},{m:.12e}");
        }
        files.push(("diameter_decay.csv".into(), csv));
        // Medians below the f64 noise floor are unordered noise.
        let decreasing = report
            .medians
            .windows(2)
            .all(|w| w[1] <= w[0] || w[1] < 1e-13 || w[1].is_nan());
        let pass = report.monotonicity_violations == 0
            && decreasing
            && report.shrink_failures == 0;
        gates.push(Gate {
            name: "diameter-decay".into(),
            pass,
            details: format!(
                "violations {}, medians {:?}, shrink checks {} (failures {})",
                report.monotonicity_violations,
                report.medians,
                report.shrink_checks,
                report.shrink_failures
            ),
        });
    }

    // Gate 4: normality coverage. Every realizable sequence of length <= k
    // out of the sink occurs after a C-distributed stage.
    {
        let orbits = 60;
        let steps = max_steps;
        let report =
            normality_experiment(&diagram, &sink, k, c_max, orbits, steps, 1024, seed);
        let mut csv = format!(
            "# seed={seed} orbits={orbits} steps={steps} C={c_max} k={k}\nnode,sequence,count\n"
        );
        for (node, seq, count) in &report.counts {
            let _ = writeln!(csv, "{node},{seq},{count}");
        }
        files.push(("normality.csv".into(), csv));
        gates.push(Gate {
            name: "normality-coverage".into(),
            pass: report.min_count >= 1,
            details: format!(
                "{} sequences, min count {}, halted orbits {}",
                report.sequences, report.min_count, report.halted_orbits
            ),
        });
    }

    // Gate 5: visit frequencies. Sum to one; two seeds agree within 4 sigma
    // per node.
    {
        let orbits = 30;
        let steps = max_steps.min(600);
        let a = visit_frequency_experiment(&diagram, start_node, orbits, steps, 512, seed);
        let b = visit_frequency_experiment(&diagram, start_node, orbits, steps, 512, seed + 1);
        let sum_a: f64 = a.frequencies.iter().sum();
        let mut pass = (sum_a - 1.0).abs() < 1e-9;
        let mut worst = 0.0f64;
        let mut csv = format!(
            "# seed={seed} orbits={orbits} steps={steps}\nnode,freq_seed_a,freq_seed_b,sigmas\n"
        );
        for v in 0..a.frequencies.len() {
            let sigma = (a.stderrs[v].powi(2) + b.stderrs[v].powi(2))
                .sqrt()
                .max(f64::EPSILON);
            let sigmas = (a.frequencies[v] - b.frequencies[v]).abs() / sigma;
            // Nodes never visited under either seed give 0/0; skip them.
            if a.frequencies[v] > 0.0 || b.frequencies[v] > 0.0 {
                worst = worst.max(sigmas);
                pass &= sigmas < 4.0;
            }
            let _ = writeln!(
                csv,
                "{v},{:.12e},{:.12e},{sigmas:.3}",
                a.frequencies[v], b.frequencies[v]
            );
        }
        files.push(("visit_frequency.csv".into(), csv));
        gates.push(Gate {
            name: "visit-frequency".into(),
            pass,
            details: format!("sum {sum_a:.9}, worst seed disagreement {worst:.2} sigma"),
        });
    }

    let summary = serde_json::json!({
        "config": {
            "type": pi,
            "seed": seed,
            "n_samples": n_samples,
            "max_steps": max_steps,
            "c_thresholds": c_values,
            "k": k,
        },
        "gates": gates,
    });
    files.push((
        "summary.json".into(),
        serde_json::to_string_pretty(&summary).unwrap() + "\n",
    ));
    Ok(SuiteOutcome { gates, files })
}
