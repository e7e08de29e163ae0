//! Iterated Rauzy induction from a width vector: the expansion state, its
//! accumulated matrix, and the per-step detectors (column and vertex norm
//! distribution, image diameter).
//!
//! Exact rational widths always halt after finitely many steps (at d = 2
//! this is the termination of the continued fraction), so batch experiments
//! cap the step count and treat halts as censored observations.

use crate::combinatorics::{
    BandLabel, GeneralizedPermutation, ReplayError, Side, SplitError, SplitRecord, WidthVector,
};
use crate::geometry::polytope::HalfSpace;
use crate::geometry::{
    image_chart_measure, projectivize, vertex_norm_ratio, ConfigurationSpace, GeometryError,
};
use crate::matrix::{ElementaryMatrix, ExpansionMatrix};
use crate::numeric::{to_f64, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

/// State after n splits: current type, un-normalized widths λ⁽ⁿ⁾, and
/// Q_n with Q_n·λ⁽ⁿ⁾ = λ⁽⁰⁾ exactly at every step.
///
/// Splits only ever subtract widths, so the widths live as integer
/// numerators over one fixed denominator; steps never normalize.
#[derive(Debug, Clone)]
pub struct ExpansionState {
    step: usize,
    permutation: GeneralizedPermutation,
    numerators: Vec<BigInt>,
    denominator: BigInt,
    matrix: ExpansionMatrix,
    column_norms: Vec<BigInt>,
    initial_widths: WidthVector,
    start: GeneralizedPermutation,
    history: Vec<SplitRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltReason {
    EqualCriticalWidths,
    AmalgamationCase,
    SelfCritical,
}

impl ExpansionState {
    pub fn new(pi: GeneralizedPermutation, widths: WidthVector) -> ExpansionState {
        let d = pi.d();
        let denominator = widths
            .entries()
            .iter()
            .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let numerators = widths
            .entries()
            .iter()
            .map(|e| e.numer() * (&denominator / e.denom()))
            .collect();
        ExpansionState {
            step: 0,
            start: pi.clone(),
            permutation: pi,
            initial_widths: widths,
            numerators,
            denominator,
            matrix: ExpansionMatrix::identity(d),
            column_norms: vec![BigInt::one(); d],
            history: Vec::new(),
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn permutation(&self) -> &GeneralizedPermutation {
        &self.permutation
    }

    pub fn start(&self) -> &GeneralizedPermutation {
        &self.start
    }

    pub fn widths(&self) -> WidthVector {
        WidthVector::new(
            self.numerators
                .iter()
                .map(|n| Rational::new(n.clone(), self.denominator.clone()))
                .collect(),
        )
    }

    pub fn matrix(&self) -> &ExpansionMatrix {
        &self.matrix
    }

    pub fn column_norms(&self) -> &[BigInt] {
        &self.column_norms
    }

    pub fn history(&self) -> &[SplitRecord] {
        &self.history
    }

    pub fn stage(&self) -> Stage {
        Stage {
            start: self.start.clone(),
            current: self.permutation.clone(),
            matrix: self.matrix.clone(),
        }
    }

    /// One Rauzy split; Q gains the winner's column in the loser's column.
    pub fn advance(&mut self) -> Result<SplitRecord, HaltReason> {
        let (top_c, bottom_c) = self.permutation.critical_bands();
        if top_c == bottom_c {
            return Err(HaltReason::SelfCritical);
        }
        let nt = &self.numerators[top_c.index()];
        let nb = &self.numerators[bottom_c.index()];
        let winner_side = match nt.cmp(nb) {
            std::cmp::Ordering::Greater => Side::Top,
            std::cmp::Ordering::Less => Side::Bottom,
            std::cmp::Ordering::Equal => {
                // Mirror the error classification of the width-level split.
                return Err(
                    match self.permutation.rauzy_split(&self.widths()).unwrap_err() {
                        SplitError::AmalgamationCase => HaltReason::AmalgamationCase,
                        _ => HaltReason::EqualCriticalWidths,
                    },
                );
            }
        };
        let out = self
            .permutation
            .split_with_winner(winner_side)
            .expect("widths satisfying the switch condition admit this split");
        let rec = out.record;
        self.permutation = out.permutation;
        let delta = self.numerators[rec.loser.index()].clone();
        self.numerators[rec.winner.index()] -= delta;
        self.matrix.apply(&ElementaryMatrix {
            winner: rec.winner,
            loser: rec.loser,
        });
        let gained = self.column_norms[rec.winner.index()].clone();
        self.column_norms[rec.loser.index()] += gained;
        self.history.push(rec);
        self.step += 1;
        Ok(rec)
    }

    /// Q_n·λ⁽ⁿ⁾ = λ⁽⁰⁾, entrywise exact.
    pub fn check_invariant(&self) -> bool {
        self.matrix.mul_vector(self.widths().entries()) == self.initial_widths.entries()
            && self.column_norms == self.matrix.column_norms()
    }

    /// max/min of the column norms, exact.
    pub fn column_ratio(&self) -> Rational {
        let max = self.column_norms.iter().max().unwrap().clone();
        let min = self.column_norms.iter().min().unwrap().clone();
        Rational::new(max, min)
    }

    /// Columns C-distributed: all pairwise norm ratios strictly inside
    /// (1/C, C).
    pub fn is_distributed(&self, c: u32) -> bool {
        let max = self.column_norms.iter().max().unwrap();
        let min = self.column_norms.iter().min().unwrap();
        max < &(min * BigInt::from(c))
    }
}

/// A finite splitting sequence from a start type: the current type and the
/// accumulated matrix. Carries the geometry needed for exact probabilities.
#[derive(Debug, Clone)]
pub struct Stage {
    pub start: GeneralizedPermutation,
    pub current: GeneralizedPermutation,
    pub matrix: ExpansionMatrix,
}

impl Stage {
    pub fn from_replay(
        start: &GeneralizedPermutation,
        moves: &[(BandLabel, BandLabel)],
    ) -> Result<Stage, ReplayError> {
        let replay = start.replay_winner_sequence(moves)?;
        Ok(Stage {
            start: start.clone(),
            current: replay.permutation,
            matrix: replay.matrix,
        })
    }

    pub fn start_space(&self) -> ConfigurationSpace {
        ConfigurationSpace::of(&self.start)
    }

    pub fn current_space(&self) -> ConfigurationSpace {
        ConfigurationSpace::of(&self.current)
    }

    /// Exact probability that the next split has `winner_side`'s critical
    /// band as winner: the measure on the start space of the image of the
    /// clipped region λ_winner ≥ λ_loser, relative to the whole stage image.
    pub fn split_probability(&self, winner_side: Side) -> Result<Rational, GeometryError> {
        let winner = self.current.critical_band(winner_side);
        let loser = self.current.critical_band(winner_side.other());
        if winner == loser {
            return Err(GeometryError::DegeneratePolytope(
                "critical bands coincide".into(),
            ));
        }
        let current = self.current_space();
        let start = self.start_space();
        let tri = current.triangulation();
        let region = tri.clip(&HalfSpace::coordinate_ge(self.current.d(), winner, loser));
        let whole = image_chart_measure(&self.matrix, &tri, start.plane())?;
        let part = image_chart_measure(&self.matrix, &region, start.plane())?;
        Ok(part / whole)
    }

    /// max/min of |Qv| over the current space's vertices.
    pub fn vertex_ratio(&self) -> Rational {
        vertex_norm_ratio(&self.matrix, &self.current_space())
    }
}

/// Diameter of JQ(Δ): the image of the simplex is the simplex on the
/// projectivized columns, so its diameter is the largest pairwise distance
/// between them. Evaluated in f64 with shift-based conversions, so it stays
/// cheap when the entries outgrow machine range.
pub fn diameter(q: &ExpansionMatrix) -> f64 {
    let d = q.d();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let l = BandLabel::from_index(j);
            let norm = q.column_norm(l);
            q.column(l)
                .iter()
                .map(|e| crate::numeric::ratio_f64(e, &norm))
                .collect()
        })
        .collect();
    let mut best = 0.0f64;
    for i in 0..d {
        for j in i + 1..d {
            let dist: f64 = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            best = best.max(dist);
        }
    }
    best
}

/// Derivative magnitude of JQ along the segment Q·u1 → Q·u2 at parameter t,
/// from the closed form g'(t) = (|w1|·w2 − |w2|·w1)/|f(t)|².
pub fn line_derivative_magnitude(
    q: &ExpansionMatrix,
    u1: &[Rational],
    u2: &[Rational],
    t: &Rational,
) -> f64 {
    let w1 = q.mul_vector(u1);
    let w2 = q.mul_vector(u2);
    let n1 = crate::numeric::coordinate_sum(&w1);
    let n2 = crate::numeric::coordinate_sum(&w2);
    let numer: Vec<Rational> = w1
        .iter()
        .zip(&w2)
        .map(|(a, b)| &n1 * b - &n2 * a)
        .collect();
    let ft = (Rational::one() - t) * &n1 + t * &n2;
    let numer_len = numer.iter().map(|x| to_f64(x).powi(2)).sum::<f64>().sqrt();
    numer_len / to_f64(&ft).powi(2)
}

/// Verifies the C² bound on derivative-magnitude ratios along a segment
/// with endpoints u1, u2 in the boundary of the simplex, at the sampled
/// parameters. The ratio |g'(t1)|/|g'(t2)| equals (|f(t2)|/|f(t1)|)², which
/// is exact, so the check is an exact rational comparison.
pub fn line_distortion_bound_check(
    q: &ExpansionMatrix,
    u1: &[Rational],
    u2: &[Rational],
    c: &Rational,
    ts: &[Rational],
) -> bool {
    let n1 = crate::numeric::coordinate_sum(&q.mul_vector(u1));
    let n2 = crate::numeric::coordinate_sum(&q.mul_vector(u2));
    let c2 = c * c;
    let norms: Vec<Rational> = ts
        .iter()
        .map(|t| (Rational::one() - t) * &n1 + t * &n2)
        .collect();
    for a in &norms {
        for b in &norms {
            // ratio of derivative magnitudes = (b/a)²  must be ≤ C².
            if &(b * b) > &(&c2 * &(a * a)) {
                return false;
            }
        }
    }
    true
}

/// Per-step detector output.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorReport {
    pub step: usize,
    /// max/min of the column norms (f64 mirror of the exact value).
    pub column_ratio: f64,
    /// max/min of |Q v| over the current configuration space's vertices.
    pub vertex_ratio: f64,
    pub diameter: f64,
    /// (C, columns C-distributed, stage C-uniformly distorted) per threshold.
    pub flags: Vec<DetectorFlag>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetectorFlag {
    pub c: u32,
    pub distributed: bool,
    pub distorted: bool,
}

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub c_values: Vec<u32>,
    pub compute_diameter: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            c_values: vec![2, 4, 8],
            compute_diameter: true,
        }
    }
}

/// Trace of a full run: per-step reports, the splits taken, rising edges of
/// each detector, and the halt if one occurred.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub reports: Vec<DetectorReport>,
    pub records: Vec<SplitRecord>,
    pub halt: Option<HaltReason>,
    /// Steps at which "columns C-distributed" switches on, per C.
    pub distribution_hits: Vec<(u32, Vec<usize>)>,
    /// Steps at which "C-uniformly distorted" switches on, per C.
    pub distortion_hits: Vec<(u32, Vec<usize>)>,
}

impl RunTrace {
    pub fn first_distribution_hit(&self, c: u32) -> Option<usize> {
        self.distribution_hits
            .iter()
            .find(|(cc, _)| *cc == c)
            .and_then(|(_, hits)| hits.first().copied())
    }
}

/// Detector evaluation for one state.
fn report_for(state: &ExpansionState, config: &DetectorConfig) -> DetectorReport {
    let current_space = ConfigurationSpace::of(state.permutation());
    let exponent = current_space.dim() as u32 + 1;
    let column_ratio = state.column_ratio();
    let vertex_ratio = vertex_norm_ratio(state.matrix(), &current_space);
    let flags = config
        .c_values
        .iter()
        .map(|&c| {
            let cr = Rational::from_integer(c.into());
            let distributed = column_ratio < cr;
            // C-uniform distortion == vertex norms C^{1/(dim+1)}-distributed.
            let distorted = crate::geometry::projective::power(&vertex_ratio, exponent)
                < Rational::from_integer(c.into());
            DetectorFlag {
                c,
                distributed,
                distorted,
            }
        })
        .collect();
    DetectorReport {
        step: state.step_count(),
        column_ratio: to_f64(&column_ratio),
        vertex_ratio: to_f64(&vertex_ratio),
        diameter: if config.compute_diameter {
            diameter(state.matrix())
        } else {
            f64::NAN
        },
        flags,
    }
}

/// Runs up to `max_steps` splits, streaming detector reports (the step-0
/// report covers the identity stage).
pub fn run(
    pi0: &GeneralizedPermutation,
    x0: &WidthVector,
    max_steps: usize,
    config: &DetectorConfig,
) -> RunTrace {
    let mut state = ExpansionState::new(pi0.clone(), x0.clone());
    let mut reports = vec![report_for(&state, config)];
    let mut records = Vec::new();
    let mut halt = None;
    for _ in 0..max_steps {
        match state.advance() {
            Ok(rec) => {
                records.push(rec);
                reports.push(report_for(&state, config));
            }
            Err(reason) => {
                halt = Some(reason);
                break;
            }
        }
    }
    let mut distribution_hits = Vec::new();
    let mut distortion_hits = Vec::new();
    for (ci, &c) in config.c_values.iter().enumerate() {
        let mut dist = Vec::new();
        let mut dtor = Vec::new();
        for (i, r) in reports.iter().enumerate() {
            let f = r.flags[ci];
            let prev = if i == 0 {
                (false, false)
            } else {
                let p = reports[i - 1].flags[ci];
                (p.distributed, p.distorted)
            };
            if f.distributed && !prev.0 {
                dist.push(r.step);
            }
            if f.distorted && !prev.1 {
                dtor.push(r.step);
            }
        }
        distribution_hits.push((c, dist));
        distortion_hits.push((c, dtor));
    }
    RunTrace {
        reports,
        records,
        halt,
        distribution_hits,
        distortion_hits,
    }
}

/// Run lengths of consecutive equal winners, in order.
pub fn winner_runs(records: &[SplitRecord]) -> Vec<(BandLabel, usize)> {
    let mut runs: Vec<(BandLabel, usize)> = Vec::new();
    for rec in records {
        match runs.last_mut() {
            Some((w, n)) if *w == rec.winner => *n += 1,
            _ => runs.push((rec.winner, 1)),
        }
    }
    runs
}

/// Shrink factor R = C²(1−2s)/(C²(1−2s)+2s) of a positive sequence, where s
/// is the minimum distance from the projectivized columns of its matrix to
/// the boundary of the simplex. Appending the sequence to any C-distributed
/// stage contracts the image diameter by better than R.
pub fn diameter_shrink_factor(q_seq: &ExpansionMatrix, c: f64) -> f64 {
    let d = q_seq.d();
    let mut min_coord = f64::INFINITY;
    for j in 0..d {
        let mut e = vec![Rational::from_integer(0.into()); d];
        e[j] = Rational::one();
        let col = projectivize(q_seq, &e).expect("nonzero column");
        for x in &col {
            min_coord = min_coord.min(to_f64(x));
        }
    }
    // Distance from a point of the sum-one plane to the face x_i = 0 is
    // x_i·√(d/(d−1)).
    let s = min_coord * (d as f64 / (d as f64 - 1.0)).sqrt();
    let c2 = c * c;
    c2 * (1.0 - 2.0 * s) / (c2 * (1.0 - 2.0 * s) + 2.0 * s)
}

/// E = I + M_{winner,loser} applied on the right of Q.
pub fn apply_split(q: &mut ExpansionMatrix, rec: &SplitRecord) {
    q.apply(&ElementaryMatrix {
        winner: rec.winner,
        loser: rec.loser,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn gp(top: &[u32], bottom: &[u32]) -> GeneralizedPermutation {
        GeneralizedPermutation::from_rows(top.to_vec(), bottom.to_vec())
    }

    #[test]
    fn single_step_subtracts_widths() {
        let pi = gp(&[1, 2], &[2, 1]);
        let mut state = ExpansionState::new(pi, WidthVector::new(vec![rat(3, 5), rat(2, 5)]));
        let rec = state.advance().unwrap();
        assert_eq!(rec.winner, BandLabel(1));
        assert_eq!(state.widths().entries(), &[rat(1, 5), rat(2, 5)]);
        assert!(state.check_invariant());
    }

    #[test]
    fn advance_agrees_with_width_level_split() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        let w = WidthVector::new(vec![rat(23, 106), rat(30, 106), rat(28, 106), rat(25, 106)]);
        assert!(w.satisfies_switch(&pi));
        let mut state = ExpansionState::new(pi.clone(), w.clone());
        let mut slow_pi = pi;
        let mut slow_w = w;
        for _ in 0..50 {
            match slow_pi.rauzy_split(&slow_w) {
                Ok(out) => {
                    let rec = state.advance().unwrap();
                    assert_eq!(rec, out.record);
                    slow_pi = out.permutation;
                    slow_w = out.widths;
                    assert_eq!(state.widths().entries(), slow_w.entries());
                    assert_eq!(state.permutation(), &slow_pi);
                }
                Err(_) => {
                    assert!(state.advance().is_err());
                    break;
                }
            }
        }
    }

    #[test]
    fn invariant_holds_along_a_full_orbit() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        let w = WidthVector::new(vec![rat(17, 100), rat(33, 100), rat(29, 100), rat(21, 100)]);
        assert!(w.satisfies_switch(&pi));
        let mut state = ExpansionState::new(pi, w);
        for _ in 0..40 {
            if state.advance().is_err() {
                break;
            }
        }
        assert!(state.step_count() > 5, "orbit halted suspiciously early");
        assert!(state.check_invariant());
        assert_eq!(state.matrix().determinant(), rat_int(1));
    }

    #[test]
    fn golden_like_rational_halts_exactly_when_cf_ends() {
        // Width ratio 10/7 = [1; 2, 3]: winner runs 1, 2, then a truncated 2,
        // and the orbit halts on equal widths.
        let pi = gp(&[1, 2], &[2, 1]);
        let w = WidthVector::new(vec![rat(10, 17), rat(7, 17)]);
        let trace = run(&pi, &w, 100, &DetectorConfig::default());
        assert_eq!(trace.halt, Some(HaltReason::EqualCriticalWidths));
        let runs = winner_runs(&trace.records);
        let lengths: Vec<usize> = runs.iter().map(|&(_, n)| n).collect();
        assert_eq!(lengths, vec![1, 2, 2]);
        // Winners alternate between the two bands.
        for pair in runs.windows(2) {
            assert_ne!(pair[0].0, pair[1].0);
        }
    }

    #[test]
    fn identity_stage_is_distributed_for_every_c() {
        let pi = gp(&[1, 2], &[2, 1]);
        let state = ExpansionState::new(pi, WidthVector::new(vec![rat(1, 3), rat(2, 3)]));
        assert_eq!(state.column_ratio(), rat_int(1));
        assert!(state.is_distributed(2));
        let report = report_for(&state, &DetectorConfig::default());
        assert!(report.flags.iter().all(|f| f.distributed && f.distorted));
    }

    #[test]
    fn diameter_of_identity_is_sqrt_two() {
        let q = ExpansionMatrix::identity(4);
        assert!((diameter(&q) - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn diameter_nonincreasing_along_orbit() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        let w = WidthVector::new(vec![rat(19, 128), rat(45, 128), rat(31, 128), rat(33, 128)]);
        assert!(w.satisfies_switch(&pi));
        let trace = run(&pi, &w, 60, &DetectorConfig::default());
        for pair in trace.reports.windows(2) {
            assert!(
                pair[1].diameter <= pair[0].diameter + 1e-12 * pair[0].diameter + 1e-14,
                "diameter must not increase: {} -> {}",
                pair[0].diameter,
                pair[1].diameter
            );
        }
    }

    #[test]
    fn line_distortion_bound_for_the_two_band_matrix() {
        // Q = [[1,1],[0,1]] has column norms 1 and 2; along the full simplex
        // the derivative-magnitude ratios stay within C² = 4.
        let q = ExpansionMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let u1 = vec![rat_int(1), rat_int(0)];
        let u2 = vec![rat_int(0), rat_int(1)];
        let ts = [rat_int(0), rat(1, 2), rat_int(1)];
        assert!(line_distortion_bound_check(&q, &u1, &u2, &rat_int(2), &ts));
        // The endpoint ratio is exactly 4, so a slightly smaller C fails.
        assert!(!line_distortion_bound_check(&q, &u1, &u2, &rat(199, 100), &ts));
        // Identity: ratio is one everywhere.
        let id = ExpansionMatrix::identity(2);
        assert!(line_distortion_bound_check(&id, &u1, &u2, &rat(101, 100), &ts));
        // Derivative magnitude is largest where |f| is smallest.
        let g0 = line_derivative_magnitude(&q, &u1, &u2, &rat_int(0));
        let g1 = line_derivative_magnitude(&q, &u1, &u2, &rat_int(1));
        assert!((g0 / g1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn stage_split_probability_symmetric_identity() {
        let pi = gp(&[1, 2], &[2, 1]);
        let stage = Stage::from_replay(&pi, &[]).unwrap();
        let p_top = stage.split_probability(Side::Top).unwrap();
        let p_bottom = stage.split_probability(Side::Bottom).unwrap();
        assert_eq!(p_top, rat(1, 2));
        assert_eq!(p_bottom, rat(1, 2));
    }

    #[test]
    fn detector_rising_edges_recorded() {
        let pi = gp(&[1, 2], &[2, 1]);
        let w = WidthVector::new(vec![rat(355, 468), rat(113, 468)]);
        let trace = run(&pi, &w, 30, &DetectorConfig::default());
        assert_eq!(trace.first_distribution_hit(2), Some(0));
        let hits = &trace
            .distribution_hits
            .iter()
            .find(|(c, _)| *c == 2)
            .unwrap()
            .1;
        // Rising edges only: consecutive recorded steps are non-adjacent
        // unless the flag dropped in between.
        for pair in hits.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }
}
