//! Combinatorial types of interval exchanges and the Rauzy induction step.
//!
//! A band is a strip joining two of the 2d band ends arranged on the top and
//! bottom edges of a thickened interval. A band whose ends lie on the same
//! side is orientation reversing. The rightmost end on each side is the
//! critical position; Rauzy induction cuts the width of the narrower critical
//! band out of the wider one and relocates the narrower band's critical end
//! next to the wider band's other end.
//!
//! Everything in this module is exact: widths are rationals, matrices are
//! integers. Floating point is forbidden here because splits are subtractive
//! and error-amplifying.

use crate::matrix::{ElementaryMatrix, ExpansionMatrix};
use crate::numeric::{coordinate_sum, format_rational, parse_rational, Rational};
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Label of a band, 1-based: valid labels are 1..=d.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BandLabel(pub u32);

impl BandLabel {
    /// Zero-based coordinate index of this band.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        BandLabel(i as u32 + 1)
    }
}

impl fmt::Debug for BandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Side of the thickened interval.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Top,
    Bottom,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
        }
    }
}

/// Ordered arrangement of band ends on the two sides of the interval: the
/// combinatorial type of a (possibly non-classical) interval exchange.
///
/// Invariants (checked by [`GeneralizedPermutation::validate`]):
/// each label in 1..=d occurs exactly twice across both rows, both rows are
/// nonempty, and the type is recurrent: the sets of reversing bands on top
/// and bottom are either both empty (classical) or both nonempty.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GeneralizedPermutation {
    d: usize,
    top: Vec<BandLabel>,
    bottom: Vec<BandLabel>,
}

impl fmt::Debug for GeneralizedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_row = |row: &[BandLabel]| {
            row.iter()
                .map(|l| l.0.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "{} | {}", fmt_row(&self.top), fmt_row(&self.bottom))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeViolation {
    /// A label occurs a number of times different from two.
    LabelCount { label: BandLabel, count: usize },
    /// A label lies outside 1..=d.
    LabelRange { label: BandLabel, d: usize },
    EmptySide { side: Side },
    /// Reversing bands on one side only.
    NotRecurrent,
}

impl fmt::Display for TypeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeViolation::LabelCount { label, count } => {
                write!(f, "label {label} occurs {count} times, expected 2")
            }
            TypeViolation::LabelRange { label, d } => {
                write!(f, "label {label} outside 1..={d}")
            }
            TypeViolation::EmptySide { side } => write!(f, "{side:?} row is empty"),
            TypeViolation::NotRecurrent => {
                write!(f, "reversing bands on one side only (not recurrent)")
            }
        }
    }
}

/// Outcome of [`GeneralizedPermutation::validate`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<TypeViolation>,
    /// Reversing bands on top (both ends on the top row).
    pub reversing_top: BTreeSet<BandLabel>,
    /// Reversing bands on bottom.
    pub reversing_bottom: BTreeSet<BandLabel>,
    pub classical: bool,
    pub recurrent: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    /// The two critical widths agree; the split is undefined.
    #[error("critical widths are equal; the split is undefined")]
    EqualCriticalWidths,
    /// Equal critical widths forced by the switch condition: the two critical
    /// bands are the only reversing bands. Reported, never resolved here.
    #[error("critical bands are the only reversing bands with equal widths (amalgamation case)")]
    AmalgamationCase,
    /// One band occupies both critical positions.
    #[error("a single band occupies both critical positions")]
    SelfCritical,
    /// No positive widths realize this winner choice (the loser is the sole
    /// reversing band on its side while the winner reverses).
    #[error("no widths realize this split direction")]
    Unrealizable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: prescribed pair ({winner}, {loser}) is not the critical pair")]
    NotCritical {
        step: usize,
        winner: BandLabel,
        loser: BandLabel,
    },
    #[error("step {step}: split failed: {source}")]
    Split { step: usize, source: SplitError },
}

/// Record of one split: the winner is the wider critical band (the one that
/// is split), the loser the narrower one that does the splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitRecord {
    pub winner: BandLabel,
    pub loser: BandLabel,
    pub winner_side: Side,
}

/// Witness of a reduction: a cut of the label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionWitness {
    pub s1: BTreeSet<BandLabel>,
    pub s2: BTreeSet<BandLabel>,
    pub kind: ReductionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    Combinatorial,
    Measure,
}

/// Everything produced by one width-driven Rauzy split.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub permutation: GeneralizedPermutation,
    pub widths: WidthVector,
    pub elementary: ElementaryMatrix,
    pub record: SplitRecord,
}

/// Result of replaying a prescribed winner/loser sequence.
#[derive(Debug, Clone)]
pub struct Replay {
    pub permutation: GeneralizedPermutation,
    pub matrix: ExpansionMatrix,
}

impl GeneralizedPermutation {
    /// Builds a type from 1-based label rows without validating; call
    /// [`validate`](Self::validate) to get the full report.
    pub fn from_rows(top: Vec<u32>, bottom: Vec<u32>) -> Self {
        let d = top
            .iter()
            .chain(bottom.iter())
            .copied()
            .max()
            .unwrap_or(0) as usize;
        GeneralizedPermutation {
            d,
            top: top.into_iter().map(BandLabel).collect(),
            bottom: bottom.into_iter().map(BandLabel).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn top(&self) -> &[BandLabel] {
        &self.top
    }

    pub fn bottom(&self) -> &[BandLabel] {
        &self.bottom
    }

    pub fn row(&self, side: Side) -> &[BandLabel] {
        match side {
            Side::Top => &self.top,
            Side::Bottom => &self.bottom,
        }
    }

    /// Labels of bands whose both ends lie on `side`.
    pub fn reversing(&self, side: Side) -> BTreeSet<BandLabel> {
        let row = self.row(side);
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        for &l in row {
            if !seen.insert(l) {
                out.insert(l);
            }
        }
        out
    }

    pub fn is_classical(&self) -> bool {
        self.reversing(Side::Top).is_empty() && self.reversing(Side::Bottom).is_empty()
    }

    /// Checks every type invariant and reports all violations together with
    /// the reversing-band sets and the classical/recurrent classification.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut counts = vec![0usize; self.d + 1];
        for &l in self.top.iter().chain(self.bottom.iter()) {
            let id = l.0 as usize;
            if id == 0 || id > self.d {
                violations.push(TypeViolation::LabelRange { label: l, d: self.d });
            } else {
                counts[id] += 1;
            }
        }
        for id in 1..=self.d {
            if counts[id] != 2 {
                violations.push(TypeViolation::LabelCount {
                    label: BandLabel(id as u32),
                    count: counts[id],
                });
            }
        }
        if self.top.is_empty() {
            violations.push(TypeViolation::EmptySide { side: Side::Top });
        }
        if self.bottom.is_empty() {
            violations.push(TypeViolation::EmptySide { side: Side::Bottom });
        }
        let s_t = self.reversing(Side::Top);
        let s_b = self.reversing(Side::Bottom);
        let recurrent = s_t.is_empty() == s_b.is_empty();
        if !recurrent {
            violations.push(TypeViolation::NotRecurrent);
        }
        let classical = s_t.is_empty() && s_b.is_empty();
        ValidationReport {
            violations,
            reversing_top: s_t,
            reversing_bottom: s_b,
            classical,
            recurrent,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_valid()
    }

    /// Labels owning the rightmost end on each side: (top, bottom).
    pub fn critical_bands(&self) -> (BandLabel, BandLabel) {
        (
            *self.top.last().expect("top row nonempty"),
            *self.bottom.last().expect("bottom row nonempty"),
        )
    }

    pub fn critical_band(&self, side: Side) -> BandLabel {
        *self.row(side).last().expect("row nonempty")
    }

    /// The purely combinatorial split with the given side's critical band as
    /// winner. Width bookkeeping is left to the caller; the move itself is
    /// determined by the winner choice.
    ///
    /// The loser's critical end is deleted and reinserted next to the
    /// winner's other end: to its right when the winner's ends lie on
    /// opposite sides, to its left when they lie on the same side.
    pub fn split_with_winner(&self, winner_side: Side) -> Result<SplitOutcome2, SplitError> {
        let winner = self.critical_band(winner_side);
        let loser = self.critical_band(winner_side.other());
        if winner == loser {
            return Err(SplitError::SelfCritical);
        }
        // A reversing winner pulls the loser's end onto its own side. If the
        // loser was the sole reversing band on its side, the result would not
        // be recurrent; the switch condition makes such widths impossible.
        let winner_row = self.row(winner_side);
        let winner_reversing = winner_row.iter().filter(|&&l| l == winner).count() == 2;
        if winner_reversing {
            let loser_side_rev = self.reversing(winner_side.other());
            if loser_side_rev.len() == 1 && loser_side_rev.contains(&loser) {
                return Err(SplitError::Unrealizable);
            }
        }

        let mut top = self.top.clone();
        let mut bottom = self.bottom.clone();
        {
            let loser_row = match winner_side.other() {
                Side::Top => &mut top,
                Side::Bottom => &mut bottom,
            };
            let popped = loser_row.pop().expect("loser row nonempty");
            debug_assert_eq!(popped, loser);
        }
        // Find the winner's other end in the updated rows. Its critical end
        // is still the last entry of the winner row.
        let (other_side, other_pos) = {
            let row = match winner_side {
                Side::Top => &top,
                Side::Bottom => &bottom,
            };
            let mut pos_on_winner_side = None;
            for (i, &l) in row.iter().enumerate() {
                if l == winner && i + 1 != row.len() {
                    pos_on_winner_side = Some(i);
                    break;
                }
            }
            match pos_on_winner_side {
                Some(i) => (winner_side, i),
                None => {
                    let row = match winner_side.other() {
                        Side::Top => &top,
                        Side::Bottom => &bottom,
                    };
                    let i = row
                        .iter()
                        .position(|&l| l == winner)
                        .expect("winner has an end on the other side");
                    (winner_side.other(), i)
                }
            }
        };
        let insert_at = if other_side == winner_side {
            other_pos // same side: immediately to the left
        } else {
            other_pos + 1 // opposite sides: immediately to the right
        };
        match other_side {
            Side::Top => top.insert(insert_at, loser),
            Side::Bottom => bottom.insert(insert_at, loser),
        }
        let permutation = GeneralizedPermutation {
            d: self.d,
            top,
            bottom,
        };
        debug_assert!(permutation.is_valid(), "split broke invariants");
        Ok(SplitOutcome2 {
            permutation,
            record: SplitRecord {
                winner,
                loser,
                winner_side,
            },
        })
    }

    /// One width-driven Rauzy induction step: the wider critical band wins,
    /// its width shrinks by the loser's width, and λ = E·λ' holds exactly
    /// for the returned elementary matrix E.
    pub fn rauzy_split(&self, widths: &WidthVector) -> Result<SplitOutcome, SplitError> {
        let (top_c, bottom_c) = self.critical_bands();
        if top_c == bottom_c {
            return Err(SplitError::SelfCritical);
        }
        let wt = widths.get(top_c);
        let wb = widths.get(bottom_c);
        if wt == wb {
            let s_t = self.reversing(Side::Top);
            let s_b = self.reversing(Side::Bottom);
            let only_reversing = s_t.len() == 1
                && s_b.len() == 1
                && (s_t.contains(&top_c) && s_b.contains(&bottom_c)
                    || s_t.contains(&bottom_c) && s_b.contains(&top_c));
            return Err(if only_reversing {
                SplitError::AmalgamationCase
            } else {
                SplitError::EqualCriticalWidths
            });
        }
        let winner_side = if wt > wb { Side::Top } else { Side::Bottom };
        let out = self.split_with_winner(winner_side)?;
        let rec = out.record;
        let mut new_widths = widths.clone();
        let delta = new_widths.get(rec.loser).clone();
        *new_widths.get_mut(rec.winner) -= delta;
        Ok(SplitOutcome {
            permutation: out.permutation,
            widths: new_widths,
            elementary: ElementaryMatrix {
                winner: rec.winner,
                loser: rec.loser,
            },
            record: rec,
        })
    }

    /// Replays a prescribed (winner, loser) sequence combinatorially and
    /// accumulates Q = E_1⋯E_n. Fails if a prescribed pair is not the
    /// critical pair at its step.
    pub fn replay_winner_sequence(
        &self,
        seq: &[(BandLabel, BandLabel)],
    ) -> Result<Replay, ReplayError> {
        let mut current = self.clone();
        let mut q = ExpansionMatrix::identity(self.d);
        for (step, &(winner, loser)) in seq.iter().enumerate() {
            let (top_c, bottom_c) = current.critical_bands();
            let winner_side = if winner == top_c && loser == bottom_c {
                Side::Top
            } else if winner == bottom_c && loser == top_c {
                Side::Bottom
            } else {
                return Err(ReplayError::NotCritical { step, winner, loser });
            };
            let out = current
                .split_with_winner(winner_side)
                .map_err(|source| ReplayError::Split { step, source })?;
            q.apply(&ElementaryMatrix { winner, loser });
            current = out.permutation;
        }
        Ok(Replay {
            permutation: current,
            matrix: q,
        })
    }

    /// Cut witnesses in lexicographic (i, j) order of prefix lengths.
    ///
    /// A pair of prefixes is a cut when every label seen there has both its
    /// ends inside, both parts are nonempty, and each part carries reversing
    /// bands on both sides or on none. The last condition is what lets some
    /// positive widths place the cut at a single point of the interval:
    /// widths of an actual interval exchange satisfy the switch condition,
    /// and a part with reversing bands on one side only would force a width
    /// to zero.
    fn cut_witnesses(&self) -> Vec<ReductionWitness> {
        let all: BTreeSet<BandLabel> = self.top.iter().chain(&self.bottom).copied().collect();
        let s_t = self.reversing(Side::Top);
        let s_b = self.reversing(Side::Bottom);
        let balanced = |set: &BTreeSet<BandLabel>| {
            let has_top = set.iter().any(|l| s_t.contains(l));
            let has_bottom = set.iter().any(|l| s_b.contains(l));
            has_top == has_bottom
        };
        let mut out = Vec::new();
        for i in 0..=self.top.len() {
            for j in 0..=self.bottom.len() {
                let size = i + j;
                if size == 0 || size == self.top.len() + self.bottom.len() {
                    continue;
                }
                let mut counts = std::collections::BTreeMap::new();
                for &l in self.top[..i].iter().chain(self.bottom[..j].iter()) {
                    *counts.entry(l).or_insert(0usize) += 1;
                }
                if !counts.values().all(|&c| c == 2) {
                    continue;
                }
                let s1: BTreeSet<BandLabel> = counts.keys().copied().collect();
                let s2: BTreeSet<BandLabel> = all.difference(&s1).copied().collect();
                if s1.is_empty() || s2.is_empty() || !balanced(&s1) || !balanced(&s2) {
                    continue;
                }
                out.push(ReductionWitness {
                    s1,
                    s2,
                    kind: ReductionKind::Combinatorial,
                });
            }
        }
        out
    }

    /// Scans all cut positions for a partition of the bands into a left and
    /// a right interval exchange; returns the first witness found.
    pub fn combinatorial_reduction(&self) -> Option<ReductionWitness> {
        self.cut_witnesses().into_iter().next()
    }

    /// A combinatorial reduction is a measure reduction exactly when the
    /// reversing bands lie entirely in S1 or entirely in S2.
    pub fn measure_reduction(&self) -> Option<ReductionWitness> {
        let reversing: BTreeSet<BandLabel> = self
            .reversing(Side::Top)
            .union(&self.reversing(Side::Bottom))
            .copied()
            .collect();
        self.cut_witnesses()
            .into_iter()
            .find(|w| {
                reversing.iter().all(|l| w.s1.contains(l))
                    || reversing.iter().all(|l| w.s2.contains(l))
            })
            .map(|mut w| {
                w.kind = ReductionKind::Measure;
                w
            })
    }

    /// Relabels bands by order of first occurrence scanning top then bottom.
    /// This is the lexicographically least relabeling, so two types are
    /// equal as unlabeled types iff their canonical forms coincide.
    pub fn canonical_form(&self) -> GeneralizedPermutation {
        let mut map = vec![0u32; self.d + 1];
        let mut next = 1u32;
        let relabel = |l: BandLabel, map: &mut Vec<u32>, next: &mut u32| -> BandLabel {
            let slot = &mut map[l.0 as usize];
            if *slot == 0 {
                *slot = *next;
                *next += 1;
            }
            BandLabel(*slot)
        };
        let top = self
            .top
            .iter()
            .map(|&l| relabel(l, &mut map, &mut next))
            .collect();
        let bottom = self
            .bottom
            .iter()
            .map(|&l| relabel(l, &mut map, &mut next))
            .collect();
        GeneralizedPermutation {
            d: self.d,
            top,
            bottom,
        }
    }

    /// Applies a relabeling given as a map index -> new label.
    pub fn relabel(&self, sigma: &[u32]) -> GeneralizedPermutation {
        let map = |l: &BandLabel| BandLabel(sigma[l.index()]);
        GeneralizedPermutation {
            d: self.d,
            top: self.top.iter().map(map).collect(),
            bottom: self.bottom.iter().map(map).collect(),
        }
    }
}

/// Output of a combinatorial split (no widths involved).
#[derive(Debug, Clone)]
pub struct SplitOutcome2 {
    pub permutation: GeneralizedPermutation,
    pub record: SplitRecord,
}

impl Serialize for GeneralizedPermutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            d: usize,
            top: &'a [BandLabel],
            bottom: &'a [BandLabel],
        }
        Repr {
            d: self.d,
            top: &self.top,
            bottom: &self.bottom,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GeneralizedPermutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            d: usize,
            top: Vec<u32>,
            bottom: Vec<u32>,
        }
        let r = Repr::deserialize(deserializer)?;
        let pi = GeneralizedPermutation::from_rows(r.top, r.bottom);
        if pi.d != r.d {
            return Err(D::Error::custom(format!(
                "declared d = {} but labels require d = {}",
                r.d, pi.d
            )));
        }
        Ok(pi)
    }
}

/// Exact nonnegative band widths λ, indexed by band label.
#[derive(Clone, PartialEq, Eq)]
pub struct WidthVector {
    entries: Vec<Rational>,
}

impl fmt::Debug for WidthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(e))?;
        }
        write!(f, "]")
    }
}

impl WidthVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        WidthVector { entries }
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, l: BandLabel) -> &Rational {
        &self.entries[l.index()]
    }

    pub fn get_mut(&mut self, l: BandLabel) -> &mut Rational {
        &mut self.entries[l.index()]
    }

    pub fn total(&self) -> Rational {
        coordinate_sum(&self.entries)
    }

    pub fn is_normalized(&self) -> bool {
        self.total() == Rational::from_integer(1.into())
    }

    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(|e| e > &Rational::zero())
    }

    /// Σ_{α∈S_t} λ_α − Σ_{β∈S_b} λ_β; zero iff the switch condition holds.
    pub fn switch_defect(&self, pi: &GeneralizedPermutation) -> Rational {
        let s_t = pi.reversing(Side::Top);
        let s_b = pi.reversing(Side::Bottom);
        let top: Rational = s_t.iter().map(|l| self.get(*l).clone()).sum();
        let bottom: Rational = s_b.iter().map(|l| self.get(*l).clone()).sum();
        top - bottom
    }

    pub fn satisfies_switch(&self, pi: &GeneralizedPermutation) -> bool {
        self.switch_defect(pi).is_zero()
    }

    pub fn parse(parts: &[&str]) -> Result<Self, String> {
        let entries = parts
            .iter()
            .map(|p| parse_rational(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WidthVector::new(entries))
    }
}

impl Serialize for WidthVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.entries.iter().map(format_rational).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WidthVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let entries = strings
            .iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WidthVector::new(entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn l(i: u32) -> BandLabel {
        BandLabel(i)
    }

    fn gp(top: &[u32], bottom: &[u32]) -> GeneralizedPermutation {
        GeneralizedPermutation::from_rows(top.to_vec(), bottom.to_vec())
    }

    #[test]
    fn validate_classical_two_bands() {
        let pi = gp(&[1, 2], &[2, 1]);
        let report = pi.validate();
        assert!(report.is_valid());
        assert!(report.classical);
        assert!(report.reversing_top.is_empty());
        assert!(report.reversing_bottom.is_empty());
    }

    #[test]
    fn validate_four_band_reversing() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        let report = pi.validate();
        assert!(report.is_valid());
        assert!(!report.classical);
        assert!(report.recurrent);
        assert_eq!(
            report.reversing_top,
            [l(1), l(2)].into_iter().collect::<BTreeSet<_>>()
        );
        assert_eq!(
            report.reversing_bottom,
            [l(3), l(4)].into_iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn validate_three_band_mixed() {
        let pi = gp(&[1, 1, 2], &[2, 3, 3]);
        let report = pi.validate();
        assert!(report.is_valid());
        assert_eq!(report.reversing_top, [l(1)].into_iter().collect());
        assert_eq!(report.reversing_bottom, [l(3)].into_iter().collect());
    }

    #[test]
    fn validate_reports_violations() {
        // Reversing band on top only: not recurrent.
        let pi = gp(&[1, 1, 2], &[2, 3]);
        let report = pi.validate();
        assert!(!report.is_valid());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            TypeViolation::LabelCount { label: BandLabel(3), count: 1 }
        )));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, TypeViolation::NotRecurrent)));
    }

    #[test]
    fn critical_bands_are_rightmost() {
        assert_eq!(gp(&[1, 2], &[2, 1]).critical_bands(), (l(2), l(1)));
        assert_eq!(
            gp(&[1, 1, 2, 2], &[3, 3, 4, 4]).critical_bands(),
            (l(2), l(4))
        );
        assert_eq!(gp(&[3, 1, 3], &[2, 2, 1]).critical_bands(), (l(3), l(1)));
    }

    #[test]
    fn split_top_winner_subtracts_loser_width() {
        // Widths 3/7 on the top critical band, 1/7 on the bottom one.
        let pi = gp(&[1, 2], &[2, 1]);
        let widths = WidthVector::new(vec![rat(1, 7), rat(3, 7)]);
        let out = pi.rauzy_split(&widths).unwrap();
        assert_eq!(out.record.winner, l(2));
        assert_eq!(out.record.loser, l(1));
        assert_eq!(out.record.winner_side, Side::Top);
        assert_eq!(out.widths.get(l(2)), &rat(2, 7));
        assert_eq!(out.widths.get(l(1)), &rat(1, 7));
        // Classical d=2 diagram is a single node: the type is unchanged.
        assert_eq!(out.permutation, pi);
    }

    #[test]
    fn split_bottom_winner_and_matrix_relation() {
        let pi = gp(&[1, 2], &[2, 1]);
        let widths = WidthVector::new(vec![rat(2, 3), rat(1, 3)]);
        let out = pi.rauzy_split(&widths).unwrap();
        assert_eq!(out.record.winner, l(1));
        assert_eq!(out.widths.entries(), &[rat(1, 3), rat(1, 3)]);
        // λ = E·λ' exactly.
        let e = out.elementary.to_expansion(2);
        assert_eq!(e.mul_vector(out.widths.entries()), widths.entries());
    }

    #[test]
    fn split_equal_widths_is_an_error() {
        let pi = gp(&[1, 2], &[2, 1]);
        let widths = WidthVector::new(vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(
            pi.rauzy_split(&widths).unwrap_err(),
            SplitError::EqualCriticalWidths
        );
    }

    #[test]
    fn split_amalgamation_case_detected() {
        // Critical bands 1 (top) and 3 (bottom) are the only reversing bands,
        // so the switch condition forces their widths equal.
        let pi = gp(&[2, 1, 1], &[2, 3, 3]);
        assert!(pi.is_valid());
        let widths = WidthVector::new(vec![rat(1, 3), rat(1, 3), rat(1, 3)]);
        assert!(widths.satisfies_switch(&pi));
        assert_eq!(
            pi.rauzy_split(&widths).unwrap_err(),
            SplitError::AmalgamationCase
        );
    }

    #[test]
    fn split_self_critical_detected() {
        let pi = gp(&[1, 1, 2], &[3, 3, 2]);
        assert!(pi.is_valid());
        let widths = WidthVector::new(vec![rat(1, 4), rat(1, 2), rat(1, 4)]);
        assert_eq!(
            pi.rauzy_split(&widths).unwrap_err(),
            SplitError::SelfCritical
        );
    }

    #[test]
    fn split_unrealizable_direction_detected() {
        // Winner 2 reverses on top while loser 3 is the sole reversing band
        // on the bottom: no positive widths make 2 the wider critical band.
        let pi = gp(&[4, 1, 1, 2, 2], &[4, 3, 3]);
        assert!(pi.is_valid());
        assert_eq!(
            pi.split_with_winner(Side::Top).unwrap_err(),
            SplitError::Unrealizable
        );
        assert!(pi.split_with_winner(Side::Bottom).is_ok());
    }

    #[test]
    fn replay_empty_sequence_is_identity() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        let replay = pi.replay_winner_sequence(&[]).unwrap();
        assert_eq!(replay.matrix, ExpansionMatrix::identity(4));
        assert_eq!(replay.permutation, pi);
    }

    #[test]
    fn replay_rejects_non_critical_pair() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        // Critical pair is (2, 4); prescribing (1, 3) must fail at step 0.
        let err = pi
            .replay_winner_sequence(&[(l(1), l(3))])
            .unwrap_err();
        assert!(matches!(err, ReplayError::NotCritical { step: 0, .. }));
    }

    #[test]
    fn combinatorial_reduction_examples() {
        let w = gp(&[1, 1, 3], &[2, 2, 3]).combinatorial_reduction().unwrap();
        assert_eq!(w.s1, [l(1), l(2)].into_iter().collect());
        assert_eq!(w.s2, [l(3)].into_iter().collect());

        assert!(gp(&[1, 2], &[2, 1]).combinatorial_reduction().is_none());

        let w = gp(&[1, 1, 2, 2], &[3, 3, 4, 4])
            .combinatorial_reduction()
            .unwrap();
        assert_eq!(w.s1, [l(1), l(3)].into_iter().collect());
        assert_eq!(w.s2, [l(2), l(4)].into_iter().collect());
    }

    #[test]
    fn measure_reduction_examples() {
        // Reversing bands 1 and 2 both land in S1.
        let w = gp(&[1, 1, 3], &[2, 2, 3]).measure_reduction().unwrap();
        assert_eq!(w.s1, [l(1), l(2)].into_iter().collect());
        assert_eq!(w.kind, ReductionKind::Measure);

        assert!(gp(&[1, 2], &[2, 1]).measure_reduction().is_none());

        // Combinatorially reducible but the reversing bands split across the
        // cut, so no measure reduction.
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        assert!(pi.combinatorial_reduction().is_some());
        assert!(pi.measure_reduction().is_none());
    }

    #[test]
    fn canonical_form_uses_first_occurrence_order() {
        let pi = gp(&[2, 2, 1, 1], &[4, 4, 3, 3]);
        let canon = pi.canonical_form();
        assert_eq!(canon, gp(&[1, 1, 2, 2], &[3, 3, 4, 4]));
        assert_eq!(canon.canonical_form(), canon);
    }

    #[test]
    fn serde_round_trip_and_unknown_fields() {
        let pi = gp(&[1, 1, 2], &[2, 3, 3]);
        let json = serde_json::to_string(&pi).unwrap();
        assert_eq!(json, r#"{"d":3,"top":[1,1,2],"bottom":[2,3,3]}"#);
        let back: GeneralizedPermutation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pi);
        assert!(serde_json::from_str::<GeneralizedPermutation>(
            r#"{"d":3,"top":[1,1,2],"bottom":[2,3,3],"x":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<GeneralizedPermutation>(
            r#"{"d":2,"top":[1,1,2],"bottom":[2,3,3]}"#
        )
        .is_err());
    }

    /// Random valid type with at most `d` bands, biased toward non-classical.
    fn random_valid_type(d: usize, rng: &mut StdRng) -> GeneralizedPermutation {
        loop {
            let mut ends: Vec<u32> = (1..=d as u32).flat_map(|i| [i, i]).collect();
            for i in (1..ends.len()).rev() {
                let j = rng.gen_range(0..=i);
                ends.swap(i, j);
            }
            let cut = rng.gen_range(1..ends.len());
            let (top, bottom) = ends.split_at(cut);
            let pi = GeneralizedPermutation::from_rows(top.to_vec(), bottom.to_vec());
            if pi.is_valid() {
                return pi;
            }
        }
    }

    /// Positive widths satisfying the switch condition for `pi`.
    fn admissible_widths(pi: &GeneralizedPermutation, rng: &mut StdRng) -> WidthVector {
        let d = pi.d();
        let mut entries: Vec<Rational> = (0..d)
            .map(|_| rat(rng.gen_range(1..1000), 1009))
            .collect();
        let s_t: Vec<usize> = pi.reversing(Side::Top).iter().map(|l| l.index()).collect();
        let s_b: Vec<usize> = pi
            .reversing(Side::Bottom)
            .iter()
            .map(|l| l.index())
            .collect();
        if !s_t.is_empty() {
            // Rescale the bottom reversing widths to balance the top ones.
            let top_sum: Rational = s_t.iter().map(|&i| entries[i].clone()).sum();
            let bot_sum: Rational = s_b.iter().map(|&i| entries[i].clone()).sum();
            let factor = top_sum / bot_sum;
            for &i in &s_b {
                entries[i] = &entries[i] * &factor;
            }
        }
        WidthVector::new(entries)
    }

    #[test]
    fn split_preserves_structure_on_random_types() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut performed = 0;
        while performed < 300 {
            let d = rng.gen_range(2..=6);
            let pi = random_valid_type(d, &mut rng);
            let widths = admissible_widths(&pi, &mut rng);
            assert!(widths.satisfies_switch(&pi));
            let out = match pi.rauzy_split(&widths) {
                Ok(out) => out,
                Err(_) => continue,
            };
            performed += 1;
            let report = out.permutation.validate();
            assert!(report.is_valid(), "split of {pi:?} broke invariants");
            // End count and twice-per-label are preserved.
            assert_eq!(
                out.permutation.top().len() + out.permutation.bottom().len(),
                2 * d
            );
            // New widths satisfy the new switch condition exactly.
            assert!(out.widths.satisfies_switch(&out.permutation));
            // λ = E λ' exactly.
            let e = out.elementary.to_expansion(d);
            assert_eq!(e.mul_vector(out.widths.entries()), widths.entries());
            // Total width drops by the loser's width.
            assert_eq!(
                out.widths.total(),
                widths.total() - widths.get(out.record.loser)
            );
        }
    }

    proptest! {
        // Canonicalization is invariant under relabeling.
        #[test]
        fn canonical_form_relabel_invariant(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let d = rng.gen_range(2..=5);
            let pi = random_valid_type(d, &mut rng);
            let mut sigma: Vec<u32> = (1..=d as u32).collect();
            for i in (1..d).rev() {
                let j = rng.gen_range(0..=i);
                sigma.swap(i, j);
            }
            let relabeled = pi.relabel(&sigma);
            prop_assert_eq!(relabeled.canonical_form(), pi.canonical_form());
        }
    }

    #[test]
    fn width_vector_normalization_and_defect() {
        let pi = gp(&[1, 1, 2, 2], &[3, 3, 4, 4]);
        let w = WidthVector::new(vec![rat(1, 4); 4]);
        assert!(w.is_normalized());
        assert!(w.satisfies_switch(&pi));
        let w2 = WidthVector::new(vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 8)]);
        assert_eq!(w2.switch_defect(&pi), rat(1, 2));
    }

    #[test]
    fn rat_int_helper() {
        assert_eq!(rat_int(3), rat(3, 1));
    }
}
