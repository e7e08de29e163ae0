//! Affine planes holding the polytopes: the coordinate-sum-one plane of the
//! simplex, optionally sliced by a switch condition.
//!
//! Each plane carries one fixed chart: an ordered choice of coordinates that
//! parametrize it. Chart measures of subsets of the same plane can then be
//! compared exactly; the chart-to-Euclidean factor √det(AᵀA) is applied only
//! when an absolute Euclidean volume is wanted.

use crate::combinatorics::BandLabel;
use crate::numeric::{coordinate_sum, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePlane {
    d: usize,
    /// Switch coefficients (+1 top-reversing, -1 bottom-reversing, 0 else);
    /// `None` for the plain simplex plane.
    switch: Option<Vec<Rational>>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    /// x_dropped[r] = offset[r] + Σ_k coeff[r][k] · x_kept[k]
    coeff: Vec<Vec<Rational>>,
    offset: Vec<Rational>,
}

impl AffinePlane {
    /// The hyperplane Σx = 1 containing the standard simplex; chart drops
    /// the largest-index coordinate.
    pub fn simplex(d: usize) -> AffinePlane {
        assert!(d >= 1);
        let kept: Vec<usize> = (0..d - 1).collect();
        let dropped = vec![d - 1];
        let coeff = vec![vec![-Rational::one(); d - 1]];
        let offset = vec![Rational::one()];
        AffinePlane {
            d,
            switch: None,
            kept,
            dropped,
            coeff,
            offset,
        }
    }

    /// The slice Σx = 1, Σ_{α∈S_t} x_α = Σ_{β∈S_b} x_β. The chart drops the
    /// largest-index coordinate together with the largest lower one keeping
    /// the two dropped constraints solvable.
    pub fn switch(d: usize, s_t: &BTreeSet<BandLabel>, s_b: &BTreeSet<BandLabel>) -> AffinePlane {
        assert!(!s_t.is_empty() && !s_b.is_empty());
        let mut s = vec![Rational::zero(); d];
        for l in s_t {
            s[l.index()] = Rational::one();
        }
        for l in s_b {
            s[l.index()] = -Rational::one();
        }
        let hi = d - 1;
        let lo = (0..hi)
            .rev()
            .find(|&j| s[j] != s[hi])
            .expect("both reversing sets nonempty, so a second coordinate exists");
        let dropped = vec![lo, hi];
        let kept: Vec<usize> = (0..d).filter(|i| !dropped.contains(i)).collect();

        // Solve [1, 1; s_lo, s_hi]·[x_lo; x_hi] = [1 - Σ_K x_k; -Σ_K s_k x_k].
        let det = &s[hi] - &s[lo];
        debug_assert!(!det.is_zero());
        let mut coeff = vec![vec![Rational::zero(); kept.len()]; 2];
        let mut offset = vec![Rational::zero(); 2];
        // x_lo = (s_hi·(1 - Σ x_k) + Σ s_k x_k) / det
        // x_hi = (-s_lo·(1 - Σ x_k) - Σ s_k x_k) / det
        offset[0] = &s[hi] / &det;
        offset[1] = -&s[lo] / &det;
        for (kpos, &k) in kept.iter().enumerate() {
            coeff[0][kpos] = (&s[k] - &s[hi]) / &det;
            coeff[1][kpos] = (&s[lo] - &s[k]) / &det;
        }
        AffinePlane {
            d,
            switch: Some(s),
            kept,
            dropped,
            coeff,
            offset,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    /// Affine dimension of the plane.
    pub fn dim(&self) -> usize {
        self.kept.len()
    }

    pub fn is_switch_plane(&self) -> bool {
        self.switch.is_some()
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn chart(&self, point: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(point.len(), self.d);
        self.kept.iter().map(|&i| point[i].clone()).collect()
    }

    /// Inverse of the chart: reconstructs the full point.
    pub fn unchart(&self, c: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(c.len(), self.kept.len());
        let mut point = vec![Rational::zero(); self.d];
        for (kpos, &k) in self.kept.iter().enumerate() {
            point[k] = c[kpos].clone();
        }
        for (r, &dcoord) in self.dropped.iter().enumerate() {
            let mut val = self.offset[r].clone();
            for (kpos, ck) in c.iter().enumerate() {
                val += &self.coeff[r][kpos] * ck;
            }
            point[dcoord] = val;
        }
        point
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        if point.len() != self.d || !(coordinate_sum(point)).is_one() {
            return false;
        }
        match &self.switch {
            None => true,
            Some(s) => point
                .iter()
                .zip(s)
                .map(|(x, c)| x * c)
                .sum::<Rational>()
                .is_zero(),
        }
    }

    /// Gram determinant det(AᵀA) of the chart parametrization, exact.
    pub fn gram_determinant(&self) -> Rational {
        let k = self.kept.len();
        let mut g = vec![vec![Rational::zero(); k]; k];
        for i in 0..k {
            g[i][i] = Rational::one();
        }
        for row in &self.coeff {
            for i in 0..k {
                for j in 0..k {
                    let add = &row[i] * &row[j];
                    g[i][j] += add;
                }
            }
        }
        crate::numeric::determinant(&g)
    }

    /// Fixed chart-to-Euclidean volume factor √det(AᵀA).
    pub fn euclidean_factor(&self) -> f64 {
        crate::numeric::to_f64(&self.gram_determinant()).sqrt()
    }

    /// Basis of the plane's direction space: one vector per chart coordinate
    /// (the columns of the parametrization A).
    pub fn basis_vectors(&self) -> Vec<Vec<Rational>> {
        let k = self.kept.len();
        (0..k)
            .map(|kpos| {
                let mut v = vec![Rational::zero(); self.d];
                v[self.kept[kpos]] = Rational::one();
                for (r, &dcoord) in self.dropped.iter().enumerate() {
                    v[dcoord] = self.coeff[r][kpos].clone();
                }
                v
            })
            .collect()
    }

    /// Unit normal direction of the switch slice inside the simplex plane:
    /// the switch vector with its mean removed, sign fixed so the first
    /// nonzero coordinate is positive. `None` for the plain simplex plane.
    pub fn switch_normal_in_simplex_plane(&self) -> Option<Vec<Rational>> {
        let s = self.switch.as_ref()?;
        let mean = coordinate_sum(s) / Rational::from_integer((self.d as i64).into());
        let mut m: Vec<Rational> = s.iter().map(|c| c - &mean).collect();
        if let Some(first) = m.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in &mut m {
                    *x = -x.clone();
                }
            }
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn labels(ids: &[u32]) -> BTreeSet<BandLabel> {
        ids.iter().map(|&i| BandLabel(i)).collect()
    }

    #[test]
    fn simplex_plane_chart_and_factor() {
        let p = AffinePlane::simplex(3);
        assert_eq!(p.dim(), 2);
        let point = vec![rat(1, 2), rat(1, 3), rat(1, 6)];
        assert!(p.contains(&point));
        assert_eq!(p.unchart(&p.chart(&point)), point);
        // det(I + 11ᵀ) = d, so the factor is √d.
        assert_eq!(p.gram_determinant(), rat_int(3));
    }

    #[test]
    fn switch_plane_four_band_square() {
        let p = AffinePlane::switch(4, &labels(&[1, 2]), &labels(&[3, 4]));
        assert_eq!(p.dim(), 2);
        // Drops coordinate 4 and then coordinate 2 (1-based labels).
        assert_eq!(p.kept(), &[0, 2]);
        let e13 = vec![rat(1, 2), rat(0, 1), rat(1, 2), rat(0, 1)];
        assert!(p.contains(&e13));
        assert_eq!(p.unchart(&p.chart(&e13)), e13);
        // The square of side 1/√2 has chart area 1/4 and true area 1/2.
        assert_eq!(p.gram_determinant(), rat_int(4));
    }

    #[test]
    fn switch_normal_is_orthogonal_to_ones_and_sliced_directions() {
        let p = AffinePlane::switch(4, &labels(&[1, 2]), &labels(&[3, 4]));
        let m = p.switch_normal_in_simplex_plane().unwrap();
        assert_eq!(crate::numeric::coordinate_sum(&m), rat_int(0));
        for b in p.basis_vectors() {
            assert_eq!(crate::numeric::dot(&m, &b), rat_int(0));
        }
    }

    #[test]
    fn basis_vectors_span_plane_directions() {
        let p = AffinePlane::switch(5, &labels(&[1]), &labels(&[4, 5]));
        for b in p.basis_vectors() {
            // Direction vectors: coordinate sum zero and switch sum zero.
            assert_eq!(crate::numeric::coordinate_sum(&b), rat_int(0));
        }
        assert_eq!(p.basis_vectors().len(), 3);
    }
}
