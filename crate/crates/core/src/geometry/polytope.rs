//! Polytopes inside an affine plane: configuration spaces, triangulation,
//! exact halfspace clipping, and chart/Euclidean measures.

use crate::combinatorics::{BandLabel, GeneralizedPermutation, Side};
use crate::geometry::plane::AffinePlane;
use crate::geometry::GeometryError;
use crate::numeric::{determinant, to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Convex polytope given by its vertices, all lying exactly in `plane`.
#[derive(Debug, Clone)]
pub struct PlanePolytope {
    pub plane: AffinePlane,
    pub vertices: Vec<Vec<Rational>>,
}

/// Full-dimensional simplex of the plane: dim + 1 vertices in ambient
/// coordinates. Degenerate (flat) simplices are allowed and measure zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    pub vertices: Vec<Vec<Rational>>,
}

impl Simplex {
    pub fn centroid(&self) -> Vec<Rational> {
        let n = Rational::from_integer((self.vertices.len() as i64).into());
        let d = self.vertices[0].len();
        let mut c = vec![Rational::zero(); d];
        for v in &self.vertices {
            for i in 0..d {
                c[i] += &v[i];
            }
        }
        for x in &mut c {
            *x /= &n;
        }
        c
    }
}

/// A set of simplices with pairwise measure-zero overlap covering a polytope.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub plane: AffinePlane,
    pub simplices: Vec<Simplex>,
}

impl Triangulation {
    /// Exact chart measure: Σ |det chart-differences| / dim!.
    pub fn chart_measure(&self) -> Rational {
        self.simplices
            .iter()
            .map(|s| simplex_chart_measure(&self.plane, s))
            .sum()
    }

    /// Euclidean measure: chart measure times the plane's √Gram factor.
    pub fn euclidean_measure(&self) -> f64 {
        to_f64(&self.chart_measure()) * self.plane.euclidean_factor()
    }

    /// Keeps the part of every simplex inside {normal·x ≥ rhs}.
    pub fn clip(&self, hs: &HalfSpace) -> Triangulation {
        let mut simplices = Vec::new();
        for s in &self.simplices {
            clip_simplex_into(s, hs, &mut simplices);
        }
        Triangulation {
            plane: self.plane.clone(),
            simplices,
        }
    }
}

fn simplex_chart_measure(plane: &AffinePlane, s: &Simplex) -> Rational {
    let k = plane.dim();
    if s.vertices.len() != k + 1 {
        return Rational::zero();
    }
    if k == 0 {
        return Rational::one();
    }
    let base = plane.chart(&s.vertices[0]);
    let rows: Vec<Vec<Rational>> = s.vertices[1..]
        .iter()
        .map(|v| {
            let c = plane.chart(v);
            c.iter().zip(&base).map(|(a, b)| a - b).collect()
        })
        .collect();
    let mut factorial = BigInt::one();
    for i in 2..=k {
        factorial *= i;
    }
    determinant(&rows).abs() / Rational::from_integer(factorial)
}

/// Halfspace {x : normal·x ≥ rhs} in ambient coordinates.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub normal: Vec<Rational>,
    pub rhs: Rational,
}

impl HalfSpace {
    /// The region λ_a ≥ λ_b.
    pub fn coordinate_ge(d: usize, a: BandLabel, b: BandLabel) -> HalfSpace {
        let mut normal = vec![Rational::zero(); d];
        normal[a.index()] = Rational::one();
        normal[b.index()] = -Rational::one();
        HalfSpace {
            normal,
            rhs: Rational::zero(),
        }
    }

    /// The complementary closed halfspace.
    pub fn complement(&self) -> HalfSpace {
        HalfSpace {
            normal: self.normal.iter().map(|c| -c.clone()).collect(),
            rhs: -self.rhs.clone(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        crate::numeric::dot(&self.normal, point) - &self.rhs
    }
}

/// Clips one simplex, pushing the kept pieces. Splits an edge crossing the
/// boundary at its exact intersection point and recurses on the two halves;
/// each recursion strictly reduces the number of strictly-outside or
/// strictly-inside vertices, so this terminates.
fn clip_simplex_into(s: &Simplex, hs: &HalfSpace, out: &mut Vec<Simplex>) {
    let values: Vec<Rational> = s.vertices.iter().map(|v| hs.eval(v)).collect();
    if values.iter().all(|g| !g.is_negative()) {
        out.push(s.clone());
        return;
    }
    if values.iter().all(|g| !g.is_positive()) {
        return;
    }
    let i = values.iter().position(|g| g.is_negative()).unwrap();
    let j = values.iter().position(|g| g.is_positive()).unwrap();
    let (gi, gj) = (&values[i], &values[j]);
    // Point on the boundary: x = (g_j·v_i - g_i·v_j) / (g_j - g_i).
    let denom = gj - gi;
    let x: Vec<Rational> = s.vertices[i]
        .iter()
        .zip(&s.vertices[j])
        .map(|(vi, vj)| (gj * vi - gi * vj) / &denom)
        .collect();
    debug_assert!(hs.eval(&x).is_zero());
    let mut left = s.clone();
    left.vertices[i] = x.clone();
    let mut right = s.clone();
    right.vertices[j] = x;
    clip_simplex_into(&left, hs, out);
    clip_simplex_into(&right, hs, out);
}

/// The configuration space W of a combinatorial type: the switch-condition
/// slice of the standard simplex, as the convex hull of the midpoints
/// e_{αβ} (α top-reversing, β bottom-reversing) and the vertices e_ρ of the
/// non-reversing bands. Classical types get the full simplex.
#[derive(Debug, Clone)]
pub struct ConfigurationSpace {
    pub d: usize,
    pub s_t: BTreeSet<BandLabel>,
    pub s_b: BTreeSet<BandLabel>,
    pub classical: bool,
    pub polytope: PlanePolytope,
}

impl ConfigurationSpace {
    pub fn of(pi: &GeneralizedPermutation) -> ConfigurationSpace {
        let d = pi.d();
        let s_t = pi.reversing(Side::Top);
        let s_b = pi.reversing(Side::Bottom);
        Self::from_sets(d, s_t, s_b)
    }

    pub fn from_sets(
        d: usize,
        s_t: BTreeSet<BandLabel>,
        s_b: BTreeSet<BandLabel>,
    ) -> ConfigurationSpace {
        let classical = s_t.is_empty() && s_b.is_empty();
        let (plane, vertices) = if classical {
            let plane = AffinePlane::simplex(d);
            let vertices = (0..d).map(|i| unit_point(d, i)).collect();
            (plane, vertices)
        } else {
            let plane = AffinePlane::switch(d, &s_t, &s_b);
            let mut vertices = Vec::new();
            for a in &s_t {
                for b in &s_b {
                    vertices.push(midpoint_of_units(d, a.index(), b.index()));
                }
            }
            for i in 0..d {
                let l = BandLabel::from_index(i);
                if !s_t.contains(&l) && !s_b.contains(&l) {
                    vertices.push(unit_point(d, i));
                }
            }
            (plane, vertices)
        };
        ConfigurationSpace {
            d,
            s_t,
            s_b,
            classical,
            polytope: PlanePolytope { plane, vertices },
        }
    }

    pub fn plane(&self) -> &AffinePlane {
        &self.polytope.plane
    }

    pub fn dim(&self) -> usize {
        self.polytope.plane.dim()
    }

    /// Mean of the vertex list; lies in the relative interior.
    pub fn centroid(&self) -> Vec<Rational> {
        let n = Rational::from_integer((self.polytope.vertices.len() as i64).into());
        let mut c = vec![Rational::zero(); self.d];
        for v in &self.polytope.vertices {
            for i in 0..self.d {
                c[i] += &v[i];
            }
        }
        for x in &mut c {
            *x /= &n;
        }
        c
    }

    /// Structural triangulation: the staircase triangulation of the product
    /// of the two reversing-band simplices, joined with the simplex on the
    /// non-reversing vertices. Classical spaces are a single simplex.
    pub fn triangulation(&self) -> Triangulation {
        let plane = self.polytope.plane.clone();
        if self.classical {
            let simplex = Simplex {
                vertices: (0..self.d).map(|i| unit_point(self.d, i)).collect(),
            };
            return Triangulation {
                plane,
                simplices: vec![simplex],
            };
        }
        let top: Vec<usize> = self.s_t.iter().map(|l| l.index()).collect();
        let bottom: Vec<usize> = self.s_b.iter().map(|l| l.index()).collect();
        let rest: Vec<Vec<Rational>> = (0..self.d)
            .filter(|&i| {
                let l = BandLabel::from_index(i);
                !self.s_t.contains(&l) && !self.s_b.contains(&l)
            })
            .map(|i| unit_point(self.d, i))
            .collect();

        // Monotone lattice paths from (0,0) to (a-1, b-1).
        let (a, b) = (top.len(), bottom.len());
        let mut simplices = Vec::new();
        let mut path = vec![(0usize, 0usize)];
        staircase(a, b, &mut path, &mut |path| {
            let mut vertices: Vec<Vec<Rational>> = path
                .iter()
                .map(|&(i, j)| midpoint_of_units(self.d, top[i], bottom[j]))
                .collect();
            vertices.extend(rest.iter().cloned());
            simplices.push(Simplex { vertices });
        });
        Triangulation { plane, simplices }
    }
}

fn staircase(
    a: usize,
    b: usize,
    path: &mut Vec<(usize, usize)>,
    emit: &mut impl FnMut(&[(usize, usize)]),
) {
    let &(i, j) = path.last().unwrap();
    if i == a - 1 && j == b - 1 {
        emit(path);
        return;
    }
    if i + 1 < a {
        path.push((i + 1, j));
        staircase(a, b, path, emit);
        path.pop();
    }
    if j + 1 < b {
        path.push((i, j + 1));
        staircase(a, b, path, emit);
        path.pop();
    }
}

pub(crate) fn unit_point(d: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    v[i] = Rational::one();
    v
}

pub(crate) fn midpoint_of_units(d: usize, i: usize, j: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    let half = Rational::new(1.into(), 2.into());
    v[i] = half.clone();
    v[j] += half;
    v
}

impl PlanePolytope {
    /// Deterministic triangulation using only the polytope's vertices.
    ///
    /// Simplices are returned as-is; polygons are fanned from the
    /// lexicographically least vertex; higher dimensions use the pulling
    /// triangulation (cone the least vertex over the facets avoiding it,
    /// facets found by brute-force hyperplane enumeration).
    pub fn triangulate(&self) -> Result<Triangulation, GeometryError> {
        let mut vertices = self.vertices.clone();
        vertices.dedup();
        vertices.sort();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        let k = self.plane.dim();
        let charts: Vec<Vec<Rational>> = vertices.iter().map(|v| self.plane.chart(v)).collect();
        if affine_rank(&charts) < k {
            return Err(GeometryError::DegeneratePolytope(format!(
                "affine dimension below the plane dimension {k}"
            )));
        }
        let simplices = triangulate_full_dim(&charts, k)?;
        let simplices = simplices
            .into_iter()
            .map(|cell| Simplex {
                vertices: cell.into_iter().map(|i| vertices[i].clone()).collect(),
            })
            .collect();
        Ok(Triangulation {
            plane: self.plane.clone(),
            simplices,
        })
    }
}

fn affine_rank(points: &[Vec<Rational>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let rows: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    rank(rows)
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &pivot;
            for cc in c..cols {
                let sub = &f * &rows[r][cc];
                rows[i][cc] -= sub;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Triangulates the convex hull of full-dimensional `points` (chart
/// coordinates, dimension `k`), returning index cells.
fn triangulate_full_dim(
    points: &[Vec<Rational>],
    k: usize,
) -> Result<Vec<Vec<usize>>, GeometryError> {
    let n = points.len();
    let index: Vec<usize> = (0..n).collect();
    triangulate_indices(points, &index, k)
}

fn triangulate_indices(
    points: &[Vec<Rational>],
    idx: &[usize],
    k: usize,
) -> Result<Vec<Vec<usize>>, GeometryError> {
    if idx.len() == k + 1 {
        return Ok(vec![idx.to_vec()]);
    }
    if k == 0 {
        return Ok(vec![vec![idx[0]]]);
    }
    if k == 1 {
        // Extreme points of a segment.
        let lo = *idx
            .iter()
            .min_by(|&&a, &&b| points[a].cmp(&points[b]))
            .unwrap();
        let hi = *idx
            .iter()
            .max_by(|&&a, &&b| points[a].cmp(&points[b]))
            .unwrap();
        return Ok(vec![vec![lo, hi]]);
    }
    if k == 2 {
        return Ok(fan_polygon(points, idx));
    }
    if idx.len() > 24 {
        return Err(GeometryError::Unsupported(format!(
            "triangulation of a {k}-polytope with {} vertices",
            idx.len()
        )));
    }
    // Pulling: cone the least vertex over the facets avoiding it.
    let apex = *idx
        .iter()
        .min_by(|&&a, &&b| points[a].cmp(&points[b]))
        .unwrap();
    let facets = enumerate_facets(points, idx, k)?;
    let mut cells = Vec::new();
    for facet in facets {
        if facet.contains(&apex) {
            continue;
        }
        // Triangulate the facet inside a (k-1)-dimensional coordinate
        // projection that keeps it full-dimensional.
        let facet_points: Vec<Vec<Rational>> = facet.iter().map(|&i| points[i].clone()).collect();
        let mut done = false;
        for drop in (0..k).rev() {
            let projected: Vec<Vec<Rational>> = facet_points
                .iter()
                .map(|p| {
                    p.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != drop)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            if affine_rank(&projected) < k - 1 {
                continue;
            }
            let local_idx: Vec<usize> = (0..facet.len()).collect();
            let sub = triangulate_indices(&projected, &local_idx, k - 1)?;
            for cell in sub {
                let mut full: Vec<usize> = cell.iter().map(|&li| facet[li]).collect();
                full.push(apex);
                cells.push(full);
            }
            done = true;
            break;
        }
        if !done {
            return Err(GeometryError::DegeneratePolytope(
                "facet admits no full-rank coordinate projection".into(),
            ));
        }
    }
    if cells.is_empty() {
        return Err(GeometryError::DegeneratePolytope(
            "no facets avoid the apex".into(),
        ));
    }
    Ok(cells)
}

/// All facets of the hull of `idx`: maximal vertex sets lying on a
/// hyperplane with every other vertex strictly on one side.
fn enumerate_facets(
    points: &[Vec<Rational>],
    idx: &[usize],
    k: usize,
) -> Result<Vec<Vec<usize>>, GeometryError> {
    let mut facets: Vec<Vec<usize>> = Vec::new();
    let mut combo: Vec<usize> = Vec::new();
    let mut found: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
    enumerate_combinations(idx.len(), k, &mut combo, &mut |combo| {
        let support: Vec<usize> = combo.iter().map(|&c| idx[c]).collect();
        let Some(normal) = hyperplane_normal(points, &support) else {
            return;
        };
        let base = &points[support[0]];
        let mut pos = false;
        let mut neg = false;
        let mut on_plane = Vec::new();
        for &i in idx {
            let side: Rational = points[i]
                .iter()
                .zip(base.iter())
                .zip(&normal)
                .map(|((x, b), nc)| (x - b) * nc)
                .sum();
            if side.is_zero() {
                on_plane.push(i);
            } else if side.is_positive() {
                pos = true;
            } else {
                neg = true;
            }
        }
        if pos && neg {
            return;
        }
        on_plane.sort_unstable();
        if found.insert(on_plane.clone()) {
            facets.push(on_plane);
        }
    });
    if facets.is_empty() {
        return Err(GeometryError::DegeneratePolytope("no facets found".into()));
    }
    Ok(facets)
}

fn enumerate_combinations(n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    let start = cur.last().map_or(0, |&l| l + 1);
    for i in start..n {
        cur.push(i);
        enumerate_combinations(n, k, cur, f);
        cur.pop();
    }
}

/// Normal of the hyperplane through k points in k-space (cofactor rule);
/// `None` if the points are affinely dependent.
fn hyperplane_normal(points: &[Vec<Rational>], support: &[usize]) -> Option<Vec<Rational>> {
    let k = points[support[0]].len();
    debug_assert_eq!(support.len(), k);
    let rows: Vec<Vec<Rational>> = support[1..]
        .iter()
        .map(|&i| {
            points[i]
                .iter()
                .zip(&points[support[0]])
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let mut normal = vec![Rational::zero(); k];
    let mut nonzero = false;
    for c in 0..k {
        let minor: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(cc, _)| cc != c)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let mut cof = determinant(&minor);
        if c % 2 == 1 {
            cof = -cof;
        }
        if !cof.is_zero() {
            nonzero = true;
        }
        normal[c] = cof;
    }
    nonzero.then_some(normal)
}

/// Fan triangulation of a convex polygon (2-dimensional chart coordinates)
/// from its lexicographically least vertex, after sorting the vertices
/// around their centroid with exact orientation tests.
fn fan_polygon(points: &[Vec<Rational>], idx: &[usize]) -> Vec<Vec<usize>> {
    let n = idx.len();
    let mut cx = Rational::zero();
    let mut cy = Rational::zero();
    for &i in idx {
        cx += &points[i][0];
        cy += &points[i][1];
    }
    let nn = Rational::from_integer((n as i64).into());
    cx /= &nn;
    cy /= &nn;
    let mut order: Vec<usize> = idx.to_vec();
    let half = |i: usize| -> u8 {
        let dy = &points[i][1] - &cy;
        let dx = &points[i][0] - &cx;
        if dy.is_positive() || (dy.is_zero() && dx.is_positive()) {
            0
        } else {
            1
        }
    };
    order.sort_by(|&a, &b| {
        half(a).cmp(&half(b)).then_with(|| {
            let ax = &points[a][0] - &cx;
            let ay = &points[a][1] - &cy;
            let bx = &points[b][0] - &cx;
            let by = &points[b][1] - &cy;
            let cross = &ax * &by - &ay * &bx;
            if cross.is_positive() {
                std::cmp::Ordering::Less
            } else if cross.is_negative() {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        })
    });
    let least = *idx.iter().min_by(|&&a, &&b| points[a].cmp(&points[b])).unwrap();
    let pos = order.iter().position(|&i| i == least).unwrap();
    order.rotate_left(pos);
    (1..n - 1).map(|t| vec![order[0], order[t], order[t + 1]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};

    fn labels(ids: &[u32]) -> BTreeSet<BandLabel> {
        ids.iter().map(|&i| BandLabel(i)).collect()
    }

    #[test]
    fn configuration_space_quadrilateral() {
        let cs = ConfigurationSpace::from_sets(4, labels(&[1, 2]), labels(&[3, 4]));
        assert_eq!(cs.polytope.vertices.len(), 4);
        for v in &cs.polytope.vertices {
            assert!(cs.polytope.plane.contains(v));
        }
        // Chart area 1/4 times factor 2 gives the true area 1/2.
        let tri = cs.triangulation();
        assert_eq!(tri.simplices.len(), 2);
        assert_eq!(tri.chart_measure(), rat(1, 4));
        assert!((tri.euclidean_measure() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn configuration_space_classical_is_full_simplex() {
        let pi = GeneralizedPermutation::from_rows(vec![1, 2], vec![2, 1]);
        let cs = ConfigurationSpace::of(&pi);
        assert!(cs.classical);
        assert_eq!(cs.polytope.vertices.len(), 2);
        let tri = cs.triangulation();
        assert_eq!(tri.simplices.len(), 1);
        assert_eq!(tri.chart_measure(), rat_int(1));
        assert!((tri.euclidean_measure() - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn configuration_space_with_spectator_band() {
        // Reversing bands 1 (top) and 3 (bottom) at d=3: a segment.
        let cs = ConfigurationSpace::from_sets(3, labels(&[1]), labels(&[3]));
        assert_eq!(cs.polytope.vertices.len(), 2);
        assert_eq!(cs.dim(), 1);
        let tri = cs.triangulation();
        assert_eq!(tri.simplices.len(), 1);
        assert_eq!(tri.simplices[0].vertices.len(), 2);
    }

    #[test]
    fn triangulate_simplex_is_identity() {
        let plane = AffinePlane::simplex(3);
        let p = PlanePolytope {
            plane,
            vertices: (0..3).map(|i| unit_point(3, i)).collect(),
        };
        let tri = p.triangulate().unwrap();
        assert_eq!(tri.simplices.len(), 1);
    }

    #[test]
    fn triangulate_quadrilateral_matches_structural_triangulation() {
        let cs = ConfigurationSpace::from_sets(4, labels(&[1, 2]), labels(&[3, 4]));
        let generic = cs.polytope.triangulate().unwrap();
        assert_eq!(generic.simplices.len(), 2);
        assert_eq!(generic.chart_measure(), cs.triangulation().chart_measure());
    }

    #[test]
    fn triangulate_rejects_degenerate_input() {
        let plane = AffinePlane::simplex(3);
        let p = PlanePolytope {
            plane,
            vertices: vec![unit_point(3, 0), unit_point(3, 1)],
        };
        assert!(matches!(
            p.triangulate(),
            Err(GeometryError::DegeneratePolytope(_))
        ));
    }

    #[test]
    fn staircase_covers_products_in_higher_dimension() {
        // d = 5 with two top and three bottom reversing bands: the product of
        // a segment and a triangle triangulates into 3 cells; compare the
        // structural staircase against the generic pulling triangulation.
        let cs = ConfigurationSpace::from_sets(5, labels(&[1, 2]), labels(&[3, 4, 5]));
        let tri = cs.triangulation();
        assert_eq!(tri.simplices.len(), 3);
        let generic = cs.polytope.triangulate().unwrap();
        assert_eq!(tri.chart_measure(), generic.chart_measure());
        assert!(tri.chart_measure().is_positive());
    }

    #[test]
    fn clip_no_op_and_complement_additivity() {
        let cs = ConfigurationSpace::from_sets(4, labels(&[1, 2]), labels(&[3, 4]));
        let tri = cs.triangulation();
        // An inequality satisfied by every vertex leaves the measure alone.
        let all = HalfSpace {
            normal: vec![rat_int(1); 4],
            rhs: rat_int(0),
        };
        assert_eq!(tri.clip(&all).chart_measure(), tri.chart_measure());
        // Clip by a plane and its complement: areas add exactly.
        let hs = HalfSpace::coordinate_ge(4, BandLabel(1), BandLabel(3));
        let a = tri.clip(&hs).chart_measure();
        let b = tri.clip(&hs.complement()).chart_measure();
        assert_eq!(a + b, tri.chart_measure());
    }

    #[test]
    fn clip_can_empty_a_polytope() {
        let cs = ConfigurationSpace::from_sets(4, labels(&[1, 2]), labels(&[3, 4]));
        let tri = cs.triangulation();
        let hs = HalfSpace {
            normal: vec![rat_int(1); 4],
            rhs: rat_int(2),
        };
        let clipped = tri.clip(&hs);
        assert_eq!(clipped.chart_measure(), rat_int(0));
    }

    #[test]
    fn shoelace_oracle_for_polygon_fan() {
        // Unit square in the d=3 simplex chart... use the switch square at
        // d=4, whose chart image is the square [0,1/2]^2: shoelace gives 1/4.
        let cs = ConfigurationSpace::from_sets(4, labels(&[1, 2]), labels(&[3, 4]));
        let tri = cs.polytope.triangulate().unwrap();
        let plane = &cs.polytope.plane;
        // Shoelace over the chart polygon ordered by angle.
        let mut chart: Vec<Vec<Rational>> = cs
            .polytope
            .vertices
            .iter()
            .map(|v| plane.chart(v))
            .collect();
        chart.sort();
        // Square corners sorted lexicographically: reorder into a cycle.
        let cycle = [0usize, 1, 3, 2];
        let mut area2 = Rational::zero();
        for t in 0..4 {
            let p = &chart[cycle[t]];
            let q = &chart[cycle[(t + 1) % 4]];
            area2 += &p[0] * &q[1] - &p[1] * &q[0];
        }
        let shoelace = area2.abs() / rat_int(2);
        assert_eq!(tri.chart_measure(), shoelace);
    }
}
