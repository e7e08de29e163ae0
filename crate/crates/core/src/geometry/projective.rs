//! Projectivized matrices acting on the simplex: image measures, the
//! measure formulas for determinant-one nonnegative maps, Jacobians of the
//! restriction to a configuration space, and the distortion constant.
//!
//! For a nonnegative matrix Q the projectivization is JQ(y) = Qy/|Qy| with
//! the coordinate-sum norm. JQ maps simplices to simplices, so pushing a
//! triangulation forward vertex-wise measures images exactly. The full
//! Jacobian on the simplex is 1/|Qy|^d; restricted to a switch slice W it
//! becomes 1/(a·|Qy|^{d-1}) with a constant a depending only on the stage.

use crate::geometry::plane::AffinePlane;
use crate::geometry::polytope::{ConfigurationSpace, Simplex, Triangulation};
use crate::geometry::GeometryError;
use crate::matrix::ExpansionMatrix;
use crate::numeric::{coordinate_sum, dot, l1_norm, to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// JQ(y) = Qy/|Qy|.
pub fn projectivize(q: &ExpansionMatrix, y: &[Rational]) -> Result<Vec<Rational>, GeometryError> {
    let image = q.mul_vector(y);
    let norm = l1_norm(&image);
    if norm.is_zero() {
        return Err(GeometryError::ZeroImage);
    }
    Ok(image.into_iter().map(|x| x / &norm).collect())
}

/// |Qy| for nonnegative y, exact.
pub fn image_norm(q: &ExpansionMatrix, y: &[Rational]) -> Rational {
    coordinate_sum(&q.mul_vector(y))
}

/// Pushes a triangulation forward through JQ vertex-wise. The image lies in
/// `target`, the plane of the start configuration space.
pub fn image_triangulation(
    q: &ExpansionMatrix,
    tri: &Triangulation,
    target: &AffinePlane,
) -> Result<Triangulation, GeometryError> {
    let mut simplices = Vec::with_capacity(tri.simplices.len());
    for s in &tri.simplices {
        let vertices = s
            .vertices
            .iter()
            .map(|v| projectivize(q, v))
            .collect::<Result<Vec<_>, _>>()?;
        debug_assert!(vertices.iter().all(|v| target.contains(v)));
        simplices.push(Simplex { vertices });
    }
    Ok(Triangulation {
        plane: target.clone(),
        simplices,
    })
}

/// Exact chart measure of JQ(P) in the target plane's chart.
pub fn image_chart_measure(
    q: &ExpansionMatrix,
    tri: &Triangulation,
    target: &AffinePlane,
) -> Result<Rational, GeometryError> {
    Ok(image_triangulation(q, tri, target)?.chart_measure())
}

pub fn image_euclidean_measure(
    q: &ExpansionMatrix,
    tri: &Triangulation,
    target: &AffinePlane,
) -> Result<f64, GeometryError> {
    Ok(image_triangulation(q, tri, target)?.euclidean_measure())
}

/// ℓ(JQ(Δ))/ℓ(Δ) = 1/Π_α |Q(α)| for nonnegative Q of determinant ±1.
pub fn simplex_measure_ratio(q: &ExpansionMatrix) -> Result<Rational, GeometryError> {
    let mut product = BigInt::one();
    for norm in q.column_norms() {
        if norm.is_zero() {
            return Err(GeometryError::SingularMatrix);
        }
        product *= norm;
    }
    Ok(Rational::new(BigInt::one(), product))
}

/// ℓ(J(QE)(Δ))/ℓ(JQ(Δ)) = |Q(α)|/(|Q(α)| + R·|Q(β)|) for the elementary E
/// with off-diagonal (β, α) entry R; α is the moved column, β the mover.
pub fn elementary_measure_ratio(
    q: &ExpansionMatrix,
    moved: crate::combinatorics::BandLabel,
    mover: crate::combinatorics::BandLabel,
    r: &Rational,
) -> Rational {
    let qa = Rational::from_integer(q.column_norm(moved));
    let qb = Rational::from_integer(q.column_norm(mover));
    &qa / (&qa + r * &qb)
}

/// The constant a of a stage: for w = Qy with y in W, project Qm along w
/// onto the simplex directions and read off the component along the start
/// plane's unit normal. The projection φ_w(v) = v − (Σv/Σw)·w keeps the
/// component along m₀ unchanged as w moves in Q's image of W's span, which
/// is why a is constant on W.
#[derive(Debug, Clone, Copy)]
pub struct DistortionConstant {
    pub a: f64,
    /// Exponent of |Qy| in the restricted Jacobian: d-1 on a switch slice,
    /// d on the full simplex (classical sentinel with a = 1).
    pub exponent: u32,
    pub classical: bool,
}

pub fn distortion_constant(
    q: &ExpansionMatrix,
    w: &ConfigurationSpace,
    w0: &ConfigurationSpace,
) -> Result<DistortionConstant, GeometryError> {
    distortion_constant_at(q, w, w0, &w.centroid())
}

/// Same, evaluated at a chosen point y in the relative interior of W. The
/// result is independent of y; tests exploit that as the oracle.
pub fn distortion_constant_at(
    q: &ExpansionMatrix,
    w: &ConfigurationSpace,
    w0: &ConfigurationSpace,
    y: &[Rational],
) -> Result<DistortionConstant, GeometryError> {
    let d = q.d();
    if w.classical || w0.classical {
        if w.classical != w0.classical {
            return Err(GeometryError::DegenerateNormal);
        }
        return Ok(DistortionConstant {
            a: 1.0,
            exponent: d as u32,
            classical: true,
        });
    }
    let m_unnormalized = w
        .plane()
        .switch_normal_in_simplex_plane()
        .ok_or(GeometryError::DegenerateNormal)?;
    let m0_unnormalized = w0
        .plane()
        .switch_normal_in_simplex_plane()
        .ok_or(GeometryError::DegenerateNormal)?;
    if m_unnormalized.iter().all(|x| x.is_zero()) || m0_unnormalized.iter().all(|x| x.is_zero()) {
        return Err(GeometryError::DegenerateNormal);
    }
    let wvec = q.mul_vector(y);
    let sum_w = coordinate_sum(&wvec);
    if sum_w.is_zero() {
        return Err(GeometryError::ZeroImage);
    }
    let qm = q.mul_vector(&m_unnormalized);
    // φ_w(Qm) = Qm − (Σ(Qm)/Σw)·w
    let scale = coordinate_sum(&qm) / &sum_w;
    let projected: Vec<Rational> = qm
        .iter()
        .zip(&wvec)
        .map(|(a, b)| a - &scale * b)
        .collect();
    let inner = dot(&projected, &m0_unnormalized);
    let norm_m = norm2_f64(&m_unnormalized);
    let norm_m0 = norm2_f64(&m0_unnormalized);
    // Signs of m and m₀ are only fixed up to the first-nonzero-positive
    // convention; flip m if needed so a > 0.
    let a = to_f64(&inner).abs() / (norm_m * norm_m0);
    Ok(DistortionConstant {
        a,
        exponent: (d - 1) as u32,
        classical: false,
    })
}

fn norm2_f64(v: &[Rational]) -> f64 {
    v.iter().map(|x| to_f64(x).powi(2)).sum::<f64>().sqrt()
}

/// Jacobian of JQ as a map of the full simplex: 1/|Qy|^d.
pub fn full_jacobian(q: &ExpansionMatrix, y: &[Rational]) -> f64 {
    let norm = image_norm(q, y);
    to_f64(&norm).powi(-(q.d() as i32))
}

/// Jacobian of JQ restricted from W to W₀: 1/(a·|Qy|^{d-1}); on classical
/// spaces this is the full simplex Jacobian.
pub fn restricted_jacobian(
    q: &ExpansionMatrix,
    w: &ConfigurationSpace,
    w0: &ConfigurationSpace,
    y: &[Rational],
) -> Result<f64, GeometryError> {
    let dc = distortion_constant(q, w, w0)?;
    Ok(restricted_jacobian_with(q, &dc, y))
}

pub fn restricted_jacobian_with(q: &ExpansionMatrix, dc: &DistortionConstant, y: &[Rational]) -> f64 {
    let norm = to_f64(&image_norm(q, y));
    1.0 / (dc.a * norm.powi(dc.exponent as i32))
}

/// Exact ratio of restricted Jacobians at two points of the same stage:
/// (|Qy'|/|Qy|)^{exponent}; the constant a cancels.
pub fn restricted_jacobian_ratio(
    q: &ExpansionMatrix,
    y: &[Rational],
    y_prime: &[Rational],
    exponent: u32,
) -> Rational {
    let n = image_norm(q, y);
    let np = image_norm(q, y_prime);
    power(&(np / n), exponent)
}

/// Max/min of |Qv| over the vertices of W, exact.
pub fn vertex_norm_ratio(q: &ExpansionMatrix, w: &ConfigurationSpace) -> Rational {
    let norms: Vec<Rational> = w
        .polytope
        .vertices
        .iter()
        .map(|v| image_norm(q, v))
        .collect();
    let max = norms.iter().max().unwrap().clone();
    let min = norms.iter().min().unwrap().clone();
    max / min
}

pub fn power(r: &Rational, e: u32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..e {
        out *= r;
    }
    out
}
