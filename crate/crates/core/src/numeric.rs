//! Exact rational scalars and the few conversions the rest of the crate needs.
//!
//! All combinatorial and measure-theoretic computations run on `BigRational`;
//! floating point only appears at the final step of Euclidean quantities
//! (square roots, diameters, Jacobian samples).

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rational = BigRational;

/// Shorthand for a small rational constant.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Parses "p/q" or a bare integer "p".
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d = BigInt::from_str(den).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

/// Formats as "p/q", or "p" when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational to f64, safe for numerators/denominators far beyond f64 range.
///
/// `BigInt::to_f64` saturates to infinity past 2^1024, which would turn a
/// perfectly finite ratio of two huge integers into NaN. Scale both parts
/// down to ~64 bits first and reapply the exponent.
pub fn to_f64(r: &Rational) -> f64 {
    let p = r.numer();
    let q = r.denom();
    if p.is_zero() {
        return 0.0;
    }
    let sign = if p.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let p = p.magnitude();
    let q = q.magnitude();
    let pb = p.bits() as i64;
    let qb = q.bits() as i64;
    let sp = (pb - 64).max(0);
    let sq = (qb - 64).max(0);
    let pf = (p >> sp as u64).to_f64().unwrap_or(f64::MAX);
    let qf = (q >> sq as u64).to_f64().unwrap_or(f64::MAX);
    let exp = sp - sq;
    if exp > 1100 {
        return sign * f64::INFINITY;
    }
    if exp < -1100 {
        return 0.0 * sign;
    }
    sign * (pf / qf) * (exp as f64).exp2()
}

/// num/den as f64 without constructing a reduced rational; same shifting
/// scheme as [`to_f64`]. Both arguments must be nonnegative, den positive.
pub fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let p = num.magnitude();
    let q = den.magnitude();
    let sp = (p.bits() as i64 - 64).max(0);
    let sq = (q.bits() as i64 - 64).max(0);
    let pf = (p >> sp as u64).to_f64().unwrap_or(f64::MAX);
    let qf = (q >> sq as u64).to_f64().unwrap_or(f64::MAX);
    let exp = sp - sq;
    if exp > 1100 {
        return f64::INFINITY;
    }
    if exp < -1100 {
        return 0.0;
    }
    (pf / qf) * (exp as f64).exp2()
}

/// Coordinate-sum norm |y| = Σ|y_i|; on the nonnegative orthant this is the
/// additive norm used for projectivization.
pub fn l1_norm(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).sum()
}

pub fn coordinate_sum(v: &[Rational]) -> Rational {
    v.iter().sum()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn point_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

/// Euclidean distance between two rational points, evaluated in f64.
pub fn euclidean_distance(a: &[Rational], b: &[Rational]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dxy = to_f64(&(x - y));
        acc += dxy * dxy;
    }
    acc.sqrt()
}

/// Exact determinant of a square rational matrix by Gaussian elimination.
pub fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !m[r][col].is_zero()) {
            Some(p) => p,
            None => return Rational::zero(),
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pv;
            for c in col..n {
                let sub = &factor * &m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Pow;
    use proptest::prelude::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/7", "-2/5", "4", "0", "10/17"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn to_f64_handles_huge_ratios() {
        let big = BigInt::from(3).pow(4000u32);
        let r = Rational::new(big.clone() * 7, big * 2);
        assert!((to_f64(&r) - 3.5).abs() < 1e-12);
        let tiny = Rational::new(BigInt::one(), BigInt::from(2).pow(3000u32));
        assert_eq!(to_f64(&tiny), 0.0);
    }

    #[test]
    fn determinant_small_cases() {
        let id = vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]];
        assert_eq!(determinant(&id), rat_int(1));
        let m = vec![vec![rat_int(2), rat_int(1)], vec![rat_int(1), rat_int(1)]];
        assert_eq!(determinant(&m), rat_int(1));
        let sing = vec![vec![rat_int(1), rat_int(2)], vec![rat_int(2), rat_int(4)]];
        assert_eq!(determinant(&sing), rat_int(0));
    }

    proptest! {
        // Additivity of the norm on the nonnegative orthant.
        #[test]
        fn l1_additive_on_nonnegative(
            a in prop::collection::vec((0i64..1000, 1i64..50), 1..6),
            b in prop::collection::vec((0i64..1000, 1i64..50), 1..6),
        ) {
            let n = a.len().min(b.len());
            let x: Vec<Rational> = a[..n].iter().map(|&(p, q)| rat(p, q)).collect();
            let y: Vec<Rational> = b[..n].iter().map(|&(p, q)| rat(p, q)).collect();
            let sum: Vec<Rational> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
            prop_assert_eq!(l1_norm(&sum), l1_norm(&x) + l1_norm(&y));
        }
    }
}
