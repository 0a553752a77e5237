//! Infimum of the areas of convex or simple polygons with prescribed side
//! lengths in the Euclidean, spherical and hyperbolic planes.
//!
//! The infimum is the least area of a triangle whose sides are sums of the
//! given lengths over a partition into three non-empty classes (signed
//! sums for simple polygons). Both searches are exhaustive and return a
//! certificate attaining the value. Ties go to the partition whose
//! restricted-growth labelling is lexicographically smallest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noneuclid::{triangle_area_from_sides, Geometry, NoneuclidError};
use crate::scalar::Real;

/// Largest `m` for the convex search (`3^m / 6` partitions).
pub const MAX_SIDES_CONVEX: usize = 14;
/// Largest `m` for the signed search.
pub const MAX_SIDES_SIMPLE: usize = 12;

/// Errors raised by the infimum searches.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfimumError {
    #[error("infeasible side lengths: {0}")]
    Infeasible(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("internal error: no partition satisfies the triangle inequality")]
    NoValidPartition,
    #[error(transparent)]
    Trig(#[from] NoneuclidError),
}

/// A partition into three classes attaining the infimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    /// Zero-based side indices of each class.
    pub parts: [Vec<usize>; 3],
    /// Sign of each side (signed search only).
    pub signs: Option<Vec<i8>>,
    /// Signed class sums.
    pub triple: [f64; 3],
    pub area: f64,
    pub geometry: Geometry,
}

/// Result of [`infimum_simple`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleInfimum {
    pub value: f64,
    pub certificate: PartitionCertificate,
    /// When the value is nonzero: no class sum splits into two positive
    /// partial sums over a partition of the class.
    pub indecomposable: Option<bool>,
}

fn validate<T: Real>(s: &[T], g: Geometry, cap: usize) -> Result<(), InfimumError> {
    let m = s.len();
    if m < 3 {
        return Err(InfimumError::Infeasible(format!("{m} sides do not close a polygon")));
    }
    if m > cap {
        return Err(InfimumError::OutOfRange(format!(
            "exhaustive search is limited to {cap} sides (got {m})"
        )));
    }
    if s.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(InfimumError::OutOfRange("side lengths must be positive".into()));
    }
    let total: T = s.iter().copied().sum();
    let smax = s.iter().copied().fold(T::zero(), T::max);
    if smax >= total - smax {
        return Err(InfimumError::Infeasible(format!(
            "longest side {:e} is not shorter than the sum of the others",
            smax.f64()
        )));
    }
    if g == Geometry::Spherical && total > T::PI() * (T::one() + T::epsilon()) {
        return Err(InfimumError::Infeasible(format!(
            "spherical perimeter {:e} exceeds π",
            total.f64()
        )));
    }
    Ok(())
}

/// Calls `visit` with every restricted-growth labelling of `m` items into
/// exactly three classes, in lexicographic order.
fn for_each_partition(m: usize, mut visit: impl FnMut(&[u8])) {
    fn rec(labels: &mut Vec<u8>, m: usize, used: u8, visit: &mut dyn FnMut(&[u8])) {
        let i = labels.len();
        if i == m {
            if used == 3 {
                visit(labels);
            }
            return;
        }
        // Not enough items left to open the missing classes.
        if (m - i) < (3 - used as usize) {
            return;
        }
        let top = (used + 1).min(3);
        for c in 0..top {
            labels.push(c);
            rec(labels, m, used.max(c + 1), visit);
            labels.pop();
        }
    }
    let mut labels = Vec::with_capacity(m);
    labels.push(0);
    rec(&mut labels, m, 1, &mut visit);
}

fn parts_of(labels: &[u8]) -> [Vec<usize>; 3] {
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (i, &c) in labels.iter().enumerate() {
        parts[c as usize].push(i);
    }
    parts
}

/// Area of the triple, or `None` if it violates the triangle inequality.
fn triple_area<T: Real>(t: [T; 3], g: Geometry) -> Option<T> {
    triangle_area_from_sides(t[0], t[1], t[2], g).ok()
}

/// Minimum area of a triangle whose sides are class sums over partitions
/// into three non-empty classes (contiguous arcs when `cyclic`).
pub fn infimum_convex<T: Real>(
    s: &[T],
    g: Geometry,
    cyclic: bool,
) -> Result<(T, PartitionCertificate), InfimumError> {
    validate(s, g, MAX_SIDES_CONVEX)?;
    let m = s.len();
    let mut best: Option<(T, [Vec<usize>; 3], [T; 3])> = None;
    let mut consider = |parts: [Vec<usize>; 3]| {
        let t = parts
            .clone()
            .map(|p| p.iter().fold(T::zero(), |acc, &i| acc + s[i]));
        if let Some(a) = triple_area(t, g) {
            if best.as_ref().is_none_or(|b| a < b.0) {
                best = Some((a, parts, t));
            }
        }
    };
    if cyclic {
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let arc = |a: usize, b: usize| -> Vec<usize> {
                        let mut v: Vec<usize> = (a..b).collect();
                        if b <= a {
                            v = (a..m).chain(0..b).collect();
                        }
                        v
                    };
                    consider([arc(i, j), arc(j, k), arc(k, i)]);
                }
            }
        }
    } else {
        for_each_partition(m, |labels| consider(parts_of(labels)));
    }
    let (value, parts, t) = best.ok_or(InfimumError::NoValidPartition)?;
    Ok((
        value,
        PartitionCertificate {
            parts,
            signs: None,
            triple: t.map(Real::f64),
            area: value.f64(),
            geometry: g,
        },
    ))
}

/// Non-negative signed sums of one class, sorted, each with the sign mask
/// (bit set = negative) that first produced it.
fn signed_sums<T: Real>(s: &[T], idx: &[usize]) -> Vec<(T, u32)> {
    let k = idx.len();
    let mut out: Vec<(T, u32)> = Vec::with_capacity(1 << k);
    for mask in 0u32..(1u32 << k) {
        let mut sum = T::zero();
        for (b, &i) in idx.iter().enumerate() {
            if mask & (1 << b) != 0 {
                sum = sum - s[i];
            } else {
                sum = sum + s[i];
            }
        }
        if sum >= T::zero() {
            out.push((sum, mask));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    out.dedup_by(|later, earlier| later.0 == earlier.0);
    out
}

/// Minimum over partitions and signs of the area of the triangle with the
/// three signed class sums.
///
/// For fixed `a` and `b` the area is concave in the third side on
/// `[|a − b|, a + b]`, so only the smallest and largest admissible class
/// sums need to be tried for the third class.
pub fn infimum_simple<T: Real>(s: &[T], g: Geometry) -> Result<SimpleInfimum, InfimumError> {
    validate(s, g, MAX_SIDES_SIMPLE)?;
    let m = s.len();
    let total: T = s.iter().copied().sum();
    let tol = T::tol_at_least(1e-12, 16.0) * total;
    // Area, class labels, class bitmasks and class sums of the best partition.
    type Best<T> = (T, Vec<u8>, [u32; 3], [T; 3]);
    let mut best: Option<Best<T>> = None;

    for_each_partition(m, |labels| {
        let parts = parts_of(labels);
        let sums: Vec<Vec<(T, u32)>> = parts.iter().map(|p| signed_sums(s, p)).collect();
        let (sa, sb, sc) = (&sums[0], &sums[1], &sums[2]);
        for &(a, ma) in sa {
            for &(b, mb) in sb {
                let lo = (a - b).abs() - tol;
                let hi = a + b + tol;
                let first = sc.partition_point(|x| x.0 < lo);
                let last = sc.partition_point(|x| x.0 <= hi);
                if first >= last {
                    continue;
                }
                for &(c, mc) in [sc[first], sc[last - 1]].iter() {
                    if let Some(area) = triple_area([a, b, c], g) {
                        if best.as_ref().is_none_or(|bst| area < bst.0) {
                            best = Some((area, labels.to_vec(), [ma, mb, mc], [a, b, c]));
                        }
                    }
                }
            }
        }
    });

    let (value, labels, masks, t) = best.ok_or(InfimumError::NoValidPartition)?;
    let parts = parts_of(&labels);
    let mut signs = vec![1i8; m];
    for (p, mask) in parts.iter().zip(masks) {
        for (b, &i) in p.iter().enumerate() {
            if mask & (1 << b) != 0 {
                signs[i] = -1;
            }
        }
    }
    let indecomposable = (value > T::zero()).then(|| {
        parts
            .iter()
            .all(|p| !splits_into_positive_sums(s, p, &signs, tol))
    });
    Ok(SimpleInfimum {
        value: value.f64(),
        certificate: PartitionCertificate {
            parts,
            signs: Some(signs),
            triple: t.map(Real::f64),
            area: value.f64(),
            geometry: g,
        },
        indecomposable,
    })
}

/// Whether the signed class sum splits as a sum of two positive partial sums
/// over a partition of the class into two non-empty sets.
fn splits_into_positive_sums<T: Real>(s: &[T], idx: &[usize], signs: &[i8], tol: T) -> bool {
    let k = idx.len();
    if k < 2 {
        return false;
    }
    let signed = |i: usize| if signs[i] < 0 { -s[i] } else { s[i] };
    let total: T = idx.iter().map(|&i| signed(i)).sum();
    // Keeping the first element in the first set visits each split once.
    let full = (1u32 << k) - 1;
    (1u32..full).step_by(2).any(|mask| {
        let first: T = idx
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &i)| signed(i))
            .sum();
        first > tol && total - first > tol
    })
}
