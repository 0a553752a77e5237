//! Fixed 3-vectors and variable-length vectors.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Real;

/// A vector in ℝ³.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Serialize> Serialize for Vec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y, &self.z).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Vec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y, z) = <(T, T, T)>::deserialize(d)?;
        Ok(Self { x, y, z })
    }
}

impl<T> From<[T; 3]> for Vec3<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Self { x, y, z }
    }
}

impl<T> From<Vec3<T>> for [T; 3] {
    fn from(v: Vec3<T>) -> Self {
        [v.x, v.y, v.z]
    }
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Builds a vector from `f64` components.
    #[inline]
    pub fn of(x: f64, y: f64, z: f64) -> Self {
        Self::new(T::of(x), T::of(y), T::of(z))
    }

    /// Standard basis vector `e_axis` (axis 0, 1 or 2).
    pub fn unit(axis: usize) -> Self {
        let mut c = [T::zero(); 3];
        c[axis] = T::one();
        c.into()
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y).hypot(self.z)
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Triple product `det[a, b, c]`.
    #[inline]
    pub fn triple(a: Self, b: Self, c: Self) -> T {
        a.dot(b.cross(c))
    }

    /// Component by index.
    pub fn get(self, i: usize) -> T {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }

    pub fn to_array(self) -> [T; 3] {
        self.into()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Any unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Self {
        let a = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Self::unit(0)
        } else if self.y.abs() <= self.z.abs() {
            Self::unit(1)
        } else {
            Self::unit(2)
        };
        self.cross(a).normalized().expect("nonzero input vector")
    }

    /// Rotates `self` about the unit `axis` by `angle` (Rodrigues).
    pub fn rotate_about(self, axis: Self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (T::one() - c))
    }

    /// Unsigned angle between two nonzero vectors, stable near 0 and π.
    pub fn angle_to(self, o: Self) -> T {
        self.cross(o).norm().atan2(self.dot(o))
    }

    /// Casts to another scalar type.
    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(U::of(self.x.f64()), U::of(self.y.f64()), U::of(self.z.f64()))
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> std::iter::Sum for Vec3<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

/// A vector in ℝⁿ for dimension-generic constructions and bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VecN<T> {
    pub coords: Vec<T>,
}

impl<T: Real> VecN<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![T::zero(); n])
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coords[axis] = T::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, o: &Self) -> T {
        assert_eq!(self.dim(), o.dim(), "dimension mismatch");
        self.coords
            .iter()
            .zip(&o.coords)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm(&self) -> T {
        // Scaled accumulation avoids overflow for very long needles.
        let m = self.coords.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
        if m == T::zero() {
            return T::zero();
        }
        let s = self.coords.iter().fold(T::zero(), |acc, &x| {
            let y = x / m;
            acc + y * y
        });
        m * s.sqrt()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero()).then(|| self.scale(T::one() / n))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coords.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.coords.iter().zip(&o.coords).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.coords.iter().zip(&o.coords).map(|(&a, &b)| a - b).collect())
    }

    pub fn distance(&self, o: &Self) -> T {
        self.sub(o).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|x| x.is_finite())
    }
}

impl<T> Index<usize> for VecN<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

impl<T: Real> From<Vec3<T>> for VecN<T> {
    fn from(v: Vec3<T>) -> Self {
        Self::new(vec![v.x, v.y, v.z])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_and_triple_product() {
        let x = Vec3::<f64>::unit(0);
        let y = Vec3::<f64>::unit(1);
        assert_eq!(x.cross(y), Vec3::unit(2));
        assert_eq!(Vec3::triple(x, y, Vec3::unit(2)), 1.0);
    }

    #[test]
    fn rotation_preserves_norm() {
        let v = Vec3::<f64>::of(1.0, 2.0, 3.0);
        let axis = Vec3::of(0.0, 0.0, 1.0);
        let r = v.rotate_about(axis, 0.7);
        assert!((r.norm() - v.norm()).abs() < 1e-14);
        assert!((r.z - 3.0).abs() < 1e-15);
    }

    #[test]
    fn any_orthogonal_is_unit_and_orthogonal() {
        let v = Vec3::<f64>::of(0.3, -2.0, 0.1);
        let w = v.any_orthogonal();
        assert!(w.dot(v).abs() < 1e-15);
        assert!((w.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vecn_norm_is_scaled() {
        let v = VecN::new(vec![3e200f64, 4e200]);
        assert!((v.norm() / 5e200 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn serde_as_array() {
        let v = Vec3::<f64>::of(1.0, 2.0, 3.0);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1.0,2.0,3.0]");
        let back: Vec3<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
