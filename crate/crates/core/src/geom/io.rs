//! OFF and JSON mesh serialization.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::mesh::PolytopeMesh;
use super::{GeomError, Vec3};
use crate::scalar::Real;

/// Significant digits used when writing OFF files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OffPrecision {
    /// Six significant digits.
    #[default]
    Short,
    /// Seventeen significant digits, enough to round-trip an `f64`.
    Exact,
}

impl OffPrecision {
    pub fn digits(self) -> usize {
        match self {
            Self::Short => 6,
            Self::Exact => 17,
        }
    }
}

/// Formats `x` with `digits` significant digits in scientific notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// JSON mesh schema: `{vertices, facets, areas, volume}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshJson {
    pub vertices: Vec<[f64; 3]>,
    pub facets: Vec<Vec<usize>>,
    pub areas: Vec<f64>,
    pub volume: f64,
}

impl<T: Real> PolytopeMesh<T> {
    /// ASCII OFF representation.
    pub fn to_off(&self, precision: OffPrecision) -> String {
        let d = precision.digits();
        let edges = self.edges().len();
        let mut out = String::new();
        writeln!(out, "OFF").unwrap();
        writeln!(out, "{} {} {}", self.vertices.len(), self.facets.len(), edges).unwrap();
        for v in &self.vertices {
            writeln!(
                out,
                "{} {} {}",
                format_sig(v.x.f64(), d),
                format_sig(v.y.f64(), d),
                format_sig(v.z.f64(), d)
            )
            .unwrap();
        }
        for f in &self.facets {
            let idx: Vec<String> = f.iter().map(usize::to_string).collect();
            writeln!(out, "{} {}", f.len(), idx.join(" ")).unwrap();
        }
        out
    }

    /// Parses an ASCII OFF file and rebuilds normals, areas and volume.
    pub fn from_off(text: &str) -> Result<Self, GeomError> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let parse_err = |what: &str| GeomError::Parse(format!("OFF: bad {what}"));
        if tokens.next() != Some("OFF") {
            return Err(parse_err("header"));
        }
        let mut count = || -> Result<usize, GeomError> {
            tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err("count"))
        };
        let nv = count()?;
        let nf = count()?;
        let _ne = count()?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let mut c = [T::zero(); 3];
            for x in &mut c {
                let v: f64 = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err("vertex"))?;
                *x = T::of(v);
            }
            vertices.push(Vec3::from(c));
        }
        let mut facets = Vec::with_capacity(nf);
        for _ in 0..nf {
            let k: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err("facet size"))?;
            let f = (0..k)
                .map(|_| {
                    tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err("facet index"))
                })
                .collect::<Result<Vec<usize>, _>>()?;
            facets.push(f);
        }
        Self::from_parts(vertices, facets)
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v.x.f64(), v.y.f64(), v.z.f64()])
                .collect(),
            facets: self.facets.clone(),
            areas: self.areas.iter().map(|a| a.f64()).collect(),
            volume: self.volume.f64(),
        }
    }

    /// Rebuilds a mesh from its JSON form; cached values are recomputed.
    pub fn from_json(json: &MeshJson) -> Result<Self, GeomError> {
        let vertices = json
            .vertices
            .iter()
            .map(|&[x, y, z]| Vec3::of(x, y, z))
            .collect();
        Self::from_parts(vertices, json.facets.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{convex_hull_3d, mesh_metrics};

    fn sample() -> PolytopeMesh<f64> {
        let pts = vec![
            Vec3::of(0.1, 0.0, 0.0),
            Vec3::of(1.0, 0.2, 0.0),
            Vec3::of(0.0, 1.0, 0.3),
            Vec3::of(0.3, 0.3, 1.0),
            Vec3::of(0.9, 0.8, 0.7),
        ];
        convex_hull_3d(&pts).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = sample();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back: MeshJson = serde_json::from_str(&text).unwrap();
        let m2 = PolytopeMesh::<f64>::from_json(&back).unwrap();
        let (a, b) = (mesh_metrics(&m), mesh_metrics(&m2));
        assert_eq!(a, b);
    }

    #[test]
    fn off_round_trip_exact_precision() {
        let m = sample();
        let off = m.to_off(OffPrecision::Exact);
        let m2 = PolytopeMesh::<f64>::from_off(&off).unwrap();
        assert_eq!(m.vertices, m2.vertices);
        assert!((m.volume - m2.volume).abs() <= 1e-15);
    }

    #[test]
    fn off_short_precision_has_six_digits() {
        let off = sample().to_off(OffPrecision::Short);
        let line = off.lines().nth(2).unwrap();
        assert_eq!(line.split_whitespace().next().unwrap(), "1.00000e-1");
    }

    #[test]
    fn malformed_off_is_rejected() {
        assert!(PolytopeMesh::<f64>::from_off("OFF\n3 1").is_err());
        assert!(PolytopeMesh::<f64>::from_off("PLY").is_err());
    }
}
