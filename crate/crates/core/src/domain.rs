//! Box-shaped basins and their boundary patches.
//!
//! A basin is an axis-aligned closed box. Exit channels are declared as
//! patches on the faces: `Sigma` patches (open balls of radius `rho` around
//! a saddle, intersected with its face) and the larger `Gamma` patches that
//! contain them (by default the whole face). Corners are not smoothed.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::potential::MAX_DIM;

/// Label used for exits outside every declared patch.
pub const OTHER: &str = "other";

/// Distance below which a point counts as lying on a face.
pub const FACE_TOL: f64 = 1e-9;

const AXES: [char; 3] = ['x', 'y', 'z'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    pub fn new(axis: usize, upper: bool) -> Self {
        Face { axis, upper }
    }

    /// Outward unit normal sign along `axis`.
    pub fn sign(&self) -> f64 {
        if self.upper {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.upper { '+' } else { '-' };
        match AXES.get(self.axis) {
            Some(a) => write!(f, "{s}{a}"),
            None => write!(f, "{s}{}", self.axis),
        }
    }
}

impl FromStr for Face {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        let upper = match chars.next() {
            Some('+') => true,
            Some('-') => false,
            _ => return Err(Error::Config(format!("face `{s}` must start with + or -"))),
        };
        let rest: String = chars.collect();
        let axis = match rest.as_str() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            other => other
                .parse()
                .map_err(|_| Error::Config(format!("unknown face axis in `{s}`")))?,
        };
        Ok(Face { axis, upper })
    }
}

impl Serialize for Face {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Face {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `Sigma_z`: points of `face` strictly within `radius` of `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPatch {
    pub label: String,
    pub face: Face,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// `Gamma_z`: a rectangular piece of a face. `extent` lists closed
/// intervals for the tangential axes in increasing axis order; `None`
/// means the whole face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaPatch {
    pub label: String,
    pub face: Face,
    #[serde(default)]
    pub extent: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    patches: Vec<BoundaryPatch>,
    gamma: Vec<GammaPatch>,
}

impl DomainSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "box dimension must be in 1..={MAX_DIM}"
            )));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "box bounds must satisfy lower < upper: {lower:?} {upper:?}"
            )));
        }
        Ok(DomainSpec {
            lower,
            upper,
            patches: Vec::new(),
            gamma: Vec::new(),
        })
    }

    pub fn square(half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; 2], vec![half_width; 2])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dimension())
            .map(|a| self.extent(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn patches(&self) -> &[BoundaryPatch] {
        &self.patches
    }

    pub fn gamma_patches(&self) -> &[GammaPatch] {
        &self.gamma
    }

    pub fn corners_smoothed(&self) -> bool {
        false
    }

    pub fn faces(&self) -> Vec<Face> {
        (0..self.dimension())
            .flat_map(|a| [Face::new(a, false), Face::new(a, true)])
            .collect()
    }

    pub fn face_coordinate(&self, face: Face) -> f64 {
        if face.upper {
            self.upper[face.axis]
        } else {
            self.lower[face.axis]
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn strictly_inside(&self, x: &[f64], margin: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *v > *a + margin && *v < *b - margin)
    }

    /// Faces within `tol` of `x`.
    pub fn faces_at(&self, x: &[f64], tol: f64) -> Vec<Face> {
        self.faces()
            .into_iter()
            .filter(|f| (x[f.axis] - self.face_coordinate(*f)).abs() <= tol)
            .collect()
    }

    pub fn on_face(&self, face: Face, x: &[f64], tol: f64) -> bool {
        (x[face.axis] - self.face_coordinate(face)).abs() <= tol
            && (0..self.dimension())
                .filter(|&a| a != face.axis)
                .all(|a| x[a] >= self.lower[a] - tol && x[a] <= self.upper[a] + tol)
    }

    pub fn add_patch(&mut self, patch: BoundaryPatch) -> Result<()> {
        self.check_patch_geometry(&patch)?;
        if self.patches.iter().any(|p| p.label == patch.label) {
            return Err(Error::Config(format!(
                "duplicate patch label `{}`",
                patch.label
            )));
        }
        for other in &self.patches {
            if patches_intersect(self, other, &patch) {
                return Err(Error::Config(format!(
                    "patches `{}` and `{}` overlap",
                    other.label, patch.label
                )));
            }
        }
        let added_gamma = !self.gamma.iter().any(|g| g.label == patch.label);
        if added_gamma {
            self.gamma.push(GammaPatch {
                label: patch.label.clone(),
                face: patch.face,
                extent: None,
            });
        }
        self.patches.push(patch);
        if let Err(e) = self.check_sigma_in_gamma() {
            self.patches.pop();
            if added_gamma {
                self.gamma.pop();
            }
            return Err(e);
        }
        Ok(())
    }

    /// Replaces the default whole-face `Gamma` of a patch.
    pub fn set_gamma(&mut self, gamma: GammaPatch) -> Result<()> {
        if let Some(ext) = &gamma.extent {
            if ext.len() + 1 != self.dimension() {
                return Err(Error::Config(format!(
                    "gamma `{}` extent needs {} intervals",
                    gamma.label,
                    self.dimension() - 1
                )));
            }
        }
        self.gamma.retain(|g| g.label != gamma.label);
        self.gamma.push(gamma);
        self.check_sigma_in_gamma()
    }

    fn check_patch_geometry(&self, p: &BoundaryPatch) -> Result<()> {
        if p.face.axis >= self.dimension() {
            return Err(Error::Config(format!(
                "patch `{}` names a missing axis",
                p.label
            )));
        }
        if p.center.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: p.center.len(),
            });
        }
        if !(p.radius > 0.0) {
            return Err(Error::Config(format!(
                "patch `{}` radius must be > 0",
                p.label
            )));
        }
        if label_is_reserved(&p.label) {
            return Err(Error::Config(format!("patch label `{OTHER}` is reserved")));
        }
        if !self.on_face(p.face, &p.center, 1e-8) {
            return Err(Error::Config(format!(
                "patch `{}` center {:?} is not on face {}",
                p.label, p.center, p.face
            )));
        }
        Ok(())
    }

    fn check_sigma_in_gamma(&self) -> Result<()> {
        for p in &self.patches {
            let g = self
                .gamma
                .iter()
                .find(|g| g.label == p.label)
                .ok_or_else(|| Error::Config(format!("no gamma patch for `{}`", p.label)))?;
            if g.face != p.face {
                return Err(Error::Config(format!(
                    "sigma `{}` and its gamma lie on different faces",
                    p.label
                )));
            }
            for (k, a) in self.tangential_axes(p.face).into_iter().enumerate() {
                let (lo, hi) = match &g.extent {
                    Some(ext) => (ext[k][0], ext[k][1]),
                    None => (self.lower[a], self.upper[a]),
                };
                let from = (p.center[a] - p.radius).max(self.lower[a]);
                let to = (p.center[a] + p.radius).min(self.upper[a]);
                if from < lo - 1e-12 || to > hi + 1e-12 {
                    return Err(Error::Config(format!(
                        "closure of sigma `{}` leaves its gamma along axis {a}",
                        p.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn tangential_axes(&self, face: Face) -> Vec<usize> {
        (0..self.dimension()).filter(|&a| a != face.axis).collect()
    }

    /// Sigma patch containing boundary point `x`, if any.
    pub fn patch_of(&self, x: &[f64]) -> Option<&BoundaryPatch> {
        self.patches
            .iter()
            .find(|p| self.on_face(p.face, x, FACE_TOL) && distance(x, &p.center) < p.radius)
    }

    pub fn patch_label(&self, x: &[f64]) -> &str {
        self.patch_of(x).map(|p| p.label.as_str()).unwrap_or(OTHER)
    }

    pub fn gamma(&self, label: &str) -> Option<&GammaPatch> {
        self.gamma.iter().find(|g| g.label == label)
    }

    /// Whether boundary point `x` lies in the relatively open gamma patch.
    pub fn in_gamma(&self, label: &str, x: &[f64], tol: f64) -> bool {
        let Some(g) = self.gamma(label) else {
            return false;
        };
        if (x[g.face.axis] - self.face_coordinate(g.face)).abs() > tol {
            return false;
        }
        self.tangential_axes(g.face)
            .into_iter()
            .enumerate()
            .all(|(k, a)| {
                let (lo, hi) = match &g.extent {
                    Some(ext) => (ext[k][0], ext[k][1]),
                    None => (self.lower[a], self.upper[a]),
                };
                x[a] > lo + tol && x[a] < hi - tol
            })
    }

    pub fn labels(&self) -> Vec<String> {
        self.patches.iter().map(|p| p.label.clone()).collect()
    }
}

fn label_is_reserved(label: &str) -> bool {
    label == OTHER
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn patches_intersect(dom: &DomainSpec, a: &BoundaryPatch, b: &BoundaryPatch) -> bool {
    if a.face == b.face {
        return distance(&a.center, &b.center) < a.radius + b.radius;
    }
    if a.face.axis == b.face.axis {
        return false;
    }
    // Adjacent faces share the edge where both face coordinates are fixed.
    let va = dom.face_coordinate(a.face);
    let vb = dom.face_coordinate(b.face);
    let perp = |p: &BoundaryPatch| {
        (p.center[a.face.axis] - va).powi(2) + (p.center[b.face.axis] - vb).powi(2)
    };
    let ra2 = a.radius * a.radius - perp(a);
    let rb2 = b.radius * b.radius - perp(b);
    if ra2 <= 0.0 || rb2 <= 0.0 {
        return false;
    }
    let free: Vec<usize> = (0..dom.dimension())
        .filter(|&k| k != a.face.axis && k != b.face.axis)
        .collect();
    match free.as_slice() {
        [] => true,
        [k] => {
            let (ha, hb) = (ra2.sqrt(), rb2.sqrt());
            let lo = (a.center[*k] - ha)
                .max(b.center[*k] - hb)
                .max(dom.lower[*k]);
            let hi = (a.center[*k] + ha)
                .min(b.center[*k] + hb)
                .min(dom.upper[*k]);
            lo < hi
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_domain(rho: f64) -> DomainSpec {
        let mut d = DomainSpec::square(1.0).unwrap();
        for (label, face, c) in [
            ("z1", "+x", [1.0, 0.0]),
            ("z2", "-x", [-1.0, 0.0]),
            ("z3", "+y", [0.0, 1.0]),
            ("z4", "-y", [0.0, -1.0]),
        ] {
            d.add_patch(BoundaryPatch {
                label: label.into(),
                face: face.parse().unwrap(),
                center: c.to_vec(),
                radius: rho,
            })
            .unwrap();
        }
        d
    }

    #[test]
    fn face_roundtrip() {
        for s in ["+x", "-y", "+z"] {
            assert_eq!(s.parse::<Face>().unwrap().to_string(), s);
        }
        assert!("x".parse::<Face>().is_err());
    }

    #[test]
    fn full_face_patches_are_disjoint() {
        let d = lattice_domain(1.0);
        assert_eq!(d.patch_label(&[1.0, 0.999]), "z1");
        assert_eq!(d.patch_label(&[0.3, -1.0]), "z4");
        // corners are at distance exactly 1 from both centers
        assert_eq!(d.patch_label(&[1.0, 1.0]), OTHER);
    }

    #[test]
    fn small_patches_leave_other() {
        let d = lattice_domain(0.25);
        assert_eq!(d.patch_label(&[1.0, 0.2]), "z1");
        assert_eq!(d.patch_label(&[1.0, 0.3]), OTHER);
    }

    #[test]
    fn overlapping_patches_rejected() {
        let mut d = DomainSpec::square(1.0).unwrap();
        d.add_patch(BoundaryPatch {
            label: "a".into(),
            face: Face::new(0, true),
            center: vec![1.0, 0.9],
            radius: 0.5,
        })
        .unwrap();
        let err = d.add_patch(BoundaryPatch {
            label: "b".into(),
            face: Face::new(1, true),
            center: vec![0.9, 1.0],
            radius: 0.5,
        });
        assert!(err.is_err());
    }

    #[test]
    fn sigma_must_fit_gamma() {
        let mut d = lattice_domain(0.2);
        let bad = GammaPatch {
            label: "z1".into(),
            face: Face::new(0, true),
            extent: Some(vec![[-0.1, 0.1]]),
        };
        assert!(d.set_gamma(bad).is_err());
        let good = GammaPatch {
            label: "z1".into(),
            face: Face::new(0, true),
            extent: Some(vec![[-0.5, 0.5]]),
        };
        d.set_gamma(good).unwrap();
        assert!(d.in_gamma("z1", &[1.0, 0.4], 1e-12));
        assert!(!d.in_gamma("z1", &[1.0, 0.6], 1e-12));
    }

    #[test]
    fn gamma_defaults_to_open_face() {
        let d = lattice_domain(0.2);
        assert!(d.in_gamma("z1", &[1.0, 0.99], 1e-12));
        assert!(!d.in_gamma("z1", &[1.0, 1.0], 1e-12));
        assert!(!d.in_gamma("z1", &[-1.0, 0.0], 1e-12));
    }
}
