use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Vec2};

/// Shape of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Disk { radius: f64 },
    Annulus { r_inner: f64, r_outer: f64 },
}

/// A disk or annulus centred at the origin, described by its signed distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainKind", into = "DomainKind")]
pub struct DomainSpec {
    kind: DomainKind,
    bounding_box: BoundingBox,
}

/// One circular piece of the boundary, with its own signed distance
/// (negative on the domain side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCircle {
    pub radius: f64,
    /// `true` for the boundary of an obstacle (the inner circle of an annulus).
    pub obstacle: bool,
}

impl BoundaryCircle {
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        if self.obstacle {
            self.radius - p.norm()
        } else {
            p.norm() - self.radius
        }
    }

    /// Outward unit normal of the domain at the boundary point closest to `p`.
    /// `None` at the centre, where the direction is undefined.
    pub fn outward_normal(&self, p: Vec2) -> Option<Vec2> {
        let r = p.norm();
        if r == 0.0 {
            return None;
        }
        let radial = p * (1.0 / r);
        Some(if self.obstacle { -radial } else { radial })
    }

    /// Mirror image of `p` across the circle along the radial direction.
    pub fn reflect(&self, p: Vec2) -> Option<Vec2> {
        let r = p.norm();
        if r == 0.0 {
            return None;
        }
        Some(p * ((2.0 * self.radius - r) / r))
    }
}

impl DomainSpec {
    pub fn disk(radius: f64) -> Result<Self> {
        Self::try_from(DomainKind::Disk { radius })
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Result<Self> {
        Self::try_from(DomainKind::Annulus { r_inner, r_outer })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bounding_box
    }

    pub fn outer_radius(&self) -> f64 {
        match self.kind {
            DomainKind::Disk { radius } => radius,
            DomainKind::Annulus { r_outer, .. } => r_outer,
        }
    }

    /// Negative strictly inside, zero on the boundary, positive outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let r = p.norm();
        match self.kind {
            DomainKind::Disk { radius } => r - radius,
            DomainKind::Annulus { r_inner, r_outer } => (r_inner - r).max(r - r_outer),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.signed_distance(p) < 0.0
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            DomainKind::Disk { radius } => PI * radius * radius,
            DomainKind::Annulus { r_inner, r_outer } => PI * (r_outer * r_outer - r_inner * r_inner),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.outer_radius()
    }

    pub fn boundary_circles(&self) -> Vec<BoundaryCircle> {
        match self.kind {
            DomainKind::Disk { radius } => vec![BoundaryCircle {
                radius,
                obstacle: false,
            }],
            DomainKind::Annulus { r_inner, r_outer } => vec![
                BoundaryCircle {
                    radius: r_outer,
                    obstacle: false,
                },
                BoundaryCircle {
                    radius: r_inner,
                    obstacle: true,
                },
            ],
        }
    }

    /// Parses `disk:R` or `annulus:RI,RO`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDomain(format!("cannot parse `{s}` (use disk:R or annulus:RI,RO)"));
        let (kind, params) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = params
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim(), nums.as_slice()) {
            ("disk", [r]) => Self::disk(*r),
            ("annulus", [ri, ro]) => Self::annulus(*ri, *ro),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<DomainKind> for DomainSpec {
    type Error = Error;

    fn try_from(kind: DomainKind) -> Result<Self> {
        let outer = match kind {
            DomainKind::Disk { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidDomain(format!("disk radius must be positive, got {radius}")));
                }
                radius
            }
            DomainKind::Annulus { r_inner, r_outer } => {
                if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
                    return Err(Error::InvalidDomain(format!(
                        "annulus needs 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
                    )));
                }
                r_outer
            }
        };
        Ok(DomainSpec {
            kind,
            bounding_box: BoundingBox::new(Vec2::new(-outer, -outer), Vec2::new(outer, outer)),
        })
    }
}

impl From<DomainSpec> for DomainKind {
    fn from(d: DomainSpec) -> Self {
        d.kind
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_distance_examples() {
        let disk = DomainSpec::disk(10.0).unwrap();
        assert_eq!(disk.signed_distance(Vec2::new(0.0, 0.0)), -10.0);
        assert_eq!(disk.signed_distance(Vec2::new(10.0, 0.0)), 0.0);
        let ann = DomainSpec::annulus(5.0, 20.0).unwrap();
        assert_eq!(ann.signed_distance(Vec2::new(0.0, 10.0)), -5.0);
        assert_eq!(ann.signed_distance(Vec2::new(0.0, 0.0)), 5.0);
        assert_eq!(ann.signed_distance(Vec2::new(25.0, 0.0)), 5.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DomainSpec::disk(0.0).is_err());
        assert!(DomainSpec::disk(f64::NAN).is_err());
        assert!(DomainSpec::annulus(5.0, 5.0).is_err());
        assert!(DomainSpec::annulus(0.0, 5.0).is_err());
    }

    #[test]
    fn parse_cli_syntax() {
        assert_eq!(DomainSpec::parse("disk:10").unwrap(), DomainSpec::disk(10.0).unwrap());
        assert_eq!(
            DomainSpec::parse("annulus:5,20").unwrap(),
            DomainSpec::annulus(5.0, 20.0).unwrap()
        );
        assert!(DomainSpec::parse("square:1").is_err());
        assert!(DomainSpec::parse("disk:1,2").is_err());
    }

    #[test]
    fn json_form() {
        let d = DomainSpec::annulus(7.0, 20.0).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"annulus","r_inner":7.0,"r_outer":20.0}"#);
        let back: DomainSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"disk","radius":-1}"#).is_err());
    }

    #[test]
    fn reflection_lands_across_the_circle() {
        let c = BoundaryCircle { radius: 10.0, obstacle: false };
        let r = c.reflect(Vec2::new(9.0, 0.0)).unwrap();
        assert!((r.x - 11.0).abs() < 1e-15);
        let inner = BoundaryCircle { radius: 5.0, obstacle: true };
        let r = inner.reflect(Vec2::new(0.0, 6.0)).unwrap();
        assert!((r.y - 4.0).abs() < 1e-15);
        assert!(inner.signed_distance(r) > 0.0);
    }
}
