//! Study area and zone polygons.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_contains, convex_penetration, signed_area, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub name: String,
    /// Convex polygon vertices `[x, y]` in metres, either winding.
    pub polygon: Vec<[f64; 2]>,
}

/// Ordered zones inside a study area. The first two zones get indicator
/// covariates; any later zone is the reference category.
///
/// ```toml
/// study_area = [[0, -20], [300, -20], [300, 20], [0, 20]]
///
/// [[zones]]
/// name = "Zone 1"
/// polygon = [[0, -20], [100, -20], [100, 20], [0, 20]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMap {
    pub study_area: Vec<[f64; 2]>,
    #[serde(default)]
    pub zones: Vec<Zone>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZoneLabel {
    /// One-based position in the zone list.
    Zone(usize),
    /// Inside the study area but in no zone.
    Unzoned,
    Outside,
}

fn points(poly: &[[f64; 2]]) -> Vec<Vec2> {
    poly.iter().map(|&[x, y]| Vec2::new(x, y)).collect()
}

fn is_convex(poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut sign = 0.0_f64;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let turn = (b - a).cross(c - b);
        if turn.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = turn.signum();
        } else if turn.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

impl ZoneMap {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let map: ZoneMap = toml::from_str(s)?;
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn study_polygon(&self) -> Vec<Vec2> {
        points(&self.study_area)
    }

    pub fn zone_polygon(&self, index: usize) -> Vec<Vec2> {
        points(&self.zones[index].polygon)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, poly: &[Vec2]| {
            let finite = poly.iter().all(|p| p.x.is_finite() && p.y.is_finite());
            if poly.len() < 3 || !finite || signed_area(poly).abs() < 1e-12 || !is_convex(poly) {
                return Err(Error::InvalidZones(format!(
                    "{name} is not a convex polygon"
                )));
            }
            Ok(())
        };
        let study = self.study_polygon();
        check("study area", &study)?;
        let zones: Vec<Vec<Vec2>> = (0..self.zones.len())
            .map(|i| self.zone_polygon(i))
            .collect();
        for (zone, poly) in self.zones.iter().zip(&zones) {
            check(&zone.name, poly)?;
            if !poly.iter().all(|&p| convex_contains(&study, p)) {
                return Err(Error::InvalidZones(format!(
                    "{} extends beyond the study area",
                    zone.name
                )));
            }
        }
        for i in 0..zones.len() {
            for j in i + 1..zones.len() {
                if convex_penetration(&zones[i], &zones[j]) > 1e-9 {
                    return Err(Error::InvalidZones(format!(
                        "{} and {} overlap",
                        self.zones[i].name, self.zones[j].name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Zone containing `point`. Boundaries belong to the polygon; on a shared edge the
/// earlier zone wins.
pub fn assign_zone(point: Vec2, zones: &ZoneMap) -> ZoneLabel {
    if !convex_contains(&zones.study_polygon(), point) {
        return ZoneLabel::Outside;
    }
    (0..zones.zones.len())
        .find(|&i| convex_contains(&zones.zone_polygon(i), point))
        .map_or(ZoneLabel::Unzoned, |i| ZoneLabel::Zone(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAP: &str = r#"
study_area = [[0, -10], [30, -10], [30, 10], [0, 10]]

[[zones]]
name = "Zone 1"
polygon = [[0, -10], [10, -10], [10, 10], [0, 10]]

[[zones]]
name = "Zone 2"
polygon = [[10, -10], [20, -10], [20, 10], [10, 10]]

[[zones]]
name = "Zone 3"
polygon = [[20, -10], [30, -10], [30, 10], [20, 10]]
"#;

    #[test]
    fn labels() {
        let map = ZoneMap::from_toml_str(MAP).unwrap();
        assert_eq!(assign_zone(Vec2::new(5.0, 0.0), &map), ZoneLabel::Zone(1));
        assert_eq!(assign_zone(Vec2::new(25.0, 3.0), &map), ZoneLabel::Zone(3));
        assert_eq!(assign_zone(Vec2::new(45.0, 0.0), &map), ZoneLabel::Outside);
        assert_eq!(assign_zone(Vec2::new(10.0, 0.0), &map), ZoneLabel::Zone(1));
        assert_eq!(
            assign_zone(Vec2::new(20.0, -10.0), &map),
            ZoneLabel::Zone(2)
        );
    }

    #[test]
    fn rejects_overlapping_and_outside_zones() {
        let overlapping = MAP
            .replace("[[10, -10], [20, -10]", "[[5, -10], [20, -10]")
            .replace("[20, 10], [10, 10]]", "[20, 10], [5, 10]]");
        assert!(matches!(
            ZoneMap::from_toml_str(&overlapping),
            Err(Error::InvalidZones(_))
        ));
        let outside = MAP.replace(
            "[30, -10], [30, 10], [20, 10]",
            "[40, -10], [40, 10], [20, 10]",
        );
        assert!(matches!(
            ZoneMap::from_toml_str(&outside),
            Err(Error::InvalidZones(_))
        ));
    }

    #[test]
    fn rejects_non_convex() {
        let bad = "study_area = [[0, 0], [10, 0], [5, 2], [10, 10], [0, 10]]";
        assert!(matches!(
            ZoneMap::from_toml_str(bad),
            Err(Error::InvalidZones(_))
        ));
    }
}
