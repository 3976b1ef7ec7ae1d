//! Groups of plane maps, compared with the identity on a sample grid.

use super::{GroupError, GroupModel, Result};
use crate::geom::{BoxRegion, Point};
use crate::lipcalc::CertifiedMap;

/// Plane maps under composition. An element counts as the identity when its
/// displacement stays below `tol` on a `grid x grid` sample of `region`.
#[derive(Clone, Debug)]
pub struct MapModel {
    pub region: BoxRegion,
    pub grid: usize,
    pub tol: f64,
    pub eval_tol: f64,
}

impl MapModel {
    pub fn new(region: BoxRegion, grid: usize, tol: f64) -> Self {
        Self { region, grid: grid.max(2), tol, eval_tol: tol * 1e-3 }
    }

    fn samples(&self) -> impl Iterator<Item = Point> + '_ {
        let n = self.grid;
        let (w, h) = (self.region.width(), self.region.height());
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                Point::new(
                    self.region.min.x + w * i as f64 / (n - 1) as f64,
                    self.region.min.y + h * j as f64 / (n - 1) as f64,
                )
            })
        })
    }

    /// Largest sampled displacement `|f(x) - x|`.
    pub fn sup_displacement(&self, f: &CertifiedMap) -> Result<f64> {
        let mut m = 0.0f64;
        for x in self.samples() {
            let d = f.displacement(x, self.eval_tol).map_err(|e| GroupError::Model(e.to_string()))?;
            m = m.max(d.norm());
        }
        Ok(m)
    }
}

impl GroupModel for MapModel {
    type Elem = CertifiedMap;

    fn identity(&self) -> CertifiedMap {
        CertifiedMap::identity()
    }

    fn mul(&self, a: &CertifiedMap, b: &CertifiedMap) -> Result<CertifiedMap> {
        a.compose(b).map_err(|e| GroupError::Model(e.to_string()))
    }

    fn inv(&self, a: &CertifiedMap) -> Result<CertifiedMap> {
        a.inverse().map_err(|e| GroupError::Model(e.to_string()))
    }

    fn is_identity(&self, a: &CertifiedMap) -> Result<bool> {
        Ok(self.sup_displacement(a)? <= self.tol)
    }

    fn exact(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{nilpotency_class, ClassResult, DEFAULT_SIZE_CAP};
    use crate::lipcalc::{rotation_map, translation_map};

    #[test]
    fn commuting_rotations_are_abelian() {
        let m = MapModel::new(BoxRegion::centered(2.0), 9, 1e-8);
        let gens = vec![rotation_map(0.05), rotation_map(-0.08)];
        let r = nilpotency_class(&m, &gens, 3, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(r.result, ClassResult::Class(1));
        assert!(r.approximate);
    }

    #[test]
    fn translations_and_identity() {
        let m = MapModel::new(BoxRegion::centered(1.0), 5, 1e-9);
        assert!(m.is_identity(&CertifiedMap::identity()).unwrap());
        assert!(!m.is_identity(&translation_map(Point::new(0.1, 0.0))).unwrap());
    }
}
