use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Kind;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Material constants on one cell.
///
/// `eps` and `mu` act on in-plane vectors. The scalar curl is weighted by
/// the out-of-plane values `eps_z` and `mu_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub eps: Matrix2<f64>,
    pub mu: Matrix2<f64>,
    pub sigma: f64,
    pub eps_z: f64,
    pub mu_z: f64,
}

impl Material {
    pub fn new(eps: Matrix2<f64>, mu: Matrix2<f64>, sigma: f64) -> Self {
        Self { eps, mu, sigma, eps_z: eps.trace() / 2.0, mu_z: mu.trace() / 2.0 }
    }

    pub fn isotropic(eps: f64, mu: f64, sigma: f64) -> Self {
        Self::new(Matrix2::identity() * eps, Matrix2::identity() * mu, sigma)
    }

    pub fn vacuum() -> Self {
        Self::isotropic(1.0, 1.0, 1.0)
    }
}

/// Per-cell materials and the global angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    materials: Vec<Material>,
    omega: f64,
}

fn is_spd(m: &Matrix2<f64>) -> bool {
    let sym = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * m.amax().max(1.0);
    sym && m[(0, 0)] > 0.0 && m.determinant() > 0.0 && m.iter().all(|v| v.is_finite())
}

impl CoefficientField {
    pub fn new(materials: Vec<Material>, omega: f64) -> Result<Self> {
        let field = Self { materials, omega };
        field.validate()?;
        Ok(field)
    }

    pub fn uniform(num_cells: usize, material: Material, omega: f64) -> Result<Self> {
        Self::new(vec![material; num_cells], omega)
    }

    pub fn from_fn<F: Fn(usize) -> Material>(mesh: &Mesh, f: F, omega: f64) -> Result<Self> {
        Self::new((0..mesh.num_cells()).map(f).collect(), omega)
    }

    /// Symmetry and positive definiteness of `eps`, `mu`, positive `eps_z`,
    /// `mu_z` and `omega`. The sign of `sigma` is checked at assembly.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidCoefficients(format!("omega must be positive, got {}", self.omega)));
        }
        for (c, m) in self.materials.iter().enumerate() {
            if !is_spd(&m.eps) {
                return Err(Error::InvalidCoefficients(format!("eps on cell {c} is not SPD")));
            }
            if !is_spd(&m.mu) {
                return Err(Error::InvalidCoefficients(format!("mu on cell {c} is not SPD")));
            }
            if !(m.eps_z > 0.0 && m.mu_z > 0.0) {
                return Err(Error::InvalidCoefficients(format!(
                    "eps_z and mu_z must be positive on cell {c}"
                )));
            }
            if !m.sigma.is_finite() {
                return Err(Error::InvalidCoefficients(format!("sigma on cell {c} is not finite")));
            }
        }
        Ok(())
    }

    /// Errors unless `sigma > 0` on every cell.
    pub fn check_coercivity(&self) -> Result<()> {
        if let Some((c, m)) = self.materials.iter().enumerate().find(|(_, m)| !(m.sigma > 0.0)) {
            return Err(Error::CoercivityPrecondition(format!(
                "sigma = {} on cell {c}; a strictly positive conductivity is required",
                m.sigma
            )));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.materials.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn material(&self, cell: usize) -> &Material {
        &self.materials[cell]
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    /// `min_T sigma`.
    pub fn sigma0(&self) -> f64 {
        self.materials.iter().map(|m| m.sigma).fold(f64::INFINITY, f64::min)
    }

    pub fn is_uniform(&self) -> bool {
        self.materials.windows(2).all(|w| w[0] == w[1])
    }

    /// `eps` for the electric problem, `mu` for the magnetic one.
    pub fn flux(&self, kind: Kind, cell: usize) -> Matrix2<f64> {
        match kind {
            Kind::Electric => self.materials[cell].eps,
            Kind::Magnetic => self.materials[cell].mu,
        }
    }

    /// Weight of the curl-curl term: `1 / mu_z` or `1 / (i omega eps_z + sigma)`.
    pub fn curl_weight(&self, kind: Kind, cell: usize) -> Complex64 {
        let m = &self.materials[cell];
        match kind {
            Kind::Electric => Complex64::new(1.0 / m.mu_z, 0.0),
            Kind::Magnetic => Complex64::new(m.sigma, self.omega * m.eps_z).inv(),
        }
    }

    /// Zeroth-order term as `alpha I + beta M`: `i omega sigma I - omega^2 eps`
    /// or `i omega mu`.
    pub fn mass_terms(&self, kind: Kind, cell: usize) -> (Complex64, Complex64, Matrix2<f64>) {
        let m = &self.materials[cell];
        let w = self.omega;
        match kind {
            Kind::Electric => (Complex64::new(0.0, w * m.sigma), Complex64::new(-w * w, 0.0), m.eps),
            Kind::Magnetic => (Complex64::new(0.0, 0.0), Complex64::new(0.0, w), m.mu),
        }
    }

    /// Reads a coefficient file: a JSON object whose keys are `"default"`,
    /// a cell id `"7"`, or an inclusive range `"0-15"`, each mapping to
    /// `{eps, mu, sigma}` with optional `eps_z`, `mu_z`.
    pub fn from_json_str(text: &str, num_cells: usize, omega: f64) -> Result<Self> {
        let entries: BTreeMap<String, MaterialSpec> = serde_json::from_str(text)?;
        let mut cells: Vec<Option<Material>> = vec![None; num_cells];
        if let Some(d) = entries.get("default") {
            let m = d.to_material()?;
            cells.iter_mut().for_each(|c| *c = Some(m));
        }
        let mut claimed = vec![false; num_cells];
        for (key, spec) in entries.iter().filter(|(k, _)| k.as_str() != "default") {
            let (lo, hi) = parse_range(key)?;
            if hi >= num_cells {
                return Err(Error::InvalidCoefficients(format!(
                    "range `{key}` exceeds the {num_cells} cells of the mesh"
                )));
            }
            let m = spec.to_material()?;
            for c in lo..=hi {
                if claimed[c] {
                    return Err(Error::InvalidCoefficients(format!("cell {c} listed in two ranges")));
                }
                claimed[c] = true;
                cells[c] = Some(m);
            }
        }
        let materials = cells
            .into_iter()
            .enumerate()
            .map(|(c, m)| {
                m.ok_or_else(|| Error::InvalidCoefficients(format!("no material for cell {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(materials, omega)
    }

    pub fn load_json(path: &Path, num_cells: usize, omega: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, num_cells, omega)
    }
}

fn parse_range(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidCoefficients(format!("bad cell range `{key}`"));
    let (lo, hi) = match key.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let c = key.trim().parse().map_err(|_| bad())?;
            (c, c)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub eps: [[f64; 2]; 2],
    pub mu: [[f64; 2]; 2],
    pub sigma: f64,
    #[serde(default)]
    pub eps_z: Option<f64>,
    #[serde(default)]
    pub mu_z: Option<f64>,
}

impl MaterialSpec {
    pub fn to_material(&self) -> Result<Material> {
        let m = |a: [[f64; 2]; 2]| Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
        let mut out = Material::new(m(self.eps), m(self.mu), self.sigma);
        if let Some(e) = self.eps_z {
            out.eps_z = e;
        }
        if let Some(u) = self.mu_z {
            out.mu_z = u;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnetic_curl_weight() {
        let f = CoefficientField::uniform(1, Material::vacuum(), 1.0).unwrap();
        let w = f.curl_weight(Kind::Magnetic, 0);
        assert!((w - Complex64::new(0.5, -0.5)).norm() < 1e-15);
        assert_eq!(f.curl_weight(Kind::Electric, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_non_spd() {
        let bad = Material::new(Matrix2::new(1.0, 2.0, 2.0, 1.0), Matrix2::identity(), 1.0);
        assert!(matches!(CoefficientField::uniform(2, bad, 1.0), Err(Error::InvalidCoefficients(_))));
        let skew = Material::new(Matrix2::new(1.0, 0.5, -0.5, 1.0), Matrix2::identity(), 1.0);
        assert!(CoefficientField::uniform(2, skew, 1.0).is_err());
        assert!(CoefficientField::uniform(2, Material::vacuum(), 0.0).is_err());
    }

    #[test]
    fn zero_sigma_loads_but_fails_coercivity() {
        let f = CoefficientField::uniform(2, Material::isotropic(1.0, 1.0, 0.0), 1.0).unwrap();
        assert!(matches!(f.check_coercivity(), Err(Error::CoercivityPrecondition(_))));
    }

    #[test]
    fn json_ranges() {
        let text = r#"{
            "default": {"eps": [[1,0],[0,1]], "mu": [[1,0],[0,1]], "sigma": 1},
            "2-3": {"eps": [[4,0],[0,4]], "mu": [[1,0],[0,1]], "sigma": 2, "mu_z": 3},
            "5": {"eps": [[2,0.5],[0.5,1]], "mu": [[1,0],[0,1]], "sigma": 1}
        }"#;
        let f = CoefficientField::from_json_str(text, 6, 2.0).unwrap();
        assert_eq!(f.material(0).sigma, 1.0);
        assert_eq!(f.material(3).eps[(0, 0)], 4.0);
        assert_eq!(f.material(3).mu_z, 3.0);
        assert_eq!(f.material(5).eps[(0, 1)], 0.5);
        assert_eq!(f.sigma0(), 1.0);
        assert!(!f.is_uniform());
    }

    #[test]
    fn json_errors() {
        let one = r#"{"eps": [[1,0],[0,1]], "mu": [[1,0],[0,1]], "sigma": 1}"#;
        assert!(CoefficientField::from_json_str(&format!(r#"{{"0-1": {one}}}"#), 3, 1.0).is_err());
        assert!(CoefficientField::from_json_str(&format!(r#"{{"0-4": {one}}}"#), 3, 1.0).is_err());
        assert!(CoefficientField::from_json_str(&format!(r#"{{"0-2": {one}, "1": {one}}}"#), 3, 1.0).is_err());
        assert!(CoefficientField::from_json_str(&format!(r#"{{"x": {one}}}"#), 3, 1.0).is_err());
    }
}
