use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gravity::{sphere_field, sphere_potential, PhysicalConstants, SphereBody};
use crate::metastate::SiteAmplitudes;

/// One of the two ball positions, `+dx` or `-dx` along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Site {
    pub fn sign(self) -> f64 {
        match self {
            Site::Plus => 1.0,
            Site::Minus => -1.0,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Site::Plus => "+",
            Site::Minus => "-",
        })
    }
}

/// How the superposed ball sources gravity for the beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceRegime {
    /// Semiclassical gravity before any measurement: the expected mass
    /// density, a Born-weighted mix of both sites.
    ScgUnmeasured,
    /// Semiclassical gravity after the distant partner was measured: the
    /// whole ball at one site.
    ScgCollapsed(Site),
    /// Decohered ball: each beam particle sees the full ball at a site drawn
    /// with the Born weights.
    NungDecohered,
}

impl fmt::Display for SourceRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceRegime::ScgUnmeasured => f.write_str("scg-unmeasured"),
            SourceRegime::ScgCollapsed(Site::Plus) => f.write_str("scg-collapsed-plus"),
            SourceRegime::ScgCollapsed(Site::Minus) => f.write_str("scg-collapsed-minus"),
            SourceRegime::NungDecohered => f.write_str("nung-decohered"),
        }
    }
}

/// A time-independent gravitational field seen by a test particle.
pub trait StaticField {
    fn acceleration(&self, position: &Vector3<f64>) -> Vector3<f64>;

    /// Potential per unit test mass.
    fn potential(&self, position: &Vector3<f64>) -> f64;

    /// Whether a particle at `position` has run into matter.
    fn absorbs(&self, _position: &Vector3<f64>) -> bool {
        false
    }
}

/// Field-free space.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeSpace;

impl StaticField for FreeSpace {
    fn acceleration(&self, _position: &Vector3<f64>) -> Vector3<f64> {
        Vector3::zeros()
    }

    fn potential(&self, _position: &Vector3<f64>) -> f64 {
        0.0
    }
}

/// Up to two copies of the ball, each carrying a fraction of the mass.
#[derive(Debug, Clone, Copy)]
pub struct SourceField {
    ball: SphereBody,
    constants: PhysicalConstants,
    parts: [(Vector3<f64>, f64); 2],
    len: usize,
}

impl SourceField {
    /// Field for one beam particle. `drawn` is the particle's site in the
    /// decohered regime and is ignored otherwise. With `mirrored` the `+`
    /// site sits at `-dx`, i.e. the whole experiment is reflected through
    /// the `x = 0` plane.
    pub fn new(
        regime: SourceRegime,
        ball: SphereBody,
        dx: f64,
        amps: &SiteAmplitudes,
        constants: PhysicalConstants,
        drawn: Option<Site>,
        mirrored: bool,
    ) -> Result<Self> {
        let parity = if mirrored { -1.0 } else { 1.0 };
        let centre = |site: Site| Vector3::new(parity * site.sign() * dx, 0.0, 0.0);
        let mut parts = [(Vector3::zeros(), 0.0); 2];
        let mut len = 0;
        let mut push = |site: Site, weight: f64| {
            if weight > 0.0 {
                parts[len] = (centre(site), weight);
                len += 1;
            }
        };
        match regime {
            SourceRegime::ScgUnmeasured => {
                push(Site::Plus, amps.weight_plus());
                push(Site::Minus, amps.weight_minus());
            }
            SourceRegime::ScgCollapsed(site) => push(site, 1.0),
            SourceRegime::NungDecohered => {
                let site = drawn.ok_or_else(|| {
                    Error::invalid("drawn", "decohered regime needs the particle's drawn site")
                })?;
                push(site, 1.0);
            }
        }
        Ok(Self {
            ball,
            constants,
            parts,
            len,
        })
    }

    fn parts(&self) -> &[(Vector3<f64>, f64)] {
        &self.parts[..self.len]
    }
}

impl StaticField for SourceField {
    fn acceleration(&self, position: &Vector3<f64>) -> Vector3<f64> {
        self.parts().iter().fold(Vector3::zeros(), |acc, (c, w)| {
            acc + sphere_field(&self.ball, &(position - c), &self.constants) * *w
        })
    }

    fn potential(&self, position: &Vector3<f64>) -> f64 {
        self.parts()
            .iter()
            .map(|(c, w)| w * sphere_potential(&self.ball, &(position - c), &self.constants))
            .sum()
    }

    fn absorbs(&self, position: &Vector3<f64>) -> bool {
        let r2 = self.ball.radius() * self.ball.radius();
        self.parts().iter().any(|(c, _)| (position - c).norm_squared() < r2)
    }
}

/// Acceleration at `position` under `regime`, ball sites at `(+-dx, 0, 0)`.
pub fn source_field(
    regime: SourceRegime,
    ball: &SphereBody,
    dx: f64,
    amps: &SiteAmplitudes,
    position: &Vector3<f64>,
    k: &PhysicalConstants,
    drawn: Option<Site>,
) -> Result<Vector3<f64>> {
    Ok(SourceField::new(regime, *ball, dx, amps, *k, drawn, false)?.acceleration(position))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SphereBody, PhysicalConstants) {
        (SphereBody::lead_ball(), PhysicalConstants::codata())
    }

    #[test]
    fn unmeasured_symmetric_has_no_x_force_on_axis() {
        let (ball, k) = setup();
        let amps = SiteAmplitudes::equal();
        for z in [-0.5, -0.01, 0.0, 0.3, 2.0] {
            let f = source_field(SourceRegime::ScgUnmeasured, &ball, 1.0, &amps, &Vector3::new(0.0, 0.0, z), &k, None).unwrap();
            assert_eq!(f.x, 0.0);
        }
    }

    #[test]
    fn collapsed_equals_single_ball() {
        let (ball, k) = setup();
        let amps = SiteAmplitudes::from_weight(0.2, 0.0).unwrap();
        let p = Vector3::new(0.3, -0.1, 0.4);
        let f = source_field(SourceRegime::ScgCollapsed(Site::Plus), &ball, 1.0, &amps, &p, &k, None).unwrap();
        let single = sphere_field(&ball, &(p - Vector3::new(1.0, 0.0, 0.0)), &k);
        assert_eq!(f, single);
    }

    #[test]
    fn decohered_requires_drawn_site() {
        let (ball, k) = setup();
        let amps = SiteAmplitudes::equal();
        let p = Vector3::new(0.0, 0.0, 0.0);
        assert!(source_field(SourceRegime::NungDecohered, &ball, 1.0, &amps, &p, &k, None).is_err());
        let f = source_field(SourceRegime::NungDecohered, &ball, 1.0, &amps, &p, &k, Some(Site::Minus)).unwrap();
        assert!(f.x < 0.0);
    }

    #[test]
    fn absorbs_only_where_mass_is() {
        let (ball, k) = setup();
        let amps = SiteAmplitudes::equal();
        let f = SourceField::new(SourceRegime::ScgCollapsed(Site::Plus), ball, 1.0, &amps, k, None, false).unwrap();
        assert!(f.absorbs(&Vector3::new(1.05, 0.0, 0.0)));
        assert!(!f.absorbs(&Vector3::new(-1.05, 0.0, 0.0)));
        let mirrored = SourceField::new(SourceRegime::ScgCollapsed(Site::Plus), ball, 1.0, &amps, k, None, true).unwrap();
        assert!(mirrored.absorbs(&Vector3::new(-1.05, 0.0, 0.0)));
    }
}
