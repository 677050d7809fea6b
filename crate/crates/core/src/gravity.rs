//! Newtonian gravity of homogeneous balls.
//!
//! Everything here is a pure function of its arguments. Physical constants
//! are passed in explicitly so that rescaled ("gedanken") unit systems can be
//! used side by side with SI values.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 Newtonian constant of gravitation, m^3 kg^-1 s^-2.
pub const CODATA_G: f64 = 6.674_30e-11;
/// CODATA 2018 reduced Planck constant, J s.
pub const CODATA_HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m s^-1.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Gravitational constant.
    pub g: f64,
    /// Reduced Planck constant; all phases evolve as `E t / hbar`.
    pub hbar: f64,
    pub c: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

impl PhysicalConstants {
    pub const fn codata() -> Self {
        Self {
            g: CODATA_G,
            hbar: CODATA_HBAR,
            c: SPEED_OF_LIGHT,
        }
    }

    /// Validated constructor. `g = 0` is accepted as the no-gravity limit;
    /// `hbar` and `c` must be strictly positive.
    pub fn new(g: f64, hbar: f64, c: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::invalid("g", format!("must be finite and >= 0, got {g}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid("hbar", format!("must be finite and > 0, got {hbar}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("c", format!("must be finite and > 0, got {c}")));
        }
        Ok(Self { g, hbar, c })
    }

    /// Same constants with `G` multiplied by `factor`.
    pub fn with_g_scale(self, factor: f64) -> Result<Self> {
        Self::new(self.g * factor, self.hbar, self.c)
    }
}

/// Homogeneous ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereBody {
    mass: f64,
    radius: f64,
}

impl SphereBody {
    /// Massless balls are allowed so that the `M -> 0` limit can be taken
    /// exactly; the radius must be positive.
    pub fn new(mass: f64, radius: f64) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::invalid("mass", format!("must be finite and >= 0, got {mass}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("radius", format!("must be finite and > 0, got {radius}")));
        }
        Ok(Self { mass, radius })
    }

    /// 45 kg lead ball of radius 10 cm.
    pub fn lead_ball() -> Self {
        Self {
            mass: 45.0,
            radius: 0.1,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `G M^2 / R`, the natural energy scale of the ball.
    pub fn self_energy_scale(&self, k: &PhysicalConstants) -> f64 {
        k.g * self.mass * self.mass / self.radius
    }
}

/// Gravitational acceleration at displacement `r` from the centre of `body`.
pub fn sphere_field(body: &SphereBody, r: &Vector3<f64>, k: &PhysicalConstants) -> Vector3<f64> {
    let d2 = r.norm_squared();
    let radius = body.radius;
    let gm = k.g * body.mass;
    if d2 >= radius * radius {
        let d = d2.sqrt();
        r * (-gm / (d2 * d))
    } else {
        r * (-gm / (radius * radius * radius))
    }
}

/// Gravitational potential (per unit test mass) at displacement `r`.
pub fn sphere_potential(body: &SphereBody, r: &Vector3<f64>, k: &PhysicalConstants) -> f64 {
    let d = r.norm();
    let radius = body.radius;
    let gm = k.g * body.mass;
    if d >= radius {
        -gm / d
    } else {
        -gm * (3.0 * radius * radius - d * d) / (2.0 * radius.powi(3))
    }
}

fn check_separation(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::invalid("separation", format!("must be finite and >= 0, got {s}")));
    }
    Ok(())
}

/// Mutual gravitational energy of two copies of `body` whose centres are `s`
/// apart.
///
/// Beyond contact (`s >= 2R`) this is the point-mass value `-G M^2 / s`. For
/// overlapping balls, with `x = s / R`,
///
/// ```text
/// U(s) = -(G M^2 / R) (6/5 - x^2/2 + 3 x^3/16 - x^5/160)
/// ```
///
/// which is C^1 at contact and equals `-(6/5) G M^2 / R` at coincidence.
pub fn mutual_potential(body: &SphereBody, s: f64, k: &PhysicalConstants) -> Result<f64> {
    check_separation(s)?;
    let scale = body.self_energy_scale(k);
    let x = s / body.radius;
    if x >= 2.0 {
        return Ok(-scale / x);
    }
    let x2 = x * x;
    let x3 = x2 * x;
    Ok(-scale * (1.2 - 0.5 * x2 + 0.1875 * x3 - x3 * x2 / 160.0))
}

/// First derivative `dU/ds` of [`mutual_potential`].
pub fn mutual_force(body: &SphereBody, s: f64, k: &PhysicalConstants) -> Result<f64> {
    check_separation(s)?;
    let scale = body.self_energy_scale(k) / body.radius;
    let x = s / body.radius;
    if x >= 2.0 {
        return Ok(scale / (x * x));
    }
    let x2 = x * x;
    Ok(scale * (x - 0.5625 * x2 + x2 * x2 / 32.0))
}

/// Second derivative `d^2U/ds^2` of [`mutual_potential`].
pub fn mutual_stiffness(body: &SphereBody, s: f64, k: &PhysicalConstants) -> Result<f64> {
    check_separation(s)?;
    let scale = body.self_energy_scale(k) / (body.radius * body.radius);
    let x = s / body.radius;
    if x >= 2.0 {
        return Ok(-2.0 * scale / (x * x * x));
    }
    Ok(scale * (1.0 - 1.125 * x + 0.125 * x * x * x))
}

/// Angular frequency of small relative oscillations of the ball about its
/// coincident copy: `sqrt(U''(0) / mu)` with reduced mass `mu = M / 2`,
/// i.e. `sqrt(2 G M / R^3)`.
pub fn zero_point_frequency(body: &SphereBody, k: &PhysicalConstants) -> f64 {
    if body.mass == 0.0 {
        return 0.0;
    }
    let stiffness = body.self_energy_scale(k) / (body.radius * body.radius);
    (stiffness / (0.5 * body.mass)).sqrt()
}

/// Phase frequencies of the aligned and anti-aligned ball/copy configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    /// Copies superimposed.
    pub omega0: f64,
    /// Copies at opposite sites, `2 dx` apart.
    pub omega1: f64,
    /// `omega0 - omega1`.
    pub omega_beat: f64,
    /// Half-separation of the two sites.
    pub dx: f64,
}

impl FrequencySet {
    /// Frequency set with arbitrary values, for experiments in which the beat
    /// frequency is prescribed directly.
    pub fn from_parts(omega0: f64, omega1: f64, dx: f64) -> Self {
        Self {
            omega0,
            omega1,
            omega_beat: omega0 - omega1,
            dx,
        }
    }

    pub fn beat_period(&self) -> f64 {
        2.0 * PI / self.omega_beat.abs()
    }
}

/// Each configuration's phase rotates at half its mutual energy over `hbar`.
pub fn frequency_set(body: &SphereBody, dx: f64, k: &PhysicalConstants) -> Result<FrequencySet> {
    if !dx.is_finite() {
        return Err(Error::invalid("dx", "must be finite"));
    }
    if dx < body.radius {
        return Err(Error::OverlappingSites {
            dx,
            radius: body.radius,
        });
    }
    let omega0 = mutual_potential(body, 0.0, k)? / (2.0 * k.hbar);
    let omega1 = mutual_potential(body, 2.0 * dx, k)? / (2.0 * k.hbar);
    Ok(FrequencySet::from_parts(omega0, omega1, dx))
}

/// Number of beat cycles a particle of speed `v` sees over a path of length
/// `path_length`. Requires `v > 0` and `path_length >= 0`.
pub fn cycles_along_path(omega_beat: f64, v: f64, path_length: f64) -> f64 {
    debug_assert!(v > 0.0 && path_length >= 0.0);
    omega_beat.abs() * (path_length / v) / (2.0 * PI)
}
