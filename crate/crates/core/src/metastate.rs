//! Ball + hidden-copy metastate.
//!
//! The metasystem lives in the product of two two-site spaces, ordered
//! `{|+>_p|+>_h, |+>_p|->_h, |->_p|+>_h, |->_p|->_h}`. Configurations with the
//! ball and its copy at the same site rotate at `omega0`, the others at
//! `omega1`. Tracing out the copy leaves a 2x2 physical state whose coherence
//! oscillates at the beat frequency.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen, Vector4};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::gravity::FrequencySet;

pub type C64 = Complex<f64>;

const NORM_TOL: f64 = 1e-12;

/// Amplitudes of the ball on the `+dx` and `-dx` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteAmplitudes {
    alpha: C64,
    beta: C64,
}

impl SiteAmplitudes {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { alpha, beta })
    }

    /// `(|+dx> + |-dx>) / sqrt(2)`.
    pub fn equal() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: a, beta: a }
    }

    /// Amplitudes with Born weight `p_plus` on `+dx` and relative phase
    /// `phase` on `-dx`.
    pub fn from_weight(p_plus: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(Error::invalid("p_plus", format!("must lie in [0, 1], got {p_plus}")));
        }
        if !phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        Ok(Self {
            alpha: C64::new(p_plus.sqrt(), 0.0),
            beta: C64::from_polar((1.0 - p_plus).sqrt(), phase),
        })
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn weight_plus(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn weight_minus(&self) -> f64 {
        self.beta.norm_sqr()
    }
}

fn serialize_rows<S, const N: usize>(rows: [[C64; N]; N], serializer: S) -> std::result::Result<S::Ok, S::Error>
where
    S: Serializer,
{
    let mut seq = serializer.serialize_seq(Some(N))?;
    for row in rows.iter() {
        let pairs: Vec<[f64; 2]> = row.iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&pairs)?;
    }
    seq.end()
}

/// 4x4 density operator of the ball + copy metasystem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaDensityMatrix(Matrix4<C64>);

impl MetaDensityMatrix {
    /// Wraps `m` after checking Hermiticity, unit trace and positivity.
    pub fn from_matrix(m: Matrix4<C64>) -> Result<Self> {
        let rho = Self(m);
        rho.validate(1e-12, 1e-10)?;
        Ok(rho)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).camax()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn validate(&self, tol: f64, psd_tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::invalid("rho", format!("not Hermitian (max deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::invalid("rho", format!("trace {tr} != 1")));
        }
        let min = self.eigenvalues()[0];
        if min < -psd_tol {
            return Err(Error::invalid("rho", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

impl Serialize for MetaDensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: [[C64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| self.0[(i, j)]));
        serialize_rows(rows, serializer)
    }
}

/// 2x2 density operator of the ball alone, basis `{|+dx>, |-dx>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalDensityMatrix(Matrix2<C64>);

impl PhysicalDensityMatrix {
    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).camax()
    }

    /// Off-diagonal element `<+dx|rho|-dx>`.
    pub fn coherence(&self) -> C64 {
        self.0[(0, 1)]
    }

    /// Eigenvalues `(t -+ sqrt((a - d)^2 + 4 |b|^2)) / 2`, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = self.0[(0, 1)];
        let root = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
        [(a + d - root) / 2.0, (a + d + root) / 2.0]
    }
}

impl Serialize for PhysicalDensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: [[C64; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| self.0[(i, j)]));
        serialize_rows(rows, serializer)
    }
}

/// Pure metastate `|psi>_m <psi|_m` with the copy in the same superposition
/// as the ball.
pub fn build_metastate(amps: &SiteAmplitudes) -> MetaDensityMatrix {
    let (a, b) = (amps.alpha, amps.beta);
    let psi = Vector4::new(a * a, a * b, b * a, b * b);
    MetaDensityMatrix(psi * psi.adjoint())
}

/// Index of a basis state's phase class: 0 for aligned (omega0), 1 for
/// anti-aligned (omega1).
const PHASE_CLASS: [usize; 4] = [0, 1, 1, 0];

/// `U(t) rho U(t)^dagger` with `U = diag(e^{-i w0 t}, e^{-i w1 t}, e^{-i w1 t}, e^{-i w0 t})`.
///
/// Entries coupling different classes pick up `e^{-+i (w0 - w1) t}`; the
/// beat frequency is used directly so that large absolute phases never
/// cancel against each other.
pub fn evolve_metastate(rho: &MetaDensityMatrix, t: f64, f: &FrequencySet) -> MetaDensityMatrix {
    let forward = C64::from_polar(1.0, -f.omega_beat * t);
    let backward = forward.conj();
    let m = Matrix4::from_fn(|i, j| match (PHASE_CLASS[i], PHASE_CLASS[j]) {
        (0, 1) => rho.0[(i, j)] * forward,
        (1, 0) => rho.0[(i, j)] * backward,
        _ => rho.0[(i, j)],
    });
    MetaDensityMatrix(m)
}

/// `(rho_p)_{ij} = sum_h <i,h| rho_m |j,h>`.
pub fn partial_trace_hidden(rho: &MetaDensityMatrix) -> PhysicalDensityMatrix {
    let m = &rho.0;
    PhysicalDensityMatrix(Matrix2::from_fn(|i, j| {
        m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]
    }))
}

pub fn coherence_magnitude(rho: &PhysicalDensityMatrix) -> f64 {
    rho.coherence().norm()
}

/// Physical state at time `t` for a ball prepared in `amps`.
pub fn physical_state_at(amps: &SiteAmplitudes, f: &FrequencySet, t: f64) -> PhysicalDensityMatrix {
    partial_trace_hidden(&evolve_metastate(&build_metastate(amps), t, f))
}

/// Time average of the physical state over `[0, transit_time]`.
///
/// The coherence of the traced state is
/// `alpha beta* (|alpha|^2 e^{-i W t} + |beta|^2 e^{i W t})`, whose mean is
/// `alpha beta* (sin(W T) - i (|alpha|^2 - |beta|^2)(1 - cos(W T))) / (W T)`.
/// For equal weights this is the familiar `sin(W T) / (W T)` factor. The
/// phase is reduced modulo a full turn before the trigonometry, so an
/// integral number of beat cycles gives exactly zero coherence.
pub fn transit_averaged_state(
    amps: &SiteAmplitudes,
    f: &FrequencySet,
    transit_time: f64,
) -> Result<PhysicalDensityMatrix> {
    if !(transit_time.is_finite() && transit_time > 0.0) {
        return Err(Error::invalid(
            "transit_time",
            format!("must be finite and > 0, got {transit_time}"),
        ));
    }
    let rho0 = partial_trace_hidden(&build_metastate(amps));
    let phase = f.omega_beat * transit_time;
    if phase == 0.0 {
        return Ok(rho0);
    }
    let (sin, one_minus_cos) = reduced_sin_versine(phase);
    let imbalance = amps.weight_plus() - amps.weight_minus();
    let factor = C64::new(sin, -imbalance * one_minus_cos) / phase;
    let off = amps.alpha * amps.beta.conj() * factor;
    let mut m = *rho0.matrix();
    m[(0, 1)] = off;
    m[(1, 0)] = off.conj();
    Ok(PhysicalDensityMatrix(m))
}

/// `(sin x, 1 - cos x)` with `x` first reduced to the nearest full turn.
/// A remainder within the rounding error of `x` itself counts as a whole turn.
fn reduced_sin_versine(x: f64) -> (f64, f64) {
    let turns = x / (2.0 * PI);
    let mut frac = turns - turns.round();
    if frac.abs() <= 8.0 * f64::EPSILON * turns.abs() {
        frac = 0.0;
    }
    let theta = 2.0 * PI * frac;
    let half = (0.5 * theta).sin();
    (theta.sin(), 2.0 * half * half)
}
