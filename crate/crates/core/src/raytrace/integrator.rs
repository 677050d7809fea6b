//! Fixed-step RK4 for a classical test particle in a static field.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::source::StaticField;
use crate::error::{Error, Result};

/// Fewest steps accepted for one transit of the beam.
pub const MIN_STEPS_PER_TRANSIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Number of equal RK4 steps spanning the integration time.
    pub steps: usize,
    /// Keep every n-th state in [`Trajectory::samples`]; `None` keeps only
    /// the endpoints.
    pub record_every: Option<usize>,
}

impl StepControl {
    pub fn new(steps: usize) -> Result<Self> {
        if steps < MIN_STEPS_PER_TRANSIT {
            return Err(Error::TooFewSteps {
                steps,
                min: MIN_STEPS_PER_TRANSIT,
            });
        }
        Ok(Self {
            steps,
            record_every: None,
        })
    }

    pub fn recording(mut self, every: usize) -> Self {
        self.record_every = Some(every.max(1));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl PhaseState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self {
            t: 0.0,
            position,
            velocity,
        }
    }
}

/// Interpolated passage through the detector plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub last: PhaseState,
    /// First upward passage through the detector plane, if any.
    pub crossing: Option<Crossing>,
    /// The particle ran into matter; integration stopped there.
    pub absorbed: bool,
    /// Largest `|E(t) - E(0)| / |E(0)|` of the specific energy.
    pub max_energy_drift: f64,
}

fn specific_energy<F: StaticField>(field: &F, s: &PhaseState) -> f64 {
    0.5 * s.velocity.norm_squared() + field.potential(&s.position)
}

fn rk4_step<F: StaticField>(field: &F, s: &PhaseState, dt: f64) -> PhaseState {
    let (x, v) = (s.position, s.velocity);
    let a1 = field.acceleration(&x);
    let x2 = x + v * (0.5 * dt);
    let v2 = v + a1 * (0.5 * dt);
    let a2 = field.acceleration(&x2);
    let x3 = x + v2 * (0.5 * dt);
    let v3 = v + a2 * (0.5 * dt);
    let a3 = field.acceleration(&x3);
    let x4 = x + v3 * dt;
    let v4 = v + a3 * dt;
    let a4 = field.acceleration(&x4);
    PhaseState {
        t: s.t + dt,
        position: x + (v + v2 * 2.0 + v3 * 2.0 + v4) * (dt / 6.0),
        velocity: v + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0),
    }
}

/// Cubic Hermite interpolation between two steps, located where `z` equals
/// `plane_z`. Bisection on the interpolant; the bracket is guaranteed by the
/// caller.
fn locate_crossing(a: &PhaseState, b: &PhaseState, plane_z: f64) -> Crossing {
    let h = b.t - a.t;
    let pos = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        a.position * (2.0 * s3 - 3.0 * s2 + 1.0)
            + a.velocity * (h * (s3 - 2.0 * s2 + s))
            + b.position * (-2.0 * s3 + 3.0 * s2)
            + b.velocity * (h * (s3 - s2))
    };
    let vel = |s: f64| {
        let s2 = s * s;
        (a.position * (6.0 * s2 - 6.0 * s) + b.position * (6.0 * s - 6.0 * s2)) / h
            + a.velocity * (3.0 * s2 - 4.0 * s + 1.0)
            + b.velocity * (3.0 * s2 - 2.0 * s)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if pos(mid).z < plane_z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Crossing {
        time: a.t + s * h,
        position: pos(s),
        velocity: vel(s),
    }
}

/// Integrates `start` through `field` for `total_time` with fixed RK4 steps.
///
/// The first passage through `z = detector_z` (from below) is located by
/// Hermite interpolation between the bracketing steps; pass
/// `f64::INFINITY` for no detector. Entering matter stops the run and
/// marks the trajectory absorbed.
pub fn integrate_trajectory<F: StaticField>(
    start: PhaseState,
    field: &F,
    total_time: f64,
    detector_z: f64,
    control: &StepControl,
) -> Result<Trajectory> {
    if control.steps < MIN_STEPS_PER_TRANSIT {
        return Err(Error::TooFewSteps {
            steps: control.steps,
            min: MIN_STEPS_PER_TRANSIT,
        });
    }
    if !(total_time.is_finite() && total_time > 0.0) {
        return Err(Error::invalid("total_time", format!("must be finite and > 0, got {total_time}")));
    }
    let dt = total_time / control.steps as f64;
    let e0 = specific_energy(field, &start);
    let mut samples = vec![start];
    let mut crossing = None;
    let mut absorbed = field.absorbs(&start.position);
    let mut max_drift = 0.0f64;
    let mut state = start;
    if !absorbed {
        for i in 1..=control.steps {
            let mut next = rk4_step(field, &state, dt);
            // pin the clock to the grid so step-count changes don't accumulate drift
            next.t = start.t + i as f64 * dt;
            if crossing.is_none() && state.position.z < detector_z && next.position.z >= detector_z {
                crossing = Some(locate_crossing(&state, &next, detector_z));
            }
            let e = specific_energy(field, &next);
            max_drift = max_drift.max(if e0 != 0.0 { ((e - e0) / e0).abs() } else { (e - e0).abs() });
            state = next;
            if field.absorbs(&state.position) {
                absorbed = true;
                samples.push(state);
                break;
            }
            match control.record_every {
                Some(n) if i % n == 0 || i == control.steps => samples.push(state),
                None if i == control.steps => samples.push(state),
                _ => {}
            }
        }
    }
    Ok(Trajectory {
        samples,
        last: state,
        crossing: if absorbed { None } else { crossing },
        absorbed,
        max_energy_drift: max_drift,
    })
}
