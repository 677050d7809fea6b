//! Monte Carlo beam runs and detector bookkeeping.

use std::io::Write;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{integrate_trajectory, PhaseState, StepControl, MIN_STEPS_PER_TRANSIT};
use super::source::{Site, SourceField, SourceRegime};
use crate::error::{Error, Result};
use crate::gravity::{PhysicalConstants, SphereBody, SPEED_OF_LIGHT};
use crate::metastate::SiteAmplitudes;

/// `G` multiplier of the default gedanken scenario. With the lead ball at
/// `dx = 1 m` and a `c/10` beam over 1 m, a collapsed ball pulls the beam
/// about 3 cm sideways, thirty detector half-widths.
pub const GEDANKEN_G_SCALE: f64 = 2e22;

/// Extra integration time past the nominal transit, as a fraction of it.
const TRANSIT_MARGIN: f64 = 0.05;

/// Geometry of the beam experiment. Ball sites at `(+-dx, 0, 0)`, beam
/// launched along `+z` from `(0, 0, beam_source_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamScenario {
    pub ball: SphereBody,
    pub dx: f64,
    pub beam_source_z: f64,
    pub beam_speed: f64,
    pub detector_z: f64,
    /// On-axis acceptance in x at the detector plane.
    pub detector_half_width: f64,
    /// Radius of the uniformly filled launch disc; zero for a pencil beam.
    pub beam_radius: f64,
    pub n_particles: usize,
    pub constants: PhysicalConstants,
    pub steps_per_transit: usize,
    /// Reflect the whole experiment through `x = 0`.
    pub mirrored: bool,
}

impl BeamScenario {
    /// Lead ball, `dx = 1 m`, `c/10` pencil beam from `z = -0.5` to the
    /// detector at `z = +0.5`, SI constants.
    pub fn lead_ball_si() -> Self {
        Self {
            ball: SphereBody::lead_ball(),
            dx: 1.0,
            beam_source_z: -0.5,
            beam_speed: SPEED_OF_LIGHT / 10.0,
            detector_z: 0.5,
            detector_half_width: 1e-3,
            beam_radius: 0.0,
            n_particles: 10_000,
            constants: PhysicalConstants::codata(),
            steps_per_transit: MIN_STEPS_PER_TRANSIT,
            mirrored: false,
        }
    }

    /// [`Self::lead_ball_si`] with `G` scaled by [`GEDANKEN_G_SCALE`].
    pub fn gedanken() -> Self {
        let mut s = Self::lead_ball_si();
        s.constants.g *= GEDANKEN_G_SCALE;
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.dx < self.ball.radius() {
            return Err(Error::OverlappingSites {
                dx: self.dx,
                radius: self.ball.radius(),
            });
        }
        if !(self.beam_speed.is_finite() && self.beam_speed > 0.0) {
            return Err(Error::invalid("beam_speed", format!("must be > 0, got {}", self.beam_speed)));
        }
        if !(self.beam_source_z.is_finite() && self.detector_z.is_finite() && self.detector_z > self.beam_source_z) {
            return Err(Error::invalid("detector_z", "detector plane must lie beyond the beam source"));
        }
        if !(self.detector_half_width.is_finite() && self.detector_half_width > 0.0) {
            return Err(Error::invalid("detector_half_width", "must be > 0"));
        }
        if !(self.beam_radius.is_finite() && self.beam_radius >= 0.0) {
            return Err(Error::invalid("beam_radius", "must be >= 0"));
        }
        if self.n_particles == 0 {
            return Err(Error::invalid("n_particles", "must be at least 1"));
        }
        if self.steps_per_transit < MIN_STEPS_PER_TRANSIT {
            return Err(Error::TooFewSteps {
                steps: self.steps_per_transit,
                min: MIN_STEPS_PER_TRANSIT,
            });
        }
        Ok(())
    }

    pub fn path_length(&self) -> f64 {
        self.detector_z - self.beam_source_z
    }

    /// Nominal source-to-detector flight time.
    pub fn transit_time(&self) -> f64 {
        self.path_length() / self.beam_speed
    }

    fn integration_time(&self) -> f64 {
        self.transit_time() * (1.0 + TRANSIT_MARGIN)
    }

    fn integration_steps(&self) -> usize {
        (self.steps_per_transit as f64 * (1.0 + TRANSIT_MARGIN)).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    OnAxis,
    DeflectedPlus,
    DeflectedMinus,
    /// Hit the ball.
    Absorbed,
    /// Never reached the detector plane.
    Lost,
}

/// One particle's fate, also the CSV row layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub index: usize,
    /// Site the particle saw the ball at; only set when the ball was at a
    /// definite site.
    pub site: Option<Site>,
    pub status: ExitStatus,
    pub exit_x: Option<f64>,
    pub crossing_time: Option<f64>,
}

/// Tally of a beam run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub regime: SourceRegime,
    pub seed: u64,
    pub n_particles: usize,
    pub n_on_axis: usize,
    pub n_deflected_plus: usize,
    pub n_deflected_minus: usize,
    pub n_absorbed: usize,
    pub n_lost: usize,
    /// Mean exit x over particles that reached the detector; 0 if none did.
    pub mean_x: f64,
    pub max_energy_drift: f64,
    #[serde(skip)]
    pub records: Vec<ExitRecord>,
}

impl DetectorReport {
    /// Particles that reached the detector plane.
    pub fn n_detected(&self) -> usize {
        self.n_on_axis + self.n_deflected_plus + self.n_deflected_minus
    }

    pub fn on_axis_rate(&self) -> Option<f64> {
        match self.n_detected() {
            0 => None,
            n => Some(self.n_on_axis as f64 / n as f64),
        }
    }

    /// Receiver's reading of the batch: `true` when more than half of the
    /// detected particles arrived on axis.
    pub fn receiver_bit(&self) -> bool {
        self.on_axis_rate().is_some_and(|r| r > 0.5)
    }

    pub fn write_summary_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Per-particle records: `index,site,status,exit_x,crossing_time`, floats
    /// with 17 significant digits.
    pub fn write_records_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "site", "status", "exit_x", "crossing_time"])?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for r in &self.records {
            let status = match r.status {
                ExitStatus::OnAxis => "on-axis",
                ExitStatus::DeflectedPlus => "deflected-plus",
                ExitStatus::DeflectedMinus => "deflected-minus",
                ExitStatus::Absorbed => "absorbed",
                ExitStatus::Lost => "lost",
            };
            out.write_record([
                r.index.to_string(),
                r.site.map(|s| s.to_string()).unwrap_or_default(),
                status.to_string(),
                fmt(r.exit_x),
                fmt(r.crossing_time),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// How a batch is evaluated. All variants give bit-identical reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon pool over particles. A pencil beam is traced once per distinct
    /// ball site, since every particle launches from the same point.
    #[default]
    Parallel,
    /// One full trace per particle, in index order.
    Sequential,
}

/// Per-particle random stream: the ChaCha block counter is keyed by
/// `(seed, index)`, so a particle's draws never depend on scheduling.
fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Launch point and the Born-weighted ball site drawn for the particle.
fn draw_particle(scenario: &BeamScenario, amps: &SiteAmplitudes, seed: u64, index: usize) -> (Vector3<f64>, Site) {
    let mut rng = particle_rng(seed, index);
    let u: f64 = rng.random();
    let site = if u < amps.weight_plus() { Site::Plus } else { Site::Minus };
    let mut offset = (0.0, 0.0);
    if scenario.beam_radius > 0.0 {
        let r = scenario.beam_radius * rng.random::<f64>().sqrt();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        offset = (r * phi.cos(), r * phi.sin());
    }
    let parity = if scenario.mirrored { -1.0 } else { 1.0 };
    (Vector3::new(parity * offset.0, offset.1, scenario.beam_source_z), site)
}

fn seen_site(regime: SourceRegime, drawn: Site) -> Option<Site> {
    match regime {
        SourceRegime::ScgUnmeasured => None,
        SourceRegime::ScgCollapsed(s) => Some(s),
        SourceRegime::NungDecohered => Some(drawn),
    }
}

/// Outcome of one trajectory, before it is attached to a particle index.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    status: ExitStatus,
    exit_x: Option<f64>,
    crossing_time: Option<f64>,
    drift: f64,
}

fn trace(
    scenario: &BeamScenario,
    regime: SourceRegime,
    amps: &SiteAmplitudes,
    launch: Vector3<f64>,
    site: Option<Site>,
    control: &StepControl,
) -> Result<Outcome> {
    let field = SourceField::new(regime, scenario.ball, scenario.dx, amps, scenario.constants, site, scenario.mirrored)?;
    let start = PhaseState::new(launch, Vector3::new(0.0, 0.0, scenario.beam_speed));
    let tr = integrate_trajectory(start, &field, scenario.integration_time(), scenario.detector_z, control)?;
    let w = scenario.detector_half_width;
    Ok(match (tr.absorbed, tr.crossing) {
        (true, _) => Outcome {
            status: ExitStatus::Absorbed,
            exit_x: None,
            crossing_time: None,
            drift: tr.max_energy_drift,
        },
        (false, None) => Outcome {
            status: ExitStatus::Lost,
            exit_x: None,
            crossing_time: None,
            drift: tr.max_energy_drift,
        },
        (false, Some(c)) => {
            let x = c.position.x;
            let status = if x > w {
                ExitStatus::DeflectedPlus
            } else if x < -w {
                ExitStatus::DeflectedMinus
            } else {
                ExitStatus::OnAxis
            };
            Outcome {
                status,
                exit_x: Some(x),
                crossing_time: Some(c.time),
                drift: tr.max_energy_drift,
            }
        }
    })
}

fn attach(index: usize, site: Option<Site>, o: Outcome) -> (ExitRecord, f64) {
    let record = ExitRecord {
        index,
        site,
        status: o.status,
        exit_x: o.exit_x,
        crossing_time: o.crossing_time,
    };
    (record, o.drift)
}

/// Runs `scenario.n_particles` beam particles under `regime`.
pub fn run_beam(scenario: &BeamScenario, regime: SourceRegime, amps: &SiteAmplitudes, seed: u64) -> Result<DetectorReport> {
    run_beam_with(scenario, regime, amps, seed, Execution::Parallel)
}

pub fn run_beam_with(
    scenario: &BeamScenario,
    regime: SourceRegime,
    amps: &SiteAmplitudes,
    seed: u64,
    execution: Execution,
) -> Result<DetectorReport> {
    scenario.validate()?;
    let control = StepControl::new(scenario.integration_steps())?;
    let draws = |i: usize| {
        let (launch, drawn) = draw_particle(scenario, amps, seed, i);
        (launch, seen_site(regime, drawn))
    };
    let traced: Vec<(ExitRecord, f64)> = match execution {
        Execution::Sequential => (0..scenario.n_particles)
            .map(|i| {
                let (launch, site) = draws(i);
                Ok(attach(i, site, trace(scenario, regime, amps, launch, site, &control)?))
            })
            .collect::<Result<_>>()?,
        Execution::Parallel if scenario.beam_radius == 0.0 => {
            let launch = Vector3::new(0.0, 0.0, scenario.beam_source_z);
            let sites: Vec<Option<Site>> = (0..scenario.n_particles).into_par_iter().map(|i| draws(i).1).collect();
            let mut cache: Vec<(Option<Site>, Outcome)> = Vec::with_capacity(2);
            for site in [None, Some(Site::Plus), Some(Site::Minus)] {
                if sites.contains(&site) {
                    cache.push((site, trace(scenario, regime, amps, launch, site, &control)?));
                }
            }
            sites
                .into_iter()
                .enumerate()
                .map(|(i, site)| {
                    let o = cache.iter().find(|(s, _)| *s == site).map(|(_, o)| *o).expect("cached site");
                    attach(i, site, o)
                })
                .collect()
        }
        Execution::Parallel => (0..scenario.n_particles)
            .into_par_iter()
            .map(|i| {
                let (launch, site) = draws(i);
                Ok(attach(i, site, trace(scenario, regime, amps, launch, site, &control)?))
            })
            .collect::<Result<_>>()?,
    };

    let mut report = DetectorReport {
        regime,
        seed,
        n_particles: scenario.n_particles,
        n_on_axis: 0,
        n_deflected_plus: 0,
        n_deflected_minus: 0,
        n_absorbed: 0,
        n_lost: 0,
        mean_x: 0.0,
        max_energy_drift: 0.0,
        records: Vec::with_capacity(traced.len()),
    };
    let mut sum_x = 0.0;
    for (record, drift) in traced {
        match record.status {
            ExitStatus::OnAxis => report.n_on_axis += 1,
            ExitStatus::DeflectedPlus => report.n_deflected_plus += 1,
            ExitStatus::DeflectedMinus => report.n_deflected_minus += 1,
            ExitStatus::Absorbed => report.n_absorbed += 1,
            ExitStatus::Lost => report.n_lost += 1,
        }
        if record.status != ExitStatus::Absorbed {
            report.max_energy_drift = report.max_energy_drift.max(drift);
        }
        if let Some(x) = record.exit_x {
            sum_x += x;
        }
        report.records.push(record);
    }
    if report.n_detected() > 0 {
        report.mean_x = sum_x / report.n_detected() as f64;
    }
    Ok(report)
}
