//! Line-based `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nung_core::gravity::{PhysicalConstants, SphereBody, CODATA_G, CODATA_HBAR, SPEED_OF_LIGHT};
use nung_core::metastate::SiteAmplitudes;
use nung_core::raytrace::{BeamScenario, Site, SourceRegime, GEDANKEN_G_SCALE, MIN_STEPS_PER_TRANSIT};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format `{other}` (json, csv, both)")),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Both => "both",
        })
    }
}

pub fn parse_regime(s: &str) -> Result<SourceRegime, String> {
    match s {
        "unmeasured" => Ok(SourceRegime::ScgUnmeasured),
        "collapsed-plus" => Ok(SourceRegime::ScgCollapsed(Site::Plus)),
        "collapsed-minus" => Ok(SourceRegime::ScgCollapsed(Site::Minus)),
        "decohered" => Ok(SourceRegime::NungDecohered),
        other => Err(format!(
            "unknown regime `{other}` (unmeasured, collapsed-plus, collapsed-minus, decohered)"
        )),
    }
}

fn regime_name(r: SourceRegime) -> &'static str {
    match r {
        SourceRegime::ScgUnmeasured => "unmeasured",
        SourceRegime::ScgCollapsed(Site::Plus) => "collapsed-plus",
        SourceRegime::ScgCollapsed(Site::Minus) => "collapsed-minus",
        SourceRegime::NungDecohered => "decohered",
    }
}

/// Every knob of every subcommand. Optional fields are derived from the
/// others when left unset; [`RunConfig::resolve`] fills them in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mass: f64,
    pub radius: f64,
    pub dx: f64,
    pub g: f64,
    pub hbar: f64,
    pub c: f64,
    /// Multiplier on `g`; defaults to 1 for `omega`/`decohere` and to the
    /// gedanken scale for `beam`/`slc`.
    pub g_scale: Option<f64>,
    pub speed: f64,
    pub source_z: f64,
    pub detector_z: f64,
    pub detector_half_width: f64,
    pub beam_radius: f64,
    pub n: usize,
    pub steps_per_transit: usize,
    pub mirrored: bool,
    pub p_plus: f64,
    pub phase: f64,
    pub regime: SourceRegime,
    pub collapsed_site: Site,
    pub seed: u64,
    /// Beat frequency override for `decohere`.
    pub omega_beat: Option<f64>,
    /// Averaging window for `decohere`; defaults to the beam transit time.
    pub transit_time: Option<f64>,
    /// Time span of the `decohere` series; defaults to four beat periods.
    pub span: Option<f64>,
    pub samples: usize,
    pub coherence_threshold: f64,
    pub mi_threshold: f64,
    /// Beat frequency quoted for the lead ball, used for the cycle-count check.
    pub quoted_omega: f64,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mass: 45.0,
            radius: 0.1,
            dx: 1.0,
            g: CODATA_G,
            hbar: CODATA_HBAR,
            c: SPEED_OF_LIGHT,
            g_scale: None,
            speed: SPEED_OF_LIGHT / 10.0,
            source_z: -0.5,
            detector_z: 0.5,
            detector_half_width: 1e-3,
            beam_radius: 0.0,
            n: 10_000,
            steps_per_transit: MIN_STEPS_PER_TRANSIT,
            mirrored: false,
            p_plus: 0.5,
            phase: 0.0,
            regime: SourceRegime::NungDecohered,
            collapsed_site: Site::Plus,
            seed: 0,
            omega_beat: None,
            transit_time: None,
            span: None,
            samples: 1001,
            coherence_threshold: 1e-6,
            mi_threshold: 1e-3,
            quoted_omega: 1e26,
            out: PathBuf::from("out"),
            format: OutputFormat::Both,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Invalid(format!("config key `{key}`: cannot parse `{value}`: {e}")))
}

fn parse_site(key: &str, value: &str) -> Result<Site, CliError> {
    match value {
        "plus" | "+" => Ok(Site::Plus),
        "minus" | "-" => Ok(Site::Minus),
        _ => Err(CliError::Invalid(format!("config key `{key}`: expected plus or minus, got `{value}`"))),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "mass" => self.mass = parse(key, value)?,
            "radius" => self.radius = parse(key, value)?,
            "dx" => self.dx = parse(key, value)?,
            "g" => self.g = parse(key, value)?,
            "hbar" => self.hbar = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "g_scale" => self.g_scale = Some(parse(key, value)?),
            "speed" => self.speed = parse(key, value)?,
            "source_z" => self.source_z = parse(key, value)?,
            "detector_z" => self.detector_z = parse(key, value)?,
            "detector_half_width" => self.detector_half_width = parse(key, value)?,
            "beam_radius" => self.beam_radius = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "steps_per_transit" => self.steps_per_transit = parse(key, value)?,
            "mirrored" => self.mirrored = parse(key, value)?,
            "p_plus" => self.p_plus = parse(key, value)?,
            "phase" => self.phase = parse(key, value)?,
            "regime" => self.regime = parse_regime(value).map_err(CliError::Invalid)?,
            "collapsed_site" => self.collapsed_site = parse_site(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "omega_beat" => self.omega_beat = Some(parse(key, value)?),
            "transit_time" => self.transit_time = Some(parse(key, value)?),
            "span" => self.span = Some(parse(key, value)?),
            "samples" => self.samples = parse(key, value)?,
            "coherence_threshold" => self.coherence_threshold = parse(key, value)?,
            "mi_threshold" => self.mi_threshold = parse(key, value)?,
            "quoted_omega" => self.quoted_omega = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "format" => self.format = value.parse().map_err(CliError::Invalid)?,
            other => return Err(CliError::Invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. One `key = value` per line;
    /// `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Fills in every derived value for `command`, so that the result can
    /// be written out and replayed verbatim.
    pub fn resolve(mut self, command: &str) -> Result<Self, CliError> {
        if self.g_scale.is_none() {
            self.g_scale = Some(match command {
                "beam" | "slc" => GEDANKEN_G_SCALE,
                _ => 1.0,
            });
        }
        if command == "decohere" {
            if self.transit_time.is_none() {
                if !(self.speed.is_finite() && self.speed > 0.0) {
                    return Err(CliError::Invalid(format!("speed must be > 0, got {}", self.speed)));
                }
                self.transit_time = Some((self.detector_z - self.source_z) / self.speed);
            }
            if self.span.is_none() {
                let beat = match self.omega_beat {
                    Some(w) => w,
                    None => nung_core::gravity::frequency_set(&self.ball()?, self.dx, &self.constants()?)?.omega_beat,
                };
                self.span = Some(if beat != 0.0 {
                    4.0 * std::f64::consts::TAU / beat.abs()
                } else {
                    self.transit_time.unwrap_or(1.0)
                });
            }
        }
        Ok(self)
    }

    pub fn ball(&self) -> Result<SphereBody, CliError> {
        Ok(SphereBody::new(self.mass, self.radius)?)
    }

    /// Constants with `g_scale` applied.
    pub fn constants(&self) -> Result<PhysicalConstants, CliError> {
        let k = PhysicalConstants::new(self.g, self.hbar, self.c)?;
        let scale = self.g_scale.unwrap_or(1.0);
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(CliError::Invalid(format!("g_scale must be finite and >= 0, got {scale}")));
        }
        Ok(k.with_g_scale(scale)?)
    }

    pub fn amplitudes(&self) -> Result<SiteAmplitudes, CliError> {
        Ok(SiteAmplitudes::from_weight(self.p_plus, self.phase)?)
    }

    pub fn scenario(&self) -> Result<BeamScenario, CliError> {
        let s = BeamScenario {
            ball: self.ball()?,
            dx: self.dx,
            beam_source_z: self.source_z,
            beam_speed: self.speed,
            detector_z: self.detector_z,
            detector_half_width: self.detector_half_width,
            beam_radius: self.beam_radius,
            n_particles: self.n,
            constants: self.constants()?,
            steps_per_transit: self.steps_per_transit,
            mirrored: self.mirrored,
        };
        s.validate()?;
        Ok(s)
    }

    /// `key = value` text that reproduces this configuration. Floats use
    /// the shortest representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# resolved run configuration\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mass", format!("{:?}", self.mass));
        kv("radius", format!("{:?}", self.radius));
        kv("dx", format!("{:?}", self.dx));
        kv("g", format!("{:?}", self.g));
        kv("hbar", format!("{:?}", self.hbar));
        kv("c", format!("{:?}", self.c));
        if let Some(v) = self.g_scale {
            kv("g_scale", format!("{v:?}"));
        }
        kv("speed", format!("{:?}", self.speed));
        kv("source_z", format!("{:?}", self.source_z));
        kv("detector_z", format!("{:?}", self.detector_z));
        kv("detector_half_width", format!("{:?}", self.detector_half_width));
        kv("beam_radius", format!("{:?}", self.beam_radius));
        kv("n", self.n.to_string());
        kv("steps_per_transit", self.steps_per_transit.to_string());
        kv("mirrored", self.mirrored.to_string());
        kv("p_plus", format!("{:?}", self.p_plus));
        kv("phase", format!("{:?}", self.phase));
        kv("regime", regime_name(self.regime).to_string());
        kv(
            "collapsed_site",
            match self.collapsed_site {
                Site::Plus => "plus",
                Site::Minus => "minus",
            }
            .to_string(),
        );
        kv("seed", self.seed.to_string());
        if let Some(v) = self.omega_beat {
            kv("omega_beat", format!("{v:?}"));
        }
        if let Some(v) = self.transit_time {
            kv("transit_time", format!("{v:?}"));
        }
        if let Some(v) = self.span {
            kv("span", format!("{v:?}"));
        }
        kv("samples", self.samples.to_string());
        kv("coherence_threshold", format!("{:?}", self.coherence_threshold));
        kv("mi_threshold", format!("{:?}", self.mi_threshold));
        kv("quoted_omega", format!("{:?}", self.quoted_omega));
        kv("out", self.out.display().to_string());
        kv("format", self.format.to_string());
        s
    }
}
