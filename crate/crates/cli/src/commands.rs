use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use nung_core::gravity::{cycles_along_path, frequency_set, zero_point_frequency, FrequencySet};
use nung_core::metastate::{coherence_magnitude, physical_state_at, transit_averaged_state};
use nung_core::raytrace::{run_beam, slc_mutual_information, DetectorReport, SourceRegime};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Order of magnitude of the cycle count quoted for the lead ball.
const QUOTED_CYCLES: f64 = 1e18;

fn prepare(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("resolved.conf"), cfg.to_text())?;
    Ok(())
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn e17(x: f64) -> String {
    format!("{x:.16e}")
}

fn frequencies(cfg: &RunConfig) -> Result<FrequencySet, CliError> {
    let k = cfg.constants()?;
    match cfg.omega_beat {
        Some(w) => Ok(FrequencySet::from_parts(w, 0.0, cfg.dx)),
        None => Ok(frequency_set(&cfg.ball()?, cfg.dx, &k)?),
    }
}

/// Phase frequencies, zero-point frequency and beat-cycle counts.
pub fn cmd_omega(cfg: &RunConfig) -> Result<String, CliError> {
    let ball = cfg.ball()?;
    let k = cfg.constants()?;
    let f = frequency_set(&ball, cfg.dx, &k)?;
    if !(cfg.speed.is_finite() && cfg.speed > 0.0) {
        return Err(CliError::Invalid(format!("speed must be > 0, got {}", cfg.speed)));
    }
    let path = cfg.detector_z - cfg.source_z;
    if !(path.is_finite() && path >= 0.0) {
        return Err(CliError::Invalid("detector_z must not lie before source_z".into()));
    }
    let omega_zp = zero_point_frequency(&ball, &k);
    let cycles = cycles_along_path(f.omega_beat, cfg.speed, path);
    let cycles_quoted = cycles_along_path(cfg.quoted_omega, cfg.speed, path);
    // with h in place of hbar every frequency shrinks by 2 pi
    let beat_h = f.omega_beat / std::f64::consts::TAU;
    let gap = if f.omega_beat != 0.0 {
        (f.omega_beat.abs() / cfg.quoted_omega).log10()
    } else {
        f64::NEG_INFINITY
    };
    prepare(cfg)?;

    let report = json!({
        "mass": ball.mass(),
        "radius": ball.radius(),
        "dx": cfg.dx,
        "constants": { "g": k.g, "hbar": k.hbar, "c": k.c },
        "formula": {
            "omega0": f.omega0,
            "omega1": f.omega1,
            "omega_beat": f.omega_beat,
            "omega_beat_h_convention": beat_h,
            "omega_zero_point": omega_zp,
            "cycles_along_path": cycles,
        },
        "quoted": {
            "omega_beat_order": cfg.quoted_omega,
            "cycles_order": QUOTED_CYCLES,
            "cycles_at_quoted_omega": cycles_quoted,
        },
        "log10_formula_over_quoted_omega": if gap.is_finite() { json!(gap) } else { Value::Null },
        "speed": cfg.speed,
        "path_length": path,
    });
    if cfg.format.json() {
        write_json(&cfg.out.join("omega.json"), &report)?;
    }
    if cfg.format.csv() {
        let mut w = BufWriter::new(File::create(cfg.out.join("omega.csv"))?);
        writeln!(w, "quantity,value")?;
        for (name, v) in [
            ("omega0", f.omega0),
            ("omega1", f.omega1),
            ("omega_beat", f.omega_beat),
            ("omega_beat_h_convention", beat_h),
            ("omega_zero_point", omega_zp),
            ("cycles_along_path", cycles),
            ("quoted_omega_beat", cfg.quoted_omega),
            ("cycles_at_quoted_omega", cycles_quoted),
        ] {
            writeln!(w, "{name},{}", e17(v))?;
        }
        w.flush()?;
    }

    let mut s = String::new();
    s += &format!("omega0            (formula) = {:.3e} rad/s\n", f.omega0);
    s += &format!("omega1            (formula) = {:.3e} rad/s\n", f.omega1);
    s += &format!("omega_beat        (formula) = {:.3e} rad/s  [h convention: {:.3e}]\n", f.omega_beat, beat_h);
    s += &format!("omega_beat        (quoted)  ~ {:.3e} rad/s  [formula/quoted: 10^{:.3}]\n", cfg.quoted_omega, gap);
    s += &format!("omega_zero_point  (formula) = {:.3e} rad/s\n", omega_zp);
    s += &format!("cycles over {:.3e} m at {:.3e} m/s: formula {:.3e}, quoted omega {:.3e} (quoted order {:.0e})\n",
        path, cfg.speed, cycles, cycles_quoted, QUOTED_CYCLES);
    Ok(s)
}

/// Coherence time series and the transit-averaged physical state.
pub fn cmd_decohere(cfg: &RunConfig) -> Result<String, CliError> {
    let f = frequencies(cfg)?;
    let amps = cfg.amplitudes()?;
    let transit = cfg.transit_time.ok_or_else(|| CliError::Invalid("transit_time unresolved".into()))?;
    let span = cfg.span.ok_or_else(|| CliError::Invalid("span unresolved".into()))?;
    if !(span.is_finite() && span >= 0.0) {
        return Err(CliError::Invalid(format!("span must be >= 0, got {span}")));
    }
    if cfg.samples < 2 {
        return Err(CliError::Invalid("samples must be at least 2".into()));
    }
    let averaged = transit_averaged_state(&amps, &f, transit)?;
    let residual = coherence_magnitude(&averaged);
    let initial = amps.alpha().norm() * amps.beta().norm();
    // share of the initial coherence that survives the average
    let fraction = if initial > 0.0 { Some(residual / initial) } else { None };
    let decohered = residual <= cfg.coherence_threshold;
    prepare(cfg)?;

    if cfg.format.csv() {
        let mut w = BufWriter::new(File::create(cfg.out.join("decoherence.csv"))?);
        writeln!(w, "t,coherence,purity")?;
        for i in 0..cfg.samples {
            let t = span * i as f64 / (cfg.samples - 1) as f64;
            let rho = physical_state_at(&amps, &f, t);
            writeln!(w, "{},{},{}", e17(t), e17(coherence_magnitude(&rho)), e17(rho.purity()))?;
        }
        w.flush()?;
    }
    let verdict = if decohered { "decohered" } else { "coherent" };
    if cfg.format.json() {
        let report = json!({
            "omega0": f.omega0,
            "omega1": f.omega1,
            "omega_beat": f.omega_beat,
            "transit_time": transit,
            "beat_phase_over_transit": f.omega_beat * transit,
            "transit_averaged_state": averaged,
            "residual_coherence": residual,
            "residual_fraction": fraction,
            "coherence_threshold": cfg.coherence_threshold,
            "verdict": verdict,
        });
        write_json(&cfg.out.join("decoherence.json"), &report)?;
    }
    Ok(format!(
        "omega_beat = {:.3e} rad/s, transit = {:.3e} s, omega*T = {:.3e}\nresidual coherence = {:.3e} (threshold {:.3e}): {verdict}\n",
        f.omega_beat,
        transit,
        f.omega_beat * transit,
        residual,
        cfg.coherence_threshold
    ))
}

fn write_report(cfg: &RunConfig, stem: &str, report: &DetectorReport) -> Result<(), CliError> {
    if cfg.format.json() {
        let w = BufWriter::new(File::create(cfg.out.join(format!("{stem}.json")))?);
        report.write_summary_json(w)?;
    }
    if cfg.format.csv() {
        let w = BufWriter::new(File::create(cfg.out.join(format!("{stem}_exits.csv")))?);
        report.write_records_csv(w)?;
    }
    Ok(())
}

fn report_line(name: &str, r: &DetectorReport) -> String {
    format!(
        "{name:<22} on-axis {:>6}  plus {:>6}  minus {:>6}  absorbed {:>4}  mean x {:.3e} m\n",
        r.n_on_axis, r.n_deflected_plus, r.n_deflected_minus, r.n_absorbed, r.mean_x
    )
}

/// One beam batch under the configured regime.
pub fn cmd_beam(cfg: &RunConfig) -> Result<String, CliError> {
    let scenario = cfg.scenario()?;
    let amps = cfg.amplitudes()?;
    let report = run_beam(&scenario, cfg.regime, &amps, cfg.seed)?;
    prepare(cfg)?;
    write_report(cfg, "beam", &report)?;
    Ok(report_line(&cfg.regime.to_string(), &report))
}

/// Seed of one sender arm; both gravity models use the same pair.
pub fn arm_seed(seed: u64, sender_bit: u64) -> u64 {
    seed.wrapping_mul(2).wrapping_add(sender_bit)
}

/// Both signalling protocols: semiclassical (unmeasured vs collapsed) and
/// decohered (decohered vs decohered).
pub fn cmd_slc(cfg: &RunConfig) -> Result<String, CliError> {
    let scenario = cfg.scenario()?;
    let amps = cfg.amplitudes()?;
    let (s0, s1) = (arm_seed(cfg.seed, 0), arm_seed(cfg.seed, 1));
    let scg0 = run_beam(&scenario, SourceRegime::ScgUnmeasured, &amps, s0)?;
    let scg1 = run_beam(&scenario, SourceRegime::ScgCollapsed(cfg.collapsed_site), &amps, s1)?;
    let nung0 = run_beam(&scenario, SourceRegime::NungDecohered, &amps, s0)?;
    let nung1 = run_beam(&scenario, SourceRegime::NungDecohered, &amps, s1)?;
    let scg_mi = slc_mutual_information(&scg0, &scg1)?;
    let nung_mi = slc_mutual_information(&nung0, &nung1)?;
    let channel = |mi: f64| if mi > cfg.mi_threshold { "OPEN" } else { "CLOSED" };
    prepare(cfg)?;

    if cfg.format.json() {
        let arm = |r0: &DetectorReport, r1: &DetectorReport, mi: f64| -> Result<Value, CliError> {
            Ok(json!({
                "sender_0": serde_json::to_value(r0)?,
                "sender_1": serde_json::to_value(r1)?,
                "receiver_bits": [r0.receiver_bit(), r1.receiver_bit()],
                "mutual_information_bits": mi,
                "channel": channel(mi),
            }))
        };
        let report = json!({
            "mi_threshold_bits": cfg.mi_threshold,
            "scg": arm(&scg0, &scg1, scg_mi)?,
            "nung": arm(&nung0, &nung1, nung_mi)?,
        });
        write_json(&cfg.out.join("slc.json"), &report)?;
    }
    if cfg.format.csv() {
        for (stem, r) in [("slc_scg_sender0", &scg0), ("slc_scg_sender1", &scg1), ("slc_nung_sender0", &nung0), ("slc_nung_sender1", &nung1)] {
            let w = BufWriter::new(File::create(cfg.out.join(format!("{stem}_exits.csv")))?);
            r.write_records_csv(w)?;
        }
    }

    let mut s = String::new();
    s += &report_line("SCG sender 0", &scg0);
    s += &report_line("SCG sender 1", &scg1);
    s += &report_line("NUNG sender 0", &nung0);
    s += &report_line("NUNG sender 1", &nung1);
    s += &format!("SLC channel (SCG):  {} ({:.4} bit)\n", channel(scg_mi), scg_mi);
    s += &format!("SLC channel (NUNG): {} ({:.4} bit)\n", channel(nung_mi), nung_mi);
    Ok(s)
}
