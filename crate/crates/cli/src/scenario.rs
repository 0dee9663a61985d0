//! The four scenarios and their CSV outputs.

use std::path::PathBuf;

use eitsq_core::eit::{group_delay, transmission_scan, window_fwhm};
use eitsq_core::measurement::{noise_at, rbw_average, LoKind};
use eitsq_core::pulse::{extract_delay, flux_artifacts, flux_fwhm};
use eitsq_core::spectral::FrequencyGrid;

use crate::config::Config;
use crate::error::CliError;
use crate::model::{lo_kind, symmetric_axis, theta_axis, Model, Trace};
use crate::output::{write_tables, Table};
use crate::record::CalibrationRecord;

pub const SCENARIOS: [(&str, &str); 4] = [
    ("fig2a-transmission", "EIT intensity transmission versus probe detuning, control on and off"),
    ("fig2b-scan", "bichromatic quadrature noise at theta = 0 and pi/2 versus control detuning"),
    ("fig3-cw", "mono- and bichromatic noise of the calibrated source versus LO phase"),
    ("fig4-pulse", "gated squeezed-vacuum pulse traces, photon flux and delays per control power"),
];

pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub const CONFIG_BEGIN: &str = "begin config";
pub const CONFIG_END: &str = "end config";

fn manifest(name: &str, cfg: &Config, rec: &CalibrationRecord) -> String {
    format!(
        "eitsq {}\nscenario = {name}\nseed = {}\n{CONFIG_BEGIN}\n{}{CONFIG_END}\nbegin calibration\n{}end calibration\n",
        env!("CARGO_PKG_VERSION"),
        cfg.pulse.seed,
        cfg.to_text(),
        rec.body_text(),
    )
}

/// Recover the resolved configuration from a CSV written by [`run_scenario`].
pub fn config_from_manifest(csv: &str) -> Option<String> {
    let mut inside = false;
    let mut out = String::new();
    for line in csv.lines() {
        let body = line.strip_prefix("# ")?;
        match body {
            CONFIG_BEGIN => inside = true,
            CONFIG_END => return Some(out),
            _ if inside => {
                out.push_str(body);
                out.push('\n');
            }
            _ => {}
        }
    }
    None
}

pub fn run_scenario(name: &str, cfg: &Config) -> Result<RunOutput, CliError> {
    if !SCENARIOS.iter().any(|s| s.0 == name) {
        return Err(CliError::UnknownScenario(name.to_string()));
    }
    let rec = CalibrationRecord::load(&cfg.calibration.record)?;
    let model = Model::from(&rec);
    let (tables, summary) = match name {
        "fig2a-transmission" => fig2a(cfg, &model)?,
        "fig2b-scan" => fig2b(cfg, &model)?,
        "fig3-cw" => fig3(cfg, &model)?,
        _ => fig4(cfg, &model)?,
    };
    let files = write_tables(&cfg.output.dir, &manifest(name, cfg, &rec), &tables)?;
    Ok(RunOutput { files, summary })
}

type Outcome = Result<(Vec<Table>, Vec<String>), CliError>;

fn fig2a(cfg: &Config, model: &Model) -> Outcome {
    let s = &cfg.scan;
    let n = 2 * (s.transmission_max / s.transmission_step).round() as usize;
    let grid = FrequencyGrid::new(n.max(2), s.transmission_step)?;
    let on = model.eit_at_power(cfg, cfg.medium.control_power)?;
    let off = model.eit(cfg, 0.0);
    let a = transmission_scan(&on, &grid)?;
    let b = transmission_scan(&off, &grid)?;
    let mut t = Table::new("fig2a_transmission", vec!["delta_hz", "transmission", "transmission_control_off"]);
    for (x, y) in a.iter().zip(&b) {
        t.push(vec![x.0, x.1, y.1]);
    }
    let summary = vec![
        format!("window FWHM at {} W: {:.1} kHz", cfg.medium.control_power, window_fwhm(&on)? / 1e3),
        format!("control-off transmission: {:.4}", b[0].1),
    ];
    Ok((vec![t], summary))
}

fn fig2b(cfg: &Config, model: &Model) -> Outcome {
    let offsets = symmetric_axis(cfg.scan.control_max, cfg.scan.control_step);
    let eit = model.eit_at_power(cfg, cfg.medium.control_power)?;
    let points = model.control_scan(cfg, &eit, model.eta_path, &offsets)?;
    let mut t = Table::new("fig2b_scan", vec!["delta_c_hz", "s0_db", "s90_db"]);
    for p in &points {
        t.push(vec![p.delta_c_hz, p.s0.db, p.s90.db]);
    }
    let at = |f: f64| points.iter().min_by(|a, b| (a.delta_c_hz - f).abs().total_cmp(&(b.delta_c_hz - f).abs()));
    let mut summary = Vec::new();
    if let Some(p) = at(0.0) {
        summary.push(format!("resonance: s0 = {:.3} dB, s90 = {:.3} dB", p.s0.db, p.s90.db));
    }
    if let Some(p) = at(2e6) {
        summary.push(format!("+2 MHz: s0 = {:.3} dB, s90 = {:.3} dB", p.s0.db, p.s90.db));
    }
    Ok((vec![t], summary))
}

fn fig3(cfg: &Config, model: &Model) -> Outcome {
    let source = model.cw_source(cfg)?;
    let grid = source.grid();
    let eps = cfg.measurement.epsilon;
    let rbw = cfg.measurement.rbw;
    let mut t = Table::new("fig3_cw", vec!["theta_rad", "s_mono_db", "s_bi_db"]);
    let (mut lo_m, mut hi_m, mut lo_b, mut hi_b) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for theta in theta_axis(cfg.scan.theta_points) {
        let noise = |kind: LoKind| -> Result<f64, CliError> {
            let lo = lo_kind(cfg, kind, theta)?;
            Ok(rbw_average(|f| noise_at(&lo, f, |d| source.pair_at(d)), eps, rbw, grid)?.db)
        };
        let (m, b) = (noise(LoKind::Monochromatic)?, noise(LoKind::Bichromatic)?);
        (lo_m, hi_m, lo_b, hi_b) = (lo_m.min(m), hi_m.max(m), lo_b.min(b), hi_b.max(b));
        t.push(vec![theta, m, b]);
    }
    let summary = vec![
        format!("monochromatic: {lo_m:.3} / {hi_m:.3} dB"),
        format!("bichromatic:   {lo_b:.3} / {hi_b:.3} dB"),
    ];
    Ok((vec![t], summary))
}

fn trace_table(name: String, tr: &Trace) -> Table {
    let t = &tr.trace;
    match &tr.sigma {
        None => {
            let mut tab = Table::new(name, vec!["time_s", "v0", "v90", "flux"]);
            for j in 0..t.times.len() {
                tab.push(vec![t.times[j], t.v0[j], t.v90[j], t.flux[j]]);
            }
            tab
        }
        Some((s0, s90)) => {
            let mut tab = Table::new(name, vec!["time_s", "v0", "v90", "flux", "sigma_v0", "sigma_v90"]);
            for j in 0..t.times.len() {
                tab.push(vec![t.times[j], t.v0[j], t.v90[j], t.flux[j], s0[j], s90[j]]);
            }
            tab
        }
    }
}

fn power_label(p: f64) -> String {
    let uw = p * 1e6;
    if (uw - uw.round()).abs() < 1e-9 {
        format!("{}uW", uw.round() as i64)
    } else {
        format!("{uw}uW")
    }
}

fn fig4(cfg: &Config, model: &Model) -> Outcome {
    let method = cfg.pulse.method;
    let seed = cfg.pulse.seed;
    let reference = model.run_trace(cfg, model.reference_channel()?, method, seed)?;
    let dark = model.run_trace(cfg, model.medium_channel(model.eit(cfg, 0.0))?, method, seed)?;
    let w_in = flux_fwhm(&reference.trace.times, &reference.trace.flux)?;
    let mut tables = vec![trace_table("fig4_trace_a".into(), &reference), trace_table("fig4_trace_b".into(), &dark)];
    let mut delays =
        Table::new("fig4_delays", vec!["power_w", "omega_c_rad_s", "delay_s", "flux_fwhm_s", "cw_group_delay_s"]);
    let peak = |t: &Trace| t.trace.flux.iter().copied().fold(f64::MIN, f64::max);
    let mut summary = vec![
        format!("trace A flux FWHM: {:.3} us", w_in * 1e6),
        format!("trace B / trace A peak flux: {:.4}", peak(&dark) / peak(&reference)),
    ];
    for &p in &cfg.pulse.powers {
        let eit = model.eit_at_power(cfg, p)?;
        let tr = model.run_trace(cfg, model.medium_channel(eit)?, method, seed)?;
        let tau = extract_delay(&tr.trace, &reference.trace)?;
        let w = flux_fwhm(&tr.trace.times, &tr.trace.flux)?;
        delays.push(vec![p, eit.omega_c, tau, w, group_delay(&eit)?]);
        let artifacts = flux_artifacts(&tr.trace.flux).len();
        summary.push(format!(
            "{}: delay {:.3} us, flux FWHM {:.3} us{}",
            power_label(p),
            tau * 1e6,
            w * 1e6,
            if artifacts > 0 { format!(", {artifacts} negative-flux samples") } else { String::new() }
        ));
        tables.push(trace_table(format!("fig4_trace_{}", power_label(p)), &tr));
    }
    tables.push(delays);
    Ok((tables, summary))
}
