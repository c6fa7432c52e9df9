//! Files written by `run`, `fit` and `report`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use arealaw::entangle::write_scan_csv;
use arealaw::heatfit::DataCertificate;
use serde::Serialize;

use crate::error::CliError;
use crate::pipeline::RunOutcome;
use crate::plot::{Plot, Series};
use crate::record::Report;

pub const CURVE_CSV: &str = "curve.csv";
pub const SCAN_CSV: &str = "scan.csv";
pub const CERTIFICATES_JSON: &str = "certificates.json";
pub const RECORD_JSON: &str = "record.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const TIMINGS_JSON: &str = "timings.json";
pub const ENTROPY_SVG: &str = "entropy.svg";
pub const HEAT_CAPACITY_SVG: &str = "heat_capacity.svg";

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

pub fn render_summary(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model {}  sites {}  dim {}  d {}", report.model, report.n_sites, report.hilbert_dim, report.d);
    if let Some(f) = &report.fit {
        let _ = writeln!(s, "fit {:?}: k = {:.6}  gamma = {:.6}  Delta = {:.6}", f.regime, f.k, f.gamma, f.delta);
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>4} {:>10} {:>10} {:>10} {:>8} {:>9} {:>18} {:>10} {:>10} {:>10} {:>18}",
        "l", "S_single", "S_avg", "h", "C", "lemma2", "lemma2 verdict", "T_c", "l^d s(T_c)", "prop1 rhs", "prop1 verdict"
    );
    for r in &report.regions {
        let _ = writeln!(
            s,
            "{:>4} {:>10.6} {:>10.6} {:>10.6} {:>8.4} {:>9} {:>18} {:>10} {:>10} {:>10} {:>18}",
            r.l,
            r.s_single,
            r.s_avg,
            r.h,
            r.energy_constant,
            format!("{}/{}", r.lemma2_met, r.lemma2_tested),
            r.lemma2_verdict.to_string(),
            opt(r.t_c),
            opt(r.lemma2_rhs),
            opt(r.prop1_rhs),
            r.prop1_verdict.map_or_else(|| "-".into(), |v| v.to_string()),
        );
    }
    if !report.pepo.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:>6} {:>10} {:>12} {:>12} {:>18} {:>12} {:>12} {:>18}",
            "delta", "T", "eta", "trace gap", "trace verdict", "ds", "ds bound", "entropy verdict"
        );
        for p in &report.pepo {
            let _ = writeln!(
                s,
                "{:>6} {:>10.6} {:>12.6e} {:>12} {:>18} {:>12} {:>12.6e} {:>18}",
                p.delta,
                p.t,
                p.eta,
                p.trace_gap.map_or_else(|| "-".into(), |v| format!("{v:.6e}")),
                p.trace_verdict.to_string(),
                p.entropy_step.map_or_else(|| "-".into(), |v| format!("{v:.6e}")),
                p.entropy_step_bound,
                p.entropy_verdict.to_string(),
            );
        }
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn render_plots(report: &Report) -> Vec<(&'static str, String)> {
    let mut entropy = vec![Series {
        name: "S avg".into(),
        points: report.regions.iter().map(|r| (r.l as f64, r.s_avg)).collect(),
        dashed: false,
        markers: true,
    }];
    let with = |f: fn(&crate::record::RegionRow) -> Option<f64>| -> Vec<(f64, f64)> {
        report.regions.iter().filter_map(|r| f(r).map(|v| (r.l as f64, v))).collect()
    };
    let lemma = with(|r| r.lemma2_rhs);
    if !lemma.is_empty() {
        entropy.push(Series { name: "l^d s(T_c)".into(), points: lemma, dashed: true, markers: true });
    }
    let prop = with(|r| r.prop1_rhs);
    if !prop.is_empty() {
        entropy.push(Series { name: "explicit bound".into(), points: prop, dashed: true, markers: true });
    }
    let mut heat = vec![Series {
        name: "c(T)".into(),
        points: report.curve.iter().map(|p| (p.t, p.c)).collect(),
        dashed: false,
        markers: false,
    }];
    if let Some(m) = &report.fit {
        heat.push(Series {
            name: "fitted bound".into(),
            points: report.curve.iter().map(|p| (p.t, m.c(p.t))).filter(|p| p.1 <= 10.0 * report.curve.iter().map(|q| q.c).fold(0.0, f64::max)).collect(),
            dashed: true,
            markers: false,
        });
    }
    vec![
        (
            ENTROPY_SVG,
            Plot {
                title: format!("{}: region entropy vs bounds", report.model),
                x_label: "l".into(),
                y_label: "entropy".into(),
                log_x: false,
                log_y: false,
                series: entropy,
            }
            .render(),
        ),
        (
            HEAT_CAPACITY_SVG,
            Plot {
                title: format!("{}: heat capacity per site", report.model),
                x_label: "T".into(),
                y_label: "c".into(),
                log_x: true,
                log_y: false,
                series: heat,
            }
            .render(),
        ),
    ]
}

pub fn write_report(dir: &Path, report: &Report, plots: bool) -> Result<(), CliError> {
    fs::write(dir.join(SUMMARY_TXT), render_summary(report))?;
    if plots {
        for (name, svg) in render_plots(report) {
            fs::write(dir.join(name), svg)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Certificates<'a> {
    regions: Vec<RegionCertificates<'a>>,
    pepo: &'a [arealaw::bounds::pepo::PepoBoundParams],
}

#[derive(Serialize)]
struct RegionCertificates<'a> {
    l: usize,
    lemma2_verdict: arealaw::bounds::Verdict,
    lemma2: &'a [arealaw::bounds::lemma::Lemma2Check],
    prop1: Option<&'a arealaw::bounds::prop::BoundCertificate>,
    prop1_error: Option<&'a str>,
}

pub fn write_run(dir: &Path, outcome: &RunOutcome, plots: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let rec = &outcome.record;
    let mut buf = Vec::new();
    rec.curve.write_csv(&mut buf)?;
    fs::write(dir.join(CURVE_CSV), &buf)?;
    buf.clear();
    write_scan_csv(&rec.scan, &mut buf)?;
    fs::write(dir.join(SCAN_CSV), &buf)?;
    let certs = Certificates {
        regions: rec
            .regions
            .iter()
            .map(|r| RegionCertificates {
                l: r.l,
                lemma2_verdict: r.lemma2_verdict,
                lemma2: &r.lemma2,
                prop1: r.prop1.as_ref().map(|p| &p.certificate),
                prop1_error: r.prop1_error.as_deref(),
            })
            .collect(),
        pepo: &rec.pepo,
    };
    fs::write(dir.join(CERTIFICATES_JSON), json(&certs)?)?;
    fs::write(dir.join(RECORD_JSON), json(rec)?)?;
    fs::write(dir.join(TIMINGS_JSON), json(&outcome.timings)?)?;
    write_report(dir, &rec.report, plots)
}

pub fn render_data_certificate(c: &DataCertificate) -> String {
    let cert = &c.certificate;
    let m = &c.fit.model;
    let mut s = String::new();
    let _ = writeln!(s, "{}", cert.inputs.note.as_deref().unwrap_or(""));
    let _ = writeln!(
        s,
        "fit {:?}: k = {:.6}  gamma = {:.6}  Delta = {:.6}  (window {:.4}..{:.4}, {} samples, rms {:.3e}, inflation {:.6})",
        m.regime, m.k, m.gamma, m.delta, c.fit.window.0, c.fit.window.1, c.fit.n_samples, c.fit.residual_rms, c.fit.inflation
    );
    let _ = writeln!(s, "energy budget {:.6}  T_c {:.6}  s(T_c) {:.6}", cert.energy_budget, cert.t_c, cert.s_at_tc);
    let _ = writeln!(s, "l^d s(T_c) = {:.6}  explicit bound = {:.6}  (F = {:.6})", cert.lemma2_rhs, cert.prop1_rhs, cert.prop1_constant);
    let _ = writeln!(
        s,
        "hypothesis on {} samples below T_c: {}",
        cert.hypothesis.grid.len(),
        if cert.hypothesis.holds { "verified" } else { "not met" }
    );
    for l in &cert.links {
        let _ = writeln!(s, "  {:<20} {}", l.name, l.verdict);
    }
    let _ = writeln!(s, "verdict: {}", cert.verdict);
    s
}

pub fn write_data_certificate(dir: &Path, c: &DataCertificate) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(CERTIFICATES_JSON), json(c)?)?;
    fs::write(dir.join(SUMMARY_TXT), render_data_certificate(c))?;
    Ok(())
}
