//! The run record and the compact report derived from it.

use arealaw::bounds::lemma::{Lemma2Check, RegionSummary};
use arealaw::bounds::pepo::PepoBoundParams;
use arealaw::bounds::prop::BoundCertificate;
use arealaw::bounds::Verdict;
use arealaw::entangle::ScanRow;
use arealaw::heatfit::{HeatCapFit, HeatCapModel};
use arealaw::thermo::ThermalCurve;
use serde::{Deserialize, Serialize};

use crate::config::{HMode, RunConfig};

#[derive(Clone, Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "arealaw",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigSnapshot {
    pub source: String,
    pub parsed: RunConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumInfo {
    pub hilbert_dim: usize,
    pub n_sites: usize,
    pub local_dim: usize,
    pub ground_energy: f64,
    pub gap: Option<f64>,
    pub degeneracy: usize,
    pub degeneracy_tol: f64,
    /// Levels above the tolerance but within ten times it.
    pub near_degenerate: usize,
    /// `ln D / n^d`.
    pub s0: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop1Record {
    pub fit: HeatCapFit,
    pub certificate: BoundCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionRecord {
    pub l: usize,
    pub h_mode: HMode,
    pub summary: RegionSummary,
    pub lemma2: Vec<Lemma2Check>,
    pub lemma2_verdict: Verdict,
    pub prop1: Option<Prop1Record>,
    pub prop1_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub tool: ToolInfo,
    pub config: ConfigSnapshot,
    pub state: String,
    pub spectrum: SpectrumInfo,
    pub curve: ThermalCurve,
    pub scan: Vec<ScanRow>,
    pub regions: Vec<RegionRecord>,
    pub fit: Option<HeatCapFit>,
    pub pepo: Vec<PepoBoundParams>,
    pub warnings: Vec<String>,
    pub report: Report,
}

/// Everything the summary table and plots need; re-rendered by `report`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: String,
    pub n_sites: usize,
    pub hilbert_dim: usize,
    pub d: usize,
    pub curve: Vec<CurvePoint>,
    pub fit: Option<HeatCapModel>,
    pub regions: Vec<RegionRow>,
    pub pepo: Vec<PepoRow>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub u: f64,
    pub s: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub l: usize,
    pub s_single: f64,
    pub s_avg: f64,
    pub h: f64,
    pub energy_constant: f64,
    pub lemma2_met: usize,
    pub lemma2_tested: usize,
    pub lemma2_verdict: Verdict,
    pub t_c: Option<f64>,
    pub lemma2_rhs: Option<f64>,
    pub prop1_rhs: Option<f64>,
    pub prop1_verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PepoRow {
    pub delta: f64,
    pub t: f64,
    pub eta: f64,
    pub trace_gap: Option<f64>,
    pub trace_verdict: Verdict,
    pub entropy_step: Option<f64>,
    pub entropy_step_bound: f64,
    pub entropy_verdict: Verdict,
}
