//! `run`: build, diagonalize, thermal curve, entropy scan, certificates,
//! fits.

use std::time::Instant;

use arealaw::bounds::coupling::CouplingMode;
use arealaw::bounds::lemma::{lemma2_check, summarize_region, Lemma2Check, SpectralCurve};
use arealaw::bounds::pepo::{pepo_bound, PepoFit};
use arealaw::bounds::prop::{hypothesis_grid, prop1_from_curve, CertificateInputs, DEFAULT_REFINE_POINTS};
use arealaw::bounds::Verdict;
use arealaw::entangle::{entropy_scan, State};
use arealaw::heatfit::{fit, fit_exponential, HeatSample, Regime};
use arealaw::models::{DEFAULT_DIM_CAP, LARGE_DIM_CAP};
use arealaw::spectral::{diagonalize, SpectralData};
use arealaw::thermo::{thermal_curve, thermal_sample, ThermalCurve};
use arealaw::Exec;
use serde::Serialize;

use crate::config::{HMode, LoadedConfig};
use crate::error::CliError;
use crate::record::{
    ConfigSnapshot, CurvePoint, PepoRow, Prop1Record, RegionRecord, RegionRow, Report, RunRecord, SpectrumInfo, ToolInfo,
};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub allow_large: bool,
    pub exec: Option<Exec>,
}

/// Wall-clock time per stage; kept out of the record so it stays
/// reproducible.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((stage.to_string(), start.elapsed().as_secs_f64()));
        out
    }
}

pub struct RunOutcome {
    pub record: RunRecord,
    pub timings: Timings,
    /// Set when some certificate could not be formed because its
    /// hypothesis is unsatisfiable.
    pub unsatisfiable: Option<String>,
}

fn sweep_verdict(checks: &[Lemma2Check]) -> Verdict {
    if checks.iter().any(|c| c.verdict == Verdict::Fails) {
        Verdict::Fails
    } else if checks.iter().any(|c| c.verdict == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::HypothesisNotMet
    }
}

fn spectrum_info(sd: &SpectralData, n_sites: usize, local_dim: usize) -> SpectrumInfo {
    let near = sd
        .eigenvalues
        .iter()
        .filter(|&&e| e > sd.degeneracy_tol && e <= 10.0 * sd.degeneracy_tol)
        .count();
    SpectrumInfo {
        hilbert_dim: sd.dim(),
        n_sites,
        local_dim,
        ground_energy: sd.shift,
        gap: sd.gap(),
        degeneracy: sd.degeneracy,
        degeneracy_tol: sd.degeneracy_tol,
        near_degenerate: near,
        s0: sd.ground_entropy_density(n_sites),
    }
}

fn curve_samples(curve: &ThermalCurve, window: Option<(f64, f64)>) -> Vec<HeatSample> {
    curve
        .samples
        .iter()
        .filter(|p| window.is_none_or(|(lo, hi)| p.t >= lo && p.t <= hi))
        .filter(|p| p.c > f64::MIN_POSITIVE && p.c.is_finite())
        .map(|p| HeatSample { t: p.t, c: p.c })
        .collect()
}

pub fn run(loaded: &LoadedConfig, opts: RunOptions) -> Result<RunOutcome, CliError> {
    let cfg = &loaded.config;
    let exec = opts.exec.unwrap_or_default();
    let cap = if opts.allow_large { LARGE_DIM_CAP } else { DEFAULT_DIM_CAP };
    let mut timings = Timings::default();
    let mut warnings = Vec::new();
    let mut unsatisfiable = None;

    let spec = cfg.hamiltonian()?;
    let lat = spec.lattice.clone();
    let n_sites = spec.num_sites();
    let q = spec.local_dim();
    spec.hilbert_dim(cap)?;
    let (h_full, h_sparse) = timings.time("build", || -> Result<_, CliError> {
        Ok((spec.assemble_full(cap)?, spec.assemble_sparse(cap)?))
    })?;
    let sd = timings.time("diagonalize", || diagonalize(&h_full, cap))?;
    drop(h_full);
    let spectrum = spectrum_info(&sd, n_sites, q);
    if spectrum.near_degenerate > 0 {
        warnings.push(format!(
            "{} level(s) lie within 10x the degeneracy tolerance {:e}; D = {} is ambiguous",
            spectrum.near_degenerate, sd.degeneracy_tol, sd.degeneracy
        ));
    }

    let grid = cfg.temperatures();
    let curve = timings.time("thermal_curve", || thermal_curve(&sd, &grid, n_sites, exec))?;

    let (state, state_id) = match &cfg.certify.eigenstate {
        Some(k) => {
            let k = *k.get_ref();
            if k >= sd.dim() {
                return Err(CliError::Validation(format!("eigenstate {k} out of range (dimension {})", sd.dim())));
            }
            (State::Pure(sd.eigenvector(k)), format!("eigenstate:{k}"))
        }
        None if sd.degeneracy == 1 => (State::Pure(sd.eigenvector(0)), "ground".to_string()),
        None => (State::Mixed(sd.ground_state()), format!("groundspace:D={}", sd.degeneracy)),
    };
    if !spec.translation_invariant {
        warnings.push(format!("{}: translation invariance waived", spec.name));
    }

    let scan = timings.time("entropy_scan", || entropy_scan(&state, &lat, q, cfg.regions(), exec))?;

    let spectral_curve = SpectralCurve { sd: &sd, n_sites };
    let regime = cfg.regime();
    let h_mode = cfg.h_mode();
    let mut regions = Vec::new();
    let start = Instant::now();
    for &l in cfg.regions() {
        let mut summary = summarize_region(&spec, &sd, &h_sparse, &state, l, exec)?;
        match h_mode {
            HMode::Min => {}
            HMode::Covariance => {
                summary.coupling.value = summary.coupling.covariance;
                summary.coupling.mode = CouplingMode::Covariance;
            }
            HMode::OperatorNorm => {
                summary.coupling.value = summary.coupling.operator_norm;
                summary.coupling.mode = CouplingMode::OperatorNorm;
            }
        }
        let lemma2: Vec<Lemma2Check> = if cfg.certify.lemma2 {
            curve.samples.iter().map(|p| lemma2_check(&summary, p)).collect()
        } else {
            Vec::new()
        };
        let lemma2_verdict = sweep_verdict(&lemma2);
        let (mut prop1, mut prop1_error) = (None, None);
        if cfg.certify.prop1 {
            let mut inputs = CertificateInputs::from_summary(
                &summary,
                &spec.name,
                &state_id,
                lat.size,
                spectrum.s0,
                Some(sd.degeneracy),
            );
            if let Some(c) = &cfg.certify.energy_constant {
                inputs.energy_constant = *c.get_ref();
            }
            match prop1_from_curve(
                &inputs,
                &spectral_curve,
                &grid,
                DEFAULT_REFINE_POINTS,
                regime,
                cfg.fit.energy_scale,
                cfg.certify.monotone_shortcut,
            ) {
                Ok((fit, certificate)) => prop1 = Some(Prop1Record { fit, certificate }),
                Err(e) => {
                    let e = CliError::from(e);
                    if let CliError::Unsatisfiable(m) = &e {
                        unsatisfiable.get_or_insert_with(|| format!("l = {l}: {m}"));
                    } else if !matches!(e, CliError::Numeric(_)) {
                        return Err(e);
                    }
                    prop1_error = Some(e.to_string());
                }
            }
        }
        regions.push(RegionRecord {
            l,
            h_mode,
            summary,
            lemma2,
            lemma2_verdict,
            prop1,
            prop1_error,
        });
    }
    timings.stages.push(("certificates".into(), start.elapsed().as_secs_f64()));

    let fitted = timings.time("fit", || {
        let samples = curve_samples(&curve, cfg.fit_window());
        match fit(&samples, regime, cfg.fit.energy_scale) {
            Ok(f) => Some(f),
            Err(e) => {
                warnings.push(format!("heat-capacity fit skipped: {e}"));
                None
            }
        }
    });

    let mut pepo = Vec::new();
    if cfg.certify.pepo && lat.size >= 2 {
        let t_max = 1.0 / (lat.size as f64).ln();
        let samples: Vec<HeatSample> = hypothesis_grid(&grid, t_max, DEFAULT_REFINE_POINTS)
            .into_iter()
            .map(|t| Ok(HeatSample { t, c: thermal_sample(&sd, t, n_sites)?.c }))
            .collect::<arealaw::Result<Vec<_>>>()?
            .into_iter()
            .filter(|s| s.c > f64::MIN_POSITIVE)
            .collect();
        match fit_exponential(&samples) {
            Ok(f) if f.model.gamma >= 0.0 => {
                let pf = PepoFit::from_model(&f.model);
                for &delta in cfg.certify.delta.get_ref() {
                    pepo.push(pepo_bound(&pf, delta, &lat, Some(&sd), &grid)?);
                }
            }
            Ok(_) => {}
            Err(e) => warnings.push(format!("trace-norm bound skipped: {e}")),
        }
    }

    let report = Report {
        model: spec.name.clone(),
        n_sites,
        hilbert_dim: sd.dim(),
        d: lat.dim,
        curve: curve.samples.iter().map(|p| CurvePoint { t: p.t, u: p.u, s: p.s, c: p.c }).collect(),
        fit: fitted.as_ref().map(|f| f.model),
        regions: regions
            .iter()
            .map(|r| RegionRow {
                l: r.l,
                s_single: r.summary.single_entropy,
                s_avg: r.summary.mean_entropy,
                h: r.summary.coupling.value,
                energy_constant: r
                    .prop1
                    .as_ref()
                    .map_or(r.summary.energy_constant(), |p| p.certificate.inputs.energy_constant),
                lemma2_met: r.lemma2.iter().filter(|c| c.hypothesis_met).count(),
                lemma2_tested: r.lemma2.len(),
                lemma2_verdict: r.lemma2_verdict,
                t_c: r.prop1.as_ref().map(|p| p.certificate.t_c),
                lemma2_rhs: r.prop1.as_ref().map(|p| p.certificate.lemma2_rhs),
                prop1_rhs: r.prop1.as_ref().map(|p| p.certificate.prop1_rhs),
                prop1_verdict: r.prop1.as_ref().map(|p| p.certificate.verdict),
            })
            .collect(),
        pepo: pepo
            .iter()
            .map(|p| PepoRow {
                delta: p.delta,
                t: p.t,
                eta: p.eta,
                trace_gap: p.trace_gap,
                trace_verdict: p.trace_verdict,
                entropy_step: p.entropy_step,
                entropy_step_bound: p.entropy_step_bound,
                entropy_verdict: p.entropy_verdict,
            })
            .collect(),
        warnings: warnings.clone(),
    };

    let record = RunRecord {
        tool: ToolInfo::current(),
        config: ConfigSnapshot {
            source: loaded.source.clone(),
            parsed: cfg.clone(),
        },
        state: state_id,
        spectrum,
        curve,
        scan,
        regions,
        fit: fitted,
        pepo,
        warnings,
        report,
    };
    Ok(RunOutcome {
        record,
        timings,
        unsatisfiable,
    })
}

/// Whether any emitted inequality failed outright.
pub fn any_failure(record: &RunRecord) -> bool {
    record.regions.iter().any(|r| {
        r.lemma2_verdict == Verdict::Fails || r.prop1.as_ref().is_some_and(|p| p.certificate.verdict == Verdict::Fails)
    }) || record
        .pepo
        .iter()
        .any(|p| p.trace_verdict == Verdict::Fails || p.entropy_verdict == Verdict::Fails)
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Exponential => "exponential",
        Regime::Polynomial => "polynomial",
    }
}
