//! Distance of the Gibbs state from the groundspace at low temperature.
//!
//! If `c(T) ≤ k T^{−ν} e^{−Δ/T}` for `T ≤ 1/ln n`, then at `T = δ/ln n`
//! with `0 < δ ≤ 1`
//!
//! `‖ρ_T − ρ_0‖₁ ≤ η = (2k/Δ) (ln n/δ)^{ν−1} n^{d − Δ/δ}`
//!
//! and `s(T) − s(0) ≤ k (ln n)^ν / (δ^ν n^{Δ/δ})`, where `ρ_0` is the
//! maximally mixed state on the groundspace.

use serde::Serialize;

use super::prop::{check_hypothesis, hypothesis_grid, HypothesisCheck, DEFAULT_REFINE_POINTS};
use super::Verdict;
use crate::error::{Error, Result};
use crate::heatfit::{HeatCapModel, HeatSample};
use crate::lattice::LatticeSpec;
use crate::spectral::SpectralData;
use crate::thermo::{thermal_sample, Boltzmann};

/// Constants of `c(T) ≤ k T^{−ν} e^{−Δ/T}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PepoFit {
    pub k: f64,
    pub nu: f64,
    /// The gap `Δ`.
    pub gap: f64,
}

impl PepoFit {
    /// From `k (Δ/T)^γ e^{−Δ/T}`: `k' = kΔ^γ`, `ν = γ`.
    pub fn from_model(m: &HeatCapModel) -> Self {
        let (k, nu) = m.arrhenius_form();
        PepoFit { k, nu, gap: m.delta }
    }

    pub fn to_model(&self) -> HeatCapModel {
        HeatCapModel::exponential(self.k / self.gap.powf(self.nu), self.nu, self.gap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PepoBoundParams {
    pub fit: PepoFit,
    /// `δ ∈ (0, 1]`.
    pub delta: f64,
    pub n: usize,
    pub d: usize,
    /// `δ / ln n`.
    pub t: f64,
    pub eta: f64,
    pub trace_gap: Option<f64>,
    pub entropy_step: Option<f64>,
    pub entropy_step_bound: f64,
    pub hypothesis: Option<HypothesisCheck>,
    pub trace_verdict: Verdict,
    pub entropy_verdict: Verdict,
}

fn check_args(fit: &PepoFit, delta: f64, n: usize) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("lattice edge must be at least 2 (ln n > 0), got {n}")));
    }
    if !(fit.k > 0.0 && fit.gap > 0.0 && fit.nu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need k, Delta > 0 and nu >= 0, got k={}, Delta={}, nu={}",
            fit.k, fit.gap, fit.nu
        )));
    }
    Ok(())
}

/// `η = (2k/Δ)(ln n/δ)^{ν−1} n^{d−Δ/δ}`.
pub fn pepo_eta(fit: &PepoFit, delta: f64, n: usize, d: usize) -> Result<f64> {
    check_args(fit, delta, n)?;
    let ln_n = (n as f64).ln();
    Ok(2.0 * fit.k / fit.gap * (ln_n / delta).powf(fit.nu - 1.0) * (n as f64).powf(d as f64 - fit.gap / delta))
}

/// `k (ln n)^ν / (δ^ν n^{Δ/δ})`.
pub fn entropy_step_bound(fit: &PepoFit, delta: f64, n: usize) -> Result<f64> {
    check_args(fit, delta, n)?;
    let ln_n = (n as f64).ln();
    Ok(fit.k * ln_n.powf(fit.nu) / (delta.powf(fit.nu) * (n as f64).powf(fit.gap / delta)))
}

/// `‖ρ_T − ρ_0‖₁` in the common eigenbasis.
pub fn trace_gap(sd: &SpectralData, t: f64) -> Result<f64> {
    let b = Boltzmann::new(sd, t)?;
    let dg = sd.degeneracy as f64;
    Ok(b.weights
        .iter()
        .enumerate()
        .map(|(k, &w)| if k < sd.degeneracy { (w - 1.0 / dg).abs() } else { w })
        .sum())
}

/// Evaluate `η` and, with a spectrum, the exact trace gap and entropy step
/// at `T = δ/ln n`. The hypothesis is checked on `grid ∩ (0, 1/ln n]` plus
/// a log-spaced refinement.
pub fn pepo_bound(
    fit: &PepoFit,
    delta: f64,
    lat: &LatticeSpec,
    sd: Option<&SpectralData>,
    grid: &[f64],
) -> Result<PepoBoundParams> {
    let n = lat.size;
    let d = lat.dim;
    let eta = pepo_eta(fit, delta, n, d)?;
    let step_bound = entropy_step_bound(fit, delta, n)?;
    let ln_n = (n as f64).ln();
    let t = delta / ln_n;
    let mut out = PepoBoundParams {
        fit: *fit,
        delta,
        n,
        d,
        t,
        eta,
        trace_gap: None,
        entropy_step: None,
        entropy_step_bound: step_bound,
        hypothesis: None,
        trace_verdict: Verdict::NotMeasured,
        entropy_verdict: Verdict::NotMeasured,
    };
    if let Some(sd) = sd {
        let sites = lat.num_sites();
        let t_max = 1.0 / ln_n;
        let samples = hypothesis_grid(grid, t_max, DEFAULT_REFINE_POINTS)
            .into_iter()
            .map(|t| Ok(HeatSample { t, c: thermal_sample(sd, t, sites)?.c }))
            .collect::<Result<Vec<_>>>()?;
        let hyp = check_hypothesis(&samples, &fit.to_model(), t_max, false);
        let gap = trace_gap(sd, t)?;
        let step = thermal_sample(sd, t, sites)?.s - sd.ground_entropy_density(sites);
        out.trace_verdict = Verdict::compare(hyp.holds, gap, eta, 1e-10);
        out.entropy_verdict = Verdict::compare(hyp.holds, step, step_bound, 1e-10);
        out.trace_gap = Some(gap);
        out.entropy_step = Some(step);
        out.hypothesis = Some(hyp);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_tfim, DEFAULT_DIM_CAP};
    use crate::spectral::diagonalize;
    use approx::assert_relative_eq;

    #[test]
    fn hand_evaluated_eta() {
        let fit = PepoFit { k: 1.0, nu: 1.0, gap: 2.0 };
        assert_relative_eq!(pepo_eta(&fit, 1.0, 4, 1).unwrap(), 0.25, max_relative = 1e-15);
        assert!(pepo_eta(&fit, 0.0, 4, 1).is_err());
        assert!(pepo_eta(&fit, 1.5, 4, 1).is_err());
        assert!(pepo_eta(&fit, 1.0, 1, 1).is_err());
    }

    #[test]
    fn model_round_trip() {
        let m = HeatCapModel::exponential(1.3, 2.2, 0.7);
        let back = PepoFit::from_model(&m).to_model();
        assert_relative_eq!(back.k, m.k, max_relative = 1e-14);
        for t in [0.05, 0.3, 1.0] {
            assert_relative_eq!(back.c(t), m.c(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn trace_gap_vanishes_at_low_temperature() {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let sd = diagonalize(&build_tfim(&lat, 1.0, 2.0).assemble_full(DEFAULT_DIM_CAP).unwrap(), DEFAULT_DIM_CAP).unwrap();
        let gaps: Vec<f64> = [0.5, 0.2, 0.1, 0.05].iter().map(|&t| trace_gap(&sd, t).unwrap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(gaps[3] < 1e-10);
        assert!(trace_gap(&sd, 1e6).unwrap() <= 2.0);
    }
}
