//! Explicit area-law bounds from a heat-capacity hypothesis.
//!
//! With `u(T_c) = (C + l·b)/l`, where `b = 2|∂R|h/l^d` is the boundary
//! term, the region entropy obeys `S(ρ_R) ≤ l^d s(T_c)`. A heat capacity
//! dominated on `(0, T_c]` by one of the fitted model classes then gives
//! `l^d s(T_c) ≤ s(0) l^d + F l^{d−1}` with
//!
//! * polynomial: `F = k^{1/(γ+1)}/γ · (γ+1)^{γ/(γ+1)} · (B/Δ)^{γ/(γ+1)} · l^{1/(γ+1)}`
//! * exponential: `F = 2(ln(kγ^{γ−1}) + 1 + γ/2 + ln l) · B/Δ`
//!
//! where `B = C + l·b` is the energy budget.

use serde::Serialize;

use super::coupling::CouplingMode;
use super::lemma::{solve_tc, EnergyCurve, RegionSummary, SpectralCurve, ENTROPY_SLACK};
use super::Verdict;
use crate::error::{Error, Result};
use crate::heatfit::{fit, HeatCapFit, HeatCapModel, HeatSample, Regime};
use crate::thermo::{log_grid, thermal_sample};

/// Relative tolerance on `c(T) ≤ model(T)`.
pub const HYPOTHESIS_REL_TOL: f64 = 1e-10;
/// Absolute floor below which `c` counts as zero; subnormal values carry
/// no relative precision.
pub const HYPOTHESIS_ABS_FLOOR: f64 = 1e-300;
/// Geometric refinement points added below `T_c`.
pub const DEFAULT_REFINE_POINTS: usize = 40;
/// The refinement reaches down to `T_c · REFINE_DEPTH`.
pub const REFINE_DEPTH: f64 = 1e-3;

/// A thermodynamic curve with entropy and heat capacity.
pub trait ThermalModel: EnergyCurve {
    fn entropy_density(&self, t: f64) -> f64;
    fn specific_heat(&self, t: f64) -> f64;
}

impl ThermalModel for SpectralCurve<'_> {
    fn entropy_density(&self, t: f64) -> f64 {
        thermal_sample(self.sd, t, self.n_sites).map(|p| p.s).unwrap_or(f64::NAN)
    }

    fn specific_heat(&self, t: f64) -> f64 {
        thermal_sample(self.sd, t, self.n_sites).map(|p| p.c).unwrap_or(f64::NAN)
    }
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
    }
}

/// `F_{k,γ,Δ,l}` for the energy budget `budget = C + 2|∂R|h/l^{d−1}`.
pub fn prop1_constant(regime: Regime, k: f64, gamma: f64, delta: f64, budget: f64, l: usize) -> Result<f64> {
    require_positive("k", k)?;
    require_positive("gamma", gamma)?;
    require_positive("Delta", delta)?;
    require_positive("energy budget", budget)?;
    if l == 0 {
        return Err(Error::InvalidParameter("l must be positive".into()));
    }
    let l = l as f64;
    Ok(match regime {
        Regime::Polynomial => {
            let g1 = gamma + 1.0;
            (g1 * budget / delta).powf(gamma / g1) * (k * l).powf(1.0 / g1) / gamma
        }
        Regime::Exponential => {
            let log_kg = k.ln() + (gamma - 1.0) * gamma.ln();
            2.0 * (log_kg + 1.0 + gamma / 2.0 + l.ln()) * budget / delta
        }
    })
}

/// `s(0) l^d + F l^{d−1}`.
pub fn prop1_rhs(f: f64, s0: f64, l: usize, d: usize) -> f64 {
    let l = l as f64;
    s0 * l.powi(d as i32) + f * l.powi(d as i32 - 1)
}

/// Which side of the knee `Δ/γ` the critical temperature falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpBranch {
    BelowKnee,
    AboveKnee,
}

/// Upper bound on `s(T_c) − s(0) = ∫_0^{T_c} c/T` from the model class,
/// given `u_c = u(T_c)` and `u_knee = u(Δ/γ)` (needed above the knee).
pub fn integral_bound(
    model: &HeatCapModel,
    t_c: f64,
    u_c: f64,
    u_knee: impl FnOnce() -> f64,
) -> (Option<ExpBranch>, f64) {
    let HeatCapModel { k, gamma, delta, .. } = *model;
    match model.regime {
        Regime::Polynomial => {
            let g1 = gamma + 1.0;
            let v = (k * delta / g1).powf(1.0 / g1) * g1 / gamma * u_c.powf(gamma / g1) / delta;
            (None, v)
        }
        Regime::Exponential => {
            let log_kg = k.ln() + (gamma - 1.0) * gamma.ln();
            let lead = 2.0 / delta * (log_kg + 1.0 - u_c.ln());
            if t_c <= delta / gamma {
                (Some(ExpBranch::BelowKnee), lead * u_c)
            } else {
                let a = u_knee();
                let v = lead * a + gamma / delta * (u_c - a) - 2.0 / delta * a;
                (Some(ExpBranch::AboveKnee), v)
            }
        }
    }
}

/// The sampled check of `c(T) ≤ model(T)` below `T_c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    /// Every sampled temperature, ascending.
    pub grid: Vec<f64>,
    pub c: Vec<f64>,
    pub model: Vec<f64>,
    /// Lowest temperature actually required to satisfy the bound.
    pub checked_from: f64,
    pub monotone_shortcut: bool,
    /// `max c/model` over the checked range.
    pub worst_ratio: f64,
    pub first_violation: Option<f64>,
    pub holds: bool,
}

/// The user's grid restricted to `(0, t_c]` merged with `points` log-spaced
/// temperatures from `t_c·REFINE_DEPTH` to `t_c`.
pub fn hypothesis_grid(user: &[f64], t_c: f64, points: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = user.iter().copied().filter(|&t| t > 0.0 && t <= t_c).collect();
    if points >= 2 {
        grid.extend(log_grid(t_c * REFINE_DEPTH, t_c, points));
    } else {
        grid.push(t_c);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Check `c_i ≤ model(T_i)` on the samples with `T_i ≤ t_c`. Under the
/// monotone shortcut, nondecreasing data only needs `[t_c/2, t_c]`.
pub fn check_hypothesis(samples: &[HeatSample], model: &HeatCapModel, t_c: f64, monotone_shortcut: bool) -> HypothesisCheck {
    let mut pts: Vec<HeatSample> = samples.iter().copied().filter(|s| s.t > 0.0 && s.t <= t_c).collect();
    pts.sort_by(|a, b| a.t.total_cmp(&b.t));
    let grid: Vec<f64> = pts.iter().map(|s| s.t).collect();
    let c: Vec<f64> = pts.iter().map(|s| s.c).collect();
    let bound: Vec<f64> = grid.iter().map(|&t| model.c(t)).collect();
    let monotone = monotone_shortcut && c.windows(2).all(|w| w[0] <= w[1]);
    let checked_from = if monotone { t_c / 2.0 } else { grid.first().copied().unwrap_or(t_c) };
    let mut worst_ratio = 0.0_f64;
    let mut first_violation = None;
    let mut checked = 0;
    for ((&t, &ci), &mi) in grid.iter().zip(&c).zip(&bound) {
        if t < checked_from {
            continue;
        }
        checked += 1;
        let ok = ci.is_finite() && ci <= mi * (1.0 + HYPOTHESIS_REL_TOL) + HYPOTHESIS_ABS_FLOOR;
        if ci > 0.0 {
            worst_ratio = worst_ratio.max(ci / mi);
        }
        if !ok && first_violation.is_none() {
            first_violation = Some(t);
        }
    }
    HypothesisCheck {
        holds: checked > 0 && first_violation.is_none(),
        grid,
        c,
        model: bound,
        checked_from,
        monotone_shortcut: monotone,
        worst_ratio,
        first_violation,
    }
}

/// Everything a certificate needs besides the thermodynamics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateInputs {
    pub model_id: String,
    pub state_id: String,
    pub d: usize,
    pub r: usize,
    pub l: usize,
    pub n: usize,
    /// `C ≥ 1` with `tr(Hρ) ≤ C n^d / l`.
    pub energy_constant: f64,
    pub h: f64,
    pub h_mode: Option<CouplingMode>,
    pub boundary_count: usize,
    pub boundary_count_bound: usize,
    pub s0: f64,
    pub ground_degeneracy: Option<usize>,
    pub measured_entropy: Option<f64>,
    pub note: Option<String>,
}

impl CertificateInputs {
    pub fn from_summary(
        summary: &RegionSummary,
        model_id: &str,
        state_id: &str,
        n: usize,
        s0: f64,
        ground_degeneracy: Option<usize>,
    ) -> Self {
        CertificateInputs {
            model_id: model_id.into(),
            state_id: state_id.into(),
            d: summary.d,
            r: summary.r,
            l: summary.l,
            n,
            energy_constant: summary.energy_constant(),
            h: summary.coupling.value,
            h_mode: Some(summary.coupling.mode),
            boundary_count: summary.boundary_count,
            boundary_count_bound: summary.boundary_count_bound,
            s0,
            ground_degeneracy,
            measured_entropy: Some(summary.mean_entropy),
            note: None,
        }
    }

    fn volume(&self) -> f64 {
        (self.l as f64).powi(self.d as i32)
    }

    /// `C + 2|∂R|h / l^{d−1}`.
    pub fn energy_budget(&self) -> f64 {
        self.energy_constant + 2.0 * self.boundary_count as f64 * self.h * self.l as f64 / self.volume()
    }

    /// `C + 4drh`.
    pub fn energy_budget_bound(&self) -> f64 {
        self.energy_constant + 2.0 * self.boundary_count_bound as f64 * self.h * self.l as f64 / self.volume()
    }
}

/// Where the hypothesis samples come from.
pub enum HypothesisSource<'a> {
    /// Evaluate the curve's own `c(T)` on the user grid plus a refinement.
    Curve { grid: &'a [f64], refine: usize },
    /// Use measured samples as given.
    Samples(&'a [HeatSample]),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub inputs: CertificateInputs,
    pub fit: HeatCapModel,
    pub energy_budget: f64,
    pub energy_budget_bound: f64,
    pub t_c: f64,
    /// `u(T_c) = budget / l`.
    pub u_at_tc: f64,
    pub s_at_tc: f64,
    /// `l^d s(T_c)`.
    pub lemma2_rhs: f64,
    pub prop1_constant: f64,
    /// `s(0) l^d + F l^{d−1}`.
    pub prop1_rhs: f64,
    /// Bound on `s(T_c) − s(0)` from the model class before the final
    /// simplification to `F`.
    pub integral_bound: f64,
    pub branch: Option<ExpBranch>,
    /// `l^d (s(0) + integral_bound)`.
    pub integral_rhs: f64,
    pub hypothesis: HypothesisCheck,
    pub links: Vec<ChainLink>,
    pub verdict: Verdict,
}

impl BoundCertificate {
    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.name == name)
    }
}

pub const LINK_MEASURED: &str = "measured_le_lemma2";
pub const LINK_PROP1: &str = "lemma2_le_prop1";
pub const LINK_INTEGRAL: &str = "lemma2_le_integral";

fn link(name: &str, hypothesis: bool, lhs: Option<f64>, rhs: f64) -> ChainLink {
    let verdict = match lhs {
        None => Verdict::NotMeasured,
        Some(x) => Verdict::compare(hypothesis, x, rhs, ENTROPY_SLACK),
    };
    ChainLink {
        name: name.into(),
        lhs,
        rhs,
        slack: lhs.map(|x| rhs - x),
        verdict,
    }
}

/// Chain `measured_S ≤ l^d s(T_c) ≤ s(0) l^d + F l^{d−1}` with each link
/// checked separately. `curve` supplies `u`, `s` and `c`; `model` is the
/// heat-capacity bound whose hypothesis is checked below `T_c`.
pub fn prop1_certify(
    inputs: &CertificateInputs,
    curve: &dyn ThermalModel,
    model: &HeatCapModel,
    source: HypothesisSource<'_>,
    monotone_shortcut: bool,
) -> Result<BoundCertificate> {
    let budget = inputs.energy_budget();
    let target = budget / inputs.l as f64;
    let t_c = solve_tc(curve, target)?;
    let samples: Vec<HeatSample> = match source {
        HypothesisSource::Curve { grid, refine } => hypothesis_grid(grid, t_c, refine)
            .into_iter()
            .map(|t| HeatSample { t, c: curve.specific_heat(t) })
            .collect(),
        HypothesisSource::Samples(s) => s.to_vec(),
    };
    let hypothesis = check_hypothesis(&samples, model, t_c, monotone_shortcut);
    let f = prop1_constant(model.regime, model.k, model.gamma, model.delta, budget, inputs.l)?;
    let s_at_tc = curve.entropy_density(t_c);
    let volume = (inputs.l as f64).powi(inputs.d as i32);
    let lemma2_rhs = volume * s_at_tc;
    let prop1 = prop1_rhs(f, inputs.s0, inputs.l, inputs.d);
    let (branch, integral) = integral_bound(model, t_c, target, || curve.energy_density(model.delta / model.gamma));
    let integral_rhs = volume * (inputs.s0 + integral);
    let links = vec![
        // u(T_c) ≥ target by construction, so the entropy hypothesis holds.
        link(LINK_MEASURED, true, inputs.measured_entropy, lemma2_rhs),
        link(LINK_PROP1, hypothesis.holds, Some(lemma2_rhs), prop1),
        link(LINK_INTEGRAL, hypothesis.holds, Some(lemma2_rhs), integral_rhs),
    ];
    let verdict = Verdict::combine(links.iter().map(|l| l.verdict));
    Ok(BoundCertificate {
        inputs: inputs.clone(),
        fit: *model,
        energy_budget: budget,
        energy_budget_bound: inputs.energy_budget_bound(),
        t_c,
        u_at_tc: target,
        s_at_tc,
        lemma2_rhs,
        prop1_constant: f,
        prop1_rhs: prop1,
        integral_bound: integral,
        branch,
        integral_rhs,
        hypothesis,
        links,
        verdict,
    })
}

/// Solve for `T_c` on the curve, fit the model class to the curve's `c(T)`
/// on the hypothesis grid, and certify.
pub fn prop1_from_curve(
    inputs: &CertificateInputs,
    curve: &dyn ThermalModel,
    user_grid: &[f64],
    refine: usize,
    regime: Regime,
    energy_scale: f64,
    monotone_shortcut: bool,
) -> Result<(HeatCapFit, BoundCertificate)> {
    let t_c = solve_tc(curve, inputs.energy_budget() / inputs.l as f64)?;
    let samples: Vec<HeatSample> = hypothesis_grid(user_grid, t_c, refine)
        .into_iter()
        .map(|t| HeatSample { t, c: curve.specific_heat(t) })
        .filter(|s| s.c > f64::MIN_POSITIVE && s.c.is_finite())
        .collect();
    let fitted = fit(&samples, regime, energy_scale)?;
    let cert = prop1_certify(
        inputs,
        curve,
        &fitted.model,
        HypothesisSource::Curve { grid: user_grid, refine },
        monotone_shortcut,
    )?;
    Ok((fitted, cert))
}
