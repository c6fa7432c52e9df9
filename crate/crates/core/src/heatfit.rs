//! Low-temperature heat-capacity models and upper-bound fits.
//!
//! Two model classes:
//!
//! * exponential: `c(T) = k (Δ/T)^γ e^{−Δ/T}`
//! * polynomial:  `c(T) = k (T/Δ)^γ`, with `Δ` a fixed energy scale
//!
//! Both are linear in log space. The exponential model reads
//! `log c = a − γ log T − Δ/T` with `a = log k + γ log Δ`, so the
//! least-squares problem is solved exactly as a weighted linear regression
//! with the bounds `γ ≥ 0`, `Δ > 0` enforced by an active set. The fitted
//! `k` is then inflated until the model dominates every sample, since the
//! certificates consume an inequality rather than a best fit.

use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::lemma::EnergyCurve;
use crate::bounds::prop::{prop1_certify, BoundCertificate, CertificateInputs, HypothesisSource, ThermalModel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Exponential,
    Polynomial,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(Regime::Exponential),
            "polynomial" => Ok(Regime::Polynomial),
            other => Err(Error::InvalidParameter(format!(
                "unknown regime '{other}' (expected exponential or polynomial)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatSample {
    pub t: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatCapModel {
    pub regime: Regime,
    pub k: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// `∫_a^b f` for a nonnegative integrand whose size is about `peak`.
fn integrate_nonneg(f: impl Fn(f64) -> f64, a: f64, b: f64, peak: f64) -> f64 {
    if !(peak > 0.0) || b <= a {
        return 0.0;
    }
    let coarse = quadrature::double_exponential::integrate(&f, a, b, 1e-10 * peak * (b - a)).integral;
    if !(coarse > 0.0) {
        return coarse.max(0.0);
    }
    quadrature::double_exponential::integrate(&f, a, b, 1e-14 * coarse).integral
}

impl HeatCapModel {
    pub fn exponential(k: f64, gamma: f64, delta: f64) -> Self {
        HeatCapModel {
            regime: Regime::Exponential,
            k,
            gamma,
            delta,
        }
    }

    pub fn polynomial(k: f64, gamma: f64, delta: f64) -> Self {
        HeatCapModel {
            regime: Regime::Polynomial,
            k,
            gamma,
            delta,
        }
    }

    pub fn log_c(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Exponential => self.k.ln() + self.gamma * (self.delta / t).ln() - self.delta / t,
            Regime::Polynomial => self.k.ln() + self.gamma * (t / self.delta).ln(),
        }
    }

    pub fn c(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.log_c(t).exp()
    }

    /// Where the exponential model peaks (`Δ/γ`), or `∞`.
    fn knee(&self) -> f64 {
        match self.regime {
            Regime::Exponential if self.gamma > 0.0 => self.delta / self.gamma,
            _ => f64::INFINITY,
        }
    }

    /// `∫_0^T c(t) dt`.
    pub fn energy(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Polynomial => self.k * self.delta / (self.gamma + 1.0) * (t / self.delta).powf(self.gamma + 1.0),
            Regime::Exponential => {
                let peak = self.c(t.min(self.knee()));
                integrate_nonneg(|x| self.c(x), 0.0, t, peak)
            }
        }
    }

    /// `∫_0^T c(t)/t dt`.
    pub fn entropy_increment(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Polynomial => self.k / self.gamma * (t / self.delta).powf(self.gamma),
            Regime::Exponential => {
                let knee = self.delta / (self.gamma + 1.0);
                let peak = self.c(t.min(knee)) / t.min(knee);
                integrate_nonneg(|x| if x > 0.0 { self.c(x) / x } else { 0.0 }, 0.0, t, peak)
            }
        }
    }

    /// `lim_{T→∞} ∫_0^T c`: `k Δ Γ(γ−1)` for the exponential model with
    /// `γ > 1`, infinite otherwise.
    pub fn energy_limit(&self) -> f64 {
        match self.regime {
            Regime::Exponential if self.gamma > 1.0 => {
                self.k * self.delta * statrs::function::gamma::gamma(self.gamma - 1.0)
            }
            _ => f64::INFINITY,
        }
    }

    /// `(k Δ^γ, γ)`, so that `c ≤ k' T^{−ν} e^{−Δ/T}` with `ν = γ`.
    pub fn arrhenius_form(&self) -> (f64, f64) {
        (self.k * self.delta.powf(self.gamma), self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatCapFit {
    pub model: HeatCapModel,
    /// `(T_min, T_max)` of the samples used.
    pub window: (f64, f64),
    pub n_samples: usize,
    /// Root-mean-square log residual of the least-squares fit.
    pub residual_rms: f64,
    /// Factor applied to `k` so that the model dominates every sample.
    pub inflation: f64,
    /// `min_i model(T_i)/c_i` after inflation; at least 1.
    pub slack: f64,
    /// Whether `γ` was pinned at its lower bound 0.
    pub gamma_at_bound: bool,
}

fn check_samples(samples: &[HeatSample], min: usize, what: &str) -> Result<()> {
    if samples.len() < min {
        return Err(Error::Fit(format!(
            "{what} fit needs at least {min} samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.t > 0.0 && s.c > 0.0) || !s.t.is_finite() || !s.c.is_finite()) {
        return Err(Error::Data(format!(
            "samples must have positive finite T and c, found T={}, c={}",
            bad.t, bad.c
        )));
    }
    Ok(())
}

/// Weighted least squares `min Σ w_i (x_i·β − y_i)²`.
fn weighted_lstsq(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<DVector<f64>> {
    let p = rows[0].len();
    let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j] * w[i].sqrt());
    let b = DVector::from_fn(rows.len(), |i, _| y[i] * w[i].sqrt());
    x.svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))
}

fn finish(model: HeatCapModel, samples: &[HeatSample], residual_rms: f64, gamma_at_bound: bool) -> HeatCapFit {
    let worst = samples
        .iter()
        .map(|s| s.c / model.c(s.t))
        .fold(0.0_f64, f64::max);
    let mut inflation = worst * (1.0 + 4.0 * f64::EPSILON);
    let mut inflated = HeatCapModel {
        k: model.k * inflation,
        ..model
    };
    while samples.iter().any(|s| inflated.c(s.t) < s.c) {
        inflation *= 1.0 + 4.0 * f64::EPSILON;
        inflated.k = model.k * inflation;
    }
    let slack = samples
        .iter()
        .map(|s| inflated.c(s.t) / s.c)
        .fold(f64::INFINITY, f64::min);
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), s| (a.min(s.t), b.max(s.t)));
    HeatCapFit {
        model: inflated,
        window: (lo, hi),
        n_samples: samples.len(),
        residual_rms,
        inflation,
        slack,
        gamma_at_bound,
    }
}

fn rms(rows: &[Vec<f64>], y: &[f64], beta: &DVector<f64>) -> f64 {
    let sum: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| (r.iter().zip(beta.iter()).map(|(a, b)| a * b).sum::<f64>() - yi).powi(2))
        .sum();
    (sum / y.len() as f64).sqrt()
}

pub fn fit_exponential(samples: &[HeatSample]) -> Result<HeatCapFit> {
    fit_exponential_weighted(samples, &vec![1.0; samples.len()])
}

/// Exponential fit with per-sample weights in log space.
pub fn fit_exponential_weighted(samples: &[HeatSample], weights: &[f64]) -> Result<HeatCapFit> {
    check_samples(samples, 4, "exponential")?;
    if weights.len() != samples.len() || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Fit("one positive weight per sample required".into()));
    }
    let y: Vec<f64> = samples.iter().map(|s| s.c.ln()).collect();
    let full: Vec<Vec<f64>> = samples.iter().map(|s| vec![1.0, -s.t.ln(), -1.0 / s.t]).collect();
    let beta = weighted_lstsq(&full, &y, weights)?;
    let (a, gamma, delta, at_bound, resid) = if beta[1] >= 0.0 {
        (beta[0], beta[1], beta[2], false, rms(&full, &y, &beta))
    } else {
        // γ pinned at 0: log c = log k − Δ/T
        let rows: Vec<Vec<f64>> = full.iter().map(|r| vec![r[0], r[2]]).collect();
        let b = weighted_lstsq(&rows, &y, weights)?;
        (b[0], 0.0, b[1], true, rms(&rows, &y, &b))
    };
    if !(delta > 0.0) {
        return Err(Error::Fit(format!(
            "exponential fit found no positive gap (Δ = {delta:e}); try the polynomial regime"
        )));
    }
    let k = (a - gamma * delta.ln()).exp();
    Ok(finish(HeatCapModel::exponential(k, gamma, delta), samples, resid, at_bound))
}

/// Polynomial fit with the energy scale `delta` held fixed.
pub fn fit_polynomial(samples: &[HeatSample], delta: f64) -> Result<HeatCapFit> {
    fit_polynomial_weighted(samples, delta, &vec![1.0; samples.len()])
}

pub fn fit_polynomial_weighted(samples: &[HeatSample], delta: f64, weights: &[f64]) -> Result<HeatCapFit> {
    check_samples(samples, 3, "polynomial")?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("energy scale must be positive, got {delta}")));
    }
    if weights.len() != samples.len() || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Fit("one positive weight per sample required".into()));
    }
    let y: Vec<f64> = samples.iter().map(|s| s.c.ln()).collect();
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| vec![1.0, (s.t / delta).ln()]).collect();
    let beta = weighted_lstsq(&rows, &y, weights)?;
    if !(beta[1] > 0.0) {
        return Err(Error::Fit(format!(
            "polynomial fit needs a positive exponent, got γ = {}",
            beta[1]
        )));
    }
    let model = HeatCapModel::polynomial(beta[0].exp(), beta[1], delta);
    Ok(finish(model, samples, rms(&rows, &y, &beta), false))
}

pub fn fit(samples: &[HeatSample], regime: Regime, energy_scale: f64) -> Result<HeatCapFit> {
    match regime {
        Regime::Exponential => fit_exponential(samples),
        Regime::Polynomial => fit_polynomial(samples, energy_scale),
    }
}

/// Parse `T,c` CSV data; lines starting with `#` are comments.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<HeatSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Data("empty input: expected header `T,c`".into()));
    }
    for (i, want) in ["T", "c"].iter().enumerate() {
        match headers.get(i) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(Error::Data(format!(
                    "header column {} is '{got}', expected '{want}'",
                    i + 1
                )))
            }
            None => return Err(Error::Data(format!("header is missing column '{want}'"))),
        }
    }
    if headers.len() > 2 {
        return Err(Error::Data(format!("unexpected header column '{}'", &headers[2])));
    }
    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {}: {e}", row + 1)))?;
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::Data(format!("row {}: column '{name}' value '{}' is not a number", row + 1, &record[i])))
        };
        samples.push(HeatSample {
            t: field(0, "T")?,
            c: field(1, "c")?,
        });
    }
    if samples.is_empty() {
        return Err(Error::Data("no samples after the header".into()));
    }
    Ok(samples)
}

/// The upper-bound thermodynamics implied by a fitted model:
/// `u(T) = ∫_0^T c`, `s(T) = s(0) + ∫_0^T c/t`.
#[derive(Clone, Copy, Debug)]
pub struct FittedCurve {
    pub model: HeatCapModel,
    pub s0: f64,
}

impl EnergyCurve for FittedCurve {
    fn energy_density(&self, t: f64) -> f64 {
        self.model.energy(t)
    }

    fn supremum(&self) -> f64 {
        self.model.energy_limit()
    }
}

impl ThermalModel for FittedCurve {
    fn entropy_density(&self, t: f64) -> f64 {
        self.s0 + self.model.entropy_increment(t)
    }

    fn specific_heat(&self, t: f64) -> f64 {
        self.model.c(t)
    }
}

/// Lattice geometry and non-thermodynamic inputs for a data-driven
/// certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataGeometry {
    pub d: usize,
    pub r: usize,
    pub l: usize,
    pub n: usize,
    /// Energy constant `C ≥ 1`.
    pub energy_constant: f64,
    pub h: f64,
    pub s0: f64,
}

pub const DATA_DRIVEN_NOTE: &str = "data-driven: entanglement side not measured";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataCertificate {
    pub fit: HeatCapFit,
    pub certificate: BoundCertificate,
}

/// Fit the samples inside `window` (all samples if `None`), then certify
/// from the fitted upper-bound curve. Every sample at or below `T_c`,
/// inside the window or not, must lie under the model.
pub fn certify_from_data(
    samples: &[HeatSample],
    geometry: &DataGeometry,
    regime: Regime,
    window: Option<(f64, f64)>,
    energy_scale: f64,
) -> Result<DataCertificate> {
    if geometry.l == 0 || geometry.n == 0 || geometry.d == 0 || !geometry.n.is_multiple_of(geometry.l) {
        return Err(Error::Divisibility {
            edge: geometry.l,
            size: geometry.n,
        });
    }
    if !(geometry.energy_constant >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "energy constant C must be ≥ 1, got {}",
            geometry.energy_constant
        )));
    }
    let in_window: Vec<HeatSample> = match window {
        Some((lo, hi)) => samples.iter().copied().filter(|s| s.t >= lo && s.t <= hi).collect(),
        None => samples.to_vec(),
    };
    let fitted = fit(&in_window, regime, energy_scale)?;
    let curve = FittedCurve {
        model: fitted.model,
        s0: geometry.s0,
    };
    let inputs = CertificateInputs {
        model_id: "data".into(),
        state_id: "unknown".into(),
        d: geometry.d,
        r: geometry.r,
        l: geometry.l,
        n: geometry.n,
        energy_constant: geometry.energy_constant,
        h: geometry.h,
        h_mode: None,
        boundary_count: crate::lattice::boundary_count(geometry.d, geometry.l, geometry.r),
        boundary_count_bound: crate::lattice::boundary_count_bound(geometry.d, geometry.l, geometry.r),
        s0: geometry.s0,
        ground_degeneracy: None,
        measured_entropy: None,
        note: Some(DATA_DRIVEN_NOTE.into()),
    };
    let certificate = prop1_certify(&inputs, &curve, &fitted.model, HypothesisSource::Samples(samples), false)?;
    Ok(DataCertificate {
        fit: fitted,
        certificate,
    })
}
