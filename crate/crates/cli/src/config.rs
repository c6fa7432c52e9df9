//! Run configuration: a TOML file with `model`, `grid`, `regions`,
//! `certify`, `fit` and `output` tables.
//!
//! ```toml
//! [model]
//! name = "tfim"          # tfim | xxz | bose_hubbard
//! dim = 1
//! size = 8
//! boundary = "periodic"  # periodic | open
//! J = 1.0
//! g = 2.0
//!
//! [grid]
//! kind = "log"           # log | linear
//! min = 0.02
//! max = 20.0
//! points = 60
//!
//! [regions]
//! l = [2, 4]
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use arealaw::heatfit::Regime;
use arealaw::lattice::{Boundary, LatticeSpec};
use arealaw::models::{build_bose_hubbard, build_tfim, build_xxz, HamiltonianSpec};
use arealaw::thermo::log_grid;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub grid: GridBlock,
    pub regions: RegionsBlock,
    #[serde(default)]
    pub certify: CertifyBlock,
    #[serde(default)]
    pub fit: FitBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub name: Spanned<String>,
    #[serde(default = "one")]
    pub dim: Spanned<usize>,
    pub size: Spanned<usize>,
    #[serde(default = "periodic")]
    pub boundary: Spanned<String>,
    #[serde(rename = "J", default = "one_f")]
    pub j: f64,
    /// Transverse field (tfim).
    #[serde(default = "one_f")]
    pub g: f64,
    /// Anisotropy (xxz).
    #[serde(rename = "Delta", default = "one_f")]
    pub anisotropy: f64,
    /// On-site repulsion (bose_hubbard).
    #[serde(rename = "U", default = "one_f")]
    pub u: f64,
    /// Chemical potential (bose_hubbard).
    #[serde(default)]
    pub mu: f64,
    /// Fock truncation (bose_hubbard).
    #[serde(default)]
    pub n_max: Option<Spanned<usize>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "log_kind")]
    pub kind: Spanned<String>,
    pub min: Spanned<f64>,
    pub max: Spanned<f64>,
    pub points: Spanned<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsBlock {
    pub l: Spanned<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyBlock {
    #[serde(default = "yes")]
    pub lemma2: bool,
    #[serde(default = "yes")]
    pub prop1: bool,
    #[serde(default = "yes")]
    pub pepo: bool,
    /// Eigenstate index; omitted means the groundspace state.
    #[serde(default)]
    pub eigenstate: Option<Spanned<usize>>,
    /// Override of the energy constant `C`.
    #[serde(rename = "C", default)]
    pub energy_constant: Option<Spanned<f64>>,
    /// `min`, `covariance` or `operator_norm`.
    #[serde(default = "min_mode")]
    pub h_mode: Spanned<String>,
    /// `δ` values for the groundspace trace-norm bound.
    #[serde(default = "default_deltas")]
    pub delta: Spanned<Vec<f64>>,
    #[serde(default)]
    pub monotone_shortcut: bool,
}

impl Default for CertifyBlock {
    fn default() -> Self {
        CertifyBlock {
            lemma2: true,
            prop1: true,
            pepo: true,
            eigenstate: None,
            energy_constant: None,
            h_mode: Spanned::new(0..0, min_mode_str()),
            delta: Spanned::new(0..0, vec![0.5, 1.0]),
            monotone_shortcut: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    #[serde(default = "exp_regime")]
    pub regime: Spanned<String>,
    /// `[T_min, T_max]` of the fit window.
    #[serde(default)]
    pub window: Option<Spanned<Vec<f64>>>,
    #[serde(default = "one_f")]
    pub energy_scale: f64,
}

impl Default for FitBlock {
    fn default() -> Self {
        FitBlock {
            regime: Spanned::new(0..0, "exponential".into()),
            window: None,
            energy_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Used when `--out` is not given.
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn one() -> Spanned<usize> {
    Spanned::new(0..0, 1)
}
fn one_f() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn periodic() -> Spanned<String> {
    Spanned::new(0..0, "periodic".into())
}
fn log_kind() -> Spanned<String> {
    Spanned::new(0..0, "log".into())
}
fn min_mode_str() -> String {
    "min".into()
}
fn min_mode() -> Spanned<String> {
    Spanned::new(0..0, min_mode_str())
}
fn default_deltas() -> Spanned<Vec<f64>> {
    Spanned::new(0..0, vec![0.5, 1.0])
}
fn exp_regime() -> Spanned<String> {
    Spanned::new(0..0, "exponential".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HMode {
    Min,
    Covariance,
    OperatorNorm,
}

/// A parsed configuration plus its source, for line-precise messages.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub source: String,
    pub config: RunConfig,
}

fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: cannot read config: {e}", path.display())))?;
        Self::parse(path, source)
    }

    pub fn parse(path: &Path, source: String) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(&source).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let (l, c) = line_col(&source, s.start);
                    format!("{l}:{c}: ")
                })
                .unwrap_or_default();
            CliError::Validation(format!("{}:{at}{}", path.display(), e.message()))
        })?;
        let loaded = LoadedConfig {
            path: path.to_path_buf(),
            source,
            config,
        };
        loaded.validate()?;
        Ok(loaded)
    }

    fn err(&self, span: Range<usize>, msg: impl std::fmt::Display) -> CliError {
        if span.is_empty() && span.start == 0 {
            return CliError::Validation(format!("{}: {msg}", self.path.display()));
        }
        let (l, c) = line_col(&self.source, span.start);
        CliError::Validation(format!("{}:{l}:{c}: {msg}", self.path.display()))
    }

    fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        let m = &c.model;
        if !["tfim", "xxz", "bose_hubbard"].contains(&m.name.get_ref().as_str()) {
            return Err(self.err(m.name.span(), format!("unknown model '{}' (expected tfim, xxz or bose_hubbard)", m.name.get_ref())));
        }
        if !(1..=3).contains(m.dim.get_ref()) {
            return Err(self.err(m.dim.span(), "dim must be 1, 2 or 3"));
        }
        if *m.size.get_ref() < 1 {
            return Err(self.err(m.size.span(), "size must be at least 1"));
        }
        if !["periodic", "open"].contains(&m.boundary.get_ref().as_str()) {
            return Err(self.err(m.boundary.span(), "boundary must be 'periodic' or 'open'"));
        }
        if let Some(nm) = &m.n_max {
            if *nm.get_ref() < 1 {
                return Err(self.err(nm.span(), "n_max must be at least 1"));
            }
        }
        let g = &c.grid;
        if !["log", "linear"].contains(&g.kind.get_ref().as_str()) {
            return Err(self.err(g.kind.span(), "grid kind must be 'log' or 'linear'"));
        }
        if !(*g.min.get_ref() > 0.0) {
            return Err(self.err(g.min.span(), "temperature grid must be positive"));
        }
        if !(g.max.get_ref() > g.min.get_ref()) {
            return Err(self.err(g.max.span(), "grid max must exceed grid min"));
        }
        if *g.points.get_ref() < 2 {
            return Err(self.err(g.points.span(), "grid needs at least 2 points"));
        }
        let size = *m.size.get_ref();
        if c.regions.l.get_ref().is_empty() {
            return Err(self.err(c.regions.l.span(), "at least one region size l is required"));
        }
        for &l in c.regions.l.get_ref() {
            if l == 0 || !size.is_multiple_of(l) {
                return Err(self.err(c.regions.l.span(), format!("l = {l} does not divide the lattice size n = {size}")));
            }
        }
        if !["min", "covariance", "operator_norm"].contains(&c.certify.h_mode.get_ref().as_str()) {
            return Err(self.err(c.certify.h_mode.span(), "h_mode must be 'min', 'covariance' or 'operator_norm'"));
        }
        if let Some(cc) = &c.certify.energy_constant {
            if !(*cc.get_ref() >= 1.0) {
                return Err(self.err(cc.span(), "C must be at least 1"));
            }
        }
        for &d in c.certify.delta.get_ref() {
            if !(d > 0.0 && d <= 1.0) {
                return Err(self.err(c.certify.delta.span(), format!("delta = {d} outside (0, 1]")));
            }
        }
        if c.fit.regime.get_ref().parse::<Regime>().is_err() {
            return Err(self.err(c.fit.regime.span(), "regime must be 'exponential' or 'polynomial'"));
        }
        if let Some(w) = &c.fit.window {
            let v = w.get_ref();
            if v.len() != 2 || !(v[0] > 0.0 && v[1] > v[0]) {
                return Err(self.err(w.span(), "window must be [T_min, T_max] with 0 < T_min < T_max"));
            }
        }
        if !(c.fit.energy_scale > 0.0) {
            return Err(CliError::Validation(format!("{}: fit energy_scale must be positive", self.path.display())));
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn lattice(&self) -> Result<LatticeSpec, CliError> {
        let boundary = if self.model.boundary.get_ref() == "open" {
            Boundary::Open
        } else {
            Boundary::Periodic
        };
        Ok(LatticeSpec::new(*self.model.dim.get_ref(), *self.model.size.get_ref(), boundary)?)
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec, CliError> {
        let lat = self.lattice()?;
        let m = &self.model;
        Ok(match m.name.get_ref().as_str() {
            "tfim" => build_tfim(&lat, m.j, m.g),
            "xxz" => build_xxz(&lat, m.j, m.anisotropy),
            _ => build_bose_hubbard(&lat, m.j, m.u, m.mu, m.n_max.as_ref().map_or(2, |s| *s.get_ref()))?,
        })
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let (lo, hi, n) = (*self.grid.min.get_ref(), *self.grid.max.get_ref(), *self.grid.points.get_ref());
        if self.grid.kind.get_ref() == "linear" {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        } else {
            log_grid(lo, hi, n)
        }
    }

    pub fn regions(&self) -> &[usize] {
        self.regions.l.get_ref()
    }

    pub fn h_mode(&self) -> HMode {
        match self.certify.h_mode.get_ref().as_str() {
            "covariance" => HMode::Covariance,
            "operator_norm" => HMode::OperatorNorm,
            _ => HMode::Min,
        }
    }

    pub fn regime(&self) -> Regime {
        self.fit.regime.get_ref().parse().unwrap_or(Regime::Exponential)
    }

    pub fn fit_window(&self) -> Option<(f64, f64)> {
        self.fit.window.as_ref().map(|w| (w.get_ref()[0], w.get_ref()[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[model]\nname = \"tfim\"\nsize = 8\ng = 2.0\n\n[grid]\nmin = 0.05\nmax = 10.0\npoints = 20\n\n[regions]\nl = [2, 4]\n";

    fn parse(s: &str) -> Result<LoadedConfig, CliError> {
        LoadedConfig::parse(Path::new("run.toml"), s.to_string())
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse(BASE).unwrap().config;
        assert_eq!(c.temperatures().len(), 20);
        assert_eq!(c.regions(), &[2, 4]);
        assert_eq!(c.h_mode(), HMode::Min);
        assert_eq!(c.regime(), Regime::Exponential);
        assert_eq!(c.hamiltonian().unwrap().num_sites(), 8);
    }

    #[test]
    fn divisibility_error_names_the_line() {
        let err = parse(&BASE.replace("l = [2, 4]", "l = [3]")).unwrap_err().to_string();
        assert!(err.contains("run.toml:12:5"), "{err}");
        assert!(err.contains("does not divide"), "{err}");
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let err = parse(&BASE.replace("g = 2.0", "g = 2.0\nfoo = 1")).unwrap_err().to_string();
        assert!(err.contains("run.toml:5:"), "{err}");
        let err = parse(&BASE.replace("min = 0.05", "min = -1.0")).unwrap_err().to_string();
        assert!(err.contains("run.toml:7:"), "{err}");
        let err = parse(&BASE.replace("\"tfim\"", "\"potts\"")).unwrap_err().to_string();
        assert!(err.contains("run.toml:2:") && err.contains("potts"), "{err}");
    }
}
