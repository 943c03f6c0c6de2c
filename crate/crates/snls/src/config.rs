//! Strict JSON experiment configuration.
//!
//! Unknown keys are rejected: a silent typo in a noise exponent would
//! invalidate hypothesis certification. Every default that resolution fills
//! in is recorded explicitly so the manifest carries the complete
//! configuration (re-running from a manifest reproduces the run).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{EquationParams, Hypothesis, NoiseSpec};
use crate::error::{Error, Result};
use crate::integrator::{SchemeConfig, SchemeId};
use crate::spectral::{Grid, SpectralField};

/// Experiment presets; each maps one verified property of the dynamics to a
/// concrete run with its own acceptance test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Global existence under certified noise: no threshold crossings.
    #[serde(rename = "no-blowup")]
    NoBlowup,
    /// Deterministic focusing baseline that does cross the threshold.
    #[serde(rename = "blowup-baseline")]
    BlowupBaseline,
    /// Exponential decay of the p-mean under noise certified for H5''.
    #[serde(rename = "decay")]
    Decay,
    /// Bounded time-averaged moments under noise certified for H5'.
    #[serde(rename = "stationary")]
    Stationary,
    /// Mass/energy conservation of the deterministic splitting integrator.
    #[serde(rename = "conservation")]
    Conservation,
    /// Hypothesis certification only; no simulation.
    #[serde(rename = "hypothesis-check")]
    HypothesisCheck,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::NoBlowup => "no-blowup",
            Preset::BlowupBaseline => "blowup-baseline",
            Preset::Decay => "decay",
            Preset::Stationary => "stationary",
            Preset::Conservation => "conservation",
            Preset::HypothesisCheck => "hypothesis-check",
        }
    }

    /// The hypothesis a preset needs certified before any path is simulated.
    pub fn required_hypothesis(&self) -> Option<Hypothesis> {
        match self {
            Preset::NoBlowup => Some(Hypothesis::H5),
            Preset::Decay => Some(Hypothesis::H5DoublePrime),
            Preset::Stationary => Some(Hypothesis::H5Prime),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    /// Nonlinearity power; validated as a positive integer.
    pub sigma: f64,
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    pub s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSection {
    pub variant: String,
    pub radius: f64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub a_floor: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default)]
    pub id: Option<String>,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub blowup_threshold: Option<f64>,
    #[serde(default)]
    pub record_stride: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_paths: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoserSection {
    pub budget: usize,
    pub seed: u64,
}

/// Initial data families.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// One of `modulated-cosine` (`A (1 + 0.5 cos x_1)`), `single-mode`
    /// (`A e_k`), `smooth-random` (seeded, exponentially decaying spectrum),
    /// `zero`.
    pub kind: String,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub mode: Option<i64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Raw configuration document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub dim: usize,
    pub truncation_n: u32,
    pub grid_points: usize,
    pub params: ParamsSection,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub lyapunov: Option<LyapunovSection>,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default)]
    pub moser: Option<MoserSection>,
    #[serde(default)]
    pub initial: Option<InitialSection>,
    /// Target for the `hypothesis-check` preset (`H5`, `H5'`, `H5''`).
    #[serde(default)]
    pub hypothesis: Option<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub per_path_csv: Option<bool>,
}

/// Fully resolved configuration: every default materialized, plus the list
/// of fields that were defaulted (`no silent defaults`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub preset: Preset,
    pub dim: usize,
    pub truncation_n: u32,
    pub grid_points: usize,
    pub params: ParamsSection,
    pub noise: Option<NoiseSpec>,
    pub lyapunov: Option<LyapunovSection>,
    pub scheme: SchemeSection,
    pub ensemble: EnsembleSection,
    pub moser: MoserSection,
    pub initial: InitialSection,
    pub hypothesis: Option<String>,
    pub output_dir: PathBuf,
    pub per_path_csv: bool,
    pub defaults_applied: Vec<String>,
}

/// Parse a strict JSON config. A saved manifest (recognized by its `config`
/// and `code_version` fields) is accepted too, so a run can be reproduced
/// directly from its manifest.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let config_value = match value.as_object() {
        Some(obj) if obj.contains_key("config") && obj.contains_key("code_version") => {
            let mut inner = obj["config"].clone();
            // A manifest embeds the resolved config, which carries one extra
            // bookkeeping field on top of the raw schema.
            if let Some(inner_obj) = inner.as_object_mut() {
                inner_obj.remove("defaults_applied");
            }
            inner
        }
        _ => value,
    };
    let cfg: ExperimentConfig = serde_json::from_value(config_value)
        .map_err(|e| Error::config("<document>", e.to_string()))?;
    Ok(cfg)
}

pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

impl ExperimentConfig {
    /// Validate cross-field invariants and materialize defaults.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let mut defaults = Vec::new();

        if !(1..=3).contains(&self.dim) {
            return Err(Error::config("dim", "dim must be 1, 2 or 3"));
        }
        if self.params.sigma < 1.0 || self.params.sigma.fract() != 0.0 {
            return Err(Error::config(
                "params.sigma",
                "sigma must be a positive integer",
            ));
        }
        if self.params.s <= self.dim as f64 / 2.0 {
            return Err(Error::config("params.s", "s must exceed d/2"));
        }
        if self.grid_points % 2 != 0 || self.grid_points < 2 * self.truncation_n as usize + 2 {
            return Err(Error::config(
                "grid_points",
                format!(
                    "need even N >= 2n + 2 = {}, got {}",
                    2 * self.truncation_n + 2,
                    self.grid_points
                ),
            ));
        }
        if let Some(noise) = &self.noise {
            NoiseSpec::new(noise.a, noise.b, noise.c, noise.d_exp)
                .map_err(|e| Error::config("noise", e.to_string()))?;
        }
        if let Some(lyap) = &self.lyapunov {
            match lyap.variant.as_str() {
                "log" | "power" => {}
                other => {
                    return Err(Error::config(
                        "lyapunov.variant",
                        format!("unknown variant `{other}` (expected `log` or `power`)"),
                    ))
                }
            }
            if lyap.variant == "power" {
                match lyap.p {
                    Some(p) if p > 0.0 && p < 1.0 => {}
                    _ => {
                        return Err(Error::config(
                            "lyapunov.p",
                            "power variant requires p in (0, 1)",
                        ))
                    }
                }
            }
        }
        if let Some(h) = &self.hypothesis {
            h.parse::<Hypothesis>()
                .map_err(|e| Error::config("hypothesis", e.to_string()))?;
        }

        // Preset-specific requirements.
        let needs_noise = matches!(
            self.preset,
            Preset::NoBlowup | Preset::Decay | Preset::Stationary | Preset::HypothesisCheck
        );
        if needs_noise && self.noise.is_none() {
            return Err(Error::config(
                "noise",
                format!("preset `{}` requires a noise block", self.preset.name()),
            ));
        }
        if matches!(self.preset, Preset::Decay | Preset::Stationary) {
            let p_ok = self
                .lyapunov
                .as_ref()
                .and_then(|l| l.p)
                .map(|p| p > 0.0 && p < 1.0)
                .unwrap_or(false);
            if !p_ok {
                return Err(Error::config(
                    "lyapunov.p",
                    format!(
                        "preset `{}` requires a lyapunov block with p in (0, 1)",
                        self.preset.name()
                    ),
                ));
            }
        }
        if matches!(self.preset, Preset::Conservation | Preset::BlowupBaseline)
            && self.noise.is_some()
        {
            return Err(Error::config(
                "noise",
                format!("preset `{}` is deterministic; drop the noise block", self.preset.name()),
            ));
        }

        let mut scheme = self.scheme.clone();
        if scheme.id.is_none() {
            let id = match self.preset {
                Preset::Conservation | Preset::BlowupBaseline => "strang-split-deterministic",
                // Noise presets default to the excursion-robust scheme.
                Preset::NoBlowup | Preset::Decay | Preset::Stationary => "split-step-geometric",
                _ => "exponential-euler-maruyama",
            };
            defaults.push(format!("scheme.id = \"{id}\""));
            scheme.id = Some(id.to_string());
        }
        match scheme.id.as_deref() {
            Some("strang-split-deterministic")
            | Some("exponential-euler-maruyama")
            | Some("split-step-geometric") => {}
            Some(other) => {
                return Err(Error::config(
                    "scheme.id",
                    format!("unknown scheme `{other}`"),
                ))
            }
            None => unreachable!(),
        }
        if scheme.record_stride.is_none() {
            defaults.push("scheme.record_stride = 10".into());
            scheme.record_stride = Some(10);
        }

        let ensemble = match &self.ensemble {
            Some(e) => {
                if e.n_paths == 0 {
                    return Err(Error::config("ensemble.n_paths", "need at least one path"));
                }
                e.clone()
            }
            None => {
                defaults.push("ensemble = { n_paths: 1, master_seed: 0 }".into());
                EnsembleSection {
                    n_paths: 1,
                    master_seed: 0,
                    workers: None,
                }
            }
        };

        let moser = match &self.moser {
            Some(m) => {
                if m.budget == 0 {
                    return Err(Error::config("moser.budget", "budget must be >= 1"));
                }
                m.clone()
            }
            None => {
                defaults.push("moser = { budget: 2000, seed: 1 }".into());
                MoserSection {
                    budget: 2000,
                    seed: 1,
                }
            }
        };

        let initial = match &self.initial {
            Some(i) => {
                match i.kind.as_str() {
                    "modulated-cosine" | "single-mode" | "smooth-random" | "zero" => {}
                    other => {
                        return Err(Error::config(
                            "initial.kind",
                            format!("unknown initial data kind `{other}`"),
                        ))
                    }
                }
                i.clone()
            }
            None => {
                defaults.push("initial = { kind: \"modulated-cosine\", amplitude: 1.0 }".into());
                InitialSection {
                    kind: "modulated-cosine".into(),
                    amplitude: Some(1.0),
                    mode: None,
                    seed: None,
                }
            }
        };

        let output_dir = match &self.output_dir {
            Some(d) => d.clone(),
            None => {
                let d = PathBuf::from(format!("out/{}", self.preset.name()));
                defaults.push(format!("output_dir = \"{}\"", d.display()));
                d
            }
        };

        let per_path_csv = match self.per_path_csv {
            Some(v) => v,
            None => {
                let v = ensemble.n_paths <= 32;
                defaults.push(format!("per_path_csv = {v} (auto: n_paths <= 32)"));
                v
            }
        };

        Ok(ResolvedConfig {
            preset: self.preset,
            dim: self.dim,
            truncation_n: self.truncation_n,
            grid_points: self.grid_points,
            params: self.params.clone(),
            noise: self.noise,
            lyapunov: self.lyapunov.clone(),
            scheme,
            ensemble,
            moser,
            initial,
            hypothesis: self.hypothesis.clone(),
            output_dir,
            per_path_csv,
            defaults_applied: defaults,
        })
    }
}

impl ResolvedConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.truncation_n, self.grid_points)
    }

    pub fn equation_params(&self) -> Result<EquationParams> {
        EquationParams::new(
            self.params.sigma as u32,
            Complex64::new(self.params.alpha_re, self.params.alpha_im),
            self.params.s,
            self.dim,
        )
    }

    pub fn scheme_id(&self) -> SchemeId {
        match self.scheme.id.as_deref() {
            Some("strang-split-deterministic") => SchemeId::StrangSplitDeterministic,
            Some("split-step-geometric") => SchemeId::SplitStepGeometric,
            _ => SchemeId::ExponentialEulerMaruyama,
        }
    }

    /// Scheme with the blow-up threshold resolved against the initial norm:
    /// `10^3 ||u0||_s` for no-blow-up style runs, `10 ||u0||_s` for the
    /// blow-up baseline, unless the config pins a value.
    pub fn scheme_config(&self, initial_hs_norm: f64) -> SchemeConfig {
        let threshold = self.scheme.blowup_threshold.unwrap_or(match self.preset {
            Preset::BlowupBaseline => 10.0 * initial_hs_norm,
            _ => 1e3 * initial_hs_norm.max(1e-12),
        });
        SchemeConfig {
            scheme: self.scheme_id(),
            dt: self.scheme.dt,
            horizon: self.scheme.horizon,
            blowup_threshold: threshold,
            record_stride: self.scheme.record_stride.unwrap_or(10),
        }
    }

    /// Build the configured initial field.
    pub fn initial_field(&self, grid: &Grid) -> Result<SpectralField> {
        let amplitude = self.initial.amplitude.unwrap_or(1.0);
        build_initial(
            grid,
            &self.initial.kind,
            amplitude,
            self.initial.mode,
            self.initial.seed,
        )
    }

    /// Explicit-step stability heuristic recorded in the manifest:
    /// `dt <= 0.1 / (|alpha| K m0^{2 sigma} + |f(u0)|^2)`.
    pub fn dt_rule_of_thumb(&self, k_hat: f64, u0: &SpectralField) -> Result<f64> {
        let params = self.equation_params()?;
        let m0 = u0.sup_norm();
        let drift_scale = params.alpha.norm() * k_hat * m0.powf(2.0 * params.sigma as f64);
        let noise_scale = match &self.noise {
            Some(spec) => spec.h(m0).norm_sqr(),
            None => 0.0,
        };
        Ok(0.1 / (drift_scale + noise_scale).max(1e-12))
    }
}

/// Construct one of the named initial-data families.
pub fn build_initial(
    grid: &Grid,
    kind: &str,
    amplitude: f64,
    mode: Option<i64>,
    seed: Option<u64>,
) -> Result<SpectralField> {
    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
    match kind {
        "zero" => Ok(SpectralField::zero(grid)),
        "single-mode" => {
            let k = mode.unwrap_or(1);
            let mut kv = vec![0i64; grid.dim()];
            kv[0] = k;
            Ok(SpectralField::basis_mode(grid, &kv)?.scaled(Complex64::new(amplitude, 0.0)))
        }
        "modulated-cosine" => {
            // A (1 + 0.5 cos x_1).
            let c0 = Complex64::new(TWO_PI.powf(grid.dim() as f64 / 2.0) * amplitude, 0.0);
            let c1 = c0 / 4.0;
            let mut plus = vec![0i64; grid.dim()];
            plus[0] = 1;
            let minus: Vec<i64> = plus.iter().map(|k| -k).collect();
            SpectralField::from_modes(
                grid,
                &[
                    (vec![0i64; grid.dim()], c0),
                    (plus, c1),
                    (minus, c1),
                ],
            )
        }
        "smooth-random" => {
            use rand::prelude::*;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed.unwrap_or(0));
            let mut field = SpectralField::zero(grid);
            let retained: Vec<u32> = grid.retained_indices().to_vec();
            let ksq = grid.ksq();
            for idx in retained {
                let i = idx as usize;
                let weight = (-0.8 * ksq[i].sqrt()).exp();
                let z = Complex64::new(
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                );
                field.coeffs_mut()[i] = z * weight * amplitude;
            }
            Ok(field)
        }
        other => Err(Error::config(
            "initial.kind",
            format!("unknown initial data kind `{other}`"),
        )),
    }
}
