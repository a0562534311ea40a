//! Flat `key = value` study configuration. Lists are comma-separated and `#`
//! starts a comment. Errors carry the 1-based line number where one applies.
//!
//! ```text
//! model = sub1
//! theta1 = 2
//! theta3 = 3
//! sample_sizes = 20, 30, 50, 100, 200, 500
//! priors = independent, improper, pseudo
//! psi2 = 1, 0, 7
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::conjugate::PriorSpec;
use crate::distributions::{GammaParams, ModelVariant, PseudoExpParams};
use crate::error::{Error, Result};
use crate::fit::ChainSettings;
use crate::posterior::FitPrior;
use crate::pseudo_gamma::PseudoGammaPrior;
use crate::study::{default_true_params, LabeledPrior, StudyConfig};

const KEYS: &[&str] = &[
    "model",
    "theta1",
    "theta2",
    "theta3",
    "sample_sizes",
    "replications",
    "seed",
    "kept_draws",
    "thinning",
    "burn_in",
    "level",
    "priors",
    "alpha1",
    "beta1",
    "alpha2",
    "beta2",
    "alpha3",
    "beta3",
    "tau1",
    "tau2",
    "psi1",
    "psi2",
    "psi3",
];

struct Entries(BTreeMap<String, (usize, String)>);

fn err(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(Some(line), format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(err(Some(line), format!("unknown key `{key}`")));
            }
            if let Some((first, _)) = map.get(&key) {
                return Err(err(Some(line), format!("duplicate key `{key}` (first set at line {first})")));
            }
            map.insert(key, (line, value.trim().to_string()));
        }
        Ok(Entries(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| err(Some(*line), format!("cannot parse `{key}` value `{v}`"))),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| err(None, format!("missing required key `{key}`")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse()
                        .map_err(|_| err(Some(*line), format!("cannot parse `{key}` item `{item}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.0.get(key).map(|(l, _)| *l)
    }

    /// Re-labels a library error with the line of the key that caused it.
    fn at<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| err(self.line(key), e.to_string()))
    }
}

fn true_params(e: &Entries, variant: ModelVariant) -> Result<PseudoExpParams> {
    let d = default_true_params(variant);
    let t1 = e.or("theta1", d.theta1)?;
    let t3 = e.or("theta3", d.theta3)?;
    let t2: Option<f64> = e.get("theta2")?;
    let r = match variant {
        ModelVariant::Full => PseudoExpParams::new(t1, t2.unwrap_or(d.theta2), t3),
        ModelVariant::SubModelI => match t2 {
            Some(v) if v != t3 => Err(Error::Constraint(format!(
                "sub-model I fixes theta2 = theta3, got theta2 = {v}, theta3 = {t3}"
            ))),
            _ => PseudoExpParams::sub_model_one(t1, t3),
        },
        ModelVariant::SubModelII => match t2 {
            Some(_) => Err(Error::Constraint("sub-model II fixes theta2 = 0; remove the key".into())),
            None => PseudoExpParams::sub_model_two(t1, t3),
        },
    };
    let key = if t2.is_some() { "theta2" } else { "theta1" };
    e.at(key, r)
}

fn priors(e: &Entries, variant: ModelVariant) -> Result<Vec<LabeledPrior>> {
    let kinds: Vec<String> = e
        .list("priors")?
        .unwrap_or_else(|| vec!["independent".into(), "improper".into(), "pseudo".into()]);
    let gamma = |a: &str, b: &str, da: f64, db: f64| -> Result<GammaParams> {
        let r = GammaParams::new(e.or(a, da)?, e.or(b, db)?);
        e.at(a, r)
    };
    let theta2 = match variant {
        ModelVariant::Full => Some(gamma("alpha2", "beta2", 3.0, 1.0)?),
        _ => None,
    };
    let psi2s: Vec<f64> = e.list("psi2")?.unwrap_or_else(|| vec![1.0, 0.0, 7.0]);
    let mut out = Vec::new();
    for kind in &kinds {
        match kind.as_str() {
            "independent" => out.push(LabeledPrior {
                label: "IGP".into(),
                prior: FitPrior::Conjugate {
                    spec: PriorSpec::IndependentGamma {
                        theta1: gamma("alpha1", "beta1", 2.0, 2.0)?,
                        theta2,
                        theta3: gamma("alpha3", "beta3", 4.0, 5.0)?,
                    },
                },
            }),
            "improper" => out.push(LabeledPrior {
                label: "ImP".into(),
                prior: FitPrior::Conjugate {
                    spec: PriorSpec::Improper,
                },
            }),
            "pseudo" => {
                for (i, &psi2) in psi2s.iter().enumerate() {
                    let p = PseudoGammaPrior::new(
                        e.or("tau1", 2.0)?,
                        e.or("tau2", 4.0)?,
                        e.or("psi1", 2.0)?,
                        psi2,
                        e.or("psi3", 3.0)?,
                    );
                    out.push(LabeledPrior {
                        label: format!("PGP{}", i + 1),
                        prior: FitPrior::Pseudo {
                            prior: e.at("psi2", p)?,
                            theta2,
                        },
                    });
                }
            }
            other => {
                return Err(err(
                    e.line("priors"),
                    format!("unknown prior `{other}` (expected independent, improper, or pseudo)"),
                ))
            }
        }
    }
    if out.is_empty() {
        return Err(err(e.line("priors"), "the prior list is empty"));
    }
    Ok(out)
}

/// Parses a study configuration. `model` and `sample_sizes` are required;
/// every other key falls back to the built-in study defaults.
pub fn parse_study_config(text: &str) -> Result<StudyConfig> {
    let e = Entries::parse(text)?;
    let variant: ModelVariant = e.require("model")?;
    let sample_sizes: Vec<usize> = e
        .list("sample_sizes")?
        .ok_or_else(|| err(None, "missing required key `sample_sizes`"))?;
    let d = ChainSettings::default();
    let config = StudyConfig {
        variant,
        true_params: true_params(&e, variant)?,
        sample_sizes,
        priors: priors(&e, variant)?,
        replications: e.or("replications", 1)?,
        chain: ChainSettings {
            kept_draws: e.or("kept_draws", d.kept_draws)?,
            thinning: e.or("thinning", d.thinning)?,
            burn_in: e.or("burn_in", d.burn_in)?,
        },
        level: e.or("level", 0.95)?,
        seed: e.or("seed", 0)?,
    };
    config
        .validate()
        .map_err(|x| err(None, x.to_string()))?;
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(err(e.line("level"), "level must lie in (0, 1)"));
    }
    if config.chain.thinning == 0 || config.chain.kept_draws < 2 {
        return Err(err(None, "need thinning >= 1 and kept_draws >= 2"));
    }
    Ok(config)
}
