//! Plain-text experiment config: `[section]` headers with `key = value`
//! lines, `#` comments. Sections: `[dgp]`, `[adversary]`, `[estimator]`,
//! `[mc]`. Schema errors carry the offending line number.

use std::collections::HashMap;

use crate::estimate::{Aggregator, BandwidthRule, Kernel};
use crate::mc::{EstimatorSettings, ExperimentConfig, Scenario};
use crate::model::{CovariateLaw, Dgp, ForcingLaw, MeanFunction, NoiseLaw};
use crate::{Error, Result};

/// Typed, fully resolved config. Built from a config file or from the
/// built-in benchmarks; renders back to the same text format.
#[derive(Debug, Clone)]
pub struct ConfigSpec {
    pub scenario: Scenario,
    pub support: (f64, f64),
    pub cutoff: f64,
    /// Baseline polynomial, constant coefficient first, in `x - cutoff`.
    pub base: Vec<f64>,
    pub jump: f64,
    pub kink: f64,
    /// Bunching only: weight of the point mass at zero.
    pub atom_weight: Option<f64>,
    /// Bunching only: per-level gaps at zero.
    pub tau: Vec<f64>,
    pub level_shifts: Vec<f64>,
    pub level_probs: Vec<f64>,
    pub noise: NoiseLaw,
    pub m0: f64,
    pub k_list: Vec<u64>,
    pub bandwidth: BandwidthRule,
    pub kernel: Kernel,
    pub degree: usize,
    pub aggregator: Aggregator,
    pub n: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: Option<u64>,
}

fn scenario_from(s: &str) -> Option<Scenario> {
    match s {
        "rdd" => Some(Scenario::Rdd),
        "rkd" => Some(Scenario::Rkd),
        "bunching" => Some(Scenario::Bunching),
        _ => None,
    }
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::Rdd => "rdd",
        Scenario::Rkd => "rkd",
        Scenario::Bunching => "bunching",
    }
}

fn kernel_from(s: &str) -> Option<Kernel> {
    match s {
        "triangular" => Some(Kernel::Triangular),
        "uniform" => Some(Kernel::Uniform),
        "epanechnikov" => Some(Kernel::Epanechnikov),
        _ => None,
    }
}

fn kernel_name(k: Kernel) -> &'static str {
    match k {
        Kernel::Triangular => "triangular",
        Kernel::Uniform => "uniform",
        Kernel::Epanechnikov => "epanechnikov",
    }
}

fn aggregator_from(s: &str) -> Option<Aggregator> {
    match s {
        "mean-abs" => Some(Aggregator::MeanAbs),
        "rms" => Some(Aggregator::Rms),
        "sup" => Some(Aggregator::Sup),
        _ => None,
    }
}

fn aggregator_name(a: Aggregator) -> &'static str {
    match a {
        Aggregator::MeanAbs => "mean-abs",
        Aggregator::Rms => "rms",
        Aggregator::Sup => "sup",
    }
}

struct RawConfig {
    /// (section, key) -> (line number, value)
    entries: HashMap<(String, String), (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Config {
                        line: line_no,
                        msg: format!("malformed section header '{line}'"),
                    });
                }
                section = line[1..line.len() - 1].trim().to_string();
                if !["dgp", "adversary", "estimator", "mc"].contains(&section.as_str()) {
                    return Err(Error::Config {
                        line: line_no,
                        msg: format!("unknown section '{section}'"),
                    });
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: line_no,
                    msg: format!("expected 'key = value', got '{line}'"),
                });
            };
            if section.is_empty() {
                return Err(Error::Config {
                    line: line_no,
                    msg: "key outside of any [section]".into(),
                });
            }
            let key = key.trim().to_string();
            let prev = entries
                .insert((section.clone(), key.clone()), (line_no, value.trim().to_string()));
            if prev.is_some() {
                return Err(Error::Config {
                    line: line_no,
                    msg: format!("duplicate key '{key}' in [{section}]"),
                });
            }
        }
        Ok(Self { entries })
    }

    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn required(&self, section: &str, key: &str) -> Result<&(usize, String)> {
        self.get(section, key).ok_or_else(|| Error::Config {
            line: 0,
            msg: format!("missing required key '{key}' in [{section}]"),
        })
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::Config {
        line,
        msg: format!("'{key}' expects a number, got '{v}'"),
    })
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::Config {
        line,
        msg: format!("'{key}' expects a nonnegative integer, got '{v}'"),
    })
}

fn parse_f64_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split_whitespace().map(|t| parse_f64(line, key, t)).collect()
}

impl ConfigSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;

        let (line, value) = raw.required("dgp", "scenario")?;
        let scenario = scenario_from(value).ok_or_else(|| Error::Config {
            line: *line,
            msg: format!("scenario must be rdd, rkd or bunching, got '{value}'"),
        })?;

        let cutoff = match raw.get("dgp", "cutoff") {
            Some((l, v)) => parse_f64(*l, "cutoff", v)?,
            None => 0.0,
        };
        let base = match raw.get("dgp", "base") {
            Some((l, v)) => parse_f64_list(*l, "base", v)?,
            None => vec![0.0, 1.0],
        };
        let jump = match raw.get("dgp", "jump") {
            Some((l, v)) => parse_f64(*l, "jump", v)?,
            None => 0.0,
        };
        let kink = match raw.get("dgp", "kink") {
            Some((l, v)) => parse_f64(*l, "kink", v)?,
            None => 0.0,
        };

        let (support, atom_weight, tau, level_shifts, level_probs) = match scenario {
            Scenario::Bunching => {
                let (l, v) = raw.required("dgp", "xbar")?;
                let xbar = parse_f64(*l, "xbar", v)?;
                let (l, v) = raw.required("dgp", "atom_weight")?;
                let weight = parse_f64(*l, "atom_weight", v)?;
                let (l, v) = raw.required("dgp", "tau")?;
                let tau = parse_f64_list(*l, "tau", v)?;
                let shifts = match raw.get("dgp", "level_shifts") {
                    Some((l, v)) => parse_f64_list(*l, "level_shifts", v)?,
                    None => vec![0.0; tau.len()],
                };
                let probs = match raw.get("dgp", "level_probs") {
                    Some((l, v)) => parse_f64_list(*l, "level_probs", v)?,
                    None => vec![1.0 / tau.len() as f64; tau.len()],
                };
                ((0.0, xbar), Some(weight), tau, shifts, probs)
            }
            _ => {
                let (l, v) = raw.required("dgp", "support")?;
                let s = parse_f64_list(*l, "support", v)?;
                if s.len() != 2 {
                    return Err(Error::Config {
                        line: *l,
                        msg: "'support' expects two numbers: lo hi".into(),
                    });
                }
                ((s[0], s[1]), None, vec![], vec![], vec![])
            }
        };

        let noise = match raw.get("dgp", "noise") {
            None => NoiseLaw::Normal { sigma: 0.5 },
            Some((l, v)) => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                match parts.as_slice() {
                    ["normal", sigma] => {
                        NoiseLaw::Normal { sigma: parse_f64(*l, "noise", sigma)? }
                    }
                    ["student", df, sigma] => NoiseLaw::StudentT {
                        df: parse_f64(*l, "noise", df)?,
                        sigma: parse_f64(*l, "noise", sigma)?,
                    },
                    _ => {
                        return Err(Error::Config {
                            line: *l,
                            msg: format!(
                                "'noise' expects 'normal SIGMA' or 'student DF SIGMA', got '{v}'"
                            ),
                        })
                    }
                }
            }
        };

        let m0 = match raw.get("adversary", "m0") {
            Some((l, v)) => parse_f64(*l, "m0", v)?,
            None => 0.0,
        };
        let (l, v) = raw.required("adversary", "k")?;
        let k_list: Vec<u64> = v
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Config {
                    line: *l,
                    msg: format!("'k' expects positive integers, got '{t}'"),
                })
            })
            .collect::<Result<_>>()?;

        let bandwidth = match raw.get("estimator", "bandwidth") {
            None => BandwidthRule::Rot,
            Some((l, v)) => {
                if *v == "rot" {
                    BandwidthRule::Rot
                } else {
                    BandwidthRule::Fixed(parse_f64(*l, "bandwidth", v)?)
                }
            }
        };
        let kernel = match raw.get("estimator", "kernel") {
            None => Kernel::Triangular,
            Some((l, v)) => kernel_from(v).ok_or_else(|| Error::Config {
                line: *l,
                msg: format!("unknown kernel '{v}'"),
            })?,
        };
        let degree = match raw.get("estimator", "degree") {
            Some((l, v)) => parse_usize(*l, "degree", v)?,
            None => 1,
        };
        let aggregator = match raw.get("estimator", "aggregator") {
            None => Aggregator::MeanAbs,
            Some((l, v)) => aggregator_from(v).ok_or_else(|| Error::Config {
                line: *l,
                msg: format!("unknown aggregator '{v}'"),
            })?,
        };

        let (l, v) = raw.required("mc", "n")?;
        let n = parse_usize(*l, "n", v)?;
        let (l, v) = raw.required("mc", "reps")?;
        let reps = parse_usize(*l, "reps", v)?;
        let alpha = match raw.get("mc", "alpha") {
            Some((l, v)) => parse_f64(*l, "alpha", v)?,
            None => 0.05,
        };
        let seed = match raw.get("mc", "seed") {
            Some((l, v)) => Some(parse_usize(*l, "seed", v)? as u64),
            None => None,
        };

        Ok(Self {
            scenario,
            support,
            cutoff,
            base,
            jump,
            kink,
            atom_weight,
            tau,
            level_shifts,
            level_probs,
            noise,
            m0,
            k_list,
            bandwidth,
            kernel,
            degree,
            aggregator,
            n,
            reps,
            alpha,
            seed,
        })
    }

    /// Built-in benchmark for a scenario.
    pub fn benchmark(scenario: Scenario) -> Self {
        let k_list = vec![1, 2, 5, 10, 50, 100, 10_000];
        let mut spec = Self {
            scenario,
            support: (-1.0, 1.0),
            cutoff: 0.0,
            base: vec![0.0, 1.0],
            jump: 0.0,
            kink: 0.0,
            atom_weight: None,
            tau: vec![],
            level_shifts: vec![],
            level_probs: vec![],
            noise: NoiseLaw::Normal { sigma: 0.5 },
            m0: 0.0,
            k_list,
            bandwidth: BandwidthRule::Fixed(0.25),
            kernel: Kernel::Triangular,
            degree: 1,
            aggregator: Aggregator::MeanAbs,
            n: 500,
            reps: 2000,
            alpha: 0.05,
            seed: None,
        };
        match scenario {
            Scenario::Rdd => spec.jump = 1.0,
            Scenario::Rkd => spec.kink = 2.0,
            Scenario::Bunching => {
                spec.support = (0.0, 1.0);
                spec.atom_weight = Some(0.2);
                spec.tau = vec![1.0, 1.0];
                spec.level_shifts = vec![0.0, 0.5];
                spec.level_probs = vec![0.5, 0.5];
                // the window (0, 1/k) must stay inside (0, 1]; all ks fit
            }
        }
        spec
    }

    /// Build the runnable experiment; `seed_override` wins over the config's
    /// own seed, and 42 is the final default.
    pub fn to_experiment(&self, seed_override: Option<u64>) -> Result<ExperimentConfig> {
        let mean = match self.scenario {
            Scenario::Bunching => {
                let mut m = MeanFunction::new(
                    self.base.clone(),
                    self.base.clone(),
                    self.cutoff,
                    self.support,
                )?;
                if !self.level_shifts.iter().all(|&s| s == 0.0) || self.level_shifts.len() > 1 {
                    m = m.with_level_shifts(self.level_shifts.clone())?;
                }
                m.with_atom_tau(self.tau.clone())?
            }
            _ => MeanFunction::with_jump(
                self.base.clone(),
                self.jump,
                self.kink,
                self.cutoff,
                self.support,
            )?,
        };
        let (xlaw, wlaw) = match self.scenario {
            Scenario::Bunching => (
                ForcingLaw::BunchedUniform {
                    atom_weight: self.atom_weight.unwrap_or(0.2),
                    hi: self.support.1,
                },
                Some(CovariateLaw::new(self.level_probs.clone())?),
            ),
            _ => (
                ForcingLaw::Uniform { lo: self.support.0, hi: self.support.1 },
                None,
            ),
        };
        let q = Dgp::new(
            mean,
            xlaw,
            wlaw,
            self.noise.clone(),
            scenario_name(self.scenario),
        )?;
        let config = ExperimentConfig {
            scenario: self.scenario,
            q,
            m0: self.m0,
            k_list: self.k_list.clone(),
            n: self.n,
            reps: self.reps,
            alpha: self.alpha,
            estimator: EstimatorSettings {
                bandwidth: self.bandwidth,
                kernel: self.kernel,
                degree: self.degree,
                aggregator: self.aggregator,
            },
            master_seed: seed_override.or(self.seed).unwrap_or(42),
        };
        config.validate()?;
        Ok(config)
    }

    /// Render the fully resolved config, defaults included.
    pub fn render(&self, resolved_seed: u64) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| {
            v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
        };
        out.push_str("[dgp]\n");
        out.push_str(&format!("scenario = {}\n", scenario_name(self.scenario)));
        match self.scenario {
            Scenario::Bunching => {
                out.push_str(&format!("xbar = {}\n", self.support.1));
                out.push_str(&format!("atom_weight = {}\n", self.atom_weight.unwrap_or(0.2)));
                out.push_str(&format!("tau = {}\n", list(&self.tau)));
                out.push_str(&format!("level_shifts = {}\n", list(&self.level_shifts)));
                out.push_str(&format!("level_probs = {}\n", list(&self.level_probs)));
            }
            _ => {
                out.push_str(&format!("support = {} {}\n", self.support.0, self.support.1));
                out.push_str(&format!("jump = {}\n", self.jump));
                out.push_str(&format!("kink = {}\n", self.kink));
            }
        }
        out.push_str(&format!("cutoff = {}\n", self.cutoff));
        out.push_str(&format!("base = {}\n", list(&self.base)));
        match &self.noise {
            NoiseLaw::Normal { sigma } => out.push_str(&format!("noise = normal {sigma}\n")),
            NoiseLaw::StudentT { df, sigma } => {
                out.push_str(&format!("noise = student {df} {sigma}\n"))
            }
        }
        out.push_str("\n[adversary]\n");
        out.push_str(&format!("m0 = {}\n", self.m0));
        out.push_str(&format!(
            "k = {}\n",
            self.k_list.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ")
        ));
        out.push_str("\n[estimator]\n");
        match self.bandwidth {
            BandwidthRule::Fixed(h) => out.push_str(&format!("bandwidth = {h}\n")),
            BandwidthRule::Rot => out.push_str("bandwidth = rot\n"),
        }
        out.push_str(&format!("kernel = {}\n", kernel_name(self.kernel)));
        out.push_str(&format!("degree = {}\n", self.degree));
        out.push_str(&format!("aggregator = {}\n", aggregator_name(self.aggregator)));
        out.push_str("\n[mc]\n");
        out.push_str(&format!("n = {}\n", self.n));
        out.push_str(&format!("reps = {}\n", self.reps));
        out.push_str(&format!("alpha = {}\n", self.alpha));
        out.push_str(&format!("seed = {resolved_seed}\n"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[dgp]
scenario = rdd
support = -1 1
jump = 1

[adversary]
k = 2 10

[mc]
n = 300
reps = 200
";

    #[test]
    fn minimal_config_fills_defaults() {
        let spec = ConfigSpec::parse(MINIMAL).unwrap();
        assert_eq!(spec.alpha, 0.05);
        assert_eq!(spec.kernel, Kernel::Triangular);
        assert_eq!(spec.degree, 1);
        assert_eq!(spec.m0, 0.0);
        let rendered = spec.render(42);
        assert!(rendered.contains("alpha = 0.05"));
        assert!(rendered.contains("seed = 42"));
        // the rendered config parses back to the same experiment
        let again = ConfigSpec::parse(&rendered).unwrap();
        assert_eq!(again.k_list, spec.k_list);
        assert_eq!(again.alpha, spec.alpha);
        spec.to_experiment(Some(1)).unwrap();
    }

    #[test]
    fn line_numbers_in_errors() {
        let bad = MINIMAL.replace("support = -1 1", "support = -1 one");
        match ConfigSpec::parse(&bad) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected config error, got {other:?}"),
        }
        match ConfigSpec::parse("junk line\n") {
            Err(Error::Config { line: 1, .. }) => {}
            other => panic!("expected line-1 error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_window_names_the_offending_k() {
        let spec = ConfigSpec::parse(&MINIMAL.replace("k = 2 10", "k = 1 10")).unwrap();
        // support [-1, 1] fits k = 1; shrink it so the window exits
        let mut narrow = spec.clone();
        narrow.support = (-0.5, 1.0);
        let err = narrow.to_experiment(None).unwrap_err();
        assert!(err.to_string().contains("k = 1"), "{err}");
    }

    #[test]
    fn benchmark_specs_build() {
        for scenario in [Scenario::Rdd, Scenario::Rkd, Scenario::Bunching] {
            let spec = ConfigSpec::benchmark(scenario);
            let config = spec.to_experiment(Some(42)).unwrap();
            assert_eq!(config.master_seed, 42);
            assert_eq!(config.reps, 2000);
        }
    }

    #[test]
    fn bunching_config_parses() {
        let text = "\
[dgp]
scenario = bunching
xbar = 1
atom_weight = 0.2
tau = 1 1
level_shifts = 0 0.5
noise = student 5 0.5

[adversary]
m0 = 0
k = 4 8

[mc]
n = 400
reps = 150
";
        let spec = ConfigSpec::parse(text).unwrap();
        assert_eq!(spec.level_probs, vec![0.5, 0.5]);
        spec.to_experiment(None).unwrap();
    }
}
