use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rules::{MachinePolicy, Rule, RuleParams};
use crate::sa::{SaParams, Structure};

/// A solver configuration as run by the experiment harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Lta(RuleParams<f64>),
    /// Annealing started from the list treatment result of `initial`.
    Sa {
        params: SaParams,
        initial: RuleParams<f64>,
    },
}

impl Algorithm {
    pub fn lta(rule: Rule) -> Self {
        let policy = if rule == Rule::Lfo {
            MachinePolicy::Lfm
        } else {
            MachinePolicy::Ffm
        };
        Algorithm::Lta(RuleParams::new(rule, policy))
    }

    pub fn sa(structure: Structure) -> Self {
        Algorithm::Sa {
            params: SaParams::new(structure),
            initial: RuleParams::default(),
        }
    }

    /// Row label, e.g. `atcoee.10.1`, `lfm_lfo` or `OP+PA SA 0.95`.
    pub fn label(&self) -> String {
        match self {
            Algorithm::Lta(p) => {
                let base = match p.rule {
                    Rule::Atcs | Rule::Atcoee => format!("{}.{}.{}", p.rule, p.k1, p.k2),
                    Rule::Atcoeef => format!("{}.{}.{}.{}", p.rule, p.k1, p.k2, p.k3),
                    r => r.name().to_string(),
                };
                if p.rule != Rule::Lfo && p.machine_policy == MachinePolicy::Ffm {
                    base
                } else {
                    format!("{}_{}", p.machine_policy, base)
                }
            }
            Algorithm::Sa { params, .. } => {
                let name = match params.structure {
                    Structure::Simple => "SIMPLE",
                    Structure::Op => "OP",
                    Structure::OpPa => "OP+PA",
                };
                format!("{name} SA {}", params.cooling)
            }
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Accepts short names (`atcoee`, `lfm_lfo`, `op_pa_sa`), dotted parameters
/// (`atcoee.1.1`, `atcoeef.10.1.10`, `op_sa.0.98`) and row labels (`OP+PA SA 0.95`).
impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown algorithm `{s}`"));
        let norm = s.trim().to_ascii_lowercase().replace('+', "_");
        let norm = match norm.split_once(" sa ") {
            Some((structure, cooling)) => format!("{structure}_sa.{cooling}"),
            None => norm.replace(' ', "_"),
        };
        let mut parts = norm.splitn(2, '.');
        let head = parts.next().unwrap_or_default();
        let numbers: Vec<f64> = match parts.next() {
            Some(rest) => {
                // cooling factors contain a dot themselves
                if head.ends_with("_sa") {
                    vec![rest.parse().map_err(|_| bad())?]
                } else {
                    rest.split('.')
                        .map(|x| x.parse().map_err(|_| bad()))
                        .collect::<Result<_>>()?
                }
            }
            None => Vec::new(),
        };
        if let Some(structure) = head.strip_suffix("_sa") {
            let mut alg = Algorithm::sa(structure.parse().map_err(|_| bad())?);
            if let (Algorithm::Sa { params, .. }, Some(&c)) = (&mut alg, numbers.first()) {
                params.cooling = c;
                params.validate()?;
            }
            return Ok(alg);
        }
        let (policy, rule) = match head.split_once('_') {
            Some((p, r)) => (Some(p.parse::<MachinePolicy>()?), r),
            None => (None, head),
        };
        let rule: Rule = rule.parse().map_err(|_| bad())?;
        let Algorithm::Lta(mut params) = Algorithm::lta(rule) else {
            unreachable!()
        };
        if let Some(p) = policy {
            params.machine_policy = p;
        }
        let ks = [&mut params.k1, &mut params.k2, &mut params.k3];
        if numbers.len() > ks.len() {
            return Err(bad());
        }
        for (k, v) in ks.into_iter().zip(numbers) {
            *k = v;
        }
        params.validate()?;
        Ok(Algorithm::Lta(params))
    }
}
