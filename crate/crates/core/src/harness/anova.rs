//! Fixed-effects factorial analysis of variance with two-way interactions.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::experiment::Observation;
use crate::error::{Error, Result};
use crate::num::Real;

/// A factor and the names of its levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
}

impl Factor {
    pub fn new(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorEffect<F> {
    pub name: String,
    pub levels: Vec<String>,
    /// Level mean minus grand mean.
    pub effects: Vec<F>,
    pub counts: Vec<usize>,
    pub max_effect: F,
    pub sum_squares: F,
    pub dof: usize,
    pub f: F,
    pub threshold: F,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEffect<F> {
    /// Indices into [`EffectReport::factors`].
    pub factors: [usize; 2],
    /// `table[i][j]`: cell mean minus both level means plus the grand mean.
    pub table: Vec<Vec<F>>,
    pub max_interaction: F,
    pub sum_squares: F,
    pub dof: usize,
    pub f: F,
    pub threshold: F,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectReport<F> {
    pub observations: usize,
    pub grand_mean: F,
    pub factors: Vec<FactorEffect<F>>,
    pub interactions: Vec<InteractionEffect<F>>,
    pub residual_ss: F,
    pub residual_dof: usize,
    pub alpha: f64,
}

/// Relative tardiness change implied by an effect `x` on log10 tardiness: `10^x - 1`.
pub fn effect_to_ratio<F: Real>(effect: F) -> F {
    F::lit(10.0).powf(effect) - F::one()
}

fn f_threshold(dof: usize, residual_dof: usize, alpha: f64) -> Result<f64> {
    FisherSnedecor::new(dof as f64, residual_dof as f64)
        .map(|d| d.inverse_cdf(1.0 - alpha))
        .map_err(|e| Error::Internal(format!("F distribution ({dof}, {residual_dof}): {e}")))
}

fn f_ratio<F: Real>(ss: F, dof: usize, residual_ms: F) -> F {
    let ms = ss / F::from_count(dof);
    if residual_ms > F::zero() {
        ms / residual_ms
    } else if ms > F::zero() {
        F::infinity()
    } else {
        F::zero()
    }
}

fn max_abs<F: Real>(values: impl IntoIterator<Item = F>) -> F {
    values.into_iter().fold(F::zero(), |m, v| m.max(v.abs()))
}

/// Decomposes `rows` (level index per factor, response) into main effects and
/// all two-way interactions; higher interactions pool into the residual.
/// The design must be a full factorial with the same number of replicates per cell.
pub fn anova<F: Real>(
    factors: &[Factor],
    rows: &[(Vec<usize>, F)],
    alpha: f64,
) -> Result<EffectReport<F>> {
    if factors.is_empty() || rows.is_empty() {
        return Err(Error::InvalidConfig(
            "analysis needs at least one factor and one row".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} not in (0,1)")));
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.levels.len()).collect();
    let cells: usize = sizes.iter().product();
    let mut cell_count = vec![0usize; cells];
    for (levels, _) in rows {
        if levels.len() != factors.len() || levels.iter().zip(&sizes).any(|(&l, &s)| l >= s) {
            return Err(Error::InvalidConfig(format!(
                "row levels {levels:?} do not match the factors"
            )));
        }
        cell_count[levels
            .iter()
            .zip(&sizes)
            .fold(0, |acc, (&l, &s)| acc * s + l)] += 1;
    }
    let replicates = cell_count[0];
    if let Some(c) = cell_count.iter().position(|&n| n != replicates || n == 0) {
        return Err(Error::Unbalanced(format!(
            "cell {c} has {} observations but cell 0 has {replicates}; subset the observations to a full factorial with equal replicates",
            cell_count[c]
        )));
    }

    let n = rows.len();
    let grand_mean = rows.iter().fold(F::zero(), |s, (_, y)| s + *y) / F::from_count(n);
    let total_ss = rows
        .iter()
        .fold(F::zero(), |s, (_, y)| s + (*y - grand_mean).powi(2));

    let mut level_sum: Vec<Vec<F>> = sizes.iter().map(|&s| vec![F::zero(); s]).collect();
    let mut level_n: Vec<Vec<usize>> = sizes.iter().map(|&s| vec![0; s]).collect();
    let pairs: Vec<[usize; 2]> = (0..factors.len())
        .flat_map(|a| (a + 1..factors.len()).map(move |b| [a, b]))
        .collect();
    let mut pair_sum: Vec<Vec<Vec<F>>> = pairs
        .iter()
        .map(|&[a, b]| vec![vec![F::zero(); sizes[b]]; sizes[a]])
        .collect();
    for (levels, y) in rows {
        for (f, &l) in levels.iter().enumerate() {
            level_sum[f][l] = level_sum[f][l] + *y;
            level_n[f][l] += 1;
        }
        for (p, &[a, b]) in pairs.iter().enumerate() {
            let cell = &mut pair_sum[p][levels[a]][levels[b]];
            *cell = *cell + *y;
        }
    }
    let effects: Vec<Vec<F>> = level_sum
        .iter()
        .zip(&level_n)
        .map(|(sums, ns)| {
            sums.iter()
                .zip(ns)
                .map(|(&s, &c)| s / F::from_count(c) - grand_mean)
                .collect()
        })
        .collect();

    let main_ss: Vec<F> = effects
        .iter()
        .zip(&level_n)
        .map(|(e, ns)| {
            e.iter()
                .zip(ns)
                .fold(F::zero(), |s, (&x, &c)| s + F::from_count(c) * x * x)
        })
        .collect();
    let mut tables = Vec::with_capacity(pairs.len());
    let mut pair_ss = Vec::with_capacity(pairs.len());
    for (p, &[a, b]) in pairs.iter().enumerate() {
        let per_cell = n / (sizes[a] * sizes[b]);
        let table: Vec<Vec<F>> = (0..sizes[a])
            .map(|i| {
                (0..sizes[b])
                    .map(|j| {
                        pair_sum[p][i][j] / F::from_count(per_cell)
                            - effects[a][i]
                            - effects[b][j]
                            - grand_mean
                    })
                    .collect()
            })
            .collect();
        let ss = table
            .iter()
            .flatten()
            .fold(F::zero(), |s, &x| s + F::from_count(per_cell) * x * x);
        tables.push(table);
        pair_ss.push(ss);
    }

    let main_dof: Vec<usize> = sizes.iter().map(|&s| s - 1).collect();
    let pair_dof: Vec<usize> = pairs
        .iter()
        .map(|&[a, b]| main_dof[a] * main_dof[b])
        .collect();
    let used: usize = main_dof.iter().sum::<usize>() + pair_dof.iter().sum::<usize>();
    let residual_dof = (n - 1)
        .checked_sub(used)
        .filter(|&d| d > 0)
        .ok_or_else(|| {
            Error::Unbalanced("no residual degrees of freedom left; add replicates".into())
        })?;
    let residual_ss = (total_ss
        - main_ss.iter().fold(F::zero(), |s, &x| s + x)
        - pair_ss.iter().fold(F::zero(), |s, &x| s + x))
    .max(F::zero());
    let residual_ms = residual_ss / F::from_count(residual_dof);

    let mut factor_effects = Vec::with_capacity(factors.len());
    for (f, factor) in factors.iter().enumerate() {
        let dof = main_dof[f];
        let (fv, threshold) = if dof == 0 {
            (F::zero(), F::infinity())
        } else {
            (
                f_ratio(main_ss[f], dof, residual_ms),
                F::lit(f_threshold(dof, residual_dof, alpha)?),
            )
        };
        factor_effects.push(FactorEffect {
            name: factor.name.clone(),
            levels: factor.levels.clone(),
            max_effect: max_abs(effects[f].iter().copied()),
            effects: effects[f].clone(),
            counts: level_n[f].clone(),
            sum_squares: main_ss[f],
            dof,
            f: fv,
            threshold,
            significant: fv > threshold,
        });
    }
    let mut interactions = Vec::with_capacity(pairs.len());
    for (p, (&pair, table)) in pairs.iter().zip(tables).enumerate() {
        let dof = pair_dof[p];
        let (fv, threshold) = if dof == 0 {
            (F::zero(), F::infinity())
        } else {
            (
                f_ratio(pair_ss[p], dof, residual_ms),
                F::lit(f_threshold(dof, residual_dof, alpha)?),
            )
        };
        interactions.push(InteractionEffect {
            factors: pair,
            max_interaction: max_abs(table.iter().flatten().copied()),
            table,
            sum_squares: pair_ss[p],
            dof,
            f: fv,
            threshold,
            significant: fv > threshold,
        });
    }
    Ok(EffectReport {
        observations: n,
        grand_mean,
        factors: factor_effects,
        interactions,
        residual_ss,
        residual_dof,
        alpha,
    })
}

/// Analysis of log10 tardiness over the algorithm and design factors present in
/// `observations` at the 5% level. Factors with a single level are left out;
/// rows with errors are skipped.
pub fn anova_effects(observations: &[Observation]) -> Result<EffectReport<f64>> {
    anova_effects_at(observations, 0.05)
}

pub fn anova_effects_at(observations: &[Observation], alpha: f64) -> Result<EffectReport<f64>> {
    let ok: Vec<&Observation> = observations.iter().filter(|o| o.error.is_none()).collect();
    type Key = fn(&Observation) -> String;
    let keys: [(&str, Key, bool); 5] = [
        ("algorithm", |o| o.algorithm.clone(), false),
        ("load", |o| o.load.to_string(), true),
        ("nRoutings", |o| o.n_routings.to_string(), true),
        ("setupRatio", |o| o.setup_ratio.to_string(), true),
        ("flexMean", |o| o.flex_mean.to_string(), true),
    ];
    let mut factors = Vec::new();
    let mut getters = Vec::new();
    for (name, key, numeric) in keys {
        let mut levels: Vec<String> = Vec::new();
        for o in &ok {
            let l = key(o);
            if !levels.contains(&l) {
                levels.push(l);
            }
        }
        if numeric {
            levels.sort_by(|a, b| {
                a.parse::<f64>()
                    .unwrap_or(0.0)
                    .total_cmp(&b.parse::<f64>().unwrap_or(0.0))
            });
        }
        if levels.len() > 1 {
            factors.push(Factor::new(name, levels));
            getters.push(key);
        }
    }
    if factors.is_empty() {
        return Err(Error::InvalidConfig(
            "observations vary in no factor".into(),
        ));
    }
    let rows: Vec<(Vec<usize>, f64)> = ok
        .iter()
        .map(|o| {
            let levels = getters
                .iter()
                .zip(&factors)
                .map(|(g, f)| {
                    f.levels
                        .iter()
                        .position(|l| *l == g(o))
                        .expect("level collected above")
                })
                .collect();
            (
                levels,
                o.log_tardiness.expect("error-free rows carry a response"),
            )
        })
        .collect();
    anova(&factors, &rows, alpha)
}

#[derive(Serialize)]
struct ReportRow<'a> {
    section: &'a str,
    factor: &'a str,
    other: &'a str,
    level: String,
    effect: f64,
    f: Option<f64>,
    threshold: Option<f64>,
    dof: Option<usize>,
    residual_dof: Option<usize>,
    significant: Option<bool>,
}

impl<F: Real> EffectReport<F> {
    pub fn factor(&self, name: &str) -> Option<&FactorEffect<F>> {
        self.factors.iter().find(|f| f.name == name)
    }

    pub fn interaction(&self, a: &str, b: &str) -> Option<&InteractionEffect<F>> {
        self.interactions.iter().find(|i| {
            let names = [
                &self.factors[i.factors[0]].name,
                &self.factors[i.factors[1]].name,
            ];
            names == [a, b] || names == [b, a]
        })
    }

    /// Plain-text tables: factor significance, interaction significance, level effects.
    pub fn to_text(&self) -> String {
        let yes = |b: bool| if b { "yes" } else { "no" };
        let g = |x: F| x.to_f64().unwrap_or(f64::NAN);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "observations {}  grand mean {:.3}  residual dof {}  alpha {}",
            self.observations,
            g(self.grand_mean),
            self.residual_dof,
            self.alpha
        );
        let _ = writeln!(
            out,
            "\nparameter         max effect  experimental F  theoretical F  dof   significant"
        );
        for f in &self.factors {
            let _ = writeln!(
                out,
                "{:<16}  {:>10.3}  {:>14.2}  {:>13.2}  {:<4}  {}",
                f.name,
                g(f.max_effect),
                g(f.f),
                g(f.threshold),
                f.dof,
                yes(f.significant)
            );
        }
        if !self.interactions.is_empty() {
            let _ = writeln!(
                out,
                "\nparameter 1       parameter 2       max interaction  experimental F  theoretical F  dof   significant"
            );
            for i in &self.interactions {
                let _ = writeln!(
                    out,
                    "{:<16}  {:<16}  {:>15.3}  {:>14.2}  {:>13.2}  {:<4}  {}",
                    self.factors[i.factors[0]].name,
                    self.factors[i.factors[1]].name,
                    g(i.max_interaction),
                    g(i.f),
                    g(i.threshold),
                    i.dof,
                    yes(i.significant)
                );
            }
        }
        let _ = writeln!(
            out,
            "\nparameter         level                 effect  tardiness ratio"
        );
        for f in &self.factors {
            for (level, &e) in f.levels.iter().zip(&f.effects) {
                let _ = writeln!(
                    out,
                    "{:<16}  {:<20}  {:>6.3}  {:>+14.1}%",
                    f.name,
                    level,
                    g(e),
                    100.0 * g(effect_to_ratio(e))
                );
            }
        }
        out
    }

    /// One row per factor, per interaction, per level effect and per interaction cell.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let g = |x: F| x.to_f64().unwrap_or(f64::NAN);
        let mut w = csv::Writer::from_writer(writer);
        for f in &self.factors {
            w.serialize(ReportRow {
                section: "factor",
                factor: &f.name,
                other: "",
                level: String::new(),
                effect: g(f.max_effect),
                f: Some(g(f.f)),
                threshold: Some(g(f.threshold)),
                dof: Some(f.dof),
                residual_dof: Some(self.residual_dof),
                significant: Some(f.significant),
            })?;
        }
        for i in &self.interactions {
            let (a, b) = (&self.factors[i.factors[0]], &self.factors[i.factors[1]]);
            w.serialize(ReportRow {
                section: "interaction",
                factor: &a.name,
                other: &b.name,
                level: String::new(),
                effect: g(i.max_interaction),
                f: Some(g(i.f)),
                threshold: Some(g(i.threshold)),
                dof: Some(i.dof),
                residual_dof: Some(self.residual_dof),
                significant: Some(i.significant),
            })?;
        }
        for f in &self.factors {
            for (level, &e) in f.levels.iter().zip(&f.effects) {
                w.serialize(ReportRow {
                    section: "level",
                    factor: &f.name,
                    other: "",
                    level: level.clone(),
                    effect: g(e),
                    f: None,
                    threshold: None,
                    dof: None,
                    residual_dof: None,
                    significant: None,
                })?;
            }
        }
        for i in &self.interactions {
            let (a, b) = (&self.factors[i.factors[0]], &self.factors[i.factors[1]]);
            for (la, row) in a.levels.iter().zip(&i.table) {
                for (lb, &x) in b.levels.iter().zip(row) {
                    w.serialize(ReportRow {
                        section: "cell",
                        factor: &a.name,
                        other: &b.name,
                        level: format!("{la}|{lb}"),
                        effect: g(x),
                        f: None,
                        threshold: None,
                        dof: None,
                        residual_dof: None,
                        significant: None,
                    })?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
