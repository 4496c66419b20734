//! Plain-text tables in the layout of published model reports.

use std::fmt::Write as _;

use super::compare::Comparison;
use crate::logit::{EstimationResult, ParamKind, ALTERNATIVES, CONSTANT};
use crate::pipeline::{DatasetSummary, VehicleClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    General,
    Leading,
    Following,
}

fn base_label(name: &str) -> String {
    match name {
        CONSTANT => "Constant".into(),
        "electronic" => "At least one electronic toll payment vehicle involved".into(),
        "avg_speed" => "Average speed".into(),
        "acceleration" => "Acceleration".into(),
        "angular_speed" => "Angular speed".into(),
        _ => {
            if let Some(n) = name.strip_prefix("zone") {
                return format!("Zone {n}");
            }
            VehicleClass::ALL
                .iter()
                .find(|c| c.as_str() == name)
                .map_or_else(|| name.to_string(), |c| c.label().to_string())
        }
    }
}

fn classify_variable(name: &str) -> (Section, String) {
    if let Some(rest) = name.strip_prefix("lead_") {
        (Section::Leading, base_label(rest))
    } else if let Some(rest) = name.strip_prefix("follow_") {
        (Section::Following, base_label(rest))
    } else {
        (Section::General, base_label(name))
    }
}

/// Human-readable label of a covariate.
pub fn variable_label(name: &str) -> String {
    match classify_variable(name) {
        (Section::General, l) => l,
        (Section::Leading, l) => format!("{l} of leading vehicle"),
        (Section::Following, l) => format!("{l} of following vehicle"),
    }
}

fn alt_title(alt: &str) -> String {
    match alt {
        "slight" => "Slight conflict".into(),
        "severe" => "Severe conflict".into(),
        other => other.into(),
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        self.rows.push(cells.into_iter().collect());
    }

    fn render(&self, out: &mut String) {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for r in &self.rows {
            let mut line = String::new();
            for (c, cell) in r.iter().enumerate() {
                let pad = widths[c] - cell.chars().count();
                if c == 0 {
                    line.push_str(cell);
                    line.push_str(&" ".repeat(pad));
                } else {
                    line.push_str("  ");
                    line.push_str(&" ".repeat(pad));
                    line.push_str(cell);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
}

/// Coefficient table, spread rows, heterogeneity block, model statistics and,
/// for correlated models, the Cholesky and correlation matrices.
pub fn render_estimation(r: &EstimationResult) -> String {
    let spec = &r.spec;
    let mut out = String::new();
    let title = if r.model.is_empty() {
        "model"
    } else {
        r.model.as_str()
    };
    let _ = writeln!(out, "Estimation results: {title}\n");

    let alts = &ALTERNATIVES[1..];
    let mut variables: Vec<(Section, usize, &str)> = Vec::new();
    for (i, t) in spec.terms.iter().enumerate() {
        if !variables.iter().any(|v| v.2 == t.variable) {
            variables.push((classify_variable(&t.variable).0, i, &t.variable));
        }
    }
    variables.sort_by_key(|v| (v.0, v.1));

    let mean_of = |alt: &str, var: &str| {
        r.estimates.iter().find(|e| match e.kind {
            ParamKind::Mean { term } => {
                spec.terms[term].alternative == alt && spec.terms[term].variable == var
            }
            _ => false,
        })
    };
    let term_of = |alt: &str, var: &str| {
        spec.terms
            .iter()
            .position(|t| t.alternative == alt && t.variable == var)
    };
    let random_of = |term: usize| {
        r.random_terms
            .iter()
            .find(|rt| rt.name == spec.terms[term].name())
    };
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), num);

    let mut t = Table::new();
    t.row(
        std::iter::once("Variable".to_string())
            .chain(alts.iter().flat_map(|a| [alt_title(a), String::new()])),
    );
    t.row(
        std::iter::once(String::new()).chain(
            alts.iter()
                .flat_map(|_| ["Coefficient".to_string(), "t-stat".to_string()]),
        ),
    );
    let mut current = None;
    for &(section, _, var) in &variables {
        if current != Some(section) {
            current = Some(section);
            match section {
                Section::Leading => t.row(["Characteristics of leading vehicle".to_string()]),
                Section::Following => t.row(["Characteristics of following vehicle".to_string()]),
                Section::General => {}
            }
        }
        let mut row = vec![classify_variable(var).1];
        let mut sd_row = vec!["  Standard deviation".to_string()];
        let mut any_random = false;
        for alt in alts {
            match term_of(alt, var) {
                None => {
                    row.extend(["-".into(), "-".into()]);
                    sd_row.extend(["-".into(), "-".into()]);
                }
                Some(ti) => {
                    if spec.terms[ti].zero_mean {
                        row.extend(["IS".into(), "IS".into()]);
                    } else {
                        let e = mean_of(alt, var);
                        row.push(e.map_or("-".into(), |e| num(e.value)));
                        row.push(fmt_opt(e.and_then(|e| e.t_stat)));
                    }
                    match random_of(ti) {
                        Some(rt) => {
                            any_random = true;
                            sd_row.push(num(rt.sigma));
                            sd_row.push(fmt_opt(rt.sigma_t));
                        }
                        None => sd_row.extend(["-".into(), "-".into()]),
                    }
                }
            }
        }
        t.row(row);
        if any_random {
            t.row(sd_row);
        }
    }

    let thetas: Vec<_> = r
        .estimates
        .iter()
        .filter_map(|e| match e.kind {
            ParamKind::Theta { slot, var } => Some((e, slot, var)),
            _ => None,
        })
        .collect();
    if !thetas.is_empty() {
        t.row(["Heterogeneity in the means of the random parameter".to_string()]);
        for (e, slot, var) in thetas {
            let term = &spec.terms[r_slot_term(r, slot)];
            let mut row = vec![format!(
                "{}: {}",
                variable_label(&term.variable),
                base_label(&term.heterogeneity[var])
            )];
            for alt in alts {
                if term.alternative == *alt {
                    row.push(num(e.value));
                    row.push(fmt_opt(e.t_stat));
                } else {
                    row.extend(["-".into(), "-".into()]);
                }
            }
            t.row(row);
        }
    }
    t.row(["Model statistics".to_string()]);
    t.row(["McFadden R²".to_string(), num(r.mcfadden_r2)]);
    t.row(["Number of observations".to_string(), r.n_obs.to_string()]);
    t.row(["Number of groups".to_string(), r.n_groups.to_string()]);
    t.row(["Degree of freedom".to_string(), r.df.to_string()]);
    t.row(["Log-likelihood at zero (LL(0))".to_string(), num(r.ll0)]);
    t.row([
        "Log-likelihood at convergence (LL(β))".to_string(),
        num(r.ll),
    ]);
    t.row(["AIC".to_string(), format!("{:.1}", r.aic)]);
    t.render(&mut out);

    let _ = writeln!(
        out,
        "\nOutcome counts: none {}, slight {}, severe {}. Halton draws per group: {}.",
        r.counts[0], r.counts[1], r.counts[2], r.draws.count
    );
    let _ = writeln!(
        out,
        "Standard-deviation t-statistics use SE = S/sqrt(N) with S the sample SD of the covariate."
    );
    let _ = writeln!(
        out,
        "Converged in {} iterations (gradient max-norm {:.2e}){}.",
        r.convergence.iterations,
        r.convergence.grad_norm,
        if r.convergence.hessian_ok {
            ""
        } else {
            "; standard errors unavailable"
        }
    );

    let correlated = r
        .estimates
        .iter()
        .any(|e| matches!(e.kind, ParamKind::Cholesky { row, col } if row != col));
    if correlated {
        let labels: Vec<String> = r
            .random_terms
            .iter()
            .map(|rt| {
                let (alt, var) = rt.name.split_once(':').unwrap_or(("", &rt.name));
                format!("{}: {}", alt_title(alt), variable_label(var))
            })
            .collect();
        let chol_t = |p: usize, q: usize| {
            r.estimates.iter().find(
                |e| matches!(e.kind, ParamKind::Cholesky { row, col } if row == p && col == q),
            )
        };
        let _ = writeln!(
            out,
            "\nCholesky matrix of random parameters (t-statistic in parentheses)\n"
        );
        let mut t = Table::new();
        t.row(std::iter::once(String::new()).chain(labels.iter().cloned()));
        for (p, label) in labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            for q in 0..labels.len() {
                row.push(match chol_t(p, q) {
                    Some(e) => match e.t_stat {
                        Some(ts) => format!("{:.3} ({ts:.2})", e.value),
                        None => format!("{:.3}", e.value),
                    },
                    None => "0".into(),
                });
            }
            t.row(row);
        }
        t.render(&mut out);
        if let Some(c) = &r.correlation {
            let _ = writeln!(
                out,
                "\nCorrelation coefficient matrix of random parameters\n"
            );
            let mut t = Table::new();
            t.row(std::iter::once(String::new()).chain(labels.iter().cloned()));
            for (p, label) in labels.iter().enumerate() {
                t.row(std::iter::once(label.clone()).chain(c[p].iter().map(|v| num(*v))));
            }
            t.render(&mut out);
        }
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn r_slot_term(r: &EstimationResult, slot: usize) -> usize {
    let name = &r.random_terms[slot].name;
    r.spec
        .terms
        .iter()
        .position(|t| &t.name() == name)
        .expect("random term in spec")
}

/// Fit statistics of nested model pairs with likelihood-ratio tests.
pub fn render_comparison(comparisons: &[Comparison]) -> String {
    let mut out = String::from("Model performance metrics\n\n");
    let mut t = Table::new();
    t.row(
        std::iter::once("Metric".to_string()).chain(
            comparisons
                .iter()
                .flat_map(|c| [c.label.clone(), String::new()]),
        ),
    );
    t.row(
        std::iter::once(String::new()).chain(
            comparisons
                .iter()
                .flat_map(|c| [c.restricted.name.clone(), c.full.name.clone()]),
        ),
    );
    let both = |f: &dyn Fn(&super::compare::ModelSummary) -> String| {
        comparisons
            .iter()
            .flat_map(|c| [f(&c.restricted), f(&c.full)])
            .collect::<Vec<_>>()
    };
    t.row(
        std::iter::once("McFadden R²".to_string())
            .chain(both(&|m| m.mcfadden_r2.map_or("-".into(), num))),
    );
    t.row(std::iter::once("Degrees of freedom".to_string()).chain(both(&|m| m.df.to_string())));
    t.row(std::iter::once("Log likelihood".to_string()).chain(both(&|m| num(m.ll))));
    t.row(
        std::iter::once("AIC (2·df − 2·LL)".to_string()).chain(both(&|m| format!("{:.1}", m.aic))),
    );
    if comparisons
        .iter()
        .any(|c| c.restricted.reported_aic.is_some() || c.full.reported_aic.is_some())
    {
        t.row(
            std::iter::once("Reported AIC".to_string()).chain(both(&|m| match m.reported_aic {
                Some(a) if m.aic_consistent => format!("{a}"),
                Some(a) => format!("{a} (!)"),
                None => "-".into(),
            })),
        );
    }
    t.row(
        std::iter::once("Chi-square test statistic".to_string()).chain(
            comparisons.iter().flat_map(|c| {
                [
                    format!(
                        "{}{}",
                        num(c.lr.statistic),
                        if c.significant { "*" } else { "" }
                    ),
                    String::new(),
                ]
            }),
        ),
    );
    t.row(
        std::iter::once("p-value".to_string()).chain(
            comparisons
                .iter()
                .flat_map(|c| [format!("{:.2e}", c.lr.p_value), String::new()]),
        ),
    );
    t.render(&mut out);
    out.push_str("\nNote: * statistical significance at the 1% level.\n");
    if comparisons
        .iter()
        .any(|c| !c.restricted.aic_consistent || !c.full.aic_consistent)
    {
        out.push_str("(!) reported AIC inconsistent with 2·df − 2·LL.\n");
    }
    for c in comparisons {
        for w in &c.warnings {
            let _ = writeln!(out, "warning ({}): {w}", c.label);
        }
    }
    out
}

/// Descriptive statistics per conflict family.
pub fn render_summary(s: &DatasetSummary) -> String {
    let mut out = String::new();
    for f in &s.families {
        let family = match f.family {
            crate::kernel::ConflictType::RearEnd => "Rear-end conflicts",
            crate::kernel::ConflictType::Sideswipe => "Sideswipe conflicts",
            crate::kernel::ConflictType::Unsupported => "Other conflicts",
        };
        let _ = writeln!(
            out,
            "{family} (N = {}; none {}, slight {}, severe {})\n",
            f.total, f.counts[0], f.counts[1], f.counts[2]
        );
        let mut t = Table::new();
        t.row(["Variable", "Mean", "S.D.", "Min", "Max"].map(String::from));
        for r in &f.rows {
            t.row([
                r.label.clone(),
                num(r.mean),
                num(r.sd),
                num(r.min),
                num(r.max),
            ]);
        }
        t.render(&mut out);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(
            variable_label("lead_avg_speed"),
            "Average speed of leading vehicle"
        );
        assert_eq!(
            variable_label("follow_goods_vehicle"),
            "Goods vehicle of following vehicle"
        );
        assert_eq!(variable_label("zone2"), "Zone 2");
        assert_eq!(variable_label("custom"), "custom");
    }

    #[test]
    fn table_alignment() {
        let mut t = Table::new();
        t.row(["a".to_string(), "1.00".to_string()]);
        t.row(["longer".to_string(), "-12.50".to_string()]);
        let mut s = String::new();
        t.render(&mut s);
        assert_eq!(s, "a         1.00\nlonger  -12.50\n");
    }
}
