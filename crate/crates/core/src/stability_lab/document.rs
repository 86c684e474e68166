//! The plain-text report format: `key = value` lines grouped in `[sections]`,
//! plus whitespace-separated tables introduced by `table <name>` and closed by
//! `end`. Floating-point values carry 17 significant digits so that they
//! round-trip exactly.

use std::fmt::Write as _;

use crate::gko::GeneratorConditioning;
use crate::report::{Method, SolveReport};
use crate::scalar::Scalar;

use super::experiments::{
    generator_growth_probe, kappa_sweep_experiment, BenchConfig, BenchRow, Ensemble, GrowthProbe,
    ProbeConfig, SlopeFit, SweepConfig, SweepTable,
};
use super::metrics::{StabilityVerdict, VerdictPolicy};
use crate::error::Result;
use crate::random::ProlateFamily;

pub const FORMAT_VERSION: u32 = 1;

/// Explains why the growth probe is reported instead of a worked unstable
/// Toeplitz instance.
pub const UNREPRODUCIBLE_NOTE: &str = "no Toeplitz instance with kappa^2 forward error from the \
DFT+GKO solver is constructed here: the construction of such an instance is not available to this \
tool, so the measured generator-growth distributions in [probe.*] stand in for it";

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_scalar<S: Scalar>(v: S) -> String {
    if S::IS_COMPLEX {
        let z = v.to_complex();
        format!("{} {}", fmt_num(z.re), fmt_num(z.im))
    } else {
        fmt_num(v.re())
    }
}

/// Builder for a report document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    out: String,
}

impl Document {
    pub fn new(kind: &str) -> Self {
        let mut d = Document::default();
        d.kv("report", kind);
        d.kv("format", FORMAT_VERSION);
        d
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        let _ = write!(self.out, "\n[{name}]\n");
        self
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.out, "{key} = {value}");
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, fmt_num(value))
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> &mut Self {
        let _ = writeln!(self.out, "table {name}");
        let _ = writeln!(self.out, "{}", columns.join(" "));
        for r in rows {
            let _ = writeln!(self.out, "{}", r.join(" "));
        }
        let _ = writeln!(self.out, "end");
        self
    }

    pub fn render(&self) -> &str {
        &self.out
    }
}

/// Writes a solve report: scalars, verdict evidence and the solution vector.
pub fn write_solve_report<S: Scalar>(
    doc: &mut Document,
    rep: &SolveReport<S>,
    verdict: &StabilityVerdict,
) {
    doc.section("solve")
        .kv("method", rep.method)
        .kv("n", rep.n())
        .kv("norm", SolveReport::<S>::NORM)
        .num("kappa", rep.kappa)
        .num("normalized_residual", rep.normalized_residual)
        .num("rhs_residual", rep.rhs_residual)
        .num("backward_error", rep.backward_error())
        .num("growth", rep.generator_growth)
        .kv("refine_iters", rep.refine_iters)
        .kv("fallback_used", rep.fallback_used)
        .num("imaginary_leak", rep.imaginary_leak)
        .kv(
            "residuals",
            rep.residual_history
                .iter()
                .map(|&v| fmt_num(v))
                .collect::<Vec<_>>()
                .join(" "),
        )
        .kv("verdict", verdict.class)
        .num(
            "verdict.stable_threshold",
            verdict.evidence.stable_threshold,
        )
        .num("verdict.weak_threshold", verdict.evidence.weak_threshold);
    let rows: Vec<Vec<String>> = rep
        .x
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![i.to_string(), fmt_scalar(v)])
        .collect();
    let cols: &[&str] = if S::IS_COMPLEX {
        &["i", "x_re", "x_im"]
    } else {
        &["i", "x"]
    };
    doc.table("solution", cols, &rows);
}

/// Sweep parameters and probe sizes for [`stability_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReportConfig {
    pub seed: u64,
    pub n: usize,
    pub targets: Vec<f64>,
    pub trials_per_target: usize,
    pub methods: Vec<Method>,
    pub seminormal_refine: usize,
    pub probe_trials: usize,
    pub probe_n: usize,
}

impl StabilityReportConfig {
    pub fn new(seed: u64) -> Self {
        StabilityReportConfig {
            seed,
            n: 32,
            targets: (1..=6).map(|e| 10f64.powi(e)).collect(),
            trials_per_target: 3,
            methods: Method::ALL.to_vec(),
            seminormal_refine: 0,
            probe_trials: 100,
            probe_n: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub config: StabilityReportConfig,
    pub sweep: SweepTable,
    /// Rank-1 (plain Cauchy) systems.
    pub probe_rank1: GrowthProbe,
    /// Rank-2 near-cancelling generators.
    pub probe_adversarial: GrowthProbe,
}

/// Runs the condition sweep on shifted prolate matrices and both growth probes.
pub fn stability_report(config: &StabilityReportConfig) -> Result<StabilityReport> {
    let sweep = kappa_sweep_experiment(
        &ProlateFamily::new(config.n),
        &SweepConfig {
            targets: config.targets.clone(),
            trials_per_target: config.trials_per_target,
            methods: config.methods.clone(),
            seminormal_refine: config.seminormal_refine,
            seed: config.seed,
            policy: VerdictPolicy::default(),
        },
    )?;
    let probe = |alpha, adversarial| {
        generator_growth_probe(&ProbeConfig {
            trials: config.probe_trials,
            n: config.probe_n,
            alpha,
            adversarial,
            conditionings: GeneratorConditioning::ALL.to_vec(),
            seed: config.seed,
        })
    };
    Ok(StabilityReport {
        config: config.clone(),
        sweep,
        probe_rank1: probe(1, false)?,
        probe_adversarial: probe(2, true)?,
    })
}

fn fit_cells(f: &Option<SlopeFit>) -> [String; 3] {
    match f {
        Some(f) => {
            let (lo, hi) = f.interval();
            [fmt_num(f.slope), fmt_num(lo), fmt_num(hi)]
        }
        None => ["-".into(), "-".into(), "-".into()],
    }
}

fn write_probe(doc: &mut Document, name: &str, p: &GrowthProbe) {
    doc.section(name)
        .kv("n", p.config.n)
        .kv("alpha", p.config.alpha)
        .kv("adversarial", p.config.adversarial)
        .kv("trials", p.config.trials)
        .kv("seed", p.config.seed);
    if let Some(pc) = &p.paired {
        doc.kv("paired", format!("{}<={}", pc.better, pc.baseline))
            .kv("paired.wins", pc.wins)
            .num("paired.fraction", pc.fraction());
    }
    let rows: Vec<Vec<String>> = p
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.conditioning.to_string(),
                fmt_num(s.max_growth),
                fmt_num(s.median_growth),
                fmt_num(s.max_residual),
                fmt_num(s.median_residual),
                s.failures.to_string(),
            ]
        })
        .collect();
    doc.table(
        "growth",
        &[
            "conditioning",
            "max_growth",
            "median_growth",
            "max_residual",
            "median_residual",
            "failures",
        ],
        &rows,
    );
    let rows: Vec<Vec<String>> = p
        .trials
        .iter()
        .flat_map(|t| {
            t.outcomes.iter().map(move |o| {
                vec![
                    t.index.to_string(),
                    fmt_num(t.delta),
                    o.conditioning.to_string(),
                    fmt_num(o.growth),
                    fmt_num(o.norm_growth),
                    fmt_num(o.factor_residual),
                    o.error.unwrap_or("-").to_string(),
                ]
            })
        })
        .collect();
    doc.table(
        "trials",
        &[
            "trial",
            "delta",
            "conditioning",
            "growth",
            "norm_growth",
            "factor_residual",
            "error",
        ],
        &rows,
    );
}

impl StabilityReport {
    pub fn to_document(&self) -> Document {
        let mut doc = Document::new("stability");
        let c = &self.config;
        doc.kv("seed", c.seed)
            .kv("n", c.n)
            .kv("norm", "inf")
            .kv("note", UNREPRODUCIBLE_NOTE);

        doc.section("sweep")
            .kv("family", &self.sweep.family)
            .kv(
                "targets",
                c.targets
                    .iter()
                    .map(|&v| fmt_num(v))
                    .collect::<Vec<_>>()
                    .join(" "),
            )
            .kv("trials_per_target", c.trials_per_target)
            .kv("seminormal_refine", c.seminormal_refine);
        let rows: Vec<Vec<String>> = self
            .sweep
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.method.to_string(),
                    r.n.to_string(),
                    c.seed.to_string(),
                    r.trial.to_string(),
                    fmt_num(r.target_kappa),
                    fmt_num(r.kappa),
                    fmt_num(r.forward_error),
                    fmt_num(r.normalized_residual),
                    fmt_num(r.rhs_residual),
                    fmt_num(r.backward_error),
                    r.refine_iters.to_string(),
                    r.verdict
                        .map(|v| v.class.name())
                        .or(r.error)
                        .unwrap_or("-")
                        .to_string(),
                ]
            })
            .collect();
        doc.table(
            "rows",
            &[
                "method",
                "n",
                "seed",
                "trial",
                "target_kappa",
                "kappa",
                "forward_error",
                "normalized_residual",
                "rhs_residual",
                "backward_error",
                "refine_iters",
                "verdict",
            ],
            &rows,
        );

        doc.section("slopes").kv(
            "fit",
            "least squares on log10 values vs log10 kappa, interval = slope +- 2 se",
        );
        let rows: Vec<Vec<String>> = self
            .sweep
            .slopes
            .iter()
            .map(|s| {
                let mut row = vec![s.method.to_string()];
                row.extend(fit_cells(&s.forward_error));
                row.extend(fit_cells(&s.residual));
                row.push(s.verdict.map(|v| v.name()).unwrap_or("-").to_string());
                row.push(s.failures.to_string());
                row
            })
            .collect();
        doc.table(
            "slopes",
            &[
                "method",
                "error_slope",
                "error_lo",
                "error_hi",
                "residual_slope",
                "residual_lo",
                "residual_hi",
                "verdict",
                "failures",
            ],
            &rows,
        );

        write_probe(&mut doc, "probe.rank1", &self.probe_rank1);
        write_probe(&mut doc, "probe.adversarial", &self.probe_adversarial);
        doc
    }
}

/// Writes a [`method_benchmark`](super::experiments::method_benchmark) table.
pub fn write_bench(doc: &mut Document, config: &BenchConfig, rows: &[BenchRow]) {
    doc.section(&format!("bench.{}", config.ensemble.name()))
        .kv("n", config.n)
        .kv("trials", config.trials)
        .kv("seed", config.seed)
        .kv("seminormal_refine", config.seminormal_refine);
    if let Ensemble::GeneralToeplitz { max_kappa } = config.ensemble {
        doc.num("max_kappa", max_kappa);
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.trials.to_string(),
                r.failures.to_string(),
                fmt_num(r.median_residual),
                fmt_num(r.max_residual),
                fmt_num(r.median_error),
                fmt_num(r.max_error),
                fmt_num(r.max_growth),
                r.verdict.map(|v| v.name()).unwrap_or("-").to_string(),
            ]
        })
        .collect();
    doc.table(
        "methods",
        &[
            "method",
            "trials",
            "failures",
            "median_residual",
            "max_residual",
            "median_error",
            "max_error",
            "max_growth",
            "verdict",
        ],
        &table,
    );
}
