//! Ensemble experiments: condition-number sweeps and generator-growth probes.
//!
//! Each trial draws from its own RNG stream (`seed`, trial index), so results do
//! not depend on the order trials are run in; rows are stored sorted by trial.

use rand::Rng;

use crate::classic::{bareiss_solve, levinson_solve_report, report_for};
use crate::error::{DisplaceError, Result};
use crate::gko::{gko_factor, GeneratorConditioning};
use crate::matrices::{dense_lu_pp, toeplitz_matvec, Materialize, ToeplitzMatrix};
use crate::random::{
    adversarial_cauchy, normal_vector, random_cauchy, trial_rng, ProlateFamily, TestRng,
};
use crate::report::{Method, SolveReport};
use crate::scalar::EPS;
use crate::seminormal::seminormal_solve;
use crate::toeplitz_pipeline::gko_toeplitz_solve;

use super::metrics::{
    classify, classify_ensemble, oracle_solve, StabilityClass, StabilityVerdict, VerdictPolicy,
};

/// Errors and residuals below this are clamped before taking logarithms.
pub const LOG_FLOOR: f64 = EPS * 1e-3;

/// Solves a real Toeplitz system with the named method. `refine` only applies
/// to the semi-normal equations.
pub fn solve_toeplitz(
    t: &ToeplitzMatrix,
    b: &[f64],
    method: Method,
    refine: usize,
) -> Result<SolveReport> {
    match method {
        Method::Gko(cond) => gko_toeplitz_solve(t, b, cond).map(|(_, r)| r),
        Method::Bareiss => bareiss_solve(t, b).map(|(_, r)| r),
        Method::Levinson => levinson_solve_report(t, b).map(|(r, _)| r),
        Method::Seminormal => seminormal_solve(t, b, refine).map(|(_, r)| r),
        Method::Dense => report_for(t, &dense_lu_pp(&t.to_dense())?, b, Method::Dense),
    }
}

/// Matrices with a requested condition number.
pub trait KappaFamily {
    fn describe(&self) -> String;
    /// A matrix near `target` and its verified `kappa_2`.
    fn generate(&self, target: f64, rng: &mut TestRng) -> Result<(ToeplitzMatrix, f64)>;
}

impl KappaFamily for ProlateFamily {
    fn describe(&self) -> String {
        format!(
            "prolate-shifted(n={}, w={}..{})",
            self.n, self.bandwidth.0, self.bandwidth.1
        )
    }

    fn generate(&self, target: f64, rng: &mut TestRng) -> Result<(ToeplitzMatrix, f64)> {
        ProlateFamily::generate(self, target, rng)
    }
}

/// Least-squares line `log10 y = a + slope log10 x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub points: usize,
}

impl SlopeFit {
    /// `None` with fewer than three points or no spread in `x`.
    pub fn fit(x: &[f64], y: &[f64]) -> Option<SlopeFit> {
        let m = x.len().min(y.len());
        if m < 3 {
            return None;
        }
        let lx: Vec<f64> = x[..m].iter().map(|v| v.log10()).collect();
        let ly: Vec<f64> = y[..m].iter().map(|v| v.max(LOG_FLOOR).log10()).collect();
        let mx = lx.iter().sum::<f64>() / m as f64;
        let my = ly.iter().sum::<f64>() / m as f64;
        let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
        if !(sxx > 0.0) {
            return None;
        }
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ssr: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let std_error = (ssr / (m - 2) as f64 / sxx).sqrt();
        Some(SlopeFit {
            slope,
            intercept,
            std_error,
            points: m,
        })
    }

    /// Two-standard-error interval.
    pub fn interval(&self) -> (f64, f64) {
        (
            self.slope - 2.0 * self.std_error,
            self.slope + 2.0 * self.std_error,
        )
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        (lo..=hi).contains(&self.slope)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub targets: Vec<f64>,
    pub trials_per_target: usize,
    pub methods: Vec<Method>,
    pub seminormal_refine: usize,
    pub seed: u64,
    pub policy: VerdictPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub trial: usize,
    pub n: usize,
    pub target_kappa: f64,
    /// `kappa_2` measured by SVD.
    pub kappa: f64,
    pub forward_error: f64,
    pub normalized_residual: f64,
    pub rhs_residual: f64,
    pub backward_error: f64,
    pub refine_iters: usize,
    /// `None` when the solver returned an error; the name is in `error`.
    pub verdict: Option<StabilityVerdict>,
    pub error: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSlopes {
    pub method: Method,
    pub forward_error: Option<SlopeFit>,
    pub residual: Option<SlopeFit>,
    pub verdict: Option<StabilityClass>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub family: String,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub slopes: Vec<MethodSlopes>,
}

impl SweepTable {
    pub fn slopes_for(&self, method: Method) -> Option<&MethodSlopes> {
        self.slopes.iter().find(|s| s.method == method)
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

/// Runs every method on matrices from `family` at each target condition number
/// and fits log-log slopes of forward error and normalized residual against
/// the measured `kappa_2`. The reference solution comes from the dense oracle
/// with compensated refinement.
pub fn kappa_sweep_experiment<F: KappaFamily + ?Sized>(
    family: &F,
    config: &SweepConfig,
) -> Result<SweepTable> {
    let mut rows = Vec::new();
    let mut kappas = Vec::new();
    for (ti, &target) in config.targets.iter().enumerate() {
        for trial in 0..config.trials_per_target {
            let index = ti * config.trials_per_target + trial;
            let mut rng = trial_rng(config.seed, index as u64);
            let (t, kappa) = family.generate(target, &mut rng)?;
            kappas.push(kappa);
            let n = t.n();
            let x_true = normal_vector(&mut rng, n);
            let b = toeplitz_matvec(&t, &x_true)?;
            let x_ref = oracle_solve(&t.to_dense(), &b)?;
            let ref_norm = x_ref.norm_inf();
            for &method in &config.methods {
                let mut row = SweepRow {
                    method,
                    trial: index,
                    n,
                    target_kappa: target,
                    kappa,
                    forward_error: f64::NAN,
                    normalized_residual: f64::NAN,
                    rhs_residual: f64::NAN,
                    backward_error: f64::NAN,
                    refine_iters: 0,
                    verdict: None,
                    error: None,
                };
                match solve_toeplitz(&t, &b, method, config.seminormal_refine) {
                    Ok(rep) => {
                        row.forward_error = rep.x.sub(&x_ref).norm_inf() / ref_norm;
                        row.normalized_residual = rep.normalized_residual;
                        row.rhs_residual = rep.rhs_residual;
                        row.backward_error = rep.backward_error();
                        row.refine_iters = rep.refine_iters;
                        row.verdict = Some(classify(&rep, &config.policy));
                    }
                    Err(e) => row.error = Some(e.name()),
                }
                rows.push(row);
            }
        }
    }
    let (lo, hi) = kappas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &k| (l.min(k), h.max(k)));
    if !(hi / lo >= 1e3) {
        return Err(DisplaceError::FamilyGenerationFailure(format!(
            "condition numbers span [{lo:e}, {hi:e}], fewer than three decades"
        )));
    }
    let slopes = config
        .methods
        .iter()
        .map(|&method| {
            let ok: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.method == method && r.verdict.is_some())
                .collect();
            let k: Vec<f64> = ok.iter().map(|r| r.kappa).collect();
            let e: Vec<f64> = ok.iter().map(|r| r.forward_error).collect();
            let res: Vec<f64> = ok.iter().map(|r| r.normalized_residual).collect();
            let failures = rows
                .iter()
                .filter(|r| r.method == method && r.error.is_some())
                .count();
            MethodSlopes {
                method,
                forward_error: SlopeFit::fit(&k, &e),
                residual: SlopeFit::fit(&k, &res),
                verdict: classify_ensemble(ok.iter().filter_map(|r| r.verdict.as_ref())),
                failures,
            }
        })
        .collect();
    Ok(SweepTable {
        family: family.describe(),
        config: config.clone(),
        rows,
        slopes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub trials: usize,
    pub n: usize,
    pub alpha: usize,
    /// Near-cancelling rank-2 generators instead of independent random ones.
    pub adversarial: bool,
    pub conditionings: Vec<GeneratorConditioning>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOutcome {
    pub conditioning: GeneratorConditioning,
    pub growth: f64,
    pub norm_growth: f64,
    /// `||P R - L U|| / ||R||`.
    pub factor_residual: f64,
    pub error: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrial {
    pub index: usize,
    /// Cancellation parameter of adversarial generators, 0 otherwise.
    pub delta: f64,
    pub outcomes: Vec<ProbeOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSummary {
    pub conditioning: GeneratorConditioning,
    pub max_growth: f64,
    pub median_growth: f64,
    pub max_residual: f64,
    pub median_residual: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedComparison {
    pub better: GeneratorConditioning,
    pub baseline: GeneratorConditioning,
    /// Trials where `better` grew no more than `baseline`.
    pub wins: usize,
    pub trials: usize,
}

impl PairedComparison {
    pub fn fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.wins as f64 / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProbe {
    pub config: ProbeConfig,
    pub trials: Vec<ProbeTrial>,
    pub summaries: Vec<ProbeSummary>,
    /// Gu against plain conditioning, when both were run.
    pub paired: Option<PairedComparison>,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Factors random Cauchy-type systems under each conditioning and records the
/// generator growth and factorization residual. Every conditioning sees the
/// same systems, so their growth can be compared trial by trial.
pub fn generator_growth_probe(config: &ProbeConfig) -> Result<GrowthProbe> {
    if config.trials == 0 || config.n == 0 {
        return Err(DisplaceError::InvalidInput(
            "probe needs at least one trial of order >= 1".into(),
        ));
    }
    if config.adversarial && config.alpha != 2 {
        return Err(DisplaceError::InvalidInput(format!(
            "near-cancelling generators have rank 2, got alpha = {}",
            config.alpha
        )));
    }
    let mut trials = Vec::with_capacity(config.trials);
    for index in 0..config.trials {
        let mut rng = trial_rng(config.seed, index as u64);
        let (sys, delta) = if config.adversarial {
            let delta = 10f64.powf(rng.random_range(-8.0..-3.0));
            (adversarial_cauchy(&mut rng, config.n, delta)?, delta)
        } else {
            (random_cauchy(&mut rng, config.n, config.alpha)?, 0.0)
        };
        let r = sys.materialize()?;
        let outcomes = config
            .conditionings
            .iter()
            .map(|&cond| match gko_factor(&sys, cond) {
                Ok(f) => ProbeOutcome {
                    conditioning: cond,
                    growth: f.growth,
                    norm_growth: f.norm_growth,
                    factor_residual: f.factor_residual(&r),
                    error: None,
                },
                Err(e) => ProbeOutcome {
                    conditioning: cond,
                    growth: f64::NAN,
                    norm_growth: f64::NAN,
                    factor_residual: f64::NAN,
                    error: Some(e.name()),
                },
            })
            .collect();
        trials.push(ProbeTrial {
            index,
            delta,
            outcomes,
        });
    }

    let summaries = config
        .conditionings
        .iter()
        .enumerate()
        .map(|(ci, &cond)| {
            let ok: Vec<&ProbeOutcome> = trials
                .iter()
                .map(|t| &t.outcomes[ci])
                .filter(|o| o.error.is_none())
                .collect();
            let mut g: Vec<f64> = ok.iter().map(|o| o.growth).collect();
            let mut r: Vec<f64> = ok.iter().map(|o| o.factor_residual).collect();
            ProbeSummary {
                conditioning: cond,
                max_growth: g.iter().copied().fold(f64::NAN, f64::max),
                median_growth: median(&mut g),
                max_residual: r.iter().copied().fold(f64::NAN, f64::max),
                median_residual: median(&mut r),
                failures: config.trials - ok.len(),
            }
        })
        .collect();

    let pos = |c| config.conditionings.iter().position(|&x| x == c);
    let paired = match (
        pos(GeneratorConditioning::GuOrthogonal),
        pos(GeneratorConditioning::Plain),
    ) {
        (Some(gu), Some(plain)) => {
            let wins = trials
                .iter()
                .filter(|t| t.outcomes[gu].growth <= t.outcomes[plain].growth)
                .count();
            Some(PairedComparison {
                better: GeneratorConditioning::GuOrthogonal,
                baseline: GeneratorConditioning::Plain,
                wins,
                trials: trials.len(),
            })
        }
        _ => None,
    };
    Ok(GrowthProbe {
        config: config.clone(),
        trials,
        summaries,
        paired,
    })
}

/// Test ensembles for [`method_benchmark`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble {
    /// Symmetric positive definite Toeplitz matrices (every method applies).
    SpdToeplitz,
    /// Nonsymmetric Toeplitz matrices with `kappa_2 <= max_kappa`.
    GeneralToeplitz { max_kappa: f64 },
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::SpdToeplitz => "spd-toeplitz",
            Ensemble::GeneralToeplitz { .. } => "general-toeplitz",
        }
    }

    /// Methods whose preconditions the ensemble satisfies.
    pub fn methods(&self) -> Vec<Method> {
        match self {
            Ensemble::SpdToeplitz => Method::ALL.to_vec(),
            Ensemble::GeneralToeplitz { .. } => Method::ALL
                .into_iter()
                .filter(|m| !matches!(m, Method::Bareiss | Method::Levinson))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub ensemble: Ensemble,
    pub n: usize,
    pub trials: usize,
    pub seminormal_refine: usize,
    pub seed: u64,
}

/// Accuracy summary of one method over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub trials: usize,
    pub failures: usize,
    pub median_residual: f64,
    pub max_residual: f64,
    pub median_error: f64,
    pub max_error: f64,
    pub max_growth: f64,
    pub verdict: Option<StabilityClass>,
}

/// Runs every applicable method on `trials` matrices of the ensemble and
/// summarizes normalized residuals, forward errors against the dense oracle,
/// generator growth and the ensemble verdict.
pub fn method_benchmark(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let methods = config.ensemble.methods();
    let mut res = vec![Vec::new(); methods.len()];
    let mut err = vec![Vec::new(); methods.len()];
    let mut growth = vec![1.0f64; methods.len()];
    let mut verdicts = vec![Vec::new(); methods.len()];
    let mut failures = vec![0usize; methods.len()];
    let policy = VerdictPolicy::default();
    for trial in 0..config.trials {
        let mut rng = trial_rng(config.seed, trial as u64);
        let t = match config.ensemble {
            Ensemble::SpdToeplitz => crate::random::random_spd_toeplitz(&mut rng, config.n),
            Ensemble::GeneralToeplitz { max_kappa } => {
                crate::random::well_conditioned_toeplitz(&mut rng, config.n, max_kappa)?.0
            }
        };
        let x_true = normal_vector(&mut rng, config.n);
        let b = toeplitz_matvec(&t, &x_true)?;
        let x_ref = oracle_solve(&t.to_dense(), &b)?;
        for (mi, &m) in methods.iter().enumerate() {
            match solve_toeplitz(&t, &b, m, config.seminormal_refine) {
                Ok(rep) => {
                    res[mi].push(rep.normalized_residual);
                    err[mi].push(rep.x.sub(&x_ref).norm_inf() / x_ref.norm_inf());
                    growth[mi] = growth[mi].max(rep.generator_growth);
                    verdicts[mi].push(classify(&rep, &policy));
                }
                Err(_) => failures[mi] += 1,
            }
        }
    }
    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| BenchRow {
            method,
            trials: config.trials,
            failures: failures[mi],
            max_residual: res[mi].iter().copied().fold(f64::NAN, f64::max),
            median_residual: median(&mut res[mi]),
            max_error: err[mi].iter().copied().fold(f64::NAN, f64::max),
            median_error: median(&mut err[mi]),
            max_growth: growth[mi],
            verdict: classify_ensemble(&verdicts[mi]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit_recovers_line() {
        let x = [1e1, 1e2, 1e3, 1e4];
        let y: Vec<f64> = x.iter().map(|v| 1e-16 * v * v).collect();
        let f = SlopeFit::fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.std_error < 1e-10);
        assert!(SlopeFit::fit(&x[..2], &y[..2]).is_none());
        assert!(SlopeFit::fit(&[1.0; 4], &y).is_none());
    }

    #[test]
    fn sweep_rejects_narrow_range() {
        let cfg = SweepConfig {
            targets: vec![10.0, 100.0],
            trials_per_target: 1,
            methods: vec![Method::Dense],
            seminormal_refine: 0,
            seed: 1,
            policy: VerdictPolicy::default(),
        };
        let err = kappa_sweep_experiment(&ProlateFamily::new(16), &cfg).unwrap_err();
        assert_eq!(err.name(), "FamilyGenerationFailure");
    }

    #[test]
    fn small_sweep_dense_is_stable() {
        let cfg = SweepConfig {
            targets: vec![10.0, 1e3, 1e5],
            trials_per_target: 2,
            methods: vec![Method::Dense, Method::Bareiss],
            seminormal_refine: 0,
            seed: 5,
            policy: VerdictPolicy::default(),
        };
        let table = kappa_sweep_experiment(&ProlateFamily::new(16), &cfg).unwrap();
        assert_eq!(table.rows.len(), 12);
        let dense = table.slopes_for(Method::Dense).unwrap();
        assert_eq!(dense.verdict, Some(StabilityClass::Stable));
        assert!(dense.residual.unwrap().within(-0.5, 0.5));
    }

    #[test]
    fn benchmark_covers_applicable_methods() {
        let rows = method_benchmark(&BenchConfig {
            ensemble: Ensemble::GeneralToeplitz { max_kappa: 1e3 },
            n: 16,
            trials: 3,
            seminormal_refine: 3,
            seed: 2,
        })
        .unwrap();
        assert_eq!(rows.len(), 5);
        let dense = rows.iter().find(|r| r.method == Method::Dense).unwrap();
        assert_eq!(dense.failures, 0);
        assert!(dense.max_residual < 100.0 * 16.0 * EPS);
    }

    #[test]
    fn probe_alpha_one_has_unit_growth() {
        let cfg = ProbeConfig {
            trials: 5,
            n: 12,
            alpha: 1,
            adversarial: false,
            conditionings: GeneratorConditioning::ALL.to_vec(),
            seed: 9,
        };
        let p = generator_growth_probe(&cfg).unwrap();
        for s in &p.summaries {
            assert_eq!(s.failures, 0);
            assert!((s.max_growth - 1.0).abs() <= EPS);
        }
        assert_eq!(p.paired.unwrap().trials, 5);
        let bad = ProbeConfig {
            adversarial: true,
            ..cfg
        };
        assert!(generator_growth_probe(&bad).is_err());
    }
}
