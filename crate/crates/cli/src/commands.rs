use std::fs;
use std::path::Path;

use displace_core::io::{self, MatrixData, Parsed};
use displace_core::seminormal::normal_residual;
use displace_core::stability_lab::{
    classify, default_tolerance, guaranteed_solve, method_benchmark, solve_with_method,
    stability_report, write_bench, write_solve_report, BenchConfig, Document, Ensemble,
    StabilityReportConfig, StructuredSystem, VerdictPolicy,
};
use displace_core::toeplitz_pipeline::toeplitz_to_cauchy;
use displace_core::{
    bareiss_factor, dense_lu_pp, gko_factor, gko_toeplitz_factor, toeplitz_generators,
    verify_generators, DenseMatrix, DisplaceError, DisplacementOperator, GeneratorConditioning,
    Materialize, Method, Scalar, StructuredLUFactors, ToeplitzMatrix, Vector, EPS,
};

use crate::{BenchArgs, FactorArgs, Failure, MethodArg, Output, ReportArgs, SolveArgs, VerifyArgs};

fn read(path: &Path) -> Result<Parsed, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(io::parse(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(doc: &Document, out: &Output) -> Result<(), Failure> {
    match &out.out {
        Some(p) => write_file(p, doc.render()),
        None => {
            print!("{}", doc.render());
            Ok(())
        }
    }
}

fn to_system<S: Scalar>(m: MatrixData<S>) -> Result<StructuredSystem<S>, Failure> {
    Ok(match m {
        MatrixData::Dense(d) => StructuredSystem::Dense(d),
        MatrixData::Toeplitz(t) => StructuredSystem::Toeplitz(t),
        MatrixData::Hankel(h) => StructuredSystem::Hankel(h),
        MatrixData::Cauchy(c) => StructuredSystem::Cauchy(c),
        MatrixData::Vector(_) => {
            return Err(Failure::Usage(
                "expected a matrix file, got a vector".into(),
            ))
        }
    })
}

fn method_of(m: MethodArg, cond: GeneratorConditioning) -> Method {
    match m {
        MethodArg::Gko | MethodArg::Auto => Method::Gko(cond),
        MethodArg::Bareiss => Method::Bareiss,
        MethodArg::Levinson => Method::Levinson,
        MethodArg::Seminormal => Method::Seminormal,
        MethodArg::Dense => Method::Dense,
    }
}

fn spd_candidate<S: Scalar>(t: &ToeplitzMatrix<S>) -> bool {
    !S::IS_COMPLEX && t.is_symmetric() && t.diag(0).re() > 0.0
}

pub fn solve(a: &SolveArgs) -> Result<(), Failure> {
    let (m, b) = (read(&a.matrix)?, read(&a.rhs)?);
    match (m, b) {
        (Parsed::Real(m), Parsed::Real(MatrixData::Vector(b))) => solve_in(m, b, a),
        (m, b) => match b.into_complex() {
            MatrixData::Vector(b) => solve_in(m.into_complex(), b, a),
            other => Err(Failure::Usage(format!(
                "--rhs must be a vector file, got {}",
                other.kind()
            ))),
        },
    }
}

fn solve_in<S: Scalar>(m: MatrixData<S>, b: Vector<S>, a: &SolveArgs) -> Result<(), Failure> {
    let sys = to_system(m)?;
    let tol = a.tol.unwrap_or_else(|| default_tolerance(sys.n()));
    let report = match a.method {
        MethodArg::Auto => guaranteed_solve(&sys, &b, Some(tol))?,
        m => solve_with_method(&sys, &b, method_of(m, a.pivot.into()), a.refine)?,
    };
    let verdict = classify(&report, &VerdictPolicy::default());
    let mut doc = Document::new("solve");
    doc.kv("input", sys.kind())
        .kv("complex", S::IS_COMPLEX)
        .num("tol", tol);
    write_solve_report(&mut doc, &report, &verdict);

    // Least squares: the residual itself need not vanish, its projection does.
    let (measure, label) = match &sys {
        StructuredSystem::Dense(d) if !d.is_square() => {
            let d = d.map(|v| v.re());
            let b: Vec<f64> = b.iter().map(|v| v.re()).collect();
            let x: Vec<f64> = report.x.iter().map(|v| v.re()).collect();
            let nr = normal_residual(&d, &b, &x)?;
            doc.section("least_squares").num("normal_residual", nr);
            (nr, "normal residual")
        }
        _ => (report.normalized_residual, "normalized residual"),
    };
    emit(&doc, &a.output)?;
    if measure <= tol {
        Ok(())
    } else {
        Err(Failure::Check {
            name: "UnsolvedWithinTolerance",
            message: format!("{label} {measure:e} exceeds tolerance {tol:e}"),
        })
    }
}

pub fn factor(a: &FactorArgs) -> Result<(), Failure> {
    match read(&a.matrix)? {
        Parsed::Real(m) => factor_in(m, a),
        Parsed::Complex(m) => factor_in(m, a),
    }
}

fn relative_diff<S: Scalar>(a: &DenseMatrix<S>, b: &DenseMatrix<S>) -> Result<f64, Failure> {
    let d = a.sub(b)?.norm_inf();
    let n = b.norm_inf();
    Ok(if n > 0.0 { d / n } else { d })
}

fn export<S: Scalar>(
    a: &FactorArgs,
    l: &DenseMatrix<S>,
    u: &DenseMatrix<S>,
) -> Result<(), Failure> {
    if let Some(p) = &a.l_out {
        write_file(p, &io::write(&MatrixData::Dense(l.clone())))?;
    }
    if let Some(p) = &a.u_out {
        write_file(p, &io::write(&MatrixData::Dense(u.clone())))?;
    }
    Ok(())
}

fn perm_string(perm: &[usize]) -> String {
    perm.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_gko<S: Scalar>(doc: &mut Document, f: &StructuredLUFactors<S>, r: &DenseMatrix<S>) {
    doc.kv("conditioning", f.conditioning)
        .num("growth", f.growth)
        .num("norm_growth", f.norm_growth)
        .num("factor_residual", f.factor_residual(r))
        .kv("perm", perm_string(&f.perm));
    let rows: Vec<Vec<String>> = f
        .pivot_log
        .iter()
        .enumerate()
        .map(|(k, s)| {
            vec![
                k.to_string(),
                s.row.to_string(),
                displace_core::stability_lab::fmt_num(s.phi_norm),
                displace_core::stability_lab::fmt_num(s.psi_norm),
                displace_core::stability_lab::fmt_num(s.cancellation),
            ]
        })
        .collect();
    doc.table(
        "pivots",
        &["step", "row", "phi_norm", "psi_norm", "cancellation"],
        &rows,
    );
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FactorKind {
    Gko,
    Bareiss,
    Dense,
}

fn factor_in<S: Scalar>(m: MatrixData<S>, a: &FactorArgs) -> Result<(), Failure> {
    let sys = to_system(m)?;
    let cond: GeneratorConditioning = a.pivot.into();
    let kind = match (a.method, &sys) {
        (MethodArg::Gko, _) => FactorKind::Gko,
        (MethodArg::Bareiss, _) => FactorKind::Bareiss,
        (MethodArg::Dense, _) => FactorKind::Dense,
        (MethodArg::Auto, StructuredSystem::Toeplitz(t)) if spd_candidate(t) => {
            if bareiss_factor(&t.map(|v| v.re())).is_ok() {
                FactorKind::Bareiss
            } else {
                FactorKind::Gko
            }
        }
        (MethodArg::Auto, StructuredSystem::Dense(_)) => FactorKind::Dense,
        (MethodArg::Auto, _) => FactorKind::Gko,
        (m @ (MethodArg::Levinson | MethodArg::Seminormal), _) => {
            return Err(Failure::Usage(format!(
                "factor supports gko, bareiss, dense and auto, not {}",
                if m == MethodArg::Levinson {
                    "levinson"
                } else {
                    "seminormal"
                }
            )))
        }
    };

    let mut doc = Document::new("factor");
    doc.kv("input", sys.kind())
        .kv("complex", S::IS_COMPLEX)
        .kv("n", sys.n());
    match (kind, &sys) {
        (FactorKind::Dense, _) => {
            let dense = sys.materialize()?;
            let lu = dense_lu_pp(&dense)?;
            doc.section("factor")
                .kv("method", Method::Dense)
                .num("growth", lu.growth)
                .num("factor_residual", relative_diff(&lu.reconstruct(), &dense)?)
                .kv("perm", perm_string(&lu.perm));
            export(a, &lu.l, &lu.u)?;
        }
        (FactorKind::Bareiss, StructuredSystem::Toeplitz(t)) if !S::IS_COMPLEX => {
            let t = t.map(|v| v.re());
            let f = bareiss_factor(&t)?;
            doc.section("factor")
                .kv("method", Method::Bareiss)
                .num("growth", 1.0)
                .num(
                    "factor_residual",
                    relative_diff(&f.l.matmul(&f.u)?, &t.to_dense())?,
                );
            export(a, &f.l, &f.u)?;
        }
        (FactorKind::Gko, StructuredSystem::Toeplitz(_) | StructuredSystem::Hankel(_)) => {
            let (t, reversed) = match &sys {
                StructuredSystem::Hankel(h) => (h.row_reversed(), true),
                StructuredSystem::Toeplitz(t) => (t.clone(), false),
                _ => unreachable!(),
            };
            let fac = gko_toeplitz_factor(&t, cond)?;
            let r = toeplitz_to_cauchy(&t).materialize()?;
            let tc = t.map(|v| v.to_complex()).to_dense();
            doc.section("factor")
                .kv("method", Method::Gko(cond))
                .kv(
                    "factored",
                    if reversed {
                        "J H = F^* P^T L U F D"
                    } else {
                        "T = F^* P^T L U F D"
                    },
                )
                .num(
                    "reconstruction_residual",
                    relative_diff(&fac.reconstruct(), &tc)?,
                );
            write_gko(&mut doc, fac.cauchy_factors(), &r);
            export(a, &fac.cauchy_factors().l, &fac.cauchy_factors().u)?;
        }
        (FactorKind::Gko, StructuredSystem::Cauchy(c)) => {
            let f = gko_factor(c, cond)?;
            doc.section("factor").kv("method", Method::Gko(cond));
            write_gko(&mut doc, &f, &c.materialize()?);
            export(a, &f.l, &f.u)?;
        }
        (k, _) => {
            return Err(DisplaceError::InvalidInput(format!(
                "{} factorization does not apply to {}{} input",
                if k == FactorKind::Gko {
                    "gko"
                } else {
                    "bareiss"
                },
                if S::IS_COMPLEX { "complex " } else { "" },
                sys.kind()
            ))
            .into())
        }
    }
    emit(&doc, &a.output)
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    match read(&a.matrix)? {
        Parsed::Real(m) => verify_in(m, a),
        Parsed::Complex(m) => verify_in(m, a),
    }
}

fn verify_in<S: Scalar>(m: MatrixData<S>, a: &VerifyArgs) -> Result<(), Failure> {
    let mut doc = Document::new("verify-displacement");
    doc.kv("input", m.kind()).kv("complex", S::IS_COMPLEX);
    let toeplitz =
        |t: &ToeplitzMatrix<S>, doc: &mut Document| -> Result<(usize, Vec<f64>), Failure> {
            let gen = toeplitz_generators(t);
            let r = verify_generators(&DisplacementOperator::toeplitz(), &t.to_dense(), &gen)?;
            let c = toeplitz_to_cauchy(t);
            let rc = verify_generators(&c.operator(), &c.materialize()?, c.generators())?;
            doc.kv("n", t.n())
                .kv("operator", "Z_1 R - R Z_-1")
                .kv("alpha", gen.alpha())
                .num("residual", r)
                .num("transformed_residual", rc);
            Ok((t.n(), vec![r, rc]))
        };
    let (n, residuals) = match &m {
        MatrixData::Toeplitz(t) => toeplitz(t, &mut doc)?,
        MatrixData::Hankel(h) => {
            doc.kv("checked", "row-reversed toeplitz J H");
            toeplitz(&h.row_reversed(), &mut doc)?
        }
        MatrixData::Cauchy(c) => {
            let r = verify_generators(&c.operator(), &c.materialize()?, c.generators())?;
            doc.kv("n", c.n())
                .kv("operator", "D_t R - R D_s")
                .kv("alpha", c.generators().alpha())
                .num("residual", r);
            (c.n(), vec![r])
        }
        other => {
            return Err(Failure::Usage(format!(
                "verify-displacement needs a toeplitz, hankel or cauchy file, got {}",
                other.kind()
            )))
        }
    };
    let threshold = 100.0 * n as f64 * EPS;
    let ok = residuals.iter().all(|&r| r <= threshold);
    doc.num("threshold", threshold).kv("within_tolerance", ok);
    emit(&doc, &a.output)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Check {
            name: "VerificationFailed",
            message: format!("displacement residual above {threshold:e}"),
        })
    }
}

pub fn bench(a: &BenchArgs) -> Result<(), Failure> {
    if a.n == 0 || a.trials == 0 {
        return Err(Failure::Usage("--n and --trials must be positive".into()));
    }
    let mut doc = Document::new("bench");
    doc.kv("seed", a.seed).kv("norm", "inf");
    for ensemble in [
        Ensemble::SpdToeplitz,
        Ensemble::GeneralToeplitz {
            max_kappa: a.max_kappa,
        },
    ] {
        let cfg = BenchConfig {
            ensemble,
            n: a.n,
            trials: a.trials,
            seminormal_refine: a.refine,
            seed: a.seed,
        };
        let rows = method_benchmark(&cfg)?;
        write_bench(&mut doc, &cfg, &rows);
    }
    emit(&doc, &a.output)
}

pub fn stability(a: &ReportArgs) -> Result<(), Failure> {
    if a.n < 2 || a.trials == 0 || a.probe_trials == 0 || a.probe_n == 0 {
        return Err(Failure::Usage(
            "--n must be >= 2 and trial counts positive".into(),
        ));
    }
    let mut cfg = StabilityReportConfig::new(a.seed);
    cfg.n = a.n;
    cfg.trials_per_target = a.trials;
    cfg.probe_trials = a.probe_trials;
    cfg.probe_n = a.probe_n;
    cfg.seminormal_refine = a.refine;
    emit(&stability_report(&cfg)?.to_document(), &a.output)
}
