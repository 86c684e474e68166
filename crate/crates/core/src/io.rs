//! Text formats for matrices and vectors.
//!
//! A file is one header line followed by whitespace-separated decimal numbers;
//! line breaks in the body carry no meaning and `#` starts a comment.
//!
//! | header | body |
//! |---|---|
//! | `dense n m` | `n*m` entries, row-major |
//! | `vector n` | `n` entries |
//! | `toeplitz n` | `a_0 .. a_{n-1}`, then `a_{-1} .. a_{-(n-1)}` |
//! | `hankel n` | `2n-1` antidiagonals `h_0 .. h_{2n-2}` |
//! | `cauchy n alpha` | `t` (`n`), `s` (`n`), `Phi` (`n*alpha`, row-major), `Psi` (`alpha*n`, row-major) |
//!
//! Appending `complex` to the header makes every entry a `re im` pair.
//! Writers emit 17 significant digits, so values round-trip exactly.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::displacement::{CauchyTypeSystem, GeneratorPair};
use crate::error::{DisplaceError, Result};
use crate::matrices::{DenseMatrix, HankelMatrix, ToeplitzMatrix, Vector};
use crate::scalar::Scalar;

/// Contents of a file, for one scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData<S: Scalar = f64> {
    Dense(DenseMatrix<S>),
    Vector(Vector<S>),
    Toeplitz(ToeplitzMatrix<S>),
    Hankel(HankelMatrix<S>),
    Cauchy(CauchyTypeSystem<S>),
}

impl<S: Scalar> MatrixData<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            MatrixData::Dense(_) => "dense",
            MatrixData::Vector(_) => "vector",
            MatrixData::Toeplitz(_) => "toeplitz",
            MatrixData::Hankel(_) => "hankel",
            MatrixData::Cauchy(_) => "cauchy",
        }
    }
}

impl MatrixData<f64> {
    /// The same data over the complex field.
    pub fn to_complex(&self) -> MatrixData<Complex64> {
        let c = |v: f64| Complex64::new(v, 0.0);
        match self {
            MatrixData::Dense(a) => MatrixData::Dense(a.map(c)),
            MatrixData::Vector(v) => MatrixData::Vector(v.map(c)),
            MatrixData::Toeplitz(t) => MatrixData::Toeplitz(t.map(c)),
            MatrixData::Hankel(h) => MatrixData::Hankel(
                HankelMatrix::new(h.antidiagonals().iter().map(|&v| c(v)).collect())
                    .expect("same shape as a valid Hankel matrix"),
            ),
            MatrixData::Cauchy(k) => {
                let g = k.generators();
                MatrixData::Cauchy(
                    CauchyTypeSystem::new(
                        k.t().map(c),
                        k.s().map(c),
                        GeneratorPair::new(g.phi().map(c), g.psi().map(c))
                            .expect("same shape as valid generators"),
                    )
                    .expect("real nodes that did not collide still do not"),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Real(MatrixData<f64>),
    Complex(MatrixData<Complex64>),
}

impl Parsed {
    pub fn kind(&self) -> &'static str {
        match self {
            Parsed::Real(d) => d.kind(),
            Parsed::Complex(d) => d.kind(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Parsed::Complex(_))
    }

    /// The data over the complex field, converting real input.
    pub fn into_complex(self) -> MatrixData<Complex64> {
        match self {
            Parsed::Real(d) => d.to_complex(),
            Parsed::Complex(d) => d,
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> DisplaceError {
    DisplaceError::ParseError {
        line,
        message: message.into(),
    }
}

/// Body tokens with their 1-based line numbers.
struct Body<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Body<'a> {
    fn next_f64(&mut self) -> Result<f64> {
        let (line, tok) = *self.tokens.get(self.pos).ok_or_else(|| {
            perr(
                self.last_line,
                format!("unexpected end of input after {} numbers", self.pos),
            )
        })?;
        self.pos += 1;
        let v: f64 = tok
            .parse()
            .map_err(|_| perr(line, format!("invalid number {tok:?}")))?;
        if !v.is_finite() {
            return Err(perr(line, format!("non-finite value {tok:?}")));
        }
        Ok(v)
    }

    fn next<S: Scalar>(&mut self) -> Result<S> {
        let re = self.next_f64()?;
        if S::IS_COMPLEX {
            let im = self.next_f64()?;
            Ok(S::from_complex(Complex64::new(re, im)))
        } else {
            Ok(S::from_f64(re))
        }
    }

    fn take<S: Scalar>(&mut self, count: usize) -> Result<Vec<S>> {
        (0..count).map(|_| self.next()).collect()
    }

    fn finish(&self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(&(line, tok)) => Err(perr(line, format!("unexpected trailing token {tok:?}"))),
            None => Ok(()),
        }
    }
}

fn parse_dim(line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| perr(line, format!("header is missing {what}")))?;
    match tok.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(perr(
            line,
            format!("{what} must be a positive integer, got {tok:?}"),
        )),
    }
}

fn parse_body<S: Scalar>(
    kind: &str,
    dims: &[usize],
    body: &mut Body<'_>,
    hline: usize,
) -> Result<MatrixData<S>> {
    let at = |e: DisplaceError| match e {
        DisplaceError::ParseError { .. } => e,
        other => perr(hline, other.to_string()),
    };
    let data = match kind {
        "dense" => {
            let (n, m) = (dims[0], dims[1]);
            MatrixData::Dense(DenseMatrix::from_row_major(n, m, body.take(n * m)?).map_err(at)?)
        }
        "vector" => MatrixData::Vector(Vector::new(body.take(dims[0])?).map_err(at)?),
        "toeplitz" => {
            let n = dims[0];
            let col = body.take(n)?;
            let row = body.take(n - 1)?;
            MatrixData::Toeplitz(ToeplitzMatrix::new(col, row).map_err(at)?)
        }
        "hankel" => MatrixData::Hankel(HankelMatrix::new(body.take(2 * dims[0] - 1)?).map_err(at)?),
        "cauchy" => {
            let (n, alpha) = (dims[0], dims[1]);
            let t = Vector::new(body.take(n)?).map_err(at)?;
            let s = Vector::new(body.take(n)?).map_err(at)?;
            let phi = DenseMatrix::from_row_major(n, alpha, body.take(n * alpha)?).map_err(at)?;
            let psi = DenseMatrix::from_row_major(alpha, n, body.take(alpha * n)?).map_err(at)?;
            let gen = GeneratorPair::new(phi, psi).map_err(at)?;
            // Node collisions are a property of the data, not of the syntax.
            MatrixData::Cauchy(CauchyTypeSystem::new(t, s, gen)?)
        }
        _ => unreachable!("kind checked by caller"),
    };
    body.finish()?;
    Ok(data)
}

/// Parses a file in one of the formats above.
pub fn parse(text: &str) -> Result<Parsed> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let mut words: Vec<&str> = header.split_whitespace().collect();
    let complex = words.last() == Some(&"complex");
    if complex {
        words.pop();
    }
    let kind = *words.first().ok_or_else(|| perr(hline, "missing header"))?;
    let arity = match kind {
        "vector" | "toeplitz" | "hankel" => 1,
        "dense" | "cauchy" => 2,
        other => return Err(perr(hline, format!("unknown matrix kind {other:?}"))),
    };
    if words.len() != arity + 1 {
        return Err(perr(
            hline,
            format!("`{kind}` header takes {arity} dimension(s)"),
        ));
    }
    let names = if kind == "cauchy" {
        ["n", "alpha"]
    } else {
        ["n", "m"]
    };
    let dims: Vec<usize> = (0..arity)
        .map(|i| parse_dim(hline, words.get(i + 1).copied(), names[i]))
        .collect::<Result<_>>()?;

    let tokens: Vec<(usize, &str)> = lines
        .flat_map(|(ln, l)| l.split_whitespace().map(move |t| (ln, t)))
        .collect();
    let mut body = Body {
        last_line: tokens.last().map_or(hline, |t| t.0),
        tokens,
        pos: 0,
    };
    if complex {
        Ok(Parsed::Complex(parse_body(kind, &dims, &mut body, hline)?))
    } else {
        Ok(Parsed::Real(parse_body(kind, &dims, &mut body, hline)?))
    }
}

fn push<S: Scalar>(out: &mut String, vals: impl IntoIterator<Item = S>) {
    let cells: Vec<String> = vals
        .into_iter()
        .map(|v| {
            if S::IS_COMPLEX {
                let z = v.to_complex();
                format!("{:.16e} {:.16e}", z.re, z.im)
            } else {
                format!("{:.16e}", v.re())
            }
        })
        .collect();
    let _ = writeln!(out, "{}", cells.join(" "));
}

/// Serializes in the format [`parse`] reads.
pub fn write<S: Scalar>(data: &MatrixData<S>) -> String {
    let suffix = if S::IS_COMPLEX { " complex" } else { "" };
    let mut out = String::new();
    match data {
        MatrixData::Dense(a) => {
            let _ = writeln!(out, "dense {} {}{suffix}", a.rows(), a.cols());
            for i in 0..a.rows() {
                push(&mut out, a.row(i).iter().copied());
            }
        }
        MatrixData::Vector(v) => {
            let _ = writeln!(out, "vector {}{suffix}", v.len());
            push(&mut out, v.iter().copied());
        }
        MatrixData::Toeplitz(t) => {
            let _ = writeln!(out, "toeplitz {}{suffix}", t.n());
            push(&mut out, t.first_column().iter().copied());
            push(&mut out, t.first_row_tail().iter().copied());
        }
        MatrixData::Hankel(h) => {
            let _ = writeln!(out, "hankel {}{suffix}", h.n());
            push(&mut out, h.antidiagonals().iter().copied());
        }
        MatrixData::Cauchy(c) => {
            let g = c.generators();
            let _ = writeln!(out, "cauchy {} {}{suffix}", c.n(), g.alpha());
            push(&mut out, c.t().iter().copied());
            push(&mut out, c.s().iter().copied());
            for i in 0..c.n() {
                push(&mut out, g.phi().row(i).iter().copied());
            }
            for a in 0..g.alpha() {
                push(&mut out, g.psi().row(a).iter().copied());
            }
        }
    }
    out
}
