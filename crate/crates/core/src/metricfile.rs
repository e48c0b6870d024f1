//! The plain-text metric file format.
//!
//! ```text
//! # comment
//! dim = 3
//! metric
//! g[1][1] = 1
//! g[2][2] = 1/(1 + x2^2 + x3^2)
//! g[3][3] = 1/(1 + x2^2 + x3^2)
//! potential = -log(1 + x2^2 + x3^2)
//! lambda = 0
//! domain = box(-1, -2, -2, 1, 2, 2)
//! ```
//!
//! Indices are 1-based and only `i ≤ j` may be given; omitted components
//! are zero. `domain` lists the `n` lower bounds followed by the `n` upper
//! bounds and is optional. Blank lines and `#` comments are ignored.

use thiserror::Error;

use crate::expr::{Expr, ParseError};
use crate::tensor::{ChartBox, MetricSpec, TensorError};

#[derive(Debug, Error)]
pub enum MetricFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: in expression: {source}")]
    Expr {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Spec(#[from] TensorError),
}

fn syntax(line: usize, message: impl Into<String>) -> MetricFileError {
    MetricFileError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_index(s: &str, line: usize) -> Result<(usize, usize), MetricFileError> {
    // "g[i][j]"
    let s = s.trim();
    let rest = s
        .strip_prefix("g[")
        .ok_or_else(|| syntax(line, format!("expected `g[i][j]`, found `{s}`")))?;
    let (i, rest) = rest
        .split_once("][")
        .ok_or_else(|| syntax(line, format!("expected `g[i][j]`, found `{s}`")))?;
    let j = rest
        .strip_suffix(']')
        .ok_or_else(|| syntax(line, format!("expected `g[i][j]`, found `{s}`")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| syntax(line, format!("bad component index `{t}`")))
    };
    Ok((parse(i)?, parse(j)?))
}

fn parse_real(s: &str, line: usize, what: &str) -> Result<f64, MetricFileError> {
    let e = Expr::parse(s).map_err(|source| MetricFileError::Expr { line, source })?;
    if e.min_dim() > 0 {
        return Err(syntax(line, format!("{what} must be a constant")));
    }
    e.eval(&[])
        .map_err(|err| syntax(line, format!("{what}: {err}")))
}

pub fn parse_metric_file(text: &str) -> Result<MetricSpec, MetricFileError> {
    let mut dim: Option<(usize, usize)> = None;
    let mut in_metric = false;
    let mut comps: Vec<(usize, usize, Expr, usize)> = Vec::new();
    let mut potential: Option<Expr> = None;
    let mut lambda: Option<f64> = None;
    let mut domain: Option<(Vec<f64>, usize)> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if content == "metric" {
            if dim.is_none() {
                return Err(syntax(line, "`metric` before `dim`"));
            }
            in_metric = true;
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        let expr = |v: &str| Expr::parse(v).map_err(|source| MetricFileError::Expr { line, source });
        match key {
            "dim" => {
                if dim.is_some() {
                    return Err(syntax(line, "duplicate `dim`"));
                }
                let n: usize = value
                    .parse()
                    .map_err(|_| syntax(line, format!("bad dimension `{value}`")))?;
                if !(2..=5).contains(&n) {
                    return Err(syntax(line, format!("dimension {n} outside [2, 5]")));
                }
                dim = Some((n, line));
            }
            "potential" => {
                if potential.is_some() {
                    return Err(syntax(line, "duplicate `potential`"));
                }
                potential = Some(expr(value)?);
                in_metric = false;
            }
            "lambda" => {
                if lambda.is_some() {
                    return Err(syntax(line, "duplicate `lambda`"));
                }
                lambda = Some(parse_real(value, line, "lambda")?);
                in_metric = false;
            }
            "domain" => {
                let inner = value
                    .strip_prefix("box(")
                    .and_then(|v| v.strip_suffix(')'))
                    .ok_or_else(|| syntax(line, "expected `box(lo..., hi...)`"))?;
                let vals = inner
                    .split(',')
                    .map(|t| parse_real(t.trim(), line, "domain bound"))
                    .collect::<Result<Vec<_>, _>>()?;
                domain = Some((vals, line));
                in_metric = false;
            }
            k if k.starts_with("g[") => {
                if !in_metric {
                    return Err(syntax(line, "metric component outside the `metric` block"));
                }
                let n = dim.unwrap().0;
                let (i, j) = parse_index(k, line)?;
                if i < 1 || j < 1 || i > n || j > n {
                    return Err(syntax(line, format!("component g[{i}][{j}] outside 1..={n}")));
                }
                if i > j {
                    return Err(syntax(line, format!("give g[{j}][{i}] instead of g[{i}][{j}]")));
                }
                if comps.iter().any(|c| c.0 == i - 1 && c.1 == j - 1) {
                    return Err(syntax(line, format!("duplicate g[{i}][{j}]")));
                }
                let e = expr(value)?;
                comps.push((i - 1, j - 1, e, line));
            }
            other => return Err(syntax(line, format!("unknown key `{other}`"))),
        }
    }

    let (n, _) = dim.ok_or(MetricFileError::Missing("dim"))?;
    if comps.is_empty() {
        return Err(MetricFileError::Missing("metric"));
    }
    for (_, _, e, line) in &comps {
        if e.min_dim() > n {
            return Err(syntax(
                *line,
                format!("coordinate x{} used in a {n}-dimensional chart", e.min_dim()),
            ));
        }
    }
    let potential = potential.ok_or(MetricFileError::Missing("potential"))?;
    let lambda = lambda.ok_or(MetricFileError::Missing("lambda"))?;
    let domain = match domain {
        None => None,
        Some((v, line)) => {
            if v.len() != 2 * n {
                return Err(syntax(
                    line,
                    format!("domain needs {} bounds, found {}", 2 * n, v.len()),
                ));
            }
            let (lo, hi) = v.split_at(n);
            Some(ChartBox::new(lo.to_vec(), hi.to_vec()).map_err(|e| syntax(line, e.to_string()))?)
        }
    };
    let spec = MetricSpec::new(
        n,
        |i, j| {
            comps
                .iter()
                .find(|c| c.0 == i && c.1 == j)
                .map(|c| c.2.clone())
                .unwrap_or(Expr::Num(0.0))
        },
        potential,
        lambda,
        domain,
    )?;
    Ok(spec)
}

fn real(v: f64) -> String {
    if v < 0.0 {
        format!("({v:?})")
    } else {
        format!("{v:?}")
    }
}

/// Canonical text for `spec`; parsing it back gives an equal spec.
pub fn print_metric_file(spec: &MetricSpec) -> String {
    let n = spec.dim();
    let mut s = format!("dim = {n}\nmetric\n");
    for i in 0..n {
        for j in i..n {
            let e = spec.component(i, j);
            if !e.is_zero() {
                s.push_str(&format!("g[{}][{}] = {}\n", i + 1, j + 1, e));
            }
        }
    }
    s.push_str(&format!("potential = {}\n", spec.potential));
    s.push_str(&format!("lambda = {}\n", real(spec.lambda)));
    if let Some(b) = &spec.domain {
        let vals = b.lo.iter().chain(&b.hi).map(|&v| real(v)).collect::<Vec<_>>();
        s.push_str(&format!("domain = box({})\n", vals.join(", ")));
    }
    s
}
