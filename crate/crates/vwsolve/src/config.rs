//! Human-readable run configuration.
//!
//! Line-oriented key = value pairs with one optional `problem { ... }`
//! block. Arrays use brackets, comments start with `#`. Distribution
//! expressions are sums of constants and weighted deltas, e.g.
//! `a = 1 + delta(x - 0.45)` or `b = 1 + 2*delta(t - 0.5)`.
//!
//! ```text
//! case = 2
//! theta = 1.0
//! T = 1.0
//! epsilons = [0.3, 0.1, 0.05]
//! snapshots = [0, 0.25, 1.0]
//! out = results
//! problem {
//!   a = 1 + delta(x - 0.45)
//!   u0 = peak
//! }
//! ```

use crate::cases::{builtin_case_at, initial_expr, SNAPSHOT_TIMES};
use crate::dist::{DistExpr, DEFAULT_EPSILONS};
use crate::problem::{ProblemSpec, SpaceTimeExpr};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: u32,
    pub problem: Option<ProblemSpec<f64>>,
    pub theta: f64,
    pub t_horizon: f64,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub epsilons: Vec<f64>,
    pub snapshots: Vec<f64>,
    pub out_dir: PathBuf,
    pub delta_location: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: 1,
            problem: None,
            theta: 1.0,
            t_horizon: 1.0,
            nx: None,
            nt: None,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            snapshots: SNAPSHOT_TIMES.to_vec(),
            out_dir: PathBuf::from("out"),
            delta_location: None,
        }
    }
}

impl RunConfig {
    /// The problem to run: inline block if present, built-in case otherwise.
    pub fn spec(&self) -> ProblemSpec<f64> {
        match &self.problem {
            Some(p) => {
                let mut p = p.clone();
                p.t_horizon = self.t_horizon;
                p
            }
            None => {
                let mut s = builtin_case_at(self.case, self.delta_location)
                    .expect("case id validated at parse time");
                s.t_horizon = self.t_horizon;
                s
            }
        }
    }

    /// Canonical text echo for the run log.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("case = {}\n", self.case));
        s.push_str(&format!("theta = {}\n", self.theta));
        s.push_str(&format!("T = {}\n", self.t_horizon));
        if let Some(nx) = self.nx {
            s.push_str(&format!("nx = {nx}\n"));
        }
        if let Some(nt) = self.nt {
            s.push_str(&format!("nt = {nt}\n"));
        }
        s.push_str(&format!("epsilons = {:?}\n", self.epsilons));
        s.push_str(&format!("snapshots = {:?}\n", self.snapshots));
        s.push_str(&format!("out = {}\n", self.out_dir.display()));
        if let Some(loc) = self.delta_location {
            s.push_str(&format!("delta_location = {loc}\n"));
        }
        if let Some(p) = &self.problem {
            s.push_str("problem {\n");
            s.push_str(&format!("  a = {}\n", space_time_to_string(&p.a, "x")));
            s.push_str(&format!("  b = {}\n", space_time_to_string(&p.b, "x")));
            s.push_str(&format!("  q = {}\n", expr_to_string(&p.q, "x")));
            s.push_str(&format!("  f = {}\n", space_time_to_string(&p.f, "x")));
            s.push_str(&format!("  u0 = {}\n", expr_to_string(&p.u0, "x")));
            s.push_str(&format!("  g0 = {}\n", expr_to_string(&p.g0, "t")));
            s.push_str(&format!("  g1 = {}\n", expr_to_string(&p.g1, "t")));
            s.push_str(&format!("  alpha = {}\n", p.alpha));
            s.push_str("}\n");
        }
        s
    }
}

pub fn expr_to_string(expr: &DistExpr<f64>, var: &str) -> String {
    match expr {
        DistExpr::Constant(k) => format!("{k}"),
        DistExpr::Smooth { .. } => "smooth".to_string(),
        DistExpr::Delta { location, weight } => {
            if (*weight - 1.0).abs() < 1e-15 {
                format!("delta({var} - {location})")
            } else {
                format!("{weight}*delta({var} - {location})")
            }
        }
        DistExpr::Heaviside {
            location,
            low,
            high,
        } => format!("heaviside({var} - {location}; {low}; {high})"),
        DistExpr::Sum(terms) => terms
            .iter()
            .map(|t| expr_to_string(t, var))
            .collect::<Vec<_>>()
            .join(" + "),
    }
}

fn space_time_to_string(expr: &SpaceTimeExpr<f64>, xvar: &str) -> String {
    match expr {
        SpaceTimeExpr::SpaceOnly(e) => expr_to_string(e, xvar),
        SpaceTimeExpr::TimeOnly(e) => expr_to_string(e, "t"),
        SpaceTimeExpr::Product { t, x } => format!(
            "({}) * ({})",
            expr_to_string(t, "t"),
            expr_to_string(x, xvar)
        ),
    }
}

struct ProblemBlock {
    a: Option<(DistExpr<f64>, Option<char>)>,
    b: Option<(DistExpr<f64>, Option<char>)>,
    q: Option<DistExpr<f64>>,
    f: Option<(DistExpr<f64>, Option<char>)>,
    u0: Option<DistExpr<f64>>,
    g0: Option<DistExpr<f64>>,
    g1: Option<DistExpr<f64>>,
    alpha: Option<f64>,
    seen: bool,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ParseError> {
    let mut cfg = RunConfig::default();
    let mut block = ProblemBlock {
        a: None,
        b: None,
        q: None,
        f: None,
        u0: None,
        g0: None,
        g1: None,
        alpha: None,
        seen: false,
    };
    let mut in_block = false;
    for (li, raw) in text.lines().enumerate() {
        let line_no = li + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "}" {
            if !in_block {
                return err(line_no, col_of(raw, "}"), "unmatched '}'");
            }
            in_block = false;
            continue;
        }
        if trimmed == "problem {" || trimmed == "problem{" {
            if block.seen {
                return err(line_no, 1, "duplicate problem block");
            }
            block.seen = true;
            in_block = true;
            continue;
        }
        let eq = match line.find('=') {
            Some(p) => p,
            None => return err(line_no, 1, format!("expected key = value, got '{trimmed}'")),
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        let vcol = col_of(raw, value);
        if value.is_empty() {
            return err(line_no, vcol, format!("missing value for key '{key}'"));
        }
        if in_block {
            parse_problem_key(&mut block, key, value, line_no, vcol, raw)?;
        } else {
            parse_top_key(&mut cfg, key, value, line_no, vcol, raw)?;
        }
    }
    if in_block {
        return err(text.lines().count(), 1, "unterminated problem block");
    }
    if block.seen {
        cfg.problem = Some(assemble_problem(block, cfg.t_horizon));
    }
    Ok(cfg)
}

fn col_of(raw: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return raw.len() + 1;
    }
    match raw.find(needle) {
        Some(p) => p + 1,
        None => 1,
    }
}

fn parse_top_key(
    cfg: &mut RunConfig,
    key: &str,
    value: &str,
    line: usize,
    col: usize,
    _raw: &str,
) -> Result<(), ParseError> {
    match key {
        "case" => {
            let id: u32 = value
                .parse()
                .map_err(|_| ParseError {
                    line,
                    col,
                    msg: format!("case must be an integer, got '{value}'"),
                })?;
            if !(1..=5).contains(&id) {
                return err(line, col, format!("case id {id} out of range 1..=5"));
            }
            cfg.case = id;
        }
        "theta" => cfg.theta = parse_number(value, line, col)?,
        "T" => cfg.t_horizon = parse_number(value, line, col)?,
        "nx" => cfg.nx = Some(parse_usize(value, line, col)?),
        "nt" => cfg.nt = Some(parse_usize(value, line, col)?),
        "epsilons" => {
            let eps = parse_array(value, line, col)?;
            if eps.is_empty() {
                return err(line, col, "epsilons must not be empty");
            }
            if !eps.windows(2).all(|w| w[0] > w[1]) {
                return err(line, col, "epsilons must be strictly decreasing");
            }
            if !eps.iter().all(|&e| e > 0.0 && e <= 1.0) {
                return err(line, col, "epsilons must lie in (0, 1]");
            }
            cfg.epsilons = eps;
        }
        "snapshots" => cfg.snapshots = parse_array(value, line, col)?,
        "out" => cfg.out_dir = PathBuf::from(value.trim_matches('"')),
        "delta_location" => cfg.delta_location = Some(parse_number(value, line, col)?),
        _ => return err(line, 1, format!("unknown key '{key}'")),
    }
    Ok(())
}

fn parse_problem_key(
    block: &mut ProblemBlock,
    key: &str,
    value: &str,
    line: usize,
    col: usize,
    _raw: &str,
) -> Result<(), ParseError> {
    match key {
        "a" => block.a = Some(parse_dist(value, line, col)?),
        "b" => block.b = Some(parse_dist(value, line, col)?),
        "f" => block.f = Some(parse_dist(value, line, col)?),
        "q" => block.q = Some(expect_var(parse_dist(value, line, col)?, 'x', line, col)?),
        "u0" => {
            block.u0 = Some(if value == "peak" {
                initial_expr()
            } else {
                expect_var(parse_dist(value, line, col)?, 'x', line, col)?
            })
        }
        "g0" => block.g0 = Some(expect_var(parse_dist(value, line, col)?, 't', line, col)?),
        "g1" => block.g1 = Some(expect_var(parse_dist(value, line, col)?, 't', line, col)?),
        "alpha" => block.alpha = Some(parse_number(value, line, col)?),
        _ => return err(line, 1, format!("unknown problem key '{key}'")),
    }
    Ok(())
}

fn expect_var(
    (expr, var): (DistExpr<f64>, Option<char>),
    want: char,
    line: usize,
    col: usize,
) -> Result<DistExpr<f64>, ParseError> {
    match var {
        None => Ok(expr),
        Some(v) if v == want => Ok(expr),
        Some(v) => err(line, col, format!("expected variable '{want}', got '{v}'")),
    }
}

fn assemble_problem(block: ProblemBlock, t_horizon: f64) -> ProblemSpec<f64> {
    let to_st = |pair: Option<(DistExpr<f64>, Option<char>)>, default: f64| match pair {
        None => SpaceTimeExpr::constant(default),
        Some((expr, var)) => match var {
            Some('t') => SpaceTimeExpr::TimeOnly(expr),
            _ => SpaceTimeExpr::SpaceOnly(expr),
        },
    };
    ProblemSpec {
        a: to_st(block.a, 1.0),
        b: to_st(block.b, 1.0),
        q: block.q.unwrap_or(DistExpr::Constant(1.0)),
        f: to_st(block.f, 0.0),
        u0: block.u0.unwrap_or_else(initial_expr),
        g0: block.g0.unwrap_or_else(DistExpr::zero),
        g1: block.g1.unwrap_or_else(DistExpr::zero),
        t_horizon,
        alpha: block.alpha.unwrap_or(1.0),
    }
}

fn parse_number(s: &str, line: usize, col: usize) -> Result<f64, ParseError> {
    s.parse().map_err(|_| ParseError {
        line,
        col,
        msg: format!("expected a number, got '{s}'"),
    })
}

fn parse_usize(s: &str, line: usize, col: usize) -> Result<usize, ParseError> {
    s.parse().map_err(|_| ParseError {
        line,
        col,
        msg: format!("expected a positive integer, got '{s}'"),
    })
}

fn parse_array(s: &str, line: usize, col: usize) -> Result<Vec<f64>, ParseError> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| ParseError {
            line,
            col,
            msg: format!("expected an array like [0.3, 0.1], got '{s}'"),
        })?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|p| parse_number(p.trim(), line, col))
        .collect()
}

/// Distribution expression: sum of `k`, `delta(v - x0)`, `w*delta(v - x0)`.
/// Returns the expression and the variable letter it mentions, if any.
pub fn parse_dist(
    s: &str,
    line: usize,
    col0: usize,
) -> Result<(DistExpr<f64>, Option<char>), ParseError> {
    let mut terms = Vec::new();
    let mut var: Option<char> = None;
    let mut rest = s.trim_start();
    let mut offset = s.len() - rest.len();
    let mut sign = 1.0;
    let mut first = true;
    loop {
        if rest.is_empty() {
            if first {
                return err(line, col0, "empty expression");
            }
            break;
        }
        if !first {
            let op = rest.chars().next().unwrap();
            match op {
                '+' => sign = 1.0,
                '-' => sign = -1.0,
                _ => {
                    return err(
                        line,
                        col0 + offset,
                        format!("expected '+' or '-', got '{op}'"),
                    )
                }
            }
            rest = rest[1..].trim_start();
            offset = s.len() - rest.len();
        }
        let (term, tvar, consumed) = parse_term(rest, line, col0 + offset)?;
        if let Some(v) = tvar {
            match var {
                None => var = Some(v),
                Some(prev) if prev != v => {
                    return err(
                        line,
                        col0 + offset,
                        format!("mixed variables '{prev}' and '{v}' in one expression"),
                    )
                }
                _ => {}
            }
        }
        terms.push(scale_term(term, sign));
        rest = rest[consumed..].trim_start();
        offset = s.len() - rest.len();
        first = false;
        sign = 1.0;
    }
    Ok((DistExpr::sum(terms), var))
}

fn scale_term(term: DistExpr<f64>, sign: f64) -> DistExpr<f64> {
    if sign == 1.0 {
        return term;
    }
    match term {
        DistExpr::Constant(k) => DistExpr::Constant(sign * k),
        DistExpr::Delta { location, weight } => DistExpr::Delta {
            location,
            weight: sign * weight,
        },
        other => other,
    }
}

fn parse_term(
    s: &str,
    line: usize,
    col: usize,
) -> Result<(DistExpr<f64>, Option<char>, usize), ParseError> {
    if s.starts_with("delta(") {
        let (expr, var, used) = parse_delta(s, 1.0, line, col)?;
        return Ok((expr, Some(var), used));
    }
    // leading number, possibly followed by *delta(...)
    let num_len = s
        .char_indices()
        .take_while(|(_, c)| c.is_ascii_digit() || *c == '.' || *c == 'e' || *c == 'E')
        .map(|(i, c)| i + c.len_utf8())
        .last()
        .unwrap_or(0);
    if num_len == 0 {
        return err(line, col, format!("expected a term, got '{s}'"));
    }
    let num: f64 = s[..num_len].parse().map_err(|_| ParseError {
        line,
        col,
        msg: format!("bad number '{}'", &s[..num_len]),
    })?;
    let rest = s[num_len..].trim_start();
    if let Some(after_star) = rest.strip_prefix('*') {
        let after_star = after_star.trim_start();
        if after_star.starts_with("delta(") {
            let gap = s.len() - after_star.len();
            let (expr, var, used) = parse_delta(after_star, num, line, col + gap)?;
            return Ok((expr, Some(var), gap + used));
        }
        return err(line, col, "expected delta(...) after '*'");
    }
    Ok((DistExpr::Constant(num), None, num_len))
}

fn parse_delta(
    s: &str,
    weight: f64,
    line: usize,
    col: usize,
) -> Result<(DistExpr<f64>, char, usize), ParseError> {
    let close = s.find(')').ok_or_else(|| ParseError {
        line,
        col,
        msg: "missing ')' after delta(".to_string(),
    })?;
    let inner = &s["delta(".len()..close];
    let inner_trim = inner.trim();
    let mut chars = inner_trim.chars();
    let var = chars.next().ok_or_else(|| ParseError {
        line,
        col,
        msg: "empty delta argument".to_string(),
    })?;
    if var != 'x' && var != 't' {
        return err(line, col, format!("delta variable must be x or t, got '{var}'"));
    }
    let rest = chars.as_str().trim_start();
    let location = if rest.is_empty() {
        0.0
    } else if let Some(numpart) = rest.strip_prefix('-') {
        parse_number(numpart.trim(), line, col)?
    } else {
        return err(
            line,
            col,
            format!("expected delta({var} - location), got 'delta({inner_trim})'"),
        );
    };
    Ok((DistExpr::delta(location, weight), var, close + 1))
}
