//! Log-log slope fits of query counts against the dimension.

use std::collections::BTreeSet;
use std::io::Read;

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("cannot read results: {0}")]
    Csv(#[from] csv::Error),
    #[error("column `{0}` is missing")]
    MissingColumn(String),
    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    BadValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("log-factor `{0}` is not understood")]
    BadLogFactor(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
}

/// A divisor `log(expr)^power`, with `expr` a product and quotient of `n`,
/// `eps` and positive numbers. `"1"` and `"none"` mean no divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFactor {
    /// `(symbol or number, exponent ±1)`, or empty for no divisor.
    terms: Vec<(Term, i32)>,
    power: i32,
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    N,
    Eps,
    Const(f64),
}

impl LogFactor {
    pub fn none() -> Self {
        LogFactor {
            terms: Vec::new(),
            power: 0,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FitError> {
        let bad = || FitError::BadLogFactor(text.to_string());
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() || s == "1" || s == "none" {
            return Ok(Self::none());
        }
        let (body, power) = match s.rsplit_once('^') {
            Some((b, p)) => (b, p.parse::<i32>().map_err(|_| bad())?),
            None => (s.as_str(), 1),
        };
        let inner = body
            .strip_prefix("log(")
            .or_else(|| body.strip_prefix("ln("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut terms = Vec::new();
        let mut sign = 1;
        let mut token = String::new();
        for ch in inner.chars().chain(std::iter::once('*')) {
            if ch == '*' || ch == '/' {
                let term = match token.as_str() {
                    "n" => Term::N,
                    "eps" | "delta" => Term::Eps,
                    t => Term::Const(t.parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(bad)?),
                };
                terms.push((term, sign));
                token.clear();
                sign = if ch == '/' { -1 } else { 1 };
            } else {
                token.push(ch);
            }
        }
        if power <= 0 {
            return Err(bad());
        }
        Ok(LogFactor { terms, power })
    }

    pub fn value(&self, n: f64, eps: f64) -> f64 {
        if self.terms.is_empty() {
            return 1.0;
        }
        let arg: f64 = self
            .terms
            .iter()
            .map(|(t, s)| {
                let v = match t {
                    Term::N => n,
                    Term::Eps => eps,
                    Term::Const(c) => *c,
                };
                v.powi(*s)
            })
            .product();
        arg.ln().powi(self.power)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub half_width: f64,
    pub points: usize,
    pub distinct_x: usize,
}

impl SlopeFit {
    pub fn interval(&self) -> (f64, f64) {
        (self.slope - self.half_width, self.slope + self.half_width)
    }
}

/// Least squares of `log(y)` on `log(x)`, with a Student-t interval.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<SlopeFit, FitError> {
    let distinct: BTreeSet<u64> = points.iter().map(|(x, _)| x.to_bits()).collect();
    if distinct.len() < 4 {
        return Err(FitError::Degenerate(format!(
            "{} distinct x values, need at least 4",
            distinct.len()
        )));
    }
    if let Some((x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(FitError::Degenerate(format!(
            "point ({x}, {y}) is not positive and finite"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = m - 2.0;
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("at least 2 degrees of freedom")
        .inverse_cdf(0.975);
    let half_width = t * (sse / dof / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        half_width,
        points: logs.len(),
        distinct_x: distinct.len(),
    })
}

/// Reads `(x, y / log_factor(n, eps))` from a results CSV. Rows whose
/// outcome is an error are skipped.
pub fn read_points<R: Read>(
    input: R,
    x: &str,
    y: &str,
    factor: &LogFactor,
) -> Result<Vec<(f64, f64)>, FitError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FitError::MissingColumn(name.to_string()))
    };
    let (xi, yi, ni, ei) = (column(x)?, column(y)?, column("n")?, column("eps")?);
    let outcome = headers.iter().position(|h| h == "outcome");
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if outcome.is_some_and(|o| record[o].starts_with("error")) {
            continue;
        }
        let number = |i: usize| {
            record[i].parse::<f64>().map_err(|_| FitError::BadValue {
                row: row + 1,
                column: headers[i].to_string(),
                value: record[i].to_string(),
            })
        };
        let divisor = factor.value(number(ni)?, number(ei)?);
        points.push((number(xi)?, number(yi)? / divisor));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let linear: Vec<_> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&n| (n, 7.0 * n))
            .collect();
        let fit = fit_loglog(&linear).unwrap();
        assert!((fit.slope - 1.0).abs() <= 0.01 && fit.half_width <= 0.01);
        let quadratic: Vec<_> = [2.0, 3.0, 5.0, 9.0]
            .iter()
            .map(|&n| (n, 3.0 * n * n))
            .collect();
        let fit = fit_loglog(&quadratic).unwrap();
        assert!((fit.slope - 2.0).abs() <= 0.01 && fit.half_width <= 0.01);
    }

    #[test]
    fn too_few_dimensions() {
        let points = [(2.0, 1.0), (4.0, 2.0), (8.0, 4.0), (8.0, 4.1)];
        assert!(matches!(fit_loglog(&points), Err(FitError::Degenerate(_))));
        let points = [(2.0, 1.0), (4.0, 0.0), (8.0, 4.0), (16.0, 4.1)];
        assert!(matches!(fit_loglog(&points), Err(FitError::Degenerate(_))));
    }

    #[test]
    fn log_factors() {
        let f = LogFactor::parse("log(1/eps)").unwrap();
        assert!((f.value(3.0, 1e-4) - 1e4f64.ln()).abs() < 1e-12);
        let f = LogFactor::parse("log(n / eps)^2").unwrap();
        assert!((f.value(10.0, 0.1) - 100f64.ln().powi(2)).abs() < 1e-9);
        assert_eq!(LogFactor::parse("1").unwrap().value(5.0, 0.1), 1.0);
        assert!(LogFactor::parse("exp(n)").is_err());
        assert!(LogFactor::parse("log(m)").is_err());
    }

    #[test]
    fn reads_csv_and_skips_errors() {
        let text = "n,eps,outcome,mem_calls\n2,0.01,sound,20\n2,0.01,error:vertical_cut,0\n4,0.01,violated,40\n";
        let f = LogFactor::parse("log(1/eps)").unwrap();
        let points = read_points(text.as_bytes(), "n", "mem_calls", &f).unwrap();
        assert_eq!(points.len(), 2);
        assert!((points[1].1 - 40.0 / 100f64.ln()).abs() < 1e-12);
        assert!(matches!(
            read_points(text.as_bytes(), "n", "sep_calls", &f),
            Err(FitError::MissingColumn(_))
        ));
    }
}
