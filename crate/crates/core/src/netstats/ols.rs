use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsResult {
    /// Intercept first, then predictors in input order.
    pub coefficients: Vec<Coefficient>,
    pub r2: f64,
    pub adj_r2: f64,
    pub f: f64,
    pub f_p: f64,
    pub resid_std_error: f64,
    pub n: usize,
    pub df_resid: usize,
    pub residuals: Vec<f64>,
}

impl OlsResult {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// CSV `term,estimate,std_error,t,p` followed by fit statistics as
    /// `term,estimate` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        out.write_record(["term", "estimate", "std_error", "t", "p"])?;
        for c in &self.coefficients {
            out.write_record([
                c.name.clone(),
                format!("{:.6}", c.estimate),
                format!("{:.6}", c.std_error),
                format!("{:.4}", c.t),
                format!("{:.6}", c.p),
            ])?;
        }
        for (k, v) in [
            ("r2", self.r2),
            ("adj_r2", self.adj_r2),
            ("f", self.f),
            ("f_p", self.f_p),
            ("resid_std_error", self.resid_std_error),
            ("n", self.n as f64),
        ] {
            out.write_record([k.to_string(), format!("{v:.6}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Finds the first column (intercept at index 0) that is a linear
/// combination of the columns before it.
fn collinear_column(x: &DMatrix<f64>, names: &[String]) -> Option<Error> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let mut r = col.clone();
        for q in &basis {
            r -= q * q.dot(&r);
        }
        let scale = col.norm().max(1.0);
        if r.norm() <= 1e-9 * scale {
            let with: Vec<String> = if kept.is_empty() {
                Vec::new()
            } else {
                let sub = x.select_columns(kept.iter());
                let coef = sub
                    .clone()
                    .svd(true, true)
                    .solve(&col, 1e-12)
                    .unwrap_or_else(|_| DVector::zeros(kept.len()));
                kept.iter()
                    .zip(coef.iter())
                    .filter(|(_, c)| c.abs() > 1e-9)
                    .map(|(k, _)| names[*k].clone())
                    .collect()
            };
            return Some(Error::RankDeficient {
                column: names[j].clone(),
                with,
            });
        }
        basis.push(r.normalize());
        kept.push(j);
    }
    None
}

/// Ordinary least squares with an intercept. `columns` are
/// `(name, values)` predictor pairs.
pub fn ols(y: &[f64], columns: &[(String, Vec<f64>)]) -> Result<OlsResult> {
    let n = y.len();
    let p = columns.len() + 1;
    if columns.is_empty() {
        return Err(Error::Validation("at least one predictor required".into()));
    }
    if columns.iter().any(|(_, c)| c.len() != n) {
        return Err(Error::Validation("predictor lengths differ from response".into()));
    }
    if n <= p {
        return Err(Error::InsufficientData(format!("{n} observations for {p} parameters")));
    }
    if y.iter().chain(columns.iter().flat_map(|c| c.1.iter())).any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite value in regression input".into()));
    }
    let mut names = vec!["intercept".to_string()];
    names.extend(columns.iter().map(|c| c.0.clone()));
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { columns[j - 1].1[i] });
    if let Some(e) = collinear_column(&x, &names) {
        return Err(e);
    }
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Validation("normal equations are not positive definite".into()))?
        .inverse();
    let beta = &inv * (x.transpose() * &yv);
    let resid = &yv - &x * &beta;
    let ssr = resid.norm_squared();
    let mean = yv.mean();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::Validation("response has zero variance".into()));
    }
    let df = (n - p) as f64;
    let sigma2 = ssr / df;
    let r2 = (1.0 - ssr / sst).clamp(0.0, 1.0);
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df;
    let df_model = (p - 1) as f64;
    let f = if ssr == 0.0 {
        f64::INFINITY
    } else {
        ((sst - ssr) / df_model) / sigma2
    };
    let f_p = if f.is_infinite() {
        0.0
    } else {
        FisherSnedecor::new(df_model, df).map_or(f64::NAN, |d| d.sf(f))
    };
    let t_dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Validation(e.to_string()))?;
    let coefficients = (0..p)
        .map(|j| {
            let se = (sigma2 * inv[(j, j)]).sqrt();
            let t = if se == 0.0 {
                if beta[j] == 0.0 { 0.0 } else { f64::INFINITY.copysign(beta[j]) }
            } else {
                beta[j] / se
            };
            let pval = if t.is_infinite() { 0.0 } else { 2.0 * t_dist.sf(t.abs()) };
            Coefficient {
                name: names[j].clone(),
                estimate: beta[j],
                std_error: se,
                t,
                p: pval,
            }
        })
        .collect();
    Ok(OlsResult {
        coefficients,
        r2,
        adj_r2,
        f,
        f_p,
        resid_std_error: sigma2.sqrt(),
        n,
        df_resid: n - p,
        residuals: resid.iter().copied().collect(),
    })
}
