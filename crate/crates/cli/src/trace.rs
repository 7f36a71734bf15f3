//! CSV export of Newton traces.
//!
//! Floats are written with 17 significant digits so every value parses back
//! to the identical binary64.

use std::io::{Read, Write};

use majorant_newton::{NewtonTrace, ScalarTrace};

use crate::Failure;

pub const HEADER: [&str; 8] = ["k", "x", "residual", "step", "err", "t", "ratio_linear", "ratio_order"];

/// One CSV row. Optional columns are blank when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: Vec<f64>,
    pub residual: f64,
    /// `‖x_k − x_{k−1}‖`.
    pub step: Option<f64>,
    /// `‖x_k − x*‖`.
    pub err: Option<f64>,
    /// Majorant sequence term.
    pub t: Option<f64>,
    /// `err_k / err_{k−1}`.
    pub ratio_linear: Option<f64>,
    /// `err_k / err_{k−1}^{p+1}`.
    pub ratio_order: Option<f64>,
}

/// Rows of `trace`, paired with the majorant sequence where it has a term.
pub fn rows(trace: &NewtonTrace, scalar: Option<&ScalarTrace>, p: Option<f64>) -> Vec<TraceRow> {
    let errs = trace.error_norms.as_deref();
    (0..trace.iterates.len())
        .map(|k| {
            let err = errs.map(|e| e[k]);
            let prev = if k > 0 { errs.map(|e| e[k - 1]) } else { None };
            let ratio = |exp: f64| match (err, prev) {
                (Some(e), Some(d)) if d > 0.0 => Some(e / d.powf(exp)),
                _ => None,
            };
            TraceRow {
                k,
                x: trace.iterates[k].as_slice().to_vec(),
                residual: trace.residual_norms[k],
                step: if k > 0 { Some(trace.step_norms[k - 1]) } else { None },
                err,
                t: scalar.and_then(|s| s.t.get(k).copied()),
                ratio_linear: ratio(1.0),
                ratio_order: p.and_then(|p| ratio(p + 1.0)),
            }
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, rows: &[TraceRow]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(Failure::io)?;
    for r in rows {
        let x = r.x.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(";");
        w.write_record([
            r.k.to_string(),
            x,
            fmt(r.residual),
            fmt_opt(r.step),
            fmt_opt(r.err),
            fmt_opt(r.t),
            fmt_opt(r.ratio_linear),
            fmt_opt(r.ratio_order),
        ])
        .map_err(Failure::io)?;
    }
    w.flush().map_err(|e| Failure::io(e.into()))?;
    Ok(())
}

fn parse_f64(field: &str, column: &str) -> Result<f64, Failure> {
    field.parse().map_err(|_| Failure::config(format!("column {column}: {field:?} is not a number")))
}

fn parse_opt(field: &str, column: &str) -> Result<Option<f64>, Failure> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(field, column).map(Some)
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TraceRow>, Failure> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(Failure::io)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Failure::config(format!("unexpected trace header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(Failure::io)?;
        let k = rec[0].parse().map_err(|_| Failure::config(format!("column k: {:?} is not an index", &rec[0])))?;
        let x = rec[1].split(';').map(|s| parse_f64(s, "x")).collect::<Result<Vec<_>, _>>()?;
        rows.push(TraceRow {
            k,
            x,
            residual: parse_f64(&rec[2], "residual")?,
            step: parse_opt(&rec[3], "step")?,
            err: parse_opt(&rec[4], "err")?,
            t: parse_opt(&rec[5], "t")?,
            ratio_linear: parse_opt(&rec[6], "ratio_linear")?,
            ratio_order: parse_opt(&rec[7], "ratio_order")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn awkward_values_round_trip() {
        let rows = vec![TraceRow {
            k: 3,
            x: vec![0.1 + 0.2, -f64::MIN_POSITIVE, 1.0 / 3.0],
            residual: 5e-324,
            step: None,
            err: Some(f64::MAX),
            t: Some(-0.0),
            ratio_linear: Some(2f64.sqrt()),
            ratio_order: None,
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert!(back[0].t.unwrap().is_sign_negative());
    }

    #[test]
    fn header_is_checked() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
