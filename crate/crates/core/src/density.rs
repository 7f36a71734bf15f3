//! Positive densities `L` for the generalized Lipschitz condition.
//!
//! The primary representation is a piecewise polynomial of degree ≤ 3 in the
//! global variable `u`, integrated in closed form. A tabulated density is
//! stored as its piecewise-linear interpolant: `∫L` then coincides with the
//! composite trapezoid rule on the table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One segment `[start, end)` of a piecewise-polynomial density,
/// `L(u) = c0 + c1 u + c2 u² + c3 u³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySegment {
    #[serde(alias = "breakpoint_start")]
    pub start: f64,
    #[serde(alias = "breakpoint_end")]
    pub end: f64,
    /// Up to four coefficients, lowest degree first.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    start: f64,
    end: f64,
    c: [f64; 4],
}

impl Segment {
    fn value(&self, u: f64) -> f64 {
        ((self.c[3] * u + self.c[2]) * u + self.c[1]) * u + self.c[0]
    }

    /// `∫_a^b L(u) u^shift du` for `shift ∈ {0, 1}`.
    fn integral(&self, a: f64, b: f64, shift: i32) -> f64 {
        self.c
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let e = j as i32 + shift + 1;
                c * (b.powi(e) - a.powi(e)) / f64::from(e)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Piecewise,
    Tabulated { quadrature_error: Option<f64> },
}

/// Positive integrable `L : [0, R) → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzDensity {
    segments: Vec<Segment>,
    /// `∫_0^{start_i} L` and `∫_0^{start_i} u L` per segment.
    cum: Vec<(f64, f64)>,
    source: Source,
}

impl LipschitzDensity {
    /// Contiguous segments starting at 0 with strictly increasing breakpoints.
    pub fn piecewise(segments: Vec<PolySegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Representation("density needs at least one segment".into()));
        }
        let mut out = Vec::with_capacity(segments.len());
        for (i, s) in segments.iter().enumerate() {
            if !(s.start.is_finite() && s.end.is_finite() && s.start < s.end) {
                return Err(Error::Representation(format!(
                    "segment {i}: need finite start < end, got [{}, {})",
                    s.start, s.end
                )));
            }
            let expected = if i == 0 { 0.0 } else { segments[i - 1].end };
            if s.start != expected {
                return Err(Error::Representation(format!(
                    "segment {i} starts at {} but must start at {expected}",
                    s.start
                )));
            }
            if s.coefficients.is_empty() || s.coefficients.len() > 4 {
                return Err(Error::Representation(format!(
                    "segment {i}: expected 1 to 4 coefficients, got {}",
                    s.coefficients.len()
                )));
            }
            if s.coefficients.iter().any(|c| !c.is_finite()) {
                return Err(Error::Representation(format!("segment {i}: non-finite coefficient")));
            }
            let mut c = [0.0; 4];
            c[..s.coefficients.len()].copy_from_slice(&s.coefficients);
            out.push(Segment { start: s.start, end: s.end, c });
        }
        Self::build(out, Source::Piecewise)
    }

    /// Samples `(u_i, L(u_i))` with `u_0 = 0` and strictly increasing abscissae.
    pub fn tabulated(u: &[f64], values: &[f64]) -> Result<Self> {
        if u.len() != values.len() {
            return Err(Error::Representation(format!("{} abscissae but {} values", u.len(), values.len())));
        }
        if u.len() < 2 {
            return Err(Error::Representation(format!("tabulated density needs at least 2 samples, got {}", u.len())));
        }
        if u[0] != 0.0 {
            return Err(Error::Representation(format!("first abscissa must be 0, got {}", u[0])));
        }
        let mut segments = Vec::with_capacity(u.len() - 1);
        for i in 0..u.len() - 1 {
            let (a, b) = (u[i], u[i + 1]);
            if !(b > a) || !b.is_finite() {
                return Err(Error::Representation(format!(
                    "abscissae must be finite and strictly increasing at index {}",
                    i + 1
                )));
            }
            let slope = (values[i + 1] - values[i]) / (b - a);
            segments.push(Segment { start: a, end: b, c: [values[i] - slope * a, slope, 0.0, 0.0] });
        }
        let quadrature_error = trapezoid_error_estimate(u, values);
        Self::build(segments, Source::Tabulated { quadrature_error })
    }

    /// `L ≡ k` on `[0, domain)`.
    pub fn constant(k: f64, domain: f64) -> Result<Self> {
        Self::piecewise(vec![PolySegment { start: 0.0, end: domain, coefficients: vec![k] }])
    }

    fn build(segments: Vec<Segment>, source: Source) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            let h = s.end - s.start;
            for j in 0..16 {
                let u = s.start + h * (j as f64 + 0.5) / 16.0;
                let v = s.value(u);
                if !(v > 0.0) {
                    return Err(Error::Representation(format!(
                        "density must be positive: L({u}) = {v} on segment {i}"
                    )));
                }
            }
            for u in [s.start, s.end] {
                let v = s.value(u);
                if !(v >= 0.0) {
                    return Err(Error::Representation(format!(
                        "density must be nonnegative at breakpoints: L({u}) = {v}"
                    )));
                }
            }
        }
        let mut cum = Vec::with_capacity(segments.len());
        let (mut i0, mut i1) = (0.0, 0.0);
        for s in &segments {
            cum.push((i0, i1));
            i0 += s.integral(s.start, s.end, 0);
            i1 += s.integral(s.start, s.end, 1);
        }
        Ok(Self { segments, cum, source })
    }

    /// Parses the structured-text segment list
    /// `[{"start": .., "end": .., "coefficients": [..]}, ..]`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let segments: Vec<PolySegment> =
            serde_json::from_str(text).map_err(|e| Error::Representation(format!("segment list: {e}")))?;
        Self::piecewise(segments)
    }

    /// Parses a two-column CSV `u, L(u)`; a non-numeric first row is taken as a header.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let (mut u, mut l) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Representation(format!("density table: {e}")))?;
            if record.len() != 2 {
                return Err(Error::Representation(format!(
                    "density table row {}: expected 2 columns, got {}",
                    line + 1,
                    record.len()
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    u.push(a);
                    l.push(b);
                }
                _ if line == 0 => continue,
                _ => return Err(Error::Representation(format!("density table row {}: non-numeric entry", line + 1))),
            }
        }
        Self::tabulated(&u, &l)
    }

    /// The segment list in the structured-text representation.
    pub fn segments(&self) -> Vec<PolySegment> {
        self.segments.iter().map(|s| PolySegment { start: s.start, end: s.end, coefficients: s.c.to_vec() }).collect()
    }

    /// End `R` of the last segment.
    pub fn domain(&self) -> f64 {
        self.segments[self.segments.len() - 1].end
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.source, Source::Tabulated { .. })
    }

    /// `|T_h − T_{2h}|/3` for `∫_0^R L` on tabulated input; `None` for exact
    /// polynomial segments or tables too short to coarsen.
    pub fn quadrature_error_estimate(&self) -> Option<f64> {
        match self.source {
            Source::Piecewise => None,
            Source::Tabulated { quadrature_error } => quadrature_error,
        }
    }

    fn locate(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0 && t <= self.domain()) {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.end <= t);
        Some(idx.min(self.segments.len() - 1))
    }

    /// `L(u)`; NaN outside `[0, R]`.
    pub fn value(&self, u: f64) -> f64 {
        self.locate(u).map_or(f64::NAN, |i| self.segments[i].value(u))
    }

    /// `∫_0^t L(u) du`.
    pub fn integral(&self, t: f64) -> f64 {
        self.locate(t).map_or(f64::NAN, |i| {
            let s = &self.segments[i];
            self.cum[i].0 + s.integral(s.start, t, 0)
        })
    }

    /// `∫_0^t u L(u) du`.
    pub fn moment(&self, t: f64) -> f64 {
        self.locate(t).map_or(f64::NAN, |i| {
            let s = &self.segments[i];
            self.cum[i].1 + s.integral(s.start, t, 1)
        })
    }

    /// `q = ∫_0^{t0} u L / [t0 (1 − ∫_0^{t0} L)]`, the contraction factor at `t0`.
    pub fn q_factor(&self, t0: f64) -> f64 {
        self.moment(t0) / (t0 * (1.0 - self.integral(t0)))
    }
}

fn trapezoid(u: &[f64], l: &[f64]) -> f64 {
    u.windows(2).zip(l.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn trapezoid_error_estimate(u: &[f64], l: &[f64]) -> Option<f64> {
    if u.len() < 3 {
        return None;
    }
    let fine = trapezoid(u, l);
    let mut idx: Vec<usize> = (0..u.len()).step_by(2).collect();
    if idx.last() != Some(&(u.len() - 1)) {
        idx.push(u.len() - 1);
    }
    let cu: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
    let cl: Vec<f64> = idx.iter().map(|&i| l[i]).collect();
    Some((fine - trapezoid(&cu, &cl)).abs() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn linear() -> LipschitzDensity {
        LipschitzDensity::piecewise(vec![PolySegment { start: 0.0, end: 2.0, coefficients: vec![0.0, 2.0] }]).unwrap()
    }

    #[test]
    fn closed_form_integrals() {
        let d = linear();
        assert_relative_eq!(d.integral(0.7), 0.49, epsilon = 1e-15);
        assert_relative_eq!(d.moment(0.7), 2.0 * 0.343 / 3.0, epsilon = 1e-15);
        assert_eq!(d.integral(0.0), 0.0);
        assert!(d.integral(2.5).is_nan());
    }

    #[test]
    fn multi_segment_integrals_accumulate() {
        // L = 1 on [0,1), L = u^2 on [1,3)
        let d = LipschitzDensity::piecewise(vec![
            PolySegment { start: 0.0, end: 1.0, coefficients: vec![1.0] },
            PolySegment { start: 1.0, end: 3.0, coefficients: vec![0.0, 0.0, 1.0] },
        ])
        .unwrap();
        assert_relative_eq!(d.integral(2.0), 1.0 + (8.0 - 1.0) / 3.0, epsilon = 1e-14);
        assert_relative_eq!(d.moment(2.0), 0.5 + (16.0 - 1.0) / 4.0, epsilon = 1e-14);
        assert_eq!(d.value(1.0), 1.0);
        assert_eq!(d.value(3.0), 9.0);
    }

    #[test]
    fn rejects_gaps_and_negative_values() {
        let gap = LipschitzDensity::piecewise(vec![
            PolySegment { start: 0.0, end: 1.0, coefficients: vec![1.0] },
            PolySegment { start: 1.5, end: 2.0, coefficients: vec![1.0] },
        ]);
        assert!(matches!(gap, Err(Error::Representation(_))));
        let neg =
            LipschitzDensity::piecewise(vec![PolySegment { start: 0.0, end: 2.0, coefficients: vec![1.0, -1.0] }]);
        assert!(matches!(neg, Err(Error::Representation(_))));
        let late = LipschitzDensity::piecewise(vec![PolySegment { start: 0.5, end: 2.0, coefficients: vec![1.0] }]);
        assert!(matches!(late, Err(Error::Representation(_))));
    }

    #[test]
    fn tabulated_needs_two_samples() {
        assert!(matches!(LipschitzDensity::tabulated(&[0.0], &[1.0]), Err(Error::Representation(_))));
    }

    #[test]
    fn tabulated_integral_is_trapezoid() {
        let u = [0.0, 0.5, 1.0, 2.0];
        let l = [1.0, 2.0, 2.0, 4.0];
        let d = LipschitzDensity::tabulated(&u, &l).unwrap();
        assert_relative_eq!(d.integral(2.0), trapezoid(&u, &l), epsilon = 1e-15);
        assert!(d.is_tabulated());
        assert!(d.quadrature_error_estimate().unwrap() > 0.0);
    }

    #[test]
    fn parses_segment_json_and_csv() {
        let d = LipschitzDensity::from_json_str(
            r#"[{"breakpoint_start": 0, "breakpoint_end": 1, "coefficients": [0, 2]}]"#,
        )
        .unwrap();
        assert_relative_eq!(d.integral(1.0), 1.0, epsilon = 1e-15);

        let t = LipschitzDensity::from_csv_str("u,L\n0,1\n1,1\n2,1\n").unwrap();
        assert_relative_eq!(t.integral(1.5), 1.5, epsilon = 1e-15);
        assert_eq!(t.quadrature_error_estimate(), Some(0.0));
        assert!(LipschitzDensity::from_csv_str("0,1\n1\n").is_err());
    }
}
