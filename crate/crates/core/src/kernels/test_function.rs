//! Nonnegative compactly supported test functions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

/// A nonnegative continuous function with compact support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `c · Π_i cos²(π(x_i − center_i)/w)` on `|x_i − center_i| < w/2`, zero elsewhere.
    Bump { c: f64, w: f64, center: Vec<f64> },
    /// One-dimensional table `(x, f(x))` with linear interpolation, zero outside `[x_0, x_last]`.
    Table { xs: Vec<f64>, fs: Vec<f64> },
}

impl TestFunction {
    /// Centered bump in dimension `d`.
    pub fn bump(d: usize, c: f64, w: f64) -> Result<Self> {
        Self::bump_at(c, w, vec![0.0; d])
    }

    pub fn bump_at(c: f64, w: f64, center: Vec<f64>) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("bump height {c} must be finite and nonnegative")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidInput(format!("bump width {w} must be positive")));
        }
        if center.is_empty() || center.len() > 3 {
            return Err(Error::InvalidInput("dimension must be 1, 2 or 3".into()));
        }
        Ok(TestFunction::Bump { c, w, center })
    }

    pub fn table(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != fs.len() {
            return Err(Error::InvalidInput("table needs at least two (x, f) rows".into()));
        }
        if xs.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidInput("table abscissae must be strictly increasing".into()));
        }
        if fs.iter().any(|&f| !(f >= 0.0 && f.is_finite())) {
            return Err(Error::InvalidInput("table values must be finite and nonnegative".into()));
        }
        Ok(TestFunction::Table { xs, fs })
    }

    /// Reads a two-column CSV `x,f` (a header row is optional).
    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::InvalidInput(format!("row {}: expected 2 columns, got {}", i + 1, rec.len())));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(f)) => {
                    xs.push(x);
                    fs.push(f);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::InvalidInput(format!("row {}: not numeric", i + 1))),
            }
        }
        Self::table(xs, fs)
    }

    pub fn from_csv_path<P: AsRef<Path>>(p: P) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(p)?)
    }

    /// Writes the function sampled at `n` points over its support as `x,f` CSV.
    pub fn to_csv_string(&self, n: usize) -> Result<String> {
        if self.dim() != 1 {
            return Err(Error::InvalidInput("only one-dimensional functions can be tabulated".into()));
        }
        let (lo, hi) = self.support()[0];
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "f"])?;
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            w.write_record([format!("{x:.16e}"), format!("{:.16e}", self.eval(&[x]))])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("utf8 csv"))
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Bump { center, .. } => center.len(),
            TestFunction::Table { .. } => 1,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Bump { c, w, center } => {
                let mut v = *c;
                for (xi, ci) in x.iter().zip(center) {
                    let t = xi - ci;
                    if t.abs() >= 0.5 * w {
                        return 0.0;
                    }
                    v *= (PI * t / w).cos().powi(2);
                }
                v
            }
            TestFunction::Table { xs, fs } => {
                let t = x[0];
                if t <= xs[0] || t >= xs[xs.len() - 1] {
                    if t == xs[0] {
                        return fs[0];
                    }
                    if t == xs[xs.len() - 1] {
                        return fs[fs.len() - 1];
                    }
                    return 0.0;
                }
                let i = xs.partition_point(|&v| v <= t) - 1;
                let u = (t - xs[i]) / (xs[i + 1] - xs[i]);
                fs[i] * (1.0 - u) + fs[i + 1] * u
            }
        }
    }

    /// `1 − e^{−f(x)}`.
    pub fn one_minus_exp(&self, x: &[f64]) -> f64 {
        -(-self.eval(x)).exp_m1()
    }

    /// Closed support box, one interval per coordinate.
    pub fn support(&self) -> Vec<(f64, f64)> {
        match self {
            TestFunction::Bump { w, center, .. } => center.iter().map(|c| (c - 0.5 * w, c + 0.5 * w)).collect(),
            TestFunction::Table { xs, .. } => vec![(xs[0], xs[xs.len() - 1])],
        }
    }

    /// Points of the support (per coordinate) where the function may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<Vec<f64>> {
        match self {
            TestFunction::Bump { .. } => self.support().iter().map(|&(a, b)| vec![a, b]).collect(),
            TestFunction::Table { xs, .. } => vec![xs.clone()],
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TestFunction::Bump { c, .. } => *c == 0.0,
            TestFunction::Table { fs, .. } => fs.iter().all(|&f| f == 0.0),
        }
    }

    /// The function multiplied by `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            TestFunction::Bump { c, w, center } => TestFunction::Bump { c: c * s, w: *w, center: center.clone() },
            TestFunction::Table { xs, fs } => TestFunction::Table { xs: xs.clone(), fs: fs.iter().map(|f| f * s).collect() },
        }
    }

    /// Errors unless the support lies inside `[−L/2, L/2]^d`.
    pub fn check_inside_box(&self, l: f64) -> Result<()> {
        let half = 0.5 * l;
        if self.support().iter().all(|&(a, b)| a >= -half && b <= half) {
            Ok(())
        } else {
            Err(Error::SupportEscapesBox { half })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let f = TestFunction::bump(1, 2.0, 2.0).unwrap();
        assert_eq!(f.eval(&[0.0]), 2.0);
        assert!((f.eval(&[0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(f.eval(&[1.0]), 0.0);
        assert_eq!(f.eval(&[-3.0]), 0.0);
        assert_eq!(f.support(), vec![(-1.0, 1.0)]);
    }

    #[test]
    fn table_interpolates_and_round_trips() {
        let f = TestFunction::table(vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.eval(&[0.5]), 1.0);
        assert_eq!(f.eval(&[2.0]), 0.0);
        let csv = "x,f\n-1,0\n0,2\n1,0\n";
        let g = TestFunction::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(f, g);
        let bump = TestFunction::bump(1, 1.0, 2.0).unwrap();
        let text = bump.to_csv_string(11).unwrap();
        let back = TestFunction::from_csv_reader(text.as_bytes()).unwrap();
        assert!((back.eval(&[0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TestFunction::table(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TestFunction::table(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(TestFunction::from_csv_reader("0,1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn support_check() {
        let f = TestFunction::bump(1, 1.0, 2.0).unwrap();
        assert!(f.check_inside_box(2.0).is_ok());
        assert!(matches!(f.check_inside_box(1.5), Err(Error::SupportEscapesBox { .. })));
    }
}
