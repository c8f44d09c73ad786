//! Parsers for the textual flag formats.

use msisland_core::scan::{Axis, Param};
use nalgebra::DMatrix;

/// `min:max:count`.
pub fn range(param: Param, text: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected min:max:count, got {text:?}"));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad minimum {:?}", parts[0]))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad maximum {:?}", parts[1]))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad count {:?}", parts[2]))?;
    Axis::new(param, min, max, count).map_err(|e| e.to_string())
}

pub fn vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number {t:?}")))
        .collect()
}

/// Rows separated by `;`, entries by `,`.
pub fn matrix(text: &str) -> Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = text.split(';').map(vector).collect::<Result<_, _>>()?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(format!(
            "rows of {text:?} must be non-empty and equally long"
        ));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// `identity`, `diag:a,b,c` or `rows:a,b;c,d` for an `m`-dimensional system.
pub fn coupling_profile(text: &str, m: usize) -> Result<DMatrix<f64>, String> {
    let text = text.trim();
    let h = if text.eq_ignore_ascii_case("identity") || text.eq_ignore_ascii_case("i") {
        DMatrix::identity(m, m)
    } else if let Some(rest) = text.strip_prefix("diag:") {
        let d = vector(rest)?;
        if d.len() != m {
            return Err(format!("diag needs {m} entries, got {}", d.len()));
        }
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
    } else if let Some(rest) = text.strip_prefix("rows:") {
        matrix(rest)?
    } else {
        return Err(format!(
            "expected identity, diag:... or rows:..., got {text:?}"
        ));
    };
    if h.nrows() != m || h.ncols() != m {
        return Err(format!("must be {m}x{m}, got {}x{}", h.nrows(), h.ncols()));
    }
    Ok(h)
}

/// `name=value`.
pub fn assignment(text: &str) -> Result<(String, f64), String> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {text:?}"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("bad value in {text:?}"))?;
    Ok((k.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let a = range(Param::Tau, "0:20:400").unwrap();
        assert_eq!((a.min, a.max, a.count), (0.0, 20.0, 400));
        assert!(range(Param::Tau, "0:20").is_err());
        assert!(range(Param::Tau, "0:x:4").is_err());
        assert!(range(Param::Sigma, "-1:2:4").is_err());
        assert!(range(Param::Sigma, "0:0:1").is_ok());
    }

    #[test]
    fn profiles() {
        assert_eq!(
            coupling_profile("identity", 3).unwrap(),
            DMatrix::identity(3, 3)
        );
        let d = coupling_profile("diag:1,0,0", 3).unwrap();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(1, 1)], 0.0);
        let r = coupling_profile("rows:0,1;1,0", 2).unwrap();
        assert_eq!(r[(0, 1)], 1.0);
        assert!(coupling_profile("rows:0,1;1,0", 3).is_err());
        assert!(coupling_profile("bogus", 3).is_err());
    }

    #[test]
    fn assignments() {
        assert_eq!(assignment("tau=1.5").unwrap(), ("tau".into(), 1.5));
        assert!(assignment("tau").is_err());
    }
}
