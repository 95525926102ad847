//! Parsing of vectors and matrices given on the command line.

use jetconn::{Matrix, Vector};

/// Parses `"a,b,c"` into a vector of length `n`.
pub fn vector(text: &str, n: usize) -> Result<Vector, String> {
    let values = numbers(text)?;
    if values.len() != n {
        return Err(format!("expected {n} components, got {} in '{text}'", values.len()));
    }
    Ok(Vector::from_vec(values))
}

/// Parses `"a,b;c,d"` (rows separated by ';') into an `n × n` matrix.
pub fn matrix(text: &str, n: usize) -> Result<Matrix, String> {
    let rows: Vec<Vec<f64>> = text.split(';').map(numbers).collect::<Result<_, _>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("expected a {n}x{n} matrix, got '{text}'"));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{s}' is not a finite number"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_parse_with_spaces() {
        assert_eq!(vector(" 0.5, -1e-2", 2).unwrap(), Vector::from_vec(vec![0.5, -0.01]));
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        assert!(vector("1,2,3", 2).is_err());
        assert!(matrix("1,2;3", 2).is_err());
        assert!(vector("1,nan", 2).is_err());
    }

    #[test]
    fn matrices_are_row_major() {
        let m = matrix("1,2;3,4", 2).unwrap();
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 0)], 3.0);
    }
}
