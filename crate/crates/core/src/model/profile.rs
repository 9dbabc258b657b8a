use serde::{Deserialize, Serialize};

use super::Structure;
use crate::error::{Error, Result};

/// Matrix of efforts `s_ij` (effort of `i` against `j`), zero on the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct StrategyProfile {
    n: usize,
    data: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for StrategyProfile {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        StrategyProfile::from_rows(&rows)
    }
}

impl From<StrategyProfile> for Vec<Vec<f64>> {
    fn from(s: StrategyProfile) -> Self {
        s.rows()
    }
}

impl StrategyProfile {
    pub fn zeros(n: usize) -> Self {
        StrategyProfile {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut s = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "effort s[{i}][{j}] must be finite and >= 0, got {v}"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "diagonal effort s[{i}][{i}] must be 0"
                    )));
                }
                s.data[i * n + j] = v;
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `s_ij`; panics on a diagonal entry or an invalid value.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i != j, "diagonal effort is fixed at zero");
        assert!(v.is_finite() && v >= 0.0, "effort must be finite and >= 0");
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Total effort `w_i` of player `i`.
    pub fn total(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn totals(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.total(i)).collect()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &StrategyProfile) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Structure whose edges are the pairs with `s_ij + s_ji > 0`.
    pub fn induced_structure(&self) -> Structure {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) + self.get(j, i) > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        Structure::new(self.n, &edges).expect("induced edges are simple")
    }
}

/// Structure induced by a profile.
pub fn induced_structure(s: &StrategyProfile) -> Structure {
    s.induced_structure()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(StrategyProfile::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(StrategyProfile::from_rows(&[vec![0.0, -1.0], vec![0.0, 0.0]]).is_err());
        assert!(StrategyProfile::from_rows(&[vec![0.0, f64::INFINITY], vec![0.0, 0.0]]).is_err());
        assert!(StrategyProfile::from_rows(&[vec![0.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn induced_examples() {
        assert!(StrategyProfile::zeros(4).induced_structure().is_empty());
        let mut s = StrategyProfile::zeros(3);
        s.set(0, 1, 0.3);
        let g = s.induced_structure();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn six_player_example_network() {
        // Mixture of mutual and one-sided contests; nodes 1..6 in 0-based form.
        let rows = vec![
            vec![0.0, 0.4, 0.2, 0.0, 0.0, 0.0],
            vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.3, 0.5, 0.0, 0.6, 0.0, 0.0],
            vec![0.0, 0.0, 0.2, 0.0, 0.7, 0.1],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.3],
            vec![0.0, 0.0, 0.0, 0.4, 0.2, 0.0],
        ];
        let s = StrategyProfile::from_rows(&rows).unwrap();
        let g = s.induced_structure();
        let expected = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)];
        assert_eq!(g.edges().collect::<Vec<_>>(), expected.to_vec());
        assert_eq!(s.total(2), 0.3 + 0.5 + 0.6);
    }

    #[test]
    fn json_is_dense_rows() {
        let mut s = StrategyProfile::zeros(2);
        s.set(1, 0, 0.25);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[0.0,0.0],[0.25,0.0]]");
    }
}
