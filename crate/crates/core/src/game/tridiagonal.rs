//! Tridiagonal systems and the Thomas algorithm.
//!
//! The implicit HJB/FPK schemes generate systems that are row- (HJB) or
//! column- (FPK) diagonally dominant by construction; the solver checks the
//! property before eliminating so a misconfigured scheme fails loudly.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("zero pivot at row {0}: singular tridiagonal system")]
    SingularSystem(usize),
    #[error("tridiagonal system is not diagonally dominant; reduce the time step")]
    NotDiagonallyDominant,
    #[error("FPK mass drift {0} exceeds tolerance; numerical fault")]
    MassDrift(f64),
    #[error("MFG fixed-point iteration oscillates after 5 damping reductions")]
    Oscillation,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// A tridiagonal system A x = rhs with `lower`/`upper` of length n-1.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>, rhs: Vec<f64>) -> Result<Self, SolverError> {
        let n = diag.len();
        if n == 0 {
            return Err(SolverError::Dimension("empty system".into()));
        }
        if lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
            return Err(SolverError::Dimension(format!(
                "n={n}, lower={}, upper={}, rhs={}",
                lower.len(),
                upper.len(),
                rhs.len()
            )));
        }
        Ok(Self {
            lower,
            diag,
            upper,
            rhs,
        })
    }

    /// Weak row diagonal dominance: |d_i| >= |l_i| + |u_i| for every row.
    pub fn is_row_dominant(&self) -> bool {
        let n = self.diag.len();
        (0..n).all(|i| {
            let l = if i > 0 { self.lower[i - 1].abs() } else { 0.0 };
            let u = if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            self.diag[i].abs() + 1e-12 >= l + u
        })
    }

    /// Weak column diagonal dominance: |d_j| >= |u_{j-1}| + |l_j|.
    pub fn is_column_dominant(&self) -> bool {
        let n = self.diag.len();
        (0..n).all(|j| {
            let above = if j > 0 { self.upper[j - 1].abs() } else { 0.0 };
            let below = if j + 1 < n { self.lower[j].abs() } else { 0.0 };
            self.diag[j].abs() + 1e-12 >= above + below
        })
    }
}

/// Solve by forward elimination and back substitution, O(n).
pub fn thomas_solve(sys: &Tridiagonal) -> Result<Vec<f64>, SolverError> {
    let n = sys.diag.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];

    if sys.diag[0] == 0.0 {
        return Err(SolverError::SingularSystem(0));
    }
    c_prime[0] = if n > 1 { sys.upper[0] / sys.diag[0] } else { 0.0 };
    d_prime[0] = sys.rhs[0] / sys.diag[0];

    for i in 1..n {
        let denom = sys.diag[i] - sys.lower[i - 1] * c_prime[i - 1];
        if denom == 0.0 {
            return Err(SolverError::SingularSystem(i));
        }
        if i + 1 < n {
            c_prime[i] = sys.upper[i] / denom;
        }
        d_prime[i] = (sys.rhs[i] - sys.lower[i - 1] * d_prime[i - 1]) / denom;
    }

    let mut x = d_prime;
    for i in (0..n.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Dense Gaussian elimination with partial pivoting; the independent
    /// oracle for the Thomas solver.
    pub(crate) fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                .unwrap();
            m.swap(col, piv);
            rhs.swap(col, piv);
            for row in (col + 1)..n {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut s = rhs[row];
            for k in (row + 1)..n {
                s -= m[row][k] * x[k];
            }
            x[row] = s / m[row][row];
        }
        x
    }

    fn to_dense(sys: &Tridiagonal) -> Vec<Vec<f64>> {
        let n = sys.diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = sys.diag[i];
            if i > 0 {
                a[i][i - 1] = sys.lower[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = sys.upper[i];
            }
        }
        a
    }

    #[test]
    fn identity_returns_rhs() {
        let sys = Tridiagonal::new(vec![0.0; 4], vec![1.0; 5], vec![0.0; 4], vec![3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
        assert_eq!(thomas_solve(&sys).unwrap(), vec![3.0, 1.0, 4.0, 1.0, 5.0]);
    }

    #[test]
    fn hand_solved_3x3() {
        // diag (2,2,2), off-diagonals -1, rhs (1,0,1) -> (1,1,1).
        let sys = Tridiagonal::new(vec![-1.0, -1.0], vec![2.0, 2.0, 2.0], vec![-1.0, -1.0], vec![1.0, 0.0, 1.0]).unwrap();
        let x = thomas_solve(&sys).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_reports_pivot_row() {
        let sys = Tridiagonal::new(vec![0.0], vec![0.0, 1.0], vec![0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(thomas_solve(&sys), Err(SolverError::SingularSystem(0)));
    }

    fn random_dominant(n: usize, rng: &mut ChaCha12Rng) -> Tridiagonal {
        let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let l: f64 = if i > 0 { lower[i - 1].abs() } else { 0.0 };
                let u: f64 = if i + 1 < n { upper[i].abs() } else { 0.0 };
                (l + u + rng.gen_range(0.1..1.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
            })
            .collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        Tridiagonal::new(lower, diag, upper, rhs).unwrap()
    }

    #[test]
    fn matches_dense_solver_up_to_n200() {
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        for &n in &[2usize, 3, 7, 50, 200] {
            let sys = random_dominant(n, &mut rng);
            assert!(sys.is_row_dominant());
            let x = thomas_solve(&sys).unwrap();
            let y = dense_solve(&to_dense(&sys), &sys.rhs);
            for (a, b) in x.iter().zip(y.iter()) {
                assert!((a - b).abs() <= 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn n1_system() {
        let sys = Tridiagonal::new(vec![], vec![4.0], vec![], vec![8.0]).unwrap();
        assert_eq!(thomas_solve(&sys).unwrap(), vec![2.0]);
    }
}
