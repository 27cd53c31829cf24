//! Small dense linear algebra and linear programming helpers.
//!
//! Matrices are passed row-major as `(&[f64], rows, cols)`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::DMatrix;

/// Relative singular value cutoff used for every rank decision.
pub const RANK_TOLERANCE: f64 = 1e-10;

fn to_matrix(data: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Numerical rank: number of singular values above `1e-10 * sigma_max`.
pub fn rank(data: &[f64], rows: usize, cols: usize) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let svd = to_matrix(data, rows, cols).svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * sigma_max)
        .count()
}

/// A unit vector `v` with `A v ≈ 0`, if the matrix has a nontrivial kernel.
pub fn null_vector(data: &[f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    if cols == 0 {
        return None;
    }
    if rows == 0 {
        let mut v = vec![0.0; cols];
        v[0] = 1.0;
        return Some(v);
    }
    // Pad with zero rows so the SVD yields a full set of right singular vectors.
    let padded_rows = rows.max(cols);
    let mut padded = vec![0.0; padded_rows * cols];
    padded[..rows * cols].copy_from_slice(data);
    let m = to_matrix(&padded, padded_rows, cols);
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = if sigma_max == 0.0 {
        f64::INFINITY
    } else {
        RANK_TOLERANCE * sigma_max
    };
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let v: Vec<f64> = v_t.row(idx).iter().cloned().collect();
    Some(normalized(v))
}

/// Least-squares solution of `A x = b`.
pub fn least_squares(data: &[f64], rows: usize, cols: usize, rhs: &[f64]) -> Option<Vec<f64>> {
    let m = to_matrix(data, rows, cols);
    let b = nalgebra::DVector::from_column_slice(rhs);
    let svd = m.svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let x = svd.solve(&b, RANK_TOLERANCE * sigma_max.max(f64::MIN_POSITIVE)).ok()?;
    Some(x.iter().cloned().collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Minimizes `sum(y)` subject to `A^T y = 0` and `y >= 1`.
///
/// Feasibility is Stiemke's alternative for `A`: a strictly positive vector
/// in the left kernel. The returned vertex is polished by re-solving the
/// equality system on its non-bound coordinates.
pub fn positive_left_kernel(data: &[f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..rows).map(|_| lp.add_var(1.0, (1.0, f64::INFINITY))).collect();
    for k in 0..cols {
        let mut expr = LinearExpr::empty();
        for (i, &var) in vars.iter().enumerate() {
            let coeff = data[i * cols + k];
            if coeff != 0.0 {
                expr.add(var, coeff);
            }
        }
        lp.add_constraint(expr, ComparisonOp::Eq, 0.0);
    }
    let solution = lp.solve().ok()?;
    let y: Vec<f64> = vars.iter().map(|&v| *solution.var_value(v)).collect();
    Some(polish_left_kernel(data, rows, cols, y))
}

fn left_kernel_residual(data: &[f64], rows: usize, cols: usize, y: &[f64]) -> f64 {
    (0..cols)
        .map(|k| (0..rows).map(|i| data[i * cols + k] * y[i]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

fn polish_left_kernel(data: &[f64], rows: usize, cols: usize, y: Vec<f64>) -> Vec<f64> {
    const AT_BOUND: f64 = 1e-7;
    let free: Vec<usize> = (0..rows).filter(|&i| y[i] > 1.0 + AT_BOUND).collect();
    let mut polished = vec![1.0; rows];
    if !free.is_empty() {
        // Columns of A^T restricted to the free coordinates.
        let mut sub = vec![0.0; cols * free.len()];
        let mut rhs = vec![0.0; cols];
        for k in 0..cols {
            for (j, &i) in free.iter().enumerate() {
                sub[k * free.len() + j] = data[i * cols + k];
            }
            rhs[k] = -(0..rows)
                .filter(|i| !free.contains(i))
                .map(|i| data[i * cols + k])
                .sum::<f64>();
        }
        match least_squares(&sub, cols, free.len(), &rhs) {
            Some(x) => {
                for (j, &i) in free.iter().enumerate() {
                    polished[i] = x[j];
                }
            }
            None => return y,
        }
    }
    let feasible = polished.iter().all(|&v| v >= 1.0 - 1e-12);
    if feasible
        && left_kernel_residual(data, rows, cols, &polished)
            <= left_kernel_residual(data, rows, cols, &y)
    {
        polished
    } else {
        y
    }
}

/// Finds `x != 0` with `A x >= 0` componentwise, or `None` if only `x = 0` qualifies.
///
/// Runs one feasibility LP per signed coordinate `x_j = ±1`.
pub fn nonnegative_image(data: &[f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    for j in 0..cols {
        for sign in [1.0, -1.0] {
            let mut lp = Problem::new(OptimizationDirection::Minimize);
            let vars: Vec<_> = (0..cols)
                .map(|k| {
                    if k == j {
                        lp.add_var(0.0, (sign, sign))
                    } else {
                        lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))
                    }
                })
                .collect();
            for i in 0..rows {
                let expr = row_expr(&data[i * cols..(i + 1) * cols], &vars);
                lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
            }
            if let Ok(solution) = lp.solve() {
                let x: Vec<f64> = vars.iter().map(|&v| *solution.var_value(v)).collect();
                return Some(normalized(x));
            }
        }
    }
    None
}

/// Finds `x` with `A x >= 0` and `sum(A x) = 1`, i.e. a nonzero nonnegative image.
pub fn semipositive_image(data: &[f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..cols)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let mut total = LinearExpr::empty();
    for i in 0..rows {
        let row = &data[i * cols..(i + 1) * cols];
        lp.add_constraint(row_expr(row, &vars), ComparisonOp::Ge, 0.0);
    }
    for (k, &var) in vars.iter().enumerate() {
        let coeff: f64 = (0..rows).map(|i| data[i * cols + k]).sum();
        if coeff != 0.0 {
            total.add(var, coeff);
        }
    }
    lp.add_constraint(total, ComparisonOp::Eq, 1.0);
    let solution = lp.solve().ok()?;
    Some(vars.iter().map(|&v| *solution.var_value(v)).collect())
}

fn row_expr(row: &[f64], vars: &[minilp::Variable]) -> LinearExpr {
    let mut expr = LinearExpr::empty();
    for (&coeff, &var) in row.iter().zip(vars) {
        if coeff != 0.0 {
            expr.add(var, coeff);
        }
    }
    expr
}
