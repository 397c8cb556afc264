//! Damped Newton (iteratively reweighted least squares) reference solver.

use ndarray::{Array1, Array2};

use crate::dataset::BinaryDataset;

use super::{sigmoid, FittedBinaryModel, Hyperparams, SolverError, SolverTag};

// Quadratic damping on the weights (never the bias): the objective gains
// DAMPING * ||w||^2, which bounds weight growth on linearly separable data
// while perturbing the optimum negligibly.
const DAMPING: f64 = 1e-8;

/// Newton steps on the damped mean log loss, starting from zero. Stops when
/// the L2 gradient norm falls below `tolerance` or the largest parameter
/// change in a step does; errors if `max_iterations` steps aren't enough.
pub fn train_reference(
    bds: &BinaryDataset,
    tolerance: f64,
    max_iterations: usize,
) -> Result<FittedBinaryModel, SolverError> {
    if tolerance <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let n = bds.n();
    let d = bds.d();
    let nf = n as f64;
    // theta = (w_0 .. w_{d-1}, b); column d is the implicit all-ones bias column.
    let m = d + 1;
    let mut theta = vec![0.0f64; m];
    let mut iterations = 0usize;

    loop {
        // Gradient of the damped mean loss at theta.
        let mut probs = Array1::zeros(n);
        for i in 0..n {
            let mut z = theta[d];
            for j in 0..d {
                z += bds.features[(i, j)] * theta[j];
            }
            probs[i] = sigmoid(z);
        }
        let residual = &probs - &bds.targets;
        let mut grad = vec![0.0f64; m];
        for j in 0..d {
            let mut acc = 0.0;
            for i in 0..n {
                acc += bds.features[(i, j)] * residual[i];
            }
            grad[j] = acc / nf + 2.0 * DAMPING * theta[j];
        }
        grad[d] = residual.sum() / nf;

        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm < tolerance {
            break;
        }
        if iterations == max_iterations {
            return Err(SolverError::ReferenceNonConvergence {
                max_iterations,
                gradient_norm: grad_norm,
                last_weights: theta[..d].to_vec(),
                last_bias: theta[d],
            });
        }

        // Damped Hessian: A^T diag(p(1-p)) A / n + 2*DAMPING on the weight
        // block, where A = [X | 1].
        let mut hess = Array2::<f64>::zeros((m, m));
        for i in 0..n {
            let w_i = probs[i] * (1.0 - probs[i]);
            if w_i == 0.0 {
                continue;
            }
            for r in 0..m {
                let ar = if r == d { 1.0 } else { bds.features[(i, r)] };
                let war = w_i * ar;
                for c in r..m {
                    let ac = if c == d { 1.0 } else { bds.features[(i, c)] };
                    hess[(r, c)] += war * ac;
                }
            }
        }
        for r in 0..m {
            for c in r..m {
                let v = hess[(r, c)] / nf;
                hess[(r, c)] = v;
                hess[(c, r)] = v;
            }
        }
        for j in 0..d {
            hess[(j, j)] += 2.0 * DAMPING;
        }

        let step = solve_symmetric(&mut hess, &grad).ok_or(SolverError::SingularSystem {
            iteration: iterations,
        })?;
        let mut max_change = 0.0f64;
        for j in 0..m {
            theta[j] -= step[j];
            max_change = max_change.max(step[j].abs());
        }
        iterations += 1;
        if max_change < tolerance {
            break;
        }
    }

    Ok(FittedBinaryModel {
        weights: Array1::from(theta[..d].to_vec()),
        bias: theta[d],
        solver_tag: SolverTag::Reference,
        hyperparams: Hyperparams {
            learning_rate: None,
            iterations: Some(iterations),
            c: None,
            tolerance: Some(tolerance),
        },
        loss_trace: None,
    })
}

/// Gaussian elimination with partial pivoting on a dense system; returns
/// `None` when the best available pivot is negligible relative to the
/// matrix scale.
fn solve_symmetric(a: &mut Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let scale = a.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1e-300);
    let pivot_floor = scale * 1e-14;
    let mut x: Vec<f64> = b.to_vec();

    for col in 0..m {
        let mut pivot_row = col;
        let mut pivot_abs = a[(col, col)].abs();
        for r in col + 1..m {
            let v = a[(r, col)].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs < pivot_floor {
            return None;
        }
        if pivot_row != col {
            for c in 0..m {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot_row, c)];
                a[(pivot_row, c)] = tmp;
            }
            x.swap(col, pivot_row);
        }
        let pivot = a[(col, col)];
        for r in col + 1..m {
            let factor = a[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..m {
                a[(r, c)] -= factor * a[(col, c)];
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..m).rev() {
        let mut acc = x[col];
        for c in col + 1..m {
            acc -= a[(col, c)] * x[c];
        }
        x[col] = acc / a[(col, col)];
    }
    Some(x)
}
