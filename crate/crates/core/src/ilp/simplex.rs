//! Phase-one simplex over an exact ordered field, with Bland's rule.

use crate::num::Scalar;

/// `Σ a_j x_j >= rhs`.
#[derive(Clone, Debug)]
pub struct Row<T> {
    pub coeffs: Vec<T>,
    pub rhs: T,
}

/// Finds a point of `{x >= 0 : rows}` or reports that none exists.
pub fn find_feasible_point<T: Scalar>(n: usize, rows: &[Row<T>]) -> Option<Vec<T>> {
    let m = rows.len();
    if m == 0 {
        return Some(vec![T::zero(); n]);
    }
    // columns: x (n) | surplus (m) | artificial (m) | rhs
    let art0 = n + m;
    let width = n + 2 * m + 1;
    let rhs_col = width - 1;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut uses_artificial = vec![false; m];
    for (i, r) in rows.iter().enumerate() {
        let mut line = vec![T::zero(); width];
        // a·x - s = rhs
        let flip = r.rhs.is_negative();
        for (j, a) in r.coeffs.iter().enumerate() {
            line[j] = if flip { -a.clone() } else { a.clone() };
        }
        line[n + i] = if flip { T::one() } else { -T::one() };
        line[rhs_col] = if flip { -r.rhs.clone() } else { r.rhs.clone() };
        if flip {
            basis.push(n + i);
        } else {
            line[art0 + i] = T::one();
            basis.push(art0 + i);
            uses_artificial[i] = true;
        }
        tab.push(line);
    }
    // reduced costs of min Σ artificial
    let mut cost = vec![T::zero(); width];
    for i in 0..m {
        if uses_artificial[i] {
            cost[art0 + i] = T::one();
        }
    }
    for i in 0..m {
        if uses_artificial[i] {
            for j in 0..width {
                if !tab[i][j].is_zero() {
                    cost[j] = cost[j].clone() - tab[i][j].clone();
                }
            }
        }
    }
    while let Some(enter) = (0..rhs_col).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = tab[i][rhs_col].clone() / tab[i][enter].clone();
                leave = match leave {
                    None => Some(i),
                    Some(k) => {
                        let best = tab[k][rhs_col].clone() / tab[k][enter].clone();
                        if ratio < best || (ratio == best && basis[i] < basis[k]) {
                            Some(i)
                        } else {
                            Some(k)
                        }
                    }
                };
            }
        }
        // phase one is bounded below by zero, so some row must qualify
        let leave = leave.expect("phase-one objective is bounded");
        pivot(&mut tab, &mut cost, leave, enter);
        basis[leave] = enter;
    }
    // optimum of Σ artificial is -cost[rhs]
    if !cost[rhs_col].is_zero() {
        return None;
    }
    let mut x = vec![T::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = tab[i][rhs_col].clone();
        }
    }
    Some(x)
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], cost: &mut [T], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        if !v.is_zero() {
            *v = v.clone() / p.clone();
        }
    }
    let pivot_row = tab[row].clone();
    let eliminate = |line: &mut [T]| {
        let f = line[col].clone();
        if f.is_zero() {
            return;
        }
        for (v, pr) in line.iter_mut().zip(&pivot_row) {
            if !pr.is_zero() {
                *v = v.clone() - f.clone() * pr.clone();
            }
        }
    };
    for (i, line) in tab.iter_mut().enumerate() {
        if i != row {
            eliminate(line);
        }
    }
    eliminate(cost);
}
