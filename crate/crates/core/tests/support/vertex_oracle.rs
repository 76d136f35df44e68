//! Brute-force LP reference: enumerate every basic point of a small boxed
//! problem and keep the best feasible one.

/// `min c'x` subject to `eq` rows (`a'x = b`), `le` rows (`a'x <= b`) and
/// `0 <= x <= upper`. Returns `None` when no vertex is feasible.
pub fn vertex_minimum(
    c: &[f64],
    eq: &[(Vec<f64>, f64)],
    le: &[(Vec<f64>, f64)],
    upper: f64,
) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    // Candidate active constraints: inequality rows, lower and upper bounds.
    let mut cands: Vec<(Vec<f64>, f64)> = le.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cands.push((e.clone(), 0.0));
        cands.push((e, upper));
    }
    let free = n.checked_sub(eq.len())?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for subset in combinations(cands.len(), free) {
        let mut rows: Vec<(Vec<f64>, f64)> = eq.to_vec();
        rows.extend(subset.iter().map(|&i| cands[i].clone()));
        let Some(x) = solve_square(rows) else { continue };
        let feasible = x.iter().all(|&v| v >= -1e-9 && v <= upper + 1e-9)
            && eq.iter().all(|(a, b)| (dot(a, &x) - b).abs() <= 1e-7)
            && le.iter().all(|(a, b)| dot(a, &x) <= b + 1e-7);
        if !feasible {
            continue;
        }
        let obj = dot(c, &x);
        if best.as_ref().is_none_or(|(v, _)| obj < *v) {
            best = Some((obj, x));
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_square(mut rows: Vec<(Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let n = rows.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| rows[a].0[col].abs().total_cmp(&rows[b].0[col].abs()))?;
        if rows[piv].0[col].abs() < 1e-10 {
            return None;
        }
        rows.swap(col, piv);
        let (pa, pb) = rows[col].clone();
        for r in 0..n {
            if r != col {
                let f = rows[r].0[col] / pa[col];
                if f != 0.0 {
                    for j in col..n {
                        rows[r].0[j] -= f * pa[j];
                    }
                    rows[r].1 -= f * pb;
                }
            }
        }
    }
    Some((0..n).map(|i| rows[i].1 / rows[i].0[i]).collect())
}
