//! Dense dummy-variable least squares, solved by Gauss-Jordan elimination.
//! Shares no code with the library's within-transformation path.

#![allow(dead_code)]

pub struct OracleFit {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
}

/// Inverse of a square matrix with partial pivoting; `None` when singular.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// OLS of `y` on the columns of `x` plus one dummy per cluster, with a
/// cluster-robust covariance that clusters on the same groups.
/// `clusters[i]` must lie in `0..n_clusters` and every group must be used.
pub fn dummy_ols(y: &[f64], x: &[Vec<f64>], clusters: &[usize], n_clusters: usize) -> Option<OracleFit> {
    let n = y.len();
    let k = x.first().map_or(0, Vec::len);
    let p = k + n_clusters;
    let row = |i: usize| -> Vec<f64> {
        let mut r = x[i].clone();
        r.extend((0..n_clusters).map(|g| if clusters[i] == g { 1.0 } else { 0.0 }));
        r
    };
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (r, yi) in rows.iter().zip(y) {
        for a in 0..p {
            xty[a] += r[a] * yi;
            for b in 0..p {
                xtx[a][b] += r[a] * r[b];
            }
        }
    }
    let inv = invert(&xtx)?;
    let coef: Vec<f64> = (0..p).map(|a| (0..p).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let resid: Vec<f64> = rows.iter().zip(y).map(|(r, yi)| yi - r.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>()).collect();

    let mut meat = vec![vec![0.0; p]; p];
    for g in 0..n_clusters {
        let mut score = vec![0.0; p];
        for i in (0..n).filter(|&i| clusters[i] == g) {
            for a in 0..p {
                score[a] += rows[i][a] * resid[i];
            }
        }
        for a in 0..p {
            for b in 0..p {
                meat[a][b] += score[a] * score[b];
            }
        }
    }
    let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..p).map(|i| (0..p).map(|j| (0..p).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
    };
    let v = mul(&mul(&inv, &meat), &inv);
    let (nf, kf, gf) = (n as f64, k as f64, n_clusters as f64);
    let c = gf / (gf - 1.0) * (nf - 1.0) / (nf - kf);
    let se = (0..k).map(|a| (c * v[a][a]).sqrt()).collect();

    let mean = y.iter().sum::<f64>() / nf;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let r2 = 1.0 - rss / tss;
    let adj_r2 = 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - kf - gf);
    Some(OracleFit { beta: coef[..k].to_vec(), se, r2, adj_r2 })
}
