/// Brute-force AIC (`kind == "aic"`) or MDL over eigenvalues in any order,
/// using the likelihood in product form
/// `−log( Π λ_i^{1/(M−k)} / ((1/(M−k)) Σ λ_i) )^{(M−k)N}`.
/// Returns the argmin and the full trace. Shares no code with the library.
pub fn oracle(eigs: &[f64], n: usize, kind: &str) -> (usize, Vec<f64>) {
    let mut desc = eigs.to_vec();
    desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let m = desc.len();
    let mut values = Vec::new();
    for k in 0..m {
        let tail = &desc[k..];
        let p = (m - k) as f64;
        let mut geo = 1.0;
        for l in tail {
            geo *= l.powf(1.0 / p);
        }
        let arith = tail.iter().sum::<f64>() / p;
        let neg_log_lik = if tail.len() == 1 {
            0.0
        } else {
            -(p * n as f64) * (geo / arith).ln()
        };
        let kf = k as f64;
        let mf = m as f64;
        values.push(match kind {
            "aic" => 2.0 * neg_log_lik + 2.0 * kf * (2.0 * mf - kf),
            _ => neg_log_lik + 0.5 * kf * (2.0 * mf - kf) * (n as f64).ln(),
        });
    }
    let mut best = 0;
    for k in 1..m {
        if values[k] < values[best] {
            best = k;
        }
    }
    (best, values)
}
