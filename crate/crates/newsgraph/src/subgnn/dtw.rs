//! Dynamic time warping over degree sequences.

use super::SubgnnError;

/// Classic DTW cost with |x - y| local cost and a full window.
///
/// `d[i][j]` is the cheapest alignment of the first `i` elements of `a`
/// with the first `j` elements of `b`; each cell extends the best of its
/// three predecessors (match, insert, delete) by the local cost.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64, SubgnnError> {
    if a.is_empty() || b.is_empty() {
        return Err(SubgnnError::EmptySequence);
    }
    let n = a.len();
    let m = b.len();
    let mut d = vec![vec![f64::INFINITY; m + 1]; n + 1];
    d[0][0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let cost = (a[i - 1] - b[j - 1]).abs();
            let best = d[i - 1][j].min(d[i][j - 1]).min(d[i - 1][j - 1]);
            d[i][j] = cost + best;
        }
    }
    Ok(d[n][m])
}

/// Similarity in (0, 1]: 1 / (1 + DTW). Equal sequences score exactly 1.
pub fn similarity(a: &[f64], b: &[f64]) -> Result<f64, SubgnnError> {
    Ok(1.0 / (1.0 + dtw_distance(a, b)?))
}
