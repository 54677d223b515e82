//! Exact integer linear algebra for orientation tests.

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination. Every intermediate division is exact.
pub(crate) fn det_i128(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Determinant of the edge vectors `(v_1 - v_0, ..., v_q - v_0)` for a
/// tuple of `n + 1` points in `Z^n`. Zero for degenerate tuples.
pub(crate) fn edge_det(vertices: &[&[i64]]) -> i128 {
    let v0 = vertices[0];
    let m: Vec<Vec<i128>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(v0).map(|(a, b)| (*a - *b) as i128).collect())
        .collect();
    det_i128(m)
}
