//! Canonical ordering of unordered telescope pairs.
//!
//! Every module indexes coherence entries, baselines, phases, and Fisher
//! blocks by the same lexicographic pair order (AB, AC, ..., BC, ...), so a
//! pair index computed here is valid everywhere.

/// Number of unordered pairs among `m` telescopes.
pub fn pair_count(m: usize) -> usize {
    m * (m - 1) / 2
}

/// All unordered pairs `(i, j)` with `i < j`, in lexicographic order.
pub fn pair_list(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(m));
    for i in 0..m {
        for j in (i + 1)..m {
            out.push((i, j));
        }
    }
    out
}

/// Index of the unordered pair `{i, j}` in lexicographic order.
///
/// Accepts either ordering of the two telescopes.
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(b < m && a != b);
    a * m - a * (a + 1) / 2 + (b - a - 1)
}

/// Telescope label: letters for small arrays, `T<i>` beyond Z.
pub fn telescope_label(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("T{i}")
    }
}

/// Canonical label for the pair `{i, j}`, e.g. `AB`.
pub fn pair_label(i: usize, j: usize) -> String {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    format!("{}{}", telescope_label(a), telescope_label(b))
}
