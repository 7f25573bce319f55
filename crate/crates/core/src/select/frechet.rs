use crate::geom::Point2;

/// Discrete Frechet distance between two vertex sequences.
///
/// Minimum over monotone couplings of the largest coupled point distance,
/// computed with the Eiter–Mannila recurrence in O(|a|·|b|) time and
/// O(|b|) memory. Sequences that differ only by repeated consecutive
/// vertices are at distance zero.
///
/// # Panics
///
/// If either sequence is empty.
pub fn frechet_dist(a: &[Point2], b: &[Point2]) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "frechet_dist needs nonempty sequences"
    );
    let mut prev = vec![0.0f64; b.len()];
    let mut cur = vec![0.0f64; b.len()];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let d = pa.distance(pb);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len() - 1]
}
