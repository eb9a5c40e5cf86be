use std::cmp::Ordering;

/// Node indices by decreasing score. Infinite scores come first and NaN last.
///
/// Scores whose relative gap to the head of their run is within `tie_tol`
/// count as equal and are ordered by ascending index.
pub fn rank_nodes(scores: &[f64], tie_tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| descending(scores[a], scores[b]).then(a.cmp(&b)));

    let mut out = Vec::with_capacity(order.len());
    let mut start = 0;
    while start < order.len() {
        let head = scores[order[start]];
        let mut end = start + 1;
        while end < order.len() && tied(head, scores[order[end]], tie_tol) {
            end += 1;
        }
        let mut run = order[start..end].to_vec();
        run.sort_unstable();
        out.extend(run);
        start = end;
    }
    out
}

fn descending(a: f64, b: f64) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => b.partial_cmp(&a).expect("non-NaN"),
    }
}

fn tied(a: f64, b: f64, tol: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
