/// Drops the most similar `⌊drop_fraction · N⌋` candidates.
///
/// Candidates are ranked by score, highest first, with ties kept in input
/// order; the survivors come back in their original input order.
///
/// # Panics
///
/// If `drop_fraction` is outside `[0, 1)`.
pub fn percentile_filter<T>(scored: Vec<(T, f64)>, drop_fraction: f64) -> Vec<T> {
    assert!(
        (0.0..1.0).contains(&drop_fraction),
        "drop_fraction must be in [0, 1), got {drop_fraction}"
    );
    let n = scored.len();
    let n_drop = (drop_fraction * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so equal scores keep input order
    order.sort_by(|&a, &b| scored[b].1.total_cmp(&scored[a].1));
    let mut keep = vec![true; n];
    for &i in &order[..n_drop] {
        keep[i] = false;
    }
    scored
        .into_iter()
        .zip(keep)
        .filter_map(|((c, _), k)| k.then_some(c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_the_four_most_similar_of_ten() {
        let scored: Vec<(usize, f64)> = (1..=10).map(|i| (i, i as f64 / 10.0)).collect();
        assert_eq!(percentile_filter(scored, 0.4), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn zero_fraction_keeps_everything() {
        let scored = vec![("a", 0.3), ("b", 0.9), ("c", 0.1)];
        assert_eq!(percentile_filter(scored, 0.0), vec!["a", "b", "c"]);
    }

    #[test]
    fn floor_rule_on_single_candidate() {
        assert_eq!(percentile_filter(vec![("only", 0.99)], 0.4), vec!["only"]);
        assert!(percentile_filter(Vec::<((), f64)>::new(), 0.4).is_empty());
    }

    #[test]
    fn ties_drop_earlier_input_first() {
        let scored = vec![("a", 0.5), ("b", 0.5), ("c", 0.5), ("d", 0.1), ("e", 0.5)];
        // floor(0.4 * 5) = 2: the first two of the four tied 0.5s go
        assert_eq!(percentile_filter(scored, 0.4), vec!["c", "d", "e"]);
    }

    #[test]
    #[should_panic(expected = "drop_fraction")]
    fn rejects_full_drop() {
        percentile_filter(vec![(1, 0.0)], 1.0);
    }
}
