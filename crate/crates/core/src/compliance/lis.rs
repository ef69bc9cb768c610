/// Length of the longest strictly increasing subsequence.
///
/// Patience sorting: `tails[k]` holds the smallest tail of any increasing
/// subsequence of length `k + 1` seen so far. Each element replaces the first
/// tail that is `>=` it, or starts a new pile. O(n log n).
pub fn longest_increasing_subsequence<T: Ord + Copy>(items: &[T]) -> usize {
    let mut tails: Vec<T> = Vec::with_capacity(items.len());
    for &x in items {
        let pos = tails.partition_point(|t| *t < x);
        if pos == tails.len() {
            tails.push(x);
        } else {
            tails[pos] = x;
        }
    }
    tails.len()
}
