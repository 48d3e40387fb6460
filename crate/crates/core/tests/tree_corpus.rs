mod common;

use common::{all_tree_posets, binom};

#[test]
fn tree_poset_counts() {
    // Oriented unlabeled trees: 1, 1, 3, 8, 27 (OEIS A000238).
    let counts: Vec<usize> = (1..=5).map(|m| all_tree_posets(m, |_| true).len()).collect();
    assert_eq!(counts, [1, 1, 3, 8, 27]);
    assert_eq!(binom(4, 2), 6);
    assert_eq!(binom(7, 3), 35);
}
