//! Maximum bipartite matching by augmenting paths.

/// `adj[l]` lists the right-side neighbors of left vertex `l`. Returns the
/// matched right vertex per left vertex.
pub fn maximum_bipartite_matching(
    right_count: usize,
    adj: &[Vec<usize>],
) -> Vec<Option<usize>> {
    let left_count = adj.len();
    let mut match_left: Vec<Option<usize>> = vec![None; left_count];
    let mut match_right: Vec<Option<usize>> = vec![None; right_count];

    fn augment(
        l: usize,
        adj: &[Vec<usize>],
        match_left: &mut [Option<usize>],
        match_right: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &r in &adj[l] {
            if visited[r] {
                continue;
            }
            visited[r] = true;
            let free = match match_right[r] {
                None => true,
                Some(l2) => augment(l2, adj, match_left, match_right, visited),
            };
            if free {
                match_left[l] = Some(r);
                match_right[r] = Some(l);
                return true;
            }
        }
        false
    }

    for l in 0..left_count {
        let mut visited = vec![false; right_count];
        augment(l, adj, &mut match_left, &mut match_right, &mut visited);
    }
    match_left
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matching_size(m: &[Option<usize>]) -> usize {
        m.iter().filter(|x| x.is_some()).count()
    }

    #[test]
    fn empty_graph() {
        let m = maximum_bipartite_matching(0, &[]);
        assert!(m.is_empty());
    }

    #[test]
    fn single_edge() {
        let m = maximum_bipartite_matching(1, &[vec![0]]);
        assert_eq!(m, vec![Some(0)]);
    }

    #[test]
    fn two_items_one_slot_with_two_copies() {
        let adj = vec![vec![0, 1], vec![0, 1]];
        let m = maximum_bipartite_matching(2, &adj);
        assert_eq!(matching_size(&m), 2);
        assert_ne!(m[0], m[1]);
    }

    #[test]
    fn augmenting_path_is_found() {
        // l0 -> {r0}, l1 -> {r0, r1}: l1 must give r0 up to l0
        let adj = vec![vec![0], vec![0, 1]];
        let m = maximum_bipartite_matching(2, &adj);
        assert_eq!(matching_size(&m), 2);
        assert_eq!(m[0], Some(0));
        assert_eq!(m[1], Some(1));
    }

    #[test]
    fn deficient_side() {
        let adj = vec![vec![0], vec![0]];
        let m = maximum_bipartite_matching(1, &adj);
        assert_eq!(matching_size(&m), 1);
    }
}
