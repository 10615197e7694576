use cmmsb::model::{observed_pairs, CommunityMode, CountState, Hyperparams, InteractionMatrix, SubgroupMap};
use proptest::prelude::*;

/// A random partially observed network with random indicators over `k`
/// communities.
fn instance() -> impl Strategy<Value = (CountState, usize)> {
    (3usize..8, 2usize..5).prop_flat_map(|(n, k)| {
        let cells = n * n;
        (
            prop::collection::vec(prop::option::weighted(0.8, any::<bool>()), cells),
            prop::collection::vec((0..k, 0..k), cells),
        )
            .prop_map(move |(entries, cells)| {
                let mut data = InteractionMatrix::new(n);
                for i in 0..n {
                    for j in 0..n {
                        if let (true, Some(e)) = (i != j, entries[i * n + j]) {
                            data.set(i, j, e).unwrap();
                        }
                    }
                }
                let pairs = observed_pairs(&data, &SubgroupMap::independent(n)).unwrap();
                let assign: Vec<_> = (0..pairs.len()).map(|p| Some(cells[p])).collect();
                (CountState::from_assignments(CommunityMode::Finite, k, n, pairs, &assign).unwrap(), k)
            })
    })
}

proptest! {
    #[test]
    fn node_counts_are_twice_the_incident_pairs((state, _) in instance()) {
        for i in 0..state.n() {
            let incident = state.pairs().iter().filter(|p| p.sender == i).count()
                + state.pairs().iter().filter(|p| p.receiver == i).count();
            prop_assert_eq!(state.node_counts(i).iter().sum::<u32>() as usize, incident);
        }
    }

    #[test]
    fn block_counts_cover_every_pair((state, k) in instance()) {
        let total: u32 = (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).map(|(a, b)| state.links(a, b) + state.non_links(a, b)).sum();
        prop_assert_eq!(total as usize, state.pairs().len());
    }

    #[test]
    fn removing_and_restoring_a_pair_is_exact((state, _) in instance(), pick: prop::sample::Index) {
        prop_assume!(!state.pairs().is_empty());
        let p = pick.index(state.pairs().len());
        let (s, r) = state.assignment(p).unwrap();
        let mut edited = state.clone();
        edited.remove_pair(p).unwrap();
        edited.add_pair(p, s, r).unwrap();
        prop_assert_eq!(&edited, &state);
        edited.check_consistency().unwrap();
    }

    #[test]
    fn edge_likelihood_ignores_labels((state, k) in instance(), a: prop::sample::Index, b: prop::sample::Index) {
        let hp = Hyperparams { alpha: 1.0, gamma: 1.0, lambda1: 0.7, lambda2: 1.9 };
        let before = state.collapsed_edge_loglik(&hp);
        let mut swapped = state.clone();
        swapped.swap_labels(a.index(k), b.index(k)).unwrap();
        swapped.check_consistency().unwrap();
        prop_assert!((swapped.collapsed_edge_loglik(&hp) - before).abs() <= 1e-9 * before.abs().max(1.0));
    }
}

#[test]
fn missing_entries_and_the_diagonal_never_become_pairs() {
    let mut data = InteractionMatrix::new(4);
    data.set(0, 1, true).unwrap();
    data.set(2, 3, false).unwrap();
    assert!(data.set(1, 1, true).is_err());
    let pairs = observed_pairs(&data, &SubgroupMap::full(4)).unwrap();
    assert_eq!(pairs.len(), 2);
    assert!(pairs.iter().all(|p| p.sender != p.receiver && p.group == 1));
}
