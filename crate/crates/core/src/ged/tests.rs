use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::random_graph;

fn l(x: u32) -> Label {
    Label(x)
}

fn graph(labels: &[u32], edges: &[(usize, usize, u32)]) -> Graph {
    let labels = labels.iter().map(|&x| l(x)).collect();
    let edges: Vec<_> = edges.iter().map(|&(u, v, x)| (u, v, l(x))).collect();
    Graph::from_parts(0, labels, &edges).unwrap()
}

fn rand_pair(rng: &mut ChaCha8Rng, max_n: usize) -> (Graph, Graph) {
    let n1 = rng.gen_range(0..=max_n);
    let n2 = rng.gen_range(0..=max_n);
    let p = rng.gen_range(0.2..0.7);
    (
        random_graph(rng, n1, p, 3, 2),
        random_graph(rng, n2, p, 3, 2),
    )
}

#[test]
fn edit_cost_examples() {
    let a = graph(&[0], &[]);
    let b = graph(&[1], &[]);
    assert_eq!(edit_cost(&a, &b, &[], &[]), 0);
    assert_eq!(edit_cost(&a, &a, &[0], &[0]), 0);
    assert_eq!(edit_cost(&a, &b, &[0], &[0]), 1);
    // A-x-B onto A-y-B: the edge relabel is charged when the second pair lands.
    let g1 = graph(&[0, 1], &[(0, 1, 0)]);
    let g2 = graph(&[0, 1], &[(0, 1, 1)]);
    assert_eq!(edit_cost(&g1, &g2, &[0], &[0]), 0);
    assert_eq!(edit_cost(&g1, &g2, &[0, 1], &[0, 1]), 1);
    assert_eq!(edit_cost(&g1, &g2, &[1, 0], &[0, 1]), 3);
}

#[test]
fn padding() {
    let small = graph(&[0], &[]);
    let big = graph(&[0, 1, 2], &[(0, 1, 0)]);
    let (p1, p2) = pad_graphs(&small, &big);
    assert_eq!((p1.order(), p2.order()), (3, 3));
    assert!(p1.is_blank(1) && p1.is_blank(2) && !p1.is_blank(0));
    assert_eq!(p2, big);
    let empty = graph(&[], &[]);
    let (e1, e2) = pad_graphs(&empty, &empty);
    assert_eq!((e1.order(), e2.order()), (0, 0));
    assert_eq!(nass_ged(&empty, &empty, 0), 0);
    assert_eq!(nass_ged(&empty, &big, 10), 4);
}

#[test]
fn equivalence_counts() {
    assert_eq!(cache_equivalence_count(0, 0), Some(1));
    assert_eq!(cache_equivalence_count(3, 0), Some(6));
    assert_eq!(cache_equivalence_count(3, 3), Some(1));
    assert_eq!(cache_equivalence_count(4, 2), Some(12));
    assert_eq!(
        cache_equivalence_count(20, 0),
        Some(2_432_902_008_176_640_000)
    );
    assert_eq!(cache_equivalence_count(21, 0), None);
    assert_eq!(cache_equivalence_count(2, 3), None);
}

#[test]
fn lb_mapping_adds_bridge_cost() {
    // Two pairs mapped with matching labels, both graphs 5 vertices with the
    // same label multisets; the mapped pairs differ only in where their
    // bridges land.
    let g1 = graph(
        &[0, 1, 1, 2, 3],
        &[(0, 1, 0), (0, 2, 0), (1, 3, 1), (2, 3, 0), (3, 4, 1)],
    );
    let g2 = graph(
        &[0, 1, 1, 2, 3],
        &[(0, 1, 0), (0, 2, 1), (1, 3, 0), (2, 3, 0), (3, 4, 1)],
    );
    let mut ctx = SearchContext::new(&g1, &g2, 10, GedOptions::default());
    let order = ctx.order().to_vec();
    let (p1, p2) = ctx.padded();
    let m1: Vec<usize> = order[..2].to_vec();
    assert_eq!(edit_cost(p1, p2, &m1, &order[..2]), 0);
    let st = UnmappedState::from_scratch(p1, p2, &m1, &order[..2]);
    let expected = st.bridge_cost() + st.label_lb().max(st.branch_lb_halves().div_ceil(2));
    assert!(ctx.lb_mapping(&m1) >= expected);
}

#[test]
fn bridge_cost_with_matching_labels() {
    let g1 = graph(
        &[0, 1, 1, 2, 3],
        &[(0, 1, 0), (0, 2, 0), (1, 3, 1), (2, 3, 0), (3, 4, 1)],
    );
    let g2 = graph(
        &[0, 1, 1, 2, 3],
        &[(0, 1, 0), (0, 2, 1), (1, 3, 0), (2, 3, 0), (3, 4, 1)],
    );
    let st = UnmappedState::from_scratch(&g1, &g2, &[0, 1], &[0, 1]);
    assert_eq!(edit_cost(&g1, &g2, &[0, 1], &[0, 1]), 0);
    assert_eq!(st.label_lb(), 0);
    assert_eq!(st.bridge_cost(), 2);
    assert_eq!(st.bridge_cost() + st.label_lb(), 2);
}

#[test]
fn cache_shared_by_permuted_mappings() {
    let g1 = graph(&[0, 0, 1, 2], &[(0, 1, 0), (1, 2, 0), (2, 3, 1)]);
    let g2 = graph(&[0, 0, 1, 3], &[(0, 1, 0), (1, 2, 1), (2, 3, 1)]);
    let opts = GedOptions {
        trace_cache: true,
        ..Default::default()
    };
    let mut ctx = SearchContext::new(&g1, &g2, 5, opts);
    ctx.lb_mapping(&[0, 1]);
    let calls = ctx.stats().cascade_calls;
    let key = ctx.key_of(&[1, 0]);
    let entry = ctx.cache_entry(&key).cloned().unwrap();
    assert_eq!(entry.index, 3);
    ctx.lb_mapping(&[1, 0]);
    // The permuted mapping leaves the same unmapped subgraphs: no filter runs.
    assert_eq!(ctx.stats().cascade_calls, calls);
    assert_eq!(ctx.cache_entry(&key), Some(&entry));
}

#[test]
fn full_mapping_bound_is_its_cost() {
    let g1 = graph(&[0, 1, 2], &[(0, 1, 0), (1, 2, 1)]);
    let g2 = graph(&[0, 1, 2], &[(0, 1, 0), (0, 2, 1)]);
    let mut ctx = SearchContext::new(&g1, &g2, 10, GedOptions::default());
    let order = ctx.order().to_vec();
    let m1 = order.clone();
    let (p1, p2) = ctx.padded();
    let ec = edit_cost(p1, p2, &m1, &order);
    assert_eq!(ctx.lb_mapping(&m1), ec);
}

#[test]
fn raised_abort_returns_root_bound() {
    let g1 = graph(&[0, 1, 2, 0], &[(0, 1, 0), (1, 2, 0), (2, 3, 0)]);
    let g2 = graph(&[0, 1, 1, 2, 2], &[(0, 1, 1), (1, 2, 0), (3, 4, 0)]);
    let flag = AbortFlag::raised();
    let out = nass_ged_with(
        &g1,
        &g2,
        20,
        &GedOptions {
            monitor: Some(&flag),
            ..Default::default()
        },
    );
    assert!(!out.exact);
    let mut ctx = SearchContext::new(&g1, &g2, 20, GedOptions::default());
    assert_eq!(out.distance, ctx.lb_mapping(&[]));
    assert!(out.distance <= brute_force_ged(&g1, &g2).unwrap());
}

#[test]
fn identical_and_threshold_edges() {
    let g = graph(&[0, 1, 2, 1], &[(0, 1, 0), (1, 2, 1), (2, 3, 0), (0, 3, 1)]);
    assert_eq!(nass_ged(&g, &g, 0), 0);
    let h = graph(&[0, 1, 2, 1], &[(0, 1, 0), (1, 2, 1), (2, 3, 0)]);
    assert_eq!(nass_ged(&g, &h, 0), 1);
    assert_eq!(nass_ged(&g, &h, 1), 1);
    assert_eq!(nass_ged(&h, &g, 5), 1);
}

#[test]
fn matches_brute_force_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..300 {
        let (g1, g2) = rand_pair(&mut rng, 7);
        let exact = brute_force_ged(&g1, &g2).unwrap();
        let tau = rng.gen_range(0..=exact + 2);
        let want = exact.min(tau + 1);
        for filters in [Filters::ALL, Filters::LABEL_ONLY] {
            let out = nass_ged_with(
                &g1,
                &g2,
                tau,
                &GedOptions {
                    filters,
                    ..Default::default()
                },
            );
            assert!(out.exact);
            assert_eq!(
                out.distance, want,
                "pair {i} tau {tau} {filters:?}\n{g1:?}\n{g2:?}"
            );
        }
        assert_eq!(nass_ged(&g2, &g1, tau), want, "symmetry, pair {i}");
    }
}

#[test]
fn lower_bounds_never_exceed_ged() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (g1, g2) = rand_pair(&mut rng, 7);
        let exact = brute_force_ged(&g1, &g2).unwrap();
        let (p1, p2) = pad_graphs(&g1, &g2);
        let st = UnmappedState::from_scratch(&p1, &p2, &[], &[]);
        assert!(st.label_lb() <= exact);
        assert!(st.branch_lb_halves().div_ceil(2) <= exact);
        let ps = partition_graph(&g2, &g1, u32::MAX - 1, None);
        assert!(partition_lb(&ps) <= exact);
    }
}

#[test]
fn cache_bounds_only_grow() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let (g1, g2) = rand_pair(&mut rng, 7);
        let opts = GedOptions {
            trace_cache: true,
            ..Default::default()
        };
        let out = nass_ged_with(&g1, &g2, 4, &opts);
        let mut last: BTreeMap<&CacheKey, (u8, u32)> = BTreeMap::new();
        for ev in &out.cache_trace {
            if let Some(&(index, lb)) = last.get(&ev.key) {
                assert!(
                    ev.index >= index && ev.lb >= lb,
                    "{ev:?} after ({index}, {lb})"
                );
            }
            last.insert(&ev.key, (ev.index, ev.lb));
        }
    }
}

#[test]
fn incremental_state_and_bridge_match_scratch() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (g1, g2) = rand_pair(&mut rng, 8);
        let ctx = SearchContext::new(&g1, &g2, 100, GedOptions::default());
        let (p1, p2) = ctx.padded();
        let n = p1.order();
        let order = ctx.order().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
        let mut st = UnmappedState::from_scratch(p1, p2, &[], &[]);
        for k in 0..n {
            let (m1, m2) = (&perm[..k], &order[..k]);
            let b = ctx.child_bridge_cost(&st, m1, m2, perm[k], order[k]);
            st = st.extend(p1, p2, m1, m2, perm[k], order[k]);
            let scratch = UnmappedState::from_scratch(p1, p2, &perm[..=k], &order[..=k]);
            assert_eq!(st, scratch);
            assert_eq!(b, scratch.bridge_cost());
        }
    }
}

/// Optimal assignment by enumeration, in half units.
fn branch_assignment_oracle(a: &[Branch], b: &[Branch]) -> u32 {
    let n = a.len().max(b.len());
    let cost = |x: Option<&Branch>, y: Option<&Branch>| match (x, y) {
        (None, None) => 0,
        (Some(x), Some(y)) if x == y => 0,
        (Some(x), Some(y)) if x.label == y.label => 1,
        _ => 2,
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = u32::MAX;
    permute(&mut perm, 0, &mut |p| {
        let c = (0..n).map(|i| cost(a.get(i), b.get(p[i]))).sum();
        best = best.min(c);
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

#[test]
fn compact_branch_bound_is_optimal_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let branch = |rng: &mut ChaCha8Rng| {
        let mut edges: Vec<Label> = (0..rng.gen_range(0..3))
            .map(|_| l(rng.gen_range(0..2)))
            .collect();
        edges.sort_unstable();
        Branch {
            label: l(rng.gen_range(0..3)),
            edges,
        }
    };
    for _ in 0..400 {
        let mut a: Vec<Branch> = (0..rng.gen_range(0..6)).map(|_| branch(&mut rng)).collect();
        let mut b: Vec<Branch> = (0..rng.gen_range(0..6)).map(|_| branch(&mut rng)).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(
            compact_branch_lb_halves(&a, &b),
            branch_assignment_oracle(&a, &b),
            "{a:?} {b:?}"
        );
    }
}
