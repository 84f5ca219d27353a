//! Randomized invariants across module boundaries.

use std::collections::BTreeSet;

use proptest::prelude::*;

use phonedist::corpus::{
    align_frames, BagSet, PhoneAlignment, PhoneSegment, UnitObservationBag, UnitSequence,
};
use phonedist::infotheory::{entropy_of, js_of, kl_of};
use phonedist::{
    correlate_matrices, pearson, to_newick, top_k_similar, utilization, ward_cluster,
    DistanceMatrix, Distribution, Tree,
};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

/// Normalized weights; zeros allowed, at least one positive entry.
fn dist(omega: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.001f64..1.0], omega)
        .prop_filter("needs mass", |w| w.iter().any(|&x| x > 0.0))
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
}

fn full_support(omega: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, omega).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn pair(omega: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    omega.prop_flat_map(|n| (dist(n), dist(n)))
}

/// Symmetric dissimilarity matrix with distinct off-diagonal entries.
#[allow(clippy::needless_range_loop)]
fn matrix(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    n.prop_flat_map(|n| {
        prop::collection::vec(0.01f64..1.0, n * (n - 1) / 2).prop_map(move |upper| {
            let mut d = vec![vec![0.0; n]; n];
            let mut it = upper.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let v = it.next().unwrap();
                    d[i][j] = v;
                    d[j][i] = v;
                }
            }
            d
        })
    })
    .prop_filter("distinct entries", |d| {
        let mut seen = BTreeSet::new();
        d.iter()
            .enumerate()
            .flat_map(|(i, r)| r[i + 1..].iter())
            .all(|v| seen.insert(v.to_bits()))
    })
}

/// Clusters of a tree as (member labels, height), order independent.
fn clusters(t: &Tree) -> Vec<(Vec<String>, f64)> {
    let mut members: Vec<Vec<String>> = t.leaves().iter().map(|l| vec![l.clone()]).collect();
    let mut out = Vec::new();
    for m in t.merges() {
        let mut joined = [members[m.left].clone(), members[m.right].clone()].concat();
        joined.sort();
        out.push((joined.clone(), m.height));
        members.push(joined);
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// A random corpus: sorted, non-overlapping segments plus unit frames.
fn corpus() -> impl Strategy<Value = (PhoneAlignment, UnitSequence)> {
    (
        1u64..=400,
        0u64..=400,
        1usize..=3,
        1usize..=6,
        prop::collection::vec((0u64..300, 1u64..1200, 0usize..4), 0..15),
        0usize..60,
    )
        .prop_flat_map(|(stride, offset, groups, size, segs, n_frames)| {
            let frames =
                prop::collection::vec(prop::collection::vec(0..size as u32, groups), n_frames);
            (Just((stride, offset, groups, size, segs)), frames)
        })
        .prop_map(|((stride, offset, groups, size, segs), frames)| {
            let mut pos = 0;
            let mut segments = Vec::new();
            for (gap, len, label) in segs {
                pos += gap;
                segments.push(PhoneSegment::new(format!("p{label}"), pos, pos + len));
                pos += len;
            }
            let alignment = PhoneAlignment {
                utterance_id: "u".into(),
                sample_rate: 16_000,
                segments,
            };
            let units = UnitSequence {
                utterance_id: "u".into(),
                model_id: "m".into(),
                num_groups: groups,
                group_size: size,
                stride_samples: stride,
                offset_samples: offset,
                frames,
            };
            (alignment, units)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn assigned_frames_lie_inside_their_segment((alignment, units) in corpus()) {
        let framed = align_frames(&alignment, &units).unwrap();
        for a in &framed.assignments {
            let c = units.frame_center(a.frame);
            let holder: Vec<&PhoneSegment> = alignment.segments.iter().filter(|s| s.contains(c)).collect();
            prop_assert_eq!(holder.len(), 1);
            prop_assert_eq!(holder[0].label.as_str(), a.category);
        }
        let mut bags = BagSet::new(units.omega_size());
        bags.accumulate(&framed.assignments, &units);
        prop_assert_eq!(bags.total_observations(), (units.num_groups * framed.assignments.len()) as u64);
    }

    #[test]
    fn accumulation_order_does_not_matter(
        corpora in prop::collection::vec(corpus(), 1..5),
        seed in any::<u64>(),
    ) {
        // give every utterance the same inventory so their bags can merge
        let corpora: Vec<_> = corpora
            .into_iter()
            .map(|(a, mut u)| {
                u.num_groups = 1;
                u.group_size = 8;
                for f in &mut u.frames {
                    f.truncate(1);
                }
                (a, u)
            })
            .collect();
        let bag_of = |(a, u): &(PhoneAlignment, UnitSequence)| {
            let mut b = BagSet::new(8);
            b.accumulate(&align_frames(a, u).unwrap().assignments, u);
            b
        };
        let forward = corpora.iter().map(bag_of).fold(BagSet::new(8), BagSet::merge);
        let mut order: Vec<usize> = (0..corpora.len()).collect();
        order.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let shuffled = order.iter().map(|&i| bag_of(&corpora[i])).fold(BagSet::new(8), BagSet::merge);
        prop_assert_eq!(forward.into_bags(), shuffled.into_bags());
    }

    #[test]
    fn estimate_is_scale_covariant(counts in prop::collection::vec(0u64..50, 1..40), k in 1u64..20) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let a = Distribution::estimate(&UnitObservationBag::from_counts("x", counts.clone())).unwrap();
        let scaled: Vec<u64> = counts.iter().map(|c| c * k).collect();
        let b = Distribution::estimate(&UnitObservationBag::from_counts("x", scaled)).unwrap();
        prop_assert_eq!(a.probs, b.probs);
        prop_assert_eq!(a.support_size, b.support_size);
    }

    #[test]
    fn utilization_is_monotone(ps in prop::collection::vec(dist(12), 1..8)) {
        let dists: Vec<Distribution> = ps.into_iter().map(|p| Distribution::from_probs("x", p)).collect();
        let mut prev = 0.0;
        for n in 1..=dists.len() {
            let u = utilization(&dists[..n]).unwrap();
            prop_assert!(u >= prev);
            prev = u;
        }
    }

    #[test]
    fn entropy_within_bounds(p in (1usize..64).prop_flat_map(dist)) {
        let h = entropy_of(&p);
        prop_assert!(h >= 0.0 && h <= (p.len() as f64).log2() + 1e-9);
    }

    #[test]
    fn gibbs_inequality((p, q) in (2usize..32).prop_flat_map(|n| (full_support(n), full_support(n)))) {
        prop_assert!(kl_of(&p, &q).unwrap() >= 0.0);
        prop_assert!(kl_of(&p, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn jsd_symmetric_and_bounded((p, q) in pair(1..64)) {
        let a = js_of(&p, &q).unwrap();
        let b = js_of(&q, &p).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn jsd_invariant_under_shared_permutation((p, q) in pair(2..40), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..p.len()).collect();
        perm.sort_by_key(|&i| (i as u64 ^ seed).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let qq: Vec<f64> = perm.iter().map(|&i| q[i]).collect();
        prop_assert!((js_of(&p, &q).unwrap() - js_of(&pp, &qq).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ward_is_permutation_equivariant(d in matrix(2..=7), seed in any::<u64>()) {
        let n = d.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| (i as u64 ^ seed).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let names = labels(n);
        let original = DistanceMatrix::from_rows(names.clone(), d.clone()).unwrap();
        let permuted = DistanceMatrix::from_rows(
            perm.iter().map(|&i| names[i].clone()).collect(),
            perm.iter().map(|&i| perm.iter().map(|&j| d[i][j]).collect()).collect(),
        )
        .unwrap();
        let a = clusters(&ward_cluster(&original).unwrap());
        let b = clusters(&ward_cluster(&permuted).unwrap());
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.0, &y.0);
            prop_assert!((x.1 - y.1).abs() <= 1e-9);
        }
    }

    #[test]
    fn ward_is_deterministic_and_well_formed(d in matrix(2..=8)) {
        let m = DistanceMatrix::from_rows(labels(d.len()), d).unwrap();
        let a = ward_cluster(&m).unwrap();
        let b = ward_cluster(&m).unwrap();
        prop_assert_eq!(to_newick(&a), to_newick(&b));
        prop_assert_eq!(a.merges().len(), m.len() - 1);
        prop_assert_eq!(a.merges().last().unwrap().size, m.len());
        let mut children = BTreeSet::new();
        for mg in a.merges() {
            prop_assert!(children.insert(mg.left));
            prop_assert!(children.insert(mg.right));
        }
    }

    #[test]
    fn pearson_affine_invariance(
        xy in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
        alpha in 0.01f64..100.0,
        beta in -50.0f64..50.0,
        gamma in 0.01f64..100.0,
        delta in -50.0f64..50.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()) };
        let xa: Vec<f64> = x.iter().map(|v| alpha * v + beta).collect();
        let ya: Vec<f64> = y.iter().map(|v| gamma * v + delta).collect();
        let ra = pearson(&xa, &ya).unwrap();
        prop_assert!((r.r - ra.r).abs() <= 1e-12);
        prop_assert!(r.r.abs() <= 1.0);
    }

    #[test]
    fn matrix_correlation_is_symmetric(a in matrix(3..=8), b_seed in prop::collection::vec(0.01f64..1.0, 28)) {
        let n = a.len();
        let names = labels(n);
        let ma = DistanceMatrix::from_rows(names.clone(), a).unwrap();
        let mut it = b_seed.into_iter();
        let mb = DistanceMatrix::from_pairwise(names, |_, _| it.next().unwrap());
        let ab = correlate_matrices::<_, &str>(&ma, &mb, None);
        let ba = correlate_matrices::<_, &str>(&mb, &ma, None);
        match (ab, ba) {
            (Ok(x), Ok(y)) => {
                prop_assert!((x.r - y.r).abs() <= 1e-12);
                prop_assert_eq!(x.n_pairs, n * (n - 1) / 2);
            }
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn nearest_sorted_and_excludes_query(d in matrix(2..=8), q in 0usize..8, k in 1usize..8) {
        let n = d.len();
        let (q, k) = (q % n, 1 + (k - 1) % (n - 1));
        let m = DistanceMatrix::from_rows(labels(n), d).unwrap();
        let query = m.labels()[q].clone();
        let got = top_k_similar(&m, &query, k).unwrap();
        prop_assert_eq!(got.len(), k);
        prop_assert!(got.iter().all(|(l, _)| *l != query));
        prop_assert!(got.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
