use ic_core::bounds::{white_noise_family, ConcatenationQuery};
use ic_core::info::entropy;
use ic_core::*;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Random box with every `(x, y)` block normalized; not necessarily nonsignaling.
fn arb_box(nx: usize, ny: usize) -> impl Strategy<Value = BipartiteBox> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), nx * ny).prop_map(move |blocks| {
        let probs = blocks.into_iter().flat_map(normalized).collect();
        BipartiteBox::new(2, 2, nx, ny, probs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fano_equality(d in 2usize..=8, e in 0.0f64..=1.0) {
        let mi = mutual_information(&JointDistribution::unbiased_errors(d, e).unwrap());
        prop_assert!(close(mi, fano_information(d, e).unwrap(), 1e-10));
    }

    #[test]
    fn binary_entropy_symmetric(q in 0.0f64..=1.0) {
        let (a, b) = (binary_entropy(q).unwrap(), binary_entropy(1.0 - q).unwrap());
        prop_assert!(close(a, b, 1e-15));
    }

    #[test]
    fn information_nonnegative_and_zero_on_products(
        rows in prop::collection::vec(0.0f64..1.0, 2..5),
        cols in prop::collection::vec(0.0f64..1.0, 2..5),
        noise in prop::collection::vec(0.0f64..1.0, 16),
    ) {
        prop_assume!(rows.iter().sum::<f64>() > 0.1 && cols.iter().sum::<f64>() > 0.1);
        let (r, c) = (normalized(rows), normalized(cols));
        let product: Vec<f64> = r.iter().flat_map(|a| c.iter().map(move |b| a * b)).collect();
        let joint = JointDistribution::new(r.len(), c.len(), product.clone()).unwrap();
        prop_assert!(mutual_information(&joint).abs() < 1e-12);

        let perturbed = normalized(
            product.iter().zip(&noise).map(|(p, n)| p + 0.2 * n).collect(),
        );
        let joint = JointDistribution::new(r.len(), c.len(), perturbed).unwrap();
        let mi = mutual_information(&joint);
        prop_assert!(mi >= 0.0);
        let (pa, pb) = (joint.row_marginal(), joint.col_marginal());
        let dependence = (0..r.len())
            .flat_map(|i| (0..c.len()).map(move |j| (i, j)))
            .map(|(i, j)| (joint.get(i, j) - pa[i] * pb[j]).abs())
            .fold(0.0, f64::max);
        if dependence > 1e-4 {
            prop_assert!(mi > 0.0);
        }
    }

    #[test]
    fn bell_value_is_linear_in_mixing(
        (bx, f) in prop_oneof![
            arb_box(2, 2).prop_map(|b| (b, BellFunctional::chsh())),
            arb_box(3, 3).prop_map(|b| (b, BellFunctional::i3322())),
        ],
        e in 0.0f64..=1.0,
    ) {
        let (na, nb, nx, ny) = bx.shape();
        let noise = BipartiteBox::white_noise(na, nb, nx, ny).unwrap();
        let mixed = bell_value(&bx.mix_with_white_noise(e).unwrap(), &f).unwrap();
        let parts = e * bell_value(&bx, &f).unwrap() + (1.0 - e) * bell_value(&noise, &f).unwrap();
        prop_assert!(close(mixed, parts, 1e-12));
    }

    #[test]
    fn iterative_capacity_matches_closed_form(d in 2usize..=6, e_c in 0.0f64..=1.0) {
        let est = iterative_capacity(&symmetric_channel(d, e_c).unwrap(), 1e-12).unwrap();
        prop_assert!(close(est.capacity, closed_form_capacity(d, e_c).unwrap(), 1e-8));
        for p in est.input {
            prop_assert!(close(p, 1.0 / d as f64, 1e-6));
        }
    }

    #[test]
    fn chained_channels_multiply_biases(e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0, p in 0.5f64..=1.0) {
        let chained = symmetric_channel(2, e1).unwrap().then(&symmetric_channel(2, e2).unwrap()).unwrap();
        let sim = simulate(&van_dam_protocol(), &pr_box(p).unwrap(), &chained).unwrap();
        let e = 2.0 * p - 1.0;
        for s in sim.success {
            prop_assert!(close(s, (1.0 + e * e1 * e2) / 2.0, 1e-12));
        }
    }

    #[test]
    fn van_dam_joints_are_unbiased(p in 0.5f64..=1.0, e_c in 0.0f64..=1.0) {
        let sim = simulate(&van_dam_protocol(), &pr_box(p).unwrap(), &symmetric_channel(2, e_c).unwrap()).unwrap();
        let want = fano_information(2, (2.0 * p - 1.0) * e_c).unwrap();
        for (joint, info) in sim.joints.iter().zip(&sim.information) {
            prop_assert!(close(joint.weights().iter().sum::<f64>(), 1.0, 1e-10));
            prop_assert!(close(*info, want, 1e-10));
        }
    }

    #[test]
    fn result1_never_fails(n in 2usize..=4, d in 2usize..=8, e in 0.0f64..=1.0, k in 1u32..=6) {
        prop_assert!(result1_witness(n, d, e, k).unwrap().implication_holds);
    }

    #[test]
    fn protocol_bound_matches_symmetric(e_c in 0.02f64..=1.0) {
        let pr = pr_box(1.0).unwrap();
        let generic = protocol_bound(&van_dam_protocol(), &white_noise_family(&pr), &symmetric_channel(2, e_c).unwrap(), 1e-12).unwrap();
        let closed = solve_symmetric_bound(2, 2, e_c, 1e-12).unwrap();
        prop_assert!(close(generic.e_bound, closed.e_bound, 1e-8));
    }
}

#[test]
fn fano_strictly_increasing() {
    for d in 2..=20 {
        let mut prev = fano_information(d, 0.0).unwrap();
        for j in 1..=10_000 {
            let next = fano_information(d, j as f64 / 10_000.0).unwrap();
            assert!(next > prev, "d={d} j={j}");
            prev = next;
        }
    }
}

#[test]
fn entropy_of_uniform() {
    for n in 1..=16 {
        assert!(close(
            entropy(&vec![1.0 / n as f64; n]),
            (n as f64).log2(),
            1e-12
        ));
    }
}

#[test]
fn boxes_on_grids_are_nonsignaling() {
    for j in 0..=100 {
        let t = j as f64 / 100.0;
        assert!(validate_no_signaling(&pr_box(t).unwrap(), 1e-12).is_valid());
        assert!(validate_no_signaling(&box_3322(t).unwrap(), 1e-12).is_valid());
    }
}

#[test]
fn capacity_monotone_in_channel_bias() {
    for d in [2, 3, 5, 8] {
        let caps: Vec<f64> = (0..=1000)
            .map(|j| closed_form_capacity(d, j as f64 / 1000.0).unwrap())
            .collect();
        assert!(caps.windows(2).all(|w| w[1] >= w[0]), "d={d}");
    }
}

#[test]
fn ic_sum_monotone_in_channel_bias() {
    let proto = protocol_3322();
    let bx = box_3322(0.8).unwrap();
    let sums: Vec<f64> = (0..=200)
        .map(|j| {
            let ch = symmetric_channel(2, j as f64 / 200.0).unwrap();
            simulate(&proto, &bx, &ch).unwrap().ic_sum
        })
        .collect();
    assert!(sums.windows(2).all(|w| w[1] >= w[0] - 1e-15));
}

#[test]
fn symmetric_bound_is_continuous() {
    let tol = 1e-10;
    let grid: Vec<f64> = (1..=2000).map(|j| j as f64 / 2000.0).collect();
    for d in [2, 3, 5] {
        let bounds: Vec<f64> = grid
            .iter()
            .map(|&e_c| solve_symmetric_bound(2, d, e_c, tol).unwrap().e_bound)
            .collect();
        let jump = bounds
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        // steps of 5e-4 in e_c move the bound by well under 1e-2
        assert!(jump < 1e-2, "d={d} jump {jump}");
    }
}

#[test]
fn optimum_beats_every_concatenation_depth() {
    for d in [2, 3, 4, 5, 20] {
        let opt = optimize_channel_bias(2, d, 1e-10).unwrap();
        for k in 1..=64 {
            let c = concatenation_bound(ConcatenationQuery::new(2, d, k).unwrap(), 1e-10).unwrap();
            assert!(opt.e_bound <= c.e_bound + 1e-10, "d={d} k={k}");
        }
    }
}
