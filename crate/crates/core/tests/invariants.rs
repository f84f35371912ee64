use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_td3::evolution::{evolve_layer, prune_to_budget};
use sparse_td3::sparse::{er_mask_init, Activation, Batch, LayerMoments, Mask, Mlp, SparseLayer};

fn random_layer(n_in: usize, n_out: usize, lambda: f64, seed: u64) -> SparseLayer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = SparseLayer::new(er_mask_init(n_in, n_out, lambda, &mut rng), Activation::Relu);
    layer.init_weights(&mut rng);
    layer
}

fn strictly_sorted(layer: &SparseLayer) -> bool {
    layer.mask().pairs().windows(2).all(|w| w[0] < w[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_conserves_connection_count(
        n_in in 1usize..40, n_out in 1usize..40, lambda in 0.5f64..20.0, eta in 0.0f64..0.9, seed in any::<u64>(),
    ) {
        let mut layer = random_layer(n_in, n_out, lambda, seed);
        let nnz = layer.connection_count();
        let mut moments = LayerMoments::zeros(nnz, n_out);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..3 {
            let delta = evolve_layer(&mut layer, &mut moments, eta, &mut rng);
            prop_assert_eq!(layer.connection_count(), nnz);
            prop_assert_eq!(delta.removed.len(), delta.added.len());
            prop_assert_eq!(delta.shortfall, 0);
            prop_assert!(strictly_sorted(&layer));
            prop_assert_eq!(moments.m_w.len(), nnz);
            prop_assert_eq!(moments.v_w.len(), nnz);
        }
    }

    #[test]
    fn pruning_keeps_the_largest_magnitudes(
        n_in in 1usize..30, n_out in 1usize..30, lambda in 0.5f64..30.0, keep in 0.0f64..1.2, seed in any::<u64>(),
    ) {
        let mut layer = random_layer(n_in, n_out, lambda, seed);
        let nnz = layer.connection_count();
        let budget = (keep * nnz as f64) as usize;
        let mut mags: Vec<f64> = layer.weights().iter().map(|w| w.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        prune_to_budget(&mut layer, budget);
        prop_assert_eq!(layer.connection_count(), budget.min(nnz));
        prop_assert!(strictly_sorted(&layer));
        let mut kept: Vec<f64> = layer.weights().iter().map(|w| w.abs()).collect();
        kept.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(&kept[..], &mags[..kept.len()]);
    }

    #[test]
    fn inactive_positions_contribute_nothing(
        n_in in 1usize..12, n_out in 1usize..12, lambda in 0.5f64..6.0, seed in any::<u64>(),
        inputs in prop::collection::vec(-5.0f64..5.0, 12 * 3),
    ) {
        let sparse = random_layer(n_in, n_out, lambda, seed);
        let effective = sparse.dense_weights();
        for (p, w) in effective.iter().enumerate() {
            if !sparse.mask().contains(p / n_out, p % n_out) {
                prop_assert_eq!(*w, 0.0);
            }
        }
        let dense = SparseLayer::new(Mask::dense(n_in, n_out), Activation::Relu)
            .with_weights(effective, sparse.bias().to_vec());
        let head = |n: usize| SparseLayer::new(Mask::dense(n, 1), Activation::Linear).with_weights(vec![1.0; n], vec![0.0]);
        let a = Mlp::from_layers(vec![sparse.clone(), head(n_out)]).unwrap();
        let b = Mlp::from_layers(vec![dense, head(n_out)]).unwrap();
        let x = Batch::from_samples(n_in, &inputs.chunks(12).map(|c| c[..n_in].to_vec()).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.predict(&x).unwrap(), b.predict(&x).unwrap());
    }

    #[test]
    fn er_masks_have_the_requested_size(n_in in 1usize..300, n_out in 1usize..300, lambda in 0.0f64..200.0, seed in any::<u64>()) {
        let mask = er_mask_init(n_in, n_out, lambda, &mut ChaCha8Rng::seed_from_u64(seed));
        let want = ((lambda * (n_in + n_out) as f64).round() as usize).min(n_in * n_out);
        prop_assert_eq!(mask.len(), want);
    }
}
