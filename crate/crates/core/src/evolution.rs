//! Topology updates: magnitude removal with random zero-initialized regrowth
//! for current networks, and magnitude pruning back to a connection budget
//! for target networks.

use rand::Rng;

use crate::sparse::{Connection, LayerMoments, Mask, Mlp, SparseLayer};

/// Connections removed from and added to one layer by an evolution step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvolutionDelta {
    pub removed: Vec<Connection>,
    pub added: Vec<Connection>,
    /// Growth slots that could not be filled for lack of inactive positions.
    pub shortfall: usize,
}

impl EvolutionDelta {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }
}

/// `floor(eta * count)`
pub fn evolution_count(eta: f64, count: usize) -> usize {
    (eta * count as f64).floor() as usize
}

/// Indices of the `n` smallest-magnitude weights, ties broken by lower index.
pub(crate) fn smallest_magnitudes(weights: &[f64], n: usize) -> Vec<usize> {
    let n = n.min(weights.len());
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    let key = |a: &usize, b: &usize| weights[*a].abs().total_cmp(&weights[*b].abs()).then(a.cmp(b));
    if n < idx.len() && n > 0 {
        idx.select_nth_unstable_by(n - 1, key);
    }
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

/// Drops the connections flagged in `drop`, keeping the rest in order.
fn retain<T: Copy>(values: &[T], drop: &[bool]) -> Vec<T> {
    values.iter().zip(drop).filter(|(_, d)| !**d).map(|(v, _)| *v).collect()
}

/// One SET step on a hidden layer: remove the `floor(eta * nnz)` weights
/// closest to zero, then grow as many zero weights at uniformly random
/// positions that are inactive after the removal. Moments of removed
/// connections are discarded; grown ones start at zero.
pub fn evolve_layer<R: Rng + ?Sized>(
    layer: &mut SparseLayer,
    moments: &mut LayerMoments,
    eta: f64,
    rng: &mut R,
) -> EvolutionDelta {
    let count = evolution_count(eta, layer.connection_count());
    if count == 0 {
        return EvolutionDelta::default();
    }
    let (n_in, n_out) = (layer.n_in(), layer.n_out());

    let mut drop = vec![false; layer.connection_count()];
    for i in smallest_magnitudes(&layer.weights, count) {
        drop[i] = true;
    }
    let removed: Vec<Connection> = retain(layer.mask.pairs(), &drop.iter().map(|d| !d).collect::<Vec<_>>());
    let kept_pairs = retain(layer.mask.pairs(), &drop);
    let kept_w = retain(&layer.weights, &drop);
    let kept_m = retain(&moments.m_w, &drop);
    let kept_v = retain(&moments.v_w, &drop);

    let mut free = vec![true; n_in * n_out];
    for c in &kept_pairs {
        free[c.input * n_out + c.output] = false;
    }
    let candidates: Vec<usize> = free.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i).collect();
    let grow = count.min(candidates.len());
    let mut added: Vec<Connection> = rand::seq::index::sample(rng, candidates.len(), grow)
        .into_iter()
        .map(|i| Connection::new(candidates[i] / n_out, candidates[i] % n_out))
        .collect();
    added.sort_unstable();

    let total = kept_pairs.len() + added.len();
    let mut pairs = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut m_w = Vec::with_capacity(total);
    let mut v_w = Vec::with_capacity(total);
    let (mut i, mut j) = (0, 0);
    while i < kept_pairs.len() || j < added.len() {
        if j == added.len() || (i < kept_pairs.len() && kept_pairs[i] < added[j]) {
            pairs.push(kept_pairs[i]);
            weights.push(kept_w[i]);
            m_w.push(kept_m[i]);
            v_w.push(kept_v[i]);
            i += 1;
        } else {
            pairs.push(added[j]);
            weights.push(0.0);
            m_w.push(0.0);
            v_w.push(0.0);
            j += 1;
        }
    }
    layer.mask = Mask::from_sorted(n_in, n_out, pairs);
    layer.weights = weights;
    moments.m_w = m_w;
    moments.v_w = v_w;

    EvolutionDelta {
        removed,
        added,
        shortfall: count - grow,
    }
}

/// Evolves every non-output layer of `net`, keeping `moments` aligned.
pub fn evolve_network<R: Rng + ?Sized>(
    net: &mut Mlp,
    moments: &mut [LayerMoments],
    eta: f64,
    rng: &mut R,
) -> Vec<EvolutionDelta> {
    let layers = net.layers_mut();
    let hidden = layers.len().saturating_sub(1);
    layers[..hidden]
        .iter_mut()
        .zip(moments.iter_mut())
        .map(|(layer, mom)| evolve_layer(layer, mom, eta, rng))
        .collect()
}

/// Deactivates the smallest-magnitude connections until at most `budget`
/// remain. Returns how many were removed.
pub fn prune_to_budget(layer: &mut SparseLayer, budget: usize) -> usize {
    let nnz = layer.connection_count();
    if nnz <= budget {
        return 0;
    }
    let mut drop = vec![false; nnz];
    for i in smallest_magnitudes(&layer.weights, nnz - budget) {
        drop[i] = true;
    }
    let pairs = retain(layer.mask.pairs(), &drop);
    layer.weights = retain(&layer.weights, &drop);
    layer.mask = Mask::from_sorted(layer.n_in(), layer.n_out(), pairs);
    nnz - budget
}

/// Total active connections of a network, biases excluded.
pub fn connection_count(net: &Mlp) -> usize {
    net.connection_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{Activation, er_mask_init};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layer_with(n_in: usize, n_out: usize, pairs: &[(usize, usize)], w: &[f64]) -> SparseLayer {
        let mask = Mask::new(n_in, n_out, pairs.iter().map(|&(a, b)| Connection::new(a, b)).collect()).unwrap();
        SparseLayer::new(mask, Activation::Relu).with_weights(w.to_vec(), vec![0.0; n_out])
    }

    /// Independent oracle: full sort by (|w|, position).
    fn bottom_by_sort(layer: &SparseLayer, n: usize) -> Vec<Connection> {
        let mut v: Vec<(f64, usize)> = layer.weights().iter().map(|w| w.abs()).zip(0..).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut out: Vec<Connection> = v[..n].iter().map(|(_, i)| layer.mask().pairs()[*i]).collect();
        out.sort();
        out
    }

    #[test]
    fn zero_fraction_is_a_no_op() {
        let mut l = layer_with(2, 3, &[(0, 0), (1, 2)], &[0.1, -0.2]);
        let before = l.clone();
        let mut m = LayerMoments::zeros(2, 3);
        let d = evolve_layer(&mut l, &mut m, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(d.is_empty());
        assert_eq!(l, before);
    }

    #[test]
    fn removes_the_two_closest_to_zero() {
        let pairs = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)];
        let mut l = layer_with(4, 4, &pairs, &[0.9, -0.05, 0.3, -0.8, 0.001]);
        let mut m = LayerMoments::zeros(5, 4);
        m.m_w = vec![1.0; 5];
        m.v_w = vec![1.0; 5];
        let d = evolve_layer(&mut l, &mut m, 0.4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(d.removed, vec![Connection::new(0, 1), Connection::new(2, 0)]);
        assert_eq!(d.added.len(), 2);
        assert_eq!(l.connection_count(), 5);
        for c in &d.added {
            let i = l.mask().position(*c).unwrap();
            assert_eq!(l.weights()[i], 0.0);
            assert_eq!((m.m_w[i], m.v_w[i]), (0.0, 0.0));
        }
        for (c, w) in [((0, 0), 0.9), ((1, 0), 0.3), ((1, 1), -0.8)] {
            assert_eq!(l.weight_at(c.0, c.1), w);
            assert_eq!(m.m_w[l.mask().position(Connection::new(c.0, c.1)).unwrap()], 1.0);
        }
    }

    #[test]
    fn growth_shortfall_reported_when_layer_is_full() {
        let mut l = SparseLayer::new(Mask::dense(2, 2), Activation::Relu).with_weights(vec![0.1, 0.2, 0.3, 0.4], vec![0.0; 2]);
        let mut m = LayerMoments::zeros(4, 2);
        let d = evolve_layer(&mut l, &mut m, 0.5, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(d.removed.len(), 2);
        // the two freed slots are the only candidates
        assert_eq!(d.added, d.removed);
        assert_eq!(d.shortfall, 0);
        assert_eq!(l.weights(), &[0.0, 0.0, 0.3, 0.4]);
    }

    #[test]
    fn prune_examples() {
        let mut l = layer_with(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)], &[1.0, 0.2, -0.01, 0.5]);
        assert_eq!(prune_to_budget(&mut l, 4), 0);
        assert_eq!(prune_to_budget(&mut l, 2), 2);
        assert_eq!(l.weights(), &[1.0, 0.5]);
        assert_eq!(l.mask().pairs(), &[Connection::new(0, 0), Connection::new(1, 1)]);
        prune_to_budget(&mut l, 0);
        assert!(l.mask().is_empty());
        assert!(l.dense_weights().iter().all(|w| *w == 0.0));
    }

    #[test]
    fn ties_break_toward_lower_coordinate() {
        let mut l = layer_with(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)], &[0.5, -0.5, 0.5, 0.1]);
        prune_to_budget(&mut l, 2);
        assert_eq!(l.mask().pairs(), &[Connection::new(0, 1), Connection::new(0, 2)]);
    }

    proptest! {
        #[test]
        fn removal_matches_sort_oracle(seed in any::<u64>(), n_in in 1usize..40, n_out in 1usize..40, lambda in 0.5f64..10.0, eta in 0.0f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mask = er_mask_init(n_in, n_out, lambda, &mut rng);
            let mut l = SparseLayer::new(mask, Activation::Relu);
            l.init_weights(&mut rng);
            let before = l.clone();
            let n = evolution_count(eta, l.connection_count());
            let expected = bottom_by_sort(&l, n);
            let mut m = LayerMoments::zeros(l.connection_count(), n_out);
            let d = evolve_layer(&mut l, &mut m, eta, &mut rng);
            prop_assert_eq!(&d.removed, &expected);
            prop_assert_eq!(l.connection_count() + d.shortfall, before.connection_count());
            for c in &d.added {
                prop_assert!(!before.mask().contains(c.input, c.output) || d.removed.contains(c));
                prop_assert_eq!(l.weight_at(c.input, c.output), 0.0);
            }
        }

        #[test]
        fn pruning_is_idempotent(seed in any::<u64>(), budget in 0usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut l = SparseLayer::new(er_mask_init(12, 20, 6.0, &mut rng), Activation::Relu);
            l.init_weights(&mut rng);
            prune_to_budget(&mut l, budget);
            let once = l.clone();
            prune_to_budget(&mut l, budget);
            prop_assert_eq!(l, once);
        }
    }
}
