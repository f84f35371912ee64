use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_td3::sparse::{er_mask_init, Activation, Batch, Mask, Mlp};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (name, lambda) in [("dense", None), ("sparse", Some(64.0))] {
        let net = Mlp::build(
            &[4, 256, 256, 1],
            Activation::Linear,
            |l, a, b, r: &mut ChaCha8Rng| match (l, lambda) {
                (1, Some(lam)) => er_mask_init(a, b, lam, r),
                _ => Mask::dense(a, b),
            },
            &mut rng,
        )
        .unwrap();
        let x = Batch::from_samples(4, &vec![vec![0.3, -0.2, 0.5, 0.1]; 100]).unwrap();
        let reps = 200;
        let t = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(net.predict(&x).unwrap());
        }
        let fwd = t.elapsed().as_secs_f64() / reps as f64;
        let (_, cache) = net.forward(&x).unwrap();
        let g = Batch::zeros(1, 100);
        let t = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(net.backward(&cache, &g).unwrap());
        }
        let bwd = t.elapsed().as_secs_f64() / reps as f64;
        let t = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(net.input_gradient(&cache, &g).unwrap());
        }
        let ig = t.elapsed().as_secs_f64() / reps as f64;
        println!("{name}: forward {:.3} ms, backward {:.3} ms, input grad {:.3} ms", fwd * 1e3, bwd * 1e3, ig * 1e3);
    }
}
