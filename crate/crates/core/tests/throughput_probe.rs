//! Manual throughput probe for the training hot path; run with
//! `cargo test --release --test throughput_probe -- --ignored --nocapture`.

use pgmoe_core::model::MoeModel;
use pgmoe_core::spin::{build_partition, SzInterval};
use std::time::Instant;

#[test]
#[ignore]
fn moe_step_throughput() {
    let partition = build_partition(
        10,
        &[
            SzInterval::new(0, -5.0, 0.0),
            SzInterval::new(1, 1.0, 3.0),
            SzInterval::new(2, 4.0, 5.0),
        ],
    )
    .unwrap();
    let model = MoeModel::new(partition, 2, 200, 0).unwrap();
    let points: Vec<(f64, f64)> = (0..8).map(|i| (0.1 * i as f64, 0.5)).collect();

    // Warm up.
    let (_, cache) = model.forward_batch(&points).unwrap();
    let grads = vec![vec![1e-3; 1024]; 8];
    model.backward_batch(&cache, &grads).unwrap();

    let reps = 10;
    let t0 = Instant::now();
    for _ in 0..reps {
        let (_, cache) = model.forward_batch(&points).unwrap();
        model.backward_batch(&cache, &grads).unwrap();
    }
    let per_batch = t0.elapsed().as_secs_f64() / reps as f64;
    // 8 points x 1024 rows x 42,600 MACs, forward 1x + backward 2x.
    let flops = 8.0 * 1024.0 * 42_600.0 * 2.0 * 3.0;
    println!(
        "fwd+bwd batch of 8: {:.1} ms  (~{:.1} GFLOP/s)",
        per_batch * 1e3,
        flops / per_batch / 1e9
    );
    println!(
        "full epoch (260 pts = 33 batches): ~{:.2} s",
        per_batch * 33.0
    );
}
