use stereopose_core::matmul::{gemm, Mat};
use std::time::Instant;

fn bench(m: usize, k: usize, n: usize, iters: usize) {
    let a = Mat::from_vec(m, k, (0..m*k).map(|i| (i as f64).sin()).collect());
    let b = Mat::from_vec(k, n, (0..k*n).map(|i| (i as f64).cos()).collect());
    let mut c = Mat::zeros(m, n);
    let t0 = Instant::now();
    for _ in 0..iters {
        gemm(&a, false, &b, false, &mut c, 0.0);
    }
    let dt = t0.elapsed().as_secs_f64();
    let flops = 2.0 * (m * k * n * iters) as f64;
    println!("{m}x{k}x{n}: {:.2} GFLOPs/s ({:.3} ms/iter)", flops / dt / 1e9, dt * 1e3 / iters as f64);
}

fn main() {
    bench(13, 128, 128, 2000);    // single-pose projection
    bench(13, 128, 512, 2000);    // single-pose FFN
    bench(416, 128, 128, 500);    // 32-sample shard projection
    bench(416, 128, 512, 300);    // 32-sample shard FFN
    bench(1664, 128, 512, 100);   // 128-sample shard FFN
    bench(3328, 128, 128, 100);   // full-batch projection
}
