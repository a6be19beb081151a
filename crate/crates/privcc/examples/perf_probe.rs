// Scratch timing probe for acceptance-suite sizing. Not part of the build
// contract; run with `cargo run -p privcc --example perf_probe --release`.

use std::time::Instant;

use privcc::gen::gen_gnp;
use privcc::polytope::eval_lipschitz_extension;
use privcc::{RngStream, DEFAULT_TOL};

fn main() {
    let mut rng = RngStream::from_seed(7);
    for n in [50usize, 100, 200, 400, 800] {
        let g = gen_gnp(n, 2.0 / n as f64, &mut rng).unwrap();
        println!("gnp n={n}: m = {}, maxdeg = {}", g.m(), g.max_degree());
        for delta in [2.0, 4.0] {
            if delta >= g.max_degree() as f64 {
                continue;
            }
            let t = Instant::now();
            let cert = eval_lipschitz_extension(&g, delta, DEFAULT_TOL).unwrap();
            println!(
                "  delta {delta}: value {:.2}, iters {}, rows {}, {:?}",
                cert.value,
                cert.iterations,
                cert.rows_added,
                t.elapsed()
            );
        }
    }
}
