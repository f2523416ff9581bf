//! Scratch reproduction of a split-detector trace collapse.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use zenochain::dynamics::{sample_increments, split_detector_step, ChainKernel};
use zenochain::ensemble::derive_seed;
use zenochain::params::ModelParams;
use zenochain::state::DensityMatrix;

fn main() {
    let dt = 0.005;
    let split_params = ModelParams::new(2, 0.5, 0.5, 1.0).unwrap().with_dt(dt).unwrap();
    let lambda2 = 0.5;
    let burn_steps = (15.0_f64 / dt).round() as usize;
    let mut kernel = ChainKernel::new(&split_params).unwrap();
    for i in 0..500u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(0xC5_02, i));
        let mut rho = DensityMatrix::neel(2);
        let mut prev = rho.clone();
        for step in 0..burn_steps {
            let inc = sample_increments(&split_params, &mut rng);
            prev.matrix.copy_from(&rho.matrix);
            if let Err(e) = split_detector_step(&mut rho, &split_params, lambda2, &inc, &mut kernel)
            {
                println!("traj {i} failed at step {step}: {e}");
                println!("increments: xi={:?} w={:?}", inc.xi, inc.w);
                let diag: Vec<f64> = (0..4).map(|a| prev.matrix[(a, a)].re).collect();
                println!("entering diagonal: {diag:?}");
                let m: Vec<f64> = (0..4)
                    .map(|a| prev.matrix.column(a).iter().map(|c| c.norm()).fold(0.0, f64::max))
                    .collect();
                println!("entering max |col|: {m:?}");
                return;
            }
        }
    }
    println!("no failure in 500 burns");
}
