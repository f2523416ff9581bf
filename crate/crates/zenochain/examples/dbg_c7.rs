//! Scratch: inefficient-detector curves vs Gamma at lambda=0.4.

use zenochain::ensemble::{steady_state_average, SamplingProtocol, Unraveling};
use zenochain::observables::Observable;
use zenochain::params::ModelParams;

fn main() {
    let gamma_grid = [0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.5, 4.0, 6.5];
    let protocol = SamplingProtocol {
        t_burn: 25.0,
        t_window: 50.0,
        sample_interval: 0.5,
        n_traj: 80,
        mode: Default::default(),
    };
    for eta in [0.2f64, 0.6] {
        let mut cs = Vec::new();
        let mut ps = Vec::new();
        for (i, &gamma) in gamma_grid.iter().enumerate() {
            let dt = (0.01_f64 / (gamma * gamma)).min(0.01);
            let params = ModelParams::new(2, gamma, 0.4, eta).unwrap().with_dt(dt).unwrap();
            let stats = steady_state_average(
                &params,
                &Unraveling::Qsd,
                &protocol,
                0xD7_40 + i as u64,
                &[Observable::Concurrence, Observable::ParityFirst],
            )
            .unwrap();
            cs.push(stats[0].clone());
            ps.push(stats[1].clone());
        }
        print!("eta={eta} C  :");
        for s in &cs {
            print!(" {:.3}({:.3})", s.mean, s.stderr);
        }
        println!();
        print!("eta={eta} P1 :");
        for s in &ps {
            print!(" {:.3}({:.3})", s.mean, s.stderr);
        }
        println!();
    }
}
