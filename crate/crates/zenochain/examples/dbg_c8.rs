//! Scratch: high-statistics size gaps at Gamma=0.1, eta=1, lambda in {1, 5}.

use zenochain::ensemble::{steady_state_run, InitialState, SamplingProtocol, Unraveling};
use zenochain::observables::Observable;
use zenochain::params::ModelParams;

fn main() {
    let gamma = 0.1f64;
    let n_traj = 400usize;
    let protocol = SamplingProtocol {
        t_burn: 12.0,
        t_window: 18.0,
        sample_interval: 1.0,
        n_traj,
        mode: Default::default(),
    };
    for (lambda, dt) in [(1.0f64, 2.5e-3f64), (5.0, 5e-4)] {
        let mut rows = Vec::new();
        for sites in [4usize, 6, 8] {
            let params =
                ModelParams::new(sites, gamma, lambda, 1.0).unwrap().with_dt(dt).unwrap();
            let run = steady_state_run(
                &params,
                &Unraveling::Qsd,
                &protocol,
                0xF8_00 + sites as u64,
                &InitialState::Neel,
                &[Observable::NegHalf, Observable::ParityHalf],
            )
            .unwrap();
            println!(
                "lam={lambda} L={sites}: neg {:.4}+-{:.4}  par {:.4}+-{:.4}",
                run.stats[0].mean, run.stats[0].stderr, run.stats[1].mean, run.stats[1].stderr
            );
            rows.push((run.stats[0].clone(), run.stats[1].clone()));
        }
        for (i, j, tag) in [(0usize, 2usize, "4v8"), (1, 2, "6v8"), (0, 1, "4v6")] {
            let dn = (rows[j].0.mean - rows[i].0.mean)
                / (rows[j].0.stderr.powi(2) + rows[i].0.stderr.powi(2)).sqrt();
            let dp = (rows[j].1.mean - rows[i].1.mean)
                / (rows[j].1.stderr.powi(2) + rows[i].1.stderr.powi(2)).sqrt();
            println!("lam={lambda} {tag}: D_neg={dn:+.2} D_par={dp:+.2}");
        }
    }
}
