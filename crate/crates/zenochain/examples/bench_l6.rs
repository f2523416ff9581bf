use std::time::Instant;
use zenochain::ensemble::{steady_state_run, InitialState, SamplingProtocol, Unraveling, AveragingMode};
use zenochain::observables::Observable;
use zenochain::params::ModelParams;

fn main() {
    for (sites, lambda, n_traj) in [(6usize, 4.0f64, 2usize), (4, 4.0, 4), (8, 5.0, 2)] {
        let eta = if sites == 8 { 1.0 } else { 0.8 };
        let dt = if eta < 1.0 { (0.005f64 / lambda).min(0.05) } else { f64::min(0.05, 0.05 / lambda) };
        let params = ModelParams::new(sites, 0.15, lambda, eta).unwrap().with_dt(dt).unwrap();
        let protocol = SamplingProtocol { t_burn: 3.0, t_window: 3.0, sample_interval: 1.0, n_traj, mode: AveragingMode::TimeAndTrajectory };
        let obs = [Observable::NegHalf, Observable::ParityHalf];
        let start = Instant::now();
        let run = steady_state_run(&params, &Unraveling::Qsd, &protocol, 7, &InitialState::Neel, &obs).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let steps = (6.0 / dt) as usize * n_traj;
        println!("L={sites} eta={eta} lambda={lambda} dt={dt:.2e}: {steps} steps in {elapsed:.2}s -> {:.2} us/step (mean {:.4})", elapsed * 1e6 / steps as f64, run.stats[0].mean);
    }
}
