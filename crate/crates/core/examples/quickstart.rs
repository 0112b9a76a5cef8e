use swarmdyn::equilibrium::continuous_control_equilibria;
use swarmdyn::model::TwoSegmentSystem;
use swarmdyn::ode::integrate;
use swarmdyn::{ControlPolicy, IntegratorConfig, SwarmParams};

fn main() -> swarmdyn::Result<()> {
    let p = SwarmParams::new(1.0, 2.0, 3.0, 48.4, 40.0, 44.0)?;
    let set = continuous_control_equilibria(&p)?;
    println!("{} off-diagonal points", set.off_diagonal.len());
    let sys = TwoSegmentSystem::new(p, ControlPolicy::ContinuousRarest);
    let traj = integrate(&sys, &[1.0, 0.2, 1.0, 0.5], &IntegratorConfig::rk45(20.0))?;
    println!("{:?}", traj.final_state());
    Ok(())
}
