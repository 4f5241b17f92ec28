//! Episode-log to CSV conversion for external plotting: attitude, position
//! error, commands, failure trace, and reward histories.

use std::fmt::Write as FmtWrite;
use std::path::Path;

use faultwing::env::log::EpisodeLog;
use faultwing::error::Result;

pub fn write_all(episode: &EpisodeLog, out: &Path) -> Result<()> {
    let mut attitude = String::from("step,t,phi,theta,psi,phi_ref,theta_ref,psi_ref\n");
    let mut position =
        String::from("step,t,x_err,y_err,z_err,error_norm\n");
    let mut commands = String::from(
        "step,t,cmd_elevator,cmd_aileron,cmd_rudder,cmd_throttle,\
         ref_elevator,ref_aileron,ref_rudder,ref_throttle,\
         act_elevator,act_aileron_left,act_aileron_right,act_rudder,act_throttle\n",
    );
    let mut lambda =
        String::from("step,t,ar_fail,ar_val,al_fail,al_val,r_fail,r_val\n");
    let mut rewards =
        String::from("step,t,tracking,banded,barrier,rate_penalty,total,termination\n");

    for r in &episode.records {
        let e = r.state.p - r.reference.position;
        writeln!(
            attitude,
            "{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            r.state.theta.x,
            r.state.theta.y,
            r.state.theta.z,
            r.reference.attitude.x,
            r.reference.attitude.y,
            r.reference.attitude.z
        )
        .unwrap();
        writeln!(
            position,
            "{},{},{},{},{},{}",
            r.step,
            r.t,
            e.x,
            e.y,
            e.z,
            e.norm()
        )
        .unwrap();
        writeln!(
            commands,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            r.command.elevator,
            r.command.aileron,
            r.command.rudder,
            r.command.throttle,
            r.reference.commands.elevator,
            r.reference.commands.aileron,
            r.reference.commands.rudder,
            r.reference.commands.throttle,
            r.state.delta.elevator,
            r.state.delta.aileron_left,
            r.state.delta.aileron_right,
            r.state.delta.rudder,
            r.state.delta.throttle
        )
        .unwrap();
        writeln!(
            lambda,
            "{},{},{},{},{},{},{},{}",
            r.step, r.t, r.lambda[0], r.lambda[1], r.lambda[2], r.lambda[3], r.lambda[4], r.lambda[5]
        )
        .unwrap();
        writeln!(
            rewards,
            "{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            r.reward.tracking,
            r.reward.banded.map(|b| b.to_string()).unwrap_or_default(),
            r.reward.barrier,
            r.reward.rate_penalty,
            r.reward.total,
            r.termination.map(|c| c.to_string()).unwrap_or_default()
        )
        .unwrap();
    }

    std::fs::write(out.join("attitude.csv"), attitude)?;
    std::fs::write(out.join("position_error.csv"), position)?;
    std::fs::write(out.join("commands.csv"), commands)?;
    std::fs::write(out.join("lambda.csv"), lambda)?;
    std::fs::write(out.join("rewards.csv"), rewards)?;
    Ok(())
}
