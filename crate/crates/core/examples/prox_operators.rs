//! The three proximal building blocks on a small vector.
//!
//! `cargo run --example prox_operators`

use netlasso::proxops::{
    constrained_prox, kkt_residual_l1ball, l1_ball_threshold, l1_norm, project_l1_ball, soft_threshold,
};

fn main() -> netlasso::Result<()> {
    let psi = [2.5, -0.4, 1.1, 0.05, -3.0];
    let t = 0.3;
    let r = 2.0;

    let st = soft_threshold(&psi, t)?;
    println!("psi                    {psi:?}");
    println!("soft_threshold(t={t})  {st:?}  (l1 {:.3})", l1_norm(&st));

    let pr = project_l1_ball(&psi, r)?;
    println!("project onto R={r}      {pr:?}  (l1 {:.3}, threshold {:.4})", l1_norm(&pr), l1_ball_threshold(&psi, r));
    println!("KKT residual           {:e}", kkt_residual_l1ball(&psi, &pr, r));

    // Inactive constraint: prox equals soft-thresholding.
    let loose = constrained_prox(&psi, t, 100.0)?;
    assert_eq!(loose, st);
    // Active constraint: prox equals the projection of psi.
    let tight = constrained_prox(&psi, t, r)?;
    assert_eq!(tight, pr);
    println!("constrained_prox(t={t}, R={r}) {tight:?}");
    Ok(())
}
