use frameflow_core::bundled;
use frameflow_core::dolgopyat::*;
use frameflow_core::twist::{RhoSpec, TwistRep};
use std::time::Instant;

fn main() {
    for (name, group) in [("fuchsian", bundled::fuchsian()), ("kleinian", bundled::kleinian())] {
        let t0 = Instant::now();
        let cells: Vec<TwistRep> = if name == "fuchsian" {
            vec![TwistRep::new(2.0, RhoSpec::Trivial), TwistRep::new(5.0, RhoSpec::Trivial)]
        } else {
            vec![
                TwistRep::new(2.0, RhoSpec::Trivial),
                TwistRep::new(5.0, RhoSpec::Trivial),
                TwistRep::new(0.0, RhoSpec::Character(1)),
                TwistRep::new(2.0, RhoSpec::Character(1)),
            ]
        };
        let inputs = measure_inputs(&group, &cells, 2024).unwrap();
        println!("{name} inputs: A0 {:.3} c0 {:.3} k1 {:.1} k2 {:.1} T0 {:.2} e2lnic {:.3e} e3ncp {:.3e}",
            inputs.a0, inputs.c0, inputs.kappa1, inputs.kappa2, inputs.t0, inputs.eps2_lnic, inputs.eps3_ncp);
        match solve_constants(inputs, OpaqueConstants { delta_hat: delta_hat_default(&group).unwrap(), ..Default::default() }) {
            Ok(cfg) => println!("  paper chain: eps1 {:.3e} eps2 {:.3e} m2 {} log_mu {:.1}", cfg.eps1, cfg.eps2, cfg.m2, cfg.mu_log),
            Err(e) => println!("  paper chain infeasible: {e}"),
        }
        let rho_max = cells.iter().map(|c| c.rho_b_norm()).fold(0.0f64, f64::max);
        match DolgopyatLab::build(group, inputs, rho_max) {
            Ok(lab) => {
                println!("  lab: depth {} image_depth {} m2 {} eps1 {:.3e} eps2 {:.3e} log_mu {:.1} sections {:?} [{:.1?}]",
                    lab.system.depth(), lab.image_depth, lab.cfg.m2, lab.cfg.eps1, lab.cfg.eps2, lab.cfg.mu_log,
                    lab.sections.len(), t0.elapsed());
                for cell in cells {
                    let t1 = Instant::now();
                    match lab.check_cell(cell.clone(), 12, 99) {
                        Ok(rep) => println!("  cell b={} rho={:?}: balls {} cone {:.3}/{:.3} {} eta {:.4} {} beta [{:.6},{:.6}] {} c1 {:.2e}/{:.2e} comp {}/{} trap [{:.3},{:.3}] {} dom {} margin {:.2e} [{:.1?}]",
                            rep.rep.b, rep.rep.rho, rep.cover_balls, rep.cone_measured, rep.cone_bound, rep.cone_pass,
                            rep.eta, rep.eta_pass, rep.beta_min, rep.beta_max, rep.beta_bounds_pass,
                            rep.beta_c1, rep.beta_c1_bound, rep.component_max, rep.component_bound,
                            rep.trapping_lo, rep.trapping_hi, rep.trapping_pass,
                            rep.domination_pass, rep.domination_margin, t1.elapsed()),
                        Err(e) => println!("  cell error: {e}"),
                    }
                }
            }
            Err(e) => println!("  lab build error: {e}"),
        }
    }
}
