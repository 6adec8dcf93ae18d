use frameflow_core::mobius::{pair_disks, Disk, C};
use frameflow_core::schottky::{GroupFamily, SchottkyGroup};
use frameflow_core::thermo::*;
use frameflow_core::twist::*;
use frameflow_core::rng::SplitMix64;

fn kleinian() -> SchottkyGroup {
    let r = 0.025;
    let rp = 0.8 * r;
    let d = [
        Disk::new(C::new(0.15, 0.0), r),
        Disk::new(C::new(0.0, 0.15), r),
        Disk::new(C::new(-0.15, 0.0), r),
        Disk::new(C::new(0.0, -0.15), r),
    ];
    let rot1 = C::new(0.8f64.cos(), 0.8f64.sin());
    let rot2 = C::new((-1.3f64).cos(), (-1.3f64).sin());
    let g1 = pair_disks(d[2].c(), rp, d[0].c(), rp, rot1).unwrap();
    let g2 = pair_disks(d[3].c(), rp, d[1].c(), rp, rot2).unwrap();
    SchottkyGroup::new(GroupFamily::Kleinian, vec![g1, g2], d.to_vec()).unwrap()
}

fn main() {
    let sys = SymbolicSystem::new(kleinian(), 4).unwrap();
    let delta = critical_exponent(&sys, 1e-9).unwrap().delta;
    let sol0 = rpf_solve(&sys, &sys.roof_potential(delta)).unwrap();
    let f0 = normalize_potential(&sys, delta, 0.0, &sol0, &sol0).unwrap();
    let op = TwistedOperator::new(&sys, f0.clone(), TwistRep::trivial()).unwrap();
    let tower = sys.coarse_tower();
    let hyp = sys.group.hyperbolicity(4).unwrap();
    println!("hyp c0 {} k1 {} k2 {}", hyp.c0, hyp.kappa1, hyp.kappa2);
    // per-level quotients of L^k(h) for one B=40 sample
    let mut rng = SplitMix64::new(55);
    for trial in 0..3 {
        let h = sample_cone_function(&tower, 40.0, &mut rng).unwrap();
        println!("trial {trial}: input lip {}", log_lipschitz(&h.values, &tower).unwrap());
        let mut cur = h;
        for k in 1..=3 {
            cur = op.untwisted_apply(&cur).unwrap();
            // quotient per level
            for depth in 2..=tower.n_levels() {
                let part = tower.level(depth);
                let mut worst = 0.0f64;
                for group in part.sibling_groups() {
                    for (ai, &i) in group.iter().enumerate() {
                        for &j in group.iter().skip(ai + 1) {
                            let pi = part.repr[i as usize];
                            let pj = part.repr[j as usize];
                            let dist = (pi - pj).norm();
                            if dist <= 1e3 * f64::EPSILON * (pi.norm() + pj.norm()).max(1e-3) { continue; }
                            let a = cur.values[tower.descendant(depth, i as usize)].ln();
                            let b = cur.values[tower.descendant(depth, j as usize)].ln();
                            worst = worst.max((a - b).abs() / dist);
                        }
                    }
                }
                print!("  k{k} lvl{depth}: {worst:.3} ");
            }
            println!();
        }
    }
}
