use frameflow_core::mobius::{pair_disks, Disk, C};
use frameflow_core::schottky::{GroupFamily, SchottkyGroup};
use frameflow_core::suspension::*;
use frameflow_core::thermo::*;

fn fuchsian() -> SchottkyGroup {
    let r = 0.03;
    let rp = 0.8 * r;
    let d = [
        Disk::new(C::new(-0.15, 0.0), r),
        Disk::new(C::new(0.45, 0.0), r),
        Disk::new(C::new(-0.45, 0.0), r),
        Disk::new(C::new(0.15, 0.0), r),
    ];
    let g1 = pair_disks(d[2].c(), rp, d[0].c(), rp, C::new(-1.0, 0.0)).unwrap();
    let g2 = pair_disks(d[3].c(), rp, d[1].c(), rp, C::new(-1.0, 0.0)).unwrap();
    SchottkyGroup::new(GroupFamily::Fuchsian, vec![g1, g2], d.to_vec()).unwrap()
}

fn main() {
    let depth = 8;
    let sys = SymbolicSystem::new(fuchsian(), depth).unwrap();
    let delta = critical_exponent(&sys, 1e-9).unwrap().delta;
    let sol = rpf_solve(&sys, &sys.roof_potential(delta)).unwrap();
    let nuu = nu_u(&sol);
    // genuine window: (depth - obs_depth) crossings, tau_min ~ 5.0
    let m = SuspensionModel::new(&sys, nuu, 2, depth + 2).unwrap();
    let mut base = vec![0.0; m.obs_partition.len()];
    for (i, w) in m.obs_partition.words.iter().enumerate() {
        base[i] = if w[0] == 0 { 1.0 } else { -0.3 } + 0.2 * w[1] as f64;
    }
    let t_grid: Vec<f64> = (0..60).map(|i| 0.5 * i as f64).collect(); // t <= 29.5
    let mut best = (0.0f64, 0.0, 0.0);
    for wp10 in [-12i32, -10, -8, -6, 6, 8, 10, 12, 0] {
        for wq10 in [-10i32, -5, 0, 5, 10] {
            let wp = wp10 as f64 / 10.0;
            let wq = wq10 as f64 / 10.0;
            let phi = Observable { base: base.clone(), omega: wp, fiber: 0 };
            let psi = Observable { base: base.clone(), omega: wq, fiber: 0 };
            let curve = m.decay_curve(&phi, &psi, &t_grid).unwrap();
            let fit = fit_exponential(&curve, 1e-12);
            if fit.r_squared > best.0 { best = (fit.r_squared, wp, wq); }
            if fit.r_squared > 0.85 {
                println!("omega ({wp:5.2}, {wq:5.2}): eta {:.4} r2 {:.4} corr0 {:.2e} end {:.2e}", fit.eta, fit.r_squared, curve.abs_corr[0], curve.abs_corr[59]);
            }
        }
    }
    println!("best r2 {:.4} at ({}, {})", best.0, best.1, best.2);
}
