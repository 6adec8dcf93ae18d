use frameflow_core::lie::*;
fn main() {
    let model = LieAlgebraModel::new(Family::SpN1(2)).unwrap();
    let dec = model.decomposition();
    println!("dim a {} dim m {}", dec.a.len(), dec.m.len());
    let h0 = model.h0().clone();
    for (i, a) in dec.a.iter().enumerate() {
        let br = (&h0 * a - a * &h0).norm();
        let overlap = a.iter().zip(h0.iter()).map(|(x, y)| x * y).sum::<f64>() / h0.norm() / a.norm();
        println!("a[{i}]: norm {:.3}, [H0, a] norm {br:.3e}, cos(angle to H0) {overlap:.6}", a.norm());
        let th = model.theta(a);
        println!("   theta(a) + a norm (should be 2a if theta=-1): {:.3e}", (&th + a).norm());
    }
    for (i, m) in dec.m.iter().enumerate() {
        let br = (&h0 * m - m * &h0).norm();
        if br > 1e-10 { println!("m[{i}]: [H0, m] norm {br:.3e}"); }
    }
    let t = 0.7;
    let g = model.exp_th0(t);
    let gi = model.exp_th0(-t);
    println!("g * g(-t) - I: {:.3e}", (&g * &gi - nalgebra::DMatrix::<f64>::identity(12, 12)).norm());
    println!("g H0 g^-1 - H0: {:.3e}", (&g * &h0 * &gi - &h0).norm());
    // is exp correct? compare against series
    let mut series = nalgebra::DMatrix::<f64>::identity(12, 12);
    let mut term = nalgebra::DMatrix::<f64>::identity(12, 12);
    for k in 1..30 {
        term = &term * &h0 * (t / k as f64);
        series += &term;
    }
    println!("exp vs series: {:.3e}", (&g - &series).norm());
    println!("H0 symmetric? {:.3e}", (&h0 - &h0.transpose()).norm());
    let eig = nalgebra::SymmetricEigen::new(h0.clone());
    println!("eigenvalues: {:?}", eig.eigenvalues.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>());
    let recon = &eig.eigenvectors * nalgebra::DMatrix::from_diagonal(&eig.eigenvalues) * eig.eigenvectors.transpose();
    println!("reconstruction: {:.3e}", (&recon - &h0).norm());
    println!("Q^T Q - I: {:.3e}", (eig.eigenvectors.transpose() * &eig.eigenvectors - nalgebra::DMatrix::<f64>::identity(12, 12)).norm());
}
