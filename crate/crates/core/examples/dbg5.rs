use frameflow_core::bundled;
use frameflow_core::rng::SplitMix64;
use frameflow_core::thermo::*;
use frameflow_core::twist::*;

fn main() {
    let sys = SymbolicSystem::new(bundled::fuchsian(), 8).unwrap();
    let tower = sys.coarse_tower();
    let mut rng = SplitMix64::new(7);
    let raw = random_log_field(&tower, &mut rng);
    let raw_h: Vec<f64> = raw.iter().map(|x| x.exp()).collect();
    let lip = log_lipschitz(&raw_h, &tower).unwrap();
    let spread = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - raw.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("raw field: lip {lip:.4e} spread {spread:.4e}");
    let h = sample_cone_function(&tower, 4.0, &mut rng).unwrap();
    let ls: Vec<f64> = h.values.iter().map(|v| v.ln()).collect();
    let sp = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ls.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("cone sample B=4: log spread {sp:.4e} lip {:.4e}", log_lipschitz(&h.values, &tower).unwrap());
}
