use frameflow_core::lie::*;
fn main() {
    for fam in [Family::SoN1(2), Family::SoN1(3), Family::SuN1(2), Family::SpN1(2), Family::Sl3] {
        match LieAlgebraModel::new(fam) {
            Ok(m) => {
                let d = m.decomposition();
                println!("{}: dim {} | a {} m {} roots {:?}", fam.name(), m.dim, d.dim_a(), d.dim_m(),
                    d.roots.iter().map(|(l, b)| (l.0, b.len())).collect::<Vec<_>>());
                for b in m.basis() {
                    let r = m.defining_residual(b);
                    if r > 1e-12 { println!("  defres {}", r); }
                }
            }
            Err(e) => println!("{}: ERROR {}", fam.name(), e),
        }
    }
}
