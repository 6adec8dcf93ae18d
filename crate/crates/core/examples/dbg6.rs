use frameflow_core::lie::*;
fn main() {
    for fam in [Family::SoN1(2), Family::SoN1(3), Family::SoN1(4), Family::SuN1(2), Family::SuN1(3), Family::SpN1(2), Family::Sl3] {
        let model = LieAlgebraModel::new(fam).unwrap();
        for t in [0.7, -1.3] {
            match model.ad_exp_grading(t) {
                Ok(rep) => {
                    let worst = rep.factors.iter().map(|f| f.2).fold(0.0f64, f64::max);
                    println!("{} t={t}: ok, worst rel err {worst:.2e}", fam.name());
                }
                Err(e) => println!("{} t={t}: {e}", fam.name()),
            }
        }
    }
}
