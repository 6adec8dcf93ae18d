//! The two bundled example groups used by the experiment suite: strongly
//! expanding two-generator Schottky groups with well-separated disks, one
//! fuchsian and one kleinian with rotating pairings.

use crate::mobius::{pair_disks, Disk, C};
use crate::schottky::{GroupFamily, SchottkyGroup};

/// Fuchsian two-generator group on the real line: disks of radius 0.03 at
/// -0.15, 0.45, -0.45, 0.15 (letter order), paired at radius 0.024.
pub fn fuchsian() -> SchottkyGroup {
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

/// Kleinian two-generator group with disks on a cross and twisted pairings,
/// so the holonomy angles are nontrivial and incommensurate.
pub fn kleinian() -> SchottkyGroup {
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

pub fn by_name(name: &str) -> Option<SchottkyGroup> {
    match name {
        "fuchsian" => Some(fuchsian()),
        "kleinian" => Some(kleinian()),
        _ => None,
    }
}
