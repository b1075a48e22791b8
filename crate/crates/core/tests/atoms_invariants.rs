use std::collections::HashSet;

use deltasphere::atoms::{build_atoms, build_level_system, stopping_time, stopping_time_is_minimal, Regime};
use deltasphere::grid::{lp_norm, GridSpec};
use deltasphere::littlewood_paley::BumpFamily;
use deltasphere::random::InputClass;

#[test]
fn selection_and_assignment_are_exclusive() {
    let g = GridSpec::new(2, 64, 64.0).unwrap();
    let fam = BumpFamily::covering(&g);
    for trial in 0..3 {
        let f = InputClass::BandLimited.generate(&g, 9, trial);
        let sys = build_level_system(&f, &fam).unwrap();
        assert!(!sys.is_empty());
        for level in sys.levels() {
            for cubes in &level.selected {
                let unique: HashSet<_> = cubes.iter().collect();
                assert_eq!(unique.len(), cubes.len());
            }
            for r in level.selected.iter().flatten() {
                let owners = level.whitney.iter().filter(|w| w.contains(r)).count();
                assert!(owners <= 1);
            }
        }
        let atoms = build_atoms(&sys, &f, &fam).unwrap();
        assert_eq!(atoms.orphans, 0);
        for a in &atoms.atoms {
            let gamma: f64 = a.pieces.iter().map(|(_, p)| lp_norm(p, 2.0).unwrap().powi(2)).sum::<f64>().sqrt();
            assert!((gamma - a.gamma).abs() <= 1e-12 * a.gamma);
            for delta in [0.25, 0.01] {
                for lambda in [1e-3, 1.0, 1e3] {
                    for regime in [Regime::AnnulusThick, Regime::AnnulusThin] {
                        let st = stopping_time(a, lambda, delta, regime).unwrap();
                        assert!(stopping_time_is_minimal(a, lambda, delta, regime, st));
                        assert!(st.tau >= a.cube.level);
                    }
                }
            }
        }
    }
}
