use kpplab::diagnostics::{estimate_e_from_run_with, planarity_defect, sigma_k, CloudConfig};
use kpplab::fronts::{fit_front_position, shoot_profile};
use kpplab::geometry::edt::squared_edt;
use kpplab::solver::kppg;
use kpplab::{sphere, Field, Lattice, Reaction};
use nalgebra::{Matrix3, SymmetricEigen};
use proptest::prelude::*;

fn brute(lattice: &Lattice, features: &[bool]) -> Vec<f64> {
    (0..lattice.len())
        .map(|i| {
            let c = lattice.center(i);
            (0..lattice.len())
                .filter(|&j| features[j])
                .map(|j| sphere::dist(&c, &lattice.center(j)).powi(2))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// A curved front `u = 1 / (1 + exp(|x − center| − radius))`.
fn round_front(lattice: &Lattice, center: [f64; 2], radius: f64) -> Field {
    Field::from_fn(lattice.clone(), 5.0, |x| 1.0 / (1.0 + (sphere::dist(x, &center) - radius).exp()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edt_matches_brute_force(nx in 1usize..14, ny in 1usize..14, hx in 0.2f64..2.0, hy in 0.2f64..2.0, bits in prop::collection::vec(prop::bool::weighted(0.15), 196)) {
        let lattice = Lattice::new(vec![nx, ny], vec![hx, hy], vec![-1.0, 3.0]).unwrap();
        let features = &bits[..lattice.len()];
        let fast = squared_edt::<f64>(&lattice, features);
        for (a, b) in fast.iter().zip(brute(&lattice, features)) {
            prop_assert!(a == &b || (a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn sigma_k_matches_eigenvalues(entries in prop::array::uniform6(-5.0f64..5.0)) {
        let [a, b, c, d, e, f] = entries;
        let m = Matrix3::new(a, b, c, b, d, e, c, e, f);
        let l = SymmetricEigen::new(m).eigenvalues;
        let row: Vec<f64> = m.iter().copied().collect();
        let s2 = l[0] * l[1] + l[0] * l[2] + l[1] * l[2];
        let s3 = l[0] * l[1] * l[2];
        prop_assert!((sigma_k(&row, 3, 2) - s2).abs() <= 1e-9 * (1.0 + s2.abs()));
        prop_assert!((sigma_k(&row, 3, 3) - s3).abs() <= 1e-9 * (1.0 + s3.abs()));
    }

    #[test]
    fn planarity_is_invariant_under_affine_rescaling(radius in 2.0f64..12.0, scale in 0.1f64..3.0, offset in -2.0f64..2.0, angle in 0.0f64..6.28) {
        let lattice = Lattice::from_bounds(&[-16.0, -16.0], &[16.0, 16.0], 0.25).unwrap();
        let u = round_front(&lattice, [0.0, 0.0], radius);
        let v = Field::from_fn(lattice.clone(), 5.0, |x| scale * u.sample(x).unwrap() + offset);
        let p = [radius * angle.cos(), radius * angle.sin()];
        let a = planarity_defect(&u, &p, 3.0).unwrap();
        let b = planarity_defect(&v, &p, 3.0).unwrap();
        prop_assert!((a.defect - b.defect).abs() <= 1e-9, "{} vs {}", a.defect, b.defect);
    }

    #[test]
    fn planarity_commutes_with_quarter_turns(cx in -3.0f64..3.0, cy in -3.0f64..3.0, radius in 3.0f64..8.0, angle in 0.0f64..6.28) {
        let lattice = Lattice::from_bounds(&[-16.0, -16.0], &[16.0, 16.0], 0.25).unwrap();
        let u = round_front(&lattice, [cx, cy], radius);
        // Rotating the data by 90° rotates the front center to (−cy, cx).
        let r = round_front(&lattice, [-cy, cx], radius);
        let p = [cx + radius * angle.cos(), cy + radius * angle.sin()];
        let q = [-p[1], p[0]];
        let a = planarity_defect(&u, &p, 3.0).unwrap();
        let b = planarity_defect(&r, &q, 3.0).unwrap();
        prop_assert!((a.defect - b.defect).abs() <= 1e-9, "{} vs {}", a.defect, b.defect);
        prop_assert!(sphere::dist(&[-a.direction[1], a.direction[0]], &b.direction) <= 1e-6);
    }

    #[test]
    fn fit_recovers_synthetic_positions(a in 1.0f64..3.0, b in -3.0f64..3.0, d in -10.0f64..10.0) {
        let samples: Vec<(f64, f64)> = (0..40).map(|k| {
            let t = 5.0 + 2.5 * k as f64;
            (t, a * t + b * t.ln() + d)
        }).collect();
        let fit = fit_front_position(&samples, 2.0).unwrap();
        prop_assert!((fit.speed - a).abs() < 1e-8 && (fit.log_coef - b).abs() < 1e-6 && (fit.shift - d).abs() < 1e-5);
    }

    #[test]
    fn profiles_are_decreasing_fronts(c in 2.0f64..5.0) {
        let p = shoot_profile(&Reaction::logistic(), c, 0.005).unwrap();
        prop_assert!(p.is_strictly_decreasing());
        prop_assert_eq!(p.eval(0.0), 0.5);
        let r = p.residual();
        prop_assert!(r.ode <= 1e-6 && r.finite_difference <= 1e-5);
        // For c above the minimal speed the tail decays at the slower rate.
        if c > 2.05 {
            let measured = p.measured_decay_rate(1e-6, 1e-3).unwrap();
            prop_assert!((measured - p.decay_rate()).abs() <= 0.02 * p.decay_rate().abs(), "{} vs {}", measured, p.decay_rate());
        }
    }

    #[test]
    fn parametrized_reactions_are_subadditive(m in 1.0f64..4.0, r in 0.1f64..5.0) {
        prop_assert!(Reaction::logistic_power(m).unwrap().subadditivity_check(2000, 7));
        prop_assert!(Reaction::scaled_logistic(r).unwrap().subadditivity_check(2000, 7));
    }

    #[test]
    fn kppg_roundtrips_fields(nx in 1usize..20, ny in 1usize..20, t in 0.0f64..100.0, seed in any::<u64>()) {
        let lattice = Lattice::new(vec![nx, ny], vec![0.5, 0.25], vec![-3.0, 1.0]).unwrap();
        let values: Vec<f64> = (0..lattice.len()).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64 / 999.0).collect();
        let field = Field::new(lattice, t, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.kppg");
        kppg::save_field(&path, &field).unwrap();
        prop_assert_eq!(kppg::load_field(&path).unwrap(), field);
    }
}

#[test]
fn direction_cloud_mirrors_with_the_field() {
    let lattice = Lattice::from_bounds(&[-20.0, -20.0], &[20.0, 20.0], 0.25).unwrap();
    let snaps: Vec<Field> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&t| Field::from_fn(lattice.clone(), t, |x| 1.0 / (1.0 + (sphere::dist(x, &[4.0, 2.0]) - 4.0 * t).exp())))
        .collect();
    let mirrored: Vec<Field> = snaps.iter().map(|s| s.mirrored(0)).collect();
    // No thinning, so both runs evaluate mirror-image cell sets.
    let cfg = CloudConfig { max_probes: usize::MAX, ..CloudConfig::default() };
    let a = estimate_e_from_run_with(&snaps, &cfg).unwrap();
    let b = estimate_e_from_run_with(&mirrored, &cfg).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for probe in [[1.0, 0.0], [0.6, 0.8], [0.0, -1.0]] {
        let flipped = [-probe[0], probe[1]];
        assert!((a.max_angle_from(&probe) - b.max_angle_from(&flipped)).abs() < 1e-9);
    }
    let gap = a.coverage_gap_deg();
    assert!(gap < 20.0, "{gap}");
}
