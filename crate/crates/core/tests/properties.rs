use std::f64::consts::PI;

use cgolab::dirac::{to_diagonal, undiagonalize, SigmaSection};
use cgolab::experiments::{ExperimentConfig, Table};
use cgolab::fit::{loglog_fit, spearman};
use cgolab::forward::DtnMatrix;
use cgolab::geometry::{Domain, Loop, PolarGrid, ScalarField};
use cgolab::holonomy::{nearest_period, winding_of};
use cgolab::metrics::{cauchy_distance, holo_project, holomorphic_defect, surrogate_distance};
use cgolab::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dtn_from(n_max: usize, vals: &[(f64, f64)]) -> DtnMatrix {
    let mut d = DtnMatrix::zeros(1, n_max);
    let dim = d.dim();
    for i in 0..dim {
        for j in 0..dim {
            let (re, im) = vals[(i * dim + j) % vals.len()];
            *d.at_mut(i, j) = c(re, im) * if i == j { 1.0 } else { 0.2 };
        }
    }
    d
}

fn pairs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dtn_csv_round_trip_is_exact(n_max in 1usize..5, vals in pairs(20)) {
        let d = dtn_from(n_max, &vals);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = DtnMatrix::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.n_max, n_max);
        for i in 0..d.dim() {
            for j in 0..d.dim() {
                prop_assert_eq!(back.at(i, j), d.at(i, j));
            }
        }
    }

    #[test]
    fn distances_are_symmetric_and_ordered(a in pairs(16), b in pairs(16)) {
        let (da, db) = (dtn_from(3, &a), dtn_from(3, &b));
        let ab = cauchy_distance(&da, &db).unwrap();
        let ba = cauchy_distance(&db, &da).unwrap();
        prop_assert!((ab.surrogate - ba.surrogate).abs() <= 1e-12 * ab.surrogate.max(1.0));
        prop_assert!(ab.sup_inf <= ab.surrogate * (1.0 + 1e-9) + 1e-14);
        prop_assert!(surrogate_distance(&da, &da).unwrap() == 0.0);
    }

    #[test]
    fn surrogate_satisfies_triangle_inequality(a in pairs(9), b in pairs(9), e in pairs(9)) {
        let (x, y, z) = (dtn_from(2, &a), dtn_from(2, &b), dtn_from(2, &e));
        let xy = surrogate_distance(&x, &y).unwrap();
        let yz = surrogate_distance(&y, &z).unwrap();
        let xz = surrogate_distance(&x, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-10);
    }

    #[test]
    fn nearest_period_defect_is_at_most_pi(v in -100.0..100.0f64) {
        let (k, d) = nearest_period(v);
        prop_assert!(d <= PI + 1e-12);
        prop_assert!(((v - 2.0 * PI * k as f64).abs() - d).abs() < 1e-12);
    }

    #[test]
    fn holomorphic_projection_has_no_defect(vals in pairs(32), r in 0.0..2.0f64) {
        let v: Vec<Complex64> = vals.iter().map(|(a, b)| c(*a, *b)).collect();
        let p = holo_project(&v);
        prop_assert!(holomorphic_defect(&p, r) <= 1e-10 * (1.0 + holomorphic_defect(&v, r)));
        let pp = holo_project(&p);
        for (x, y) in p.iter().zip(&pp) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn winding_counts_zeros_inside(k in -3i32..=3, r in 0.3..1.5f64, a in -0.5..0.5f64, b in -0.5..0.5f64) {
        let gamma = Loop::circle(c(0.0, 0.0), r, 96);
        let w = winding_of(|z| z.powi(k) * (z * c(a, b) + z.conj() * b).exp(), &gamma).unwrap();
        prop_assert_eq!(w.nearest, k as i64);
        prop_assert!(w.distance < 1e-9);
    }

    #[test]
    fn diagonal_transform_round_trips(a in -1.0..1.0f64, b in -1.0..1.0f64, s in -0.8..0.8f64) {
        let g = PolarGrid::new(Domain::disk(1.0), 12, 16).unwrap();
        let f = ScalarField::from_fn(&g, |z| (z * c(0.0, a) + z.conj() * b + s).exp());
        let u = SigmaSection::from_parts(
            ScalarField::from_fn(&g, |z| z * z + a),
            ScalarField::from_fn(&g, |z| z.conj() * b + 1.0),
        ).unwrap();
        let back = undiagonalize(&to_diagonal(&u, &f).unwrap(), &f).unwrap();
        prop_assert!((&back.u - &u.u).max_abs() < 1e-12);
        prop_assert!((&back.w() - &u.w()).max_abs() < 1e-12);
    }

    #[test]
    fn loglog_fit_recovers_power_laws(p in -3.0..3.0f64, k in 0.1..10.0f64) {
        let xs: Vec<f64> = (0..6).map(|i| 0.2 / 2f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| k * x.powf(p)).collect();
        let fit = loglog_fit(&xs, &ys);
        prop_assert!((fit.slope - p).abs() < 1e-10);
    }

    #[test]
    fn spearman_ignores_monotone_maps(xs in prop::collection::btree_set(0u32..1000, 3..12)) {
        let x: Vec<f64> = xs.iter().map(|v| *v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.01).exp()).collect();
        prop_assert!((spearman(&x, &y) - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert!((spearman(&x, &rev) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_round_trips_and_rejects_bad_sweeps(
        seed in 0u64..1000,
        hs in prop::collection::btree_set(1u32..500, 1..6),
        bad in -1.0..0.0f64,
    ) {
        let mut cfg = ExperimentConfig { seed, ..Default::default() };
        cfg.sweep.h = hs.iter().rev().map(|v| *v as f64 / 1000.0).collect();
        let text = cfg.to_toml();
        prop_assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg.clone());
        cfg.sweep.t.push(bad);
        prop_assert!(ExperimentConfig::from_toml(&cfg.to_toml()).is_err());
    }

    #[test]
    fn csv_cells_parse_back_to_twelve_digits(v in prop::collection::vec(-1e6..1e6f64, 1..8)) {
        let names: Vec<String> = (0..v.len()).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut t = Table::new("t", &refs);
        t.push(v.clone());
        let csv = t.to_csv();
        prop_assert_eq!(&csv, &t.to_csv());
        let row = csv.lines().nth(1).unwrap();
        for (cell, x) in row.split(',').zip(&v) {
            let y: f64 = cell.parse().unwrap();
            prop_assert!((y - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }
    }
}
