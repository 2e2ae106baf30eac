use proptest::prelude::*;
use sighedge_core::io::{read_path_csv, write_path_csv};
use sighedge_core::paths::min_symmetric_eigenvalue;
use sighedge_core::{
    fit, gamma_table, lead_lag_level2, realized_quadratic_variation, strat_kernel_grid, SampledPath,
    TimeGrid,
};

/// Paths on a uniform grid with values `1 + k/1024`, `|k| ≤ 256`.
fn dyadic_path(max_steps: usize, dim: usize) -> impl Strategy<Value = SampledPath> {
    (2..=max_steps).prop_flat_map(move |steps| {
        prop::collection::vec(-256i32..=256, (steps + 1) * dim).prop_map(move |ks| {
            let grid = TimeGrid::uniform(0.0, 0.25, steps).unwrap();
            let values = ks.iter().map(|k| 1.0 + *k as f64 / 1024.0).collect();
            SampledPath::from_flat(grid, values, dim).unwrap()
        })
    })
}

fn float_path(max_steps: usize) -> impl Strategy<Value = SampledPath> {
    (2..=max_steps).prop_flat_map(|steps| {
        prop::collection::vec(0.5f64..1.5, steps + 1).prop_map(move |v| {
            let grid = TimeGrid::uniform(0.0, 0.1, steps).unwrap();
            SampledPath::from_flat(grid, v, 1).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_transpose_is_exact(x in dyadic_path(8, 2), y in dyadic_path(8, 2), r in 1usize..4) {
        let a = strat_kernel_grid(&x, &y, r).unwrap();
        let b = strat_kernel_grid(&y, &x, r).unwrap();
        for i in 0..a.rows() {
            prop_assert_eq!(a.get(i, 0), 1.0);
            for j in 0..a.cols() {
                prop_assert_eq!(a.get(0, j), 1.0);
                prop_assert_eq!(a.get(i, j).to_bits(), b.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn increments_telescope(p in dyadic_path(12, 2)) {
        let inc = p.increments();
        let mut acc = p.row(0).to_vec();
        for (i, row) in inc.rows().enumerate() {
            for (a, d) in acc.iter_mut().zip(row) {
                *a += d;
            }
            prop_assert_eq!(&acc[..], p.row(i + 1));
        }
    }

    #[test]
    fn time_augmentation_prepends_grid(p in float_path(10)) {
        let aug = p.time_augment();
        prop_assert_eq!(aug.dim(), 2);
        prop_assert_eq!(aug.coordinate(0), p.times().to_vec());
        prop_assert_eq!(aug.coordinate(1), p.coordinate(0));
    }

    #[test]
    fn quadratic_variation_increments_are_psd(p in dyadic_path(10, 3)) {
        let qv = realized_quadratic_variation(&p);
        prop_assert!(qv.block(0).iter().all(|v| *v == 0.0));
        for i in 0..p.steps() {
            prop_assert!(min_symmetric_eigenvalue(&qv.increment(i), 3) >= -1e-12);
        }
    }

    #[test]
    fn lead_lag_identities_are_exact(p in dyadic_path(10, 2)) {
        let ll = lead_lag_level2(&p);
        for i in 0..p.steps() {
            let q = ll.qv().increment(i);
            let ur = ll.upper_right(i);
            let lo = ll.lower_left(i);
            for k in 0..4 {
                prop_assert_eq!(ur[k] - lo[k], -q[k]);
                prop_assert_eq!((ur[k] + lo[k]) / 2.0, ll.area(i)[k]);
            }
            prop_assert_eq!(ll.upper_left(i), ll.area(i).to_vec());
            prop_assert_eq!(ll.lower_right(i), ll.area(i).to_vec());
        }
    }

    #[test]
    fn path_csv_round_trip(p in float_path(20)) {
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        prop_assert_eq!(read_path_csv(buf.as_slice()).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gamma_is_causal(
        train in prop::collection::vec(float_path(6).prop_filter("six steps", |p| p.steps() == 6), 1..4),
        query in float_path(6).prop_filter("six steps", |p| p.steps() == 6),
        s in 0usize..6,
        noise in prop::collection::vec(0.5f64..1.5, 7),
    ) {
        let base = gamma_table(&query, &train, 2).unwrap();
        let mut values = query.values().to_vec();
        for (k, v) in values.iter_mut().enumerate().skip(s + 1) {
            *v = noise[k];
        }
        let altered = query.with_values(values).unwrap();
        let other = gamma_table(&altered, &train, 2).unwrap();
        for i in 0..=s {
            prop_assert_eq!(base.slice(i).unwrap(), other.slice(i).unwrap());
        }

        let pays: Vec<f64> = train.iter().map(|p| (p.value(6, 0) - 1.0).max(0.0)).collect();
        let m = fit(train.clone(), &pays, 0.01, 1e-3, 2).unwrap();
        let a = m.positions(&query).unwrap();
        let b = m.positions(&altered).unwrap();
        for i in 0..=s {
            prop_assert_eq!(a.position(i), b.position(i));
        }
    }
}
