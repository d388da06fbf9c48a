use proptest::prelude::*;
use radon_dsm::io::{read_grid, read_sinogram, write_csv, write_grid, write_pgm, write_sinogram};
use radon_dsm::{AngleSet, Directions, GridGeometry, ImageGrid, Sinogram, TAxis};

fn any_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -1e6f64..1e6,
        1 => Just(-0.0),
        1 => Just(f64::MIN_POSITIVE / 3.0),
        1 => Just(f64::MAX),
    ]
}

fn grid_strategy() -> impl Strategy<Value = ImageGrid> {
    (2usize..=3)
        .prop_flat_map(|dim| {
            (
                prop::collection::vec(1usize..6, dim),
                prop::collection::vec(-2.0f64..2.0, dim),
                prop::collection::vec(1e-3f64..1.0, dim),
            )
        })
        .prop_flat_map(|(shape, origin, spacing)| {
            let n = shape.iter().product::<usize>();
            (
                Just(GridGeometry::new(shape, origin, spacing).unwrap()),
                prop::collection::vec(any_value(), n),
            )
        })
        .prop_map(|(g, v)| ImageGrid::new(g, v).unwrap())
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_round_trip_is_bit_exact(grid in grid_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("g");
        write_grid(&grid, &stem).unwrap();
        let back = read_grid(&stem).unwrap();
        prop_assert_eq!(&back.geometry, &grid.geometry);
        prop_assert_eq!(bits(&back.values), bits(&grid.values));
    }

    #[test]
    fn planar_sinogram_round_trip(n in 1usize..20, nt in 3usize..40, t0 in -2.0f64..-0.5, dt in 1e-3f64..0.1, seed in any::<u64>()) {
        let angles = AngleSet::uniform_2d(n).unwrap();
        let axis = TAxis::new(t0, dt, nt).unwrap();
        let values: Vec<f64> = (0..n * nt).map(|i| ((i as u64 ^ seed) as f64).sin()).collect();
        let s = Sinogram::new(angles, axis, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_sinogram(&s, dir.path().join("s")).unwrap();
        let back = read_sinogram(dir.path().join("s")).unwrap();
        prop_assert_eq!(&back.angles, &s.angles);
        prop_assert_eq!(back.axis, s.axis);
        prop_assert_eq!(bits(&back.values), bits(&s.values));
    }

    #[test]
    fn spatial_sinogram_round_trip(n in 1usize..30, nt in 3usize..20) {
        let angles = AngleSet::fibonacci_hemisphere(n).unwrap();
        let axis = TAxis::centered(0.9, 0.1).unwrap();
        let values: Vec<f64> = (0..n * axis.nt).map(|i| (i as f64).sqrt() - nt as f64).collect();
        let s = Sinogram::new(angles, axis, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_sinogram(&s, dir.path().join("s")).unwrap();
        let back = read_sinogram(dir.path().join("s")).unwrap();
        prop_assert!(matches!(back.angles.directions, Directions::Spatial(_)));
        prop_assert_eq!(&back.angles, &s.angles);
        prop_assert_eq!(bits(&back.values), bits(&s.values));
    }

    #[test]
    fn pgm_ignores_affine_rescaling(
        v in prop::collection::vec(-5.0f64..5.0, 12),
        a in 0.01f64..100.0,
        b in -10.0f64..10.0,
    ) {
        let g = GridGeometry::new(vec![3, 4], vec![0.0; 2], vec![1.0; 2]).unwrap();
        let img = ImageGrid::new(g.clone(), v.clone()).unwrap();
        let scaled = ImageGrid::new(g, v.iter().map(|x| a * x + b).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_pgm(&img, dir.path().join("a.pgm")).unwrap();
        write_pgm(&scaled, dir.path().join("b.pgm")).unwrap();
        let pa = std::fs::read(dir.path().join("a.pgm")).unwrap();
        let pb = std::fs::read(dir.path().join("b.pgm")).unwrap();
        prop_assert_eq!(pa, pb);
    }

    #[test]
    fn csv_values_parse_back_exactly(v in prop::collection::vec(any_value(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        write_csv(&[("v", &v)], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        prop_assert_eq!(bits(&back), bits(&v));
    }
}

#[test]
fn shape_mismatch_on_disk_is_a_size_error() {
    let g = GridGeometry::new(vec![2, 3], vec![0.0; 2], vec![1.0; 2]).unwrap();
    let img = ImageGrid::new(g, vec![1.0; 6]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("g");
    write_grid(&img, &stem).unwrap();
    std::fs::write(dir.path().join("g.f64"), vec![0u8; 40]).unwrap();
    let err = read_grid(&stem).unwrap_err();
    assert_eq!(err.category(), "size");
}
