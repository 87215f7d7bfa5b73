use kcenter::ingest::{
    decode_binary, read_binary, read_csv, read_csv_from, standardize, synth_gaussian_mixture,
    write_binary, write_csv,
};
use kcenter::{build_cover, Error, MetricKind, PointSet, ScanOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * d)
        .map(|_| {
            // Mix magnitudes so the shortest-repr writer is exercised.
            let e = rng.random_range(-8..8);
            rng.random_range(-1.0f32..1.0) * 10f32.powi(e)
        })
        .collect();
    PointSet::new(d, coords, MetricKind::Euclidean).unwrap()
}

fn bits(ps: &PointSet) -> Vec<u32> {
    ps.coords().iter().map(|x| x.to_bits()).collect()
}

#[test]
fn csv_roundtrip_is_bit_exact() {
    let ps = random_points(1000, 18, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    write_csv(&ps, &path).unwrap();
    let back = read_csv(&path, false, MetricKind::Euclidean).unwrap();
    assert_eq!((back.n(), back.dim()), (1000, 18));
    assert_eq!(bits(&back), bits(&ps));
}

#[test]
fn binary_roundtrip_is_bit_exact() {
    let ps = random_points(1000, 18, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.fpc");
    write_binary(&ps, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 13 + 1000 * 18 * 4);
    let back = read_binary(&path, MetricKind::Manhattan).unwrap();
    assert_eq!(bits(&back), bits(&ps));
    assert_eq!(back.metric(), MetricKind::Manhattan);
}

#[test]
fn row_order_is_preserved() {
    // Each row is tagged with its own index in the first column.
    let text: String = (0..500).map(|i| format!("{i},{}.5\n", 499 - i)).collect();
    let ps = read_csv_from(
        format!("id,x\n{text}").as_bytes(),
        true,
        MetricKind::Euclidean,
    )
    .unwrap();
    for i in 0..500 {
        assert_eq!(ps.row(i), [i as f32, (499 - i) as f32 + 0.5]);
    }
}

#[test]
fn parse_errors_point_at_the_line() {
    let input = "1,2\n3,4\n5,6\n7,8\n9,10\n11,12\nabc,1\n";
    match read_csv_from(input.as_bytes(), false, MetricKind::Euclidean) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
        other => panic!("unexpected {other:?}"),
    }
    let ragged = "1,2\n3\n";
    assert!(matches!(
        read_csv_from(ragged.as_bytes(), false, MetricKind::Euclidean),
        Err(Error::Parse { line: 2, .. })
    ));
    for bad in ["1,NaN\n", "1,inf\n"] {
        assert!(read_csv_from(bad.as_bytes(), false, MetricKind::Euclidean).is_err());
    }
}

#[test]
fn corrupted_binaries_are_rejected() {
    let ps = random_points(10, 3, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.fpc");
    write_binary(&ps, &path).unwrap();
    let good = std::fs::read(&path).unwrap();

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    let mut bad_version = good.clone();
    bad_version[4] = 9;
    for bytes in [
        &good[..8],
        &bad_magic[..],
        &bad_version[..],
        &good[..good.len() - 1],
    ] {
        assert!(matches!(
            decode_binary(bytes, MetricKind::Euclidean),
            Err(Error::Format(_))
        ));
    }
}

#[test]
fn standardize_matches_f64_reference() {
    let ps = random_points(10_000, 18, 4);
    let (z, stats) = standardize(&ps).unwrap();
    let (n, d) = (ps.n(), ps.dim());
    for j in 0..d {
        let col: Vec<f64> = (0..n).map(|i| ps.row(i)[j] as f64).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((stats.mean[j] - mean).abs() <= 1e-9 * sd.max(mean.abs()));
        assert!((stats.std[j] - sd).abs() <= 1e-9 * sd);
        for (i, x) in col.iter().enumerate() {
            let want = ((x - mean) / sd) as f32;
            assert!((z.row(i)[j] - want).abs() <= 1e-6 * want.abs().max(1.0));
        }
    }
}

#[test]
fn standardize_is_idempotent() {
    let ps = random_points(2000, 5, 5);
    let (once, _) = standardize(&ps).unwrap();
    let (twice, stats) = standardize(&once).unwrap();
    for j in 0..5 {
        assert!(stats.mean[j].abs() < 1e-6);
        assert!((stats.std[j] - 1.0).abs() < 1e-5);
    }
    for (a, b) in once.coords().iter().zip(twice.coords()) {
        assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0));
    }
}

#[test]
fn constant_columns_standardize_to_zero() {
    let ps = PointSet::from_rows(
        &[[1.0f32, 5.0], [2.0, 5.0], [3.0, 5.0]],
        MetricKind::Euclidean,
    )
    .unwrap();
    let (z, stats) = standardize(&ps).unwrap();
    assert_eq!(stats.std[1], 0.0);
    assert!((0..3).all(|i| z.row(i)[1] == 0.0));
    assert!(standardize(&PointSet::line(&[1.0]).unwrap()).is_err());
}

#[test]
fn synthetic_mixture_has_a_small_cover() {
    let ps = synth_gaussian_mixture(100_000, 16, 50, 1.0, 7).unwrap();
    assert_eq!(ps, synth_gaussian_mixture(100_000, 16, 50, 1.0, 7).unwrap());
    let c = build_cover(&ps, 5.5, ScanOrder::Natural).unwrap();
    let frac = c.cover.len() as f64 / ps.n() as f64;
    assert!((0.005..=0.1).contains(&frac), "cover fraction {frac}");
}
