//! Dataset readers and writers, z-transform, and a synthetic generator.
//!
//! Binary layout (`.fpc`): magic `FPC1`, one version byte, `u32` n, `u32` d,
//! then `n * d` little-endian `f32` values in row-major order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{MetricKind, PointSet};

pub const BINARY_MAGIC: &[u8; 4] = b"FPC1";
pub const BINARY_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4;

pub fn read_csv(path: impl AsRef<Path>, has_header: bool, metric: MetricKind) -> Result<PointSet> {
    read_csv_from(File::open(path)?, has_header, metric)
}

/// Parses comma-separated rows. Errors carry the 1-based line number.
pub fn read_csv_from<R: Read>(reader: R, has_header: bool, metric: MetricKind) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut coords = Vec::new();
    let mut dim: Option<usize> = None;
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let v: f32 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: '{field}' is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: non-finite value '{field}'", col + 1),
                });
            }
            coords.push(v);
        }
    }
    let d = dim.ok_or_else(|| Error::invalid("CSV input has no data rows"))?;
    PointSet::new(d, coords, metric)
}

/// Writes one row per line using the shortest representation that reads
/// back to the same `f32`.
pub fn write_csv(ps: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(ps, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(ps: &PointSet, out: &mut W) -> Result<()> {
    for i in 0..ps.n() {
        let row: Vec<String> = ps.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_binary(ps: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let n =
        u32::try_from(ps.n()).map_err(|_| Error::invalid("too many points for binary format"))?;
    let d = u32::try_from(ps.dim())
        .map_err(|_| Error::invalid("dimension too large for binary format"))?;
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&[BINARY_VERSION])?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&d.to_le_bytes())?;
    for v in ps.coords() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary(path: impl AsRef<Path>, metric: MetricKind) -> Result<PointSet> {
    decode_binary(&std::fs::read(path)?, metric)
}

pub fn decode_binary(bytes: &[u8], metric: MetricKind) -> Result<PointSet> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..4] != BINARY_MAGIC {
        return Err(Error::Format("bad magic, expected FPC1".into()));
    }
    if bytes[4] != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (n, d) = (u32_at(5), u32_at(9));
    let payload = &bytes[HEADER_LEN..];
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::Format("header size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload length mismatch: header says {n}x{d} ({expected} bytes), found {} bytes",
            payload.len()
        )));
    }
    let coords = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PointSet::new(d, coords, metric)
}

/// Per-dimension statistics of a z-transform (population convention).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizeStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Z-transforms each dimension: `(x - mean) / std` with the divide-by-n
/// standard deviation. Statistics are accumulated in `f64`; zero-variance
/// dimensions become 0.
pub fn standardize(ps: &PointSet) -> Result<(PointSet, StandardizeStats)> {
    let (n, d) = (ps.n(), ps.dim());
    if n < 2 {
        return Err(Error::invalid("standardize needs at least 2 points"));
    }
    let mut mean = vec![0.0f64; d];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(ps.row(i)) {
            *m += x as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0f64; d];
    for i in 0..n {
        for ((v, &x), m) in var.iter_mut().zip(ps.row(i)).zip(&mean) {
            *v += (x as f64 - m).powi(2);
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / n as f64).sqrt()).collect();

    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        for (j, &x) in ps.row(i).iter().enumerate() {
            coords.push(if std[j] > 0.0 {
                ((x as f64 - mean[j]) / std[j]) as f32
            } else {
                0.0
            });
        }
    }
    Ok((
        PointSet::new(d, coords, ps.metric())?,
        StandardizeStats { mean, std },
    ))
}

/// `n` points from `m` isotropic Gaussian components in `d` dimensions.
///
/// Component means are drawn from N(0, 10²) per coordinate, so for moderate
/// `spread` the components are far apart. Each point picks its component
/// uniformly. The whole stream comes from one ChaCha8 seed.
pub fn synth_gaussian_mixture(
    n: usize,
    d: usize,
    m: usize,
    spread: f32,
    seed: u64,
) -> Result<PointSet> {
    if n == 0 || d == 0 || m == 0 {
        return Err(Error::invalid("n, d and m must all be at least 1"));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::invalid(
            "spread must be a finite non-negative number",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..m * d)
        .map(|_| 10.0 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        let c = rng.random_range(0..m);
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            coords.push((means[c * d + j] + spread as f64 * z) as f32);
        }
    }
    PointSet::new(d, coords, MetricKind::Euclidean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_single_column() {
        let ps = read_csv_from("0\n1\n2\n".as_bytes(), false, MetricKind::Euclidean).unwrap();
        assert_eq!(ps, PointSet::line(&[0.0, 1.0, 2.0]).unwrap());
    }

    #[test]
    fn csv_header_and_whitespace() {
        let ps = read_csv_from(
            "x,y\n 1.5, -2\n3,4e1\n".as_bytes(),
            true,
            MetricKind::Manhattan,
        )
        .unwrap();
        assert_eq!(ps.coords(), &[1.5, -2.0, 3.0, 40.0]);
        assert_eq!(ps.metric(), MetricKind::Manhattan);
    }

    #[test]
    fn csv_bad_cell_reports_line() {
        let text = "1\n2\n3\n4\n5\n6\nabc\n8\n";
        match read_csv_from(text.as_bytes(), false, MetricKind::Euclidean) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_ragged_and_nonfinite() {
        let err = read_csv_from("1,2\n3\n".as_bytes(), false, MetricKind::Euclidean).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_csv_from("1\nNaN\n".as_bytes(), false, MetricKind::Euclidean).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_csv_from("1\ninf\n".as_bytes(), false, MetricKind::Euclidean).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(read_csv_from("".as_bytes(), false, MetricKind::Euclidean).is_err());
    }

    #[test]
    fn binary_rejects_bad_input() {
        let ps = PointSet::line(&[1.0, 2.0, 3.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.fpc");
        write_binary(&ps, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 12);

        let err = decode_binary(&bytes[..bytes.len() - 1], MetricKind::Euclidean).unwrap_err();
        assert!(err.to_string().contains("payload length"), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_binary(&bad, MetricKind::Euclidean)
            .unwrap_err()
            .to_string()
            .contains("magic"));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode_binary(&bad, MetricKind::Euclidean).is_err());
        assert!(decode_binary(&bytes[..6], MetricKind::Euclidean).is_err());
    }

    #[test]
    fn standardize_small_cases() {
        let ps = PointSet::line(&[0.0, 2.0]).unwrap();
        let (z, stats) = standardize(&ps).unwrap();
        assert_eq!(z.coords(), &[-1.0, 1.0]);
        assert_eq!((stats.mean[0], stats.std[0]), (1.0, 1.0));

        let ps = PointSet::from_rows(&[[3.0, 1.0], [3.0, 2.0], [3.0, 3.0]], MetricKind::Euclidean)
            .unwrap();
        let (z, _) = standardize(&ps).unwrap();
        assert_eq!(z.row(0)[0], 0.0);
        assert_eq!(z.row(2)[0], 0.0);

        assert!(standardize(&PointSet::line(&[1.0]).unwrap()).is_err());
    }

    #[test]
    fn synth_is_seeded() {
        let a = synth_gaussian_mixture(200, 4, 3, 1.0, 42).unwrap();
        let b = synth_gaussian_mixture(200, 4, 3, 1.0, 42).unwrap();
        let c = synth_gaussian_mixture(200, 4, 3, 1.0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn synth_zero_spread_single_component() {
        let ps = synth_gaussian_mixture(50, 3, 1, 0.0, 1).unwrap();
        for i in 1..50 {
            assert_eq!(ps.row(i), ps.row(0));
        }
        assert!(synth_gaussian_mixture(0, 3, 1, 1.0, 1).is_err());
        assert!(synth_gaussian_mixture(5, 3, 1, -1.0, 1).is_err());
    }
}
