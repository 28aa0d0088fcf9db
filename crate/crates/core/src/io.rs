//! Binary and CSV file formats.
//!
//! Binary files start with an 8-byte magic string, then two `u64` sizes
//! and four `f64` grid parameters, then the row-major `f64` values, all
//! little-endian.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::analysis::ProfileReport;
use crate::dtb::DtbCurve;
use crate::error::{Error, Result};
use crate::recon::{Image, ImageGrid, IterationRecord};
use crate::sampling::{Sinogram, SinogramGrid};

pub const SINOGRAM_MAGIC: &[u8; 8] = b"GRTSINO1";
pub const IMAGE_MAGIC: &[u8; 8] = b"GRTIMG01";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_binary(path: &Path, magic: &[u8; 8], sizes: [u64; 2], params: [f64; 4], values: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    let mut buf = Vec::with_capacity(56 + 8 * values.len());
    buf.extend_from_slice(magic);
    for s in sizes {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    for p in params {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn read_binary(path: &Path, magic: &[u8; 8]) -> Result<([usize; 2], [f64; 4], Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .map(BufReader::new)
        .and_then(|mut r| r.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 56 {
        return Err(bad("truncated header"));
    }
    if &bytes[..8] != magic {
        return Err(bad("wrong magic"));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap() };
    let sizes = [u64::from_le_bytes(word(0)) as usize, u64::from_le_bytes(word(1)) as usize];
    let params = [2, 3, 4, 5].map(|i| f64::from_le_bytes(word(i)));
    let n = sizes[0]
        .checked_mul(sizes[1])
        .ok_or_else(|| bad("size overflow"))?;
    if bytes.len() != 56 + 8 * n {
        return Err(bad(&format!("expected {n} values, found {} bytes of data", bytes.len() - 56)));
    }
    let values = bytes[56..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((sizes, params, values))
}

pub fn write_sinogram(path: &Path, s: &Sinogram) -> Result<()> {
    let g = &s.grid;
    write_binary(
        path,
        SINOGRAM_MAGIC,
        [g.n_alpha as u64, g.n_p as u64],
        [g.alpha0, g.d_alpha, g.p0, g.d_p],
        &s.values,
    )
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    let ([n_alpha, n_p], [alpha0, d_alpha, p0, d_p], values) = read_binary(path, SINOGRAM_MAGIC)?;
    Ok(Sinogram {
        grid: SinogramGrid {
            n_alpha,
            n_p,
            alpha0,
            d_alpha,
            p0,
            d_p,
        },
        values,
    })
}

/// Image header stores `(n_x, n_y)` and `(x_min, x_max, y_min, y_max)`.
pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    let g = &img.grid;
    write_binary(
        path,
        IMAGE_MAGIC,
        [g.n_x as u64, g.n_y as u64],
        [g.x_min, g.x_max, g.y_min, g.y_max],
        &img.values,
    )
}

pub fn read_image(path: &Path) -> Result<Image> {
    let ([n_x, n_y], [x_min, x_max, y_min, y_max], values) = read_binary(path, IMAGE_MAGIC)?;
    Ok(Image {
        grid: ImageGrid {
            n_x,
            n_y,
            x_min,
            x_max,
            y_min,
            y_max,
        },
        values,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// `alpha,p,value` rows.
pub fn write_sinogram_csv(path: &Path, s: &Sinogram) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["alpha", "p", "value"])?;
    for j in 0..s.grid.n_alpha {
        for k in 0..s.grid.n_p {
            w.serialize((s.grid.alpha(j), s.grid.p(k), s.get(j, k)))?;
        }
    }
    finish(w, path)
}

pub fn write_iteration_log(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for rec in log {
        w.serialize(rec)?;
    }
    if log.is_empty() {
        w.write_record(["iter", "cost", "update_linf", "step"])?;
    }
    finish(w, path)
}

pub fn read_iteration_log(path: &Path) -> Result<Vec<IterationRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

/// `r,upsilon_combined,upsilon_1,…` rows.
pub fn write_dtb_csv(path: &Path, curve: &DtbCurve) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["r".to_string(), "upsilon_combined".to_string()];
    header.extend((1..=curve.per_tangency.len()).map(|l| format!("upsilon_{l}")));
    w.write_record(&header)?;
    for (i, r) in curve.r_values.iter().enumerate() {
        let mut row = vec![*r, curve.upsilon[i]];
        row.extend(curve.per_tangency.iter().map(|v| v[i]));
        w.serialize(row)?;
    }
    finish(w, path)
}

/// `l,alpha,p,nu,grad_norm,dalpha` rows.
pub fn write_tangency_csv(path: &Path, curve: &DtbCurve) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["l", "alpha", "p", "nu", "grad_norm", "dalpha"])?;
    for (l, t) in curve.tangencies.iter().enumerate() {
        w.serialize((l + 1, t.alpha, t.p, t.nu, t.grad_norm, t.dalpha))?;
    }
    finish(w, path)
}

pub fn write_profile_csv(path: &Path, rep: &ProfileReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x_check", "measured", "predicted"])?;
    for i in 0..rep.x_check.len() {
        w.serialize((rep.x_check[i], rep.measured[i], rep.predicted[i]))?;
    }
    finish(w, path)
}

/// `key = value` lines.
pub fn write_key_values(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut w = create(path)?;
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Profile of an image along a line, as `(s, value)` rows.
pub fn write_xy_csv(path: &Path, names: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(names)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinogram_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let grid = SinogramGrid::full_scan(3, 4, 1.0, 2.0).unwrap();
        let mut s = Sinogram::zeros(grid);
        s.values.iter_mut().enumerate().for_each(|(i, v)| *v = i as f64 * 0.1 - 0.3);
        write_sinogram(&path, &s).unwrap();
        let back = read_sinogram(&path).unwrap();
        assert_eq!(back, s);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], SINOGRAM_MAGIC);
        assert_eq!(bytes.len(), 56 + 8 * 12);
    }

    #[test]
    fn image_round_trip_and_magic_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.bin");
        let mut img = Image::zeros(ImageGrid::square(5, 2.0));
        img.values[7] = 1.25;
        write_image(&path, &img).unwrap();
        assert_eq!(read_image(&path).unwrap(), img);
        assert!(matches!(read_sinogram(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        fs::write(&path, b"GRTSINO1\x01").unwrap();
        assert!(matches!(read_sinogram(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn iteration_log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let log = vec![
            IterationRecord { iter: 0, cost: 2.0, update_linf: 0.5, step: 0.1 },
            IterationRecord { iter: 1, cost: 1.0, update_linf: 0.25, step: 0.1 },
        ];
        write_iteration_log(&path, &log).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("iter,cost,update_linf,step"));
        assert_eq!(read_iteration_log(&path).unwrap(), log);
    }
}
