//! PGF1 field container, CSV export and 8-bit PGM previews.
//!
//! PGF1 layout, all little-endian:
//! `"PGF1"`, version `u32`, kind `u32`, reserved `u32`,
//! dims `n_x, n_y, n_t` as `u32`, `delta_x` and `delta_t` as `f64`,
//! then the values as `f64` in row-major order.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::dwt::{WaveletPyramid, WaveletSpec};
use crate::error::{PatError, Result};
use crate::grid::{DataField, Field, Grid2D, ImageField};

pub const MAGIC: &[u8; 4] = b"PGF1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;

/// What the values of a PGF1 file hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum FieldKind {
    /// `n_x x n_y` image samples.
    Image = 1,
    /// `n_x x n_t` detector samples.
    Data = 2,
    /// `n_x · n_y` wavelet coefficients in flat pyramid order.
    Pyramid = 3,
}

impl FieldKind {
    fn from_u32(v: u32) -> Result<Self> {
        match v {
            1 => Ok(Self::Image),
            2 => Ok(Self::Data),
            3 => Ok(Self::Pyramid),
            _ => Err(PatError::Format(format!("unknown field kind {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PgfField {
    Image(ImageField),
    Data(DataField),
    Pyramid { grid: Grid2D, flat: Vec<f64> },
}

impl PgfField {
    pub fn grid(&self) -> &Grid2D {
        match self {
            Self::Image(f) => f.grid(),
            Self::Data(g) => g.grid(),
            Self::Pyramid { grid, .. } => grid,
        }
    }

    pub fn kind(&self) -> FieldKind {
        match self {
            Self::Image(_) => FieldKind::Image,
            Self::Data(_) => FieldKind::Data,
            Self::Pyramid { .. } => FieldKind::Pyramid,
        }
    }
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| PatError::Format(format!("dimension {v} exceeds u32")))
}

/// Serialises a header and values into PGF1 bytes.
pub fn encode_pgf1(kind: FieldKind, grid: &Grid2D, values: impl Iterator<Item = f64>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(kind as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for d in [grid.n_x, grid.n_y, grid.n_t] {
        out.extend_from_slice(&to_u32(d)?.to_le_bytes());
    }
    out.extend_from_slice(&grid.delta_x.to_le_bytes());
    out.extend_from_slice(&grid.delta_t.to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn encode_field(field: &PgfField) -> Result<Vec<u8>> {
    match field {
        PgfField::Image(f) => encode_pgf1(FieldKind::Image, f.grid(), f.values().iter().copied()),
        PgfField::Data(g) => encode_pgf1(FieldKind::Data, g.grid(), g.values().iter().copied()),
        PgfField::Pyramid { grid, flat } => encode_pgf1(FieldKind::Pyramid, grid, flat.iter().copied()),
    }
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_pgf1(bytes: &[u8]) -> Result<PgfField> {
    if bytes.len() < HEADER_LEN {
        return Err(PatError::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(PatError::Format("missing PGF1 magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(PatError::Format(format!("unsupported version {version}")));
    }
    let kind = FieldKind::from_u32(u32_at(bytes, 8))?;
    let (n_x, n_y, n_t) = (
        u32_at(bytes, 16) as usize,
        u32_at(bytes, 20) as usize,
        u32_at(bytes, 24) as usize,
    );
    let grid = Grid2D::new(n_x, n_y, n_t, f64_at(bytes, 28), f64_at(bytes, 36))
        .map_err(|e| PatError::Format(e.to_string()))?;
    let shape = match kind {
        FieldKind::Image | FieldKind::Pyramid => grid.image_shape(),
        FieldKind::Data => grid.data_shape(),
    };
    let count = shape.0 * shape.1;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * count {
        return Err(PatError::Format(format!(
            "expected {count} values, found {} bytes",
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(match kind {
        FieldKind::Image => PgfField::Image(ImageField::new(grid, to_array(shape, values)?)?),
        FieldKind::Data => PgfField::Data(DataField::new(grid, to_array(shape, values)?)?),
        FieldKind::Pyramid => PgfField::Pyramid { grid, flat: values },
    })
}

fn to_array(shape: (usize, usize), values: Vec<f64>) -> Result<Array2<f64>> {
    Array2::from_shape_vec(shape, values).map_err(|e| PatError::Format(e.to_string()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

pub fn write_pgf1(path: impl AsRef<Path>, field: &PgfField) -> Result<()> {
    write_bytes(path.as_ref(), &encode_field(field)?)
}

pub fn read_pgf1(path: impl AsRef<Path>) -> Result<PgfField> {
    decode_pgf1(&fs::read(path)?)
}

pub fn write_image(path: impl AsRef<Path>, f: &ImageField) -> Result<()> {
    write_pgf1(path, &PgfField::Image(f.clone()))
}

pub fn write_data(path: impl AsRef<Path>, g: &DataField) -> Result<()> {
    write_pgf1(path, &PgfField::Data(g.clone()))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageField> {
    match read_pgf1(path)? {
        PgfField::Image(f) => Ok(f),
        other => Err(PatError::Format(format!("expected an image, found {:?}", other.kind()))),
    }
}

pub fn read_data(path: impl AsRef<Path>) -> Result<DataField> {
    match read_pgf1(path)? {
        PgfField::Data(g) => Ok(g),
        other => Err(PatError::Format(format!("expected detector data, found {:?}", other.kind()))),
    }
}

/// Path of the level-index sidecar belonging to a pyramid file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".levels.csv");
    PathBuf::from(s)
}

/// CSV `level,orientation,offset,length`; orientation 0 is the scaling block.
pub fn pyramid_layout_csv(p: &WaveletPyramid) -> String {
    let mut out = String::from("level,orientation,offset,length\n");
    for (level, o, offset, len) in p.band_layout() {
        writeln!(out, "{level},{o},{offset},{len}").expect("write to string");
    }
    out
}

/// Writes the flat coefficients as PGF1 and the band layout next to it.
pub fn write_pyramid(path: impl AsRef<Path>, p: &WaveletPyramid) -> Result<()> {
    let path = path.as_ref();
    write_pgf1(
        path,
        &PgfField::Pyramid {
            grid: *p.grid(),
            flat: p.to_flat(),
        },
    )?;
    fs::write(sidecar_path(path), pyramid_layout_csv(p))?;
    Ok(())
}

/// Reads a pyramid and checks it against the sidecar written with it.
pub fn read_pyramid(path: impl AsRef<Path>, spec: &WaveletSpec) -> Result<WaveletPyramid> {
    let path = path.as_ref();
    let (grid, flat) = match read_pgf1(path)? {
        PgfField::Pyramid { grid, flat } => (grid, flat),
        other => return Err(PatError::Format(format!("expected a pyramid, found {:?}", other.kind()))),
    };
    let p = WaveletPyramid::from_flat(grid, spec, &flat)?;
    let side = fs::read_to_string(sidecar_path(path))?;
    if side != pyramid_layout_csv(&p) {
        return Err(PatError::Format(format!(
            "level sidecar does not match a {}-level {} pyramid",
            spec.levels,
            spec.family.name()
        )));
    }
    Ok(p)
}

/// One line per column index (`y` or `t`), one value per `x` sample.
pub fn values_csv(values: &Array2<f64>) -> String {
    let mut out = String::new();
    for col in values.columns() {
        let line: Vec<String> = col.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<F: Field>(path: impl AsRef<Path>, field: &F) -> Result<()> {
    fs::write(path, values_csv(field.values()))?;
    Ok(())
}

/// Binary PGM with a linear window over `[min, max]`; rows follow the
/// second axis, so depth or time increases downwards.
pub fn encode_pgm(values: &Array2<f64>) -> Vec<u8> {
    let (w, h) = values.dim();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for k in 0..h {
        for i in 0..w {
            let v = values[[i, k]];
            let level = if span > 0.0 { ((v - lo) / span * 255.0).round() } else { 0.0 };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn write_pgm<F: Field>(path: impl AsRef<Path>, field: &F) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pgm(field.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwt::{dwt2_forward, WaveletFamily};

    fn grid() -> Grid2D {
        Grid2D::new(8, 4, 8, 0.25, 0.125).unwrap()
    }

    #[test]
    fn header_layout() {
        let f = ImageField::from_fn(grid(), |x, y| x - y).unwrap();
        let b = encode_field(&PgfField::Image(f)).unwrap();
        assert_eq!(&b[..4], b"PGF1");
        assert_eq!(u32_at(&b, 4), 1);
        assert_eq!(u32_at(&b, 8), 1);
        assert_eq!((u32_at(&b, 16), u32_at(&b, 20), u32_at(&b, 24)), (8, 4, 8));
        assert_eq!(f64_at(&b, 28), 0.25);
        assert_eq!(f64_at(&b, 36), 0.125);
        assert_eq!(b.len(), HEADER_LEN + 8 * 32);
    }

    #[test]
    fn round_trips_are_exact() {
        let f = ImageField::from_fn(grid(), |x, y| (x * 3.1).sin() + y).unwrap();
        let g = DataField::from_fn(grid(), |x, t| x * t - 1.0 / 3.0).unwrap();
        for field in [PgfField::Image(f), PgfField::Data(g)] {
            let back = decode_pgf1(&encode_field(&field).unwrap()).unwrap();
            assert_eq!(back, field);
        }
    }

    #[test]
    fn malformed_inputs_rejected() {
        let f = ImageField::zeros(grid());
        let mut b = encode_field(&PgfField::Image(f)).unwrap();
        assert!(matches!(decode_pgf1(&b[..HEADER_LEN - 1]), Err(PatError::Format(_))));
        assert!(matches!(decode_pgf1(&b[..b.len() - 8]), Err(PatError::Format(_))));
        b[8] = 9;
        assert!(matches!(decode_pgf1(&b), Err(PatError::Format(_))));
        b[0] = b'X';
        assert!(matches!(decode_pgf1(&b), Err(PatError::Format(_))));
    }

    #[test]
    fn pyramid_with_sidecar() {
        let dir = tempdir();
        let g = Grid2D::new(16, 16, 2, 0.1, 0.1).unwrap();
        let spec = WaveletSpec::new(WaveletFamily::Daubechies(2), 2).unwrap();
        let f = ImageField::from_fn(g, |x, y| x * x - y).unwrap();
        let p = dwt2_forward(&f, &spec).unwrap();
        let path = dir.join("c.pgf1");
        write_pyramid(&path, &p).unwrap();
        let side = fs::read_to_string(sidecar_path(&path)).unwrap();
        assert_eq!(side.lines().count(), 1 + 1 + 3 * 2);
        assert!(side.contains("\n0,0,0,16\n"));
        assert_eq!(read_pyramid(&path, &spec).unwrap(), p);
        let other = WaveletSpec::new(WaveletFamily::Daubechies(2), 3).unwrap();
        assert!(read_pyramid(&path, &other).is_err());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn csv_and_pgm_shapes() {
        let f = ImageField::from_fn(grid(), |x, y| x + 10.0 * y).unwrap();
        let csv = values_csv(f.values());
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().all(|l| l.split(',').count() == 8));
        let pgm = encode_pgm(f.values());
        let header = b"P5\n8 4\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        let px = &pgm[header.len()..];
        assert_eq!(px.len(), 32);
        assert_eq!(*px.iter().min().unwrap(), 0);
        assert_eq!(*px.iter().max().unwrap(), 255);
        let flat = encode_pgm(&Array2::from_elem((3, 2), 5.0));
        assert!(flat[flat.len() - 6..].iter().all(|&v| v == 0));
    }

    fn tempdir() -> PathBuf {
        let dir = std::env::temp_dir().join(format!("pat-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }
}
