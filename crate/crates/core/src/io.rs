//! Little-endian binary containers: frame streams (`.tfr`), dictionaries
//! (`.tdl`), measurement streams (`.tms`) and classification libraries
//! (`.tsrc`).
//!
//! A `.tms` stream is a concatenation of measurement-set records, each
//! carrying its own header; reading stops cleanly at end of file.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::classify::SrcLibrary;
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::frame::{Measurement, MeasurementSet, PixelIndex, Scheme, TactileFrame};

pub const FRAME_MAGIC: [u8; 4] = *b"TFRM";
pub const DICT_MAGIC: [u8; 4] = *b"TDIC";
pub const MEAS_MAGIC: [u8; 4] = *b"TMSR";
pub const LIBRARY_MAGIC: [u8; 4] = *b"TSRC";
pub const VERSION: u16 = 1;

/// Sample encoding inside a `.tfr` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    /// Integer ADC counts; values must be whole numbers in `0..=65535`.
    U16 = 0,
    #[default]
    F32 = 1,
}

impl Dtype {
    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Self::U16),
            1 => Ok(Self::F32),
            other => Err(Error::InvalidArgument(format!("unknown dtype code {other}"))),
        }
    }
}

struct Reader<R> {
    inner: R,
    what: &'static str,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| self.truncated(e))?;
        Ok(buf)
    }

    fn truncated(&self, e: io::Error) -> Error {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            Error::Truncated(self.what.to_string())
        } else {
            Error::Io(e)
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.bytes()?))
    }

    fn header(&mut self, magic: [u8; 4]) -> Result<()> {
        let found = self.bytes::<4>()?;
        if found != magic {
            return Err(Error::BadMagic { expected: magic, found });
        }
        self.version()
    }

    fn version(&mut self) -> Result<()> {
        match self.u16()? {
            VERSION => Ok(()),
            v => Err(Error::UnsupportedVersion(v)),
        }
    }

    /// Reads the next magic, or `None` at a clean end of file.
    fn magic_or_eof(&mut self) -> Result<Option<[u8; 4]>> {
        let mut buf = [0u8; 4];
        let mut got = 0;
        while got < 4 {
            match self.inner.read(&mut buf[got..]) {
                Ok(0) if got == 0 => return Ok(None),
                Ok(0) => return Err(Error::Truncated(self.what.to_string())),
                Ok(n) => got += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::Io(e)),
            }
        }
        Ok(Some(buf))
    }
}

fn dim16(v: usize, what: &str) -> Result<[u8; 2]> {
    u16::try_from(v)
        .map(u16::to_le_bytes)
        .map_err(|_| Error::InvalidArgument(format!("{what} {v} exceeds 65535")))
}

fn count32(v: usize, what: &str) -> Result<[u8; 4]> {
    u32::try_from(v)
        .map(u32::to_le_bytes)
        .map_err(|_| Error::InvalidArgument(format!("{what} {v} exceeds u32")))
}

fn to_f32(v: f64) -> Result<f32> {
    let x = v as f32;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite("value overflows f32"))
    }
}

pub fn write_frames<W: Write>(mut w: W, frames: &[TactileFrame], dtype: Dtype) -> Result<()> {
    let (rows, cols) = frames.first().map_or((0, 0), |f| (f.rows(), f.cols()));
    if let Some(f) = frames.iter().find(|f| f.rows() != rows || f.cols() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "stream mixes {rows}x{cols} and {}x{} frames",
            f.rows(),
            f.cols()
        )));
    }
    w.write_all(&FRAME_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim16(rows, "rows")?)?;
    w.write_all(&dim16(cols, "cols")?)?;
    w.write_all(&count32(frames.len(), "frame count")?)?;
    w.write_all(&[dtype as u8])?;
    for f in frames {
        w.write_all(&f.timestamp_us.to_le_bytes())?;
        for &v in f.values() {
            match dtype {
                Dtype::U16 => {
                    if v.fract() != 0.0 || v > u16::MAX as f64 {
                        return Err(Error::InvalidArgument(format!("value {v} is not a u16 count")));
                    }
                    w.write_all(&(v as u16).to_le_bytes())?;
                }
                Dtype::F32 => w.write_all(&to_f32(v)?.to_le_bytes())?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_frames<R: Read>(r: R) -> Result<Vec<TactileFrame>> {
    let mut r = Reader { inner: r, what: "frame stream" };
    r.header(FRAME_MAGIC)?;
    let rows = r.u16()? as usize;
    let cols = r.u16()? as usize;
    let count = r.u32()? as usize;
    let dtype = Dtype::from_code(r.u8()?)?;
    let mut frames = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let t = r.u64()?;
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            values.push(match dtype {
                Dtype::U16 => r.u16()? as f64,
                Dtype::F32 => r.f32()? as f64,
            });
        }
        frames.push(TactileFrame::new(rows, cols, values, t)?);
    }
    Ok(frames)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

pub fn write_frame_stream(path: impl AsRef<Path>, frames: &[TactileFrame], dtype: Dtype) -> Result<()> {
    write_frames(BufWriter::new(create(path.as_ref())?), frames, dtype)
}

pub fn read_frame_stream(path: impl AsRef<Path>) -> Result<Vec<TactileFrame>> {
    read_frames(BufReader::new(open(path.as_ref())?))
}

pub fn write_dictionary<W: Write>(mut w: W, dict: &Dictionary) -> Result<()> {
    w.write_all(&DICT_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim16(dict.patch_rows(), "patch rows")?)?;
    w.write_all(&dim16(dict.patch_cols(), "patch cols")?)?;
    w.write_all(&count32(dict.atom_count(), "atom count")?)?;
    for &v in dict.raw() {
        w.write_all(&to_f32(v)?.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Atoms are renormalized after the f32 round trip.
pub fn read_dictionary<R: Read>(r: R) -> Result<Dictionary> {
    let mut r = Reader { inner: r, what: "dictionary" };
    r.header(DICT_MAGIC)?;
    let pr = r.u16()? as usize;
    let pc = r.u16()? as usize;
    let k = r.u32()? as usize;
    let mut atoms = Vec::with_capacity((pr * pc).saturating_mul(k).min(1 << 24));
    for _ in 0..pr * pc * k {
        atoms.push(r.f32()? as f64);
    }
    Dictionary::from_unnormalized(pr, pc, atoms)
}

pub fn write_dictionary_file(path: impl AsRef<Path>, dict: &Dictionary) -> Result<()> {
    write_dictionary(BufWriter::new(create(path.as_ref())?), dict)
}

pub fn read_dictionary_file(path: impl AsRef<Path>) -> Result<Dictionary> {
    read_dictionary(BufReader::new(open(path.as_ref())?))
}

pub fn write_measurement_set<W: Write>(mut w: W, set: &MeasurementSet) -> Result<()> {
    w.write_all(&MEAS_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim16(set.rows, "rows")?)?;
    w.write_all(&dim16(set.cols, "cols")?)?;
    w.write_all(&[set.scheme.code()])?;
    w.write_all(&set.frame_index.to_le_bytes())?;
    w.write_all(&set.seed.to_le_bytes())?;
    w.write_all(&count32(set.len(), "measurement count")?)?;
    for m in set.measurements() {
        w.write_all(&(m.pixel.row as u16).to_le_bytes())?;
        w.write_all(&(m.pixel.col as u16).to_le_bytes())?;
        w.write_all(&to_f32(m.value)?.to_le_bytes())?;
        w.write_all(&m.t_us.to_le_bytes())?;
    }
    Ok(())
}

fn read_set_body<R: Read>(r: &mut Reader<R>) -> Result<MeasurementSet> {
    r.version()?;
    let rows = r.u16()? as usize;
    let cols = r.u16()? as usize;
    let scheme = Scheme::from_code(r.u8()?)?;
    let frame_index = r.u32()?;
    let seed = r.u64()?;
    let m = r.u32()? as usize;
    let mut ms = Vec::with_capacity(m.min(1 << 16));
    for _ in 0..m {
        let row = r.u16()? as usize;
        let col = r.u16()? as usize;
        let value = r.f32()? as f64;
        let t_us = r.u64()?;
        ms.push(Measurement { pixel: PixelIndex { row, col }, value, t_us });
    }
    MeasurementSet::new(rows, cols, scheme, frame_index, seed, ms)
}

pub fn write_measurements<W: Write>(mut w: W, sets: &[MeasurementSet]) -> Result<()> {
    for s in sets {
        write_measurement_set(&mut w, s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measurements<R: Read>(r: R) -> Result<Vec<MeasurementSet>> {
    let mut r = Reader { inner: r, what: "measurement stream" };
    let mut sets = Vec::new();
    while let Some(found) = r.magic_or_eof()? {
        if found != MEAS_MAGIC {
            return Err(Error::BadMagic { expected: MEAS_MAGIC, found });
        }
        sets.push(read_set_body(&mut r)?);
    }
    Ok(sets)
}

pub fn write_measurement_stream(path: impl AsRef<Path>, sets: &[MeasurementSet]) -> Result<()> {
    write_measurements(BufWriter::new(create(path.as_ref())?), sets)
}

pub fn read_measurement_stream(path: impl AsRef<Path>) -> Result<Vec<MeasurementSet>> {
    read_measurements(BufReader::new(open(path.as_ref())?))
}

/// Layout: magic, version, rows, cols, class count (u32), then per class a
/// u16 name length and UTF-8 name, then entry count (u32) and per entry a
/// u32 class index followed by rows * cols f32 values.
pub fn write_library<W: Write>(mut w: W, lib: &SrcLibrary) -> Result<()> {
    w.write_all(&LIBRARY_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim16(lib.rows, "rows")?)?;
    w.write_all(&dim16(lib.cols, "cols")?)?;
    w.write_all(&count32(lib.class_names.len(), "class count")?)?;
    for name in &lib.class_names {
        w.write_all(&dim16(name.len(), "label length")?)?;
        w.write_all(name.as_bytes())?;
    }
    w.write_all(&count32(lib.entries.len(), "entry count")?)?;
    for (class, v) in &lib.entries {
        w.write_all(&(*class as u32).to_le_bytes())?;
        for &x in v {
            w.write_all(&to_f32(x)?.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_library<R: Read>(r: R) -> Result<SrcLibrary> {
    let mut r = Reader { inner: r, what: "library" };
    r.header(LIBRARY_MAGIC)?;
    let rows = r.u16()? as usize;
    let cols = r.u16()? as usize;
    let classes = r.u32()? as usize;
    let mut names = Vec::with_capacity(classes.min(1 << 12));
    for _ in 0..classes {
        let len = r.u16()? as usize;
        let mut buf = vec![0u8; len];
        r.inner.read_exact(&mut buf).map_err(|e| r.truncated(e))?;
        names.push(String::from_utf8(buf).map_err(|_| Error::InvalidArgument("label is not UTF-8".into()))?);
    }
    let n = r.u32()? as usize;
    let mut entries = Vec::with_capacity(n.min(1 << 12));
    for _ in 0..n {
        let class = r.u32()? as usize;
        let mut v = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            v.push(r.f32()? as f64);
        }
        entries.push((class, v));
    }
    SrcLibrary::new(rows, cols, names, entries)
}

pub fn write_library_file(path: impl AsRef<Path>, lib: &SrcLibrary) -> Result<()> {
    write_library(BufWriter::new(create(path.as_ref())?), lib)
}

pub fn read_library_file(path: impl AsRef<Path>) -> Result<SrcLibrary> {
    read_library(BufReader::new(open(path.as_ref())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(frames: &[TactileFrame], dtype: Dtype) -> Vec<TactileFrame> {
        let mut buf = Vec::new();
        write_frames(&mut buf, frames, dtype).unwrap();
        read_frames(buf.as_slice()).unwrap()
    }

    #[test]
    fn zero_frame_layout() {
        let f = TactileFrame::zeros(2, 2, 0);
        let mut buf = Vec::new();
        write_frames(&mut buf, std::slice::from_ref(&f), Dtype::U16).unwrap();
        assert_eq!(buf.len(), 4 + 2 + 2 + 2 + 4 + 1 + 8 + 8);
        assert_eq!(&buf[..4], b"TFRM");
        assert!(buf[15..].iter().all(|&b| b == 0));
        assert_eq!(roundtrip(std::slice::from_ref(&f), Dtype::U16), vec![f]);
    }

    #[test]
    fn empty_stream() {
        assert!(roundtrip(&[], Dtype::F32).is_empty());
    }

    #[test]
    fn mixed_shapes_rejected() {
        let fs = [TactileFrame::zeros(32, 32, 0), TactileFrame::zeros(16, 16, 1)];
        assert!(matches!(write_frames(Vec::new(), &fs, Dtype::F32), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn corrupt_magic_and_truncation() {
        let mut buf = Vec::new();
        write_frames(&mut buf, &[TactileFrame::zeros(2, 2, 5)], Dtype::F32).unwrap();
        let mut bad = buf.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(read_frames(bad.as_slice()), Err(Error::BadMagic { .. })));
        assert!(matches!(read_frames(&buf[..buf.len() - 1]), Err(Error::Truncated(_))));
        let mut v2 = buf.clone();
        v2[4] = 2;
        assert!(matches!(read_frames(v2.as_slice()), Err(Error::UnsupportedVersion(2))));
    }

    #[test]
    fn u16_rejects_fractional_counts() {
        let f = TactileFrame::new(1, 1, vec![0.5], 0).unwrap();
        assert!(write_frames(Vec::new(), &[f], Dtype::U16).is_err());
    }

    #[test]
    fn measurement_stream_roundtrip() {
        let mk = |k: u32| {
            let ms = vec![
                Measurement { pixel: PixelIndex { row: 1, col: 2 }, value: 0.25, t_us: 10 + k as u64 },
                Measurement { pixel: PixelIndex { row: 0, col: 0 }, value: 3.0, t_us: 30 + k as u64 },
            ];
            MeasurementSet::new(4, 3, Scheme::Random, k, 99, ms).unwrap()
        };
        let sets = vec![mk(0), mk(1)];
        let mut buf = Vec::new();
        write_measurements(&mut buf, &sets).unwrap();
        assert_eq!(read_measurements(buf.as_slice()).unwrap(), sets);
        assert!(read_measurements(&buf[..buf.len() - 3]).is_err());
        assert!(read_measurements(&[][..]).unwrap().is_empty());
    }

    #[test]
    fn dictionary_roundtrip() {
        let d = crate::dictionary::overcomplete_dct(4, 4, 16).unwrap();
        let mut buf = Vec::new();
        write_dictionary(&mut buf, &d).unwrap();
        let back = read_dictionary(buf.as_slice()).unwrap();
        assert_eq!(back.atom_count(), 16);
        for (a, b) in d.raw().iter().zip(back.raw()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn library_roundtrip() {
        let lib = SrcLibrary::new(1, 2, vec!["a".into(), "bé".into()], vec![(0, vec![1.0, 0.0]), (1, vec![0.0, 2.0])]).unwrap();
        let mut buf = Vec::new();
        write_library(&mut buf, &lib).unwrap();
        assert_eq!(read_library(buf.as_slice()).unwrap(), lib);
    }
}
