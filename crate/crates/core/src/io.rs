//! Binary field files and CSV exports.
//!
//! Binary layout (little endian):
//!
//! ```text
//! magic    8 bytes  "WIG1\0\0\0\0"
//! version  u32      1
//! rank     u32
//! flags    u32      bit 0: complex samples
//! kind     u32      0 wavefunction, 1 wigner, 2 characteristic, 3 tomogram
//! dims     rank × u64
//! header   6 × f64  dx, dp, x_min, hbar, mass, time
//! angles   dims[0] × f64   (tomograms only)
//! data     row-major f64, (re, im) pairs when complex
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::observables::{EhrenfestTable, MomentReport};
use crate::states::Wavefunction;
use crate::tomography::Tomogram;
use crate::wigner::{CharacteristicZ, WignerFunction};

pub const MAGIC: [u8; 8] = *b"WIG1\0\0\0\0";
pub const VERSION: u32 = 1;

/// Any field that can be stored in a binary file.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Wave(Wavefunction),
    Wigner(WignerFunction),
    Characteristic(CharacteristicZ),
    Tomogram(Tomogram),
}

impl Field {
    fn kind(&self) -> u32 {
        match self {
            Field::Wave(_) => 0,
            Field::Wigner(_) => 1,
            Field::Characteristic(_) => 2,
            Field::Tomogram(_) => 3,
        }
    }
}

impl From<Wavefunction> for Field {
    fn from(v: Wavefunction) -> Self {
        Field::Wave(v)
    }
}
impl From<WignerFunction> for Field {
    fn from(v: WignerFunction) -> Self {
        Field::Wigner(v)
    }
}
impl From<CharacteristicZ> for Field {
    fn from(v: CharacteristicZ) -> Self {
        Field::Characteristic(v)
    }
}
impl From<Tomogram> for Field {
    fn from(v: Tomogram) -> Self {
        Field::Tomogram(v)
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}
fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}
fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}
fn put_complex(out: &mut Vec<u8>, values: &[Complex64]) {
    for z in values {
        put_f64(out, z.re);
        put_f64(out, z.im);
    }
}

/// Serialize a field into the binary layout.
pub fn encode(field: &Field) -> Vec<u8> {
    let (grid, time, complex, dims): (&PhaseGrid, f64, bool, Vec<u64>) = match field {
        Field::Wave(v) => (v.grid(), v.time(), true, vec![v.grid().n() as u64]),
        Field::Wigner(v) => (v.grid(), v.time(), false, vec![v.grid().n() as u64; 2]),
        Field::Characteristic(v) => (v.grid(), v.time(), true, vec![v.grid().n() as u64; 2]),
        Field::Tomogram(v) => (v.grid(), 0.0, false, vec![v.len() as u64, v.grid().n() as u64]),
    };
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, dims.len() as u32);
    put_u32(&mut out, complex as u32);
    put_u32(&mut out, field.kind());
    for d in &dims {
        put_u64(&mut out, *d);
    }
    for v in [grid.dx(), grid.dp(), grid.x_min(), grid.hbar(), grid.mass(), time] {
        put_f64(&mut out, v);
    }
    match field {
        Field::Wave(v) => put_complex(&mut out, v.samples()),
        Field::Wigner(v) => v.values().iter().for_each(|x| put_f64(&mut out, *x)),
        Field::Characteristic(v) => put_complex(&mut out, v.values()),
        Field::Tomogram(v) => {
            v.angles().iter().for_each(|x| put_f64(&mut out, *x));
            v.values().iter().for_each(|x| put_f64(&mut out, *x));
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("unexpected end of data".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn reals(&mut self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|_| self.f64()).collect()
    }
    fn complex(&mut self, count: usize) -> Result<Vec<Complex64>> {
        (0..count)
            .map(|_| Ok(Complex64::new(self.f64()?, self.f64()?)))
            .collect()
    }
}

/// Parse a field from the binary layout.
pub fn decode(bytes: &[u8]) -> Result<Field> {
    let mut c = Cursor { bytes, at: 0 };
    if c.take(8)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rank = c.u32()? as usize;
    let flags = c.u32()?;
    let kind = c.u32()?;
    let (want_rank, want_complex) = match kind {
        0 => (1, true),
        1 => (2, false),
        2 => (2, true),
        3 => (2, false),
        k => return Err(Error::Format(format!("unknown field kind {k}"))),
    };
    if rank != want_rank || (flags & 1 == 1) != want_complex {
        return Err(Error::Format(format!(
            "rank {rank} / flags {flags} do not match kind {kind}"
        )));
    }
    let dims: Vec<usize> = (0..rank).map(|_| c.u64().map(|d| d as usize)).collect::<Result<_>>()?;
    let (dx, dp, x_min, hbar, mass, time) = (c.f64()?, c.f64()?, c.f64()?, c.f64()?, c.f64()?, c.f64()?);
    let n = *dims.last().unwrap();
    let grid = PhaseGrid::from_spacings(n, x_min, dx, dp, hbar, mass)?;
    if kind == 1 || kind == 2 {
        if dims[0] != n {
            return Err(Error::Format("field is not square".into()));
        }
    }
    let field = match kind {
        0 => Field::Wave(Wavefunction::from_samples(grid, c.complex(n)?, time)?),
        1 => Field::Wigner(WignerFunction::from_values(grid, c.reals(n * n)?, time)?),
        2 => Field::Characteristic(CharacteristicZ::from_values(grid, c.complex(n * n)?, time)?),
        _ => {
            let angles = c.reals(dims[0])?;
            let values = c.reals(dims[0] * n)?;
            Field::Tomogram(Tomogram::from_parts(grid, angles, values)?)
        }
    };
    if c.at != bytes.len() {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(field)
}

pub fn write_field(mut w: impl Write, field: &Field) -> Result<()> {
    w.write_all(&encode(field))?;
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<Field> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").unwrap();
}

fn row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        num(out, *v);
    }
    out.push('\n');
}

/// `x,re,im` per sample.
pub fn wavefunction_csv(psi: &Wavefunction) -> String {
    let mut s = String::from("x,re,im\n");
    for (k, z) in psi.samples().iter().enumerate() {
        row(&mut s, &[psi.grid().x(k), z.re, z.im]);
    }
    s
}

/// `x,p,w` per lattice point, position-major.
pub fn wigner_csv(w: &WignerFunction) -> String {
    let g = w.grid();
    let mut s = String::from("x,p,w\n");
    for k in 0..g.n() {
        for j in 0..g.n() {
            row(&mut s, &[g.x(k), g.p(j), w.get(k, j)]);
        }
    }
    s
}

/// `y,y_prime,re,im` per lattice point.
pub fn characteristic_csv(z: &CharacteristicZ) -> String {
    let g = z.grid();
    let mut s = String::from("y,y_prime,re,im\n");
    for a in 0..g.n() {
        for b in 0..g.n() {
            let v = z.get(a, b);
            row(&mut s, &[g.x(a), g.x(b), v.re, v.im]);
        }
    }
    s
}

/// `theta,X,w` per frame and quadrature sample.
pub fn tomogram_csv(t: &Tomogram) -> String {
    let axis = t.x_axis();
    let mut s = String::from("theta,X,w\n");
    for (i, theta) in t.angles().iter().enumerate() {
        for (x, w) in axis.iter().zip(t.frame(i)) {
            row(&mut s, &[*theta, *x, *w]);
        }
    }
    s
}

pub fn moments_csv(m: &MomentReport) -> String {
    let mut s = String::from("mean_x,mean_p,var_x,var_p,cov_xp,uncertainty_product,blob_area\n");
    row(
        &mut s,
        &[
            m.mean_x,
            m.mean_p,
            m.var_x,
            m.var_p,
            m.cov_xp,
            m.uncertainty_product,
            m.blob_area,
        ],
    );
    s
}

pub fn ehrenfest_csv(table: &EhrenfestTable) -> String {
    let mut s = String::from(
        "t,mean_x,mean_p,mean_force,force_at_mean,classical_x,classical_p,velocity_residual,force_residual\n",
    );
    for r in &table.rows {
        row(
            &mut s,
            &[
                r.t,
                r.mean_x,
                r.mean_p,
                r.mean_force,
                r.force_at_mean,
                r.classical_x,
                r.classical_p,
                r.velocity_residual,
                r.force_residual,
            ],
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::gaussian_packet;
    use crate::tomography::forward_tomogram;
    use crate::wigner::{to_characteristic, wigner_transform};

    #[test]
    fn binary_round_trip_is_exact() {
        let g = PhaseGrid::new(32, -6.0, 6.0, 1.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 0.5, 0.3, 1.0).unwrap().with_time(0.25);
        let w = wigner_transform(&psi).unwrap();
        let z = to_characteristic(&w);
        let t = forward_tomogram(&w, &[0.0, 1.0]).unwrap();
        for f in [Field::from(psi), w.into(), z.into(), t.into()] {
            assert_eq!(decode(&encode(&f)).unwrap(), f);
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let g = PhaseGrid::new(8, -4.0, 4.0, 1.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 0.0, 0.0, 0.6)
            .unwrap_or_else(|_| Wavefunction::from_samples(g, vec![Complex64::new(1.0, 0.0); 8], 0.0).unwrap());
        let mut bytes = encode(&psi.into());
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn csv_uses_full_precision() {
        let g = PhaseGrid::new(8, -4.0, 4.0, 1.0, 1.0).unwrap();
        let psi = Wavefunction::from_samples(g, vec![Complex64::new(0.1, 0.0); 8], 0.0).unwrap();
        let csv = wavefunction_csv(&psi);
        assert!(csv.starts_with("x,re,im\n-4.0000000000000000e0,1.0000000000000001e-1,"));
    }
}
