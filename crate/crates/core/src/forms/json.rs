//! JSON schema: {frame:{n}, entries:[{blade:[..], mode:[..], re:[[..]], im:[[..]]}]},
//! blades in the real basis x¹..x^{2n} (1-based, x^{n+j} = y^j).
use super::*;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FrameJson {
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EntryJson {
    pub blade: Vec<usize>,
    pub mode: Vec<i32>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FormJson {
    pub frame: FrameJson,
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridEntryJson {
    pub blade: Vec<usize>,
    /// Values listed point by point, row-major within each matrix.
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridFormJson {
    pub frame: FrameJson,
    pub m: usize,
    pub dims: Vec<usize>,
    pub entries: Vec<GridEntryJson>,
}

fn split(a: &DMatrix<C64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let rows = |f: &dyn Fn(C64) -> f64| (0..a.nrows()).map(|r| (0..a.ncols()).map(|c0| f(a[(r, c0)])).collect()).collect();
    (rows(&|z| z.re), rows(&|z| z.im))
}

impl TrigForm {
    pub fn to_json(&self) -> FormJson {
        let n = self.frame.n;
        let entries = self
            .to_real_terms()
            .into_iter()
            .map(|(b, k, a)| {
                let (re, im) = split(&a);
                EntryJson { blade: blade_indices(b).iter().map(|i| i + 1).collect(), mode: k[..2 * n].to_vec(), re, im }
            })
            .collect();
        FormJson { frame: FrameJson { n }, entries }
    }

    pub fn from_json(j: &FormJson) -> Result<Self> {
        let n = j.frame.n;
        if !(1..=MAX_N).contains(&n) {
            return Err(Error::Invalid(format!("unsupported n = {n}")));
        }
        let frame = Frame::new(n);
        let mut m = None;
        let mut terms = Vec::new();
        for e in &j.entries {
            let rows = e.re.len();
            if e.im.len() != rows || e.re.iter().chain(&e.im).any(|r| r.len() != rows) || rows == 0 {
                return Err(Error::Invalid("entry matrices must be square and matching".into()));
            }
            if *m.get_or_insert(rows) != rows {
                return Err(Error::Invalid("inconsistent matrix sizes".into()));
            }
            if e.mode.len() != 2 * n || e.blade.iter().any(|&i| i == 0 || i > 2 * n) {
                return Err(Error::Invalid("mode or blade out of range".into()));
            }
            let mut idx: Vec<usize> = e.blade.iter().map(|i| i - 1).collect();
            let s = sort_sign(&idx);
            if s == 0 {
                return Err(Error::Invalid("repeated blade index".into()));
            }
            idx.sort();
            let a = DMatrix::from_fn(rows, rows, |r, c0| C64::new(e.re[r][c0], e.im[r][c0]) * s as f64);
            terms.push((blade_from(&idx), mode_from(&e.mode), a));
        }
        Ok(TrigForm::from_real_terms(frame, m.unwrap_or(1), &terms))
    }
}

impl GridForm {
    pub fn to_json(&self) -> GridFormJson {
        let n = self.frame.n;
        let mut entries = Vec::new();
        for (b, c0) in &self.terms {
            for (rb, w) in complex_blade_to_real(n, *b) {
                let vals: Vec<C64> = c0.vals.iter().map(|z| z * w).collect();
                let blade: Vec<usize> = blade_indices(rb).iter().map(|i| i + 1).collect();
                match entries.iter_mut().find(|e: &&mut GridEntryJson| e.blade == blade) {
                    Some(e) => {
                        for (i, z) in vals.iter().enumerate() {
                            e.re[i] += z.re;
                            e.im[i] += z.im;
                        }
                    }
                    None => entries.push(GridEntryJson {
                        blade,
                        re: vals.iter().map(|z| z.re).collect(),
                        im: vals.iter().map(|z| z.im).collect(),
                    }),
                }
            }
        }
        GridFormJson { frame: FrameJson { n }, m: self.m, dims: self.ctx[..2 * n].to_vec(), entries }
    }

    pub fn from_json(j: &GridFormJson) -> Result<Self> {
        let n = j.frame.n;
        if !(1..=MAX_N).contains(&n) || j.dims.len() != 2 * n {
            return Err(Error::Invalid("bad frame or dims".into()));
        }
        let frame = Frame::new(n);
        let mut dims = [1usize; 2 * MAX_N];
        dims[..2 * n].copy_from_slice(&j.dims);
        let len = grid_points(&dims) * j.m * j.m;
        let mut r = GridForm::grid_zero(frame, j.m, dims);
        for e in &j.entries {
            if e.re.len() != len || e.im.len() != len {
                return Err(Error::Invalid("grid entry has wrong length".into()));
            }
            let mut idx: Vec<usize> = e.blade.iter().map(|i| i - 1).collect();
            let s = sort_sign(&idx) as f64;
            idx.sort();
            for (cb, w) in real_blade_to_complex(n, blade_from(&idx)) {
                let vals = e.re.iter().zip(&e.im).map(|(a, b)| C64::new(*a, *b) * w * s).collect();
                r.add_term(cb, &GridMat { m: j.m, dims, vals });
            }
        }
        Ok(r)
    }
}
