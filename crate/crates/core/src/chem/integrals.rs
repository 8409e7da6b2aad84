//! Closed-form integrals over contracted s-type Gaussians (STO-3G hydrogen).

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::molecule::MoleculeSpec;
use crate::error::{Error, Result};

/// STO-3G hydrogen 1s (zeta = 1.24): primitive exponents and contraction
/// coefficients of Hehre, Stewart & Pople (1969) as distributed by the Basis
/// Set Exchange.
pub const STO3G_H_EXPONENTS: [f64; 3] = [3.42525091, 0.62391373, 0.16885540];
pub const STO3G_H_COEFFICIENTS: [f64; 3] = [0.15432897, 0.53532814, 0.44463454];

/// Zeroth-order Boys function `F0(t) = 1/2 sqrt(pi/t) erf(sqrt t)`.
pub fn boys_f0(t: f64) -> f64 {
    if t < 1e-10 {
        // Taylor series; the closed form loses precision as t -> 0.
        1.0 - t / 3.0
    } else {
        let st = t.sqrt();
        0.5 * (PI / t).sqrt() * libm::erf(st)
    }
}

/// Contracted s function: primitives `(exponent, coefficient * norm)` on a
/// centre in bohr.
#[derive(Clone, Debug)]
struct SShell {
    center: [f64; 3],
    primitives: Vec<(f64, f64)>,
}

impl SShell {
    fn sto3g_hydrogen(center: [f64; 3]) -> Self {
        let mut primitives: Vec<(f64, f64)> = STO3G_H_EXPONENTS
            .iter()
            .zip(STO3G_H_COEFFICIENTS)
            .map(|(&a, d)| (a, d * (2.0 * a / PI).powf(0.75)))
            .collect();
        // renormalize the contraction so that <phi|phi> = 1
        let mut s = 0.0;
        for &(a, ca) in &primitives {
            for &(b, cb) in &primitives {
                s += ca * cb * (PI / (a + b)).powf(1.5);
            }
        }
        let scale = 1.0 / s.sqrt();
        primitives.iter_mut().for_each(|p| p.1 *= scale);
        SShell { center, primitives }
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn product_center(a: f64, ra: &[f64; 3], b: f64, rb: &[f64; 3]) -> [f64; 3] {
    let p = a + b;
    [0, 1, 2].map(|k| (a * ra[k] + b * rb[k]) / p)
}

fn overlap_prim(a: f64, ra: &[f64; 3], b: f64, rb: &[f64; 3]) -> f64 {
    let p = a + b;
    (PI / p).powf(1.5) * (-a * b / p * dist2(ra, rb)).exp()
}

fn kinetic_prim(a: f64, ra: &[f64; 3], b: f64, rb: &[f64; 3]) -> f64 {
    let p = a + b;
    let mu = a * b / p;
    let r2 = dist2(ra, rb);
    mu * (3.0 - 2.0 * mu * r2) * (PI / p).powf(1.5) * (-mu * r2).exp()
}

fn nuclear_prim(a: f64, ra: &[f64; 3], b: f64, rb: &[f64; 3], charge: f64, rc: &[f64; 3]) -> f64 {
    let p = a + b;
    let rp = product_center(a, ra, b, rb);
    -2.0 * PI / p * charge * (-a * b / p * dist2(ra, rb)).exp() * boys_f0(p * dist2(&rp, rc))
}

#[allow(clippy::too_many_arguments)]
fn eri_prim(
    a: f64,
    ra: &[f64; 3],
    b: f64,
    rb: &[f64; 3],
    c: f64,
    rc: &[f64; 3],
    d: f64,
    rd: &[f64; 3],
) -> f64 {
    let p = a + b;
    let q = c + d;
    let rp = product_center(a, ra, b, rb);
    let rq = product_center(c, rc, d, rd);
    2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt())
        * (-a * b / p * dist2(ra, rb) - c * d / q * dist2(rc, rd)).exp()
        * boys_f0(p * q / (p + q) * dist2(&rp, &rq))
}

/// Two-electron integrals `(ij|kl)` in chemists' notation, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoElectronIntegrals {
    n: usize,
    data: Vec<f64>,
}

impl TwoElectronIntegrals {
    pub fn zeros(n: usize) -> Self {
        TwoElectronIntegrals { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.offset(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let o = self.offset(i, j, k, l);
        self.data[o] = v;
    }

    /// Sets all eight permutation-equivalent entries.
    pub fn set_symmetric(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        for (a, b, c, d) in [
            (i, j, k, l),
            (j, i, k, l),
            (i, j, l, k),
            (j, i, l, k),
            (k, l, i, j),
            (l, k, i, j),
            (k, l, j, i),
            (l, k, j, i),
        ] {
            self.set(a, b, c, d, v);
        }
    }

    /// `(pq|rs) = sum C_ip C_jq C_kr C_ls (ij|kl)`, one index at a time.
    pub fn transform(&self, c: &DMatrix<f64>) -> TwoElectronIntegrals {
        let n = self.n;
        let m = c.ncols();
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for axis in 0..4 {
            let mut next_dims = dims;
            next_dims[axis] = m;
            let mut next = vec![0.0; next_dims.iter().product()];
            let stride = |d: &[usize; 4], ax: usize| d[ax + 1..].iter().product::<usize>();
            let in_stride = stride(&dims, axis);
            let out_stride = stride(&next_dims, axis);
            let outer: usize = dims[..axis].iter().product();
            for o in 0..outer {
                for p in 0..m {
                    for i in 0..dims[axis] {
                        let cip = c[(i, p)];
                        if cip == 0.0 {
                            continue;
                        }
                        let src = o * dims[axis] * in_stride + i * in_stride;
                        let dst = o * m * out_stride + p * out_stride;
                        for t in 0..in_stride {
                            next[dst + t] += cip * cur[src + t];
                        }
                    }
                }
            }
            cur = next;
            dims = next_dims;
        }
        TwoElectronIntegrals { n: m, data: cur }
    }
}

/// Atomic-orbital integrals for one molecule.
#[derive(Clone, Debug)]
pub struct AoIntegrals {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: TwoElectronIntegrals,
}

impl AoIntegrals {
    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }

    pub fn n_basis(&self) -> usize {
        self.overlap.nrows()
    }
}

/// Overlap, kinetic, nuclear-attraction and electron-repulsion integrals in
/// the STO-3G basis. Hydrogen only.
pub fn sto3g_integrals(mol: &MoleculeSpec) -> Result<AoIntegrals> {
    let mut shells = Vec::with_capacity(mol.atoms.len());
    let mut nuclei = Vec::with_capacity(mol.atoms.len());
    for atom in &mol.atoms {
        if atom.atomic_number()? != 1 {
            return Err(Error::UnsupportedElement { element: atom.element.clone() });
        }
        shells.push(SShell::sto3g_hydrogen(atom.position_bohr()));
        nuclei.push((1.0, atom.position_bohr()));
    }
    let n = shells.len();
    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (si, sj) = (&shells[i], &shells[j]);
            let (mut s, mut t, mut v) = (0.0, 0.0, 0.0);
            for &(a, ca) in &si.primitives {
                for &(b, cb) in &sj.primitives {
                    let w = ca * cb;
                    s += w * overlap_prim(a, &si.center, b, &sj.center);
                    t += w * kinetic_prim(a, &si.center, b, &sj.center);
                    for (z, rc) in &nuclei {
                        v += w * nuclear_prim(a, &si.center, b, &sj.center, *z, rc);
                    }
                }
            }
            overlap[(i, j)] = s;
            overlap[(j, i)] = s;
            kinetic[(i, j)] = t;
            kinetic[(j, i)] = t;
            nuclear[(i, j)] = v;
            nuclear[(j, i)] = v;
        }
    }

    let mut eri = TwoElectronIntegrals::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let ij = i * (i + 1) / 2 + j;
            for k in 0..n {
                for l in 0..=k {
                    let kl = k * (k + 1) / 2 + l;
                    if kl > ij {
                        continue;
                    }
                    let (si, sj, sk, sl) = (&shells[i], &shells[j], &shells[k], &shells[l]);
                    let mut value = 0.0;
                    for &(a, ca) in &si.primitives {
                        for &(b, cb) in &sj.primitives {
                            for &(c, cc) in &sk.primitives {
                                for &(d, cd) in &sl.primitives {
                                    value += ca * cb * cc * cd
                                        * eri_prim(
                                            a, &si.center, b, &sj.center, c, &sk.center, d,
                                            &sl.center,
                                        );
                                }
                            }
                        }
                    }
                    eri.set_symmetric(i, j, k, l, value);
                }
            }
        }
    }
    Ok(AoIntegrals { overlap, kinetic, nuclear, eri })
}
