use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::mat::{dot, Mat};
use crate::scalar::GaussianRational as G;

/// Subspace of `G^ambient_dim`, stored as the nonzero rows of a reduced row echelon form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<G>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: (0..ambient_dim).map(|i| crate::mat::unit_vec(ambient_dim, i)).collect() }
    }

    pub fn span(ambient_dim: usize, vectors: &[Vec<G>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient_dim);
        }
        let (r, pivots) = Mat::from_rows(vectors).rref();
        Subspace { ambient_dim, basis: (0..pivots.len()).map(|i| r.row(i)).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<G>] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Linear functionals (as row vectors) cutting out the subspace.
    pub fn annihilator(&self) -> Vec<Vec<G>> {
        if self.basis.is_empty() {
            return (0..self.ambient_dim).map(|i| crate::mat::unit_vec(self.ambient_dim, i)).collect();
        }
        Mat::from_rows(&self.basis).kernel_basis()
    }

    pub fn contains(&self, v: &[G]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        self.annihilator().iter().all(|phi| dot(phi, v).is_zero())
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        let ann = self.annihilator();
        other.basis.iter().all(|v| ann.iter().all(|phi| dot(phi, v).is_zero()))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, Error> {
        check_dims(self.ambient_dim, other.ambient_dim)?;
        let mut ann = self.annihilator();
        ann.extend(other.annihilator());
        Ok(solution_space(self.ambient_dim, &ann))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, Error> {
        check_dims(self.ambient_dim, other.ambient_dim)?;
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Ok(Subspace::span(self.ambient_dim, &v))
    }

    pub fn with_vector(&self, v: &[G]) -> Subspace {
        let mut b = self.basis.clone();
        b.push(v.to_vec());
        Subspace::span(self.ambient_dim, &b)
    }

    /// `{v : uᵀ·form·v = 0 for all u in self}`.
    pub fn orthogonal(&self, form: &Mat) -> Subspace {
        assert_eq!(form.rows(), self.ambient_dim);
        if self.basis.is_empty() {
            return Subspace::full(self.ambient_dim);
        }
        let m = &Mat::from_rows(&self.basis) * form;
        Subspace::span(self.ambient_dim, &m.kernel_basis())
    }

    /// Image of the subspace under `m`.
    pub fn map(&self, m: &Mat) -> Subspace {
        assert_eq!(m.cols(), self.ambient_dim);
        let v: Vec<Vec<G>> = self.basis.iter().map(|b| m.apply(b)).collect();
        Subspace::span(m.rows(), &v)
    }

    /// True when every pair of basis vectors pairs to zero.
    pub fn is_isotropic(&self, form: &Mat) -> bool {
        self.basis.iter().all(|u| self.basis.iter().all(|v| form.pair(u, v).is_zero()))
    }

    /// Vectors extending a basis of `sub` (assumed contained in `self`) to a basis of `self`.
    pub fn complement_basis(&self, sub: &Subspace) -> Vec<Vec<G>> {
        let mut cur = sub.clone();
        let mut out = Vec::new();
        for v in &self.basis {
            if !cur.contains(v) {
                cur = cur.with_vector(v);
                out.push(v.clone());
            }
        }
        out
    }
}

fn check_dims(a: usize, b: usize) -> Result<(), Error> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a, found: b })
    }
}

fn solution_space(dim: usize, equations: &[Vec<G>]) -> Subspace {
    if equations.is_empty() {
        return Subspace::full(dim);
    }
    Subspace::span(dim, &Mat::from_rows(equations).kernel_basis())
}

pub fn rank(m: &Mat) -> usize {
    m.rank()
}

pub fn kernel(m: &Mat) -> Subspace {
    Subspace::span(m.cols(), &m.kernel_basis())
}

pub fn image(m: &Mat) -> Subspace {
    let cols: Vec<Vec<G>> = (0..m.cols()).map(|j| m.col(j)).collect();
    Subspace::span(m.rows(), &cols)
}

/// `{v : m·v ∈ w}`.
pub fn preimage(m: &Mat, w: &Subspace) -> Result<Subspace, Error> {
    check_dims(m.rows(), w.ambient_dim())?;
    let ann = w.annihilator();
    if ann.is_empty() {
        return Ok(Subspace::full(m.cols()));
    }
    let phi = &Mat::from_rows(&ann) * m;
    Ok(kernel(&phi))
}

/// Characteristic polynomial `det(t·I − m)`, coefficients by ascending degree (monic).
pub fn char_poly(m: &Mat) -> Result<Vec<G>, Error> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    // Faddeev-LeVerrier
    let n = m.rows();
    let mut c = vec![G::zero(); n + 1];
    c[n] = G::one();
    let mut mk = Mat::zeros(n, n);
    for k in 1..=n {
        let mut next = m * &mk;
        for i in 0..n {
            next[(i, i)] += &c[n - k + 1];
        }
        mk = next;
        let tr = (m * &mk).trace();
        c[n - k] = -&(&tr / &G::from_int(k as i64));
    }
    Ok(c)
}

/// Jordan type of a nilpotent matrix, parts in descending order.
pub fn jordan_partition_nilpotent(m: &Mat) -> Result<Vec<usize>, Error> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let mut ranks = vec![n];
    let mut p = Mat::identity(n);
    while *ranks.last().unwrap() > 0 {
        p = &p * m;
        let r = p.rank();
        if r == *ranks.last().unwrap() {
            return Err(Error::NotNilpotent);
        }
        ranks.push(r);
    }
    // blocks of size ≥ k number ranks[k-1] - ranks[k]
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut parts = Vec::new();
    for k in (1..=at_least.len()).rev() {
        let exact = at_least[k - 1] - at_least.get(k).copied().unwrap_or(0);
        parts.extend(core::iter::repeat(k).take(exact));
    }
    Ok(parts)
}

/// Multiply two polynomials given by ascending coefficients.
pub fn poly_mul(a: &[G], b: &[G]) -> Vec<G> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![G::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

/// `p(t)·t^k`.
pub fn poly_shift(p: &[G], k: usize) -> Vec<G> {
    let mut out = vec![G::zero(); k];
    out.extend_from_slice(p);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::unit_vec;

    fn jordan(sizes: &[usize]) -> Mat {
        let n: usize = sizes.iter().sum();
        let mut m = Mat::zeros(n, n);
        let mut off = 0;
        for &s in sizes {
            for i in 0..s.saturating_sub(1) {
                m[(off + i, off + i + 1)] = G::one();
            }
            off += s;
        }
        m
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Mat::identity(3)), 3);
        assert_eq!(rank(&Mat::zeros(2, 5)), 0);
        let u = Mat::from_ints(&[&[1], &[2], &[-3]]);
        let v = Mat::from_ints(&[&[4, 0, 5]]);
        assert_eq!(rank(&(&u * &v)), 1);
    }

    #[test]
    fn kernel_and_image_examples() {
        assert!(kernel(&Mat::identity(3)).is_zero());
        assert_eq!(kernel(&Mat::zeros(4, 4)), Subspace::full(4));
        let j3 = jordan(&[3]);
        assert_eq!(image(&j3), Subspace::span(3, &[unit_vec(3, 0), unit_vec(3, 1)]));
    }

    #[test]
    fn preimage_examples() {
        let j3 = jordan(&[3]);
        assert_eq!(preimage(&j3, &Subspace::full(3)).unwrap(), Subspace::full(3));
        assert_eq!(preimage(&j3, &Subspace::zero(3)).unwrap(), kernel(&j3));
        let e1 = Subspace::span(3, &[unit_vec(3, 0)]);
        assert_eq!(preimage(&j3, &e1).unwrap(), Subspace::span(3, &[unit_vec(3, 0), unit_vec(3, 1)]));
        assert!(preimage(&j3, &Subspace::zero(2)).is_err());
    }

    #[test]
    fn intersect_examples() {
        let u = Subspace::span(3, &[unit_vec(3, 0), unit_vec(3, 2)]);
        assert_eq!(u.intersect(&u).unwrap(), u);
        let a = Subspace::span(3, &[unit_vec(3, 0)]);
        let b = Subspace::span(3, &[unit_vec(3, 1)]);
        assert!(a.intersect(&b).unwrap().is_zero());
        assert_eq!(a.sum(&b).unwrap().dim(), 2);
    }

    #[test]
    fn char_poly_examples() {
        let z = char_poly(&Mat::zeros(2, 2)).unwrap();
        assert_eq!(z, vec![G::zero(), G::zero(), G::one()]);
        let d = char_poly(&Mat::from_ints(&[&[1, 0], &[0, 2]])).unwrap();
        assert_eq!(d, vec![G::from_int(2), G::from_int(-3), G::one()]);
        assert!(char_poly(&Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn jordan_examples() {
        assert_eq!(jordan_partition_nilpotent(&Mat::zeros(3, 3)).unwrap(), vec![1, 1, 1]);
        assert_eq!(jordan_partition_nilpotent(&jordan(&[4])).unwrap(), vec![4]);
        assert_eq!(jordan_partition_nilpotent(&jordan(&[3, 1])).unwrap(), vec![3, 1]);
        assert_eq!(jordan_partition_nilpotent(&Mat::identity(2)), Err(Error::NotNilpotent));
    }
}
