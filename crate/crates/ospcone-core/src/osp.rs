use alloc::vec::Vec;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::linalg::{char_poly, poly_shift};
use crate::mat::Mat;
use crate::scalar::GaussianRational as G;

/// `(V₀, V₁)` with the symmetric form `S` (dim m) and the symplectic form `J` (dim 2n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OspSpace {
    pub m: usize,
    pub n: usize,
    pub s: Mat,
    pub j: Mat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algebra {
    So,
    Sp,
}

/// An odd element, stored as the map `A: V₀ → V₁` (a 2n×m matrix).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddElement {
    pub space: OspSpace,
    pub a: Mat,
}

/// Canonical forms: `S` antidiagonal with ones, `J` antidiagonal with +1 above the centre and −1 below.
pub fn make_space(m: usize, n: usize) -> Result<OspSpace, Error> {
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut s = Mat::zeros(m, m);
    for i in 0..m {
        s[(i, m - 1 - i)] = G::one();
    }
    let d = 2 * n;
    let mut j = Mat::zeros(d, d);
    for i in 0..d {
        j[(i, d - 1 - i)] = G::from_int(if i < n { 1 } else { -1 });
    }
    Ok(OspSpace { m, n, s, j })
}

impl OspSpace {
    pub fn dim0(&self) -> usize {
        self.m
    }

    pub fn dim1(&self) -> usize {
        2 * self.n
    }

    pub fn form(&self, alg: Algebra) -> &Mat {
        match alg {
            Algebra::So => &self.s,
            Algebra::Sp => &self.j,
        }
    }

    pub fn form_inverse(&self, alg: Algebra) -> Mat {
        match alg {
            Algebra::So => self.s.clone(),
            Algebra::Sp => -&self.j,
        }
    }

    /// Basis of 𝔰𝔬(V₀) or 𝔰𝔭(V₁) as `F⁻¹·K` with `K` running over skew (resp. symmetric) matrix units.
    pub fn algebra_basis(&self, alg: Algebra) -> Vec<Mat> {
        let d = match alg {
            Algebra::So => self.m,
            Algebra::Sp => 2 * self.n,
        };
        let finv = self.form_inverse(alg);
        let mut out = Vec::new();
        for i in 0..d {
            for j in i..d {
                let k = match alg {
                    Algebra::So if i == j => continue,
                    Algebra::So => &Mat::unit(d, d, i, j) - &Mat::unit(d, d, j, i),
                    Algebra::Sp if i == j => Mat::unit(d, d, i, i),
                    Algebra::Sp => &Mat::unit(d, d, i, j) + &Mat::unit(d, d, j, i),
                };
                out.push(&finv * &k);
            }
        }
        out
    }

    pub fn algebra_dim(&self, alg: Algebra) -> usize {
        match alg {
            Algebra::So => self.m * (self.m - 1) / 2,
            Algebra::Sp => self.n * (2 * self.n + 1),
        }
    }

    pub fn algebra_rank(&self, alg: Algebra) -> usize {
        match alg {
            Algebra::So => self.m / 2,
            Algebra::Sp => self.n,
        }
    }

    /// `Mᵀ·F + F·M = 0`.
    pub fn in_algebra(&self, mat: &Mat, alg: Algebra) -> bool {
        let f = self.form(alg);
        mat.rows() == f.rows() && mat.is_square() && (&(&mat.transpose() * f) + &(f * mat)).is_zero()
    }

    /// `gᵀ·F·g = F`.
    pub fn preserves_form(&self, g: &Mat, alg: Algebra) -> bool {
        let f = self.form(alg);
        g.rows() == f.rows() && g.is_square() && &(&g.transpose() * f) * g == *f
    }

    pub fn zero_element(&self) -> OddElement {
        OddElement { space: self.clone(), a: Mat::zeros(2 * self.n, self.m) }
    }

    pub fn element(&self, a: Mat) -> Result<OddElement, Error> {
        if a.rows() != 2 * self.n || a.cols() != self.m {
            return Err(Error::DimensionMismatch { expected: 2 * self.n * self.m, found: a.rows() * a.cols() });
        }
        Ok(OddElement { space: self.clone(), a })
    }
}

/// `A* = S⁻¹·Aᵀ·J`, the unique map with `⟨Av, w⟩_J = (v, A*w)_S`.
pub fn adjoint(x: &OddElement) -> Mat {
    &(&x.space.s * &x.a.transpose()) * &x.space.j
}

pub fn q0(x: &OddElement) -> Mat {
    &adjoint(x) * &x.a
}

pub fn q1(x: &OddElement) -> Mat {
    &x.a * &adjoint(x)
}

/// Checks `⟨A eᵢ, f_j⟩ = (eᵢ, A* f_j)` on all basis pairs.
pub fn adjoint_identity_holds(x: &OddElement) -> bool {
    let astar = adjoint(x);
    let lhs = &x.a.transpose() * &x.space.j;
    let rhs = &x.space.s * &astar;
    lhs == rhs
}

/// `(AA*)^{2n} = 0` and `(A*A)^m = 0`, evaluated separately.
pub fn nilpotency_pair(x: &OddElement) -> (bool, bool) {
    let sp = q1(x).pow(2 * x.space.n).is_zero();
    let so = q0(x).pow(x.space.m).is_zero();
    (sp, so)
}

pub fn is_nilpotent_odd(x: &OddElement) -> bool {
    let (sp, so) = nilpotency_pair(x);
    debug_assert_eq!(sp, so, "nilpotency of AA* and A*A disagree");
    sp
}

fn flatten(m: &Mat) -> Vec<G> {
    m.entries().to_vec()
}

/// Matrix of `(X₀, X₁) ↦ X₁A − AX₀` in the algebra bases (columns) and matrix units of Hom (rows).
pub fn action_matrix(x: &OddElement) -> Mat {
    let sp = &x.space;
    let mut cols = Vec::new();
    for x0 in sp.algebra_basis(Algebra::So) {
        cols.push(flatten(&-&(&x.a * &x0)));
    }
    for x1 in sp.algebra_basis(Algebra::Sp) {
        cols.push(flatten(&(&x1 * &x.a)));
    }
    Mat::from_cols(2 * sp.n * sp.m, &cols)
}

pub fn orbit_dimension(x: &OddElement) -> usize {
    action_matrix(x).rank()
}

pub fn centralizer_dim_even(space: &OspSpace, mat: &Mat, alg: Algebra) -> Result<usize, Error> {
    if !space.in_algebra(mat, alg) {
        return Err(Error::NotInAlgebra);
    }
    let basis = space.algebra_basis(alg);
    let d = mat.rows();
    let cols: Vec<Vec<G>> = basis.iter().map(|y| flatten(&(&(mat * y) - &(y * mat)))).collect();
    Ok(basis.len() - Mat::from_cols(d * d, &cols).rank())
}

pub fn is_regular_even(space: &OspSpace, mat: &Mat, alg: Algebra) -> Result<bool, Error> {
    Ok(centralizer_dim_even(space, mat, alg)? == space.algebra_rank(alg))
}

/// Pfaffian of a skew-symmetric matrix by recursive Schur-complement reduction.
pub fn pfaffian(a: &Mat) -> G {
    let d = a.rows();
    if d == 0 {
        return G::one();
    }
    if d % 2 == 1 {
        return G::zero();
    }
    let Some(p) = (1..d).find(|&j| !a[(0, j)].is_zero()) else { return G::zero() };
    // move the pivot column to position 1; each transposition flips the sign
    let mut perm: Vec<usize> = (0..d).collect();
    perm.swap(1, p);
    let sign = if p == 1 { G::one() } else { G::from_int(-1) };
    let b = Mat::from_vec(d, d, (0..d * d).map(|k| a[(perm[k / d], perm[k % d])].clone()).collect());
    let piv = b[(0, 1)].clone();
    let inv = piv.inv().unwrap();
    let r = d - 2;
    // R + Qᵀ P⁻¹ Q with P = [[0, a], [−a, 0]], P⁻¹ = [[0, −1/a], [1/a, 0]]
    let mut s = Mat::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let q0i = &b[(0, i + 2)];
            let q1i = &b[(1, i + 2)];
            let q0j = &b[(0, j + 2)];
            let q1j = &b[(1, j + 2)];
            let t = &(q1i * q0j) - &(q0i * q1j);
            s[(i, j)] = &b[(i + 2, j + 2)] + &(&t * &inv);
        }
    }
    &(&sign * &piv) * &pfaffian(&s)
}

/// Coefficients of `t^{d−2j}` of `χ_M`, `j = 1..=count`.
fn even_coefficients(m: &Mat, count: usize) -> Vec<G> {
    let cp = char_poly(m).expect("square");
    let d = m.rows();
    (1..=count).map(|j| cp[d - 2 * j].clone()).collect()
}

/// Generators of the invariant ring pulled back along `q₀` (m ≤ 2n+1) or `q₁` (m > 2n+1).
pub fn basic_invariants(x: &OddElement) -> Vec<G> {
    let (m, n) = (x.space.m, x.space.n);
    if m <= 2 * n + 1 {
        let q = q0(x);
        let k = m / 2;
        if m % 2 == 1 {
            even_coefficients(&q, k)
        } else {
            let mut v = even_coefficients(&q, k - 1);
            v.push(pfaffian(&(&x.space.s * &q)));
            v
        }
    } else {
        even_coefficients(&q1(x), n)
    }
}

/// Number of parameters of the canonical Cartan element hit by `construct_preimage`.
pub fn invariant_count(m: usize, n: usize) -> usize {
    if m <= 2 * n + 1 {
        m / 2
    } else {
        n
    }
}

/// Diagonal Cartan element `diag(λ₁..λ_p, 0.., −λ_p..−λ₁)` of size `d`.
pub fn cartan_element(d: usize, params: &[G]) -> Mat {
    let mut m = Mat::zeros(d, d);
    for (i, l) in params.iter().enumerate() {
        m[(i, i)] = l.clone();
        m[(d - 1 - i, d - 1 - i)] = -l;
    }
    m
}

/// An element whose `q₀` (m ≤ 2n+1) or `q₁` (m > 2n+1) is the Cartan element with parameters `params`.
pub fn construct_preimage(space: &OspSpace, params: &[G]) -> Result<OddElement, Error> {
    let (m, n) = (space.m, space.n);
    let p = invariant_count(m, n);
    if params.len() != p {
        return Err(Error::InfeasibleParams(alloc::format!("expected {p} parameters, got {}", params.len())));
    }
    let mut a = Mat::zeros(2 * n, m);
    for (i, l) in params.iter().enumerate() {
        a[(i, i)] = G::one();
        a[(2 * n - 1 - i, m - 1 - i)] = -l;
    }
    space.element(a)
}

pub fn small_rational<R: Rng>(rng: &mut R, num: i64, den: i64) -> G {
    let p = rng.gen_range(-num..=num);
    let q = rng.gen_range(1..=den);
    G::from_frac(p, q)
}

pub fn random_odd_element(space: &OspSpace, seed: u64) -> OddElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f64_645f_656c_6d74);
    let (r, c) = (2 * space.n, space.m);
    let data = (0..r * c).map(|_| small_rational(&mut rng, 3, 2)).collect();
    OddElement { space: space.clone(), a: Mat::from_vec(r, c, data) }
}

fn exp_nilpotent(x: &Mat) -> Mat {
    let d = x.rows();
    let mut out = Mat::identity(d);
    let mut term = Mat::identity(d);
    for k in 1..=d {
        term = (&term * x).scale(&G::from_frac(1, k as i64));
        if term.is_zero() {
            break;
        }
        out = &out + &term;
    }
    out
}

/// Deterministic form-preserving matrix of determinant one, a product of root-group and torus factors.
pub fn random_group_element(space: &OspSpace, alg: Algebra, seed: u64) -> Mat {
    let salt = match alg {
        Algebra::So => 0x736f,
        Algebra::Sp => 0x7370,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt);
    let basis = space.algebra_basis(alg);
    let d = space.form(alg).rows();
    let mut g = Mat::identity(d);
    if basis.is_empty() {
        return g;
    }
    for _ in 0..2 * d + 2 {
        let x = &basis[rng.gen_range(0..basis.len())];
        let t = loop {
            let t = small_rational(&mut rng, 2, 2);
            if !t.is_zero() {
                break t;
            }
        };
        let factor = if x.pow(d).is_zero() {
            exp_nilpotent(&x.scale(&t))
        } else {
            // diagonal torus direction: entries in {−1, 0, 1} become c^{±1}
            let c = &t + &G::from_int(if t.re.is_positive() { 1 } else { -1 });
            let cinv = c.inv().unwrap();
            let mut h = Mat::identity(d);
            for i in 0..d {
                let e = &x[(i, i)];
                if *e == G::one() {
                    h[(i, i)] = c.clone();
                } else if *e == G::from_int(-1) {
                    h[(i, i)] = cinv.clone();
                }
            }
            h
        };
        g = &g * &factor;
    }
    g
}

/// Inverse of a form-preserving `g`: `F⁻¹·gᵀ·F`.
pub fn group_inverse(space: &OspSpace, g: &Mat, alg: Algebra) -> Mat {
    &(&space.form_inverse(alg) * &g.transpose()) * space.form(alg)
}

/// `(g₀, g₁)·A = g₁·A·g₀⁻¹`.
pub fn act(x: &OddElement, g0: &Mat, g1: &Mat) -> OddElement {
    let g0inv = group_inverse(&x.space, g0, Algebra::So);
    OddElement { space: x.space.clone(), a: &(g1 * &x.a) * &g0inv }
}

/// `χ_{AA*}(t)·t^m` and `χ_{A*A}(t)·t^{2n}`.
pub fn characteristic_transfer(x: &OddElement) -> (Vec<G>, Vec<G>) {
    let l = poly_shift(&char_poly(&q1(x)).unwrap(), x.space.m);
    let r = poly_shift(&char_poly(&q0(x)).unwrap(), 2 * x.space.n);
    (l, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let s = make_space(1, 1).unwrap();
        assert_eq!(s.s, Mat::from_ints(&[&[1]]));
        assert_eq!(s.j, Mat::from_ints(&[&[0, 1], &[-1, 0]]));
        let s = make_space(2, 1).unwrap();
        assert_eq!(s.s, Mat::from_ints(&[&[0, 1], &[1, 0]]));
        let s = make_space(3, 2).unwrap();
        assert_eq!(
            s.j,
            Mat::from_ints(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, -1, 0, 0], &[-1, 0, 0, 0]])
        );
        assert_eq!(make_space(0, 1), Err(Error::ZeroDimension));
    }

    #[test]
    fn algebra_bases_have_expected_dimension() {
        let s = make_space(5, 2).unwrap();
        for alg in [Algebra::So, Algebra::Sp] {
            let b = s.algebra_basis(alg);
            assert_eq!(b.len(), s.algebra_dim(alg));
            assert!(b.iter().all(|x| s.in_algebra(x, alg)));
        }
    }

    #[test]
    fn zero_element_facts() {
        let s = make_space(3, 1).unwrap();
        let z = s.zero_element();
        assert!(adjoint(&z).is_zero());
        assert!(q0(&z).is_zero() && q1(&z).is_zero());
        assert!(is_nilpotent_odd(&z));
        assert_eq!(orbit_dimension(&z), 0);
        assert!(basic_invariants(&z).iter().all(G::is_zero));
    }

    #[test]
    fn invertible_q1_is_not_nilpotent() {
        let s = make_space(2, 1).unwrap();
        let x = s.element(Mat::identity(2)).unwrap();
        assert!(!q1(&x).pow(2).is_zero());
        assert!(!is_nilpotent_odd(&x));
    }

    #[test]
    fn sp2_centralizers() {
        let s = make_space(1, 1).unwrap();
        let z = Mat::zeros(2, 2);
        assert_eq!(centralizer_dim_even(&s, &z, Algebra::Sp).unwrap(), 3);
        assert!(!is_regular_even(&s, &z, Algebra::Sp).unwrap());
        let e = Mat::from_ints(&[&[0, 1], &[0, 0]]);
        assert_eq!(centralizer_dim_even(&s, &e, Algebra::Sp).unwrap(), 1);
        assert!(is_regular_even(&s, &e, Algebra::Sp).unwrap());
        assert_eq!(centralizer_dim_even(&s, &Mat::identity(2), Algebra::Sp), Err(Error::NotInAlgebra));
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let s = make_space(4, 2).unwrap();
        let x = random_odd_element(&s, 7);
        let k = &s.s * &q0(&x);
        let pf = pfaffian(&k);
        assert_eq!(&pf * &pf, k.det());
        let std4 = Mat::from_ints(&[&[0, 1, 2, 3], &[-1, 0, 4, 5], &[-2, -4, 0, 6], &[-3, -5, -6, 0]]);
        // a·f − b·e + c·d
        assert_eq!(pfaffian(&std4), G::from_int(6 - 10 + 12));
    }

    #[test]
    fn group_elements_preserve_forms() {
        let s = make_space(4, 2).unwrap();
        for alg in [Algebra::So, Algebra::Sp] {
            let g = random_group_element(&s, alg, 3);
            assert_eq!(g, random_group_element(&s, alg, 3));
            assert!(s.preserves_form(&g, alg));
            assert_eq!(g.det(), G::one());
            let h = random_group_element(&s, alg, 4);
            assert!(s.preserves_form(&(&g * &h), alg));
            assert_eq!(&g * &group_inverse(&s, &g, alg), Mat::identity(g.rows()));
        }
    }

    #[test]
    fn preimage_hits_cartan_invariants() {
        let s = make_space(3, 2).unwrap();
        let l = G::from_frac(2, 3);
        let x = construct_preimage(&s, &[l.clone()]).unwrap();
        let h = cartan_element(3, &[l]);
        assert_eq!(q0(&x), h);
        assert_eq!(even_coefficients(&q0(&x), 1), even_coefficients(&h, 1));
        let zero = construct_preimage(&s, &[G::zero()]).unwrap();
        assert!(is_nilpotent_odd(&zero));
        assert!(construct_preimage(&s, &[]).is_err());
    }

    #[test]
    fn orthonormal_recipe_reaches_the_cartan_subalgebra() {
        // V₀ with an orthonormal basis and V₁ with a standard symplectic basis, written in canonical coordinates
        let (m, n) = (5usize, 2usize);
        let s = make_space(m, n).unwrap();
        let half = G::from_frac(1, 2);
        let mut ortho: Vec<Vec<G>> = Vec::new();
        for i in 0..m / 2 {
            let mut w = alloc::vec![G::zero(); m];
            w[i] = G::one();
            w[m - 1 - i] = half.clone();
            let mut z = alloc::vec![G::zero(); m];
            z[i] = G::i();
            z[m - 1 - i] = -&(&G::i() * &half);
            ortho.push(w);
            ortho.push(z);
        }
        ortho.push(crate::mat::unit_vec(m, m / 2));
        let gram = Mat::from_cols(m, &ortho);
        assert_eq!(&(&gram.transpose() * &s.s) * &gram, Mat::identity(m));
        let lam = [G::from_frac(1, 3), G::from_int(-2)];
        // v_i = e_i + i·e_{i+n}, v_{n+i} = λ_i(e_i − i·e_{i+n}) in the orthonormal basis
        let mut v: Vec<Vec<G>> = Vec::new();
        for i in 0..n {
            v.push(crate::mat::vec_add(&ortho[i], &crate::mat::vec_scale(&ortho[i + n], &G::i())));
        }
        for i in 0..n {
            let d = crate::mat::vec_add(&ortho[i], &crate::mat::vec_scale(&ortho[i + n], &-&G::i()));
            v.push(crate::mat::vec_scale(&d, &lam[i]));
        }
        // symplectic basis p_1..p_n, q_1..q_n
        let targets: Vec<usize> = (0..n).chain((0..n).map(|i| 2 * n - 1 - i)).collect();
        let mut a = Mat::zeros(2 * n, m);
        for (k, vk) in v.iter().enumerate() {
            let row = s.s.apply(vk);
            for c in 0..m {
                a[(targets[k], c)] = &a[(targets[k], c)] + &row[c];
            }
        }
        let x = s.element(a).unwrap();
        let h = q1(&x);
        let diag: Vec<G> = (0..2 * n).map(|i| h[(i, i)].clone()).collect();
        assert_eq!(h, Mat::diag(&diag));
        let two = G::from_int(2);
        let expected = cartan_element(2 * n, &[&two * &lam[0], &two * &lam[1]]);
        assert!(h == expected || h == -&expected);
    }

    #[test]
    fn adjoint_identity_on_random_elements() {
        let s = make_space(4, 3).unwrap();
        let x = random_odd_element(&s, 11);
        assert!(adjoint_identity_holds(&x));
        assert!(s.in_algebra(&q0(&x), Algebra::So));
        assert!(s.in_algebra(&q1(&x), Algebra::Sp));
        let (l, r) = characteristic_transfer(&x);
        assert_eq!(l, r);
    }
}
