use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use crate::error::Error;
use crate::flags::{respects, FlagCase, IsotropicFlag, Side};
use crate::mat::Mat;
use crate::osp::{make_space, OspSpace};

/// A weight of 𝔰𝔬(m)⊕𝔰𝔭(2n): coefficients of `ε₁..ε_{⌊m/2⌋}` and `δ₁..δ_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    pub m: usize,
    pub n: usize,
    pub eps: Vec<i64>,
    pub delta: Vec<i64>,
}

impl Weight {
    pub fn zero(m: usize, n: usize) -> Self {
        Weight { m, n, eps: vec![0; m / 2], delta: vec![0; n] }
    }

    /// `ε_i`, 1-based.
    pub fn eps(m: usize, n: usize, i: usize) -> Self {
        let mut w = Self::zero(m, n);
        w.eps[i - 1] = 1;
        w
    }

    /// `δ_i`, 1-based.
    pub fn delta(m: usize, n: usize, i: usize) -> Self {
        let mut w = Self::zero(m, n);
        w.delta[i - 1] = 1;
        w
    }

    pub fn scale(&self, c: i64) -> Self {
        Weight {
            eps: self.eps.iter().map(|x| x * c).collect(),
            delta: self.delta.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.eps.iter().chain(&self.delta).all(|&x| x == 0)
    }

    fn same_shape(&self, o: &Weight) -> bool {
        self.m == o.m && self.n == o.n
    }
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, o: &Weight) -> Weight {
        assert!(self.same_shape(o), "adding weights of different shapes");
        Weight {
            m: self.m,
            n: self.n,
            eps: self.eps.iter().zip(&o.eps).map(|(a, b)| a + b).collect(),
            delta: self.delta.iter().zip(&o.delta).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        self.scale(-1)
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, o: &Weight) -> Weight {
        self + &(-o)
    }
}

impl fmt::Display for Weight {
    /// `2*e1-d1-d2`; `0` for the zero weight.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let terms = self
            .eps
            .iter()
            .enumerate()
            .map(|(i, &c)| ('e', i + 1, c))
            .chain(self.delta.iter().enumerate().map(|(i, &c)| ('d', i + 1, c)));
        for (letter, i, c) in terms.filter(|t| t.2 != 0) {
            if c < 0 {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            if c.abs() != 1 {
                write!(f, "{}*", c.abs())?;
            }
            write!(f, "{letter}{i}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn eps_sum(m: usize, n: usize, upto: usize) -> Weight {
    let mut w = Weight::zero(m, n);
    w.eps[..upto].iter_mut().for_each(|x| *x = 1);
    w
}

fn delta_sum(m: usize, n: usize, upto: usize) -> Weight {
    let mut w = Weight::zero(m, n);
    w.delta[..upto].iter_mut().for_each(|x| *x = 1);
    w
}

/// Lower bound for vanishing, tabulated per family.
pub fn closed_form_bound(m: usize, n: usize) -> Result<Weight, Error> {
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension);
    }
    let w = if m == 2 * n + 1 {
        &eps_sum(m, n, n) - &delta_sum(m, n, n)
    } else if m + 1 == 2 * n {
        &eps_sum(m, n, n - 1) - &delta_sum(m, n, n)
    } else if m == 2 * n || m == 2 * n + 2 {
        Weight::zero(m, n)
    } else if m > 2 * n + 2 {
        (&delta_sum(m, n, n) - &eps_sum(m, n, n)).scale((m - 2 * n - 2) as i64)
    } else if m % 2 == 0 {
        let k = m / 2;
        (&eps_sum(m, n, k) - &delta_sum(m, n, k)).scale(2 * (n - k) as i64)
    } else {
        let k = m / 2;
        (&eps_sum(m, n, k) - &delta_sum(m, n, k + 1)).scale((2 * n - 2 * k - 1) as i64)
    };
    Ok(w)
}

/// Torus weight of the `c`-th flag-adapted basis vector of V₀ (0-based).
pub fn weight_v0(m: usize, n: usize, c: usize) -> Weight {
    let h = m / 2;
    if c < h {
        Weight::eps(m, n, c + 1)
    } else if c >= m - h {
        -&Weight::eps(m, n, m - c)
    } else {
        Weight::zero(m, n)
    }
}

/// Torus weight of the `j`-th flag-adapted basis vector of V₁ (0-based).
pub fn weight_v1(m: usize, n: usize, j: usize) -> Weight {
    if j < n {
        Weight::delta(m, n, j + 1)
    } else {
        -&Weight::delta(m, n, 2 * n - j)
    }
}

/// Reference flags in the bases given by the columns of `g0`, `g1`.
fn adapted_flags(space: &OspSpace, g0: &Mat, g1: &Mat) -> (IsotropicFlag, IsotropicFlag, FlagCase) {
    let case = FlagCase::of(space.m, space.n);
    let (k0, k1) = case.kinds(space.n);
    let f0 = IsotropicFlag::coordinate(Side::V0, space, k0).transform(g0);
    let f1 = IsotropicFlag::coordinate(Side::V1, space, k1).transform(g1);
    (f0, f1, case)
}

/// `|Ψ|` for the fiber over the flags adapted to the bases `g0`, `g1`.
pub fn fiber_weight_sum_in(space: &OspSpace, g0: &Mat, g1: &Mat) -> Result<Weight, Error> {
    let (m, n) = (space.m, space.n);
    let (f0, f1, case) = adapted_flags(space, g0, g1);
    let g0_inv = g0.inverse().ok_or(Error::NotSquare { rows: m, cols: m })?;
    let mut sum = Weight::zero(m, n);
    for r in 0..2 * n {
        for c in 0..m {
            let a = &(g1 * &Mat::unit(2 * n, m, r, c)) * &g0_inv;
            if respects(&space.element(a)?, &f0, &f1, case)? {
                sum = &sum + &(&weight_v1(m, n, r) - &weight_v0(m, n, c));
            }
        }
    }
    Ok(sum)
}

pub fn fiber_weight_sum(m: usize, n: usize) -> Result<Weight, Error> {
    let space = make_space(m, n)?;
    fiber_weight_sum_in(&space, &Mat::identity(m), &Mat::identity(2 * n))
}

/// The orthogonal reflection exchanging the two middle basis vectors (m even).
pub fn middle_swap(m: usize) -> Mat {
    let mut g = Mat::identity(m);
    if m >= 2 && m % 2 == 0 {
        let h = m / 2;
        g = Mat::from_cols(
            m,
            &(0..m)
                .map(|c| {
                    let k = if c == h - 1 { h } else if c == h { h - 1 } else { c };
                    crate::mat::unit_vec(m, k)
                })
                .collect::<Vec<_>>(),
        );
    }
    g
}

/// Sum of positive roots of 𝔰𝔬(m) on indices above `skip`.
fn so_positive_sum(m: usize, n: usize, skip: usize) -> Weight {
    let h = m / 2;
    let mut w = Weight::zero(m, n);
    for i in skip..h {
        // (εᵢ−εⱼ) + (εᵢ+εⱼ) over j > i
        w.eps[i] += 2 * (h - i - 1) as i64;
        if m % 2 == 1 {
            w.eps[i] += 1;
        }
    }
    w
}

/// Sum of positive roots of 𝔰𝔭(2n) on indices above `skip`.
fn sp_positive_sum(m: usize, n: usize, skip: usize) -> Weight {
    let mut w = Weight::zero(m, n);
    for i in skip..n {
        w.delta[i] += 2 * (n - i - 1) as i64 + 2;
    }
    w
}

/// `|Δ(𝔫)|` for the stabilizer of the case's reference flags.
pub fn nilradical_weight_sum(m: usize, n: usize) -> Result<Weight, Error> {
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension);
    }
    let all = &so_positive_sum(m, n, 0) + &sp_positive_sum(m, n, 0);
    let levi = match FlagCase::of(m, n) {
        FlagCase::D2a { k } => sp_positive_sum(m, n, k),
        FlagCase::D2b { k } => sp_positive_sum(m, n, k + 1),
        FlagCase::D2c => so_positive_sum(m, n, n),
        _ => Weight::zero(m, n),
    };
    Ok(&all - &levi)
}

/// Doubled simple-root coordinates of an 𝔰𝔬(m) weight; `None` if it lies outside the root span.
fn so_coords(m: usize, v: &[i64]) -> Option<Vec<i64>> {
    let h = m / 2;
    if h == 0 {
        return Some(Vec::new());
    }
    if m == 2 {
        // 𝔰𝔬(2) has no roots
        return (v[0] == 0).then(Vec::new);
    }
    let partial: Vec<i64> = v.iter().scan(0, |s, &x| {
        *s += x;
        Some(*s)
    })
    .collect();
    if m % 2 == 1 {
        return Some(partial.iter().map(|s| 2 * s).collect());
    }
    let mut c: Vec<i64> = partial[..h - 2].iter().map(|s| 2 * s).collect();
    let s = partial[h - 2];
    c.push(s - v[h - 1]);
    c.push(s + v[h - 1]);
    Some(c)
}

/// Doubled simple-root coordinates of an 𝔰𝔭(2n) weight.
fn sp_coords(v: &[i64]) -> Vec<i64> {
    let n = v.len();
    let mut c = Vec::with_capacity(n);
    let mut s = 0;
    for (i, &x) in v.iter().enumerate() {
        s += x;
        c.push(if i + 1 < n { 2 * s } else { s });
    }
    c
}

/// Simple-root coordinates of `w` (each doubled, so that all are integers).
pub fn simple_root_coords(w: &Weight) -> Option<(Vec<i64>, Vec<i64>)> {
    Some((so_coords(w.m, &w.eps)?, sp_coords(&w.delta)))
}

/// `ν ⊴ μ`: `μ − ν` is a nonnegative rational combination of simple roots.
pub fn dominance_leq(nu: &Weight, mu: &Weight) -> Result<bool, Error> {
    if !nu.same_shape(mu) || nu.eps.len() != mu.eps.len() || nu.delta.len() != mu.delta.len() {
        return Err(Error::ShapeMismatch);
    }
    Ok(match simple_root_coords(&(mu - nu)) {
        Some((a, b)) => a.iter().chain(&b).all(|&c| c >= 0),
        None => false,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub m: usize,
    pub n: usize,
    pub closed_form: Weight,
    pub psi: Weight,
    pub delta_n: Weight,
}

impl BoundReport {
    pub fn matches(&self) -> bool {
        self.closed_form == &self.psi - &self.delta_n
    }
}

pub fn bound_report(m: usize, n: usize) -> Result<BoundReport, Error> {
    Ok(BoundReport {
        m,
        n,
        closed_form: closed_form_bound(m, n)?,
        psi: fiber_weight_sum(m, n)?,
        delta_n: nilradical_weight_sum(m, n)?,
    })
}

pub fn family_item(m: usize, n: usize) -> &'static str {
    if m == 2 * n + 1 {
        "a"
    } else if m + 1 == 2 * n {
        "b"
    } else if m == 2 * n || m == 2 * n + 2 {
        "c"
    } else if m > 2 * n + 2 {
        "f"
    } else if m % 2 == 0 {
        "d"
    } else {
        "e"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn w(m: usize, n: usize, eps: &[i64], delta: &[i64]) -> Weight {
        Weight { m, n, eps: eps.to_vec(), delta: delta.to_vec() }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_bound(5, 2).unwrap(), w(5, 2, &[1, 1], &[-1, -1]));
        assert!(closed_form_bound(4, 2).unwrap().is_zero());
        assert_eq!(closed_form_bound(2, 2).unwrap(), w(2, 2, &[2], &[-2, 0]));
        assert_eq!(format!("{}", closed_form_bound(5, 2).unwrap()), "e1+e2-d1-d2");
    }

    #[test]
    fn small_root_sums() {
        assert_eq!(sp_positive_sum(1, 1, 0), w(1, 1, &[], &[2]));
        assert_eq!(so_positive_sum(3, 1, 0), w(3, 1, &[1], &[0]));
        assert_eq!(so_positive_sum(4, 1, 0), w(4, 1, &[2, 0], &[0]));
    }

    #[test]
    fn psi_at_3_1() {
        // allowed: E₁₂, E₁₃, E₂₃ (1-based rows f, columns e)
        let expect = &(&(&w(3, 1, &[0], &[1]) - &w(3, 1, &[0], &[0])) + &(&w(3, 1, &[0], &[1]) + &w(3, 1, &[1], &[0])))
            + &(&w(3, 1, &[0], &[-1]) + &w(3, 1, &[1], &[0]));
        assert_eq!(fiber_weight_sum(3, 1).unwrap(), expect);
    }

    #[test]
    fn identity_at_5_2() {
        assert!(bound_report(5, 2).unwrap().matches());
    }

    #[test]
    fn dominance_examples() {
        let mu = w(5, 2, &[1, 0], &[0, 1]);
        assert!(dominance_leq(&mu, &mu).unwrap());
        let alpha = w(5, 2, &[0, 1], &[0, 0]);
        assert!(dominance_leq(&mu, &(&mu + &alpha)).unwrap());
        assert!(!dominance_leq(&(&mu + &alpha), &mu).unwrap());
        assert!(dominance_leq(&Weight::zero(5, 2), &w(5, 2, &[1, -1], &[0, 0])).unwrap());
        assert_eq!(dominance_leq(&Weight::zero(5, 2), &Weight::zero(4, 2)), Err(Error::ShapeMismatch));
        // rational: ε₁ in D₂ is half of (ε₁−ε₂) + (ε₁+ε₂)
        assert!(dominance_leq(&Weight::zero(4, 1), &w(4, 1, &[1, 0], &[0])).unwrap());
        assert!(!dominance_leq(&Weight::zero(2, 1), &w(2, 1, &[1], &[0])).unwrap());
    }

    #[test]
    fn psi_ignores_the_middle_order() {
        for (m, n) in [(4, 2), (6, 2), (2, 1), (8, 2), (4, 3)] {
            let space = make_space(m, n).unwrap();
            let g0 = middle_swap(m);
            assert!(space.preserves_form(&g0, crate::osp::Algebra::So));
            let swapped = fiber_weight_sum_in(&space, &g0, &Mat::identity(2 * n)).unwrap();
            assert_eq!(swapped, fiber_weight_sum(m, n).unwrap(), "({m},{n})");
        }
    }
}
