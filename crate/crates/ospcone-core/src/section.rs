use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{classify, regular_type, representative};
use crate::error::Error;
use crate::linalg::Subspace;
use crate::mat::Mat;
use crate::osp::{
    act, action_matrix, basic_invariants, is_regular_even, make_space, orbit_dimension, q0, q1, random_group_element,
    small_rational, Algebra, OddElement, OspSpace,
};
use crate::scalar::GaussianRational as G;

/// An elementary tensor `e_i ⊗ f_j` (1-based) spanning one direction of the slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LTerm {
    pub i: usize,
    pub j: usize,
    pub eigenvalue: i64,
}

#[derive(Clone, Debug)]
pub struct Section {
    pub space: OspSpace,
    pub u: OddElement,
    pub h0: Vec<i64>,
    pub h1: Vec<i64>,
    pub l_basis: Vec<LTerm>,
}

/// Hom position `(row, col)` of `e_i ⊗ f_j` under `v⊗w ↦ (x ↦ (v,x)·w)`.
pub fn tensor_to_hom(m: usize, i: usize, j: usize) -> (usize, usize) {
    (j - 1, m - i)
}

pub fn hom_to_tensor(m: usize, row: usize, col: usize) -> (usize, usize) {
    (m - col, row + 1)
}

pub fn build_u(m: usize, n: usize) -> Result<OddElement, Error> {
    Ok(representative(&regular_type(m, n)?)?.x)
}

pub fn grading(m: usize, n: usize) -> Result<(Vec<i64>, Vec<i64>), Error> {
    let r = representative(&regular_type(m, n)?)?;
    Ok((r.h0, r.h1))
}

pub fn build_h(m: usize, n: usize) -> Result<(Mat, Mat), Error> {
    let (h0, h1) = grading(m, n)?;
    Ok((diag_int(&h0), diag_int(&h1)))
}

pub fn diag_int(d: &[i64]) -> Mat {
    Mat::diag(&d.iter().map(|&x| G::from_int(x)).collect::<Vec<_>>())
}

/// Eigenvalue of `h` on the matrix unit at `(row, col)` of Hom(V₀, V₁).
pub fn hom_weight(h0: &[i64], h1: &[i64], row: usize, col: usize) -> i64 {
    h1[row] - h0[col]
}

/// `h·A = h₁A − Ah₀ = 2A`, checked on every nonzero entry.
pub fn scales_by_two(x: &OddElement, h0: &[i64], h1: &[i64]) -> bool {
    let a = &x.a;
    (0..a.rows()).all(|r| (0..a.cols()).all(|c| a[(r, c)].is_zero() || hom_weight(h0, h1, r, c) == 2))
}

pub fn tangent_space_at_u(u: &OddElement) -> Subspace {
    let am = action_matrix(u);
    let cols: Vec<Vec<G>> = (0..am.cols()).map(|k| am.col(k)).collect();
    Subspace::span(am.rows(), &cols)
}

pub fn build_section(m: usize, n: usize) -> Result<Section, Error> {
    let space = make_space(m, n)?;
    let r = representative(&regular_type(m, n)?)?;
    let (h0, h1) = (r.h0, r.h1);
    let u = r.x;
    let dim = 2 * n * m;
    let mut cur = tangent_space_at_u(&u);
    let mut units: Vec<(i64, usize, usize)> = (0..2 * n)
        .flat_map(|row| (0..m).map(move |col| (row, col)))
        .map(|(row, col)| (hom_weight(&h0, &h1, row, col), row, col))
        .collect();
    // most negative first, so complements sit as low as possible in each eigenspace
    units.sort();
    let mut l_basis = Vec::new();
    for (w, row, col) in units {
        if cur.dim() == dim {
            break;
        }
        let v = crate::mat::unit_vec(dim, row * m + col);
        if !cur.contains(&v) {
            cur = cur.with_vector(&v);
            let (i, j) = hom_to_tensor(m, row, col);
            l_basis.push(LTerm { i, j, eigenvalue: w });
        }
    }
    Ok(Section { space, u, h0, h1, l_basis })
}

pub fn invariant_degrees(m: usize, n: usize) -> Vec<usize> {
    if m <= 2 * n + 1 {
        if m % 2 == 1 {
            (1..=(m - 1) / 2).map(|i| 4 * i).collect()
        } else {
            let mut d: Vec<usize> = (1..m / 2).map(|i| 4 * i).collect();
            d.push(m);
            d
        }
    } else {
        (1..=n).map(|i| 4 * i).collect()
    }
}

impl Section {
    pub fn l_matrix(&self, k: usize) -> Mat {
        let t = self.l_basis[k];
        let (r, c) = tensor_to_hom(self.space.m, t.i, t.j);
        Mat::unit(2 * self.space.n, self.space.m, r, c)
    }

    /// `u + Σ λ_k ℓ_k`.
    pub fn point(&self, lambda: &[G]) -> OddElement {
        let mut a = self.u.a.clone();
        for (k, l) in lambda.iter().enumerate() {
            a = &a + &self.l_matrix(k).scale(l);
        }
        OddElement { space: self.space.clone(), a }
    }

    pub fn random_point(&self, seed: u64) -> (Vec<G>, OddElement) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<G> = self.l_basis.iter().map(|_| small_rational(&mut rng, 30, 7)).collect();
        let x = self.point(&lambda);
        (lambda, x)
    }

    pub fn l_eigenvalues(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.l_basis.iter().map(|t| t.eigenvalue).collect();
        v.sort();
        v
    }
}

#[derive(Clone, Debug, Default)]
pub struct SectionChecks {
    pub h_in_algebra: bool,
    pub hu_is_2u: bool,
    pub u_is_regular_type: bool,
    pub direct_sum: bool,
    pub eigenvalues_nonpositive: bool,
    pub eigenvalues_match_degrees: bool,
    pub samples: usize,
    pub orbit_dimensions_equal: bool,
    pub invariants_distinct: bool,
}

impl SectionChecks {
    pub fn all(&self) -> bool {
        self.h_in_algebra
            && self.hu_is_2u
            && self.u_is_regular_type
            && self.direct_sum
            && self.eigenvalues_nonpositive
            && self.eigenvalues_match_degrees
            && self.orbit_dimensions_equal
            && self.invariants_distinct
    }

    pub fn entries(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("h_in_algebra", self.h_in_algebra),
            ("hu_is_2u", self.hu_is_2u),
            ("u_is_regular_type", self.u_is_regular_type),
            ("direct_sum", self.direct_sum),
            ("eigenvalues_nonpositive", self.eigenvalues_nonpositive),
            ("eigenvalues_match_degrees", self.eigenvalues_match_degrees),
            ("orbit_dimensions_equal", self.orbit_dimensions_equal),
            ("invariants_distinct", self.invariants_distinct),
        ]
    }
}

pub fn check_section(s: &Section, samples: usize, seed: u64) -> SectionChecks {
    let (m, n) = (s.space.m, s.space.n);
    let (h0, h1) = (diag_int(&s.h0), diag_int(&s.h1));
    let mut c = SectionChecks {
        h_in_algebra: s.space.in_algebra(&h0, Algebra::So) && s.space.in_algebra(&h1, Algebra::Sp),
        hu_is_2u: scales_by_two(&s.u, &s.h0, &s.h1),
        u_is_regular_type: regular_type(m, n).ok() == classify(&s.u).ok(),
        samples,
        ..Default::default()
    };
    let t = tangent_space_at_u(&s.u);
    let l: Vec<Vec<G>> = (0..s.l_basis.len()).map(|k| s.l_matrix(k).entries().to_vec()).collect();
    let total = t.sum(&Subspace::span(2 * n * m, &l)).map(|x| x.dim()).unwrap_or(0);
    c.direct_sum = t.dim() + l.len() == 2 * n * m && total == 2 * n * m;
    let eig = s.l_eigenvalues();
    c.eigenvalues_nonpositive = eig.iter().all(|&e| e <= 0);
    let mut expected: Vec<i64> = invariant_degrees(m, n).iter().map(|&d| 2 - 2 * d as i64).collect();
    expected.sort();
    c.eigenvalues_match_degrees = eig == expected;

    let od = orbit_dimension(&s.u);
    let mut invs: Vec<Vec<G>> = Vec::new();
    let mut seen: Vec<Vec<G>> = Vec::new();
    c.orbit_dimensions_equal = true;
    let mut k = 0u64;
    while seen.len() < samples && !(l.is_empty() && seen.len() == 1) {
        let (lambda, x) = s.random_point(seed.wrapping_mul(1_000_003).wrapping_add(k));
        k += 1;
        if seen.contains(&lambda) {
            continue;
        }
        seen.push(lambda);
        if orbit_dimension(&x) != od {
            c.orbit_dimensions_equal = false;
        }
        invs.push(basic_invariants(&x));
    }
    // with no invariants (L = 0) there is a single point and nothing to separate
    c.invariants_distinct =
        l.is_empty() || (0..invs.len()).all(|a| (a + 1..invs.len()).all(|b| invs[a] != invs[b]));
    c
}

#[derive(Clone, Debug, Default)]
pub struct RegularityReport {
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub checks: Vec<(String, bool)>,
    pub failures: Vec<String>,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, name: String, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(format!("{name}: {}", detail()));
        }
        self.checks.push((name, ok));
    }
}

/// Slice samples and their translates against the regularity implications, plus the closed formulas.
pub fn check_regularity_implications(m: usize, n: usize, samples: usize, seed: u64) -> Result<RegularityReport, Error> {
    let s = build_section(m, n)?;
    let od = orbit_dimension(&s.u);
    let mut rep = RegularityReport { m, n, samples, ..Default::default() };
    let check_q1 = m + 1 == 2 * n || m == 2 * n || m == 2 * n + 1;
    let check_q0 = m == 2 * n + 1 || m == 2 * n + 2;
    for k in 0..samples {
        let x = if k == 0 {
            s.u.clone()
        } else {
            let sd = seed.wrapping_mul(7919).wrapping_add(k as u64);
            let (_, p) = s.random_point(sd);
            let g0 = random_group_element(&s.space, Algebra::So, sd);
            let g1 = random_group_element(&s.space, Algebra::Sp, sd ^ 0x5a5a);
            act(&p, &g0, &g1)
        };
        let a_reg = orbit_dimension(&x) == od;
        let q0_reg = is_regular_even(&s.space, &q0(&x), Algebra::So)?;
        let q1_reg = is_regular_even(&s.space, &q1(&x), Algebra::Sp)?;
        rep.record(format!("sample {k}: orbit dimension {od}"), a_reg, || "orbit is not maximal".into());
        if m < 2 * n + 1 {
            rep.record(format!("sample {k}: q1 regular implies A regular"), !q1_reg || a_reg, String::new);
            rep.record(format!("sample {k}: A regular implies q0 regular"), !a_reg || q0_reg, String::new);
        } else {
            rep.record(format!("sample {k}: q0 regular implies A regular"), !q0_reg || a_reg, String::new);
            rep.record(format!("sample {k}: A regular implies q1 regular"), !a_reg || q1_reg, String::new);
        }
        if check_q1 {
            rep.record(format!("sample {k}: q1 regular on the regular locus"), !a_reg || q1_reg, String::new);
        }
        if check_q0 {
            rep.record(format!("sample {k}: q0 regular on the regular locus"), !a_reg || q0_reg, String::new);
        }
    }
    for f in closed_formula_checks(m, n, seed)? {
        let detail = f.detail.clone();
        rep.record(f.name, f.ok, move || detail);
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct FormulaCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn e(d: usize, i: usize) -> Vec<G> {
    crate::mat::unit_vec(d, i - 1)
}

/// `v ⊗ w` as the map `x ↦ (v, x)_S · w`.
fn tensor(space: &OspSpace, v: &[G], w: &[G]) -> Mat {
    let sv = space.s.apply(v);
    let mut a = Mat::zeros(w.len(), v.len());
    for r in 0..w.len() {
        for c in 0..v.len() {
            a[(r, c)] = &w[r] * &sv[c];
        }
    }
    a
}

/// Matrix given by a term list; `None` when an index leaves the `d×d` range.
fn from_terms(d: usize, terms: &[(usize, usize, G)]) -> Option<Mat> {
    let mut out = Mat::zeros(d, d);
    for (i, j, c) in terms {
        if *i < 1 || *j < 1 || *i > d || *j > d {
            return None;
        }
        out[(i - 1, j - 1)] += c;
    }
    Some(out)
}

fn compare(name: String, got: &Mat, want: Option<Mat>, terms: &[(usize, usize, G)]) -> FormulaCheck {
    match want {
        None => {
            let bad: Vec<String> = terms
                .iter()
                .filter(|(i, j, _)| *i < 1 || *j < 1 || *i > got.rows() || *j > got.rows())
                .map(|(i, j, _)| format!("E_{{{i},{j}}}"))
                .collect();
            FormulaCheck { name, ok: false, detail: format!("index out of range in {}", bad.join(", ")) }
        }
        Some(w) => {
            let mut diff = Vec::new();
            for i in 0..got.rows() {
                for j in 0..got.cols() {
                    if got[(i, j)] != w[(i, j)] {
                        diff.push(format!("({},{}): computed {} formula {}", i + 1, j + 1, got[(i, j)], w[(i, j)]));
                    }
                }
            }
            FormulaCheck { name, ok: diff.is_empty(), detail: diff.join("; ") }
        }
    }
}

/// The slice formulas of the proof, evaluated on a seeded λ in the proof's own coordinates.
pub fn closed_formula_checks(m: usize, n: usize, seed: u64) -> Result<Vec<FormulaCheck>, Error> {
    let space = make_space(m, n)?;
    let d1 = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
    let lambda: Vec<G> = (0..n).map(|_| small_rational(&mut rng, 9, 5)).collect();
    let mut out = Vec::new();
    if m == 2 * n {
        // e'_1..e'_{2n-1} antidiagonal with middle w, e'_{2n} = z orthonormal to them
        let half = G::from_frac(1, 2);
        let basis: Vec<Vec<G>> = (1..=m)
            .map(|k| {
                if k < n {
                    e(m, k)
                } else if k == n {
                    crate::mat::vec_add(&e(m, n), &crate::mat::vec_scale(&e(m, n + 1), &half))
                } else if k < m {
                    e(m, k + 1)
                } else {
                    let v = crate::mat::vec_add(&e(m, n), &crate::mat::vec_scale(&e(m, n + 1), &-&half));
                    crate::mat::vec_scale(&v, &G::i())
                }
            })
            .collect();
        let mut a = Mat::zeros(d1, m);
        for i in 1..m {
            a = &a + &tensor(&space, &basis[m - i - 1], &e(d1, i));
        }
        for (k, l) in lambda.iter().enumerate() {
            a = &a + &tensor(&space, &basis[2 * (k + 1) - 1], &e(d1, d1)).scale(l);
        }
        let x = space.element(a)?;
        let mut terms = Vec::new();
        for i in 1..d1 {
            let sign = if i + 2 <= n { 1 } else { -1 };
            terms.push((i, i + 1, G::from_int(sign)));
        }
        for i in 1..n {
            let l = lambda[i - 1].clone();
            terms.push((d1, d1 + 1 - 2 * i, l.clone()));
            terms.push((2 * i, 1, l));
        }
        terms.push((d1, 1, &lambda[n - 1] * &lambda[n - 1]));
        let got = q1(&x);
        let want = from_terms(d1, &terms);
        let in_sp = want.as_ref().map_or(false, |w| space.in_algebra(w, Algebra::Sp));
        out.push(compare(format!("q1 slice formula at m=2n ({m},{n})"), &got, want, &terms));
        out.push(FormulaCheck {
            name: format!("q1 slice formula lies in sp ({m},{n})"),
            ok: in_sp,
            detail: "formula matrix is not in the symplectic algebra".into(),
        });
    }
    if m == 2 * n + 1 {
        let mut a = Mat::zeros(d1, m);
        for i in 1..=d1 {
            a = &a + &unit_rect(d1, m, i, i);
        }
        for (k, l) in lambda.iter().enumerate() {
            let i = k + 1;
            a = &a + &unit_rect(d1, m, i, m + 1 - i).scale(l);
        }
        let x = space.element(a)?;
        let mut t1 = Vec::new();
        for j in 1..d1 {
            t1.push((j + 1, j, G::from_int(if j <= n { 1 } else { -1 })));
        }
        for (k, l) in lambda.iter().enumerate() {
            let i = k + 1;
            t1.push((i, d1 + 1 - i, &G::from_int(2) * l));
        }
        let got1 = q1(&x);
        out.push(compare(format!("q1 slice formula at m=2n+1 ({m},{n})"), &got1, from_terms(d1, &t1), &t1));
        let mut t0 = Vec::new();
        for j in 1..m {
            t0.push((j + 1, j, G::from_int(if j <= n { 1 } else { -1 })));
        }
        for (k, l) in lambda.iter().enumerate() {
            let i = k + 1;
            t0.push((i, d1 + 3 - i, l.clone()));
            t0.push((i + 1, d1 + 2 - i, -l));
        }
        let got0 = q0(&x);
        out.push(compare(format!("q0 slice formula at m=2n+1 ({m},{n})"), &got0, from_terms(m, &t0), &t0));
    }
    Ok(out)
}

fn unit_rect(rows: usize, cols: usize, i: usize, j: usize) -> Mat {
    Mat::unit(rows, cols, i - 1, j - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_and_h_at_3_1() {
        let (h0, h1) = grading(3, 1).unwrap();
        assert_eq!(h0, vec![-4, 0, 4]);
        assert_eq!(h1, vec![-2, 2]);
        let u = build_u(3, 1).unwrap();
        // e₃⊗f₁ + e₂⊗f₂
        let mut want = Mat::zeros(2, 3);
        let (r, c) = tensor_to_hom(3, 3, 1);
        want[(r, c)] = G::one();
        let (r, c) = tensor_to_hom(3, 2, 2);
        want[(r, c)] = G::one();
        assert_eq!(u.a, want);
        assert!(scales_by_two(&u, &h0, &h1));
    }

    #[test]
    fn degrees() {
        assert_eq!(invariant_degrees(3, 1), vec![4]);
        assert_eq!(invariant_degrees(4, 2), vec![4, 4]);
        assert_eq!(invariant_degrees(5, 2), vec![4, 8]);
        assert_eq!(invariant_degrees(8, 2), vec![4, 8]);
    }

    #[test]
    fn section_at_3_1() {
        let s = build_section(3, 1).unwrap();
        assert_eq!(s.l_eigenvalues(), vec![-6]);
        assert!(check_section(&s, 5, 0).all());
    }

    #[test]
    fn tangent_space_of_zero_is_zero() {
        let s = make_space(2, 1).unwrap();
        assert!(tangent_space_at_u(&s.zero_element()).is_zero());
    }
}
