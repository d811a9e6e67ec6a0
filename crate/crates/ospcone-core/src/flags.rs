use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{representative, validate, ABDiagram, Representative};
use crate::error::Error;
use crate::linalg::{image, kernel, preimage, Subspace};
use crate::mat::{unit_vec, vec_add, vec_scale, Mat};
use crate::osp::{adjoint, is_nilpotent_odd, q0, q1, small_rational, OddElement, OspSpace};
use crate::scalar::GaussianRational as G;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    V0,
    V1,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::V0 => Side::V1,
            Side::V1 => Side::V0,
        }
    }

    pub fn dim(self, space: &OspSpace) -> usize {
        self.dim_of(space.m, space.n)
    }

    pub fn dim_of(self, m: usize, n: usize) -> usize {
        match self {
            Side::V0 => m,
            Side::V1 => 2 * n,
        }
    }

    pub fn form(self, space: &OspSpace) -> &Mat {
        match self {
            Side::V0 => &space.s,
            Side::V1 => &space.j,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlagKind {
    Complete,
    Partial(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Plus,
    Minus,
    NotApplicable,
}

impl Component {
    pub fn tag(self) -> &'static str {
        match self {
            Component::Plus => "plus",
            Component::Minus => "minus",
            Component::NotApplicable => "n/a",
        }
    }
}

/// A complete or partial self-orthogonal flag; partial flags store only the bottom `depth` vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicFlag {
    pub side: Side,
    pub space: OspSpace,
    pub kind: FlagKind,
    pub chain: Vec<Vec<G>>,
}

impl IsotropicFlag {
    pub fn new(side: Side, space: &OspSpace, kind: FlagKind, chain: Vec<Vec<G>>) -> Result<Self, Error> {
        let d = side.dim(space);
        let want = match kind {
            FlagKind::Complete => d,
            FlagKind::Partial(k) => k,
        };
        if chain.len() != want || chain.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: want, found: chain.len() });
        }
        if Subspace::span(d, &chain).dim() != chain.len() {
            return Err(Error::CaseMismatch("flag vectors are dependent".into()));
        }
        Ok(IsotropicFlag { side, space: space.clone(), kind, chain })
    }

    /// The coordinate flag `⟨e₁⟩ ⊂ ⟨e₁,e₂⟩ ⊂ …`, truncated for partial kinds.
    pub fn coordinate(side: Side, space: &OspSpace, kind: FlagKind) -> Self {
        let d = side.dim(space);
        let len = match kind {
            FlagKind::Complete => d,
            FlagKind::Partial(k) => k,
        };
        IsotropicFlag { side, space: space.clone(), kind, chain: (0..len).map(|i| unit_vec(d, i)).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.side.dim(&self.space)
    }

    pub fn form(&self) -> &Mat {
        self.side.form(&self.space)
    }

    pub fn depth(&self) -> usize {
        match self.kind {
            FlagKind::Complete => self.ambient_dim(),
            FlagKind::Partial(k) => k,
        }
    }

    /// `F^{(i)}` with clamping; `None` for the unstored middle of a partial flag.
    pub fn component(&self, i: isize) -> Option<Subspace> {
        let d = self.ambient_dim() as isize;
        if i <= 0 {
            return Some(Subspace::zero(d as usize));
        }
        if i >= d {
            return Some(Subspace::full(d as usize));
        }
        let k = self.depth() as isize;
        if i <= k {
            return Some(Subspace::span(d as usize, &self.chain[..i as usize]));
        }
        if i >= d - k {
            let low = Subspace::span(d as usize, &self.chain[..(d - i) as usize]);
            return Some(low.orthogonal(self.form()));
        }
        None
    }

    /// Image under a form-preserving `g`.
    pub fn transform(&self, g: &Mat) -> IsotropicFlag {
        IsotropicFlag { chain: self.chain.iter().map(|v| g.apply(v)).collect(), ..self.clone() }
    }

    pub fn same_components(&self, other: &IsotropicFlag) -> bool {
        let d = self.ambient_dim() as isize;
        self.kind == other.kind && (0..=d).all(|i| self.component(i) == other.component(i))
    }
}

pub fn is_self_orthogonal(f: &IsotropicFlag) -> bool {
    let form = f.form();
    let d = f.ambient_dim();
    match f.kind {
        // F^{(i)} ⊥ F^{(d−i)} for all i amounts to ⟨v_a, v_b⟩ = 0 whenever a + b ≤ d
        FlagKind::Complete => (0..d).all(|a| (0..d - a - 1).all(|b| form.pair(&f.chain[a], &f.chain[b]).is_zero())),
        FlagKind::Partial(k) => {
            2 * k <= d && (0..k).all(|a| (0..k).all(|b| form.pair(&f.chain[a], &f.chain[b]).is_zero()))
        }
    }
}

/// Parity of the middle intersection with the coordinate flag.
pub fn lagrangian_component(lag: &Subspace) -> Component {
    let m = lag.ambient_dim();
    let half = m / 2;
    let reference = Subspace::span(m, &(0..half).map(|i| unit_vec(m, i)).collect::<Vec<_>>());
    let meet = lag.intersect(&reference).expect("same ambient").dim();
    if (half - meet) % 2 == 0 {
        Component::Plus
    } else {
        Component::Minus
    }
}

pub fn component_of(f0: &IsotropicFlag) -> Result<Component, Error> {
    let m = f0.ambient_dim();
    if m % 2 == 1 {
        return Err(Error::OddDimension);
    }
    if f0.side != Side::V0 || f0.depth() < m / 2 {
        return Err(Error::CaseMismatch("component needs the middle of a V0 flag".into()));
    }
    Ok(lagrangian_component(&f0.component((m / 2) as isize).unwrap()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlagCase {
    D1a,
    D1b,
    D1c,
    D1d,
    D2a { k: usize },
    D2b { k: usize },
    D2c,
}

impl FlagCase {
    pub fn of(m: usize, n: usize) -> FlagCase {
        if m == 2 * n + 1 {
            FlagCase::D1a
        } else if m == 2 * n + 2 {
            FlagCase::D1b
        } else if m == 2 * n {
            FlagCase::D1c
        } else if m + 1 == 2 * n {
            FlagCase::D1d
        } else if m > 2 * n + 2 {
            FlagCase::D2c
        } else if m % 2 == 0 {
            FlagCase::D2a { k: m / 2 }
        } else {
            FlagCase::D2b { k: m / 2 }
        }
    }

    pub fn check(self, m: usize, n: usize) -> Result<FlagCase, Error> {
        let actual = FlagCase::of(m, n);
        if actual == self {
            Ok(self)
        } else {
            Err(Error::CaseMismatch(format!("({m},{n}) is {}, not {}", actual.tag(), self.tag())))
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FlagCase::D1a => "D1a",
            FlagCase::D1b => "D1b",
            FlagCase::D1c => "D1c",
            FlagCase::D1d => "D1d",
            FlagCase::D2a { .. } => "D2a",
            FlagCase::D2b { .. } => "D2b",
            FlagCase::D2c => "D2c",
        }
    }

    pub fn is_complete(self) -> bool {
        matches!(self, FlagCase::D1a | FlagCase::D1b | FlagCase::D1c | FlagCase::D1d)
    }

    pub fn kinds(self, n: usize) -> (FlagKind, FlagKind) {
        match self {
            FlagCase::D2a { k } => (FlagKind::Complete, FlagKind::Partial(k)),
            FlagCase::D2b { k } => (FlagKind::Complete, FlagKind::Partial(k + 1)),
            FlagCase::D2c => (FlagKind::Partial(n), FlagKind::Complete),
            _ => (FlagKind::Complete, FlagKind::Complete),
        }
    }

    /// Order in which the stored lower components are built: `(side, index)`.
    pub fn word(self, n: usize) -> Vec<(Side, usize)> {
        let mut w = Vec::new();
        let ab = |w: &mut Vec<(Side, usize)>, r: core::ops::RangeInclusive<usize>| {
            for i in r {
                w.push((Side::V0, i));
                w.push((Side::V1, i));
            }
        };
        let ba = |w: &mut Vec<(Side, usize)>, r: core::ops::RangeInclusive<usize>| {
            for i in r {
                w.push((Side::V1, i));
                w.push((Side::V0, i));
            }
        };
        match self {
            FlagCase::D1a | FlagCase::D2c => ab(&mut w, 1..=n),
            FlagCase::D1b => {
                ab(&mut w, 1..=n);
                w.push((Side::V0, n + 1));
            }
            FlagCase::D1c => ba(&mut w, 1..=n),
            FlagCase::D1d => {
                ba(&mut w, 1..=n - 1);
                w.push((Side::V1, n));
            }
            FlagCase::D2a { k } => ba(&mut w, 1..=k),
            FlagCase::D2b { k } => {
                ba(&mut w, 1..=k);
                w.push((Side::V1, k + 1));
            }
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    A,
    AStar,
}

/// `Map F^{(src)} ⊂ F^{(dst)}`; A maps V₀-components into V₁-components, A* the reverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inclusion {
    pub map: MapKind,
    pub src: isize,
    pub dst: isize,
}

impl Inclusion {
    pub fn sides(&self) -> (Side, Side) {
        match self.map {
            MapKind::A => (Side::V0, Side::V1),
            MapKind::AStar => (Side::V1, Side::V0),
        }
    }

    /// `A X ⊂ Y ⟺ A* Y^⊥ ⊂ X^⊥`, with `(F^{(i)})^⊥ = F^{(d−i)}`.
    pub fn dual(&self, m: usize, n: usize) -> Inclusion {
        let (m, d1) = (m as isize, 2 * n as isize);
        match self.map {
            MapKind::A => Inclusion { map: MapKind::AStar, src: d1 - self.dst, dst: m - self.src },
            MapKind::AStar => Inclusion { map: MapKind::A, src: m - self.dst, dst: d1 - self.src },
        }
    }
}

impl core::fmt::Display for Inclusion {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.map {
            MapKind::A => write!(f, "A F0^({}) ⊂ F1^({})", self.src, self.dst),
            MapKind::AStar => write!(f, "A* F1^({}) ⊂ F0^({})", self.src, self.dst),
        }
    }
}

pub fn primal_conditions(case: FlagCase, n: usize) -> Vec<Inclusion> {
    let a = |src: usize, dst: usize| Inclusion { map: MapKind::A, src: src as isize, dst: dst as isize };
    let s = |src: usize, dst: usize| Inclusion { map: MapKind::AStar, src: src as isize, dst: dst as isize };
    let mut out = Vec::new();
    match case {
        FlagCase::D1a => out.extend((1..=2 * n + 1).map(|i| a(i, i - 1))),
        FlagCase::D1b => {
            out.extend((1..=n).map(|i| a(i, i - 1)));
            out.extend((n + 1..=2 * n + 2).map(|i| a(i + 1, i - 1)));
        }
        FlagCase::D1c => {
            out.extend((1..=n).map(|i| a(i, i)));
            out.extend((n + 1..=2 * n).map(|i| a(i, i - 1)));
        }
        FlagCase::D1d => out.extend((1..=2 * n - 1).map(|i| a(i, i))),
        FlagCase::D2a { k } | FlagCase::D2b { k } => {
            let top = if matches!(case, FlagCase::D2a { .. }) { k } else { k + 1 };
            for i in 1..=top {
                out.push(a(i, i));
                out.push(s(i, i - 1));
            }
        }
        FlagCase::D2c => {
            for i in 1..=n {
                out.push(a(i, i - 1));
                out.push(s(i, i));
            }
        }
    }
    out
}

pub fn dual_conditions(case: FlagCase, m: usize, n: usize) -> Vec<Inclusion> {
    primal_conditions(case, n).iter().map(|c| c.dual(m, n)).collect()
}

/// Conditions whose indices leave the range `0..=d` and are read with clamping.
pub fn clamped_conditions(case: FlagCase, m: usize, n: usize) -> Vec<Inclusion> {
    primal_conditions(case, n)
        .into_iter()
        .filter(|c| {
            let (s, t) = c.sides();
            let ds = s.dim_of(m, n) as isize;
            let dt = t.dim_of(m, n) as isize;
            c.src < 0 || c.src > ds || c.dst < 0 || c.dst > dt
        })
        .collect()
}

fn check_shapes(x: &OddElement, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase) -> Result<(), Error> {
    let (m, n) = (x.space.m, x.space.n);
    case.check(m, n)?;
    let (k0, k1) = case.kinds(n);
    if f0.side != Side::V0 || f1.side != Side::V1 || f0.kind != k0 || f1.kind != k1 {
        return Err(Error::CaseMismatch(format!("flag kinds do not fit {}", case.tag())));
    }
    if f0.space != x.space || f1.space != x.space {
        return Err(Error::CaseMismatch("flags live on another space".into()));
    }
    Ok(())
}

fn holds(x: &OddElement, astar: &Mat, f0: &IsotropicFlag, f1: &IsotropicFlag, c: &Inclusion) -> Result<bool, Error> {
    let (src, dst, map) = match c.map {
        MapKind::A => (f0.component(c.src), f1.component(c.dst), &x.a),
        MapKind::AStar => (f1.component(c.src), f0.component(c.dst), astar),
    };
    match (src, dst) {
        (Some(s), Some(t)) => Ok(t.contains_subspace(&s.map(map))),
        _ => Err(Error::CaseMismatch(format!("{c} uses an unstored component"))),
    }
}

fn all_hold(x: &OddElement, f0: &IsotropicFlag, f1: &IsotropicFlag, conds: &[Inclusion]) -> Result<bool, Error> {
    let astar = adjoint(x);
    for c in conds {
        if !holds(x, &astar, f0, f1, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn respects(x: &OddElement, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase) -> Result<bool, Error> {
    check_shapes(x, f0, f1, case)?;
    all_hold(x, f0, f1, &primal_conditions(case, x.space.n))
}

pub fn respects_dual(x: &OddElement, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase) -> Result<bool, Error> {
    check_shapes(x, f0, f1, case)?;
    all_hold(x, f0, f1, &dual_conditions(case, x.space.m, x.space.n))
}

pub fn duals_equivalent(x: &OddElement, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase) -> Result<bool, Error> {
    Ok(respects(x, f0, f1, case)? == respects_dual(x, f0, f1, case)?)
}

#[derive(Clone, Debug)]
pub struct ResolutionPoint {
    pub x: OddElement,
    pub f0: IsotropicFlag,
    pub f1: IsotropicFlag,
    pub case: FlagCase,
    pub component: Component,
}

/// Complete a flag from its isotropic lower half by orthogonal complements.
fn complete_from_half(side: Side, space: &OspSpace, half: &[Vec<G>]) -> Result<IsotropicFlag, Error> {
    let d = side.dim(space);
    let form = side.form(space);
    let mut chain: Vec<Vec<G>> = half.to_vec();
    let mut prev = Subspace::span(d, &chain);
    for i in half.len() + 1..=d {
        let next = Subspace::span(d, &chain[..d - i]).orthogonal(form);
        let extra = next.complement_basis(&prev);
        if extra.len() != 1 {
            return Err(Error::PostconditionFailure(format!("component {i} does not grow by one")));
        }
        chain.push(extra[0].clone());
        prev = next;
    }
    IsotropicFlag::new(side, space, FlagKind::Complete, chain)
}

struct Search<'a> {
    rep: &'a Representative,
    word: Vec<Side>,
    case: FlagCase,
    component: Component,
    // per side, the vectors chosen so far
    chosen: [Vec<Vec<G>>; 2],
    consumed: Vec<usize>,
}

fn side_index(s: Side) -> usize {
    match s {
        Side::V0 => 0,
        Side::V1 => 1,
    }
}

impl Search<'_> {
    fn is_self_dual(&self, r: usize) -> bool {
        self.rep.rows[r].partner == r
    }

    fn moves(&self, side: Side) -> Vec<(Vec<(usize, usize)>, Vec<G>)> {
        let rows = &self.rep.rows;
        let want = match side {
            Side::V0 => crate::diagram::Sym::A,
            Side::V1 => crate::diagram::Sym::B,
        };
        let mut out: Vec<(usize, Vec<(usize, usize)>, Vec<G>)> = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let l = row.len();
            let c = self.consumed[r];
            if c >= l {
                continue;
            }
            let p = l - 1 - c;
            if row.sym(p) != want {
                continue;
            }
            if self.is_self_dual(r) {
                if p <= (l - 1) / 2 {
                    continue;
                }
            } else if c + 1 + self.consumed[row.partner] > l {
                continue;
            }
            out.push((c, vec![(r, 1)], row.vectors[p].clone()));
        }
        if side == Side::V0 {
            let form = &self.rep.x.space.s;
            let ready: Vec<usize> = (0..rows.len())
                .filter(|&r| self.is_self_dual(r) && self.consumed[r] == (rows[r].len() - 1) / 2)
                .collect();
            for (ia, &r) in ready.iter().enumerate() {
                for &s in &ready[ia + 1..] {
                    let mr = &rows[r].vectors[(rows[r].len() - 1) / 2];
                    let ms = &rows[s].vectors[(rows[s].len() - 1) / 2];
                    let ratio = &-&form.pair(mr, mr) / &form.pair(ms, ms);
                    let Some(t) = ratio.sqrt() else { continue };
                    for sign in [G::one(), G::from_int(-1)] {
                        let v = vec_add(mr, &vec_scale(ms, &(&t * &sign)));
                        out.push((self.consumed[r], vec![(r, 1), (s, 1)], v));
                    }
                }
            }
        }
        // continue the deepest rows first
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out.into_iter().map(|(_, m, v)| (m, v)).collect()
    }

    fn leaf(&self) -> Option<(IsotropicFlag, IsotropicFlag)> {
        let space = &self.rep.x.space;
        let f0 = complete_from_half(Side::V0, space, &self.chosen[0]).ok()?;
        let f1 = complete_from_half(Side::V1, space, &self.chosen[1]).ok()?;
        if space.m % 2 == 0 && self.component != Component::NotApplicable {
            if component_of(&f0).ok()? != self.component {
                return None;
            }
        }
        let ok = is_self_orthogonal(&f0)
            && is_self_orthogonal(&f1)
            && respects(&self.rep.x, &f0, &f1, self.case).unwrap_or(false);
        ok.then_some((f0, f1))
    }

    fn run(&mut self, t: usize) -> Option<(IsotropicFlag, IsotropicFlag)> {
        if t == self.word.len() {
            return self.leaf();
        }
        let side = self.word[t];
        for (used, v) in self.moves(side) {
            for &(r, k) in &used {
                self.consumed[r] += k;
            }
            self.chosen[side_index(side)].push(v);
            let found = self.run(t + 1);
            self.chosen[side_index(side)].pop();
            for &(r, k) in &used {
                self.consumed[r] -= k;
            }
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// Compatible complete flags for the representative of `d` (cases D1a to D1d).
pub fn build_flags(d: &ABDiagram, component: Component) -> Result<ResolutionPoint, Error> {
    if !validate(d).is_empty() {
        return Err(Error::NoGrouping);
    }
    let case = FlagCase::of(d.m, d.n);
    if !case.is_complete() {
        return Err(Error::NoGrouping);
    }
    if d.m % 2 == 1 && component != Component::NotApplicable {
        return Err(Error::ComponentUnavailable);
    }
    let rep = representative(d)?;
    let word: Vec<Side> = case.word(d.n).into_iter().map(|(s, _)| s).collect();
    let mut search = Search {
        rep: &rep,
        word,
        case,
        component,
        chosen: [Vec::new(), Vec::new()],
        consumed: vec![0; rep.rows.len()],
    };
    let (f0, f1) = search.run(0).ok_or(Error::NoGrouping)?;
    let component = if d.m % 2 == 0 { component_of(&f0)? } else { Component::NotApplicable };
    Ok(ResolutionPoint { x: rep.x, f0, f1, case, component })
}

/// First component's solution space from the compatibility conditions alone.
pub fn forced_step_space(x: &OddElement) -> Subspace {
    let astar = adjoint(x);
    if x.space.m < 2 * x.space.n + 1 {
        kernel(&astar).intersect(&image(&x.a)).expect("both in V1")
    } else {
        kernel(&x.a).intersect(&image(&astar)).expect("both in V0")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// the admissible space was a single line
    Forced,
    /// a lower bound from already fixed components filled the step
    Propagated,
    /// one of two isotropic lines, picked by the component
    ComponentChoice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub side: Side,
    pub index: usize,
    pub dim: usize,
    pub rule: StepRule,
    /// taken out of order because an earlier step was not yet determined
    pub deferred: bool,
}

#[derive(Clone, Debug)]
pub struct Resolution {
    pub point: ResolutionPoint,
    pub steps: Vec<StepRecord>,
}

struct Bounds {
    d: [usize; 2],
    exists: [Vec<bool>; 2],
    lo: [Vec<Subspace>; 2],
    up: [Vec<Subspace>; 2],
}

impl Bounds {
    fn clamp(&self, s: usize, i: isize) -> Option<usize> {
        let i = i.clamp(0, self.d[s] as isize) as usize;
        self.exists[s][i].then_some(i)
    }

    fn fixed(&self, s: usize, i: usize) -> bool {
        self.lo[s][i].dim() == i
    }
}

struct Resolver<'a> {
    x: &'a OddElement,
    astar: Mat,
    forms: [Mat; 2],
    conds: Vec<Inclusion>,
    b: Bounds,
}

impl Resolver<'_> {
    fn map(&self, k: MapKind) -> &Mat {
        match k {
            MapKind::A => &self.x.a,
            MapKind::AStar => &self.astar,
        }
    }

    fn set_lo(&mut self, s: usize, i: usize, v: Subspace, changed: &mut bool) -> Result<(), Error> {
        let merged = self.b.lo[s][i].sum(&v)?;
        if merged.dim() != self.b.lo[s][i].dim() {
            if merged.dim() > i || !self.b.up[s][i].contains_subspace(&merged) {
                return Err(Error::NotRegular(format!("no compatible flag: component {i} overfull")));
            }
            self.b.lo[s][i] = merged;
            *changed = true;
        }
        Ok(())
    }

    fn set_up(&mut self, s: usize, i: usize, v: Subspace, changed: &mut bool) -> Result<(), Error> {
        let met = self.b.up[s][i].intersect(&v)?;
        if met.dim() != self.b.up[s][i].dim() {
            if met.dim() < i || !met.contains_subspace(&self.b.lo[s][i]) {
                return Err(Error::NotRegular(format!("no compatible flag: component {i} squeezed")));
            }
            self.b.up[s][i] = met;
            *changed = true;
        }
        Ok(())
    }

    fn propagate(&mut self) -> Result<(), Error> {
        loop {
            let mut changed = false;
            for s in 0..2 {
                let idx: Vec<usize> = (0..=self.b.d[s]).filter(|&i| self.b.exists[s][i]).collect();
                for w in idx.windows(2) {
                    let (p, q) = (w[0], w[1]);
                    let lo = self.b.lo[s][p].clone();
                    self.set_lo(s, q, lo, &mut changed)?;
                    let up = self.b.up[s][q].clone();
                    self.set_up(s, p, up, &mut changed)?;
                }
                for &i in &idx {
                    let j = self.b.d[s] - i;
                    if !self.b.exists[s][j] {
                        continue;
                    }
                    let lo = self.b.up[s][i].orthogonal(&self.forms[s]);
                    self.set_lo(s, j, lo, &mut changed)?;
                    let up = self.b.lo[s][i].orthogonal(&self.forms[s]);
                    self.set_up(s, j, up, &mut changed)?;
                    if self.b.up[s][i].dim() == i && !self.b.fixed(s, i) {
                        let u = self.b.up[s][i].clone();
                        self.set_lo(s, i, u, &mut changed)?;
                    }
                    if self.b.fixed(s, i) && self.b.up[s][i].dim() != i {
                        let l = self.b.lo[s][i].clone();
                        self.set_up(s, i, l, &mut changed)?;
                    }
                }
            }
            for c in self.conds.clone() {
                let (ss, ts) = c.sides();
                let (si, ti) = (side_index(ss), side_index(ts));
                let (Some(a), Some(b)) = (self.b.clamp(si, c.src), self.b.clamp(ti, c.dst)) else { continue };
                let img = self.b.lo[si][a].map(self.map(c.map));
                self.set_lo(ti, b, img, &mut changed)?;
                let pre = preimage(self.map(c.map), &self.b.up[ti][b])?;
                self.set_up(si, a, pre, &mut changed)?;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Admissible new vectors at `(s, i)` over the fixed `F^{(i−1)}`.
    fn admissible(&self, s: usize, i: usize) -> Result<(Subspace, Vec<Vec<G>>), Error> {
        let prev = self.b.lo[s][i - 1].clone();
        let room = self.b.up[s][i].intersect(&prev.orthogonal(&self.forms[s]))?;
        let extra = room.complement_basis(&prev);
        Ok((prev, extra))
    }
}

/// Isotropic lines of a nondegenerate binary symmetric form with Gram `[[p,q],[q,r]]`.
fn isotropic_lines(p: &G, q: &G, r: &G) -> Option<[(G, G); 2]> {
    if p.is_zero() {
        return Some([(G::one(), G::zero()), (r.clone(), -&(&G::from_int(2) * q))]);
    }
    let disc = (q * q) - (p * r);
    let root = disc.sqrt()?;
    let x1 = &(&-q + &root) / p;
    let x2 = &(&-q - &root) / p;
    Some([(x1, G::one()), (x2, G::one())])
}

/// The unique compatible flags of a regular element, by bounds propagation along the case word.
pub fn resolve_regular(x: &OddElement, component: Component) -> Result<Resolution, Error> {
    let (m, n) = (x.space.m, x.space.n);
    let regular = crate::diagram::regular_type(m, n)?;
    let found = crate::diagram::classify(x)?;
    if found != regular {
        return Err(Error::NotRegular(format!("type {found}, regular type is {regular}")));
    }
    if m % 2 == 1 && component != Component::NotApplicable {
        return Err(Error::ComponentUnavailable);
    }
    let case = FlagCase::of(m, n);
    let (k0, k1) = case.kinds(n);
    // a partial V0 flag short of the middle carries no component
    let has_middle = m % 2 == 0 && matches!(k0, FlagKind::Complete);
    let component = match (has_middle, component) {
        (false, _) => Component::NotApplicable,
        (true, Component::NotApplicable) => Component::Plus,
        (true, c) => c,
    };
    let d = [m, 2 * n];
    let exists = |dim: usize, kind: FlagKind| -> Vec<bool> {
        (0..=dim)
            .map(|i| match kind {
                FlagKind::Complete => true,
                FlagKind::Partial(k) => i <= k || i >= dim - k,
            })
            .collect()
    };
    let mk = |dim: usize, full: bool| -> Vec<Subspace> {
        (0..=dim)
            .map(|i| {
                if i == dim || (full && i > 0) {
                    Subspace::full(dim)
                } else {
                    Subspace::zero(dim)
                }
            })
            .collect()
    };
    let mut lo = [mk(m, false), mk(2 * n, false)];
    let up = [mk(m, true), mk(2 * n, true)];
    lo[0][m] = Subspace::full(m);
    lo[1][2 * n] = Subspace::full(2 * n);
    let mut conds = primal_conditions(case, n);
    conds.extend(dual_conditions(case, m, n));
    let mut r = Resolver {
        x,
        astar: adjoint(x),
        forms: [x.space.s.clone(), x.space.j.clone()],
        conds,
        b: Bounds { d, exists: [exists(m, k0), exists(2 * n, k1)], lo, up },
    };
    let word = case.word(n);
    // highest nonvanishing power of the first side's self-map
    let (s0, _) = word[0];
    let q = if s0 == Side::V1 { q1(x) } else { q0(x) };
    let mut p = q.clone();
    let mut last = Mat::identity(q.rows());
    while !p.is_zero() {
        last = p.clone();
        p = &p * &q;
    }
    let mut changed = false;
    r.set_up(side_index(s0), 1, image(&last), &mut changed)?;

    let lag = (m % 2 == 0 && word.contains(&(Side::V0, m / 2))).then_some(m / 2);
    let mut steps = Vec::new();
    loop {
        r.propagate()?;
        let Some(pos) = word.iter().position(|&(s, i)| !r.b.fixed(side_index(s), i)) else { break };
        // components that propagation alone fixed are recorded in word order
        for &(s, i) in &word[..pos] {
            if !steps.iter().any(|st: &StepRecord| st.side == s && st.index == i) {
                steps.push(StepRecord { side: s, index: i, dim: 1, rule: StepRule::Propagated, deferred: false });
            }
        }
        let (side, i) = word[pos];
        let s = side_index(side);
        let (prev, extra) = r.admissible(s, i)?;
        let forced = if side == Side::V1 {
            (extra.len() == 1).then(|| extra.clone())
        } else {
            let gram = Mat::from_vec(
                extra.len(),
                extra.len(),
                extra.iter().flat_map(|u| extra.iter().map(|v| r.forms[0].pair(u, v))).collect(),
            );
            let rad = gram.kernel_basis();
            let rank = extra.len() - rad.len();
            let radical: Vec<Vec<G>> = rad
                .iter()
                .map(|c| c.iter().zip(&extra).fold(vec![G::zero(); m], |acc, (ci, v)| vec_add(&acc, &vec_scale(v, ci))))
                .collect();
            (rank <= 1 && radical.len() == 1).then_some(radical)
        };
        let mut changed = false;
        if let Some(v) = forced {
            let new = prev.with_vector(&v[0]);
            r.set_lo(s, i, new, &mut changed)?;
            steps.push(StepRecord { side, index: i, dim: 1, rule: StepRule::Forced, deferred: false });
            continue;
        }
        // otherwise the Lagrangian step must be settled first
        let Some(l) = lag else {
            return Err(Error::NotRegular(format!("step {:?}^({i}) has a {}-dimensional choice", side, extra.len())));
        };
        if r.b.fixed(0, l) || !r.b.fixed(0, l - 1) {
            return Err(Error::NotRegular(format!("step {:?}^({i}) has a {}-dimensional choice", side, extra.len())));
        }
        let (lprev, lextra) = r.admissible(0, l)?;
        if lextra.len() != 2 {
            return Err(Error::NotRegular(format!("middle step has a {}-dimensional choice", lextra.len())));
        }
        let f = &r.forms[0];
        let lines = isotropic_lines(
            &f.pair(&lextra[0], &lextra[0]),
            &f.pair(&lextra[0], &lextra[1]),
            &f.pair(&lextra[1], &lextra[1]),
        )
        .ok_or_else(|| Error::NotRegular("middle step has no rational isotropic line".into()))?;
        let mut picked = None;
        for (a, b) in lines {
            let v = vec_add(&vec_scale(&lextra[0], &a), &vec_scale(&lextra[1], &b));
            let cand = lprev.with_vector(&v);
            if lagrangian_component(&cand) == component {
                picked = Some(cand);
            }
        }
        let cand = picked.ok_or_else(|| Error::PostconditionFailure("no isotropic line in the requested component".into()))?;
        r.set_lo(0, l, cand, &mut changed)?;
        steps.push(StepRecord {
            side: Side::V0,
            index: l,
            dim: 1,
            rule: StepRule::ComponentChoice,
            deferred: (Side::V0, l) != (side, i),
        });
    }
    for &(s, i) in &word {
        if !steps.iter().any(|st| st.side == s && st.index == i) {
            steps.push(StepRecord { side: s, index: i, dim: 1, rule: StepRule::Propagated, deferred: false });
        }
    }
    let chain_of = |s: usize, kind: FlagKind, side: Side| -> Result<IsotropicFlag, Error> {
        let top = match kind {
            FlagKind::Complete => d[s],
            FlagKind::Partial(k) => k,
        };
        let mut chain = Vec::new();
        for i in 1..=top {
            let extra = r.b.lo[s][i].complement_basis(&r.b.lo[s][i - 1]);
            if extra.len() != 1 || !r.b.fixed(s, i) {
                return Err(Error::PostconditionFailure(format!("component {i} of {side:?} is not determined")));
            }
            chain.push(extra[0].clone());
        }
        IsotropicFlag::new(side, &x.space, kind, chain)
    };
    let f0 = chain_of(0, k0, Side::V0)?;
    let f1 = chain_of(1, k1, Side::V1)?;
    if !respects(x, &f0, &f1, case)? || !is_self_orthogonal(&f0) || !is_self_orthogonal(&f1) {
        return Err(Error::PostconditionFailure("resolved flags fail the compatibility check".into()));
    }
    let comp = if has_middle { component_of(&f0)? } else { Component::NotApplicable };
    if comp != component {
        return Err(Error::PostconditionFailure("resolved flag lies in the other component".into()));
    }
    Ok(Resolution { point: ResolutionPoint { x: x.clone(), f0, f1, case, component: comp }, steps })
}

/// Linear equations on the entries of A (row-major) cutting out the fiber over `(F0, F1)`.
pub fn fiber_equations(space: &OspSpace, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase) -> Result<Vec<Vec<G>>, Error> {
    let (m, n) = (space.m, space.n);
    let d1 = 2 * n;
    let mut eqs = Vec::new();
    for c in primal_conditions(case, n).into_iter().chain(dual_conditions(case, m, n)) {
        let (src, dst) = match c.map {
            MapKind::A => (f0.component(c.src), f1.component(c.dst)),
            MapKind::AStar => (f1.component(c.src), f0.component(c.dst)),
        };
        let (Some(src), Some(dst)) = (src, dst) else {
            return Err(Error::CaseMismatch(format!("{c} uses an unstored component")));
        };
        for phi in dst.annihilator() {
            for v in src.basis() {
                // φ(Map v) as a linear form in the entries of A
                let mut row = vec![G::zero(); d1 * m];
                for r in 0..d1 {
                    for col in 0..m {
                        let e = Mat::unit(d1, m, r, col);
                        let img = match c.map {
                            MapKind::A => e.apply(v),
                            MapKind::AStar => (&(&space.s * &e.transpose()) * &space.j).apply(v),
                        };
                        row[r * m + col] = crate::mat::dot(&phi, &img);
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    eqs.push(row);
                }
            }
        }
    }
    Ok(eqs)
}

/// Basis of the fiber `{A : A respects (F0, F1)}`, as 2n×m matrices.
pub fn fiber_basis(space: &OspSpace, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase) -> Result<Vec<Mat>, Error> {
    let (m, d1) = (space.m, 2 * space.n);
    let eqs = fiber_equations(space, f0, f1, case)?;
    let sols = if eqs.is_empty() {
        (0..d1 * m).map(|k| unit_vec(d1 * m, k)).collect()
    } else {
        Mat::from_rows(&eqs).kernel_basis()
    };
    Ok(sols.into_iter().map(|v| Mat::from_vec(d1, m, v)).collect())
}

/// A seeded random point of the fiber over `(F0, F1)`.
pub fn fiber_sample(space: &OspSpace, f0: &IsotropicFlag, f1: &IsotropicFlag, case: FlagCase, seed: u64) -> Result<OddElement, Error> {
    let basis = fiber_basis(space, f0, f1, case)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Mat::zeros(2 * space.n, space.m);
    for b in &basis {
        a = &a + &b.scale(&small_rational(&mut rng, 5, 3));
    }
    let x = space.element(a)?;
    if !is_nilpotent_odd(&x) {
        return Err(Error::PostconditionFailure("fiber sample is not nilpotent".into()));
    }
    Ok(x)
}

/// Coordinate flags for the case at `(m, n)`.
pub fn coordinate_flags(space: &OspSpace) -> (IsotropicFlag, IsotropicFlag, FlagCase) {
    let case = FlagCase::of(space.m, space.n);
    let (k0, k1) = case.kinds(space.n);
    (IsotropicFlag::coordinate(Side::V0, space, k0), IsotropicFlag::coordinate(Side::V1, space, k1), case)
}

/// Matrix units `(row, col)` of Hom(V₀,V₁) lying in the fiber over the coordinate flags.
pub fn coordinate_fiber_positions(space: &OspSpace) -> Result<Vec<(usize, usize)>, Error> {
    let (f0, f1, case) = coordinate_flags(space);
    let mut out = Vec::new();
    for r in 0..2 * space.n {
        for c in 0..space.m {
            let x = space.element(Mat::unit(2 * space.n, space.m, r, c))?;
            if respects(&x, &f0, &f1, case)? {
                out.push((r, c));
            }
        }
    }
    Ok(out)
}

pub fn describe_steps(steps: &[StepRecord]) -> String {
    let parts: Vec<String> = steps
        .iter()
        .map(|s| {
            let side = if s.side == Side::V0 { "F0" } else { "F1" };
            let rule = match s.rule {
                StepRule::Forced => "forced",
                StepRule::Propagated => "propagated",
                StepRule::ComponentChoice => "component",
            };
            format!("{side}^({}) dim {} {rule}{}", s.index, s.dim, if s.deferred { " (deferred)" } else { "" })
        })
        .collect();
    parts.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::ABDiagram;
    use crate::osp::make_space;

    fn space(m: usize, n: usize) -> OspSpace {
        make_space(m, n).unwrap()
    }

    #[test]
    fn coordinate_flag_is_self_orthogonal() {
        let s = space(5, 2);
        assert!(is_self_orthogonal(&IsotropicFlag::coordinate(Side::V0, &s, FlagKind::Complete)));
        assert!(is_self_orthogonal(&IsotropicFlag::coordinate(Side::V1, &s, FlagKind::Complete)));
        let mut bad = IsotropicFlag::coordinate(Side::V0, &s, FlagKind::Complete);
        bad.chain.swap(0, 2);
        assert!(!is_self_orthogonal(&bad));
    }

    #[test]
    fn components() {
        let s = space(4, 2);
        let f = IsotropicFlag::coordinate(Side::V0, &s, FlagKind::Complete);
        assert_eq!(component_of(&f).unwrap(), Component::Plus);
        let mut g = f.clone();
        g.chain.swap(1, 2);
        assert_eq!(component_of(&g).unwrap(), Component::Minus);
        let odd = IsotropicFlag::coordinate(Side::V0, &space(3, 1), FlagKind::Complete);
        assert_eq!(component_of(&odd), Err(Error::OddDimension));
    }

    #[test]
    fn clamping_fires_only_in_d1b() {
        assert_eq!(clamped_conditions(FlagCase::D1b, 4, 1).len(), 1);
        assert!(clamped_conditions(FlagCase::D1a, 3, 1).is_empty());
        assert!(clamped_conditions(FlagCase::D1c, 4, 2).is_empty());
    }

    #[test]
    fn zero_respects_everything() {
        let s = space(3, 1);
        let (f0, f1, case) = coordinate_flags(&s);
        assert!(respects(&s.zero_element(), &f0, &f1, case).unwrap());
        assert!(duals_equivalent(&s.zero_element(), &f0, &f1, case).unwrap());
    }

    #[test]
    fn case_table() {
        assert_eq!(FlagCase::of(3, 1), FlagCase::D1a);
        assert_eq!(FlagCase::of(4, 1), FlagCase::D1b);
        assert_eq!(FlagCase::of(4, 2), FlagCase::D1c);
        assert_eq!(FlagCase::of(3, 2), FlagCase::D1d);
        assert_eq!(FlagCase::of(2, 3), FlagCase::D2a { k: 1 });
        assert_eq!(FlagCase::of(3, 3), FlagCase::D2b { k: 1 });
        assert_eq!(FlagCase::of(7, 2), FlagCase::D2c);
        assert!(FlagCase::D1a.check(4, 2).is_err());
    }

    fn span_of(d: usize, vs: &[&Vec<G>]) -> Subspace {
        Subspace::span(d, &vs.iter().map(|v| (*v).clone()).collect::<Vec<_>>())
    }

    #[test]
    fn epsilon_one_plus_alpha_zero_flags() {
        let d = ABDiagram::parse("e1+a0").unwrap();
        let p = build_flags(&d, Component::NotApplicable).unwrap();
        let rep = representative(&d).unwrap();
        let row = |sym, len| rep.rows.iter().find(|r| r.start == sym && r.len() == len).unwrap();
        use crate::diagram::Sym;
        let (ab, ba, a0) = (row(Sym::A, 2), row(Sym::B, 2), row(Sym::A, 1));
        let (a1, b1, b2, a2, a1p) = (&ab.vectors[0], &ab.vectors[1], &ba.vectors[0], &ba.vectors[1], &a0.vectors[0]);
        assert_eq!(p.f0.component(1).unwrap(), span_of(3, &[a2]));
        assert_eq!(p.f0.component(2).unwrap(), span_of(3, &[a1p, a2]));
        assert_eq!(p.f0.component(3).unwrap(), span_of(3, &[a1, a2, a1p]));
        assert_eq!(p.f1.component(1).unwrap(), span_of(2, &[b2]));
        assert_eq!(p.f1.component(2).unwrap(), span_of(2, &[b1, b2]));
        assert!(is_self_orthogonal(&p.f0) && is_self_orthogonal(&p.f1));
        assert!(respects(&rep.x, &p.f0, &p.f1, p.case).unwrap());
    }

    #[test]
    fn alpha_one_resolution() {
        let d = ABDiagram::parse("a1").unwrap();
        let rep = representative(&d).unwrap();
        let r = resolve_regular(&rep.x, Component::NotApplicable).unwrap();
        let v = &rep.rows[0].vectors;
        // a₁ b₁ a₂ b₂ a₃
        assert_eq!(r.point.f0.component(1).unwrap(), span_of(3, &[&v[4]]));
        assert_eq!(r.point.f0.component(2).unwrap(), span_of(3, &[&v[4], &v[2]]));
        assert_eq!(r.point.f1.component(1).unwrap(), span_of(2, &[&v[3]]));
        assert!(r.steps.iter().all(|s| s.dim == 1));

        let mut reversed = r.point.f0.clone();
        reversed.chain.reverse();
        assert!(!respects(&rep.x, &reversed, &r.point.f1, FlagCase::D1a).unwrap());
        assert_eq!(
            resolve_regular(&rep.x, Component::Plus).unwrap_err(),
            Error::ComponentUnavailable
        );
    }

    #[test]
    fn both_components_at_4_2() {
        let rep = representative(&crate::diagram::regular_type(4, 2).unwrap()).unwrap();
        let plus = resolve_regular(&rep.x, Component::Plus).unwrap().point;
        let minus = resolve_regular(&rep.x, Component::Minus).unwrap().point;
        assert_eq!((plus.component, minus.component), (Component::Plus, Component::Minus));
        assert!(!plus.f0.same_components(&minus.f0));
        for c in [Component::Plus, Component::Minus] {
            let b = build_flags(&crate::diagram::regular_type(4, 2).unwrap(), c).unwrap();
            assert_eq!(b.component, c);
            assert!(respects(&rep.x, &b.f0, &b.f1, b.case).unwrap());
        }
    }

    #[test]
    fn partial_flags_at_2_3() {
        let d = crate::diagram::regular_type(2, 3).unwrap();
        let rep = representative(&d).unwrap();
        let r = resolve_regular(&rep.x, Component::Plus).unwrap();
        assert_eq!(r.point.case, FlagCase::D2a { k: 1 });
        assert_eq!(r.point.f1.kind, FlagKind::Partial(1));
        assert!(r.steps.iter().any(|s| s.rule == StepRule::ComponentChoice && s.deferred));
    }

    #[test]
    fn forced_step_dimensions() {
        let at = |m, n| forced_step_space(&representative(&crate::diagram::regular_type(m, n).unwrap()).unwrap().x).dim();
        assert_eq!(at(4, 3), 2);
        assert_eq!(at(5, 2), 1);
        assert_eq!(forced_step_space(&space(5, 2).zero_element()).dim(), 0);
    }

    #[test]
    fn fiber_of_coordinate_flags() {
        for (m, n) in [(3, 1), (4, 2), (2, 3), (7, 2)] {
            let s = space(m, n);
            let (f0, f1, case) = coordinate_flags(&s);
            let basis = fiber_basis(&s, &f0, &f1, case).unwrap();
            assert_eq!(basis.len(), coordinate_fiber_positions(&s).unwrap().len());
            let x = fiber_sample(&s, &f0, &f1, case, 1).unwrap();
            assert!(respects(&x, &f0, &f1, case).unwrap());
        }
        assert_eq!(coordinate_fiber_positions(&space(3, 1)).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn zero_diagram_still_gets_isotropic_flags() {
        let d = ABDiagram::parse("2*a0+d0").unwrap();
        let p = build_flags(&d, Component::Plus).unwrap();
        assert!(is_self_orthogonal(&p.f0) && is_self_orthogonal(&p.f1));
        assert_eq!(build_flags(&ABDiagram::parse("a1").unwrap(), Component::Minus).unwrap_err(), Error::ComponentUnavailable);
    }
}

