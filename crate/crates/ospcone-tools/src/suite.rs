//! The eight acceptance criteria, run as exact checks.

use std::collections::BTreeSet;

use ospcone_core::diagram::{validate, Sym};
use ospcone_core::flags::{
    build_flags, coordinate_flags, duals_equivalent, fiber_sample, forced_step_space, is_self_orthogonal,
    resolve_regular, respects, Component, FlagCase,
};
use ospcone_core::osp::{
    act, adjoint_identity_holds, characteristic_transfer, is_nilpotent_odd, make_space, nilpotency_pair, q0, q1,
    random_group_element, random_odd_element, Algebra, OddElement, OspSpace,
};
use ospcone_core::section::{build_section, check_regularity_implications, check_section};
use ospcone_core::weights::{bound_report, family_item};
use ospcone_core::{classify, enumerate_diagrams, regular_type, representative, ABDiagram, Error, Mat, Subspace};

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub m_max: usize,
    pub n_max: usize,
    pub seed: u64,
    pub size_guard: usize,
    /// Replace the symplectic form by a symmetric one, to see the suite fail.
    pub inject_bad_form: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { m_max: 6, n_max: 3, seed: 0, size_guard: 64, inject_bad_form: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub number: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub failures: Vec<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("criterion {} [{verdict}] {}: {}", self.number, self.title, self.detail)
    }
}

struct Tally {
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, what: &str, e: Error) {
        self.failures.push(format!("{what}: {e}"));
    }

    fn finish(self, number: usize, title: &'static str, detail: String) -> CriterionResult {
        let passed = self.failures.is_empty();
        let detail = if passed {
            detail
        } else {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            let more = self.failures.len().saturating_sub(3);
            let tail = if more > 0 { format!(" (+{more} more)") } else { String::new() };
            format!("{}{tail}", shown.join("; "))
        };
        CriterionResult { number, title, passed, detail, failures: self.failures }
    }
}

fn components_for(m: usize) -> Vec<Component> {
    if m % 2 == 0 {
        vec![Component::Plus, Component::Minus]
    } else {
        vec![Component::NotApplicable]
    }
}

pub fn round_trip(cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut count = 0;
    for m in 1..=cfg.m_max {
        for n in 1..=cfg.n_max {
            let all = match enumerate_diagrams(m, n, cfg.size_guard) {
                Ok(all) => all,
                Err(e) => {
                    t.error(&format!("enumerate ({m},{n})"), e);
                    continue;
                }
            };
            for d in all {
                count += 1;
                match representative(&d) {
                    Ok(rep) => {
                        t.check(is_nilpotent_odd(&rep.x), || format!("{d} at ({m},{n}) is not nilpotent"));
                        t.check(adjoint_identity_holds(&rep.x), || format!("{d} at ({m},{n}) breaks the adjoint identity"));
                        match classify(&rep.x) {
                            Ok(c) => t.check(c == d, || format!("{d} at ({m},{n}) classified as {c}")),
                            Err(e) => t.error(&format!("classify {d}"), e),
                        }
                    }
                    Err(e) => t.error(&format!("representative {d}"), e),
                }
            }
        }
    }
    t.finish(1, "round-trip classification", format!("{count} diagrams with m <= {}, n <= {}", cfg.m_max, cfg.n_max))
}

/// The example flags for ε₁+α₀ at (3,1), compared component by component.
fn epsilon_example_matches() -> Result<bool, Error> {
    let d = ABDiagram::parse("e1+a0")?;
    let p = build_flags(&d, Component::NotApplicable)?;
    let rep = representative(&d)?;
    let row = |sym: Sym, len: usize| rep.rows.iter().find(|r| r.start == sym && r.len() == len);
    let (Some(ab), Some(ba), Some(a0)) = (row(Sym::A, 2), row(Sym::B, 2), row(Sym::A, 1)) else {
        return Ok(false);
    };
    let span = |d: usize, vs: &[&Vec<_>]| Subspace::span(d, &vs.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
    let (a1, b1, b2, a2, a1p) = (&ab.vectors[0], &ab.vectors[1], &ba.vectors[0], &ba.vectors[1], &a0.vectors[0]);
    Ok(p.f0.component(1) == Some(span(3, &[a2]))
        && p.f0.component(2) == Some(span(3, &[a1p, a2]))
        && p.f0.component(3) == Some(span(3, &[a1, a2, a1p]))
        && p.f1.component(1) == Some(span(2, &[b2]))
        && p.f1.component(2) == Some(span(2, &[b1, b2])))
}

pub fn surjectivity(cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut count = 0;
    for n in 1..=cfg.n_max {
        for m in [2 * n - 1, 2 * n, 2 * n + 1, 2 * n + 2] {
            let all = match enumerate_diagrams(m, n, cfg.size_guard.max(m * n)) {
                Ok(all) => all,
                Err(e) => {
                    t.error(&format!("enumerate ({m},{n})"), e);
                    continue;
                }
            };
            for d in all {
                for c in components_for(m) {
                    count += 1;
                    let p = match build_flags(&d, c) {
                        Ok(p) => p,
                        Err(e) => {
                            t.error(&format!("build_flags {d} ({m},{n}) {}", c.tag()), e);
                            continue;
                        }
                    };
                    let ok = respects(&p.x, &p.f0, &p.f1, p.case).unwrap_or(false)
                        && duals_equivalent(&p.x, &p.f0, &p.f1, p.case).unwrap_or(false)
                        && is_self_orthogonal(&p.f0)
                        && is_self_orthogonal(&p.f1)
                        && p.component == c;
                    t.check(ok, || format!("flags for {d} ({m},{n}) {} fail a check", c.tag()));
                }
            }
        }
    }
    match epsilon_example_matches() {
        Ok(ok) => t.check(ok, || "e1+a0 flags differ from the expected chains".into()),
        Err(e) => t.error("e1+a0 example", e),
    }
    t.finish(2, "flag construction on every diagram", format!("{count} diagram/component pairs, e1+a0 chains reproduced"))
}

pub const RESOLUTION_POINTS: [(usize, usize); 8] = [(3, 2), (4, 2), (5, 2), (6, 2), (2, 2), (3, 3), (7, 2), (8, 2)];

pub fn birationality(_cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut families = BTreeSet::new();
    let mut pairs = 0;
    for (m, n) in RESOLUTION_POINTS {
        let x = match regular_type(m, n).and_then(|d| representative(&d)) {
            Ok(r) => r.x,
            Err(e) => {
                t.error(&format!("regular representative ({m},{n})"), e);
                continue;
            }
        };
        families.insert(FlagCase::of(m, n).tag());
        let mut resolved = Vec::new();
        for c in components_for(m) {
            match resolve_regular(&x, c) {
                Ok(r) => {
                    t.check(r.steps.iter().all(|s| s.dim == 1), || format!("({m},{n}) has a step of dimension > 1"));
                    resolved.push(r.point);
                }
                Err(e) => t.error(&format!("resolve ({m},{n}) {}", c.tag()), e),
            }
        }
        if let [p, q] = &resolved[..] {
            // a partial V₀ flag short of the middle has no component to choose
            if p.component != Component::NotApplicable {
                pairs += 1;
                t.check(!p.f0.same_components(&q.f0), || format!("({m},{n}) components give the same flag"));
            }
        }
    }
    t.check(families.len() == 7, || format!("only {} case families covered", families.len()));
    t.finish(3, "unique flags over regular elements", format!("{} points, 7 families, {pairs} component pairs distinct", RESOLUTION_POINTS.len()))
}

fn regular_x(m: usize, n: usize) -> Result<OddElement, Error> {
    Ok(representative(&regular_type(m, n)?)?.x)
}

pub fn ambiguity(_cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut seen = Vec::new();
    for n in [2, 3] {
        match regular_x(2 * n - 2, n) {
            Ok(x) => {
                let d = forced_step_space(&x).dim();
                seen.push(format!("({},{n})={d}", 2 * n - 2));
                t.check(d == 2, || format!("m=2n-2 at n={n} gives dimension {d}"));
            }
            Err(e) => t.error(&format!("regular element n={n}"), e),
        }
    }
    // the m = 2n−2 points are themselves D2a; the other six families must give a single line
    for (m, n) in RESOLUTION_POINTS {
        if matches!(FlagCase::of(m, n), FlagCase::D2a { .. }) {
            continue;
        }
        match regular_x(m, n) {
            Ok(x) => {
                let d = forced_step_space(&x).dim();
                seen.push(format!("({m},{n})={d}"));
                t.check(d == 1, || format!("({m},{n}) gives dimension {d}"));
            }
            Err(e) => t.error(&format!("regular element ({m},{n})"), e),
        }
    }
    t.finish(4, "first-step ambiguity at m = 2n-2", seen.join(" "))
}

pub const SECTION_SAMPLES: usize = 20;

pub fn section(cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut count = 0;
    for n in 1..=5 {
        for m in 1..=12 - 2 * n {
            count += 1;
            match build_section(m, n) {
                Ok(s) => {
                    let c = check_section(&s, SECTION_SAMPLES, cfg.seed);
                    t.check(c.samples >= SECTION_SAMPLES || s.l_basis.is_empty(), || format!("({m},{n}) drew {} samples", c.samples));
                    for (name, ok) in c.entries() {
                        t.check(ok, || format!("({m},{n}) {name}"));
                    }
                }
                Err(e) => t.error(&format!("section ({m},{n})"), e),
            }
        }
    }
    t.finish(5, "transversal slice", format!("{count} shapes with m + 2n <= 12, {SECTION_SAMPLES} samples each"))
}

pub fn slice_regularity(cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut checks = 0;
    for (m, n) in [(3, 2), (4, 2), (5, 2), (6, 2)] {
        match check_regularity_implications(m, n, 10, cfg.seed) {
            Ok(r) => {
                checks += r.checks.len();
                for f in r.failures {
                    t.failures.push(f);
                }
            }
            Err(e) => t.error(&format!("({m},{n})"), e),
        }
    }
    t.finish(6, "slice regularity and image formulas", format!("{checks} checks at (3,2), (4,2), (5,2), (6,2)"))
}

pub fn weight_identity(_cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut items = BTreeSet::new();
    for m in 1..=10 {
        for n in 1..=5 {
            items.insert(family_item(m, n));
            match bound_report(m, n) {
                Ok(r) => t.check(r.matches(), || {
                    format!("({m},{n}): closed form {} but computed {}", r.closed_form, &r.psi - &r.delta_n)
                }),
                Err(e) => t.error(&format!("({m},{n})"), e),
            }
        }
    }
    t.check(items.len() == 6, || format!("only items {items:?} covered"));
    t.finish(7, "weight bound identity", "50 shapes with m <= 10, n <= 5, items a-f".into())
}

pub const IDENTITY_SAMPLES: u64 = 200;

fn bad_form(space: &OspSpace) -> OspSpace {
    let mut s = space.clone();
    let d = s.j.rows();
    s.j = Mat::zeros(d, d);
    for i in 0..d {
        s.j[(i, d - 1 - i)] = ospcone_core::GaussianRational::one();
    }
    s
}

pub fn identities(cfg: &SuiteConfig) -> CriterionResult {
    let mut t = Tally::new();
    let mut count = 0;
    for m in 1..=cfg.m_max {
        for n in 1..=cfg.n_max {
            let mut space = match make_space(m, n) {
                Ok(s) => s,
                Err(e) => {
                    t.error(&format!("space ({m},{n})"), e);
                    continue;
                }
            };
            if cfg.inject_bad_form {
                space = bad_form(&space);
            }
            let (f0, f1, case) = coordinate_flags(&space);
            let diagrams = enumerate_diagrams(m, n, cfg.size_guard.max(m * n)).unwrap_or_default();
            for k in 0..IDENTITY_SAMPLES {
                let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(k);
                count += 1;
                let x = random_odd_element(&space, seed);
                let nil = if k % 2 == 0 || diagrams.is_empty() {
                    fiber_sample(&space, &f0, &f1, case, seed)
                } else {
                    representative(&diagrams[k as usize % diagrams.len()]).map(|r| r.x)
                };
                let nil = match nil {
                    Ok(y) => y,
                    Err(e) => {
                        t.error(&format!("nilpotent sample ({m},{n}) #{k}"), e);
                        continue;
                    }
                };
                let g0 = random_group_element(&space, Algebra::So, seed);
                let g1 = random_group_element(&space, Algebra::Sp, seed ^ 0x5eed);
                for (label, y) in [("random", &x), ("nilpotent", &nil)] {
                    t.check(space.in_algebra(&q0(y), Algebra::So), || format!("({m},{n}) #{k} {label}: q0 lies in so(V0)"));
                    t.check(space.in_algebra(&q1(y), Algebra::Sp), || format!("({m},{n}) #{k} {label}: q1 lies in sp(V1)"));
                    let (l, r) = characteristic_transfer(y);
                    t.check(l == r, || format!("({m},{n}) #{k} {label}: characteristic transfer"));
                    let (p, q) = nilpotency_pair(y);
                    t.check(p == q, || format!("({m},{n}) #{k} {label}: nilpotency equivalence"));
                    let moved = act(y, &g0, &g1);
                    let same = respects(y, &f0, &f1, case).ok() == respects(&moved, &f0.transform(&g0), &f1.transform(&g1), case).ok();
                    t.check(same, || format!("({m},{n}) #{k} {label}: respects is equivariant"));
                }
                t.check(is_nilpotent_odd(&nil), || format!("({m},{n}) #{k}: nilpotent sample is not nilpotent"));
                let before = classify(&nil);
                let after = classify(&act(&nil, &g0, &g1));
                let ok = matches!((&before, &after), (Ok(a), Ok(b)) if a == b && validate(a).is_empty());
                t.check(ok, || format!("({m},{n}) #{k}: classify is not equivariant"));
            }
        }
    }
    t.finish(8, "algebraic identities on random elements", format!("{count} samples with m <= {}, n <= {}", cfg.m_max, cfg.n_max))
}

pub type Criterion = fn(&SuiteConfig) -> CriterionResult;

pub const CRITERIA: [Criterion; 8] =
    [round_trip, surjectivity, birationality, ambiguity, section, slice_regularity, weight_identity, identities];

/// Runs all criteria concurrently; results come back in criterion order.
pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA.iter().map(|c| s.spawn(move || c(cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    })
}

pub fn report(results: &[CriterionResult]) -> String {
    let mut out: String = results.iter().map(|r| r.line() + "\n").collect();
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    out
}
