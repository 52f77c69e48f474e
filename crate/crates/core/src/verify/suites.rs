use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lambda::{lambda_tensor, lambda_window, product_bound};
use super::{lattice_window, random_molecule, random_rational, CheckRecord, Checks, Observation, Suite, SuiteConfig, SuiteReport};
use crate::basis_cube::{self, basis_vector, block_projection, CubeBasisCoefficients, CubeBasisIndex};
use crate::basis_rd::{
    arrangement_rd, basis_vector_rd, clamp_compatible, expand_rd, level_indices, projection_ladder,
    reconstruct_rd, shell_map, v_set, w_set, RdBasisCoefficients, RdKind,
};
use crate::constants::{cube_block_bound, cube_partial_sum_envelope, rd_partial_sum_envelope, shell_block_bound};
use crate::dyadic::{rational_to_f64, Dyadic, Rational};
use crate::error::{Error, Result};
use crate::grid::{lattice_box, GridSpec, Point};
use crate::molecule::{MapRule, Molecule, SpaceDescriptor, TabulatedMap};
use crate::pnorm::{exact_norm_with, line_f1_norm, tree_flow, GroundSet, Metric, NormMethod, NormOptions};
use crate::retraction::{fixes_vertices, lipschitz_probe, Patch, ProbeConfig};

macro_rules! group {
    ($c:expr, $name:expr, $e:expr) => {
        if let Err(err) = $e {
            $c.fail($name, &err);
        }
    };
}

/// Runs one suite (or every suite, with check names prefixed by the suite name).
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if !(1..=3).contains(&cfg.d) {
        return Err(Error::Precondition(format!("suites support d in 1..=3, got {}", cfg.d)));
    }
    crate::pnorm::check_p(cfg.p)?;
    if cfg.cap < 2 || cfg.cap > 16 {
        return Err(Error::Precondition(format!("suite cap must lie in 2..=16, got {}", cfg.cap)));
    }
    if suite == Suite::All {
        let mut checks = Vec::new();
        let mut observations = Vec::new();
        for s in Suite::EACH {
            let r = run_suite(s, cfg)?;
            checks.extend(r.checks.into_iter().map(|c| CheckRecord { name: format!("{}/{}", s.name(), c.name), ..c }));
            observations.extend(
                r.observations.into_iter().map(|o| Observation { name: format!("{}/{}", s.name(), o.name), ..o }),
            );
        }
        return Ok(SuiteReport::new("all", cfg, checks, observations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut c = Checks::default();
    let rng = &mut rng;
    match suite {
        Suite::Lambda => group!(c, "lambda", lambda_suite(cfg, rng, &mut c)),
        Suite::Retraction => group!(c, "retraction", retraction_suite(cfg, &mut c)),
        Suite::Projection => {
            group!(c, "projection-algebra", projection_algebra(cfg, rng, &mut c));
            group!(c, "retract", retract_checks(cfg, rng, &mut c));
            group!(c, "pushforward", pushforward_checks(cfg, rng, &mut c));
        }
        Suite::BasisCube => {
            group!(c, "cube-expansion", cube_expansion(cfg, rng, &mut c));
            group!(c, "cube-blocks", cube_blocks(cfg, rng, &mut c));
            group!(c, "cube-norms", cube_norms(cfg, rng, &mut c));
        }
        Suite::BasisRd => {
            group!(c, "rd-expansion", rd_expansion(cfg, rng, &mut c));
            group!(c, "rd-ladder", rd_ladder(cfg, rng, &mut c));
            group!(c, "rd-shells", rd_shells(cfg, &mut c));
            group!(c, "rd-norms", rd_norms(cfg, rng, &mut c));
        }
        Suite::NormOracle => {
            group!(c, "norm-oracles", norm_oracles(cfg, rng, &mut c));
            group!(c, "norm-axioms", norm_axioms(cfg, rng, &mut c));
        }
        Suite::All => unreachable!(),
    }
    Ok(SuiteReport::new(suite.name(), cfg, c.records, c.observations))
}

fn pow2_label(log2: i64) -> String {
    Dyadic::pow2(log2).to_string()
}

fn lambda_suite(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    for log2 in [0i64, -1, -2] {
        let level = cfg.mesh_level.max((-log2) as u32);
        let s = lambda_window(d, log2, level, &[2, 4])?;
        let tag = format!("[R={}]", pow2_label(log2));
        c.exact(format!("partition-of-unity{tag}"), s.partition);
        c.exact(format!("support{tag}"), s.support);
        c.exact(format!("kronecker{tag}"), s.kronecker);
        c.exact(format!("intra-cube-lipschitz{tag}"), s.lipschitz);
        c.exact(format!("refinement{tag}"), s.refinement);
        c.exact(format!("well-defined{tag}"), s.well_defined);
        let vacuous = s.boundary_points == 0 || s.lipschitz_pairs == 0 || s.refinement_checks == 0;
        c.exact(format!("window-nonvacuous{tag}"), usize::from(vacuous));
    }
    let count = cfg.samples * 40;
    let mut bad = 0;
    for log2 in [0i64, -1, -2] {
        bad += lambda_tensor(rng, d, log2, cfg.mesh_level.max((-log2) as u32), count)?.1;
    }
    c.exact("tensorization", bad);
    c.exact("product-bound", product_bound(rng, d, cfg.mesh_level.max(1), count)?.1);
    Ok(())
}

fn probe_patch(d: usize) -> Result<Patch> {
    if d <= 2 {
        Patch::standard(d)
    } else {
        Patch::new(GridSpec::dyadic(d, 0), vec![vec![0; d]], Point::origin(d))
    }
}

fn retraction_suite(cfg: &SuiteConfig, c: &mut Checks) -> Result<()> {
    let patch = probe_patch(cfg.d)?;
    c.exact("fixes-vertices", usize::from(!fixes_vertices(&patch)?));
    let probe = ProbeConfig { p: cfg.p, mesh_level: cfg.mesh_level, seed: cfg.seed, ..Default::default() };
    let r = lipschitz_probe(&patch, &probe)?;
    c.at_most("sup-ratio-envelope", r.measured_max, r.envelope, 0.0);
    c.at_most("within-cube-chain", r.within_cube_max_excess, 0.0, 1e-9);
    c.observe("sup-ratio-vs-nominal-constant", r.measured_max, r.nominal_constant);
    c.observe("l1-ratio-vs-nominal-constant", r.measured_l1_max, r.nominal_constant);
    c.observe("pth-power-ratio-vs-chain", r.chain_ratio_max, r.chain_bound);
    c.observe("pairs-evaluated", r.samples as f64, r.within_cube_pairs as f64);
    Ok(())
}

fn full_candidates(d: usize) -> Vec<Point> {
    lattice_window(d, if d <= 2 { 3 } else { 2 }, 3)
}

fn dy(s: &str) -> Dyadic {
    s.parse().expect("literal dyadic")
}

fn projection_algebra(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let full = SpaceDescriptor::full(d);
    let cands = full_candidates(d);
    let configs = [
        ("1", "1", "1", "1/2"),
        ("1", "1", "2", "1/2"),
        ("2", "1", "3", "1/4"),
        ("1/2", "1/2", "1", "1/4"),
        ("1", "1/2", "5/2", "1/2"),
        ("2", "2", "3", "1"),
    ];
    for (t, r, t2, r2) in configs {
        let (t, t2) = (dy(t), dy(t2));
        let (g, g2) = (GridSpec::new(d, &dy(r))?, GridSpec::new(d, &dy(r2))?);
        let mut bad = 0;
        for _ in 0..cfg.samples * 4 {
            let m = random_molecule(rng, &full, &cands, 6)?;
            let e = m.project(&t, &g)?;
            if m.project(&t2, &g2)?.project(&t, &g)? != e || e.project(&t2, &g2)? != e {
                bad += 1;
            }
        }
        c.exact(format!("project-composition[t={t},R={r},t'={t2},R'={r2}]"), bad);
    }
    for (t, r) in [("1", "1"), ("2", "1"), ("1", "1/2"), ("3/2", "1/2"), ("2", "1/4")] {
        let t = dy(t);
        let g = GridSpec::new(d, &dy(r))?;
        let (mut commute, mut factor, mut idem) = (0, 0, 0);
        for _ in 0..cfg.samples * 2 {
            let m = random_molecule(rng, &full, &cands, 6)?;
            let clamped_retract = m.retract(&g)?.clamp_linearized(&t)?;
            if clamped_retract != m.clamp_linearized(&t)?.retract(&g)? {
                commute += 1;
            }
            let pm = m.project(&t, &g)?;
            if pm != clamped_retract.embed(full.clone())? {
                factor += 1;
            }
            if pm.project(&t, &g)? != pm {
                idem += 1;
            }
        }
        c.exact(format!("clamp-retract-commute[t={t},R={r}]"), commute);
        c.exact(format!("project-factorization[t={t},R={r}]"), factor);
        c.exact(format!("project-idempotent[t={t},R={r}]"), idem);
    }
    Ok(())
}

fn retract_checks(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let full = SpaceDescriptor::full(d);
    let cands = full_candidates(d);
    let fine = GridSpec::dyadic(d, 2);
    let coarse = [GridSpec::dyadic(d, 1), GridSpec::dyadic(d, 0)];
    let (mut idem, mut refine, mut mass) = (0, 0, 0);
    for _ in 0..cfg.samples * 4 {
        let m = random_molecule(rng, &full, &cands, 6)?;
        let r = m.retract(&fine)?;
        if r.retract(&fine)? != r {
            idem += 1;
        }
        for g in &coarse {
            if r.retract(g)? != m.retract(g)? {
                refine += 1;
            }
        }
        let total: Rational = m.lattice_terms(&fine)?.values().sum();
        if total != m.total_mass() {
            mass += 1;
        }
    }
    c.exact("retract-idempotent", idem);
    c.exact("retract-refinement[S/R=2,4]", refine);
    c.exact("retract-mass", mass);
    Ok(())
}

fn pushforward_checks(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let full = SpaceDescriptor::full(d);
    let cands = full_candidates(d);
    let base = Point::origin(d);
    let mut bad = 0;
    for _ in 0..cfg.samples * 2 {
        let pts: Vec<Point> = cands.choose_multiple(rng, 12).cloned().collect();
        let domain = SpaceDescriptor::finite(pts.iter().cloned(), base.clone())?;
        let mut table: BTreeMap<Point, Point> =
            pts.iter().map(|x| (x.clone(), cands.choose(rng).expect("candidates").clone())).collect();
        table.insert(base.clone(), base.clone());
        let f = TabulatedMap::new(domain.clone(), full.clone(), MapRule::Table(table))?;
        let m1 = random_molecule(rng, &domain, &pts, 5)?;
        let m2 = random_molecule(rng, &domain, &pts, 5)?;
        let a = random_rational(rng);
        let lhs = m1.add(&m2.scale(&a))?.pushforward(&f)?;
        let rhs = m1.pushforward(&f)?.add(&m2.pushforward(&f)?.scale(&a))?;
        if lhs != rhs {
            bad += 1;
        }
        let t = dy("1");
        let m1 = random_molecule(rng, &full, &cands, 5)?;
        let m2 = random_molecule(rng, &full, &cands, 5)?;
        if m1.add(&m2)?.clamp_linearized(&t)? != m1.clamp_linearized(&t)?.add(&m2.clamp_linearized(&t)?)? {
            bad += 1;
        }
    }
    c.exact("pushforward-linear", bad);
    Ok(())
}

fn cube_depth(cfg: &SuiteConfig) -> u32 {
    cfg.depth.min(if cfg.d >= 3 { 2 } else { 4 })
}

fn cube_candidates(d: usize, depth: u32) -> Vec<Point> {
    lattice_box(d, depth, 0, 1 << depth)
}

fn cube_expansion(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let n_max = cube_depth(cfg);
    let cube = SpaceDescriptor::unit_cube(d);
    let cands = cube_candidates(d, n_max);
    let (mut round, mut trunc) = (0, 0);
    for _ in 0..cfg.samples * 8 {
        let m = random_molecule(rng, &cube, &cands, 6)?;
        let coeffs = basis_cube::expand(&m, n_max)?;
        if basis_cube::reconstruct(&coeffs)? != m {
            round += 1;
        }
        for n in 0..=n_max {
            if basis_cube::reconstruct(&coeffs.up_to_level(n))? != m.retract(&GridSpec::dyadic(d, n as i64))? {
                trunc += 1;
            }
        }
    }
    c.exact(format!("round-trip[depth={n_max}]"), round);
    c.exact("truncation-equals-retract", trunc);
    let mut unit = 0;
    for idx in basis_cube::arrangement(n_max.min(2), d) {
        let coeffs = basis_cube::expand(&basis_vector(&idx)?, n_max)?;
        if coeffs.entries() != [(idx.clone(), Rational::from_integer(1.into()))] {
            unit += 1;
        }
    }
    c.exact("basis-vector-expansion", unit);
    Ok(())
}

fn combination(vectors: &[&Molecule], coeffs: &[Rational], space: &SpaceDescriptor) -> Result<Molecule> {
    let mut terms = Vec::new();
    for (v, a) in vectors.iter().zip(coeffs) {
        terms.extend(v.terms().iter().map(|(x, b)| (x.clone(), b * a)));
    }
    Molecule::canonicalize(terms, space.clone())
}

fn cube_blocks(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let cube = SpaceDescriptor::unit_cube(d);
    let (mut selects, mut idem, mut commute) = (0, 0, 0);
    for n in 0..=cube_depth(cfg).min(2) {
        let level: Vec<CubeBasisIndex> =
            basis_cube::arrangement(n, d).into_iter().filter(|i| i.level == n).collect();
        let vectors: Vec<Molecule> = level.iter().map(basis_vector).collect::<Result<_>>()?;
        for _ in 0..cfg.samples {
            let count = rng.gen_range(1..=level.len().min(6));
            let chosen: Vec<usize> = sample(rng, level.len(), count).into_vec();
            let coeffs: Vec<Rational> = chosen.iter().map(|_| random_rational(rng)).collect();
            let refs: Vec<&Molecule> = chosen.iter().map(|&i| &vectors[i]).collect();
            let m = combination(&refs, &coeffs, &cube)?;
            let mut f = BTreeSet::new();
            let mut g = BTreeSet::new();
            for idx in &level {
                match rng.gen_range(0..3) {
                    0 => f.insert(idx.point.clone()),
                    1 => g.insert(idx.point.clone()),
                    _ => false,
                };
            }
            let qf = block_projection(n, &f, &m)?;
            let keep: Vec<usize> = (0..chosen.len()).filter(|&k| f.contains(&level[chosen[k]].point)).collect();
            let kept = combination(
                &keep.iter().map(|&k| refs[k]).collect::<Vec<_>>(),
                &keep.iter().map(|&k| coeffs[k].clone()).collect::<Vec<_>>(),
                &cube,
            )?;
            if qf != kept {
                selects += 1;
            }
            if block_projection(n, &f, &qf)? != qf {
                idem += 1;
            }
            let qg = block_projection(n, &g, &m)?;
            let fg = block_projection(n, &f, &qg)?;
            let gf = block_projection(n, &g, &qf)?;
            let rest: BTreeSet<Point> = level.iter().map(|i| i.point.clone()).filter(|x| !f.contains(x)).collect();
            if !fg.is_zero() || !gf.is_zero() || qf.add(&block_projection(n, &rest, &m)?)? != m {
                commute += 1;
            }
        }
    }
    c.exact("block-projection-selects", selects);
    c.exact("block-projection-idempotent", idem);
    c.exact("block-projection-commute", commute);
    Ok(())
}

fn ground_for<'a>(ms: impl IntoIterator<Item = &'a Molecule>, base: &Point) -> Result<GroundSet> {
    let mut pts = BTreeSet::new();
    for m in ms {
        pts.extend(m.support().cloned());
    }
    GroundSet::new(pts, base.clone(), Metric::Sup)
}

/// Consecutive runs of `vectors` with at most `max_vectors` members whose supports, together
/// with the base point, span at most `max_points` points. Vectors wider than that on their own
/// are skipped.
pub fn greedy_blocks(vectors: &[Molecule], max_vectors: usize, max_points: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    let mut pts: BTreeSet<Point> = BTreeSet::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut next = pts.clone();
        next.extend(v.support().cloned());
        next.insert(v.base().clone());
        if cur.len() < max_vectors && next.len() <= max_points {
            cur.push(i);
            pts = next;
            continue;
        }
        if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        pts = v.support().cloned().collect();
        pts.insert(v.base().clone());
        if pts.len() <= max_points {
            cur.push(i);
        } else {
            pts.clear();
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// `max_eps ||sum eps_i c_i v_i|| / ||sum c_i v_i||` over all sign patterns, with norms over the
/// union of the supports. `None` when that ground set exceeds `cap` or the combination vanishes.
pub fn block_sign_ratio(vectors: &[&Molecule], coeffs: &[Rational], p: f64, cap: usize) -> Result<Option<f64>> {
    let Some(first) = vectors.first() else { return Ok(None) };
    let space = first.space().clone();
    let ground = ground_for(vectors.iter().copied(), first.base())?;
    if ground.len() > cap || vectors.len() > 20 {
        return Ok(None);
    }
    let opts = NormOptions::dp(cap);
    let whole = exact_norm_with(&combination(vectors, coeffs, &space)?, &ground, p, &opts)?.value;
    if whole == 0.0 {
        return Ok(None);
    }
    let k = vectors.len();
    let mut worst: f64 = 1.0;
    for signs in 1u32..(1 << (k - 1)) {
        let flipped: Vec<Rational> =
            coeffs.iter().enumerate().map(|(i, a)| if signs >> i & 1 == 1 { -a } else { a.clone() }).collect();
        let v = exact_norm_with(&combination(vectors, &flipped, &space)?, &ground, p, &opts)?.value;
        worst = worst.max(v / whole);
    }
    Ok(Some(worst))
}

/// `max_j ||partials[j]|| / ||m||` with every norm over one ground set spanning all supports.
/// `None` when that set exceeds `cap` or `m` vanishes.
pub fn partial_sum_ratio(m: &Molecule, partials: &[Molecule], p: f64, cap: usize) -> Result<Option<f64>> {
    let ground = ground_for(partials.iter().chain([m]), m.base())?;
    if ground.len() > cap || m.is_zero() {
        return Ok(None);
    }
    let opts = NormOptions::dp(cap);
    let whole = exact_norm_with(m, &ground, p, &opts)?.value;
    let mut worst: f64 = 0.0;
    for s in partials {
        worst = worst.max(exact_norm_with(s, &ground, p, &opts)?.value / whole);
    }
    Ok(Some(worst))
}

struct RatioTally {
    worst: f64,
    measured: usize,
    skipped: usize,
}

impl RatioTally {
    fn new() -> Self {
        RatioTally { worst: 0.0, measured: 0, skipped: 0 }
    }

    fn add(&mut self, r: Option<f64>) {
        match r {
            Some(v) => {
                self.worst = self.worst.max(v);
                self.measured += 1;
            }
            None => self.skipped += 1,
        }
    }

    /// Passes only when at least one instance was measured.
    fn report(&self, c: &mut Checks, name: &str, bound: f64, tol: f64) {
        let measured = if self.measured == 0 { f64::INFINITY } else { self.worst };
        c.at_most(name, measured, bound, tol);
        c.observe(format!("{name}-instances"), self.measured as f64, (self.measured + self.skipped) as f64);
    }
}

fn block_unconditionality(
    vectors: &[Molecule],
    cfg: &SuiteConfig,
    rng: &mut ChaCha8Rng,
    tally: &mut RatioTally,
) -> Result<()> {
    for block in greedy_blocks(vectors, 8, cfg.cap.min(10)) {
        let refs: Vec<&Molecule> = block.iter().map(|&i| &vectors[i]).collect();
        for _ in 0..2 {
            let coeffs: Vec<Rational> = refs.iter().map(|_| random_rational(rng)).collect();
            tally.add(block_sign_ratio(&refs, &coeffs, cfg.p, cfg.cap)?);
        }
    }
    Ok(())
}

fn cube_norms(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let cube = SpaceDescriptor::unit_cube(d);
    let mut tally = RatioTally::new();
    for n in 0..=cube_depth(cfg).min(3) {
        let vectors: Vec<Molecule> = basis_cube::arrangement(n, d)
            .iter()
            .filter(|i| i.level == n)
            .map(basis_vector)
            .collect::<Result<_>>()?;
        block_unconditionality(&vectors, cfg, rng, &mut tally)?;
    }
    tally.report(c, "block-unconditional", cube_block_bound(cfg.p, d), 1e-6);

    let depth = if d == 1 { cube_depth(cfg).min(3) } else { 1 };
    let cands = cube_candidates(d, depth);
    let mut tally = RatioTally::new();
    for _ in 0..cfg.samples {
        let m = random_molecule(rng, &cube, &cands, 3)?;
        let entries = basis_cube::expand(&m, depth)?.entries().to_vec();
        let partials: Vec<Molecule> = (0..=entries.len())
            .map(|j| basis_cube::reconstruct(&CubeBasisCoefficients::new(d, entries[..j].to_vec())?))
            .collect::<Result<_>>()?;
        tally.add(partial_sum_ratio(&m, &partials, cfg.p, cfg.cap)?);
    }
    tally.report(c, "partial-sum-envelope", cube_partial_sum_envelope(cfg.p, d), 1e-9);
    Ok(())
}

fn rd_depth(cfg: &SuiteConfig) -> u32 {
    cfg.depth.min(if cfg.d >= 3 { 1 } else { 3 })
}

fn rd_expansion(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let k = &cfg.k;
    let depth = rd_depth(cfg);
    let full = SpaceDescriptor::full(d);
    let cands = v_set(depth as i64, d, k)?;
    let (mut round, mut residue) = (0, 0);
    for _ in 0..cfg.samples * 8 {
        let m = random_molecule(rng, &full, &cands, 6)?;
        match expand_rd(&m, depth, k) {
            Ok(coeffs) => {
                if reconstruct_rd(&coeffs)? != m {
                    round += 1;
                }
            }
            Err(Error::Internal(_)) => residue += 1,
            Err(e) => return Err(e),
        }
    }
    c.exact(format!("round-trip[depth={depth}]"), round);
    c.exact("peeling-residue", residue);
    let mut unit = 0;
    for idx in arrangement_rd(depth.min(1), d, k)? {
        let coeffs = expand_rd(&basis_vector_rd(&idx, k)?, depth, k)?;
        if coeffs.entries() != [(idx.clone(), Rational::from_integer(1.into()))] {
            unit += 1;
        }
    }
    c.exact("basis-vector-expansion", unit);
    Ok(())
}

fn rd_ladder(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let k = &cfg.k;
    let depth = rd_depth(cfg);
    let full = SpaceDescriptor::full(d);
    let cands = v_set(depth as i64, d, k)?;
    let top = (2 * depth as i64).min(8);
    let mut bad = 0;
    for _ in 0..cfg.samples * 2 {
        let m = random_molecule(rng, &full, &cands, 6)?;
        let ladder: Vec<Molecule> = (-2..=top).map(|j| projection_ladder(j, &m, k)).collect::<Result<_>>()?;
        for j in -2..=top {
            for j2 in -2..=top {
                let lhs = projection_ladder(j, &ladder[(j2 + 2) as usize], k)?;
                if lhs != ladder[(j.min(j2) + 2) as usize] {
                    bad += 1;
                }
            }
        }
    }
    c.exact("ladder-algebra", bad);
    let mut range = 0;
    for n in 0..=depth as i64 {
        let inner = w_set(n, d, k)?;
        let outer = v_set(n, d, k)?;
        for _ in 0..cfg.samples {
            let m = random_molecule(rng, &full, &inner, 5)?;
            if projection_ladder(2 * n - 1, &m, k)? != m {
                range += 1;
            }
            let m = random_molecule(rng, &full, &outer, 5)?;
            if projection_ladder(2 * n, &m, k)? != m {
                range += 1;
            }
        }
    }
    c.exact("ladder-range-identity", range);
    Ok(())
}

fn rd_shells(cfg: &SuiteConfig, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let k = &cfg.k;
    let (mut annihilate, mut compat, mut step, mut shells) = (0, 0, 0, 0);
    for n in 0..=rd_depth(cfg).min(2) {
        let mesh = Dyadic::pow2(-(n as i64));
        let grid = GridSpec::dyadic(d, n as i64);
        let cut = Dyadic::from_int(k.get(n as i64)?);
        for idx in level_indices(n, d, k)?.into_iter().filter(|i| i.kind() == RdKind::OuterShell) {
            shells += 1;
            let x = idx.point();
            if !projection_ladder(2 * n as i64 - 1, &basis_vector_rd(&idx, k)?, k)?.is_zero() {
                annihilate += 1;
            }
            if !clamp_compatible(x, n, k)? {
                compat += 1;
            }
            let y = shell_map(x, n, k)?;
            let signs_kept = x.coords().iter().zip(y.coords()).all(|(a, b)| a.signum() == b.signum());
            let in_window = grid.lattice_coords(&y)?.is_some() && y.sup_norm() <= cut;
            if y.sup_norm() != &x.sup_norm() - &mesh || !signs_kept || !in_window {
                step += 1;
            }
        }
    }
    c.exact("outer-shell-annihilation", annihilate);
    c.exact("clamp-compatibility", compat);
    c.exact("shell-step", step);
    c.exact("shell-points-nonvacuous", usize::from(shells == 0));
    Ok(())
}

fn rd_norms(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let k = &cfg.k;
    let depth = rd_depth(cfg);
    let mut tally = RatioTally::new();
    for n in 0..=depth.min(1) {
        let vectors: Vec<Molecule> = level_indices(n, d, k)?
            .iter()
            .filter(|i| i.kind() == RdKind::OuterShell)
            .map(|i| basis_vector_rd(i, k))
            .collect::<Result<_>>()?;
        block_unconditionality(&vectors, cfg, rng, &mut tally)?;
    }
    tally.report(c, "shell-block-unconditional", shell_block_bound(cfg.p, d), 1e-6);

    let pdepth = if d == 1 { depth.min(1) } else { 0 };
    let full = SpaceDescriptor::full(d);
    let cands = v_set(pdepth as i64, d, k)?;
    let mut tally = RatioTally::new();
    for _ in 0..cfg.samples {
        let m = random_molecule(rng, &full, &cands, 3)?;
        let entries = expand_rd(&m, pdepth, k)?.entries().to_vec();
        let partials: Vec<Molecule> = (0..=entries.len())
            .map(|j| reconstruct_rd(&RdBasisCoefficients::new(d, entries[..j].to_vec())?))
            .collect::<Result<_>>()?;
        tally.add(partial_sum_ratio(&m, &partials, cfg.p, cfg.cap)?);
    }
    tally.report(c, "partial-sum-envelope", rd_partial_sum_envelope(cfg.p, d), 1e-9);
    Ok(())
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Local search over representations `sum b_ij (delta(i) - delta(j))` of `m` on `ground`,
/// starting from an optimal tree flow. Each step adds a random multiple of a random 3- or
/// 4-cycle (half of the time the multiple that cancels one edge) and keeps improvements.
/// Returns `optimum^p - (cheapest cost seen)`; positive values would undercut the optimum.
pub fn representation_search(
    rng: &mut impl Rng,
    m: &Molecule,
    ground: &GroundSet,
    p: f64,
    steps: usize,
) -> Result<f64> {
    let n = ground.len();
    let res = exact_norm_with(m, ground, p, &NormOptions::dp(n.max(2)))?;
    let optimum = res.value.powf(p);
    if m.is_zero() || n < 3 {
        return Ok(0.0);
    }
    let index = |x: &Point| ground.index_of(x).ok_or_else(|| Error::Internal(format!("{x} missing from ground set")));
    let edges: Vec<(usize, usize)> =
        res.witness_tree.iter().map(|(a, b)| Ok((index(a)?, index(b)?))).collect::<Result<_>>()?;
    let divergence: BTreeMap<usize, Rational> =
        m.terms().iter().map(|(x, a)| Ok((index(x)?, a.clone()))).collect::<Result<_>>()?;
    let flows = tree_flow(n, n - 1, &edges, &divergence)?;

    let mut adj = vec![vec![]; n];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut depth = vec![usize::MAX; n];
    depth[n - 1] = 0;
    let mut queue = VecDeque::from([n - 1]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }

    let add = |b: &mut [f64], i: usize, j: usize, v: f64| {
        if i < j {
            b[i * n + j] += v;
        } else {
            b[j * n + i] -= v;
        }
    };
    let along = |b: &[f64], i: usize, j: usize| if i < j { b[i * n + j] } else { -b[j * n + i] };
    let mut dist_p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist_p[i * n + j] = ground.distance(i, j).to_f64().powf(p);
        }
    }
    let cost = |b: &[f64]| {
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let v = b[i * n + j];
                if v != 0.0 {
                    total += v.abs().powf(p) * dist_p[i * n + j];
                }
            }
        }
        total
    };

    let mut cur = vec![0.0; n * n];
    for (k, &(u, v)) in edges.iter().enumerate() {
        let (far, near) = if depth[u] > depth[v] { (u, v) } else { (v, u) };
        add(&mut cur, far, near, rational_to_f64(&flows[k]));
    }
    let scale = cur.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut cur_cost = cost(&cur);
    let mut best = cur_cost;
    for _ in 0..steps {
        let len = rng.gen_range(3..=n.min(4));
        let cycle = sample(rng, n, len).into_vec();
        let alpha = if rng.gen_bool(0.5) {
            -along(&cur, cycle[0], cycle[1])
        } else {
            rng.gen_range(-1.0..1.0) * scale
        };
        let mut cand = cur.clone();
        for t in 0..len {
            add(&mut cand, cycle[t], cycle[(t + 1) % len], alpha);
        }
        let c = cost(&cand);
        best = best.min(c);
        if c < cur_cost {
            cur = cand;
            cur_cost = c;
        }
    }
    Ok(optimum - best)
}

fn line_molecule(terms: &[(i64, i64)]) -> Result<Molecule> {
    Molecule::canonicalize(
        terms.iter().map(|&(x, a)| (Point::from_ints(&[x]), Rational::from_integer(a.into()))),
        SpaceDescriptor::full(1),
    )
}

fn norm_oracles(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let worked = line_molecule(&[(1, 1), (2, 1)])?;
    let ground = GroundSet::from_support(&worked);
    for method in [NormMethod::PruferEnumeration, NormMethod::SubsetDp] {
        let opts = NormOptions { cap: 9, method };
        let tag = match method {
            NormMethod::PruferEnumeration => "prufer",
            NormMethod::SubsetDp => "subset-dp",
        };
        let v1 = exact_norm_with(&worked, &ground, 1.0, &opts)?.value;
        c.at_most(format!("worked-value-p=1[{tag}]"), (v1 - 3.0).abs(), 0.0, 1e-12);
        let vh = exact_norm_with(&worked, &ground, 0.5, &opts)?.value;
        c.at_most(format!("worked-value-p=1/2[{tag}]"), (vh - (3.0 + 2.0 * 2f64.sqrt())).abs(), 0.0, 1e-12);
    }

    let line = SpaceDescriptor::full(1);
    let line_cands = lattice_window(1, 1, 4);
    let mut gap: f64 = 0.0;
    for _ in 0..cfg.samples * 20 {
        let m = random_molecule(rng, &line, &line_cands, 7)?;
        let exact = exact_norm_with(&m, &GroundSet::from_support(&m), 1.0, &NormOptions::dp(9))?.value;
        gap = gap.max(relative_gap(exact, line_f1_norm(&m)?));
    }
    c.at_most("line-oracle", gap, 0.0, 1e-12);

    let d = cfg.d;
    let full = SpaceDescriptor::full(d);
    let cands = lattice_window(d, 1, 2);
    let mut gap: f64 = 0.0;
    let mut undercut = f64::NEG_INFINITY;
    for _ in 0..cfg.samples * 4 {
        let m = random_molecule(rng, &full, &cands, 6)?;
        let g = GroundSet::from_support(&m);
        let a = exact_norm_with(&m, &g, cfg.p, &NormOptions::default())?.value;
        let b = exact_norm_with(&m, &g, cfg.p, &NormOptions::dp(9))?.value;
        gap = gap.max(relative_gap(a, b));
    }
    c.at_most("subset-dp-matches-prufer", gap, 0.0, 1e-12);
    for _ in 0..cfg.samples {
        let m = random_molecule(rng, &full, &cands, 5)?;
        let g = ground_for([&m], m.base())?.augmented(cands.choose_multiple(rng, 2).cloned())?;
        undercut = undercut.max(representation_search(rng, &m, &g, cfg.p, 400)?);
    }
    c.at_most("representation-search", undercut, 0.0, 1e-9);
    Ok(())
}

fn norm_axioms(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let d = cfg.d;
    let p = cfg.p;
    let full = SpaceDescriptor::full(d);
    let cands = lattice_window(d, 1, 2);
    let opts = NormOptions::dp(cfg.cap);
    let norm = |m: &Molecule, g: &GroundSet, p: f64| exact_norm_with(m, g, p, &opts).map(|r| r.value);
    let (mut homog, mut tri, mut two, mut pvs1, mut mono) = (0.0f64, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..cfg.samples * 2 {
        let m1 = random_molecule(rng, &full, &cands, 5)?;
        let m2 = random_molecule(rng, &full, &cands, 5)?;
        let g = ground_for([&m1, &m2], m1.base())?;
        let a = random_rational(rng);
        let n1 = norm(&m1, &g, p)?;
        let scaled = norm(&m1.scale(&a), &g, p)?;
        homog = homog.max(relative_gap(scaled, rational_to_f64(&a).abs() * n1));
        let n2 = norm(&m2, &g, p)?;
        let sum = norm(&m1.add(&m2)?, &g, p)?;
        tri = tri.max(sum.powf(p) - n1.powf(p) - n2.powf(p));
        pvs1 = pvs1.max(norm(&m1, &g, 1.0)? - n1);
        let extra: Vec<Point> = cands.choose_multiple(rng, 3).cloned().collect();
        let bigger = g.augmented(extra)?;
        if bigger.len() <= cfg.cap {
            mono = mono.max(norm(&m1, &bigger, p)? - n1);
        }
        let xy: Vec<&Point> = cands.iter().filter(|x| !x.is_origin()).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
        let (x, y) = (xy[0].clone(), xy[1].clone());
        let pair = Molecule::delta(full.clone(), x.clone())?.sub(&Molecule::delta(full.clone(), y.clone())?)?;
        let g2 = GroundSet::new([x.clone(), y.clone()], Point::origin(d), Metric::Sup)?;
        let dxy = crate::grid::sup_dist(&x, &y)?.to_f64();
        two = two.max((norm(&pair, &g2, p)? - dxy).abs());
    }
    c.at_most("homogeneity", homog, 0.0, 1e-12);
    c.at_most("p-triangle", tri, 0.0, 1e-9);
    c.at_most("two-point", two, 0.0, 1e-12);
    c.at_most("p-versus-1", pvs1, 0.0, 1e-12);
    c.at_most("ground-monotone", mono, 0.0, 1e-12);
    Ok(())
}
