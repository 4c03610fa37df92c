use num_complex::Complex64;
use serde_json::json;

use super::checks::*;
use super::probes::{probe_spin_young_constant, probe_tao_sum, tao_applicable};
use super::sampling::{biunitary_witness, sample_element, ElementClass};
use super::{CheckReport, Ctx, HarnessError, ModelReport, ProbeReport, SuiteKind};
use crate::algebra::AlgebraElement;
use crate::extremizers::{
    biprojection_from_subgroup, bishift_group, collinearity_residual, enumerate_group_bishifts, enumerate_shifts,
    flatness, minimizer_report, positive_biprojection_check, square_relation_check, uniqueness_space, unimodular_sum,
    Handedness, ShiftFamily, ShiftLabel, DEFAULT_TOL,
};
use crate::group::{commutator_subgroup, enumerate_subgroups, Subgroup};
use crate::two_box::{Model, Side, TwoBoxPair};

fn te<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn side(i: u64) -> Side {
    if i.is_multiple_of(2) {
        Side::Plus
    } else {
        Side::Minus
    }
}

/// Element `slot` of a multi-element sample; slots use shifted streams.
fn draw(p: &TwoBoxPair, sd: Side, class: ElementClass, stream: u64, i: u64, slot: u64) -> AlgebraElement {
    sample_element(p, sd, class, stream.wrapping_add(slot.wrapping_mul(0x9e37_79b9_7f4a_7c15)), i)
}

/// Mixed classes for the inequality checks, cycling with the index.
fn mixed_class(p: &TwoBoxPair, sd: Side, i: u64) -> ElementClass {
    let d = p.algebra(sd).coord_dim() as u64;
    match (i / 2) % 4 {
        0 => ElementClass::Generic,
        1 => ElementClass::Positive,
        2 => ElementClass::Sparse(1 + ((i / 8) % d) as usize),
        _ => ElementClass::PartialIsometry,
    }
}

pub(super) fn run_model(ctx: &Ctx) -> Result<ModelReport, HarnessError> {
    let p = ctx.pair;
    let mut checks = Vec::new();
    let mut probes = Vec::new();
    let wants = |k: SuiteKind| ctx.cfg.suites.contains(&k);
    let bishifts = if p.group().is_some() && (wants(SuiteKind::Uncertainty) || wants(SuiteKind::Minimizers)) {
        let list = enumerate_group_bishifts(p).map_err(|e| HarnessError::Setup(e.to_string()))?;
        let mut els: Vec<AlgebraElement> = list.iter().map(|b| b.element.clone()).collect();
        for b in &list {
            els.push(p.fourier(&b.element).map_err(|e| HarnessError::Setup(e.to_string()))?);
        }
        Some((list.len(), els))
    } else {
        None
    };
    for kind in SuiteKind::ALL {
        if !wants(kind) {
            continue;
        }
        match kind {
            SuiteKind::Structure => structure(ctx, &mut checks),
            SuiteKind::Inequalities => inequalities(ctx, &mut checks),
            SuiteKind::Uncertainty => uncertainty(ctx, bishifts.as_ref().map(|b| b.1.as_slice()), &mut checks),
            SuiteKind::Minimizers => {
                if let Some((count, els)) = &bishifts {
                    minimizers(ctx, *count, els, &mut checks)?;
                }
            }
            SuiteKind::Probes => run_probes(ctx, &mut probes)?,
        }
    }
    Ok(ModelReport {
        model: p.label().to_string(),
        delta: p.delta(),
        delta0: p.delta0(),
        irreducible: p.is_irreducible(),
        checks,
        probes,
    })
}

fn structure(ctx: &Ctx, out: &mut Vec<CheckReport>) {
    let p = ctx.pair;
    let n = ctx.cfg.samples;
    let t = *ctx.tol();
    let s = SuiteKind::Structure;
    out.push(ctx.check(s, "plancherel", t.plancherel, n, true, |st, i| {
        let x = draw(p, side(i), ElementClass::Generic, st, i, 0);
        Ok((-plancherel_residual(p, &x).map_err(te)?, vec![x]))
    }));
    out.push(ctx.check(s, "fourier_period", t.plancherel, n, true, |st, i| {
        let x = draw(p, side(i), ElementClass::Generic, st, i, 0);
        Ok((-period_residual(p, &x).map_err(te)?, vec![x]))
    }));
    out.push(ctx.check(s, "fourier_adjoint", t.plancherel, n, true, |st, i| {
        let x = draw(p, side(i), ElementClass::Generic, st, i, 0);
        Ok((-fourier_adjoint_residual(p, &x).map_err(te)?, vec![x]))
    }));
    let cf_sides: Vec<Side> = [Side::Plus, Side::Minus]
        .into_iter()
        .filter(|&sd| matches!(p.coproduct_closed_form(&p.identity(sd), &p.identity(sd)), Ok(Some(_))))
        .collect();
    if !cf_sides.is_empty() {
        out.push(ctx.check(s, "coproduct_closed_form", t.plancherel, n, true, |st, i| {
            let sd = cf_sides[i as usize % cf_sides.len()];
            let x = draw(p, sd, ElementClass::Generic, st, i, 0);
            let y = draw(p, sd, ElementClass::Generic, st, i, 1);
            let r = closed_form_residual(p, &x, &y).map_err(te)?.unwrap_or(0.0);
            Ok((-r, vec![x, y]))
        }));
    }
    out.push(ctx.check(s, "schur_positivity", t.inequality, n, true, |st, i| {
        let a = draw(p, side(i), ElementClass::Positive, st, i, 0);
        let b = draw(p, side(i), ElementClass::Positive, st, i, 1);
        Ok((schur_margin(p, &a, &b).map_err(te)?, vec![a, b]))
    }));
    out.push(ctx.check(s, "trace_exchange", t.inequality, n, true, |st, i| {
        let a = draw(p, side(i), ElementClass::Generic, st, i, 0);
        let b = draw(p, side(i), ElementClass::Generic, st, i, 1);
        let c = draw(p, side(i), ElementClass::Generic, st, i, 2);
        Ok((-trace_exchange_residual(p, &a, &b, &c).map_err(te)?, vec![a, b, c]))
    }));
    out.push(ctx.check(s, "range_domination", t.range_domination, n, true, |st, i| {
        let class = if (i / 2) % 2 == 0 { ElementClass::PartialIsometry } else { ElementClass::Projection };
        let x = draw(p, side(i), class, st, i, 0);
        let y = draw(p, side(i), ElementClass::PartialIsometry, st, i, 1);
        Ok((-range_domination_residual(p, &x, &y).map_err(te)?, vec![x, y]))
    }));
    out.push(ctx.check(s, "tr1_bound", t.inequality, n, true, |st, i| {
        let x = draw(p, side(i), mixed_class(p, side(i), i), st, i, 0);
        Ok((tr1_margin(p, &x).map_err(te)?, vec![x]))
    }));
    if p.is_irreducible() {
        out.push(ctx.check(s, "tr1_positive_equality", t.positive_equality, n, true, |st, i| {
            let x = draw(p, side(i), ElementClass::Positive, st, i, 0);
            Ok((-tr1_margin(p, &x).map_err(te)?.abs(), vec![x]))
        }));
    }
    out.push(ctx.check(s, "jones_projection", t.plancherel, 2, false, |_, i| {
        let sd = side(i);
        let e = p.jones_projection(sd).map_err(te)?;
        let idem = e.projection_residual() / e.frobenius();
        let one = p.identity(sd.opposite());
        let f = p.fourier(&p.jones_scaled(sd).map_err(te)?).map_err(te)?;
        let r = f.relative_distance(&one).map_err(te)?;
        Ok((-idem.max(r), vec![e]))
    }));
}

fn inequalities(ctx: &Ctx, out: &mut Vec<CheckReport>) {
    let p = ctx.pair;
    let n = ctx.cfg.samples;
    let t = *ctx.tol();
    let s = SuiteKind::Inequalities;
    let grid = &ctx.cfg.hausdorff_young_grid;
    let triples = &ctx.cfg.young_grid;
    let two = super::Exponent::new(2.0).expect("valid");
    out.push(ctx.check(s, "hausdorff_young", t.inequality, n, true, |st, i| {
        let x = draw(p, side(i), mixed_class(p, side(i), i), st, i, 0);
        let m = check_hausdorff_young(p, &x, grid).map_err(te)?;
        Ok((m.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min), vec![x]))
    }));
    out.push(ctx.check(s, "hausdorff_young_p2", t.hausdorff_young_p2, n, true, |st, i| {
        let x = draw(p, side(i), mixed_class(p, side(i), i), st, i, 0);
        let m = check_hausdorff_young(p, &x, &[two]).map_err(te)?;
        Ok((-m[0].margin.abs(), vec![x]))
    }));
    if p.is_irreducible() {
        out.push(ctx.check(s, "hausdorff_young_positive_inf", t.positive_equality, n, true, |st, i| {
            let x = draw(p, side(i), ElementClass::Positive, st, i, 0);
            let m = check_hausdorff_young(p, &x, &[super::Exponent::INF]).map_err(te)?;
            Ok((-m[0].margin.abs(), vec![x]))
        }));
    }
    out.push(ctx.check(s, "young", t.inequality, n, true, |st, i| {
        let sd = side(i);
        let x = draw(p, sd, mixed_class(p, sd, i), st, i, 0);
        let y = draw(p, sd, mixed_class(p, sd, i + 2), st, i, 1);
        let m = check_young(p, &x, &y, triples).map_err(te)?;
        Ok((m.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min), vec![x, y]))
    }));
    out.push(ctx.check(s, "young_identity", t.young_identity, 2, false, |_, i| {
        let sd = side(i);
        Ok((-young_identity_residual(p, sd, triples).map_err(te)?, vec![p.identity(sd)]))
    }));
}

fn uncertainty_class(p: &TwoBoxPair, sd: Side, i: u64) -> ElementClass {
    let d = p.algebra(sd).coord_dim() as u64;
    match (i / 2) % 4 {
        0 => ElementClass::Generic,
        1 => ElementClass::Sparse(1 + ((i / 8) % d) as usize),
        2 => ElementClass::Projection,
        _ => ElementClass::PartialIsometry,
    }
}

fn uncertainty(ctx: &Ctx, bishifts: Option<&[AlgebraElement]>, out: &mut Vec<CheckReport>) {
    let p = ctx.pair;
    let n = ctx.cfg.samples;
    let t = *ctx.tol();
    let s = SuiteKind::Uncertainty;
    out.push(ctx.check(s, "donoho_stark", t.rank, n, true, |st, i| {
        let x = draw(p, side(i), uncertainty_class(p, side(i), i), st, i, 0);
        Ok((check_donoho_stark(p, &x).map_err(te)?.margin, vec![x]))
    }));
    out.push(ctx.check(s, "hirschman_beckner", t.entropy, n, true, |st, i| {
        let x = draw(p, side(i), uncertainty_class(p, side(i), i), st, i, 0);
        Ok((check_hirschman_beckner(p, &x).map_err(te)?.margin, vec![x]))
    }));
    out.push(ctx.check(s, "entropy_support_chain", t.inequality, n, true, |st, i| {
        let x = draw(p, side(i), uncertainty_class(p, side(i), i), st, i, 0);
        let h = check_hirschman_beckner(p, &x).map_err(te)?;
        Ok((h.support_gap.min(h.fourier_support_gap), vec![x]))
    }));
    out.push(ctx.check(s, "hirschman_beckner_bound", t.inequality, n, true, |st, i| {
        let x = draw(p, side(i), uncertainty_class(p, side(i), i), st, i, 0);
        Ok((check_hirschman_beckner(p, &x).map_err(te)?.bound_gap, vec![x]))
    }));
    if biunitary_witness(p, Side::Plus).is_some() {
        out.push(ctx.check(s, "biunitary_witness", t.equality, 2, false, |_, i| {
            let w = biunitary_witness(p, side(i)).ok_or("no witness")?;
            let fw = p.fourier(&w).map_err(te)?;
            let m = flatness(&w.singular_values().map_err(te)?).max(flatness(&fw.singular_values().map_err(te)?));
            Ok((-m, vec![w]))
        }));
    }
    if let (Some(els), Some(g)) = (bishifts, p.group()) {
        let target = g.order() as f64;
        out.push(ctx.check(s, "donoho_stark_bishift", t.rank, els.len(), false, |_, i| {
            let x = &els[i as usize];
            let prod = check_donoho_stark(p, x).map_err(te)?.product;
            let r = prod.round();
            let prod = if (prod - r).abs() <= t.rank { r } else { prod };
            Ok((-(prod - target).abs(), vec![x.clone()]))
        }));
        out.push(ctx.check(s, "hirschman_beckner_bishift", t.entropy, els.len(), false, |_, i| {
            let x = &els[i as usize];
            Ok((-check_hirschman_beckner(p, x).map_err(te)?.margin.abs(), vec![x.clone()]))
        }));
    }
}

/// Σ_H |H/[H,H]|·[G:H], counted independently of the enumeration.
fn bishift_formula(subs: &[Subgroup]) -> usize {
    subs.iter().map(|h| (h.order() / commutator_subgroup(h).order()) * h.index()).sum()
}

fn minimizers(ctx: &Ctx, count: usize, els: &[AlgebraElement], out: &mut Vec<CheckReport>) -> Result<(), HarnessError> {
    let p = ctx.pair;
    let g = p.group().expect("group model").clone();
    let n = ctx.cfg.samples;
    let t = *ctx.tol();
    let s = SuiteKind::Minimizers;
    let setup = |e: crate::extremizers::ExtremizerError| HarnessError::Setup(e.to_string());
    let subs = enumerate_subgroups(&g).map_err(|e| HarnessError::Setup(e.to_string()))?;
    let expected = bishift_formula(&subs);
    out.push(ctx.check(s, "bishift_count", 0.0, 1, false, |_, _| Ok((0.0 - (count as f64 - expected as f64).abs(), vec![]))));
    out.push(ctx.check(s, "minimizer_battery", 0.0, els.len(), false, |_, i| {
        let x = &els[i as usize];
        let r = minimizer_report(p, x).map_err(te)?;
        let fails = r.verdicts.as_array().iter().filter(|&&b| !b).count();
        Ok((0.0 - fails as f64, vec![x.clone()]))
    }));
    out.push(ctx.check(s, "minimizer_battery_generic", 0.0, n, true, |st, i| {
        let x = draw(p, side(i), ElementClass::Generic, st, i, 0);
        let r = minimizer_report(p, &x).map_err(te)?;
        let hits = r.verdicts.as_array().iter().filter(|&&b| b).count() + usize::from(r.ds_margin < 0.5);
        Ok((0.0 - hits as f64, vec![x]))
    }));
    out.push(ctx.check(s, "square_relation", t.equality, els.len(), false, |_, i| {
        let x = &els[i as usize];
        let r = square_relation_check(p, x, DEFAULT_TOL).map_err(te)?;
        Ok((-r.identity_residual.max(r.flatness_residual).max(r.norm1_residual), vec![x.clone()]))
    }));

    let families: Vec<(Subgroup, ShiftFamily)> = subs
        .iter()
        .map(|h| {
            let b = biprojection_from_subgroup(p, h).map_err(setup)?;
            Ok((h.clone(), enumerate_shifts(p, &b, Handedness::Right).map_err(setup)?))
        })
        .collect::<Result<_, HarnessError>>()?;
    let items: Vec<(usize, usize, usize)> = families
        .iter()
        .enumerate()
        .flat_map(|(k, (_, f))| (0..f.of_base.len()).flat_map(move |gi| (0..f.of_tilde.len()).map(move |ci| (k, gi, ci))))
        .collect();
    out.push(ctx.check(s, "uniqueness", t.collinearity, items.len(), false, |_, i| {
        let (k, gi, ci) = items[i as usize];
        let (h, fam) = &families[k];
        let (bg, bt) = (&fam.of_base[gi], &fam.of_tilde[ci]);
        let u = uniqueness_space(p, bg, bt).map_err(te)?;
        let rep = match &bg.label {
            ShiftLabel::Coset { rep, .. } => *rep,
            _ => return Err("coset shift without representative".into()),
        };
        let x = bishift_group(p, h, &fam.characters[ci], rep, Complex64::new(1.0, 0.0)).map_err(te)?;
        let fx = p.fourier(&x.element).map_err(te)?;
        if u.dimension != 1 {
            return Ok((-(u.dimension as f64 - 1.0).abs(), vec![fx]));
        }
        Ok((-collinearity_residual(&u.basis[0], &fx).map_err(te)?, vec![fx]))
    }));
    out.push(ctx.check(s, "positive_biprojection", t.equality, subs.len(), false, |_, i| {
        let b = biprojection_from_subgroup(p, &subs[i as usize]).map_err(te)?;
        let x = b.element.scale_real(2.5);
        let r = positive_biprojection_check(p, &x).map_err(te)?;
        if !r.verdict.is_biprojection {
            return Ok((-1.0, vec![x]));
        }
        Ok((-r.normalized.relative_distance(&b.element).map_err(te)?, vec![x]))
    }));

    let order = g.order();
    if order <= 8 {
        let mut items = Vec::new();
        for mask in 1u32..(1 << order) {
            if order <= 6 {
                let mut sub = mask;
                loop {
                    items.push((mask, sub));
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
            } else {
                items.push((mask, 0));
            }
        }
        items.sort_unstable();
        out.push(ctx.check(s, "unimodular_extremality", 0.0, items.len(), false, |_, i| {
            let (mask, signs) = items[i as usize];
            let support: Vec<usize> = (0..order).filter(|b| mask >> b & 1 == 1).collect();
            let phases: Vec<Complex64> =
                support.iter().map(|&b| Complex64::new(if signs >> b & 1 == 1 { -1.0 } else { 1.0 }, 0.0)).collect();
            let (x, v) = unimodular_sum(p, &support, &phases).map_err(te)?;
            let mut bad = usize::from(v.bishift != v.extremal);
            if signs == 0 {
                let trace_form = (v.trace_norm - order as f64).abs() <= 1e-8 * order as f64;
                bad += usize::from(v.is_coset != v.extremal);
                bad += usize::from(trace_form != v.extremal);
                bad += usize::from(v.is_subgroup != v.positive);
            }
            Ok((0.0 - bad as f64, vec![x]))
        }));
    }
    Ok(())
}

fn run_probes(ctx: &Ctx, out: &mut Vec<ProbeReport>) -> Result<(), HarnessError> {
    let p = ctx.pair;
    let cfg = ctx.cfg;
    let setup = |e: crate::two_box::TwoBoxError| HarnessError::Setup(e.to_string());
    if tao_applicable(p) {
        let r = probe_tao_sum(p, cfg.tao_budget, cfg.master_seed).map_err(setup)?;
        out.push(ProbeReport {
            name: "tao_sum".into(),
            findings: serde_json::to_value(&r).expect("serializable"),
            note: format!("minimum of S(x) + S(F(x)) over sparse samples; p + 1 = {} predicted for cyclic groups of prime order", r.p + 1),
        });
    }
    if matches!(p.model(), Model::Spin(_) | Model::FixedPoint(_)) {
        let r = probe_spin_young_constant(p, cfg.samples, &cfg.young_grid, cfg.master_seed, cfg.tolerances.inequality)
            .map_err(setup)?;
        let note = format!(
            "Hadamard-product constants with matrix-trace norms: 1/n0 {}; 1/n0^2 {} (identity violation factor {})",
            if r.inv_n0_holds { "holds" } else { "violated" },
            if r.inv_n0_squared_holds { "holds" } else { "violated" },
            r.identity_violation_factor
        );
        out.push(ProbeReport { name: "spin_young_constant".into(), findings: serde_json::to_value(&r).expect("serializable"), note });
    }
    if p.delta0() != p.delta() {
        let mut sides = serde_json::Map::new();
        for sd in [Side::Plus, Side::Minus] {
            let one = p.identity(sd);
            let m = check_young(p, &one, &one, &cfg.young_grid).map_err(setup)?;
            sides.insert(sd.name().to_string(), serde_json::to_value(&m).expect("serializable"));
        }
        out.push(ProbeReport {
            name: "young_identity_delta0".into(),
            findings: json!(sides),
            note: "x = y = 1 against the delta0 constant; equality holds with delta instead".into(),
        });
    }
    Ok(())
}
