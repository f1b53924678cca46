use std::path::Path;

use serde_json::json;
use varadhan_core::calculus::{OrbitForm, OrbitFormJson, OrbitFunction, OrbitFunctionJson};
use varadhan_core::crystal::{essentially_euclidean_equivalent, maximal_abelian_cover, LatticeJson, PeriodicLattice};
use varadhan_core::interaction::{default_locales, Interaction, InteractionJson};
use varadhan_core::multigraph::{GraphJson, MultiGraph};
use varadhan_core::varadhan::{self, DecomposeOptions};
use varadhan_core::verify::{self, Scale};
use varadhan_core::{rational, Error, Result};

use crate::report::{digest, write_artifact, RunReport, Verdict};
use crate::{DecomposeArgs, Failure, Global, InteractionSource, LatticeSource, VerifyArgs};

type Outcome = std::result::Result<(), Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, report: &mut RunReport, name: &str) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    report.input(name, digest(&bytes));
    Ok(serde_json::from_slice(&bytes)?)
}

fn load_lattice(src: &LatticeSource, report: &mut RunReport) -> Result<PeriodicLattice> {
    match (&src.lattice, &src.builtin) {
        (_, Some(name)) => {
            report.input("lattice", format!("builtin:{name}"));
            PeriodicLattice::builtin(name)
        }
        (Some(arg), None) if Path::new(arg).is_file() => {
            let j: LatticeJson = read_json(Path::new(arg), report, "lattice")?;
            PeriodicLattice::from_json(&j)
        }
        (Some(name), None) => {
            report.input("lattice", format!("builtin:{name}"));
            PeriodicLattice::builtin(name)
        }
        (None, None) => Err(Error::input("one of --lattice or --builtin is required")),
    }
}

fn load_interaction(src: &InteractionSource, report: &mut RunReport) -> Result<Interaction> {
    let arg = &src.interaction;
    if Path::new(arg).is_file() {
        let j: InteractionJson = read_json(Path::new(arg), report, "interaction")?;
        Interaction::from_json(&j)
    } else {
        report.input("interaction", format!("builtin:{arg}"));
        Interaction::builtin(arg)
    }
}

fn finish(global: &Global, report: &RunReport) -> Outcome {
    report.emit(global.json)?;
    Ok(())
}

fn cells_scope(l: &PeriodicLattice) -> String {
    format!("seed with {} vertices, {} edges", l.cell_size(), l.seed().edge_count())
}

pub fn lattice_build(global: &Global, src: &LatticeSource) -> Outcome {
    let mut report = RunReport::new("lattice build");
    let l = load_lattice(src, &mut report)?;
    let j = l.to_json();
    report.verdict(Verdict::new("lattice", l.name(), ""));
    report.verdict(Verdict::new("rank", l.rank(), ""));
    report.verdict(Verdict::new("valid", true, cells_scope(&l)));
    write_artifact(global.out.as_deref(), &j)?;
    report.result = serde_json::to_value(&j)?;
    finish(global, &report)
}

pub fn lattice_inspect(global: &Global, src: &LatticeSource) -> Outcome {
    let mut report = RunReport::new("lattice inspect");
    let l = load_lattice(src, &mut report)?;
    let ee = l.is_essentially_euclidean();
    let geometry = l.block_geometry();
    report.verdict(Verdict::new("lattice", l.name(), ""));
    report.verdict(Verdict::new("rank", l.rank(), ""));
    report.verdict(Verdict::new("cell size", l.cell_size(), ""));
    report.verdict(Verdict::new("edges per cell", l.seed().edge_count(), ""));
    report.verdict(Verdict::new("rank formula", ee.rank_formula, ""));
    report.verdict(Verdict::new("EE", ee.essentially_euclidean, cells_scope(&l)));
    report.result = json!({
        "rank": l.rank(),
        "cell_size": l.cell_size(),
        "generators": l.generators(),
        "translations": l.translations(),
        "block_differences": geometry.differences,
        "ee": ee,
    });
    write_artifact(global.out.as_deref(), &report.result)?;
    finish(global, &report)
}

pub fn lattice_check_ee(global: &Global, src: &LatticeSource) -> Outcome {
    let mut report = RunReport::new("lattice check-ee");
    let l = load_lattice(src, &mut report)?;
    let ee = l.is_essentially_euclidean();
    report.verdict(Verdict::new("EE", ee.essentially_euclidean, cells_scope(&l)));
    if let Some(c) = &ee.extra_difference {
        report.verdict(Verdict::new("extra block step", format!("{c:?}"), ""));
    }
    if let Some(c) = &ee.missing_difference {
        report.verdict(Verdict::new("missing unit step", format!("{c:?}"), ""));
    }
    report.verdict(Verdict::new("rank criterion", ee.rank_criterion, ""));
    let equivalence = if ee.essentially_euclidean {
        serde_json::Value::Null
    } else {
        let (_, eq) = essentially_euclidean_equivalent(&l);
        report.verdict(Verdict::new("equivalence constants", format!("C={} C'={}", eq.c, eq.c_prime), ""));
        serde_json::to_value(eq)?
    };
    report.result = json!({ "ee": ee, "equivalence": equivalence });
    write_artifact(global.out.as_deref(), &report.result)?;
    finish(global, &report)
}

pub fn lattice_abelian_cover(global: &Global, seed: &Path) -> Outcome {
    let mut report = RunReport::new("lattice abelian-cover");
    let gj: GraphJson = read_json(seed, &mut report, "seed")?;
    let g = MultiGraph::from_json(&gj)?;
    let formula = 1 - g.vertex_count() as i64 + (g.edge_count() / 2) as i64;
    let cover = maximal_abelian_cover(&g)?;
    report.verdict(Verdict::new("rank formula", formula, ""));
    report.verdict(Verdict::new("rank", cover.rank(), ""));
    report.verdict(Verdict::new("agree", formula == cover.rank() as i64, ""));
    let j = cover.to_json();
    write_artifact(global.out.as_deref(), &j)?;
    report.result = serde_json::to_value(&j)?;
    finish(global, &report)
}

pub fn interaction_analyze(global: &Global, src: &InteractionSource, locales: usize) -> Outcome {
    let mut report = RunReport::new("interaction analyze");
    let i = load_interaction(src, &mut report)?;
    let violations = i.violations();
    report.verdict(Verdict::new("states", i.names().join(","), ""));
    report.verdict(Verdict::new(
        "involution",
        if violations.is_empty() { "PASS" } else { "FAIL" },
        "all ordered pairs",
    ));
    for v in &violations {
        report.verdict(Verdict::new("violation", v, ""));
    }
    let basis = i.conserved_basis();
    let simplicity = i.simplicity();
    report.verdict(Verdict::new("c_phi", i.c_phi(), ""));
    for (k, b) in basis.iter().enumerate() {
        let values: Vec<String> = b.iter().map(rational::format).collect();
        report.verdict(Verdict::new(format!("conserved[{k}]"), values.join(","), ""));
    }
    report.verdict(Verdict::new("simple", simplicity.simple, ""));
    if let Some(m) = &simplicity.near_miss {
        report.verdict(Verdict::new("near miss", m, ""));
    }
    let evidence = if violations.is_empty() {
        let ev = i.irreducibility_evidence(&default_locales(locales), global.cap)?;
        let pass = ev.iter().all(|e| e.pass);
        report.verdict(Verdict::new(
            "irreducibility evidence",
            if pass { "PASS" } else { "FAIL" },
            format!("paths and cycles up to {locales} sites"),
        ));
        for e in ev.iter().filter(|e| !e.pass) {
            if let Some((a, b)) = &e.witness {
                report.verdict(Verdict::new(
                    format!("witness on {}", e.locale),
                    format!("{} ~/~ {}", a.join(" "), b.join(" ")),
                    "",
                ));
            }
        }
        serde_json::to_value(ev)?
    } else {
        serde_json::Value::Null
    };
    let basis_json: Vec<Vec<String>> = basis.iter().map(|b| b.iter().map(rational::format).collect()).collect();
    report.result = json!({
        "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "conserved_basis": basis_json,
        "c_phi": i.c_phi(),
        "simplicity": simplicity,
        "evidence": evidence,
    });
    write_artifact(global.out.as_deref(), &report.result)?;
    finish(global, &report)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::validation(format!("φ̄∘φ is not the identity on {} ordered pairs", violations.len())).into())
    }
}

fn parse_zeta(s: &str, states: usize) -> Result<Vec<rational::Q>> {
    let v = s.split(',').map(|t| rational::parse(t.trim())).collect::<Result<Vec<_>>>()?;
    if v.len() != states {
        return Err(Error::input(format!("ζ {s:?} has {} entries; expected {states}", v.len())));
    }
    Ok(v)
}

pub fn form_exact(
    global: &Global,
    lattice: &LatticeSource,
    interaction: &InteractionSource,
    function: Option<&Path>,
    zeta: &[String],
) -> Outcome {
    let mut report = RunReport::new("form exact");
    let l = load_lattice(lattice, &mut report)?;
    let i = load_interaction(interaction, &mut report)?;
    let g = match function {
        Some(p) => {
            let j: OrbitFunctionJson = read_json(p, &mut report, "function")?;
            OrbitFunction::from_json(&j, &l, &i)?
        }
        None => OrbitFunction::zero(&l),
    };
    let mut zetas = zeta.iter().map(|s| parse_zeta(s, i.len())).collect::<Result<Vec<_>>>()?;
    if zetas.len() > l.rank() {
        return Err(Error::input(format!("{} ζ given for a lattice of rank {}", zetas.len(), l.rank())).into());
    }
    zetas.resize(l.rank(), vec![rational::zero(); i.len()]);
    let form = OrbitForm::exact(&g, &zetas, &i, global.cap)?;
    report.verdict(Verdict::new("orbits", form.orbits().len(), ""));
    report.verdict(Verdict::new("radius", form.radius(), ""));
    let j = form.to_json();
    write_artifact(global.out.as_deref(), &j)?;
    report.result = serde_json::to_value(&j)?;
    finish(global, &report)
}

pub fn decompose(global: &Global, a: &DecomposeArgs) -> Outcome {
    let mut report = RunReport::new("decompose");
    let l = load_lattice(&a.lattice, &mut report)?;
    let i = load_interaction(&a.interaction, &mut report)?;
    let fj: OrbitFormJson = read_json(&a.form, &mut report, "form")?;
    let form = OrbitForm::from_json(&fj, &l, &i, global.cap)?;
    let opts = DecomposeOptions {
        radius: a.radius,
        window: a.window.clone(),
        cap: global.cap,
        ..DecomposeOptions::default()
    };
    let result = varadhan::decompose(&form, &opts)?;
    let j = result.to_json(&i);
    let c = &j.certificate;
    let p = &j.provenance;
    let window = format!("window {:?}..{:?}", p.window_lo, p.window_hi);
    report.verdict(Verdict::new("g terms", j.g.terms.len(), window.clone()));
    for (k, z) in j.zetas.iter().enumerate() {
        let values: Vec<String> = z.iter().map(|(s, v)| format!("{s}={v}")).collect();
        report.verdict(Verdict::new(format!("zeta[{}]", k + 1), values.join(" "), ""));
    }
    report.verdict(Verdict::new(
        "orbit agreement",
        format!("{} patterns", c.orbit_patterns),
        "all orbit patterns of the form",
    ));
    report.verdict(Verdict::new(
        "box recomputation",
        format!("{} transitions, max residual {}", c.box_transitions, c.max_residual),
        format!("box {:?}..{:?}", c.box_lo, c.box_hi),
    ));
    report.verdict(Verdict::new("shift invariance", format!("{} samples", c.shift_samples), window));
    write_artifact(global.out.as_deref(), &j)?;
    report.result = serde_json::to_value(&j)?;
    finish(global, &report)
}

pub fn verify(global: &Global, a: &VerifyArgs) -> Outcome {
    let mut report = RunReport::new("verify");
    let scale = Scale::parse(&a.scale)?;
    report.input("scale", a.scale.clone());
    report.input("suite", a.suite.clone());
    let suites = if a.suite == "all" {
        verify::run_all(scale)?
    } else {
        vec![verify::run_suite(verify::suite_id(&a.suite)?, scale)?]
    };
    for s in &suites {
        report.verdict(Verdict::new(
            format!("{} {}", s.id, s.name),
            format!("{} ({} exact checks)", if s.pass { "PASS" } else { "FAIL" }, s.checks),
            s.scope.clone(),
        ));
        for f in s.failures.iter().take(5) {
            report.verdict(Verdict::new("failure", f, ""));
        }
    }
    report.result = serde_json::to_value(&suites)?;
    write_artifact(global.out.as_deref(), &report)?;
    finish(global, &report)?;
    if suites.iter().all(|s| s.pass) {
        Ok(())
    } else {
        Err(Failure::Suite)
    }
}
