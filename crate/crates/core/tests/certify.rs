mod common;

use cbricks::bundled;
use cbricks::certify::{certify, check_condition_f_direct, Certificate, FlowEvidence};
use cbricks::complex::CellComplex;
use cbricks::fintop::CellSet;
use cbricks::homology::homology_condition;
use cbricks::mvf::{fv, morse_decomposition, MultivectorField};
use cbricks::pipeline::{analyze, CheckConfig};
use cbricks::section::{build_section, candidate_sections, toplex_coarsening};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn circles_certificates_are_reproducible_and_round_trip() {
    let ex = bundled::circles();
    let model = analyze(&ex.mesh, &ex.field, &CheckConfig::default()).unwrap();
    let c = &ex.mesh.complex;
    let md = morse_decomposition(c, &model.mvf, &model.domain(c));
    let ev = FlowEvidence { field_text: &ex.field.text, outflow: &model.outflow, unverified: &model.unverified };
    for s in &md.sets {
        let a = certify(c, &model.mvf, &s.cells, None, Some(&ev));
        let b = certify(c, &model.mvf, &s.cells, None, Some(&ev));
        assert_eq!(a, b);
        let text = serde_json::to_string(&a).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert!(a.field_hash.is_some());
    }
}

/// Brute-force re-verification of the items of an issued certificate.
fn reverse_check(c: &CellComplex, v: &MultivectorField, a: &CellSet, cert: &Certificate) -> Vec<String> {
    let p = c.poset();
    let m = order_matrix(p);
    let cells = a.to_vec();
    let mut out = Vec::new();
    if !brute_locally_closed(&m, &cells) {
        out.push("A not convex".to_string());
    }
    // connectedness through comparable pairs
    let mut comp: Vec<usize> = vec![cells[0]];
    let mut k = 0;
    while k < comp.len() {
        let x = comp[k];
        for &y in &cells {
            if !comp.contains(&y) && (m[x][y] || m[y][x]) {
                comp.push(y);
            }
        }
        k += 1;
    }
    if comp.len() != cells.len() {
        out.push("A not connected".into());
    }
    // A is one strongly connected class of the dynamics
    for &x in &cells {
        let mut seen = vec![x];
        let mut i = 0;
        while i < seen.len() {
            for y in fv(c, v, seen[i]).iter() {
                if a.contains(y) && !seen.contains(&y) {
                    seen.push(y);
                }
            }
            i += 1;
        }
        if seen.len() != cells.len() {
            out.push(format!("{} does not reach all of A", c.id(x)));
        }
    }
    for mv in v.multivectors() {
        if mv.iter().any(|&x| a.contains(x)) {
            let s = p.set(mv.iter().copied());
            let cl: CellSet = p.set(brute_cl(&m, mv));
            let b = oracle_betti(c, &cl, &cl.difference(&s));
            if b.iter().any(|&x| x != 0) {
                out.push("critical multivector in A".into());
            }
        }
    }
    let cl = p.set(brute_cl(&m, &cells));
    let idx = oracle_betti(c, &cl, &cl.difference(a));
    if Some(&idx) != cert.conley_index.as_ref().map(|b| &b.0) {
        out.push(format!("index {idx:?}"));
    }
    let get = |k: i64| if k < 0 { 0 } else { idx.get(k as usize).copied().unwrap_or(0) };
    let ok_r = |r: i64| (-1..=idx.len() as i64).all(|n| get(2 * n + r) == get(2 * n + 1 + r));
    let rs: Vec<u8> = (0..2).filter(|&r| ok_r(r as i64)).collect();
    if rs != cert.r || rs.is_empty() {
        out.push(format!("r {rs:?}"));
    }
    if cert.kmax.unwrap_or(0) < 3 || cert.shift_toplexes.iter().any(|f| f.is_empty()) {
        out.push("shift structure".into());
    }
    out
}

#[test]
fn issued_certificates_survive_brute_force_reverification() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut issued = 0;
    for case in 0..400 {
        let (c, v) = if case % 2 == 0 {
            random_cycle_field(&mut rng)
        } else {
            let c = random_simplicial(&mut rng, 5, 12);
            let v = random_mvf(&mut rng, &c);
            (c, v)
        };
        let md = morse_decomposition(&c, &v, &c.poset().full_set());
        for s in &md.sets {
            let cert = certify(&c, &v, &s.cells, None, None);
            if cert.certified {
                issued += 1;
                let bad = reverse_check(&c, &v, &s.cells, &cert);
                assert!(bad.is_empty(), "case {case}: {bad:?}");
                assert_eq!(cert.r, homology_condition(cert.conley_index.as_ref().unwrap()));
            }
        }
    }
    assert!(issued > 50, "only {issued} certificates issued");
}

#[test]
fn accepted_sections_satisfy_the_direct_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut compared = 0;
    for _ in 0..400 {
        let (c, v) = random_cycle_field(&mut rng);
        let md = morse_decomposition(&c, &v, &c.poset().full_set());
        for s in md.sets.iter().filter(|s| s.isolated) {
            for p in candidate_sections(&c, &v, &s.cells, 2, 6) {
                let Ok(sd) = build_section(&c, &v, &s.cells, &p) else { continue };
                let Ok(co) = toplex_coarsening(&c, &sd) else { continue };
                if sd.kmax < 3 {
                    continue;
                }
                compared += 1;
                assert!(check_condition_f_direct(&c, &v, &s.cells, &co).unwrap(), "{:?}", c.ids_of(&p));
            }
        }
    }
    assert!(compared > 50, "only {compared} sections compared");
}
