//! Hypothesis ledger and periodic orbit certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::CellComplex;
use crate::fintop::CellSet;
use crate::formats::{complex_hash, sha256_hex};
use crate::homology::{conley_index_pair, homology_condition, BettiVector};
use crate::mvf::{is_isolated_invariant, MultivectorField};
use crate::pipeline::check::detect_circular_intersection;
use crate::section::{build_section, check_properties, propose_section, toplex_coarsening, ProposedSection, SectionError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("malformed coarsening: {0}")]
    MalformedCoarsening(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub hypothesis: String,
    pub holds: bool,
    /// Witness cells or a short explanation.
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    pub complex_hash: String,
    pub field_hash: Option<String>,
    pub invariant_set: Vec<String>,
    pub conley_index: Option<BettiVector>,
    /// Every `r` satisfying the homology condition.
    pub r: Vec<u8>,
    pub section: Vec<String>,
    pub kmax: Option<usize>,
    /// Toplex families `A^top_0, ..., A^top_{p-1}`.
    pub shift_toplexes: Vec<Vec<String>>,
    pub ledger: Vec<LedgerEntry>,
    /// Facts that hold by construction and are not tested at runtime.
    pub theorem_backed: Vec<String>,
    pub tool_version: String,
    pub conclusion: String,
}

impl Certificate {
    pub fn failed(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.ledger.iter().filter(|e| !e.holds)
    }
}

/// Flow-side data for certificates produced by the mesh pipeline.
#[derive(Debug, Clone, Copy)]
pub struct FlowEvidence<'a> {
    pub field_text: &'a str,
    pub outflow: &'a CellSet,
    pub unverified: &'a CellSet,
}

/// Multivectors inside `a` with nonzero index.
pub fn critical_multivectors(v: &MultivectorField, a: &CellSet) -> Vec<usize> {
    (0..v.len()).filter(|&m| v.cells(m).iter().any(|&x| a.contains(x)) && v.is_critical(m)).collect()
}

pub fn check_regularity(v: &MultivectorField, a: &CellSet) -> bool {
    critical_multivectors(v, a).is_empty()
}

/// `τ → σ` is a sharp pair iff some face of `τ` belongs to `V_σ`.
pub fn check_sharp_pair(c: &CellComplex, v: &MultivectorField, tau: usize, sigma: usize) -> bool {
    let target = v.multivector_of(sigma);
    tau != sigma && c.poset().down(tau).iter().any(|&a| v.multivector_of(a) == target)
}

/// Toplexes of `a` whose exit faces all lie in `Mo A` or the outflow set.
fn exits_through_mouth(c: &CellComplex, v: &MultivectorField, a: &CellSet, outflow: Option<&CellSet>, t: usize) -> bool {
    let mo = c.poset().mo(a);
    let own = v.multivector_of(t);
    c.poset().down(t).iter().filter(|&&x| v.multivector_of(x) != own).all(|&x| mo.contains(x) || outflow.is_some_and(|o| o.contains(x)))
}

/// Direct graph check of the no-skipping condition on a toplex coarsening.
/// Returns the violations found; empty means the condition holds.
pub fn condition_f_violations(
    c: &CellComplex,
    v: &MultivectorField,
    a: &CellSet,
    coarsening: &[Vec<usize>],
    outflow: Option<&CellSet>,
) -> Result<Vec<String>, CertifyError> {
    let p = coarsening.len();
    if p < 3 {
        return Err(CertifyError::MalformedCoarsening(format!("{p} families, at least 3 required")));
    }
    let tops = c.toplexes_in(a);
    let mut family = vec![usize::MAX; c.len()];
    for (i, f) in coarsening.iter().enumerate() {
        if f.is_empty() {
            return Err(CertifyError::MalformedCoarsening(format!("family {i} is empty")));
        }
        for &t in f {
            if !a.contains(t) || !c.is_toplex(t) {
                return Err(CertifyError::MalformedCoarsening(format!("{} is not a toplex of A", c.id(t))));
            }
            if family[t] != usize::MAX {
                return Err(CertifyError::MalformedCoarsening(format!("{} is in two families", c.id(t))));
            }
            family[t] = i;
        }
    }
    if let Some(&t) = tops.iter().find(|&&t| family[t] == usize::MAX) {
        return Err(CertifyError::MalformedCoarsening(format!("{} is in no family", c.id(t))));
    }
    let succ: Vec<Vec<usize>> = tops.iter().map(|&t| tops.iter().copied().filter(|&s| check_sharp_pair(c, v, t, s)).collect()).collect();
    let pos_of = |t: usize| tops.binary_search(&t).expect("toplex of A");
    let good: Vec<bool> = tops.iter().map(|&t| exits_through_mouth(c, v, a, outflow, t)).collect();
    let mut out = Vec::new();
    for (i, fam) in coarsening.iter().enumerate() {
        let skip = (i + 1) % p;
        let target = (i + 2) % p;
        let mut seen = vec![false; tops.len()];
        let mut stack: Vec<usize> = fam.iter().map(|&t| pos_of(t)).collect();
        for &k in &stack {
            seen[k] = true;
        }
        while let Some(k) = stack.pop() {
            for &s in &succ[k] {
                let j = pos_of(s);
                if family[s] == skip || seen[j] {
                    continue;
                }
                if family[s] == target {
                    out.push(format!("family {i} reaches family {target} at {} avoiding family {skip}", c.id(s)));
                }
                seen[j] = true;
                stack.push(j);
            }
        }
        // cycles among reached toplexes that never exit through Mo A
        let live: Vec<usize> = (0..tops.len()).filter(|&k| seen[k] && !good[k]).collect();
        let mut indeg = vec![0usize; tops.len()];
        for &k in &live {
            for &s in &succ[k] {
                let j = pos_of(s);
                if seen[j] && !good[j] && family[s] != skip {
                    indeg[j] += 1;
                }
            }
        }
        let mut queue: Vec<usize> = live.iter().copied().filter(|&k| indeg[k] == 0).collect();
        let mut removed = 0;
        while let Some(k) = queue.pop() {
            removed += 1;
            for &s in &succ[k] {
                let j = pos_of(s);
                if seen[j] && !good[j] && family[s] != skip {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        queue.push(j);
                    }
                }
            }
        }
        if removed < live.len() {
            let w = live.iter().find(|&&k| indeg[k] > 0).expect("cycle member");
            out.push(format!("cycle from family {i} through {} avoids family {skip} and Mo A", c.id(tops[*w])));
        }
    }
    Ok(out)
}

pub fn check_condition_f_direct(c: &CellComplex, v: &MultivectorField, a: &CellSet, coarsening: &[Vec<usize>]) -> Result<bool, CertifyError> {
    Ok(condition_f_violations(c, v, a, coarsening, None)?.is_empty())
}

const THEOREM_BACKED: [&str; 2] =
    ["the polytope of cl A is an isolating block whose exit set is the polytope of Mo A", "the polytopes of cl A and Mo A are compact ANRs"];

const MAX_EVIDENCE: usize = 12;

fn ids(c: &CellComplex, cells: impl IntoIterator<Item = usize>) -> Vec<String> {
    cells.into_iter().take(MAX_EVIDENCE).map(|x| c.id(x).to_string()).collect()
}

struct Ledger(Vec<LedgerEntry>);

impl Ledger {
    fn push(&mut self, hypothesis: &str, holds: bool, evidence: Vec<String>) {
        self.0.push(LedgerEntry { hypothesis: hypothesis.to_string(), holds, evidence });
    }
}

/// Checks every hypothesis for `a` and records the outcome. The certificate is
/// issued (`certified`) only when all ledger entries hold. Without `p` a
/// section is proposed automatically.
pub fn certify(c: &CellComplex, v: &MultivectorField, a: &CellSet, p: Option<&CellSet>, flow: Option<&FlowEvidence>) -> Certificate {
    let pos = c.poset();
    let mut ledger = Ledger(Vec::new());
    let cla = pos.cl(a);

    let connected = !a.is_empty() && pos.is_connected(a);
    let iso = is_isolated_invariant(c, v, a, None);
    let mut ev = iso.diagnostics.clone();
    if !connected {
        ev.insert(0, if a.is_empty() { "A is empty".into() } else { "A is not connected".into() });
    }
    ledger.push("A is a non-empty connected isolated invariant set", connected && iso.isolated, ev);

    let crit = critical_multivectors(v, a);
    ledger.push(
        "A contains only regular multivectors",
        crit.is_empty(),
        crit.iter().take(MAX_EVIDENCE).map(|&m| ids(c, v.cells(m).iter().copied()).join(" ")).collect(),
    );

    let index = if pos.locally_closed(a) { conley_index_pair(c, a).ok() } else { None };
    let r = index.as_ref().map(homology_condition).unwrap_or_default();
    ledger.push(
        "the Conley index satisfies the homology condition for some r",
        !r.is_empty(),
        vec![index.as_ref().map_or("index undefined".to_string(), |b| format!("index {b}"))],
    );

    let section: Result<ProposedSection, SectionError> = if !iso.isolated {
        Err(SectionError::Precondition("A is not an isolated invariant set".into()))
    } else {
        match p {
            None => propose_section(c, v, a),
            Some(p) => build_section(c, v, a, p).and_then(|data| {
                let coarsening = toplex_coarsening(c, &data)?;
                Ok(ProposedSection { data, coarsening })
            }),
        }
    };
    let (section_ids, kmax, families) = match &section {
        Ok(s) => (c.ids_of(&s.data.p), Some(s.data.kmax), s.coarsening.iter().map(|f| ids(c, f.iter().copied())).collect()),
        Err(_) => (p.map(|p| c.ids_of(p)).unwrap_or_default(), None, Vec::new()),
    };
    match &section {
        Ok(s) => {
            ledger.push("P is an accepted section of A", true, vec![format!("P = {{{}}}", section_ids.join(", "))]);
            ledger.push("k_max >= 3", s.data.kmax >= 3, vec![format!("k_max = {}", s.data.kmax)]);
            ledger.push("every shift contains a toplex", true, Vec::new());
            let props = check_properties(c, v, &s.data);
            ledger.push("section property suite passes", props.is_empty(), props);
            let outflow = flow.map(|f| f.outflow);
            let (holds, ev) = match condition_f_violations(c, v, a, &s.coarsening, outflow) {
                Ok(viol) => (viol.is_empty(), viol),
                Err(e) => (false, vec![e.to_string()]),
            };
            ledger.push("no brick path skips a shift family", holds, ev);
        }
        Err(e) => {
            let ev = vec![e.to_string()];
            let without_toplex = matches!(e, SectionError::Rejected { condition: crate::section::SectionCondition::ShiftWithoutToplex, .. });
            ledger.push("P is an accepted section of A", false, ev.clone());
            ledger.push("k_max >= 3", false, vec!["no section".into()]);
            ledger.push("every shift contains a toplex", false, if without_toplex { ev } else { vec!["no section".into()] });
            ledger.push("section property suite passes", false, vec!["no section".into()]);
            ledger.push("no brick path skips a shift family", false, vec!["no section".into()]);
        }
    }

    let mut circular = Vec::new();
    let tops = c.toplexes_in(a);
    for &t in &tops {
        let mut nb: Vec<usize> =
            pos.down(t).iter().flat_map(|&f| pos.up(f).iter().copied()).filter(|&u| u > t && a.contains(u) && c.is_toplex(u)).collect();
        nb.sort_unstable();
        nb.dedup();
        for u in nb {
            if detect_circular_intersection(c, v, t, u).unwrap_or(false) {
                circular.push(format!("{} {}", c.id(t), c.id(u)));
            }
        }
    }
    ledger.push("no circular intersection of toplexes in A", circular.is_empty(), circular.into_iter().take(MAX_EVIDENCE).collect());

    match flow {
        Some(f) => {
            let out = cla.intersection(f.outflow);
            ledger.push("cl A contains no outflow cell", out.is_empty(), ids(c, out.iter()));
            let eq = a.intersection(f.unverified);
            ledger.push("no triangle of A contains an equilibrium", eq.is_empty(), ids(c, eq.iter()));
        }
        None => ledger.push("cl A contains no outflow cell", true, vec!["no flow data".into()]),
    }

    let certified = ledger.0.iter().all(|e| e.holds);
    let conclusion = match (certified, flow.is_some()) {
        (true, true) => "A contains a non-trivial periodic orbit of the flow",
        (true, false) => "A contains a non-trivial periodic orbit of every flow represented by the multivector field",
        (false, _) => "not certified",
    };
    Certificate {
        certified,
        complex_hash: complex_hash(c),
        field_hash: flow.map(|f| sha256_hex(f.field_text.as_bytes())),
        invariant_set: c.ids_of(a),
        conley_index: index,
        r,
        section: section_ids,
        kmax,
        shift_toplexes: families,
        ledger: ledger.0,
        theorem_backed: THEOREM_BACKED.iter().map(|s| s.to_string()).collect(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        conclusion: conclusion.to_string(),
    }
}
