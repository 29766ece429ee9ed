//! WebAssembly bindings for the browser demo.

use wasm_bindgen::prelude::*;

use cbricks::bundled;
use cbricks::certify::{certify, FlowEvidence};
use cbricks::formats::MorseGraphFile;
use cbricks::mvf::{morse_decomposition, MorseDecomposition};
use cbricks::pipeline::{analyze, CheckConfig, FlowModel, TriMesh, VectorField};
use cbricks::render::{render_svg, RenderOptions};

/// A bundled mesh analysed under a (possibly edited) vector field.
#[wasm_bindgen]
pub struct Session {
    mesh: TriMesh,
    field: VectorField,
    model: FlowModel,
    morse: MorseDecomposition,
}

#[wasm_bindgen]
impl Session {
    /// `example` is `circles` or `vdp`; an empty `field` keeps the bundled one.
    #[wasm_bindgen(constructor)]
    pub fn new(example: &str, field: &str, depth: u32) -> Result<Session, JsError> {
        let ex = match example {
            "circles" => bundled::circles(),
            "vdp" => bundled::vdp(),
            _ => return Err(JsError::new("unknown example")),
        };
        let field = if field.trim().is_empty() { ex.field } else { VectorField::parse(field).map_err(|e| JsError::new(&e.to_string()))? };
        let model = analyze(&ex.mesh, &field, &CheckConfig { depth, eps: 0.0 }).map_err(|e| JsError::new(&e.to_string()))?;
        let c = &ex.mesh.complex;
        let morse = morse_decomposition(c, &model.mvf, &model.domain(c));
        Ok(Session { mesh: ex.mesh, field, model, morse })
    }

    pub fn field_text(&self) -> String {
        self.field.text.clone()
    }

    /// Morse graph as JSON.
    pub fn sets(&self) -> String {
        serde_json::to_string(&MorseGraphFile::describe(&self.mesh.complex, &self.morse)).expect("serializable")
    }

    /// SVG with the listed Morse sets shaded.
    pub fn svg(&self, selected: Vec<usize>, ticks: bool) -> String {
        let sets: Vec<_> = selected.iter().filter_map(|&k| self.morse.sets.get(k)).map(|s| s.cells.clone()).collect();
        let report = ticks.then_some(&self.model.report);
        render_svg(&self.mesh, report, &sets, &RenderOptions { width: 640.0, ..RenderOptions::default() })
    }

    /// Certificate for Morse set `k` as JSON.
    pub fn certify(&self, k: usize) -> Result<String, JsError> {
        let s = self.morse.sets.get(k).ok_or_else(|| JsError::new("no such set"))?;
        let ev = FlowEvidence { field_text: &self.field.text, outflow: &self.model.outflow, unverified: &self.model.unverified };
        let cert = certify(&self.mesh.complex, &self.model.mvf, &s.cells, None, Some(&ev));
        Ok(serde_json::to_string_pretty(&cert).expect("serializable"))
    }
}
