use std::path::Path;
use std::process::{Command, Output};

use cbricks::certify::Certificate;
use cbricks::formats::{MorseGraphFile, ReportFile, SectionFile};
use cbricks::homology::BettiVector;
use cbricks::pipeline::MeshFile;

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cbricks"));
    cmd.args(args).env_remove("CB_DEPTH").env_remove("CB_EPS").env_remove("CB_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn morse(example: &str) -> MorseGraphFile {
    let o = run(&["invariant-sets", "--example", example], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn set_with(g: &MorseGraphFile, b: &[usize]) -> usize {
    g.sets.iter().find(|s| s.betti == Some(BettiVector(b.to_vec()))).expect("set with index").id
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--example", "circles"], &[]);
    assert_eq!(code(&o), 0);
    let rep: ReportFile = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep.determined);
    assert_eq!(serde_json::from_str::<ReportFile>(&serde_json::to_string(&rep).unwrap()).unwrap(), rep);

    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "square.json", r#"{"vertices":[[0,0],[1,0],[1,1],[0,1]],"triangles":[[0,1,2],[0,2,3]]}"#);
    let o = run(&["validate", "--mesh", &mesh, "--field-expr", "1; 0"], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("0-1"), "{}", stderr(&o));

    let o = run(&["validate", "--mesh", "/nonexistent/mesh.json", "--field-expr", "1; 0"], &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn depth_flag_beats_environment() {
    assert_eq!(code(&run(&["validate", "--example", "circles"], &[("CB_DEPTH", "0")])), 2);
    assert_eq!(code(&run(&["validate", "--example", "circles", "--depth", "8"], &[("CB_DEPTH", "0")])), 0);
}

#[test]
fn invariant_sets_of_bundled_data() {
    let g = morse("circles");
    let mut idx: Vec<_> = g.sets.iter().map(|s| s.betti.clone().unwrap()).collect();
    idx.sort();
    assert_eq!(idx, vec![BettiVector(vec![0, 0, 1]), BettiVector(vec![0, 1, 1]), BettiVector(vec![1, 1, 0])]);
    assert!(morse("vdp").sets.iter().any(|s| s.betti == Some(BettiVector(vec![1, 1, 0]))));
    assert_eq!(morse("clorenz").sets.len(), 4);
}

#[test]
fn certify_circles() {
    let g = morse("circles");
    let inner = set_with(&g, &[1, 1, 0]).to_string();
    let o = run(&["certify", "--example", "circles", "--set", &inner], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cert: Certificate = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(cert.certified);
    assert_eq!(cert.r, vec![0]);

    let origin = set_with(&g, &[0, 0, 1]).to_string();
    let o = run(&["certify", "--example", "circles", "--set", &origin], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("homology condition"));
}

#[test]
fn two_shift_circle_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let complex = write(
        dir.path(),
        "c.json",
        r#"{"kind":"cw","cells":[{"id":"v0","dim":0},{"id":"v1","dim":0},
            {"id":"e0","dim":1,"facets":[{"id":"v0","sign":-1},{"id":"v1","sign":1}]},
            {"id":"e1","dim":1,"facets":[{"id":"v1","sign":-1},{"id":"v0","sign":1}]}]}"#,
    );
    let mvf = write(dir.path(), "v.json", r#"{"multivectors":[["v0","e0"],["v1","e1"]]}"#);
    let o = run(&["certify", "--complex", &complex, "--mvf", &mvf, "--cells", "v0,v1,e0,e1"], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("k_max >= 3"), "{}", stderr(&o));
}

#[test]
fn section_hand_trace() {
    let o = run(&["section", "--example", "circle3", "--cells", "v0,v1,v2,e0,e1,e2", "--section", "v0,e0"], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s: SectionFile = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((s.nbar, s.kmax), (3, 3));
    assert_eq!(s.shifts, vec![vec!["v0", "e0"], vec!["v0", "v2", "e2"], vec!["v2", "e1"]]);
    assert_eq!(s.lyapunov["e1"], 3);
}

#[test]
fn render_is_deterministic() {
    let g = morse("circles");
    let inner = set_with(&g, &[1, 1, 0]);
    let a = run(&["render", "--example", "circles", "--sets", &inner.to_string()], &[]);
    let b = run(&["render", "--example", "circles", "--sets", &inner.to_string()], &[]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let svg = stdout(&a);
    let edges = cbricks::bundled::circles().mesh.edges.len();
    assert_eq!(svg.matches(r#"class="tick"#).count(), edges);
    assert_eq!(svg.matches("<polygon").count(), g.sets[inner].toplexes);
}

#[test]
fn perturb_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "m.json", r#"{"vertices":[[0,0],[1,0],[1,1],[0,1],[0.5,0.5]],"triangles":[[0,1,4],[1,2,4],[2,3,4],[0,3,4]]}"#);
    let args = ["perturb", "--mesh", &mesh, "--field-expr", "1; 0.3", "--rounds", "5"];
    let a = run(&args, &[("CB_SEED", "3")]);
    let b = run(&args, &[("CB_SEED", "3")]);
    assert_eq!(a.stdout, b.stdout);
    let zero = run(&["perturb", "--mesh", &mesh, "--field-expr", "1; 0.3", "--rounds", "0"], &[]);
    let parsed: MeshFile = serde_json::from_str(&stdout(&zero)).unwrap();
    let orig: MeshFile = serde_json::from_str(&std::fs::read_to_string(&mesh).unwrap()).unwrap();
    assert_eq!(parsed.vertices, orig.vertices);
}

#[test]
fn mvf_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let v = dir.path().join("v.json");
    let o = run(&["mvf", "--example", "vdp", "-o", v.to_str().unwrap(), "--complex-out", c.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["invariant-sets", "--complex", c.to_str().unwrap(), "--mvf", v.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g: MorseGraphFile = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(g, morse("vdp"));
}
