//! Drives the command-line front end in-process: Möbius table, a prediction and the
//! self-test, written to a temporary directory.

use traffic_tensors::cli::run;

fn main() {
    let dir = std::env::temp_dir().join("traffic-tensors-tour");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let graph = dir.join("loop.json");
    std::fs::write(&graph, r#"{"vertices": 1, "edges": [[0, 0], [0, 0]]}"#).expect("graph file");
    let g = graph.to_str().unwrap();
    for args in [
        vec!["traffic-tensors", "mobius", "--n", "3", "--format", "csv"],
        vec!["traffic-tensors", "predict", "--word", "1,2,1*,2*", "--blocks", "1,1,0", "--graph", g, "--format", "csv"],
        vec!["traffic-tensors", "selftest", "--format", "csv"],
    ] {
        let code = run(args.clone());
        eprintln!("{} -> exit {}", args[1], code);
    }
}
