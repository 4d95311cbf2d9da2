mod common;

use proptest::prelude::*;
use topomin::cli::{RunReport, Status};
use topomin::complement::{ConstraintCycle, Region};
use topomin::problem::{parse_problem, FaceSource, ProblemSpec, ProjectionSpec};
use topomin::solver::{PlaneRegion, WeightField};

use common::{example, run_cli, without_timing};

fn report(stdout: &str) -> RunReport {
    serde_json::from_str(stdout).expect("report parses")
}

fn write_problem(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const ROW_PROBLEM: &str = r#"
n = 2
d = 1
box = [2, 2]

[[constraint]]
kind = "point-pair"
p = [1, 0]
q = [1, 2]
"#;

#[test]
fn solve_two_by_two_is_certified() {
    let run = run_cli(&["solve", "--input", &example("separation_2x2.toml")]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run.stdout);
    assert_eq!(r.status, Status::Ok);
    assert!((r.objective.unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(r.certificate.unwrap().method(), "exhaustive");
    assert_eq!(r.certified, Some(true));
    assert_eq!(r.faces.unwrap(), vec!["(0,1) (1,1)", "(1,1) (2,1)"]);
    assert_eq!(r.seed, Some(7));
}

#[test]
fn report_json_round_trips() {
    let run = run_cli(&["check", "--input", &example("separation_2x2.toml")]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run.stdout);
    assert_eq!(r.to_json(), run.stdout.trim_end());
    assert_eq!(r.constraints.len(), 1);
    assert!(r.constraints[0].verdict.passed());
}

#[test]
fn runs_are_deterministic() {
    let input = example("bumped_path.toml");
    let runs: [&[&str]; 4] = [
        &["solve", "--input", &input],
        &["solve", "--input", &input, "--seed", "99", "--budget", "200", "--sequential"],
        &["homology", "--input", &input],
        &["lemmas", "--samples", "20000", "--injected", "10", "--seed", "3"],
    ];
    for args in runs {
        let (a, b) = (run_cli(args), run_cli(args));
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        assert_eq!(without_timing(&a.stdout), without_timing(&b.stdout), "{args:?}");
    }
}

#[test]
fn parallel_and_sequential_reports_agree() {
    let input = example("bumped_path.toml");
    let a = run_cli(&["solve", "--input", &input, "--budget", "300"]);
    let b = run_cli(&["solve", "--input", &input, "--budget", "300", "--sequential"]);
    let body = |s: &str| without_timing(s).lines().filter(|l| !l.contains("\"command\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a.stdout), body(&b.stdout));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(&["--help"]).code, 0);
    assert_eq!(run_cli(&["solve"]).code, 1);
    assert_eq!(run_cli(&["solve", "--input", "/nonexistent/problem.toml"]).code, 1);
    assert_eq!(run_cli(&["lemmas", "--pair", "sideways"]).code, 1);

    let bad = write_problem(&dir, "bad.toml", "n = 2\nd = 2\nbox = [2, 2]\n");
    let run = run_cli(&["solve", "--input", &bad]);
    assert_eq!(run.code, 1);
    assert_eq!(report(&run.stdout).status, Status::Error);
    assert!(run.stderr.contains("error:"));

    let broken = write_problem(&dir, "broken.toml", "n = \n");
    let run = run_cli(&["check", "--input", &broken]);
    assert_eq!(run.code, 1);
    assert!(report(&run.stdout).error.unwrap().contains("line 1"));

    let empty_init = format!("{ROW_PROBLEM}\n[initial]\nfaces = []\n");
    let unseparated = write_problem(&dir, "unseparated.toml", &empty_init);
    let run = run_cli(&["check", "--input", &unseparated]);
    assert_eq!(run.code, 2);
    let r = report(&run.stdout);
    assert_eq!(r.status, Status::Infeasible);
    assert!(!r.constraints[0].verdict.passed());

    let no_pool = format!("{ROW_PROBLEM}\n[pool]\nfaces = [[[0, 0], [1, 0]]]\n");
    let hopeless = write_problem(&dir, "hopeless.toml", &no_pool);
    assert_eq!(run_cli(&["solve", "--input", &hopeless]).code, 2);

    let export = run_cli(&["export", "--input", &example("separation_2x2.toml")]);
    assert_eq!(export.code, 1);
}

#[test]
fn exports_write_mesh_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("row.mesh");
    let csv = dir.path().join("row.csv");
    let run = run_cli(&[
        "export",
        "--input",
        &example("separation_2x2.toml"),
        "--mesh-out",
        mesh.to_str().unwrap(),
        "--csv-out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let mesh_text = std::fs::read_to_string(&mesh).unwrap();
    let lines: Vec<&str> = mesh_text.lines().collect();
    assert_eq!(lines[0], "2 1");
    assert_eq!(lines[1], "vertices 3");
    assert_eq!(lines[5], "faces 2");
    assert_eq!(lines.len(), 8);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("face,vertex,x1,x2\n"));
    assert_eq!(csv_text.lines().count(), 5);

    let check_csv = dir.path().join("check.csv");
    let run = run_cli(&["check", "--input", &example("separation_2x2.toml"), "--csv-out", check_csv.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    assert_eq!(
        std::fs::read_to_string(&check_csv).unwrap(),
        "constraint,kind,degree,verdict,homology_rank\n0,point-pair,0,pass,2\n"
    );
}

#[test]
fn export_of_empty_solution() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(&dir, "free.toml", "n = 2\nd = 1\nbox = [2, 2]\n");
    let mesh = dir.path().join("empty.mesh");
    let run = run_cli(&["export", "--input", &input, "--mesh-out", mesh.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(std::fs::read_to_string(&mesh).unwrap(), "2 1\nvertices 0\nfaces 0\n");
    assert_eq!(report(&run.stdout).objective, Some(0.0));
}

#[test]
fn lemmas_orthogonal_bound() {
    let run = run_cli(&["lemmas", "--pair", "orthogonal", "--samples", "100000", "--seed", "7"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let l = report(&run.stdout).lemmas.unwrap();
    assert_eq!(l.bound, 1.0);
    assert!(l.max_sum <= 1.0 + 1e-9 && l.max_sum > 0.9);
    let tilted = run_cli(&["lemmas", "--pair", "angles:1.0471975511965976,1.0471975511965976", "--samples", "20000"]);
    let l = report(&tilted.stdout).lemmas.unwrap();
    assert!((l.bound - 2.0).abs() < 1e-9 && l.max_sum <= l.bound + 1e-9);
}

#[test]
fn homology_of_the_box_and_complement() {
    let run = run_cli(&["homology", "--input", &example("separation_2x2.toml")]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let h = report(&run.stdout).homology.unwrap();
    let ranks = |g: &[topomin::homology::HomologyGroup]| g.iter().map(|x| x.rank).collect::<Vec<_>>();
    assert_eq!(ranks(&h.ambient)[0], 1);
    assert!(ranks(&h.ambient)[1..].iter().all(|&r| r == 0));
    assert_eq!(ranks(&h.complement.unwrap())[0], 2);
}

fn face_source() -> impl Strategy<Value = FaceSource> {
    prop_oneof![
        (0usize..4, 0usize..3, prop::option::of(prop::collection::vec(0i64..3, 2))).prop_map(|(g, axis, through)| {
            FaceSource { generator: Some(topomin::problem::GENERATORS[g].to_string()), axis: Some(axis), through, faces: None }
        }),
        prop::collection::vec(prop::collection::vec(prop::collection::vec(0i64..3, 2), 2), 0..4)
            .prop_map(|faces| FaceSource { faces: Some(faces), ..FaceSource::default() }),
    ]
}

fn constraint() -> impl Strategy<Value = ConstraintCycle> {
    let point = || prop::collection::vec(-2i64..5, 2);
    prop_oneof![
        (point(), point()).prop_map(|(p, q)| ConstraintCycle::PointPair { p, q }),
        prop::collection::vec(point(), 3..6).prop_map(|points| ConstraintCycle::Loop { points }),
    ]
}

fn problem() -> impl Strategy<Value = ProblemSpec> {
    (
        (1usize..4, 0.1f64..4.0, any::<u64>(), 0usize..100_000, 1e-12f64..1e-3, 1usize..4096),
        prop_oneof![
            (1.0f64..5.0).prop_map(|value| WeightField::Constant { value }),
            prop::collection::vec(1.0f64..2.0, 0..5).prop_map(|values| WeightField::PerFace { values, max: 2.0 }),
        ],
        (prop::option::of(face_source()), prop::option::of(face_source()), prop::option::of(face_source())),
        prop::option::of((prop::collection::vec(0i64..2, 2), prop::collection::vec(2i64..4, 2))),
        prop::option::of((prop::option::of((0.0f64..1.5, 0.0f64..1.5)), prop::option::of(prop::array::uniform4(-1.0f64..1.0)))),
        prop::collection::vec(constraint(), 0..4),
    )
        .prop_map(|((d, scale, seed, budget, tol, raster), weight, (initial, pool, competitor), region, projection, constraints)| {
            ProblemSpec {
                n: 2,
                d,
                cells: vec![2, 3],
                scale,
                seed,
                budget,
                tol,
                raster,
                weight,
                initial,
                pool,
                competitor,
                region: region.map(|(lo, hi)| Region { lo, hi }),
                projection: projection.map(|(angles, origin)| ProjectionSpec {
                    angles: angles.map(|(a, b)| [a, b]),
                    origin,
                    regions: vec![
                        PlaneRegion::Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] },
                        PlaneRegion::Disk { center: [0.5, -0.25], radius: 0.75 },
                    ],
                }),
                constraints,
            }
        })
}

proptest! {
    #[test]
    fn problem_toml_round_trips(spec in problem()) {
        let text = spec.to_toml();
        let back = parse_problem(&text);
        // Parsing also validates; compare only the structure here.
        let back: ProblemSpec = match back {
            Ok(s) => s,
            Err(_) => toml::from_str(&text).unwrap(),
        };
        prop_assert_eq!(back, spec);
    }
}
