use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use taylor_implicit::mesh::{write_obj, Mesh};
use taylor_implicit::Vec3;

fn taylor(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taylor"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}\n{}", out.status.code(), String::from_utf8_lossy(&out.stderr));
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sphere.toml"), "type = \"sphere\"\nradius = 0.3\n").unwrap();
    let root = dir.path().to_path_buf();
    (dir, root)
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_timing(v: &mut Value) {
    if let Value::Object(map) = v {
        map.retain(|k, _| !k.ends_with("_seconds") && k != "times");
        map.values_mut().for_each(strip_timing);
    }
}

#[test]
fn fit_then_extract_from_field_file() {
    let (_t, dir) = setup();
    ok(&taylor(&dir, "--seed 5 --out-dir a fit --shape sphere.toml --n-points 3000"));
    let report = json(dir.join("a/fit.json"));
    assert_eq!(report["seed"], 5);
    assert_eq!(report["n_points"], 3000);
    assert!(report["error"]["raw"]["mean_abs"].as_f64().unwrap() < 1e-3);

    ok(&taylor(&dir, "--out-dir b extract --field a/field.tylf --mesh-res 64"));
    let report = json(dir.join("b/extract.json"));
    assert_eq!(report["mesh"]["closed"], true);
    assert_eq!(report["mesh"]["euler_characteristic"], 2);
    assert_eq!(report["n_expansion_points"], 3000);
    assert!(!dir.join("b/extract_field.tylf").exists());
}

#[test]
fn same_config_twice_is_identical() {
    let (_t, dir) = setup();
    for out in ["r1", "r2"] {
        ok(&taylor(&dir, &format!("--seed 9 --out-dir {out} fit --shape sphere.toml --n-points 500")));
        ok(&taylor(&dir, &format!("--seed 9 --out-dir {out} extract --shape sphere.toml --mesh-res 48")));
        ok(&taylor(
            &dir,
            &format!("--seed 9 --out-dir {out} ablate --shape sphere.toml --axis k --values 1,4 --mesh-res 32"),
        ));
    }
    for name in ["field.tylf", "extract_field.tylf", "mesh.obj", "ablate_k.csv"] {
        assert_eq!(
            fs::read(dir.join("r1").join(name)).unwrap(),
            fs::read(dir.join("r2").join(name)).unwrap(),
            "{name}"
        );
    }
    for name in ["fit.json", "extract.json"] {
        let (mut a, mut b) = (json(dir.join("r1").join(name)), json(dir.join("r2").join(name)));
        strip_timing(&mut a);
        strip_timing(&mut b);
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn missing_shape_is_a_config_error_without_outputs() {
    let (_t, dir) = setup();
    let out = taylor(&dir, "--out-dir o fit --shape nope.toml");
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.join("o").exists());

    let out = taylor(&dir, "--out-dir o extract");
    assert_eq!(out.status.code(), Some(2), "no shape at all");
    fs::write(dir.join("bad.toml"), "[fit]\nordr = 2\n").unwrap();
    let out = taylor(&dir, "--config bad.toml --out-dir o fit --shape sphere.toml");
    assert_eq!(out.status.code(), Some(2), "unknown config key");
    assert!(!dir.join("o").exists());
}

#[test]
fn constant_outside_shape_has_its_own_exit_code() {
    let (_t, dir) = setup();
    fs::write(dir.join("empty.toml"), "type = \"polynomial\"\norder = 0\ncoefficients = [0.5]\n").unwrap();
    let out = taylor(&dir, "--out-dir o extract --shape empty.toml --mesh-res 32");
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.join("o").exists());
}

#[test]
fn corrupt_field_file_is_an_input_error() {
    let (_t, dir) = setup();
    fs::write(dir.join("junk.tylf"), b"TYLFxx").unwrap();
    let out = taylor(&dir, "--out-dir o extract --field junk.tylf");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn expansion_points_do_not_depend_on_mesh_res() {
    let (_t, dir) = setup();
    fs::write(dir.join("run.toml"), "shape = \"sphere.toml\"\n[extraction]\nmesh_res = 128\n").unwrap();
    ok(&taylor(&dir, "--config run.toml --out-dir hi extract"));
    ok(&taylor(&dir, "--config run.toml --out-dir lo extract --mesh-res 64 --format ply"));
    let (hi, lo) = (json(dir.join("hi/extract.json")), json(dir.join("lo/extract.json")));
    assert_eq!(hi["mesh_res"], 128);
    assert_eq!(lo["mesh_res"], 64, "flag overrides config");
    assert_eq!(hi["n_expansion_points"], lo["n_expansion_points"]);
    assert!(dir.join("lo/mesh.ply").exists());
    let q = |v: &Value, k: &str| v[k].as_u64().unwrap();
    assert_eq!(q(&hi, "n_taylor_queries") + q(&hi, "n_sentinel_queries"), 128u64.pow(3));
}

#[test]
fn metrics_of_a_mesh_against_itself() {
    let (_t, dir) = setup();
    write_obj(&Mesh::icosphere(Vec3::zeros(), 0.3, 3), dir.join("ball.obj")).unwrap();
    fs::write(dir.join("ball.toml"), "type = \"mesh\"\npath = \"ball.obj\"\nnormalize = false\n").unwrap();
    ok(&taylor(&dir, "--out-dir m metrics --pred ball.obj --shape ball.toml --n-points 20000"));
    let r = json(dir.join("m/metrics.json"));
    assert_eq!(r["iou"], 1.0);
    assert!(r["chamfer_l1_x10"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["f_score"], 1.0);
    assert_eq!(r["n_points"], 20000);
}

#[test]
fn ablation_csv_has_one_row_per_value() {
    let (_t, dir) = setup();
    ok(&taylor(&dir, "--out-dir s ablate --shape sphere.toml --axis k --values 1,2,4,8 --mesh-res 32"));
    let mut rdr = csv::Reader::from_path(dir.join("s/ablate_k.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[..3], ["axis", "value", "iou"]);
    let values: Vec<String> = rdr.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(values, ["1", "2", "4", "8"]);

    let out = taylor(&dir, "--out-dir s2 ablate --shape sphere.toml --order 2 --axis order --values 3");
    assert_eq!(out.status.code(), Some(2), "order above the fitted order");
}

#[test]
fn bench_report() {
    let (_t, dir) = setup();
    ok(&taylor(&dir, "--out-dir b bench --shape sphere.toml --resolutions 16,32 --repetitions 1 --flops 64"));
    let r = json(dir.join("b/bench.json"));
    assert_eq!(r["marching_cubes_excluded"], true);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (row, res) in rows.iter().zip([16u64, 32]) {
        assert_eq!(row["n_dense_queries"], res.pow(3));
        assert_eq!(row["n_taylor_queries"].as_u64().unwrap() + row["n_sentinel_queries"].as_u64().unwrap(), res.pow(3));
        assert_eq!(row["n_expansion_points"], rows[0]["n_expansion_points"]);
    }
    assert_eq!(json(dir.join("b/bench.json"))["bench"]["surrogate"]["flops_per_query"], 64);
}
