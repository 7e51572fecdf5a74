use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fes"))
        .args(args)
        .output()
        .unwrap()
}

fn file(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn out(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn err(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn blocked_unfold_exits_with_one() {
    let b1 = file("b1.bes", "nu Y = X;\nmu X = Y;\n");
    let o = run(&["transform", &b1, "--op", "unfold", "--x", "X", "--y", "Y"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(err(&o).contains("Y -> X"), "{}", err(&o));

    let o = run(&[
        "transform",
        &b1,
        "--op",
        "unfold",
        "--x",
        "X",
        "--y",
        "Y",
        "--force",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        out(&o).starts_with("# justification: FORCED"),
        "{}",
        out(&o)
    );
    assert!(out(&o).contains("# relation: UNKNOWN"));
    assert!(out(&o).contains("mu X = X;"));
}

#[test]
fn usage_errors_exit_with_two() {
    let b1 = file("b1u.bes", "nu Y = X;\nmu X = Y;\n");
    let bad = file("bad.bes", "mu X = ;\n");
    for args in [
        vec!["solve", &bad],
        vec!["solve", "/nonexistent/file.bes"],
        vec!["transform", &b1, "--op", "unfold", "--x", "X"],
        vec!["transform", &b1, "--op", "swap", "--at", "9"],
        vec!["transform", &b1, "--op", "migrate", "--range", "0-1"],
        vec!["check", "--props", "NOPE"],
        vec!["check", "--lattices", "cube"],
        vec!["check", "--max-vars", "0"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", err(&o));
        assert!(
            err(&o).starts_with("error:") || err(&o).contains("error"),
            "{args:?}"
        );
    }
}

#[test]
fn solve_methods_and_spec_override() {
    let f = file(
        "open.bes",
        "lattice chain 3;\nmu X = Y | X;\nnu Y = Y & P;\nparam P = 1;\n",
    );
    let a = run(&["solve", &f]);
    let b = run(&["solve", &f, "--method", "scc"]);
    assert!(a.status.success());
    assert_eq!(out(&a), out(&b));
    assert_eq!(out(&a), "X = 1\nY = 1\n");
    let g = run(&["solve", &f, "--method", "gauss"]);
    assert_eq!(g.status.code(), Some(1));
    let o = run(&["solve", &f, "--spec", "mu Y"]);
    assert_eq!(out(&o), "Y = 0\n");
}

#[test]
fn graph_output() {
    let f = file("g.bes", "mu X = Y | Z;\nnu Y = Z;\nmu Z = Y & X;\n");
    let dot = out(&run(&["graph", &f]));
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("X -> Y;") && dot.contains("Z -> X;"), "{dot}");
    let sccs = out(&run(&["graph", &f, "--sccs"]));
    assert_eq!(sccs, "{X, Y, Z}\n");
}

#[test]
fn oracle_matches_sem() {
    let f = file("b3.bes", "mu X = Y;\nmu Y = X;\nnu Z = W;\nmu W = Z;\n");
    assert_eq!(
        out(&run(&["oracle", &f])),
        out(&run(&["solve", &f, "--method", "sem"]))
    );
    let o = run(&["transform", &f, "--op", "reduce-alt"]);
    assert!(out(&o).contains("# relation: EQUAL"));
}

#[test]
fn counterexample_replays() {
    let o = run(&[
        "check",
        "--seed",
        "42",
        "--cases",
        "200",
        "--props",
        "MIGRATION",
        "--mutate",
        "migration-no-indep",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = out(&o);
    let case: String = text
        .lines()
        .skip_while(|l| !l.starts_with("# counterexample"))
        .skip(1)
        .take_while(|l| !l.ends_with("with counterexamples"))
        .map(|l| format!("{l}\n"))
        .collect();
    let block = |i: usize| {
        let tag = format!("#! block {i} = [");
        let l = case.lines().find(|l| l.starts_with(&tag)).unwrap();
        l[tag.len()..l.len() - 1].to_string()
    };
    let f = file("replay.bes", &case);
    let migrated = format!("{}, {}", block(1), block(0));
    let before = run(&["solve", &f]);
    let after = run(&["solve", &f, "--spec", &migrated]);
    assert!(before.status.success() && after.status.success());
    let sorted = |o: &Output| {
        let mut v: Vec<String> = out(o).lines().map(str::to_string).collect();
        v.sort();
        v
    };
    assert_ne!(sorted(&before), sorted(&after), "{case}");
}
