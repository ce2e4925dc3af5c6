use std::process::Command;

fn rulegen(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_rulegen"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn native_merged_rules() {
    let (out, _, code) = rulegen(&["gen", "rules", "--builtin", "and", "--merge"]);
    assert_eq!(code, 0);
    assert!(out.contains("z=1 -> x!=0, y!=0\n"), "{out}");
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn unmerged_chr_has_one_line_per_rule() {
    let (out, _, _) = rulegen(&["gen", "rules", "--builtin", "and", "--emit", "chr", "--no-merge"]);
    assert_eq!(out.lines().filter(|l| !l.starts_with('%')).count(), 7);
}

#[test]
fn inclusion_chr_header() {
    let (out, _, _) = rulegen(&["gen", "inclusion", "--builtin", "base-c", "--emit", "chr"]);
    assert!(out.contains("% in(X,L) :- dom(X,D), subset(D,L).\n"), "{out}");
    assert!(out.contains("c(X,Y) ==> in(X,[0, 1]) | Y##2.\n"), "{out}");
}

#[test]
fn trace_lines() {
    let (out, _, code) = rulegen(&["propagate", "problems/full-adder-query.csp", "--trace"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("FIRE ")), "{out}");
}

#[test]
fn seeded_propagation_matches_fifo() {
    let (fifo, _, _) = rulegen(&["propagate", "problems/impossible-object.csp"]);
    for seed in ["1", "2", "3"] {
        let (shuffled, _, _) = rulegen(&["propagate", "problems/impossible-object.csp", "--seed", seed]);
        assert_eq!(shuffled, fifo);
    }
}

#[test]
fn solve_limit() {
    let (out, _, code) = rulegen(&["solve", "problems/add-network.csp", "--limit", "3"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("\n") && out.lines().last().unwrap().starts_with("solutions=3 "), "{out}");
}

#[test]
fn verify_builtin() {
    let (out, _, code) = rulegen(&["verify", "--builtin", "base-c", "--trials", "50", "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
    assert!(out.contains("WITNESS "), "{out}");
}

#[test]
fn usage_errors_exit_2() {
    let (_, err, code) = rulegen(&["gen", "rules", "--builtin", "and", "--max-premise", "3"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: "), "{err}");
    assert_eq!(rulegen(&["gen", "rules", "--builtin", "nosuch"]).2, 2);
    assert_eq!(rulegen(&["gen", "rules", "no/such/file.rel"]).2, 2);
    assert_eq!(rulegen(&["solve", "no/such/problem.csp"]).2, 2);
    assert_eq!(rulegen(&["gen", "rules"]).2, 2);
}

#[test]
fn parse_error_names_line() {
    let dir = std::env::temp_dir().join(format!("rulegen-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.rel");
    std::fs::write(&f, "relation r 2\ndomains: 0 1\ntuples:\n0 2\n").unwrap();
    let (_, err, code) = rulegen(&["gen", "rules", f.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}
