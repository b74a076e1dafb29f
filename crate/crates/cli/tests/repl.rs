use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> String {
    fs::read_to_string(root().join("fixtures/scenarios").join(name)).unwrap()
}

/// Feeds `input` to `t2n repl` and returns (exit code, stdout).
fn repl(args: &[&str], input: &str) -> (i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_t2n"))
        .current_dir(root())
        .arg("repl")
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn greets_and_quits() {
    let welcome = fs::read_to_string(root().join("fixtures/prompts/welcome.txt")).unwrap();
    let (code, out) = repl(&[], "quit\n");
    assert_eq!(code, 0);
    assert_eq!(out, format!("{welcome}\n> "));
    assert_eq!(repl(&[], "exit\n").0, 0);
    assert_eq!(repl(&[], "").0, 0);
}

#[test]
fn narrative_then_queries() {
    let input = format!(
        "{}\nping R-1 192.168.100.2\nshow config R-2\nquit\n",
        one_line(&scenario("three_router_narrative_a.txt"))
    );
    let (code, out) = repl(&[], &input);
    assert_eq!(code, 0);
    assert!(out.contains("Understood\nProvisioned 3 device(s)"), "{out}");
    assert!(out.contains("ping R-1 -> 192.168.100.2"), "{out}");
    assert!(out.contains("success"), "{out}");
    assert!(out.contains("hostname R-2"), "{out}");
}

#[test]
fn asks_then_prompts_again() {
    let input = format!(
        "{}\n{}\nquit\n",
        one_line(&scenario("three_router_vague_routes.txt")),
        scenario("three_router_vague_routes.reply.txt").trim()
    );
    for adapter in ["rules", "replay"] {
        let (code, out) = repl(&["--adapter", adapter], &input);
        assert_eq!(code, 0);
        let ask = out
            .find("static route")
            .unwrap_or_else(|| panic!("{adapter}: {out}"));
        let done = out
            .find("Provisioned 3 device(s)")
            .unwrap_or_else(|| panic!("{adapter}: {out}"));
        assert!(ask < done);
        assert!(out[ask..done].contains("\n> "), "{adapter}: {out}");
    }
}

#[test]
fn invalid_input_stays_interactive() {
    let input = format!(
        "{}\n{}\nquit\n",
        one_line(&scenario("invalid_octet.txt")),
        one_line(&scenario("single_router_basic.txt"))
    );
    let (code, out) = repl(&[], &input);
    assert_eq!(code, 0);
    assert!(out.contains("IP_OCTET_RANGE"), "{out}");
    assert!(out.contains("Provisioned 1 device(s)"), "{out}");
}

#[test]
fn reset_starts_over() {
    let input = format!(
        "{}\nreset\n{}\nquit\n",
        one_line(&scenario("two_router_loopbacks.txt")),
        one_line(&scenario("single_router_basic.txt"))
    );
    let (code, out) = repl(&[], &input);
    assert_eq!(code, 0);
    assert_eq!(out.matches("Provisioned").count(), 2, "{out}");
}

#[test]
fn adapter_failure_exits_two() {
    let (code, out) = repl(
        &["--adapter", "replay"],
        "R9 is a router with Fa0/0 10.9.9.9/24.\n",
    );
    assert_eq!(code, 2);
    assert!(out.contains("error [ADAPTER_FAILURE]"), "{out}");
}
