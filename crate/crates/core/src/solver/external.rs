use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::encoder::Value;
use crate::solver::sexpr::{parse_all, Sexp};
use crate::solver::{SolveOutcome, SolveStats, SolveStatus};

fn value_of(sort: &str, v: &Sexp) -> Option<Value> {
    match (sort, v) {
        ("Bool", Sexp::Atom(a)) => match a.as_str() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        ("Int", Sexp::Atom(a)) => a.parse().ok().map(Value::Int),
        ("Int", Sexp::List(xs)) => match xs.as_slice() {
            [Sexp::Atom(op), Sexp::Atom(n)] if op == "-" => n.parse::<i64>().ok().map(|n| Value::Int(-n)),
            _ => None,
        },
        _ => None,
    }
}

fn collect_defs(items: &[Sexp], out: &mut BTreeMap<String, Value>) {
    for item in items {
        let Some(xs) = item.list() else { continue };
        match xs {
            [Sexp::Atom(kw), rest @ ..] if kw == "model" => collect_defs(rest, out),
            [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort), value]
                if kw == "define-fun" && args.is_empty() =>
            {
                if let Some(v) = value_of(sort, value) {
                    out.insert(name.clone(), v);
                }
            }
            _ => {}
        }
    }
}

/// Interprets solver standard output: the first `sat`/`unsat`/`unknown`
/// atom, and on `sat` the first model block after it.
pub fn parse_response(text: &str) -> Result<(SolveStatus, Option<BTreeMap<String, Value>>), String> {
    let items = parse_all(text).map_err(|e| format!("unparseable solver output: {}", e.0))?;
    let pos = items.iter().position(|x| matches!(x.atom(), Some("sat" | "unsat" | "unknown" | "timeout"))).ok_or_else(
        || {
            let first_error = items.iter().find_map(|x| match x.list() {
                Some([Sexp::Atom(kw), msg, ..]) if kw == "error" => msg.atom().map(str::to_string),
                _ => None,
            });
            first_error.unwrap_or_else(|| format!("no satisfiability verdict in output: {}", text.trim()))
        },
    )?;
    let status = match items[pos].atom() {
        Some("sat") => SolveStatus::Sat,
        Some("unsat") => SolveStatus::Unsat,
        Some("timeout") => SolveStatus::Timeout,
        _ => SolveStatus::Unknown,
    };
    if status != SolveStatus::Sat {
        return Ok((status, None));
    }
    let mut values = BTreeMap::new();
    if let Some(block) = items[pos + 1..].iter().find(|x| x.list().is_some()) {
        if let Some([Sexp::Atom(kw), Sexp::Atom(msg), ..]) = block.list() {
            if kw == "error" {
                return Err(format!("solver could not produce a model: {msg}"));
            }
        }
        collect_defs(std::slice::from_ref(block), &mut values);
        if values.is_empty() {
            collect_defs(block.list().unwrap_or_default(), &mut values);
        }
    }
    Ok((status, Some(values)))
}

fn failure(message: String, started: Instant) -> SolveOutcome {
    SolveOutcome {
        status: SolveStatus::SolverError,
        assignment: None,
        stats: SolveStats { wall_time: started.elapsed(), ..Default::default() },
        message: Some(message),
    }
}

/// Runs `solver_cmd` (program and arguments separated by whitespace), feeds
/// `script` on standard input and waits at most `timeout`. The child is
/// killed when the deadline passes.
pub fn solve_external(script: &str, solver_cmd: &str, timeout: Duration) -> SolveOutcome {
    let started = Instant::now();
    let mut parts = solver_cmd.split_whitespace();
    let Some(program) = parts.next() else {
        return failure("empty solver command".into(), started);
    };
    let mut child = match Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return failure(format!("cannot start solver '{program}': {e}"), started),
    };

    let mut stdin = child.stdin.take().expect("stdin is piped");
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let mut stderr = child.stderr.take().expect("stderr is piped");
    let input = script.to_owned();
    let writer = thread::spawn(move || {
        // a solver that exits early closes the pipe; its output explains why
        let _ = stdin.write_all(input.as_bytes());
    });
    let out_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let err_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let mut nap = Duration::from_millis(1);
    let exit = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {}
            Err(e) => return failure(format!("lost solver process: {e}"), started),
        }
        if started.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            // the pipe threads are detached: a grandchild of a wrapper
            // script may keep the pipes open past the kill
            drop((writer, out_reader, err_reader));
            return SolveOutcome {
                status: SolveStatus::Timeout,
                assignment: None,
                stats: SolveStats { wall_time: started.elapsed(), ..Default::default() },
                message: Some(format!("no answer within {:.1}s", timeout.as_secs_f64())),
            };
        }
        thread::sleep(nap);
        nap = (nap * 2).min(Duration::from_millis(25));
    };
    let _ = writer.join();
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let wall_time = started.elapsed();

    match parse_response(&out) {
        Ok((status, assignment)) => {
            SolveOutcome { status, assignment, stats: SolveStats { wall_time, ..Default::default() }, message: None }
        }
        Err(msg) => {
            let detail = if err.trim().is_empty() { msg } else { format!("{msg}; stderr: {}", err.trim()) };
            failure(format!("solver exited with {exit}: {detail}"), started)
        }
    }
}
