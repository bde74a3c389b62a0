//! `--config FILE` support.
//!
//! The file is a JSON object. Top-level keys name flags (`train_fraction`
//! and `train-fraction` both address `--train-fraction`) and apply wherever
//! the invoked command has such a flag. A nested object keyed by a
//! subcommand name applies only under that subcommand:
//!
//! ```json
//! {"seed": 7, "split": {"strategy": "polarity", "train_fraction": 0.8}}
//! ```
//!
//! Values become ordinary arguments inserted right after the innermost
//! subcommand. A flag given on the command line, or whose environment
//! variable is set, is left alone, so flags beat environment beat config.

use std::ffi::{OsStr, OsString};
use std::fs;

use anyhow::{bail, Context, Result};
use clap::{Arg, ArgAction, Command};
use serde_json::{Map, Value};

/// Argument vector with config values merged in, plus notes for the log.
pub fn merge(cmd: Command, argv: Vec<OsString>) -> Result<(Vec<OsString>, Vec<String>)> {
    let Some(path) = config_path(&argv) else {
        return Ok((argv, Vec::new()));
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let Value::Object(root) =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?
    else {
        bail!("config {path} must hold a JSON object");
    };

    let mut cmd = cmd;
    cmd.build();
    let (chain, insert_at) = subcommand_chain(&cmd, &argv);
    let mut leaf = &cmd;
    let mut sections: Vec<&Map<String, Value>> = vec![&root];
    for name in &chain {
        leaf = leaf
            .find_subcommand(name)
            .expect("chain built from this command");
        let parent = sections.last().unwrap();
        if let Some(v) = parent.get(name.as_str()) {
            let Value::Object(m) = v else {
                bail!("config section {name:?} must be an object");
            };
            sections.push(m);
        }
    }

    let mut injected = Vec::new();
    let mut notes = Vec::new();
    // innermost section wins for a key set at several levels
    let mut taken = Vec::new();
    for (depth, section) in sections.iter().enumerate().rev() {
        for (key, value) in section.iter() {
            if value.is_object() {
                continue;
            }
            let long = key.replace('_', "-");
            if taken.contains(&long) || long == "config" {
                continue;
            }
            let Some(arg) = leaf
                .get_arguments()
                .find(|a| a.get_long() == Some(long.as_str()))
            else {
                if depth == sections.len() - 1 && depth > 0 {
                    bail!("config key {key:?} is not a flag of this command");
                }
                notes.push(format!("config key {key:?} does not apply here"));
                continue;
            };
            taken.push(long.clone());
            if given_on_command_line(&argv, arg) {
                notes.push(format!(
                    "--{long} from the command line overrides the config"
                ));
                continue;
            }
            if arg.get_env().is_some_and(|e| std::env::var_os(e).is_some()) {
                notes.push(format!("--{long} taken from the environment"));
                continue;
            }
            injected.extend(to_args(&long, arg, value)?);
        }
    }

    let mut out = argv;
    out.splice(insert_at..insert_at, injected);
    Ok((out, notes))
}

fn config_path(argv: &[OsString]) -> Option<String> {
    let mut it = argv.iter().skip(1).map(|a| a.to_string_lossy());
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(|s| s.into_owned());
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn takes_value(arg: &Arg) -> bool {
    matches!(arg.get_action(), ArgAction::Set | ArgAction::Append)
}

/// Names of the subcommands on the command line, outermost first, and the
/// argv index just past the innermost one.
fn subcommand_chain(cmd: &Command, argv: &[OsString]) -> (Vec<String>, usize) {
    let mut chain = Vec::new();
    let mut at = argv.len().min(1);
    let mut cur = cmd;
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy();
        if tok == "--" {
            break;
        }
        if let Some(flag) = tok.strip_prefix("--") {
            if !flag.contains('=') {
                if let Some(a) = cur.get_arguments().find(|a| a.get_long() == Some(flag)) {
                    if takes_value(a) {
                        i += 1;
                    }
                }
            }
        } else if let Some(short) = tok.strip_prefix('-').and_then(|s| s.chars().next()) {
            if tok.chars().count() == 2 {
                if let Some(a) = cur.get_arguments().find(|a| a.get_short() == Some(short)) {
                    if takes_value(a) {
                        i += 1;
                    }
                }
            }
        } else if let Some(sub) = cur.find_subcommand(OsStr::new(tok.as_ref())) {
            chain.push(sub.get_name().to_string());
            cur = sub;
            at = i + 1;
        }
        i += 1;
    }
    (chain, at)
}

fn given_on_command_line(argv: &[OsString], arg: &Arg) -> bool {
    argv.iter().skip(1).any(|a| {
        let a = a.to_string_lossy();
        let long_hit = arg.get_long().is_some_and(|l| {
            a.strip_prefix("--")
                .is_some_and(|rest| rest == l || rest.starts_with(&format!("{l}=")))
        });
        let short_hit = arg.get_short().is_some_and(|s| {
            let mut cs = a.chars();
            cs.next() == Some('-') && cs.next() == Some(s)
        });
        long_hit || short_hit
    })
}

fn scalar(long: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        _ => bail!("config value for {long:?} must be a string, number or boolean"),
    })
}

fn to_args(long: &str, arg: &Arg, value: &Value) -> Result<Vec<OsString>> {
    let flag = |v: String| OsString::from(format!("--{long}={v}"));
    Ok(match (arg.get_action(), value) {
        (ArgAction::SetTrue, Value::Bool(true)) => vec![format!("--{long}").into()],
        (ArgAction::SetTrue, Value::Bool(false)) => Vec::new(),
        (ArgAction::SetTrue, _) => bail!("config value for {long:?} must be a boolean"),
        (ArgAction::Count, Value::Number(n)) => {
            let n = n.as_u64().unwrap_or(0);
            (0..n).map(|_| format!("--{long}").into()).collect()
        }
        (_, Value::Array(items)) => {
            let mut out = vec![OsString::from(format!("--{long}"))];
            for it in items {
                out.push(scalar(long, it)?.into());
            }
            out
        }
        (_, v) => vec![flag(scalar(long, v)?)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Cli;
    use clap::CommandFactory;
    use std::io::Write;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    fn merged(config: &str, args: &[&str]) -> Result<Vec<String>> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(config.as_bytes()).unwrap();
        let mut argv = os(args);
        argv.insert(1, f.path().as_os_str().to_owned());
        argv.insert(1, "--config".into());
        let (out, _) = merge(Cli::command(), argv)?;
        Ok(out
            .into_iter()
            .map(|s| s.to_string_lossy().into_owned())
            .collect())
    }

    #[test]
    fn chain_skips_option_values() {
        let cmd = Cli::command();
        let (chain, at) = subcommand_chain(
            &cmd,
            &os(&[
                "absa",
                "--threads",
                "2",
                "augment",
                "target-swap",
                "--seed",
                "1",
            ]),
        );
        assert_eq!(chain, ["augment", "target-swap"]);
        assert_eq!(at, 5);
    }

    #[test]
    fn values_inserted_after_leaf() {
        let out = merged(
            r#"{"seed": 7, "split": {"train_fraction": 0.8}}"#,
            &["absa", "split", "--corpus", "c"],
        )
        .unwrap();
        assert_eq!(&out[4..6], ["--train-fraction=0.8", "--seed=7"]);
        assert_eq!(&out[6..], ["--corpus", "c"]);
    }

    #[test]
    fn command_line_wins() {
        let out = merged(r#"{"seed": 7}"#, &["absa", "split", "--seed", "3"]).unwrap();
        assert!(!out.iter().any(|a| a == "--seed=7"));
    }

    #[test]
    fn unknown_key_in_section_is_an_error() {
        assert!(merged(r#"{"split": {"nope": 1}}"#, &["absa", "split"]).is_err());
        assert!(merged(r#"{"nope": 1}"#, &["absa", "split"]).is_ok());
    }

    #[test]
    fn booleans_and_lists() {
        let out = merged(
            r#"{"end_inclusive": true, "overlaps": "keep-longer"}"#,
            &["absa", "convert", "--in", "x"],
        )
        .unwrap();
        assert!(out.contains(&"--end-inclusive".to_string()));
        assert!(out.contains(&"--overlaps=keep-longer".to_string()));
        let out = merged(r#"{"pred": ["a", "b"]}"#, &["absa", "ensemble", "soe"]).unwrap();
        assert_eq!(&out[5..], ["--pred", "a", "b"]);
    }
}
