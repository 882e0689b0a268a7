//! `--spec FILE` support: `key = value` lines become flags placed before the
//! explicit ones. Keys use flag spelling (`s1-range` or `s1_range`); `command`
//! selects the subcommand when none is given on the command line.

use std::collections::HashSet;
use std::path::Path;

use bubble_lab::{LabError, Result};

const SUBCOMMANDS: [&str; 5] = ["family", "stability", "flow", "bounds", "embed"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| LabError::Parse(format!("spec line {}: expected key=value, got `{line}`", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(LabError::Parse(format!("spec line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split('=').next().unwrap_or(name))
}

/// Rewrites `argv` so the spec file's entries appear as flags.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut spec_path = None;
    let mut it = argv.into_iter();
    let prog = it.next().unwrap_or_else(|| "bubble-lab".into());
    while let Some(a) = it.next() {
        if a == "--spec" {
            let p = it
                .next()
                .ok_or_else(|| LabError::InvalidInput("--spec needs a file path".into()))?;
            spec_path = Some(p);
        } else if let Some(p) = a.strip_prefix("--spec=") {
            spec_path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = spec_path else {
        let mut out = vec![prog];
        out.extend(rest);
        return Ok(out);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| LabError::InvalidInput(format!("cannot read spec file {path}: {e}")))?;
    let entries = parse(&text)?;

    let explicit: HashSet<String> = rest.iter().filter_map(|a| flag_name(a)).map(str::to_string).collect();
    let mut sub = None;
    if let Some(first) = rest.first() {
        if SUBCOMMANDS.contains(&first.as_str()) {
            sub = Some(rest.remove(0));
        }
    }
    let mut flags = Vec::new();
    for (k, v) in entries {
        if k == "command" {
            if sub.is_none() {
                sub = Some(v);
            }
            continue;
        }
        if explicit.contains(&k) {
            continue;
        }
        match v.as_str() {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    let sub = sub.ok_or_else(|| LabError::InvalidInput("no subcommand given on the command line or in the spec file".into()))?;
    let mut out = vec![prog, sub];
    out.extend(flags);
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn comments_and_normalization() {
        let e = parse("# run\ncommand = family\ns1_range = 0.1:1:5  # sweep\n\n--c=0.1\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("command".into(), "family".into()),
                ("s1-range".into(), "0.1:1:5".into()),
                ("c".into(), "0.1".into())
            ]
        );
        assert!(parse("novalue\n").is_err());
    }

    #[test]
    fn explicit_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.spec");
        std::fs::write(&p, "command=family\nc=0.5\ns1=0.3\n").unwrap();
        let out = expand(v(&["bl", "--spec", p.to_str().unwrap(), "--c", "0.1"])).unwrap();
        assert_eq!(out, v(&["bl", "family", "--s1=0.3", "--c", "0.1"]));
        let out = expand(v(&["bl", "stability", &format!("--spec={}", p.display())])).unwrap();
        assert_eq!(out, v(&["bl", "stability", "--c=0.5", "--s1=0.3"]));
    }
}
