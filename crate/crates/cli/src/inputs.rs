use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ddrank::logic::{validate_type, PartialType, Signature, TypeInput};
use ddrank::theories::{builtin_theory, load_theory, AnyTheory, TheoryConfig, TheoryOracle};
use serde_json::Value;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes `text` to `path`, or stdout when there is none.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))
        }
        // A closed pipe (e.g. `| head`) is not an error for us.
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

pub fn theory_from_value(value: &Value) -> Result<AnyTheory> {
    let config = TheoryConfig::from_json(value)?;
    let theory = load_theory(&config)?;
    log::debug!(
        "loaded {:?} with {} parameters",
        theory.kind(),
        theory.parameters().len()
    );
    Ok(theory)
}

/// A builtin theory name or a path to a theory file.
pub fn load_theory_arg(arg: &str) -> Result<AnyTheory> {
    if let Some(t) = builtin_theory(arg) {
        return Ok(t);
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!("'{arg}' is neither a builtin theory nor a file");
    }
    let value: Value = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    theory_from_value(&value).with_context(|| format!("loading {}", path.display()))
}

pub fn load_type(path: &Path, theory: &AnyTheory) -> Result<PartialType> {
    let input: TypeInput = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let p = input.resolve(theory.signature())?;
    let violations = validate_type(&p, theory.signature());
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
        bail!("{}: {}", path.display(), msgs.join("; "));
    }
    Ok(p)
}

/// Signature from a theory, from `NAME/ARITY,...`, or empty.
pub fn load_signature(theory: Option<&str>, spec: Option<&str>) -> Result<Signature> {
    if let Some(t) = theory {
        return Ok(load_theory_arg(t)?.signature().clone());
    }
    let Some(spec) = spec else {
        return Ok(Signature::empty());
    };
    let relations = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let (name, arity) = entry
                .split_once('/')
                .ok_or_else(|| anyhow!("expected NAME/ARITY, got '{entry}'"))?;
            let arity: usize = arity
                .parse()
                .with_context(|| format!("arity in '{entry}'"))?;
            Ok((name.to_string(), arity))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Signature::new(relations)?)
}
