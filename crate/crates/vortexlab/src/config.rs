//! Experiment configuration: a plain key=value document (diff-friendly for
//! experiment provenance), defaults, and range validation.

use crate::error::{Error, Result};
use crate::stability::PerturbationKind;
use serde::Serialize;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    GroundState,
    Maximize,
    Evolve,
    Stability,
    Spectrum,
    Verify,
}

impl FromStr for CommandKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ground-state" => Ok(CommandKind::GroundState),
            "maximize" => Ok(CommandKind::Maximize),
            "evolve" => Ok(CommandKind::Evolve),
            "stability" => Ok(CommandKind::Stability),
            "spectrum" => Ok(CommandKind::Spectrum),
            "verify" => Ok(CommandKind::Verify),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

impl std::fmt::Display for CommandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CommandKind::GroundState => "ground-state",
            CommandKind::Maximize => "maximize",
            CommandKind::Evolve => "evolve",
            CommandKind::Stability => "stability",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Verify => "verify",
        };
        f.write_str(s)
    }
}

/// Default output root: the `VORTEXLAB_OUT` environment variable when set,
/// `out` otherwise.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os("VORTEXLAB_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Fully resolved experiment configuration. Field semantics follow the
/// modules they feed; `t_end: None` means "pick the command's natural
/// horizon" (10 eddy-turnover times for stability runs, 1.0 for free
/// evolution).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    pub p: f64,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub cfl: f64,
    pub t_end: Option<f64>,
    pub delta: f64,
    pub norm_s: Vec<f64>,
    pub seed: u64,
    pub pert_kind: PerturbationKind,
    pub constrain_to_sp: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            p: 2.0,
            n: 64,
            tol: 1e-10,
            max_iter: 5000,
            cfl: 0.5,
            t_end: None,
            delta: 0.05,
            norm_s: vec![2.0],
            seed: 0,
            pert_kind: PerturbationKind::RandomSmooth,
            constrain_to_sp: false,
            output_dir: default_output_dir(),
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse `{value}` as a value for `{key}`"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("cannot parse `{value}` as a boolean for `{key}`"),
        }),
    }
}

/// Parses a key=value document on top of the defaults and validates the
/// result. Lines starting with `#` and blank lines are skipped; syntax
/// problems report the 1-based line number, range problems name the field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected key=value, found `{trimmed}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "command" => {
                cfg.command =
                    Some(CommandKind::from_str(value).map_err(|msg| Error::Parse { line, msg })?)
            }
            "p" => cfg.p = parse_num(line, key, value)?,
            "n" => cfg.n = parse_num(line, key, value)?,
            "tol" => cfg.tol = parse_num(line, key, value)?,
            "max_iter" => cfg.max_iter = parse_num(line, key, value)?,
            "cfl" => cfg.cfl = parse_num(line, key, value)?,
            "t_end" => cfg.t_end = Some(parse_num(line, key, value)?),
            "delta" => cfg.delta = parse_num(line, key, value)?,
            "seed" => cfg.seed = parse_num(line, key, value)?,
            "s" | "norm_s" => {
                cfg.norm_s = value
                    .split(',')
                    .map(|v| parse_num(line, key, v.trim()))
                    .collect::<Result<Vec<f64>>>()?
            }
            "pert" | "pert_kind" => {
                cfg.pert_kind = value.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("unknown perturbation kind `{value}`"),
                })?
            }
            "sp_constrain" | "constrain_to_sp" => {
                cfg.constrain_to_sp = parse_bool(line, key, value)?
            }
            "out" | "output_dir" => cfg.output_dir = PathBuf::from(value),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Command-independent range checks, plus the per-command exponent rule
    /// when a command is set.
    pub fn validate(&self) -> Result<()> {
        if self.n < crate::grid::MIN_RESOLUTION {
            return Err(Error::validation(
                "n",
                format!("must be at least {}", crate::grid::MIN_RESOLUTION),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::validation("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("max_iter", "must be at least 1"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::validation("cfl", "must lie in (0, 1]"));
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return Err(Error::validation("t_end", "must be positive"));
            }
        }
        if !(self.delta >= 0.0) {
            return Err(Error::validation("delta", "must be nonnegative"));
        }
        if self.norm_s.is_empty() {
            return Err(Error::validation("s", "at least one norm exponent"));
        }
        for &s in &self.norm_s {
            if !(s >= 1.0) {
                return Err(Error::validation("s", "norm exponents must satisfy s >= 1"));
            }
        }
        if !(self.p > 0.0) {
            return Err(Error::validation("p", "must be positive"));
        }
        match self.command {
            Some(CommandKind::GroundState) => {
                if !(self.p > 1.0) {
                    return Err(Error::validation("p", "must exceed 1 for this command"));
                }
            }
            // p > 0 already holds for every command; stability and evolve
            // additionally accept the whole range via solve_for
            _ => {}
        }
        Ok(())
    }

    /// JSON echo of the resolved configuration, embedded in every artifact.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_path_with_defaults() {
        let cfg = parse_config("p=2\nn=64\ncommand=ground-state").unwrap();
        assert_eq!(cfg.command, Some(CommandKind::GroundState));
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.tol, 1e-10);
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.norm_s, vec![2.0]);
    }

    #[test]
    fn comments_blanks_and_lists() {
        let cfg = parse_config("# experiment\n\ns=2, 4\npert=area-preserving\nsp_constrain=true\n")
            .unwrap();
        assert_eq!(cfg.norm_s, vec![2.0, 4.0]);
        assert_eq!(cfg.pert_kind, PerturbationKind::AreaPreserving);
        assert!(cfg.constrain_to_sp);
    }

    #[test]
    fn subcritical_p_for_ground_state_is_a_validation_error() {
        let err = parse_config("p=0.5\ncommand=ground-state").unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "p"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn cfl_out_of_range_is_a_validation_error() {
        let err = parse_config("cfl=1.5").unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "cfl"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_the_line_number() {
        let err = parse_config("p=2\nnonsense\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = parse_config("p=two").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_config("p=2\n\nwhat=ever").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn echo_is_deterministic_json() {
        let cfg = parse_config("p=2\nn=32").unwrap();
        let a = cfg.echo().to_string();
        let b = cfg.echo().to_string();
        assert_eq!(a, b);
        assert!(a.contains("\"p\":2.0"));
    }
}
