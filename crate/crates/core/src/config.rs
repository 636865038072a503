//! Plain-text configuration files: `key = value` lines with `#` comments,
//! grouped into `[coefficient]`, `[potential]`, `[data]`, `[weights]` and
//! `[mesh]` sections.
//!
//! ```text
//! [coefficient]
//! kind = constant            # constant | nondecreasing-smooth | piecewise-transition
//! params = 1.0
//!
//! [potential]
//! b = 1.0
//!
//! [data]
//! y0 = sine                  # zero | sine | hat | gaussian c x0 | indicator lo hi [scale] | pwlinear x v x v ...
//! y1 = zero
//!
//! [weights]
//! x0 = -0.05
//! beta = 0.99
//! lambda = 0.1
//! s = 1.0
//! # M0 omitted -> minimal 1 - x0^2 + beta T^2
//! # delta omitted -> 0.225 T
//! theta = sqrt               # sqrt | quintic
//! T = 2.2
//! allow_short_horizon = false
//!
//! [mesh]
//! Nx = 10
//! Nt = 22
//! ```

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::{
    minimal_m0, CoefficientField, InitialData, PotentialField, ProblemConfig, Profile, ThetaShape,
    WeightParams, DEFAULT_DELTA_FRACTION,
};

#[derive(Debug, Clone)]
struct RawEntry {
    value: String,
    line: usize,
}

fn parse_sections(text: &str) -> Result<HashMap<String, HashMap<String, RawEntry>>> {
    let mut sections: HashMap<String, HashMap<String, RawEntry>> = HashMap::new();
    let mut current = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::ConfigParse {
                    line: line_no,
                    message: format!("malformed section header '{line}'"),
                });
            }
            current = line[1..line.len() - 1].trim().to_lowercase();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            });
        };
        if current.is_empty() {
            return Err(Error::ConfigParse {
                line: line_no,
                message: "key outside any [section]".into(),
            });
        }
        let key = line[..eq].trim().to_lowercase();
        let value = line[eq + 1..].trim().to_string();
        sections.get_mut(&current).unwrap().insert(
            key,
            RawEntry {
                value,
                line: line_no,
            },
        );
    }
    Ok(sections)
}

fn parse_f64(entry: &RawEntry) -> Result<f64> {
    entry.value.parse().map_err(|_| Error::ConfigParse {
        line: entry.line,
        message: format!("expected a number, got '{}'", entry.value),
    })
}

fn parse_usize(entry: &RawEntry) -> Result<usize> {
    entry.value.parse().map_err(|_| Error::ConfigParse {
        line: entry.line,
        message: format!("expected an integer, got '{}'", entry.value),
    })
}

fn parse_bool(entry: &RawEntry) -> Result<bool> {
    match entry.value.to_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::ConfigParse {
            line: entry.line,
            message: format!("expected true/false, got '{other}'"),
        }),
    }
}

fn parse_floats(entry: &RawEntry) -> Result<Vec<f64>> {
    entry
        .value
        .split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| Error::ConfigParse {
                line: entry.line,
                message: format!("expected numbers, got '{tok}'"),
            })
        })
        .collect()
}

fn parse_profile(entry: &RawEntry) -> Result<Profile> {
    let mut toks = entry.value.split_whitespace();
    let kind = toks.next().unwrap_or("").to_lowercase();
    let rest: Vec<f64> = toks
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::ConfigParse {
                line: entry.line,
                message: format!("expected numeric parameters, got '{tok}'"),
            })
        })
        .collect::<Result<_>>()?;
    let arity = |want: usize| -> Result<()> {
        if rest.len() != want {
            Err(Error::ConfigParse {
                line: entry.line,
                message: format!("'{kind}' takes {want} parameters, got {}", rest.len()),
            })
        } else {
            Ok(())
        }
    };
    match kind.as_str() {
        "zero" => {
            arity(0)?;
            Ok(Profile::Zero)
        }
        "sine" => {
            arity(0)?;
            Ok(Profile::SinePi)
        }
        "hat" => {
            arity(0)?;
            Ok(Profile::hat())
        }
        "gaussian" => {
            arity(2)?;
            Ok(Profile::Gaussian {
                coeff: rest[0],
                center: rest[1],
            })
        }
        "indicator" => {
            if rest.len() == 2 {
                Ok(Profile::Indicator {
                    lo: rest[0],
                    hi: rest[1],
                    scale: 1.0,
                })
            } else if rest.len() == 3 {
                Ok(Profile::Indicator {
                    lo: rest[0],
                    hi: rest[1],
                    scale: rest[2],
                })
            } else {
                Err(Error::ConfigParse {
                    line: entry.line,
                    message: "'indicator' takes lo hi [scale]".into(),
                })
            }
        }
        "pwlinear" => {
            if rest.len() < 4 || rest.len() % 2 != 0 {
                return Err(Error::ConfigParse {
                    line: entry.line,
                    message: "'pwlinear' takes pairs x0 v0 x1 v1 ...".into(),
                });
            }
            let xs = rest.iter().step_by(2).copied().collect();
            let vs = rest.iter().skip(1).step_by(2).copied().collect();
            Ok(Profile::PiecewiseLinear { xs, vs })
        }
        other => Err(Error::ConfigParse {
            line: entry.line,
            message: format!("unknown profile kind '{other}'"),
        }),
    }
}

/// Parse a configuration from text. Validation errors carry line numbers
/// where they concern a specific entry.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let sections = parse_sections(text)?;
    let section = |name: &str| -> Result<&HashMap<String, RawEntry>> {
        sections.get(name).ok_or_else(|| Error::ConfigParse {
            line: 0,
            message: format!("missing [{name}] section"),
        })
    };
    let need = |sec: &'static str, key: &'static str| -> Result<RawEntry> {
        section(sec)?.get(key).cloned().ok_or_else(|| Error::ConfigParse {
            line: 0,
            message: format!("missing key '{key}' in [{sec}]"),
        })
    };

    // [coefficient]
    let kind = need("coefficient", "kind")?;
    let coefficient = match kind.value.to_lowercase().as_str() {
        "constant" => {
            let p = parse_floats(&need("coefficient", "params")?)?;
            if p.len() != 1 {
                return Err(Error::ConfigParse {
                    line: kind.line,
                    message: "constant coefficient takes one parameter".into(),
                });
            }
            CoefficientField::constant(p[0])
        }
        "nondecreasing-smooth" => {
            let p = parse_floats(&need("coefficient", "params")?)?;
            if p.len() != 2 {
                return Err(Error::ConfigParse {
                    line: kind.line,
                    message: "nondecreasing-smooth takes intercept and slope".into(),
                });
            }
            CoefficientField::affine(p[0], p[1])
        }
        "piecewise-transition" => {
            let p = parse_floats(&need("coefficient", "params")?)?;
            if p.len() != 4 {
                return Err(Error::ConfigParse {
                    line: kind.line,
                    message: "piecewise-transition takes left right ramp_start ramp_end".into(),
                });
            }
            CoefficientField::Transition {
                left: p[0],
                right: p[1],
                ramp_start: p[2],
                ramp_end: p[3],
            }
        }
        other => {
            return Err(Error::ConfigParse {
                line: kind.line,
                message: format!("unknown coefficient kind '{other}'"),
            })
        }
    };

    let potential = PotentialField::constant(parse_f64(&need("potential", "b")?)?);
    let data = InitialData::new(
        parse_profile(&need("data", "y0")?)?,
        parse_profile(&need("data", "y1")?)?,
    );

    let wsec = section("weights")?;
    let t_final = parse_f64(&need("weights", "t")?)?;
    let x0 = parse_f64(&need("weights", "x0")?)?;
    let beta = parse_f64(&need("weights", "beta")?)?;
    let lambda = parse_f64(&need("weights", "lambda")?)?;
    let s = parse_f64(&need("weights", "s")?)?;
    let m0 = match wsec.get("m0") {
        Some(e) => parse_f64(e)?,
        None => minimal_m0(x0, beta, t_final),
    };
    let delta = match wsec.get("delta") {
        Some(e) => parse_f64(e)?,
        None => DEFAULT_DELTA_FRACTION * t_final,
    };
    let theta = match wsec.get("theta") {
        Some(e) => match e.value.to_lowercase().as_str() {
            "sqrt" => ThetaShape::SqrtRamp,
            "quintic" => ThetaShape::Quintic,
            other => {
                return Err(Error::ConfigParse {
                    line: e.line,
                    message: format!("unknown theta shape '{other}' (sqrt | quintic)"),
                })
            }
        },
        None => ThetaShape::SqrtRamp,
    };
    let allow_short_horizon = match wsec.get("allow_short_horizon") {
        Some(e) => parse_bool(e)?,
        None => false,
    };

    let nx = parse_usize(&need("mesh", "nx")?)?;
    let nt = parse_usize(&need("mesh", "nt")?)?;

    let config = ProblemConfig {
        coefficient,
        potential,
        data,
        weights: WeightParams {
            x0,
            beta,
            lambda,
            s,
            m0,
            delta,
            t_final,
            theta,
        },
        nx,
        nt,
        allow_short_horizon,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
