//! Entire functions given by coefficients or in closed form, and the
//! function-spec mini-language used on the command line.
//!
//! ```text
//! mono:k                 z^k
//! poly:a0+b0i,a1+b1i,..  Σ c_j z^j, constant term first
//! taylor:@path           coefficients from a file
//! exp:a+bi               e^{βz}
//! ```
//!
//! A taylor coefficient file holds one complex number per line. `#` starts
//! a comment, and an optional `tail: <real>` line declares a bound on the
//! truncated remainder.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntireFunction {
    Monomial {
        degree: u32,
    },
    Polynomial {
        coefficients: Vec<Complex64>,
    },
    Taylor {
        coefficients: Vec<Complex64>,
        tail_bound: f64,
    },
    /// `amplitude · e^{βz}`
    Exponential {
        beta: Complex64,
        amplitude: Complex64,
    },
}

impl EntireFunction {
    pub fn monomial(degree: u32) -> Self {
        EntireFunction::Monomial { degree }
    }

    pub fn polynomial(coefficients: Vec<Complex64>) -> Result<Self> {
        check_coefficients(&coefficients)?;
        Ok(EntireFunction::Polynomial { coefficients })
    }

    /// Convenience for real coefficients, constant term first.
    pub fn real_polynomial(coefficients: &[f64]) -> Result<Self> {
        Self::polynomial(
            coefficients
                .iter()
                .map(|&c| Complex64::new(c, 0.0))
                .collect(),
        )
    }

    pub fn taylor(coefficients: Vec<Complex64>, tail_bound: f64) -> Result<Self> {
        check_coefficients(&coefficients)?;
        if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
            return Err(Error::domain(format!(
                "taylor tail bound must be finite and nonnegative, got {tail_bound}"
            )));
        }
        Ok(EntireFunction::Taylor {
            coefficients,
            tail_bound,
        })
    }

    pub fn exponential(beta: Complex64) -> Self {
        EntireFunction::Exponential {
            beta,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    /// Read a taylor coefficient file.
    pub fn taylor_from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        parse_taylor_text(&text)
    }

    /// Every coefficient, when the function is a finite power series.
    pub fn coefficients(&self) -> Option<Vec<Complex64>> {
        match self {
            EntireFunction::Monomial { degree } => {
                let mut c = vec![Complex64::new(0.0, 0.0); *degree as usize + 1];
                c[*degree as usize] = Complex64::new(1.0, 0.0);
                Some(c)
            }
            EntireFunction::Polynomial { coefficients }
            | EntireFunction::Taylor { coefficients, .. } => Some(coefficients.clone()),
            EntireFunction::Exponential { .. } => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self, EntireFunction::Monomial { .. })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.jet(z)[0]
    }

    /// `[f(z), f′(z), f″(z)]`
    pub fn jet(&self, z: Complex64) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            EntireFunction::Monomial { degree } => {
                let k = *degree as i32;
                let f = z.powi(k);
                let d1 = if k >= 1 {
                    z.powi(k - 1) * k as f64
                } else {
                    zero
                };
                let d2 = if k >= 2 {
                    z.powi(k - 2) * (k * (k - 1)) as f64
                } else {
                    zero
                };
                [f, d1, d2]
            }
            EntireFunction::Polynomial { coefficients }
            | EntireFunction::Taylor { coefficients, .. } => horner_jet(coefficients, z),
            EntireFunction::Exponential { beta, amplitude } => {
                let f = amplitude * (beta * z).exp();
                [f, beta * f, beta * beta * f]
            }
        }
    }

    /// `c · f` for a nonzero constant `c`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        if c.norm() == 0.0 || !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::domain("scale factor must be finite and nonzero"));
        }
        Ok(match self {
            EntireFunction::Monomial { .. } | EntireFunction::Polynomial { .. } => {
                let coefficients = self
                    .coefficients()
                    .expect("finite series")
                    .into_iter()
                    .map(|a| a * c)
                    .collect();
                EntireFunction::Polynomial { coefficients }
            }
            EntireFunction::Taylor {
                coefficients,
                tail_bound,
            } => EntireFunction::Taylor {
                coefficients: coefficients.iter().map(|a| a * c).collect(),
                tail_bound: tail_bound * c.norm(),
            },
            EntireFunction::Exponential { beta, amplitude } => EntireFunction::Exponential {
                beta: *beta,
                amplitude: amplitude * c,
            },
        })
    }

    /// `z ↦ f(e^{iθ₀} z)`
    pub fn rotated(&self, theta: f64) -> Self {
        let w = Complex64::from_polar(1.0, theta);
        match self {
            EntireFunction::Monomial { .. } | EntireFunction::Polynomial { .. } => {
                let coefficients = self
                    .coefficients()
                    .expect("finite series")
                    .into_iter()
                    .enumerate()
                    .map(|(j, a)| a * w.powi(j as i32))
                    .collect();
                EntireFunction::Polynomial { coefficients }
            }
            EntireFunction::Taylor {
                coefficients,
                tail_bound,
            } => EntireFunction::Taylor {
                coefficients: coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * w.powi(j as i32))
                    .collect(),
                tail_bound: *tail_bound,
            },
            EntireFunction::Exponential { beta, amplitude } => EntireFunction::Exponential {
                beta: beta * w,
                amplitude: *amplitude,
            },
        }
    }
}

fn check_coefficients(coefficients: &[Complex64]) -> Result<()> {
    if coefficients.is_empty() {
        return Err(Error::Parse("empty coefficient list".into()));
    }
    if coefficients
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::domain("coefficients must be finite"));
    }
    if coefficients.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::domain("polynomial must have a nonzero coefficient"));
    }
    Ok(())
}

/// Value, first and second derivative of `Σ c_j z^j` in one Horner pass.
fn horner_jet(coefficients: &[Complex64], z: Complex64) -> [Complex64; 3] {
    let zero = Complex64::new(0.0, 0.0);
    let (mut p, mut d1, mut d2) = (zero, zero, zero);
    for c in coefficients.iter().rev() {
        d2 = d2 * z + d1 * 2.0;
        d1 = d1 * z + p;
        p = p * z + c;
    }
    [p, d1, d2]
}

/// Parse `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`, with exponents allowed.
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("malformed complex number '{token}'"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("", body),
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        re_part.parse::<f64>().map_err(|_| bad())?
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn parse_taylor_text(text: &str) -> Result<EntireFunction> {
    let mut coefficients = Vec::new();
    let mut tail_bound = 0.0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("tail:") {
            tail_bound = rest.trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!(
                    "line {}: malformed tail bound '{}'",
                    lineno + 1,
                    rest.trim()
                ))
            })?;
            continue;
        }
        coefficients.push(
            parse_complex(line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
        );
    }
    EntireFunction::taylor(coefficients, tail_bound)
}

impl FromStr for EntireFunction {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::Parse("empty function spec".into()));
        }
        let (kind, body) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in function spec '{spec}'")))?;
        match kind {
            "mono" => {
                let degree: i64 = body
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("malformed degree '{body}'")))?;
                if degree < 0 {
                    return Err(Error::Parse("degree must be nonnegative".into()));
                }
                let degree = u32::try_from(degree)
                    .map_err(|_| Error::Parse(format!("degree '{body}' is too large")))?;
                Ok(EntireFunction::monomial(degree))
            }
            "poly" => {
                if body.trim().is_empty() {
                    return Err(Error::Parse("empty coefficient list".into()));
                }
                let coefficients = body
                    .split(',')
                    .map(parse_complex)
                    .collect::<Result<Vec<_>>>()?;
                EntireFunction::polynomial(coefficients)
            }
            "exp" => Ok(EntireFunction::exponential(parse_complex(body)?)),
            "taylor" => {
                let path = body.strip_prefix('@').ok_or_else(|| {
                    Error::Parse(format!("taylor spec must be 'taylor:@path', got '{spec}'"))
                })?;
                EntireFunction::taylor_from_file(path)
            }
            other => Err(Error::Parse(format!("unknown function kind '{other}'"))),
        }
    }
}

fn fmt_complex(c: &Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for EntireFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntireFunction::Monomial { degree } => write!(f, "mono:{degree}"),
            EntireFunction::Polynomial { coefficients } => {
                let parts: Vec<String> = coefficients.iter().map(fmt_complex).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            EntireFunction::Taylor {
                coefficients,
                tail_bound,
            } => write!(f, "taylor[{} terms, tail {tail_bound}]", coefficients.len()),
            EntireFunction::Exponential { beta, amplitude } => {
                if *amplitude == Complex64::new(1.0, 0.0) {
                    write!(f, "exp:{}", fmt_complex(beta))
                } else {
                    write!(f, "({})*exp:{}", fmt_complex(amplitude), fmt_complex(beta))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_spec_forms() {
        assert_eq!(
            "mono:3".parse::<EntireFunction>().unwrap(),
            EntireFunction::monomial(3)
        );
        assert_eq!(
            "poly:1,0,2+1i".parse::<EntireFunction>().unwrap(),
            EntireFunction::polynomial(vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 1.0)]).unwrap()
        );
        assert_eq!(
            "exp:1".parse::<EntireFunction>().unwrap(),
            EntireFunction::exponential(c(1.0, 0.0))
        );
    }

    #[test]
    fn parse_errors_name_the_problem() {
        let err = "mono:-1".parse::<EntireFunction>().unwrap_err();
        assert_eq!(err, Error::Parse("degree must be nonnegative".into()));
        assert!(matches!(
            "poly:".parse::<EntireFunction>(),
            Err(Error::Parse(_))
        ));
        let err = "poly:1,x".parse::<EntireFunction>().unwrap_err();
        assert!(err.to_string().contains("'x'"));
        assert!("".parse::<EntireFunction>().is_err());
        assert!("sin:1".parse::<EntireFunction>().is_err());
        assert!("poly:0,0".parse::<EntireFunction>().is_err());
    }

    #[test]
    fn complex_token_forms() {
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("-1.5").unwrap(), c(-1.5, 0.0));
        assert_eq!(parse_complex("2-3i").unwrap(), c(2.0, -3.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("0.5i").unwrap(), c(0.0, 0.5));
        assert_eq!(parse_complex("1e-3+2E-1i").unwrap(), c(1e-3, 0.2));
        assert_eq!(parse_complex("-1e2-i").unwrap(), c(-100.0, -1.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn taylor_file_format() {
        let text = "# exp(z) truncated\ntail: 1e-12\n1\n1 # z\n0.5\n\n0.16666666666666666\n";
        let f = parse_taylor_text(text).unwrap();
        match &f {
            EntireFunction::Taylor {
                coefficients,
                tail_bound,
            } => {
                assert_eq!(coefficients.len(), 4);
                assert_eq!(*tail_bound, 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_taylor_text("# nothing\n").is_err());
        assert!(parse_taylor_text("tail: -1\n1\n").is_err());
    }

    #[test]
    fn taylor_from_disk() {
        let dir = std::env::temp_dir().join(format!("gaussmean-taylor-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("coeffs.txt");
        std::fs::write(&path, "1\n2+1i\n").unwrap();
        let f: EntireFunction = format!("taylor:@{}", path.display()).parse().unwrap();
        assert_eq!(f.eval(c(1.0, 0.0)), c(3.0, 1.0));
        std::fs::remove_dir_all(&dir).ok();
        assert!(matches!(
            "taylor:@/nonexistent/coeffs".parse::<EntireFunction>(),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn jets_match_closed_forms() {
        let z = c(0.3, -1.1);
        let m = EntireFunction::monomial(3).jet(z);
        assert!((m[0] - z * z * z).norm() < 1e-15);
        assert!((m[1] - z * z * 3.0).norm() < 1e-15);
        assert!((m[2] - z * 6.0).norm() < 1e-15);
        let e = EntireFunction::exponential(c(0.5, 0.5)).jet(z);
        let v = (c(0.5, 0.5) * z).exp();
        assert!((e[0] - v).norm() < 1e-15);
        assert!((e[2] - c(0.5, 0.5) * c(0.5, 0.5) * v).norm() < 1e-15);
        let one = EntireFunction::monomial(0).jet(z);
        assert_eq!(one, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn scaling_and_rotation() {
        let f = EntireFunction::monomial(2);
        let g = f.scaled(c(0.0, 2.0)).unwrap();
        let z = c(1.5, 0.5);
        assert!((g.eval(z) - c(0.0, 2.0) * z * z).norm() < 1e-14);
        assert!(f.scaled(c(0.0, 0.0)).is_err());
        let e = EntireFunction::exponential(c(1.0, 0.0));
        let r = e.rotated(0.7);
        assert!((r.eval(z) - e.eval(z * Complex64::from_polar(1.0, 0.7))).norm() < 1e-13);
    }

    #[test]
    fn display_round_trips_through_parse() {
        for spec in ["mono:4", "poly:1,0,2+1i", "exp:0.5-2i"] {
            let f: EntireFunction = spec.parse().unwrap();
            assert_eq!(f.to_string().parse::<EntireFunction>().unwrap(), f);
        }
    }

    proptest! {
        #[test]
        fn horner_agrees_with_power_sum(
            coeffs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..8),
            r in 0.0f64..10.0,
            theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let coefficients: Vec<Complex64> = coeffs.iter().map(|&(a, b)| c(a, b)).collect();
            prop_assume!(coefficients.iter().any(|a| a.norm() > 0.0));
            let f = EntireFunction::polynomial(coefficients.clone()).unwrap();
            let z = Complex64::from_polar(r, theta);
            let direct: Complex64 = coefficients
                .iter()
                .enumerate()
                .map(|(j, a)| a * z.powi(j as i32))
                .sum();
            let magnitude: f64 = coefficients
                .iter()
                .enumerate()
                .map(|(j, a)| a.norm() * r.powi(j as i32))
                .sum();
            prop_assert!((f.eval(z) - direct).norm() <= 1e-12 * magnitude.max(1e-300));
        }
    }
}
