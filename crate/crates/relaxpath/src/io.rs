//! JSON serialization of instances and paths.
//!
//! Instance files carry the raw vectors (`u`, `q`, optional `m`, validation
//! counts `r`, and box weights `delta`). Path files carry the breakpoint
//! sequence only; segment data is rebuilt on read by replaying the
//! transitions against the instance, so a write/read round-trip reproduces
//! the in-memory path bit for bit. Finite numbers are written with 17
//! significant digits (enough to pin down a double exactly); infinities are
//! written as the strings `"inf"` / `"-inf"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{weighted_transform, ProblemInstance};
use crate::path::{Breakpoint, Direction, Objective, RelaxationPath, Transition};

/// On-disk instance document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|_| Error::InvalidPath("malformed instance file"))
    }

    /// Builds the solver instance, applying the box-weight transform when
    /// `delta` is present.
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        match (&self.delta, &self.m) {
            (Some(delta), None) => weighted_transform(&self.u, &self.q, delta),
            (Some(_), Some(_)) => {
                Err(Error::InvalidPath("delta and m are mutually exclusive"))
            }
            (None, Some(m)) => {
                ProblemInstance::new(self.u.clone(), self.q.clone(), m.clone())
            }
            (None, None) => ProblemInstance::plain(self.u.clone(), self.q.clone()),
        }
    }
}

/// One transition inside a serialized breakpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TransitionRecord {
    j: usize,
    direction: String,
}

/// One serialized breakpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BreakpointRecord {
    nu: f64,
    mu: f64,
    transitions: Vec<TransitionRecord>,
}

/// On-disk path document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathFile {
    breakpoints: Vec<BreakpointRecord>,
    #[serde(with = "extended_real")]
    nu_inf: f64,
    #[serde(with = "extended_real")]
    mu_inf: f64,
    kappa: usize,
    objective: String,
}

/// Serializes possibly-infinite reals: finite values as JSON numbers,
/// infinities as the strings "inf"/"-inf".
mod extended_real {
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            ser.serialize_f64(*x)
        } else if *x > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Raw::deserialize(de)? {
            Raw::Number(x) => Ok(x),
            Raw::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(D::Error::custom("expected a number, \"inf\", or \"-inf\"")),
            },
        }
    }
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::ToPlus => "to_plus",
        Direction::ToMinus => "to_minus",
        Direction::ToZeroFromPlus => "to_zero_from_plus",
        Direction::ToZeroFromMinus => "to_zero_from_minus",
    }
}

fn direction_from_name(name: &str) -> Result<Direction> {
    match name {
        "to_plus" => Ok(Direction::ToPlus),
        "to_minus" => Ok(Direction::ToMinus),
        "to_zero_from_plus" => Ok(Direction::ToZeroFromPlus),
        "to_zero_from_minus" => Ok(Direction::ToZeroFromMinus),
        _ => Err(Error::InvalidPath("unknown transition direction")),
    }
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::Entropy => "entropy",
        Objective::Squared => "squared",
    }
}

pub fn objective_from_name(name: &str) -> Result<Objective> {
    match name {
        "entropy" => Ok(Objective::Entropy),
        "squared" => Ok(Objective::Squared),
        _ => Err(Error::InvalidPath("unknown objective")),
    }
}

impl PathFile {
    pub fn from_path(path: &RelaxationPath) -> Self {
        let breakpoints = path
            .breakpoints()
            .iter()
            .map(|bp| BreakpointRecord {
                nu: bp.nu,
                mu: bp.mu,
                transitions: bp
                    .transitions
                    .iter()
                    .map(|t| TransitionRecord {
                        j: t.coord,
                        direction: direction_name(t.direction).to_string(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            breakpoints,
            nu_inf: path.nu_inf(),
            mu_inf: path.mu_inf(),
            kappa: path.kappa(),
            objective: objective_name(path.objective()).to_string(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|_| Error::InvalidPath("malformed path file"))
    }

    pub fn objective(&self) -> Result<Objective> {
        objective_from_name(&self.objective)
    }

    /// Rebuilds the full path by replaying the stored transitions against
    /// the instance, then cross-checks the stored summary fields.
    pub fn to_path(&self, inst: &ProblemInstance) -> Result<RelaxationPath> {
        let objective = self.objective()?;
        if self.kappa != self.breakpoints.len() {
            return Err(Error::InvalidPath("kappa disagrees with breakpoint count"));
        }
        let breakpoints: Vec<Breakpoint> = self
            .breakpoints
            .iter()
            .map(|bp| {
                Ok(Breakpoint {
                    nu: bp.nu,
                    mu: bp.mu,
                    transitions: bp
                        .transitions
                        .iter()
                        .map(|t| {
                            Ok(Transition {
                                coord: t.j,
                                direction: direction_from_name(&t.direction)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let path = RelaxationPath::from_breakpoints(inst, objective, breakpoints)?;
        let same_ext = |a: f64, b: f64| a == b || (a.is_infinite() && b.is_infinite() && a.signum() == b.signum());
        if !same_ext(path.nu_inf(), self.nu_inf) || !same_ext(path.mu_inf(), self.mu_inf) {
            return Err(Error::InvalidPath("terminal summary disagrees with replay"));
        }
        Ok(path)
    }

    /// Serializes with 17-significant-digit floats (exact double round-trip)
    /// and two-space indentation.
    pub fn to_json(&self) -> String {
        to_json_17(self)
    }
}

/// JSON writer emitting every finite float with 17 significant digits.
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let fmt = SigDigitFormatter {
        inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

struct SigDigitFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for SigDigitFormatter<'_> {
    fn write_f64<W: std::io::Write + ?Sized>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value)
    }

    // Everything below simply forwards to the pretty formatter so the
    // layout (indentation, separators) is unchanged.
    fn begin_array<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.inner, w)
    }
    fn end_array<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.inner, w)
    }
    fn begin_array_value<W: std::io::Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.inner, w, first)
    }
    fn end_array_value<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.inner, w)
    }
    fn begin_object<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.inner, w)
    }
    fn end_object<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.inner, w)
    }
    fn begin_object_key<W: std::io::Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.inner, w, first)
    }
    fn end_object_key<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_key(&mut self.inner, w)
    }
    fn begin_object_value<W: std::io::Write + ?Sized>(
        &mut self,
        w: &mut W,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.inner, w)
    }
    fn end_object_value<W: std::io::Write + ?Sized>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.inner, w)
    }
}
