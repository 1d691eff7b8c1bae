//! Versioned, self-describing JSON documents for persisting sketches.
//!
//! Reals are written in shortest round-trip decimal form and parsed back
//! exactly, so a document reproduces every field of the sketch bit for bit.
//! Every real and every count is right-aligned in a fixed-width field, so the
//! size of a document depends only on the sketch configuration and never on
//! how many observations it has absorbed. Bivariate coefficient matrices are
//! stored row-major.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

use crate::bivariate::{BivariateParts, BivariateSketch};
use crate::error::{Error, Result};
use crate::moments::{MomentMode, RunningMoments};
use crate::univariate::UnivariateSketch;

pub const FORMAT_VERSION: u32 = 1;

/// Either kind of sketch.
#[derive(Debug, Clone, PartialEq)]
pub enum Sketch {
    Univariate(UnivariateSketch),
    Bivariate(BivariateSketch),
}

impl Sketch {
    pub fn est_type(&self) -> EstType {
        match self {
            Sketch::Univariate(_) => EstType::Univariate,
            Sketch::Bivariate(_) => EstType::Bivariate,
        }
    }

    pub fn order_n(&self) -> usize {
        match self {
            Sketch::Univariate(s) => s.order_n(),
            Sketch::Bivariate(s) => s.order_n(),
        }
    }

    pub fn obs_count(&self) -> u64 {
        match self {
            Sketch::Univariate(s) => s.obs_count(),
            Sketch::Bivariate(s) => s.obs_count(),
        }
    }
}

impl From<UnivariateSketch> for Sketch {
    fn from(s: UnivariateSketch) -> Self {
        Sketch::Univariate(s)
    }
}

impl From<BivariateSketch> for Sketch {
    fn from(s: BivariateSketch) -> Self {
        Sketch::Bivariate(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstType {
    Univariate,
    Bivariate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsRecord {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub ew_mean: f64,
    pub ew_var: f64,
}

impl From<&RunningMoments> for MomentsRecord {
    fn from(m: &RunningMoments) -> Self {
        let (mean, m2) = m.cumulative_parts();
        let (ew_mean, ew_var) = m.exponential_parts();
        Self {
            count: m.count(),
            mean,
            m2,
            ew_mean,
            ew_var,
        }
    }
}

impl MomentsRecord {
    fn restore(&self, lambda: Option<f64>) -> Result<RunningMoments> {
        let mode = lambda.map_or(MomentMode::Cumulative, MomentMode::Exponential);
        RunningMoments::from_parts(mode, self.count, self.mean, self.m2, self.ew_mean, self.ew_var)
    }
}

/// On-disk layout. Field order is the section order of the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchFile {
    pub format_version: u32,
    pub est_type: EstType,
    pub order_n: usize,
    pub standardize: bool,
    pub lambda: Option<f64>,
    pub obs_count: u64,
    pub moments: Vec<MomentsRecord>,
    pub coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginal_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginal_y: Option<Vec<f64>>,
}

const SECTIONS: [&str; 10] = [
    "format_version",
    "est_type",
    "order_n",
    "standardize",
    "lambda",
    "obs_count",
    "moments",
    "coefficients",
    "marginal_x",
    "marginal_y",
];

impl From<&Sketch> for SketchFile {
    fn from(sketch: &Sketch) -> Self {
        match sketch {
            Sketch::Univariate(s) => SketchFile {
                format_version: FORMAT_VERSION,
                est_type: EstType::Univariate,
                order_n: s.order_n(),
                standardize: s.standardize(),
                lambda: s.lambda(),
                obs_count: s.obs_count(),
                moments: vec![s.moments().into()],
                coefficients: s.coeffs().to_vec(),
                marginal_x: None,
                marginal_y: None,
            },
            Sketch::Bivariate(s) => SketchFile {
                format_version: FORMAT_VERSION,
                est_type: EstType::Bivariate,
                order_n: s.order_n(),
                standardize: s.standardize(),
                lambda: s.lambda(),
                obs_count: s.obs_count(),
                moments: vec![s.moments_x().into(), s.moments_y().into()],
                coefficients: s.coeff_matrix().to_vec(),
                marginal_x: Some(s.marginal_x().to_vec()),
                marginal_y: Some(s.marginal_y().to_vec()),
            },
        }
    }
}

impl TryFrom<SketchFile> for Sketch {
    type Error = Error;

    fn try_from(file: SketchFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(version_error(file.format_version as u64));
        }
        let dim = file.order_n + 1;
        let bad = |msg: String| Error::Format(msg);
        match file.est_type {
            EstType::Univariate => {
                if file.moments.len() != 1 {
                    return Err(bad(format!(
                        "univariate sketch needs 1 moments record, found {}",
                        file.moments.len()
                    )));
                }
                if file.coefficients.len() != dim {
                    return Err(bad(format!(
                        "section `coefficients` holds {} values, order {} needs {dim}",
                        file.coefficients.len(),
                        file.order_n
                    )));
                }
                if file.marginal_x.is_some() || file.marginal_y.is_some() {
                    return Err(bad("univariate sketch must not carry marginal sections".into()));
                }
                let moments = file.moments[0].restore(file.lambda)?;
                UnivariateSketch::from_parts(
                    file.order_n,
                    file.standardize,
                    file.lambda,
                    file.coefficients,
                    moments,
                    file.obs_count,
                )
                .map(Sketch::Univariate)
                .map_err(payload_error)
            }
            EstType::Bivariate => {
                if file.moments.len() != 2 {
                    return Err(bad(format!(
                        "bivariate sketch needs 2 moments records, found {}",
                        file.moments.len()
                    )));
                }
                if file.coefficients.len() != dim * dim {
                    return Err(bad(format!(
                        "section `coefficients` holds {} values, order {} needs {}",
                        file.coefficients.len(),
                        file.order_n,
                        dim * dim
                    )));
                }
                let marginal_x = file
                    .marginal_x
                    .ok_or_else(|| bad("missing section `marginal_x`".into()))?;
                let marginal_y = file
                    .marginal_y
                    .ok_or_else(|| bad("missing section `marginal_y`".into()))?;
                for (name, v) in [("marginal_x", &marginal_x), ("marginal_y", &marginal_y)] {
                    if v.len() != dim {
                        return Err(bad(format!(
                            "section `{name}` holds {} values, expected {dim}",
                            v.len()
                        )));
                    }
                }
                BivariateSketch::from_parts(BivariateParts {
                    order_n: file.order_n,
                    standardize: file.standardize,
                    lambda: file.lambda,
                    coeff_matrix: file.coefficients,
                    marginal_x,
                    marginal_y,
                    moments_x: file.moments[0].restore(file.lambda)?,
                    moments_y: file.moments[1].restore(file.lambda)?,
                    obs_count: file.obs_count,
                })
                .map(Sketch::Bivariate)
                .map_err(payload_error)
            }
        }
    }
}

fn version_error(found: u64) -> Error {
    Error::Format(format!(
        "unsupported format version {found} (expected {FORMAT_VERSION})"
    ))
}

fn payload_error(e: Error) -> Error {
    match e {
        Error::Format(_) => e,
        other => Error::Format(format!("invalid payload: {other}")),
    }
}

/// Widest shortest-form rendering of an `f64`, e.g. `-1.2345678901234567e-308`.
const REAL_WIDTH: usize = 24;
/// Digits in `u64::MAX`.
const COUNT_WIDTH: usize = 20;

/// Pretty printing with numbers padded by leading spaces to a fixed width.
struct FixedWidth(PrettyFormatter<'static>);

impl FixedWidth {
    fn padded<W: ?Sized + io::Write>(writer: &mut W, width: usize, text: &[u8]) -> io::Result<()> {
        for _ in text.len()..width {
            writer.write_all(b" ")?;
        }
        writer.write_all(text)
    }
}

impl Formatter for FixedWidth {
    fn write_u64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: u64) -> io::Result<()> {
        Self::padded(writer, COUNT_WIDTH, value.to_string().as_bytes())
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        let mut text = Vec::with_capacity(REAL_WIDTH);
        CompactFormatter.write_f64(&mut text, value)?;
        Self::padded(writer, REAL_WIDTH, &text)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes a sketch to a pretty-printed JSON document.
pub fn serialize(sketch: &Sketch) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedWidth(PrettyFormatter::new()));
    SketchFile::from(sketch)
        .serialize(&mut ser)
        .expect("sketch files always serialize");
    out.push(b'\n');
    out
}

/// Parses a sketch document, checking the version before the payload.
pub fn deserialize(bytes: &[u8]) -> Result<Sketch> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| {
        if e.is_eof() {
            truncation_error(&String::from_utf8_lossy(bytes))
        } else {
            Error::Format(format!("malformed document: {e}"))
        }
    })?;
    match value.get("format_version") {
        None => return Err(Error::Format("missing section `format_version`".into())),
        Some(v) => match v.as_u64() {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(version_error(v)),
            None => return Err(Error::Format("section `format_version` is not an integer".into())),
        },
    }
    let file: SketchFile =
        serde_json::from_value(value).map_err(|e| Error::Format(format!("invalid document: {e}")))?;
    Sketch::try_from(file)
}

fn truncation_error(text: &str) -> Error {
    let bivariate = text.contains("\"bivariate\"");
    let expected = if bivariate { &SECTIONS[..] } else { &SECTIONS[..8] };
    let key = |name: &str| format!("\"{name}\":");
    if let Some(missing) = expected.iter().find(|name| !text.contains(&key(name))) {
        return Error::Format(format!("truncated document: missing section `{missing}`"));
    }
    let last = expected
        .iter()
        .max_by_key(|name| text.find(&key(name)))
        .expect("section list is non-empty");
    Error::Format(format!("truncated document: section `{last}` is incomplete"))
}
