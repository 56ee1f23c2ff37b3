//! Plain-text files holding one density matrix, pure state or witness.
//!
//! ```text
//! # comments start with '#'
//! kind: density
//! dims: 2,2
//! provenance: werner p=0.5
//! seed: 7
//! matrix:
//! [2.5000000000000000e-1, 0e0] [0e0, 0e0] ...
//! ```
//!
//! `kind` is `density`, `pure` or `witness`. Density matrices and witnesses
//! have a `matrix:` section with one row per line; pure states have a
//! `vector:` section with one `[re, im]` pair per line. Witnesses also carry
//! `witness_kind:`. Numbers are written with 17 significant digits, so a
//! write/read round trip reproduces every entry bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::{DensityMatrix, PureState};
use crate::witness::{WitnessKind, WitnessOperator};

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Density(DensityMatrix),
    Pure(PureState),
    Witness(WitnessOperator),
}

impl Payload {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Payload::Density(_) => "density",
            Payload::Pure(_) => "pure",
            Payload::Witness(_) => "witness",
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            Payload::Density(r) => r.dims(),
            Payload::Pure(p) => p.dims(),
            Payload::Witness(w) => w.dims(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub payload: Payload,
    pub provenance: Option<String>,
    pub seed: Option<u64>,
}

impl StateFile {
    pub fn new(payload: Payload) -> Self {
        Self {
            payload,
            provenance: None,
            seed: None,
        }
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// The state as a density matrix; pure states are promoted.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match &self.payload {
            Payload::Density(r) => Ok(r.clone()),
            Payload::Pure(p) => Ok(p.to_density()),
            Payload::Witness(_) => Err(self.kind_error("density or pure")),
        }
    }

    pub fn to_witness(&self) -> Result<WitnessOperator> {
        match &self.payload {
            Payload::Witness(w) => Ok(w.clone()),
            _ => Err(self.kind_error("witness")),
        }
    }

    fn kind_error(&self, expected: &str) -> Error {
        Error::KindMismatch {
            expected: expected.into(),
            found: self.payload.kind_name().into(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kind: {}", self.payload.kind_name());
        let dims: Vec<String> = self.payload.dims().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "dims: {}", dims.join(","));
        let provenance = match &self.payload {
            Payload::Witness(w) => {
                let _ = writeln!(out, "witness_kind: {}", w.kind());
                Some(w.provenance())
            }
            _ => self.provenance.as_deref(),
        };
        if let Some(p) = provenance.filter(|p| !p.is_empty()) {
            let _ = writeln!(out, "provenance: {}", p.replace(['\n', '\r'], " "));
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        match &self.payload {
            Payload::Density(r) => write_matrix(&mut out, r.matrix()),
            Payload::Witness(w) => write_matrix(&mut out, w.matrix()),
            Payload::Pure(p) => {
                out.push_str("vector:\n");
                for z in p.amplitudes() {
                    out.push_str(&format_pair(*z));
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text())
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
    }
}

fn write_matrix(out: &mut String, m: &ComplexMatrix) {
    out.push_str("matrix:\n");
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_pair(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// `[re, im]` with 17 significant digits per component.
pub fn format_pair(z: C64) -> String {
    format!("[{:.16e}, {:.16e}]", z.re, z.im)
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses every `[re, im]` pair on a line.
fn parse_pairs(line: &str, lineno: usize) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('[')
            .ok_or_else(|| parse_error(lineno, format!("expected '[' at {rest:?}")))?;
        let close = body
            .find(']')
            .ok_or_else(|| parse_error(lineno, "unterminated '[re, im]' pair"))?;
        let mut parts = body[..close].split(',');
        let (Some(re), Some(im), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_error(lineno, "a pair needs exactly two numbers"));
        };
        let number = |s: &str| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_error(lineno, format!("bad number {s:?}")))
        };
        out.push(C64::new(number(re)?, number(im)?));
        rest = body[close + 1..].trim_start_matches([',', ' ', '\t']);
    }
    Ok(out)
}

enum Section {
    Header,
    Matrix,
    Vector,
}

fn parse(text: &str) -> Result<StateFile> {
    let mut kind = None;
    let mut dims: Option<Vec<usize>> = None;
    let mut witness_kind = None;
    let mut provenance = None;
    let mut seed = None;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut vector: Vec<C64> = Vec::new();
    let mut section = Section::Header;
    let mut body_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            let pairs = parse_pairs(line, lineno)?;
            match section {
                Section::Matrix => rows.push(pairs),
                Section::Vector => vector.extend(pairs),
                Section::Header => return Err(parse_error(lineno, "data before a 'matrix:' or 'vector:' line")),
            }
            body_line = lineno;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(parse_error(lineno, format!("expected 'key: value', got {line:?}")));
        };
        let value = value.trim();
        match key.trim() {
            "kind" => kind = Some(value.to_string()),
            "dims" => {
                let parsed: std::result::Result<Vec<usize>, _> =
                    value.split(',').map(|d| d.trim().parse::<usize>()).collect();
                let parsed = parsed.map_err(|_| parse_error(lineno, format!("bad dims {value:?}")))?;
                if parsed.is_empty() || parsed.contains(&0) {
                    return Err(parse_error(lineno, "dims must be positive"));
                }
                dims = Some(parsed);
            }
            "witness_kind" => witness_kind = Some(value.parse::<WitnessKind>().map_err(|e| parse_error(lineno, e.to_string()))?),
            "provenance" => provenance = Some(value.to_string()),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| parse_error(lineno, format!("bad seed {value:?}")))?),
            "matrix" => section = Section::Matrix,
            "vector" => section = Section::Vector,
            other => return Err(parse_error(lineno, format!("unknown key {other:?}"))),
        }
    }

    let dims = dims.ok_or_else(|| parse_error(0, "missing 'dims:' header"))?;
    let n: usize = dims.iter().product();
    let kind = kind.unwrap_or_else(|| if vector.is_empty() { "density".into() } else { "pure".into() });
    let matrix = || -> Result<ComplexMatrix> {
        if rows.len() != n {
            return Err(parse_error(body_line, format!("expected {n} matrix rows, found {}", rows.len())));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(parse_error(
                body_line,
                format!("matrix row {} has {} entries, expected {n}", bad + 1, rows[bad].len()),
            ));
        }
        ComplexMatrix::new(n, n, rows.concat())
    };
    let payload = match kind.as_str() {
        "density" => Payload::Density(DensityMatrix::new(matrix()?, dims)?),
        "witness" => {
            let wk = witness_kind.ok_or_else(|| parse_error(0, "witness file without 'witness_kind:'"))?;
            Payload::Witness(WitnessOperator::new(matrix()?, dims, wk, provenance.clone().unwrap_or_default())?)
        }
        "pure" => {
            if vector.len() != n {
                return Err(parse_error(body_line, format!("expected {n} amplitudes, found {}", vector.len())));
            }
            Payload::Pure(PureState::new(vector, dims)?)
        }
        other => return Err(parse_error(0, format!("unknown kind {other:?}"))),
    };
    Ok(StateFile {
        payload,
        provenance,
        seed,
    })
}
