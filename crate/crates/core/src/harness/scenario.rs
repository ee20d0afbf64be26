use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::funcrep::PwlFunction;
use crate::minimax::{BifunctionFamily, DualMode, FunctionSequence};
use crate::status::Status;
use crate::subdiff::LambdaSampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Conjugacy,
    Subdiff,
    Mm1,
    Mmb,
    Localized,
    SimplexDuality,
    InteriorEquality,
    Monotone,
    Envelope,
    Marginal,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Conjugacy,
        Kind::Subdiff,
        Kind::Mm1,
        Kind::Mmb,
        Kind::Localized,
        Kind::SimplexDuality,
        Kind::InteriorEquality,
        Kind::Monotone,
        Kind::Envelope,
        Kind::Marginal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Conjugacy => "conjugacy",
            Kind::Subdiff => "subdiff",
            Kind::Mm1 => "mm1",
            Kind::Mmb => "mmb",
            Kind::Localized => "localized",
            Kind::SimplexDuality => "simplex_duality",
            Kind::InteriorEquality => "interior_equality",
            Kind::Monotone => "monotone",
            Kind::Envelope => "envelope",
            Kind::Marginal => "marginal",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        Kind::parse(s)
    }
}

/// Per-scenario overrides of the default tolerances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
}

impl Tolerances {
    pub const EXACT: f64 = 1e-9;
    pub const GRID: f64 = 1e-6;
    pub const ENVELOPE: f64 = 1e-6;

    fn is_default(&self) -> bool {
        *self == Tolerances::default()
    }

    /// Resolved values; `exact_override` stands in for a missing `exact`.
    pub fn resolve(&self, exact_override: Option<f64>) -> Resolved {
        Resolved {
            exact: self.exact.or(exact_override).unwrap_or(Self::EXACT),
            grid: self.grid.unwrap_or(Self::GRID),
            envelope: self.envelope.unwrap_or(Self::ENVELOPE),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    pub exact: f64,
    pub grid: f64,
    pub envelope: f64,
}

/// Deliberate defects used to test the harness itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Shift the computed right-hand side by one before the final check.
    Skew,
    /// Panic inside the verifier.
    Panic,
}

/// Values a golden scenario must reproduce.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<ExtReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<ExtReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Tolerances::is_default")]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjIdentity {
    /// `f** = cl co f`, and `f** = f` on Γ₀ inputs.
    Moreau,
    /// `f* = (co f)* = (cl co f)*`.
    HullInvariance,
    /// `inf f` is unchanged by the hull operations.
    InfimumInvariance,
    ConjOfInf,
    ConjOfSup,
    /// Exact conjugate against the brute-force grid transform.
    Oracle,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacyPayload {
    pub identity: ConjIdentity,
    pub functions: Vec<PwlFunction>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdiffPayload {
    pub functions: Vec<PwlFunction>,
    pub x: f64,
    pub eps: f64,
    #[serde(default)]
    pub sampler: LambdaSampler,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityPayload {
    pub generators: Vec<PwlFunction>,
    #[serde(default)]
    pub mode: DualMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopePayload {
    pub function: PwlFunction,
    pub x0: f64,
    /// Increasing radii; a geometric ladder up to `10⁶·(1 + slope bound)`
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalPayload {
    pub family: BifunctionFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_axis: Option<Vec<f64>>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    41
}

/// A validated, typed payload.
#[derive(Clone, Debug)]
pub enum Payload {
    Conjugacy(ConjugacyPayload),
    Subdiff(SubdiffPayload),
    Family(BifunctionFamily),
    Duality(DualityPayload),
    Monotone(FunctionSequence),
    Envelope(EnvelopePayload),
    Marginal(MarginalPayload),
}

fn typed<T: DeserializeOwned>(v: &Value, base: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let pointer = format!("{base}{}", path_to_pointer(&e.path().to_string()));
        Error::schema(pointer, e.into_inner().to_string())
    })
}

/// `a.b[2].c` → `/a/b/2/c`.
fn path_to_pointer(path: &str) -> String {
    if path == "." {
        return String::new();
    }
    let mut out = String::new();
    for part in path.split('.') {
        let mut rest = part;
        while let Some(open) = rest.find('[') {
            if open > 0 {
                out.push('/');
                out.push_str(&rest[..open]);
            }
            let close = rest[open..].find(']').map_or(rest.len(), |c| open + c);
            out.push('/');
            out.push_str(&rest[open + 1..close]);
            rest = &rest[(close + 1).min(rest.len())..];
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(rest);
        }
    }
    out
}

fn family_checked(fam: BifunctionFamily, base: &str) -> Result<BifunctionFamily> {
    BifunctionFamily::new(fam.generators, fam.y_restriction)
        .map_err(|e| Error::schema(format!("{base}/generators"), e.to_string()))
}

fn nonempty(funcs: &[PwlFunction], pointer: String) -> Result<()> {
    if funcs.is_empty() {
        Err(Error::schema(pointer, "at least one function is required"))
    } else {
        Ok(())
    }
}

impl Scenario {
    /// Validates the payload against the schema of its kind. `base` is the
    /// JSON pointer of the scenario inside its file.
    pub fn payload_at(&self, base: &str) -> Result<Payload> {
        let at = format!("{base}/payload");
        let p = &self.payload;
        Ok(match self.kind {
            Kind::Conjugacy => {
                let c: ConjugacyPayload = typed(p, &at)?;
                nonempty(&c.functions, format!("{at}/functions"))?;
                Payload::Conjugacy(c)
            }
            Kind::Subdiff => {
                let s: SubdiffPayload = typed(p, &at)?;
                nonempty(&s.functions, format!("{at}/functions"))?;
                if !(s.eps >= 0.0 && s.eps.is_finite()) {
                    return Err(Error::schema(format!("{at}/eps"), "eps must be a nonnegative real"));
                }
                Payload::Subdiff(s)
            }
            Kind::Mm1 | Kind::Mmb | Kind::InteriorEquality | Kind::Localized => {
                let fam = family_checked(typed(p, &at)?, &at)?;
                if self.kind == Kind::Localized && fam.y_restriction.is_none() {
                    return Err(Error::schema(
                        format!("{at}/y_restriction"),
                        "localized scenarios need a restriction",
                    ));
                }
                Payload::Family(fam)
            }
            Kind::SimplexDuality => {
                let d: DualityPayload = typed(p, &at)?;
                nonempty(&d.generators, format!("{at}/generators"))?;
                if d.generators.len() > 16 {
                    return Err(Error::schema(
                        format!("{at}/generators"),
                        "at most 16 generators are supported",
                    ));
                }
                Payload::Duality(d)
            }
            Kind::Monotone => Payload::Monotone(typed(p, &at)?),
            Kind::Envelope => {
                let e: EnvelopePayload = typed(p, &at)?;
                if let Some(r) = &e.radii {
                    if r.is_empty() || r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                        return Err(Error::schema(format!("{at}/radii"), "radii must be positive reals"));
                    }
                }
                Payload::Envelope(e)
            }
            Kind::Marginal => {
                let mut m: MarginalPayload = typed(p, &at)?;
                m.family = family_checked(m.family, &format!("{at}/family"))?;
                if let Some(axis) = &m.dual_axis {
                    if axis.len() < 3 || axis.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(Error::schema(
                            format!("{at}/dual_axis"),
                            "need at least 3 increasing nodes",
                        ));
                    }
                }
                Payload::Marginal(m)
            }
        })
    }

    pub fn payload(&self) -> Result<Payload> {
        self.payload_at("")
    }
}

/// Parses and validates one scenario object.
pub fn parse_scenario(v: &Value, base: &str) -> Result<Scenario> {
    let Some(obj) = v.as_object() else {
        return Err(Error::schema(base, "scenario must be an object"));
    };
    match obj.get("kind") {
        Some(Value::String(k)) => {
            Kind::parse(k)?;
        }
        Some(_) => return Err(Error::schema(format!("{base}/kind"), "kind must be a string")),
        None => return Err(Error::schema(format!("{base}/kind"), "missing field `kind`")),
    }
    let s: Scenario = typed(v, base)?;
    s.payload_at(base)?;
    Ok(s)
}

/// Scenarios from JSON text: either an array or `{"scenarios": [...]}`.
pub fn parse_suite(text: &str) -> Result<Vec<Scenario>> {
    let root: Value = serde_json::from_str(text)?;
    let (items, base) = match &root {
        Value::Array(a) => (a, String::new()),
        Value::Object(o) => match o.get("scenarios") {
            Some(Value::Array(a)) => (a, "/scenarios".to_string()),
            _ => return Err(Error::schema("/scenarios", "expected an array of scenarios")),
        },
        _ => {
            return Err(Error::schema(
                "",
                "suite must be an array or an object with `scenarios`",
            ))
        }
    };
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let s = parse_scenario(item, &format!("{base}/{i}"))?;
        if !seen.insert(s.id.clone()) {
            return Err(Error::DuplicateId(s.id));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load_suite(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    parse_suite(&std::fs::read_to_string(path)?)
}

/// A single scenario file; a one-element suite is accepted too.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    if v.is_object() && v.get("scenarios").is_none() {
        return parse_scenario(&v, "");
    }
    let mut all = parse_suite(&text)?;
    if all.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected one scenario, found {}",
            all.len()
        )));
    }
    Ok(all.remove(0))
}
