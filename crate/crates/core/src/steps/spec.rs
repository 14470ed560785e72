use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Result, StepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    DataStep,
    ModelStep,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Token(String),
}

impl ParamValue {
    /// Canonical text: integers in decimal, reals with 17 significant digits,
    /// tokens verbatim.
    pub fn canonical(&self) -> String {
        match self {
            ParamValue::Int(v) => v.to_string(),
            ParamValue::Real(v) => format!("{v:.16e}"),
            ParamValue::Token(t) => t.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            ParamValue::Int(v) => (*v).into(),
            ParamValue::Real(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into),
            ParamValue::Token(t) => t.clone().into(),
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Token(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamDomain {
    Tokens(&'static [&'static str]),
    /// Inclusive integer range; `max: None` means bounded only by the data
    /// (e.g. `select.k` against the current feature count).
    Int { min: i64, max: Option<i64> },
    Real { min: f64, min_inclusive: bool, max: f64, max_inclusive: bool },
}

impl ParamDomain {
    fn admit(&self, v: &ParamValue) -> Option<ParamValue> {
        match (self, v) {
            (ParamDomain::Tokens(allowed), ParamValue::Token(t)) => {
                allowed.contains(&t.as_str()).then(|| v.clone())
            }
            (ParamDomain::Int { min, max }, ParamValue::Int(i)) => {
                (*i >= *min && max.map_or(true, |m| *i <= m)).then(|| v.clone())
            }
            (ParamDomain::Int { .. }, ParamValue::Real(r)) if r.fract() == 0.0 && r.abs() < 9.0e15 => {
                self.admit(&ParamValue::Int(*r as i64))
            }
            (ParamDomain::Real { .. }, ParamValue::Int(i)) => self.admit(&ParamValue::Real(*i as f64)),
            (ParamDomain::Real { min, min_inclusive, max, max_inclusive }, ParamValue::Real(r)) => {
                let lo = if *min_inclusive { *r >= *min } else { *r > *min };
                let hi = if *max_inclusive { *r <= *max } else { *r < *max };
                // + 0.0 folds -0.0 into 0.0 so equal values share one canonical form
                (r.is_finite() && lo && hi).then(|| ParamValue::Real(r + 0.0))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDecl {
    pub name: &'static str,
    pub domain: ParamDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: StepKind,
    pub params: &'static [ParamDecl],
}

const fn decl(name: &'static str, domain: ParamDomain) -> ParamDecl {
    ParamDecl { name, domain }
}

const fn ints(min: i64, max: i64) -> ParamDomain {
    ParamDomain::Int { min, max: Some(max) }
}

static CATALOG: [CatalogEntry; 8] = [
    CatalogEntry {
        name: "impute",
        kind: StepKind::DataStep,
        params: &[decl("strategy", ParamDomain::Tokens(&["mean", "median", "mode", "constant_zero"]))],
    },
    CatalogEntry {
        name: "scale",
        kind: StepKind::DataStep,
        params: &[decl("kind", ParamDomain::Tokens(&["standard", "minmax", "none"]))],
    },
    CatalogEntry {
        name: "encode",
        kind: StepKind::DataStep,
        params: &[decl("kind", ParamDomain::Tokens(&["onehot", "ordinal"]))],
    },
    CatalogEntry {
        name: "select",
        kind: StepKind::DataStep,
        params: &[
            decl("method", ParamDomain::Tokens(&["variance", "anova_f"])),
            decl("k", ParamDomain::Int { min: 1, max: None }),
        ],
    },
    CatalogEntry {
        name: "dtree",
        kind: StepKind::ModelStep,
        params: &[decl("max_depth", ints(1, 32)), decl("min_leaf", ints(1, 64))],
    },
    CatalogEntry {
        name: "rforest",
        kind: StepKind::ModelStep,
        params: &[decl("n_trees", ints(1, 64)), decl("max_depth", ints(1, 32))],
    },
    CatalogEntry {
        name: "logreg",
        kind: StepKind::ModelStep,
        params: &[
            decl("lr", ParamDomain::Real { min: 0.0, min_inclusive: false, max: 1.0, max_inclusive: true }),
            decl("epochs", ints(1, 2000)),
            decl("l2", ParamDomain::Real { min: 0.0, min_inclusive: true, max: 1.0, max_inclusive: true }),
        ],
    },
    CatalogEntry { name: "knn", kind: StepKind::ModelStep, params: &[decl("k", ints(1, 64))] },
];

/// The fixed set of steps a search space may draw from.
pub fn catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

pub fn catalog_entry(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputeStrategy {
    Mean,
    Median,
    Mode,
    ConstantZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    Standard,
    MinMax,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeKind {
    OneHot,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMethod {
    Variance,
    AnovaF,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataOp {
    Impute(ImputeStrategy),
    Scale(ScaleKind),
    Encode(EncodeKind),
    Select { method: SelectMethod, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelOp {
    DecisionTree { max_depth: usize, min_leaf: usize },
    RandomForest { n_trees: usize, max_depth: usize },
    LogisticRegression { lr: f64, epochs: usize, l2: f64 },
    Knn { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOp {
    Data(DataOp),
    Model(ModelOp),
}

/// A catalog step with a full, validated parameter assignment. Parameters are
/// stored in the catalog's declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec {
    kind: StepKind,
    name: String,
    params: Vec<(String, ParamValue)>,
}

impl StepSpec {
    pub fn new<K, I>(name: &str, params: I) -> Result<Self>
    where
        K: AsRef<str>,
        I: IntoIterator<Item = (K, ParamValue)>,
    {
        let entry = catalog_entry(name).ok_or_else(|| StepError::UnknownStep(name.to_string()))?;
        let mut supplied: Vec<(String, ParamValue)> =
            params.into_iter().map(|(k, v)| (k.as_ref().to_string(), v)).collect();
        let mut ordered = Vec::with_capacity(entry.params.len());
        for d in entry.params {
            let pos = supplied.iter().position(|(k, _)| k == d.name).ok_or_else(|| StepError::MissingParam {
                step: name.to_string(),
                param: d.name.to_string(),
            })?;
            let (_, raw) = supplied.swap_remove(pos);
            let value = d.domain.admit(&raw).ok_or_else(|| StepError::ParamOutOfRange {
                step: name.to_string(),
                param: d.name.to_string(),
                value: raw.canonical(),
            })?;
            ordered.push((d.name.to_string(), value));
        }
        if let Some((k, _)) = supplied.into_iter().next() {
            return Err(StepError::UnknownParam { step: name.to_string(), param: k });
        }
        Ok(StepSpec { kind: entry.kind, name: name.to_string(), params: ordered })
    }

    pub fn kind(&self) -> StepKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, ParamValue)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<&ParamValue> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn is_data(&self) -> bool {
        self.kind == StepKind::DataStep
    }

    /// `name{p1=v1,p2=v2}` with parameters in declared order.
    pub fn canonical(&self) -> String {
        let body: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", v.canonical())).collect();
        format!("{}{{{}}}", self.name, body.join(","))
    }

    fn int(&self, name: &str) -> usize {
        match self.param(name) {
            Some(ParamValue::Int(v)) => *v as usize,
            other => unreachable!("validated int param {name}: {other:?}"),
        }
    }

    fn real(&self, name: &str) -> f64 {
        match self.param(name) {
            Some(ParamValue::Real(v)) => *v,
            other => unreachable!("validated real param {name}: {other:?}"),
        }
    }

    fn token(&self, name: &str) -> &str {
        match self.param(name) {
            Some(ParamValue::Token(t)) => t,
            other => unreachable!("validated token param {name}: {other:?}"),
        }
    }

    /// Typed view of the step.
    pub fn op(&self) -> StepOp {
        match self.name.as_str() {
            "impute" => StepOp::Data(DataOp::Impute(match self.token("strategy") {
                "mean" => ImputeStrategy::Mean,
                "median" => ImputeStrategy::Median,
                "mode" => ImputeStrategy::Mode,
                _ => ImputeStrategy::ConstantZero,
            })),
            "scale" => StepOp::Data(DataOp::Scale(match self.token("kind") {
                "standard" => ScaleKind::Standard,
                "minmax" => ScaleKind::MinMax,
                _ => ScaleKind::None,
            })),
            "encode" => StepOp::Data(DataOp::Encode(match self.token("kind") {
                "onehot" => EncodeKind::OneHot,
                _ => EncodeKind::Ordinal,
            })),
            "select" => StepOp::Data(DataOp::Select {
                method: if self.token("method") == "variance" { SelectMethod::Variance } else { SelectMethod::AnovaF },
                k: self.int("k"),
            }),
            "dtree" => StepOp::Model(ModelOp::DecisionTree {
                max_depth: self.int("max_depth"),
                min_leaf: self.int("min_leaf"),
            }),
            "rforest" => StepOp::Model(ModelOp::RandomForest {
                n_trees: self.int("n_trees"),
                max_depth: self.int("max_depth"),
            }),
            "logreg" => StepOp::Model(ModelOp::LogisticRegression {
                lr: self.real("lr"),
                epochs: self.int("epochs"),
                l2: self.real("l2"),
            }),
            "knn" => StepOp::Model(ModelOp::Knn { k: self.int("k") }),
            other => unreachable!("catalog name {other}"),
        }
    }
}

impl fmt::Display for StepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Parses the canonical form, e.g. `select{method=anova_f,k=3}`. Parameter
/// order in the input does not matter.
impl FromStr for StepSpec {
    type Err = StepError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || StepError::Parse(s.to_string());
        let s = s.trim();
        let open = s.find('{').ok_or_else(bad)?;
        let body = s[open + 1..].strip_suffix('}').ok_or_else(bad)?;
        let name = &s[..open];
        let entry = catalog_entry(name).ok_or_else(|| StepError::UnknownStep(name.to_string()))?;
        let mut params = Vec::new();
        for part in body.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let domain = entry.params.iter().find(|d| d.name == k).map(|d| d.domain);
            let value = match domain {
                Some(ParamDomain::Tokens(_)) | None => ParamValue::Token(v.to_string()),
                Some(ParamDomain::Int { .. }) => ParamValue::Int(v.parse().map_err(|_| bad())?),
                Some(ParamDomain::Real { .. }) => ParamValue::Real(v.parse().map_err(|_| bad())?),
            };
            params.push((k.to_string(), value));
        }
        StepSpec::new(name, params)
    }
}

impl Serialize for StepSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Params<'a>(&'a [(String, ParamValue)]);
        impl Serialize for Params<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(k, &v.to_json())?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("name", &self.name)?;
        map.serialize_entry("params", &Params(&self.params))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for StepSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            name: String,
            #[serde(default)]
            params: serde_json::Map<String, serde_json::Value>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut params = Vec::with_capacity(raw.params.len());
        for (k, v) in raw.params {
            let value = match v {
                serde_json::Value::String(s) => ParamValue::Token(s),
                serde_json::Value::Number(n) => match n.as_i64() {
                    Some(i) => ParamValue::Int(i),
                    None => ParamValue::Real(n.as_f64().ok_or_else(|| D::Error::custom("bad number"))?),
                },
                other => return Err(D::Error::custom(format!("parameter {k}: unsupported value {other}"))),
            };
            params.push((k, value));
        }
        StepSpec::new(&raw.name, params).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_kinds() {
        let impute = catalog_entry("impute").unwrap();
        assert_eq!(impute.kind, StepKind::DataStep);
        assert_eq!(catalog_entry("dtree").unwrap().kind, StepKind::ModelStep);
        let names: Vec<_> = catalog().iter().map(|e| e.name).collect();
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
        assert_eq!(catalog().iter().filter(|e| e.kind == StepKind::DataStep).count(), 4);
        assert_eq!(catalog().iter().filter(|e| e.kind == StepKind::ModelStep).count(), 4);
    }

    #[test]
    fn params_are_reordered_and_validated() {
        let s = StepSpec::new("dtree", [("min_leaf", 1i64.into()), ("max_depth", 4i64.into())]).unwrap();
        assert_eq!(s.canonical(), "dtree{max_depth=4,min_leaf=1}");
        assert!(matches!(
            StepSpec::new("dtree", [("max_depth", ParamValue::Int(33)), ("min_leaf", 1i64.into())]),
            Err(StepError::ParamOutOfRange { .. })
        ));
        assert!(matches!(StepSpec::new("dtree", [("max_depth", 3i64.into())]), Err(StepError::MissingParam { .. })));
        assert!(matches!(
            StepSpec::new("knn", [("k", 3i64.into()), ("p", 2i64.into())]),
            Err(StepError::UnknownParam { .. })
        ));
        assert!(matches!(StepSpec::new("boost", Vec::<(&str, ParamValue)>::new()), Err(StepError::UnknownStep(_))));
        assert!(matches!(
            StepSpec::new("scale", [("kind", ParamValue::from("robust"))]),
            Err(StepError::ParamOutOfRange { .. })
        ));
    }

    #[test]
    fn real_ranges_respect_open_bounds() {
        let mk = |lr: f64| {
            StepSpec::new("logreg", [("lr", lr.into()), ("epochs", 10i64.into()), ("l2", 0.0.into())])
        };
        assert!(mk(0.0).is_err());
        assert!(mk(1.0).is_ok());
        assert!(mk(1.5).is_err());
        // integer literal accepted for a real parameter
        let s = StepSpec::new("logreg", [("lr", 1i64.into()), ("epochs", 10i64.into()), ("l2", 0i64.into())]).unwrap();
        assert_eq!(s.param("lr"), Some(&ParamValue::Real(1.0)));
    }

    #[test]
    fn json_round_trip() {
        let s: StepSpec = serde_json::from_str(r#"{"name":"logreg","params":{"l2":0.01,"lr":0.1,"epochs":100}}"#).unwrap();
        assert_eq!(s.op(), StepOp::Model(ModelOp::LogisticRegression { lr: 0.1, epochs: 100, l2: 0.01 }));
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"name":"logreg","params":{"lr":0.1,"epochs":100,"l2":0.01}}"#);
        let back: StepSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<StepSpec>(r#"{"name":"knn","params":{"k":0}}"#).is_err());
    }

    #[test]
    fn parse_canonical() {
        let s: StepSpec = "select{k=3,method=anova_f}".parse().unwrap();
        assert_eq!(s.canonical(), "select{method=anova_f,k=3}");
        assert_eq!(s.op(), StepOp::Data(DataOp::Select { method: SelectMethod::AnovaF, k: 3 }));
        assert!("select(method=variance)".parse::<StepSpec>().is_err());
    }

    fn any_step() -> impl Strategy<Value = StepSpec> {
        prop_oneof![
            prop::sample::select(vec!["mean", "median", "mode", "constant_zero"])
                .prop_map(|t| StepSpec::new("impute", [("strategy", t.into())]).unwrap()),
            (prop::sample::select(vec!["variance", "anova_f"]), 1i64..50)
                .prop_map(|(m, k)| StepSpec::new("select", [("method", m.into()), ("k", k.into())]).unwrap()),
            (1e-6f64..=1.0, 1i64..=2000, 0.0f64..=1.0).prop_map(|(lr, e, l2)| {
                StepSpec::new("logreg", [("lr", lr.into()), ("epochs", e.into()), ("l2", l2.into())]).unwrap()
            }),
            (1i64..=32, 1i64..=64).prop_map(|(d, m)| {
                StepSpec::new("dtree", [("max_depth", d.into()), ("min_leaf", m.into())]).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn canonical_form_parses_back(s in any_step()) {
            let parsed: StepSpec = s.canonical().parse().unwrap();
            prop_assert_eq!(parsed, s);
        }

        #[test]
        fn canonical_form_is_injective(a in any_step(), b in any_step()) {
            prop_assert_eq!(a == b, a.canonical() == b.canonical());
        }
    }
}
