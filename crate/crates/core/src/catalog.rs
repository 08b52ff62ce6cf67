//! Operation catalogs: concept identifiers, operations with input/output
//! concept sets, and the canonical JSON-lines catalog format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod sawsdl;

/// Why a concept string was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IriError {
    #[error("empty after normalization")]
    Empty,
    #[error("not an absolute IRI (missing scheme)")]
    Relative,
}

/// Errors raised while parsing or constructing catalogs.
#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    /// First hard violation found while validating a catalog document.
    #[error("{0}")]
    Invalid(ValidationIssue),
    #[error("duplicate operation id `{0}`")]
    DuplicateOperationId(String),
    #[error("operation `{0}` has an empty output set")]
    EmptyOutputs(String),
    #[error("invalid concept IRI `{iri}`: {source}")]
    InvalidConcept { iri: String, source: IriError },
    #[error("request goals must not be empty")]
    EmptyGoals,
}

/// Normalized identifier of an ontological concept (an absolute IRI,
/// usually with a fragment). Equality is exact string equality on the
/// normalized form; no reasoning, no case folding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptId {
    iri: String,
}

impl ConceptId {
    /// Normalize (trim surrounding whitespace) and validate a concept IRI.
    pub fn new(raw: &str) -> Result<Self, IriError> {
        let iri = raw.trim();
        if iri.is_empty() {
            return Err(IriError::Empty);
        }
        if !has_scheme(iri) {
            return Err(IriError::Relative);
        }
        Ok(ConceptId {
            iri: iri.to_string(),
        })
    }

    pub fn as_str(&self) -> &str {
        &self.iri
    }

    /// Fragment part of the IRI (text after the first `#`), if any.
    pub fn fragment(&self) -> Option<&str> {
        self.iri.split_once('#').map(|(_, frag)| frag)
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.iri)
    }
}

impl TryFrom<String> for ConceptId {
    type Error = IriError;

    fn try_from(value: String) -> Result<Self, IriError> {
        ConceptId::new(&value)
    }
}

impl From<ConceptId> for String {
    fn from(value: ConceptId) -> String {
        value.iri
    }
}

/// An absolute IRI starts with a scheme: an ASCII letter followed by
/// letters, digits, `+`, `-` or `.`, terminated by `:`.
fn has_scheme(s: &str) -> bool {
    match s.split_once(':') {
        Some((scheme, _)) if !scheme.is_empty() => {
            let mut chars = scheme.chars();
            chars.next().is_some_and(|c| c.is_ascii_alphabetic())
                && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        }
        _ => false,
    }
}

/// An invocable operation: the node unit of every similarity network.
///
/// Inputs may be empty; outputs never are (an operation that produces
/// nothing can satisfy no goal and is rejected at construction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    id: String,
    service: String,
    inputs: BTreeSet<ConceptId>,
    outputs: BTreeSet<ConceptId>,
}

impl Operation {
    pub fn new(
        id: impl Into<String>,
        service: impl Into<String>,
        inputs: impl IntoIterator<Item = ConceptId>,
        outputs: impl IntoIterator<Item = ConceptId>,
    ) -> Result<Self, CatalogError> {
        let id = id.into();
        let outputs: BTreeSet<ConceptId> = outputs.into_iter().collect();
        if outputs.is_empty() {
            return Err(CatalogError::EmptyOutputs(id));
        }
        Ok(Operation {
            id,
            service: service.into(),
            inputs: inputs.into_iter().collect(),
            outputs,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn service(&self) -> &str {
        &self.service
    }

    pub fn inputs(&self) -> &BTreeSet<ConceptId> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<ConceptId> {
        &self.outputs
    }
}

/// A discovery request: the inputs the user can provide and the outputs
/// they want to obtain. Evaluated against catalogs as a virtual operation
/// with `I = inputs` and `O = goals`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    inputs: BTreeSet<ConceptId>,
    goals: BTreeSet<ConceptId>,
}

impl Request {
    pub fn new(
        inputs: impl IntoIterator<Item = ConceptId>,
        goals: impl IntoIterator<Item = ConceptId>,
    ) -> Result<Self, CatalogError> {
        let goals: BTreeSet<ConceptId> = goals.into_iter().collect();
        if goals.is_empty() {
            return Err(CatalogError::EmptyGoals);
        }
        Ok(Request {
            inputs: inputs.into_iter().collect(),
            goals,
        })
    }

    pub fn inputs(&self) -> &BTreeSet<ConceptId> {
        &self.inputs
    }

    pub fn goals(&self) -> &BTreeSet<ConceptId> {
        &self.goals
    }

    /// The request as a virtual operation, so the pairwise similarity
    /// predicates apply to it unchanged.
    pub fn as_operation(&self) -> Operation {
        Operation {
            id: "__request__".to_string(),
            service: "__request__".to_string(),
            inputs: self.inputs.clone(),
            outputs: self.goals.clone(),
        }
    }
}

/// A validated, immutable collection of operations plus optional domain
/// labels keyed by operation id.
#[derive(Debug, Clone)]
pub struct ServiceCatalog {
    operations: Vec<Operation>,
    domains: BTreeMap<String, String>,
    by_id: HashMap<String, usize>,
}

impl PartialEq for ServiceCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.operations == other.operations && self.domains == other.domains
    }
}

impl Eq for ServiceCatalog {}

impl ServiceCatalog {
    pub fn new(
        operations: Vec<Operation>,
        domains: BTreeMap<String, String>,
    ) -> Result<Self, CatalogError> {
        let mut by_id = HashMap::with_capacity(operations.len());
        for (idx, op) in operations.iter().enumerate() {
            if by_id.insert(op.id.clone(), idx).is_some() {
                return Err(CatalogError::DuplicateOperationId(op.id.clone()));
            }
        }
        Ok(ServiceCatalog {
            operations,
            domains,
            by_id,
        })
    }

    pub fn from_operations(operations: Vec<Operation>) -> Result<Self, CatalogError> {
        ServiceCatalog::new(operations, BTreeMap::new())
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn len(&self) -> usize {
        self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operations.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Operation> {
        self.by_id.get(id).map(|&idx| &self.operations[idx])
    }

    pub fn domain_of(&self, id: &str) -> Option<&str> {
        self.domains.get(id).map(String::as_str)
    }

    pub fn domains(&self) -> &BTreeMap<String, String> {
        &self.domains
    }

    /// Every concept referenced by any operation.
    pub fn concept_universe(&self) -> BTreeSet<&ConceptId> {
        self.operations
            .iter()
            .flat_map(|op| op.inputs.iter().chain(op.outputs.iter()))
            .collect()
    }

    /// A copy of the catalog without the named operations. Useful for
    /// substitution queries that must ignore unavailable operations.
    pub fn without(&self, excluded: &BTreeSet<String>) -> ServiceCatalog {
        let operations: Vec<Operation> = self
            .operations
            .iter()
            .filter(|op| !excluded.contains(op.id()))
            .cloned()
            .collect();
        let domains = self
            .domains
            .iter()
            .filter(|(id, _)| !excluded.contains(*id))
            .map(|(id, d)| (id.clone(), d.clone()))
            .collect();
        ServiceCatalog::new(operations, domains).expect("filtering preserves id uniqueness")
    }

    /// Re-check the catalog invariants. Always empty for catalogs built
    /// through the validating constructors; useful for data that crossed
    /// a serialization boundary.
    pub fn validate(&self) -> ValidationReport {
        let records: Vec<(usize, OperationRecord)> = self
            .operations
            .iter()
            .enumerate()
            .map(|(idx, op)| (idx + 1, OperationRecord::from_operation(self, op)))
            .collect();
        validate_records(&records)
    }
}

/// One line of the canonical catalog document, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationRecord {
    pub id: String,
    pub service: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

impl OperationRecord {
    fn from_operation(catalog: &ServiceCatalog, op: &Operation) -> OperationRecord {
        OperationRecord {
            id: op.id.clone(),
            service: op.service.clone(),
            inputs: op.inputs.iter().map(|c| c.as_str().to_string()).collect(),
            outputs: op.outputs.iter().map(|c| c.as_str().to_string()).collect(),
            domain: catalog.domain_of(&op.id).map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// The catalog cannot be accepted as-is.
    Violation,
    /// Accepted, but the input was adjusted (e.g. duplicate concepts
    /// collapsed into a set).
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    DuplicateOperationId,
    EmptyOutputs,
    InvalidConcept,
    DuplicateConcept,
}

/// One validation finding, locatable by line and/or operation id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub line: Option<usize>,
    pub operation: Option<String>,
    pub detail: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(op) = &self.operation {
            write!(f, "operation `{op}`: ")?;
        }
        f.write_str(&self.detail)
    }
}

/// Violations and warnings found while validating a catalog document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn violations(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Violation)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }

    /// True when no violation was found (warnings do not invalidate).
    pub fn is_valid(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// A parsed catalog plus the non-fatal warnings collected on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCatalog {
    pub catalog: ServiceCatalog,
    pub warnings: Vec<ValidationIssue>,
}

/// Check raw records against the catalog invariants: unique ids, non-empty
/// output sets, absolute concept IRIs, and set semantics on parameter lists
/// (duplicates are reported as warnings and collapsed downstream).
pub fn validate_records(records: &[(usize, OperationRecord)]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen_ids: BTreeSet<&str> = BTreeSet::new();

    for (line, record) in records {
        let line = Some(*line);
        let op = Some(record.id.clone());

        if !seen_ids.insert(record.id.as_str()) {
            report.issues.push(ValidationIssue {
                severity: Severity::Violation,
                kind: IssueKind::DuplicateOperationId,
                line,
                operation: op.clone(),
                detail: format!("duplicate operation id `{}`", record.id),
            });
        }
        if record.outputs.is_empty() {
            report.issues.push(ValidationIssue {
                severity: Severity::Violation,
                kind: IssueKind::EmptyOutputs,
                line,
                operation: op.clone(),
                detail: "empty output set".to_string(),
            });
        }

        for (side, raw_list) in [("input", &record.inputs), ("output", &record.outputs)] {
            let mut normalized: BTreeSet<ConceptId> = BTreeSet::new();
            for raw in raw_list {
                match ConceptId::new(raw) {
                    Ok(concept) => {
                        if !normalized.insert(concept) {
                            report.issues.push(ValidationIssue {
                                severity: Severity::Warning,
                                kind: IssueKind::DuplicateConcept,
                                line,
                                operation: op.clone(),
                                detail: format!("duplicate {side} concept `{}`", raw.trim()),
                            });
                        }
                    }
                    Err(err) => {
                        report.issues.push(ValidationIssue {
                            severity: Severity::Violation,
                            kind: IssueKind::InvalidConcept,
                            line,
                            operation: op.clone(),
                            detail: format!("invalid {side} concept IRI `{raw}`: {err}"),
                        });
                    }
                }
            }
        }
    }
    report
}

/// Split a canonical catalog document into its records. Blank lines and
/// lines starting with `#` are ignored; line numbers are 1-based.
pub fn scan_records(text: &str) -> Result<Vec<(usize, OperationRecord)>, CatalogError> {
    let mut records = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record: OperationRecord =
            serde_json::from_str(trimmed).map_err(|err| CatalogError::Syntax {
                line,
                message: err.to_string(),
            })?;
        records.push((line, record));
    }
    Ok(records)
}

/// Parse a canonical catalog document (UTF-8 JSON lines, one operation per
/// line). Operations appear in input order. Fails on the first invariant
/// violation; duplicate concepts inside a parameter list are collapsed and
/// reported as warnings.
pub fn parse_catalog(text: &str) -> Result<ParsedCatalog, CatalogError> {
    let records = scan_records(text)?;
    let report = validate_records(&records);
    if let Some(violation) = report.violations().next() {
        return Err(CatalogError::Invalid(violation.clone()));
    }

    let mut operations = Vec::with_capacity(records.len());
    let mut domains = BTreeMap::new();
    for (_, record) in &records {
        let inputs = record
            .inputs
            .iter()
            .map(|raw| ConceptId::new(raw).expect("validated above"));
        let outputs = record
            .outputs
            .iter()
            .map(|raw| ConceptId::new(raw).expect("validated above"));
        operations.push(Operation::new(
            record.id.clone(),
            record.service.clone(),
            inputs,
            outputs,
        )?);
        if let Some(domain) = &record.domain {
            domains.insert(record.id.clone(), domain.clone());
        }
    }

    Ok(ParsedCatalog {
        catalog: ServiceCatalog::new(operations, domains)?,
        warnings: report.warnings().cloned().collect(),
    })
}

/// Serialize a catalog back to the canonical JSON-lines form. Stable:
/// operations in catalog order, concepts in lexicographic order.
pub fn serialize_catalog(catalog: &ServiceCatalog) -> String {
    let mut out = String::new();
    for op in catalog.operations() {
        let record = OperationRecord::from_operation(catalog, op);
        out.push_str(&serde_json::to_string(&record).expect("record serialization is infallible"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concept(s: &str) -> ConceptId {
        ConceptId::new(s).unwrap()
    }

    const WEATHER_CATALOG: &str = r#"
# weather lookup operations
{"id":"1","service":"CityLookup","inputs":["http://example.org/weather#ZIP"],"outputs":["http://example.org/weather#CITY-NAME"]}
{"id":"2","service":"RegionCityLookup","inputs":["http://example.org/weather#ZIP","http://example.org/weather#GEOGRAPHICALREGION"],"outputs":["http://example.org/weather#CITY-NAME"]}
{"id":"3","service":"CityGeocoder","inputs":["http://example.org/weather#ZIP"],"outputs":["http://example.org/weather#CITY-NAME","http://example.org/weather#LONGITUDE","http://example.org/weather#LATITUDE"]}
{"id":"4","service":"ZipWeather","inputs":["http://example.org/weather#ZIP"],"outputs":["http://example.org/weather#WEATHERREPORT"]}
{"id":"5","service":"CityWeather","inputs":["http://example.org/weather#CITY-NAME"],"outputs":["http://example.org/weather#WEATHERREPORT"]}
{"id":"6","service":"CityWeatherSubscription","inputs":["http://example.org/weather#CITY-NAME"],"outputs":["http://example.org/weather#WEATHERREPORT","http://example.org/weather#WEATHERREPORTSUBSCR"]}
"#;

    #[test]
    fn parses_single_record() {
        let text = r#"{"id":"op1","service":"svcA","inputs":["http://x#ZIP"],"outputs":["http://x#CITY-NAME"]}"#;
        let parsed = parse_catalog(text).unwrap();
        assert_eq!(parsed.catalog.len(), 1);
        let op = parsed.catalog.get("op1").unwrap();
        assert_eq!(op.inputs().len(), 1);
        assert_eq!(op.outputs().len(), 1);
        assert_eq!(op.service(), "svcA");
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn parses_weather_catalog() {
        let parsed = parse_catalog(WEATHER_CATALOG).unwrap();
        assert_eq!(parsed.catalog.len(), 6);
        let ids: Vec<&str> = parsed
            .catalog
            .operations()
            .iter()
            .map(Operation::id)
            .collect();
        assert_eq!(ids, ["1", "2", "3", "4", "5", "6"]);
        let op2 = parsed.catalog.get("2").unwrap();
        assert_eq!(
            op2.inputs(),
            &BTreeSet::from([
                concept("http://example.org/weather#ZIP"),
                concept("http://example.org/weather#GEOGRAPHICALREGION"),
            ])
        );
        let op6 = parsed.catalog.get("6").unwrap();
        assert_eq!(
            op6.outputs(),
            &BTreeSet::from([
                concept("http://example.org/weather#WEATHERREPORT"),
                concept("http://example.org/weather#WEATHERREPORTSUBSCR"),
            ])
        );
    }

    #[test]
    fn rejects_empty_output_set() {
        let text = r#"{"id":"op1","service":"svc","inputs":["http://x#A"],"outputs":[]}"#;
        let err = parse_catalog(text).unwrap_err();
        match err {
            CatalogError::Invalid(issue) => {
                assert_eq!(issue.kind, IssueKind::EmptyOutputs);
                assert_eq!(issue.line, Some(1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_ids() {
        let text = concat!(
            r#"{"id":"op1","service":"a","inputs":[],"outputs":["http://x#A"]}"#,
            "\n",
            r#"{"id":"op1","service":"b","inputs":[],"outputs":["http://x#B"]}"#
        );
        let err = parse_catalog(text).unwrap_err();
        match err {
            CatalogError::Invalid(issue) => {
                assert_eq!(issue.kind, IssueKind::DuplicateOperationId);
                assert_eq!(issue.line, Some(2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_relative_iri() {
        let text = r#"{"id":"op1","service":"a","inputs":["ZIP"],"outputs":["http://x#A"]}"#;
        let err = parse_catalog(text).unwrap_err();
        match err {
            CatalogError::Invalid(issue) => assert_eq!(issue.kind, IssueKind::InvalidConcept),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reports_syntax_error_with_line_number() {
        let text = "\n# comment\n{not json}\n";
        let err = parse_catalog(text).unwrap_err();
        match err {
            CatalogError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn deduplicates_concepts_with_warning() {
        let text = r#"{"id":"op1","service":"a","inputs":["http://x#A","http://x#A"],"outputs":["http://x#B"]}"#;
        let parsed = parse_catalog(text).unwrap();
        assert_eq!(parsed.catalog.get("op1").unwrap().inputs().len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].kind, IssueKind::DuplicateConcept);
    }

    #[test]
    fn validate_on_built_catalog_is_empty() {
        let parsed = parse_catalog(WEATHER_CATALOG).unwrap();
        let report = parsed.catalog.validate();
        assert!(report.is_valid());
        assert!(report.issues.is_empty());
    }

    #[test]
    fn validate_records_flags_duplicate_id() {
        let record = OperationRecord {
            id: "op1".to_string(),
            service: "a".to_string(),
            inputs: vec![],
            outputs: vec!["http://x#A".to_string()],
            domain: None,
        };
        let records = vec![(1, record.clone()), (2, record)];
        let report = validate_records(&records);
        let violations: Vec<_> = report.violations().collect();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].kind, IssueKind::DuplicateOperationId);
    }

    #[test]
    fn round_trip_is_stable() {
        let first = parse_catalog(WEATHER_CATALOG).unwrap().catalog;
        let serialized = serialize_catalog(&first);
        let second = parse_catalog(&serialized).unwrap().catalog;
        assert_eq!(first, second);
        assert_eq!(serialized, serialize_catalog(&second));
    }

    #[test]
    fn concept_normalization_is_idempotent() {
        let first = ConceptId::new("  http://x#ZIP \t").unwrap();
        let second = ConceptId::new(first.as_str()).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.as_str(), "http://x#ZIP");
    }

    #[test]
    fn concept_equality_is_case_sensitive() {
        assert_ne!(
            concept("http://x#zip"),
            concept("http://x#ZIP"),
            "concept matching is exact, not case-folded"
        );
    }

    #[test]
    fn rejects_scheme_less_strings() {
        assert_eq!(ConceptId::new("#fragment").unwrap_err(), IriError::Relative);
        assert_eq!(ConceptId::new("   ").unwrap_err(), IriError::Empty);
        assert_eq!(ConceptId::new("1http://x#A").unwrap_err(), IriError::Relative);
        assert!(ConceptId::new("urn:lsid:x:y").is_ok());
    }

    #[test]
    fn request_requires_goals() {
        let err = Request::new(vec![], vec![]).unwrap_err();
        assert!(matches!(err, CatalogError::EmptyGoals));
    }

    #[test]
    fn without_filters_operations() {
        let catalog = parse_catalog(WEATHER_CATALOG).unwrap().catalog;
        let filtered = catalog.without(&BTreeSet::from(["4".to_string(), "5".to_string()]));
        assert_eq!(filtered.len(), 4);
        assert!(filtered.get("4").is_none());
        assert!(filtered.get("1").is_some());
    }
}
