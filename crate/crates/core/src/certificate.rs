//! Tabular certification records: one row per checked quantity, plus the
//! parameters the rows were produced under.

#[derive(Clone, Debug, PartialEq)]
pub struct CertRow {
    pub quantity: String,
    pub value: f64,
    pub bound: Option<f64>,
    /// `None` for informational rows that carry no pass semantics.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    pub rows: Vec<CertRow>,
    pub provenance: Vec<(String, String)>,
}

impl Certificate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn info(&mut self, quantity: impl Into<String>, value: f64) -> &mut Self {
        self.rows.push(CertRow {
            quantity: quantity.into(),
            value,
            bound: None,
            pass: None,
        });
        self
    }

    /// Row that passes iff `value < bound` (strict) or `value <= bound`.
    pub fn check(&mut self, quantity: impl Into<String>, value: f64, bound: f64, strict: bool) -> &mut Self {
        let pass = if strict { value < bound } else { value <= bound };
        self.rows.push(CertRow {
            quantity: quantity.into(),
            value,
            bound: Some(bound),
            pass: Some(pass),
        });
        self
    }

    /// Row that passes iff `value > bound` (strict) or `value >= bound`.
    pub fn check_min(&mut self, quantity: impl Into<String>, value: f64, bound: f64, strict: bool) -> &mut Self {
        let pass = if strict { value > bound } else { value >= bound };
        self.rows.push(CertRow {
            quantity: quantity.into(),
            value,
            bound: Some(bound),
            pass: Some(pass),
        });
        self
    }

    /// Row recording a bound without judging it (demo schedules).
    pub fn bound_only(&mut self, quantity: impl Into<String>, value: f64, bound: f64) -> &mut Self {
        self.rows.push(CertRow {
            quantity: quantity.into(),
            value,
            bound: Some(bound),
            pass: None,
        });
        self
    }

    pub fn provenance(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.provenance.push((key.into(), value.to_string()));
        self
    }

    pub fn extend(&mut self, other: Certificate) {
        self.rows.extend(other.rows);
        self.provenance.extend(other.provenance);
    }

    /// True when no judged row failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn row(&self, quantity: &str) -> Option<&CertRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}
