use std::fmt::Display;

/// One CSV file: header plus rows, serialized with LF line endings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub file_name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            file_name: file_name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.file_name);
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // writes into memory only fail on programmer error
        w.write_record(&self.header).expect("csv header");
        for row in &self.rows {
            w.write_record(row).expect("csv row");
        }
        w.into_inner().expect("in-memory csv writer")
    }
}

/// Shortest decimal form that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// `key: value` lines, including the pass/fail verdict of every check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    entries: Vec<(String, String)>,
    failed: Vec<String>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn check(&mut self, key: impl Into<String>, ok: bool) -> bool {
        let key = key.into();
        if !ok {
            self.failed.push(key.clone());
        }
        self.put(key, if ok { "pass" } else { "fail" });
        ok
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn failed(&self) -> &[String] {
        &self.failed
    }

    pub fn all_passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioOutput {
    pub scenario: String,
    pub tables: Vec<Table>,
    pub summary: Summary,
}

impl ScenarioOutput {
    pub fn summary_file_name(&self) -> String {
        format!("{}_summary.txt", self.scenario)
    }

    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }

    /// Every file this run produces, in a fixed order.
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut out: Vec<(String, Vec<u8>)> = self.tables.iter().map(|t| (t.file_name.clone(), t.to_csv())).collect();
        out.push((self.summary_file_name(), self.summary.to_text().into_bytes()));
        out
    }
}
