use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "cf-statlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything that determines a command's output. Output locations, worker count and
/// cache settings never change an output byte and are left out.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primes_only: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    /// SHA-256 of a `file:` ensemble's contents.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<f64>,
    /// Sampling step of the orbit profile, when set apart from the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub haar_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn seed_label(&self) -> String {
        self.seed.map_or_else(|| "none".into(), |s| s.to_string())
    }

    /// Cache key: hex SHA-256 of the tool version and the config echo.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{TOOL} {VERSION}\n").as_bytes());
        h.update(self.to_json().as_bytes());
        hex::encode(h.finalize())
    }

    /// `#`-prefixed metadata lines that open every CSV file.
    pub fn csv_header(&self) -> String {
        format!(
            "# {TOOL} {VERSION}\n# config: {}\n# seed: {}\n",
            self.to_json(),
            self.seed_label()
        )
    }

    pub fn svg_header(&self) -> String {
        format!(
            "<!-- {TOOL} {VERSION} -->\n<!-- config: {} -->\n<!-- seed: {} -->\n",
            self.to_json().replace("--", "- -"),
            self.seed_label()
        )
    }

    /// Pretty JSON with a leading `meta` object holding the same information as the
    /// CSV header, followed by the fields of `body`.
    pub fn json_document<T: Serialize>(&self, body: &T) -> String {
        let mut doc = Map::new();
        doc.insert(
            "meta".into(),
            serde_json::json!({
                "tool": TOOL,
                "version": VERSION,
                "config": self,
                "seed": self.seed,
            }),
        );
        match serde_json::to_value(body).expect("result serializes") {
            Value::Object(fields) => doc.extend(fields),
            other => {
                doc.insert("result".into(), other);
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
        s.push('\n');
        s
    }
}

/// File-name-safe rendering of an ensemble description.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_nothing_in_config() {
        let mut a = ExperimentConfig::new("stats");
        a.q = Some(7);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.eps = Some(vec![0.1]);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn header_lines() {
        let mut c = ExperimentConfig::new("stats");
        c.seed = Some(7);
        let h = c.csv_header();
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert!(h.contains("# seed: 7"));
        assert!(h.contains("\"command\":\"stats\""));
    }

    #[test]
    fn json_meta_first() {
        let c = ExperimentConfig::new("orbit");
        let doc = c.json_document(&serde_json::json!({"x": 1}));
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["meta"]["tool"], TOOL);
        assert_eq!(v["x"], 1);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("random:h=0.9,seed=7"), "random_h_0.9_seed_7");
        assert_eq!(slug("all"), "all");
    }
}
