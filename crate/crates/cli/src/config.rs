//! Experiment configuration: defaults per experiment, `key=value` files and validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ThmTree,
    ThmDeg3,
    MR,
    Contraction,
    Exhaustion,
    Lln,
    Clt,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::ThmTree,
        ExperimentKind::ThmDeg3,
        ExperimentKind::MR,
        ExperimentKind::Contraction,
        ExperimentKind::Exhaustion,
        ExperimentKind::Lln,
        ExperimentKind::Clt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ThmTree => "thm_tree",
            ExperimentKind::ThmDeg3 => "thm_deg3",
            ExperimentKind::MR => "m_r",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::Exhaustion => "exhaustion",
            ExperimentKind::Lln => "lln",
            ExperimentKind::Clt => "clt",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment `{s}`")))
    }
}

/// Everything that determines the output of a run. Thread count and output
/// paths are deliberately absent: they do not change results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// `path`, `regular_tree`, `hex`, `deg3_random`, `random_tree` or `planted_tree`.
    pub family: String,
    /// Maximum degree `D` where the family takes one.
    pub degree: usize,
    pub r_min: usize,
    pub r_max: usize,
    pub epsilons: Vec<f64>,
    /// Exhaustion radii bounds, or the tree sizes for `lln` and `clt`.
    pub n_values: Vec<usize>,
    pub replicas: usize,
    pub master_seed: u64,
    /// Probability of deleting each vertex at distance >= 2 from the root in `m_r`.
    pub deletion_prob: f64,
    /// Co-run the exact sup against the bracket on every replica of `thm_tree`.
    pub exact_check: bool,
    /// Replicas per checkpoint chunk.
    pub chunk: usize,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            experiment,
            family: "path".into(),
            degree: 2,
            r_min: 0,
            r_max: 0,
            epsilons: Vec::new(),
            n_values: Vec::new(),
            replicas: 1000,
            master_seed: 1,
            deletion_prob: 0.1,
            exact_check: false,
            chunk: 500,
        };
        match experiment {
            ExperimentKind::ThmTree => ExperimentConfig {
                r_min: 24,
                r_max: 34,
                replicas: 10_000,
                exact_check: true,
                ..base
            },
            ExperimentKind::ThmDeg3 => ExperimentConfig {
                family: "hex".into(),
                degree: 3,
                r_min: 1,
                r_max: 10,
                epsilons: vec![0.1, 0.2, 0.3],
                replicas: 2000,
                ..base
            },
            ExperimentKind::MR => ExperimentConfig {
                family: "hex".into(),
                degree: 3,
                r_min: 0,
                r_max: 10,
                epsilons: vec![0.1, 0.2, 0.3],
                replicas: 4000,
                ..base
            },
            ExperimentKind::Contraction => ExperimentConfig {
                family: "planted_tree".into(),
                degree: 4,
                r_min: 4,
                r_max: 12,
                replicas: 200,
                ..base
            },
            ExperimentKind::Exhaustion => ExperimentConfig {
                r_min: 12,
                r_max: 24,
                n_values: vec![1, 24],
                ..base
            },
            ExperimentKind::Lln => ExperimentConfig {
                family: "random_tree".into(),
                degree: 3,
                n_values: vec![100, 1000, 10_000],
                replicas: 400,
                ..base
            },
            ExperimentKind::Clt => ExperimentConfig {
                family: "random_tree".into(),
                degree: 3,
                n_values: vec![10_000],
                ..base
            },
        }
    }

    /// Starts from the defaults of the `experiment` key and applies every
    /// other `key=value` line. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let pairs = parse_pairs(text.lines())?;
        let kind = pairs
            .iter()
            .find(|(k, _)| k == "experiment")
            .ok_or_else(|| HarnessError::Config("missing `experiment` key".into()))?
            .1
            .parse()?;
        let mut cfg = ExperimentConfig::defaults(kind);
        for (k, v) in &pairs {
            if k != "experiment" {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let bad =
            |what: &str| HarnessError::Config(format!("bad value `{value}` for `{key}`: {what}"));
        match key {
            "family" => self.family = value.to_string(),
            "degree" => self.degree = value.parse().map_err(|_| bad("integer"))?,
            "r_min" => self.r_min = value.parse().map_err(|_| bad("integer"))?,
            "r_max" => self.r_max = value.parse().map_err(|_| bad("integer"))?,
            "r" => {
                let (lo, hi) = value.split_once("..").unwrap_or((value, value));
                self.r_min = lo.trim().parse().map_err(|_| bad("`a..b` or an integer"))?;
                self.r_max = hi.trim().parse().map_err(|_| bad("`a..b` or an integer"))?;
            }
            "epsilons" | "epsilon" => {
                self.epsilons = parse_list(value).map_err(|_| bad("list of reals"))?
            }
            "n_values" | "n" => {
                self.n_values = parse_list(value).map_err(|_| bad("list of integers"))?
            }
            "replicas" => self.replicas = value.parse().map_err(|_| bad("integer"))?,
            "seed" | "master_seed" => {
                self.master_seed = value.parse().map_err(|_| bad("integer"))?
            }
            "deletion_prob" => self.deletion_prob = value.parse().map_err(|_| bad("real"))?,
            "exact_check" => self.exact_check = value.parse().map_err(|_| bad("true or false"))?,
            "chunk" => self.chunk = value.parse().map_err(|_| bad("integer"))?,
            _ => return Err(HarnessError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.replicas == 0 {
            return fail("replicas must be positive".into());
        }
        if self.chunk == 0 {
            return fail("chunk must be positive".into());
        }
        if self.r_min > self.r_max {
            return fail(format!("r_min {} exceeds r_max {}", self.r_min, self.r_max));
        }
        if let Some(eps) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return fail(format!("epsilon {eps} is outside (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.deletion_prob) {
            return fail(format!(
                "deletion_prob {} is outside [0, 1)",
                self.deletion_prob
            ));
        }
        let families: &[&str] = match self.experiment {
            ExperimentKind::ThmTree => &["path", "regular_tree"],
            ExperimentKind::ThmDeg3 => &["hex", "deg3_random"],
            ExperimentKind::MR => &["hex"],
            ExperimentKind::Contraction => &["planted_tree"],
            ExperimentKind::Exhaustion => &["path", "regular_tree", "hex"],
            ExperimentKind::Lln | ExperimentKind::Clt => &["random_tree", "path"],
        };
        if !families.contains(&self.family.as_str()) {
            return fail(format!(
                "family `{}` is not available for {} (use one of {})",
                self.family,
                self.experiment,
                families.join(", ")
            ));
        }
        match self.experiment {
            ExperimentKind::ThmTree if self.r_min < 3 => fail("thm_tree needs r >= 3".into()),
            ExperimentKind::ThmTree | ExperimentKind::Contraction if self.degree < 2 => {
                fail("degree must be at least 2".into())
            }
            ExperimentKind::ThmTree if self.family == "path" && self.degree != 2 => {
                fail("the path family has D = 2".into())
            }
            ExperimentKind::Contraction if self.r_min < 4 => {
                fail("contraction needs r >= 4".into())
            }
            ExperimentKind::ThmDeg3 | ExperimentKind::MR if self.epsilons.is_empty() => {
                fail("an epsilon grid is required".into())
            }
            ExperimentKind::Exhaustion
                if self.n_values.len() != 2 || self.n_values[0] > self.n_values[1] =>
            {
                fail("exhaustion needs n_values = min,max".into())
            }
            ExperimentKind::Exhaustion if self.r_min > self.n_values[1] => {
                fail("the stabilisation radius r_min must not exceed the largest n".into())
            }
            ExperimentKind::Lln if self.n_values.len() < 2 => {
                fail("lln needs at least two sizes".into())
            }
            ExperimentKind::Clt if self.n_values.len() != 1 => {
                fail("clt takes exactly one size".into())
            }
            ExperimentKind::Lln | ExperimentKind::Clt if self.n_values.contains(&0) => {
                fail("sizes must be positive".into())
            }
            _ => Ok(()),
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }

    /// The config back as `key=value` lines, parseable by [`parse`](Self::parse).
    pub fn to_key_values(&self) -> String {
        let list = |v: &[String]| v.join(",");
        let eps: Vec<String> = self.epsilons.iter().map(|x| x.to_string()).collect();
        let ns: Vec<String> = self.n_values.iter().map(|x| x.to_string()).collect();
        format!(
            "experiment={}\nfamily={}\ndegree={}\nr_min={}\nr_max={}\nepsilons={}\nn_values={}\nreplicas={}\nmaster_seed={}\ndeletion_prob={}\nexact_check={}\nchunk={}\n",
            self.experiment,
            self.family,
            self.degree,
            self.r_min,
            self.r_max,
            list(&eps),
            list(&ns),
            self.replicas,
            self.master_seed,
            self.deletion_prob,
            self.exact_check,
            self.chunk
        )
    }
}

pub fn parse_pairs<'a, I: IntoIterator<Item = &'a str>>(
    lines: I,
) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key=value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, T::Err> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}
