//! Plain-text `key = value` configuration.

use std::collections::BTreeMap;
use std::path::Path;

use stpa::protocols::ParParams;
use stpa::syntax::{parse_point, parse_scalar};
use stpa::{Error, Result, Scalar};

const KEYS: &[&str] = &[
    "speed",
    "depth",
    "seed",
    "samples",
    "format",
    "unfold_budget",
    "data",
    "timeout",
    "retransmission_bound",
    "geometry.sender",
    "geometry.k",
    "geometry.l",
    "geometry.receiver",
    "delays.sender",
    "delays.k",
    "delays.l",
    "delays.receiver",
    "delays.receiver_ack",
    "delays.env",
];

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Misuse(format!("config line {}: expected `key = value`", n + 1)));
            };
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Misuse(format!("config line {}: unknown key `{k}`", n + 1)));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Misuse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn scalar(&self, key: &str) -> Result<Option<Scalar>> {
        self.get(key).map(parse_scalar).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| Error::Misuse(format!("`{key}` expects a count, got `{v}`"))))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| Error::Misuse(format!("`{key}` expects an integer, got `{v}`"))))
            .transpose()
    }

    /// PAR parameters: the defaults overridden by whatever the file sets.
    pub fn par_params(&self) -> Result<ParParams> {
        let mut p = ParParams::default();
        if let Some(d) = self.get("data") {
            p.data = d.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        let points = [
            ("geometry.sender", &mut p.xi_s),
            ("geometry.k", &mut p.xi_k),
            ("geometry.l", &mut p.xi_l),
            ("geometry.receiver", &mut p.xi_r),
        ];
        for (k, slot) in points {
            if let Some(v) = self.get(k) {
                *slot = parse_point(v)?;
            }
        }
        let scalars = [
            ("speed", &mut p.speed),
            ("timeout", &mut p.timeout),
            ("delays.sender", &mut p.t_s),
            ("delays.k", &mut p.t_k),
            ("delays.l", &mut p.t_l),
            ("delays.receiver", &mut p.t_r),
            ("delays.receiver_ack", &mut p.t_r_ack),
            ("delays.env", &mut p.t_env),
        ];
        for (k, slot) in scalars {
            if let Some(v) = self.scalar(k)? {
                *slot = v;
            }
        }
        if let Some(b) = self.usize("retransmission_bound")? {
            p.retransmission_bound = b;
        }
        if let Some(d) = self.usize("depth")? {
            p.depth = d;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stpa::Point;

    #[test]
    fn parses_keys_and_comments() {
        let c = ConfigFile::parse("# unit run\nspeed = 1/2\n\ndata = a, b ,c\ngeometry.receiver = (3,0,0) # far\n")
            .unwrap();
        let p = c.par_params().unwrap();
        assert_eq!(p.speed, Scalar::frac(1, 2));
        assert_eq!(p.data, vec!["a", "b", "c"]);
        assert_eq!(p.xi_r, Point::ints(3, 0, 0));
        assert_eq!(p.timeout, Scalar::int(10));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(ConfigFile::parse("sped = 1").is_err());
        assert!(ConfigFile::parse("speed").is_err());
        assert!(ConfigFile::parse("depth = x").unwrap().usize("depth").is_err());
    }
}
