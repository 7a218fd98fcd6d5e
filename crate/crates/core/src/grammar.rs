//! Colon-separated spec strings such as `mbe:lambda=0.5:sigma=1:B=50`.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A parsed spec: leading positional words, then `key=value` options.
///
/// A bare word following an option is glued back onto that option's value,
/// so `dist=gauss:1` survives the split on `:`.
#[derive(Debug)]
pub(crate) struct SpecTokens<'a> {
    source: &'a str,
    positional: Vec<&'a str>,
    options: BTreeMap<String, String>,
}

impl<'a> SpecTokens<'a> {
    pub fn parse(source: &'a str) -> Result<Self> {
        let mut positional = Vec::new();
        let mut options: Vec<(String, String)> = Vec::new();
        for token in source.trim().split(':') {
            let token = token.trim();
            if token.is_empty() {
                return Err(Error::config(format!("empty field in spec '{source}'")));
            }
            match token.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    if options.iter().any(|(seen, _)| seen == k) {
                        return Err(Error::config(format!("duplicate key '{k}' in spec '{source}'")));
                    }
                    options.push((k.to_string(), v.trim().to_string()));
                }
                None => match options.last_mut() {
                    Some((_, v)) => {
                        v.push(':');
                        v.push_str(token);
                    }
                    None => positional.push(token),
                },
            }
        }
        Ok(Self {
            source,
            positional,
            options: options.into_iter().collect(),
        })
    }

    pub fn head(&self) -> &'a str {
        self.positional.first().copied().unwrap_or("")
    }

    pub fn positional(&self) -> &[&'a str] {
        &self.positional
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.options.remove(key)
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.options.remove(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::config(format!("bad value '{raw}' for '{key}' in spec '{}'", self.source))
            }),
        }
    }

    pub fn take_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.options.remove(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| Error::config(format!("bad list '{raw}' for '{key}'"))),
        }
    }

    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.options.remove(key).as_deref() {
            None => Ok(None),
            Some("true" | "1" | "yes") => Ok(Some(true)),
            Some("false" | "0" | "no") => Ok(Some(false)),
            Some(raw) => Err(Error::config(format!("bad boolean '{raw}' for '{key}'"))),
        }
    }

    /// Fails if any option was not consumed.
    pub fn finish(self) -> Result<()> {
        match self.options.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::config(format!("unknown key '{k}' in spec '{}'", self.source))),
        }
    }
}

/// Formats a float list as `a,b,c`.
pub(crate) fn join_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_positional_and_options() {
        let mut t = SpecTokens::parse("mbe:lambda=0.5:B=50").unwrap();
        assert_eq!(t.head(), "mbe");
        assert_eq!(t.take::<f64>("lambda").unwrap(), Some(0.5));
        assert_eq!(t.take::<usize>("B").unwrap(), Some(50));
        t.finish().unwrap();
    }

    #[test]
    fn glues_colon_values() {
        let mut t = SpecTokens::parse("naive-mb:dist=gauss:1:B=5").unwrap();
        assert_eq!(t.take_str("dist").as_deref(), Some("gauss:1"));
        assert_eq!(t.take::<usize>("B").unwrap(), Some(5));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let t = SpecTokens::parse("eg:a=1:zzz=2").unwrap();
        assert!(t.finish().is_err());
        assert!(SpecTokens::parse("eg:a=1:a=2").is_err());
        assert!(SpecTokens::parse("eg::a=1").is_err());
    }
}
