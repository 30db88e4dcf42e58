//! Plain-text `key = value` reports.
//!
//! Floating-point values are written with 17 significant digits so that a
//! report can be parsed back without loss.

use std::fmt::Write as _;

use crate::certify::SpectralCertificate;
use crate::error::{Error, Result};
use crate::pcg::SolveReport;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set `key`, replacing an earlier value in place.
    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn push_f64(&mut self, key: &str, v: f64) -> &mut Self {
        self.push(key, fmt_f64(v))
    }

    pub fn push_count(&mut self, key: &str, v: impl Into<u64>) -> &mut Self {
        self.push(key, v.into().to_string())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("report has no key {key}")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Parse(format!("{key}: {e}")))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Parse(format!("{key}: {e}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Report::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("report line {}: expected key = value", ln + 1)))?;
            r.push(k.trim(), v.trim());
        }
        Ok(r)
    }
}

/// Certificate fields plus the run's seed and instance hash.
pub fn certificate_report(cert: &SpectralCertificate, seed: u64, instance_hash: &str) -> Report {
    let mut r = Report::new();
    r.push_f64("c_minus", cert.c_minus)
        .push_f64("c_plus", cert.c_plus)
        .push_f64("kappa", cert.kappa)
        .push("route", cert.route.key());
    for (route, residual) in &cert.route_residuals {
        r.push_f64(&format!("route_residual.{route}"), *residual);
    }
    r.push_f64("route_tolerance", cert.route_tolerance)
        .push("routes_agree", cert.routes_agree().to_string())
        .push_f64("witness_residual", cert.witness_residual)
        .push_count("seed", seed)
        .push("instance_hash", instance_hash);
    r
}

pub fn solve_report(rep: &SolveReport, seed: u64, instance_hash: &str) -> Report {
    let mut r = Report::new();
    r.push_count("iterations", rep.iterations as u64)
        .push("converged", rep.converged.to_string())
        .push_f64("tol", rep.tol)
        .push_f64("final_relative_residual", rep.final_residual());
    if let Some(k) = rep.kappa_used {
        r.push_f64("kappa_used", k);
    }
    if let Some(b) = rep.iteration_bound {
        r.push_count("iteration_bound", b as u64)
            .push("within_bound", rep.within_bound().to_string());
    }
    r.push_count("seed", seed).push("instance_hash", instance_hash);
    r
}
