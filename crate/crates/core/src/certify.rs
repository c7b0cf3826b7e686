//! Certification of an almost representation against a presentation: every
//! relator must evaluate within `ε` of the identity and every listed word at
//! least `separation_threshold` away from it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplify::{boost_assignment, boost_schedule, k_delta, AmplifySchedule};
use crate::error::{Error, Result};
use crate::matkernel::{recover_eigendata, CircleSpectrum};
use crate::scalar::Real;
use crate::words::{GeneratorAssignment, Interpretation, Presentation};

pub const DEFAULT_SEPARATION_THRESHOLD: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelatorDefect {
    pub relator: String,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub label: String,
    pub norm: f64,
    /// Reported but ignored by the verdict.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub presentation: String,
    pub epsilon: f64,
    pub separation_threshold: f64,
    pub relator_defects: Vec<RelatorDefect>,
    /// Sorted by label.
    pub separations: Vec<Separation>,
    pub pass: bool,
    pub params: BTreeMap<String, serde_json::Value>,
}

/// `pass` as a function of the recorded norms. Comparisons are exact, and a
/// NaN norm fails.
pub fn verdict(
    epsilon: f64,
    separation_threshold: f64,
    relator_defects: &[RelatorDefect],
    separations: &[Separation],
) -> bool {
    relator_defects.iter().all(|r| r.norm < epsilon)
        && separations
            .iter()
            .filter(|s| !s.trivial)
            .all(|s| s.norm >= separation_threshold)
}

impl CertReport {
    pub fn with_param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).expect("param serializes"));
        self
    }

    pub fn max_relator_defect(&self) -> f64 {
        self.relator_defects.iter().map(|r| r.norm).fold(0.0, f64::max)
    }

    pub fn min_separation(&self) -> Option<f64> {
        self.separations
            .iter()
            .filter(|s| !s.trivial)
            .map(|s| s.norm)
            .reduce(f64::min)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Re-derive the verdict from a serialized report alone.
    pub fn recompute_pass(json: &str) -> Result<bool> {
        let r: CertReport = serde_json::from_str(json).map_err(|source| Error::Json {
            context: "report".into(),
            source,
        })?;
        Ok(verdict(r.epsilon, r.separation_threshold, &r.relator_defects, &r.separations))
    }
}

/// Evaluate relators and listed words under any interpretation and measure
/// each against the identity.
pub fn certify_with<I>(pres: &Presentation, interp: &I, epsilon: f64, separation_threshold: f64) -> Result<CertReport>
where
    I: Interpretation + Sync,
    I::Value: Send,
{
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} must be positive")));
    }
    if !(separation_threshold >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "separation threshold {separation_threshold} must be non-negative"
        )));
    }
    let measure = |w: &crate::words::Word| -> Result<f64> {
        let v = w.interpret(interp)?;
        interp.distance_from_identity(&v).map_err(|e| e.in_word(w))
    };
    let relator_defects = pres
        .relators
        .par_iter()
        .map(|r| {
            Ok(RelatorDefect {
                relator: r.to_string(),
                norm: measure(r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut separations = pres
        .words
        .par_iter()
        .map(|lw| {
            Ok(Separation {
                label: lw.label.clone(),
                norm: measure(&lw.word)?,
                trivial: lw.trivial,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    separations.sort_by(|a, b| a.label.cmp(&b.label));
    let pass = verdict(epsilon, separation_threshold, &relator_defects, &separations);
    Ok(CertReport {
        presentation: pres.name.clone(),
        epsilon,
        separation_threshold,
        relator_defects,
        separations,
        pass,
        params: BTreeMap::new(),
    })
}

/// [`certify_with`] for a dense assignment, with the default threshold.
pub fn certify<T: Real>(pres: &Presentation, asg: &GeneratorAssignment<T>, epsilon: f64) -> Result<CertReport> {
    asg.covers(pres)?;
    certify_with(pres, asg, epsilon, DEFAULT_SEPARATION_THRESHOLD).map(|r| r.with_param("dim", asg.dim()))
}

/// Result of [`boost_and_recertify`].
#[derive(Clone, Debug)]
pub struct Boosted<T> {
    pub report: CertReport,
    pub assignment: GeneratorAssignment<T>,
    /// Exponent applied to every generator (0 when nothing needed boosting).
    pub k: u32,
    /// Schedules of the words that needed boosting, by label.
    pub schedules: BTreeMap<String, AmplifySchedule>,
}

/// Bring every listed word to separation `√2` with one common exponent.
///
/// Each word below `√2` gets its own exponent from the spectrum of its
/// evaluation; the maximum is applied to all generators after padding with
/// a one. Padding puts 0 among the eigenangles, so the angle set only grows
/// under `γ` and words that already reached `√2` keep it.
pub fn boost_and_recertify<T: Real>(
    pres: &Presentation,
    asg: &GeneratorAssignment<T>,
    epsilon: f64,
    separation_threshold: f64,
    delta: f64,
) -> Result<Boosted<T>> {
    asg.covers(pres)?;
    let kd = k_delta(delta)?;
    let before = certify_with(pres, asg, epsilon, separation_threshold)?;
    let mut schedules = BTreeMap::new();
    for lw in pres.words.iter().filter(|lw| !lw.trivial) {
        let v = lw.word.evaluate(asg)?;
        if v.distance_from_identity()?.to_f64_lossy() >= std::f64::consts::SQRT_2 {
            continue;
        }
        let tracked = recover_eigendata(&v)?;
        // the schedule sees σ(ω ⊕ 1), matching the padding applied below
        let padded = tracked
            .spectrum()
            .expect("recovered")
            .union(&CircleSpectrum::from_angles([T::zero()]));
        let sched = boost_schedule(&padded, delta)
            .map_err(|e| e.in_word(&lw.word))?;
        schedules.insert(lw.label.clone(), sched);
    }
    let k = schedules.values().map(|s| s.applied_k).max().unwrap_or(0);
    let assignment = if k == 0 {
        asg.clone()
    } else {
        boost_assignment(asg, k, true)?
    };
    let report = certify_with(pres, &assignment, epsilon, separation_threshold)?
        .with_param("dim", assignment.dim())
        .with_param("boost_k", k)
        .with_param("k_delta", kd)
        .with_param("delta", delta)
        .with_param("defect_before", before.max_relator_defect())
        .with_param("inflation_bound", 2f64.powi(k as i32));
    Ok(Boosted {
        report,
        assignment,
        k,
        schedules,
    })
}
