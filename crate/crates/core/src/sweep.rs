//! Randomized (curve, character) sweeps: deterministic per seed, parallel
//! across cases, assembled in case order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::deform::{run_match, CurveInput, DeformOptions, MatchReport};
use crate::error::Result;
use crate::gf::GFq;
use crate::laurent::Laurent;
use crate::localfield::LocalField;
use crate::quadratic::TwistDatum;

/// Coefficients are random polynomials of degree below this bound.
pub const COEFF_DEGREE: usize = 6;

fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_poly(rng: &mut impl Rng, k: &GFq, low: i64, len: usize) -> Laurent {
    let digits = (0..len).map(|_| rng.random_range(0..k.q())).collect();
    Laurent::new(k, low, digits)
}

/// A random nonsingular integral curve over F_q[t].
pub fn random_curve(rng: &mut impl Rng, k: &GFq) -> CurveInput {
    loop {
        let a: [Laurent; 5] = std::array::from_fn(|_| {
            let len = rng.random_range(0..=COEFF_DEGREE);
            random_poly(rng, k, 0, len)
        });
        if let Ok(c) = CurveInput::new(k, a) {
            return c;
        }
    }
}

/// A random normalized quadratic datum: sqrt(d) for p odd, an Artin-Schreier gamma for p = 2.
pub fn random_datum(rng: &mut impl Rng, field: &LocalField) -> TwistDatum {
    let k = field.residue_field();
    loop {
        let datum = if k.p() == 2 {
            let low = -rng.random_range(0..=5i64);
            let len = rng.random_range(1..=4);
            TwistDatum::artin_schreier(field, &random_poly(rng, k, low, len))
        } else {
            let len = rng.random_range(1..=3);
            TwistDatum::sqrt_d(field, &random_poly(rng, k, 0, len))
        };
        if let Ok(d) = datum {
            return d;
        }
    }
}

/// The (curve, datum) pair of case `index` under `seed`.
pub fn sweep_case(k: &GFq, seed: u64, index: u64) -> (CurveInput, TwistDatum) {
    let mut rng = case_rng(seed, index);
    let curve = random_curve(&mut rng, k);
    let datum = random_datum(&mut rng, &curve.source_field());
    (curve, datum)
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct EntryStats {
    pub matched: u64,
    pub mismatched: u64,
    pub unsupported: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseFailure {
    pub index: u64,
    pub curve: Vec<String>,
    pub twist: String,
    /// "mismatch" or an error kind.
    pub kind: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub p: u32,
    pub n: usize,
    pub count: u64,
    pub seed: u64,
    pub cases_ok: u64,
    pub all_matched: bool,
    pub per_entry: BTreeMap<String, EntryStats>,
    pub e_used: BTreeMap<i64, u64>,
    pub retries: BTreeMap<u32, u64>,
    pub kodaira: BTreeMap<String, u64>,
    pub failures: Vec<CaseFailure>,
}

/// Run `count` random cases and aggregate; reports are handed to `inspect` in case order.
pub fn sweep_with(
    p: u32,
    n: usize,
    count: u64,
    seed: u64,
    options: &DeformOptions,
    mut inspect: impl FnMut(u64, &CurveInput, &TwistDatum, &Result<MatchReport>),
) -> Result<SweepSummary> {
    let k = GFq::new(p, n)?;
    let results: Vec<(CurveInput, TwistDatum, Result<MatchReport>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (curve, datum) = sweep_case(&k, seed, i);
            let report = run_match(&curve, &datum, options);
            (curve, datum, report)
        })
        .collect();

    let mut summary = SweepSummary {
        p,
        n,
        count,
        seed,
        cases_ok: 0,
        all_matched: true,
        per_entry: BTreeMap::new(),
        e_used: BTreeMap::new(),
        retries: BTreeMap::new(),
        kodaira: BTreeMap::new(),
        failures: Vec::new(),
    };
    for (i, (curve, datum, report)) in results.iter().enumerate() {
        inspect(i as u64, curve, datum, report);
        match report {
            Ok(r) => {
                for e in &r.entries {
                    let s = summary.per_entry.entry(e.name.clone()).or_default();
                    if e.unsupported {
                        s.unsupported += 1;
                    } else if e.matched {
                        s.matched += 1;
                    } else {
                        s.mismatched += 1;
                    }
                }
                *summary.e_used.entry(r.e_used).or_default() += 1;
                *summary.retries.entry(r.retries).or_default() += 1;
                *summary.kodaira.entry(r.k.curve.kodaira.to_string()).or_default() += 1;
                if r.all_matched {
                    summary.cases_ok += 1;
                } else {
                    summary.all_matched = false;
                    let names: Vec<_> = r.mismatches().iter().map(|m| m.name.as_str()).collect();
                    summary.failures.push(failure(i as u64, curve, datum, "mismatch", format!("mismatched: {}", names.join(", "))));
                }
            }
            Err(err) => {
                summary.all_matched = false;
                summary.failures.push(failure(i as u64, curve, datum, err.kind(), err.to_string()));
            }
        }
    }
    Ok(summary)
}

pub fn sweep(p: u32, n: usize, count: u64, seed: u64, options: &DeformOptions) -> Result<SweepSummary> {
    sweep_with(p, n, count, seed, options, |_, _, _, _| {})
}

fn failure(index: u64, curve: &CurveInput, datum: &TwistDatum, kind: &str, error: String) -> CaseFailure {
    CaseFailure {
        index,
        curve: curve.a.iter().map(Laurent::to_literal).collect(),
        twist: format!("{} {}", datum.kind_name(), datum.param_literal()),
        kind: kind.to_string(),
        error,
    }
}

impl SweepSummary {
    pub fn has_kind(&self, kind: &str) -> bool {
        self.failures.iter().any(|f| f.kind == kind)
    }
}
