//! Builtin example catalog: named graph surfaces and metric charts with
//! closed-form oracles for B and A. Every surface entry self-checks its
//! oracle at three random points when the catalog is constructed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{parse_with_vars, Expr, ExprError};
use crate::hypersurface::{GraphSurface, SurfaceError};
use crate::metric::{self, MetricChart};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error("surface error: {0}")]
    Surface(#[from] SurfaceError),
    #[error("unknown example id \"{0}\"")]
    UnknownId(String),
    #[error("self-check failed for \"{id}\" ({what}): residual {residual:.3e} at {p:?}")]
    SelfCheck { id: String, what: &'static str, residual: f64, p: Vec<f64> },
}

/// What a catalog entry provides.
#[derive(Debug, Clone)]
pub enum EntryKind {
    Surface(GraphSurface),
    Chart(MetricChart),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub description: &'static str,
    pub kind: EntryKind,
}

impl CatalogEntry {
    pub fn surface(&self) -> Option<&GraphSurface> {
        match &self.kind {
            EntryKind::Surface(s) => Some(s),
            EntryKind::Chart(_) => None,
        }
    }

    pub fn chart(&self) -> &MetricChart {
        match &self.kind {
            EntryKind::Surface(s) => s.ambient(),
            EntryKind::Chart(c) => c,
        }
    }
}

pub const IDS: [&str; 7] = [
    "F1",
    "F2",
    "F3",
    "kobayashi",
    "lightcone",
    "lightplane",
    "perturbed-metric",
];

fn surface_xy(text: &str) -> Result<GraphSurface, CatalogError> {
    let e = parse_with_vars(text, &["x", "y"])?;
    Ok(GraphSurface::new(
        2,
        e,
        vec!["x".into(), "y".into()],
        MetricChart::minkowski(3),
    )?)
}

/// Closed-form oracles for B and A as expressions in the surface variables.
struct Oracle {
    b: Expr,
    a: Expr,
}

fn oracle_xy(b: &str, a: &str) -> Result<Oracle, CatalogError> {
    Ok(Oracle {
        b: parse_with_vars(b, &["x", "y"])?,
        a: parse_with_vars(a, &["x", "y"])?,
    })
}

fn self_check(id: &'static str, surface: &GraphSurface, oracle: &Oracle) -> Result<(), CatalogError> {
    // fixed seed: catalog construction is deterministic
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c57a106);
    for _ in 0..3 {
        let p: Vec<f64> = (0..surface.n()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let r = surface.point_report_default(&p)?;
        let env: std::collections::HashMap<String, f64> = surface
            .vars()
            .iter()
            .cloned()
            .zip(p.iter().copied())
            .collect();
        let b_ref = oracle.b.eval_f64(&env)?;
        let a_ref = oracle.a.eval_f64(&env)?;
        let b_res = (r.b - b_ref).abs() / (1.0 + b_ref.abs());
        let a_res = (r.a - a_ref).abs() / (1.0 + a_ref.abs());
        if b_res > 1e-11 {
            return Err(CatalogError::SelfCheck { id: id.into(), what: "B", residual: b_res, p });
        }
        if a_res > 1e-11 {
            return Err(CatalogError::SelfCheck { id: id.into(), what: "A", residual: a_res, p });
        }
    }
    Ok(())
}

fn entry(id: &'static str) -> Result<CatalogEntry, CatalogError> {
    let (description, kind) = match id {
        "F1" => {
            let s = surface_xy("y + x^2 + x^3 + y*x^4")?;
            let o = oracle_xy(
                "-x^2*(4 + 12*x + (11 + 16*y)*x^2 + 24*y*x^3 + 16*y^2*x^4 + x^6)",
                "2*x^4*(6 + 6*x + 4*y*x^2 + 7*x^4 + 9*x^5 + 10*y*x^6)",
            )?;
            self_check(id, &s, &o)?;
            (
                "degenerate light-like origin; bounded mean curvature",
                EntryKind::Surface(s),
            )
        }
        "F2" => {
            let s = surface_xy("y - (1 + y)*x^3 - y^3*x^4")?;
            let o = oracle_xy(
                "-x^3*(9*x^5*y^4 + 6*x^4*y^2 + 16*x^3*y^6 + x^3 + 24*x^2*y^4 + 24*x^2*y^3 + 3*x*y^2 + 18*x*y + 9*x - 2)",
                "-6*x^4*(14*x^6*y^7 + 19*x^5*y^5 + 3*x^5*y^4 + 8*x^4*y^3 - 3*x^4*y^2 - 9*x^4*y + 2*x^3*y + 2*x^3 - 4*x^2*y^5 - 6*x*y^3 - 6*x*y^2 - 1)",
            )?;
            self_check(id, &s, &o)?;
            (
                "degenerate light-like origin; unbounded mean curvature",
                EntryKind::Surface(s),
            )
        }
        "F3" => {
            let s = surface_xy("y + x^3 + x^4 + y*x^5")?;
            let o = oracle_xy(
                "-x^4*(9 + 26*x + 2*(8 + 15*y)*x^2 + 40*y*x^3 + 25*y^2*x^4 + x^6)",
                "2*x^6*(9 + 8*x + 5*y*x^2 + 12*x^5 + 14*x^6 + 15*y*x^7)",
            )?;
            self_check(id, &s, &o)?;
            (
                "degenerate light-like origin; mean curvature extends analytically",
                EntryKind::Surface(s),
            )
        }
        "kobayashi" => {
            let s = surface_xy("(x + 1)*tanh(y)")?;
            // zero mean curvature; B = 1 - tanh(y)^2 - (x+1)^2 sech(y)^4
            let o = oracle_xy(
                "1 - tanh(y)^2 - (x + 1)^2*(1 - tanh(y)^2)^2",
                "0",
            )?;
            self_check(id, &s, &o)?;
            (
                "zero-mean-curvature graph with non-degenerate light-like locus",
                EntryKind::Surface(s),
            )
        }
        "lightcone" => {
            let e = parse_with_vars("sqrt(x1^2 + (x2 + 1)^2) - 1", &["x1", "x2"])?;
            let s = GraphSurface::minkowski(2, e)?;
            let o = Oracle {
                b: parse_with_vars("0", &["x1", "x2"])?,
                a: parse_with_vars("0", &["x1", "x2"])?,
            };
            self_check(id, &s, &o)?;
            (
                "light-cone with vertex at (-1, 0, -1); entirely light-like",
                EntryKind::Surface(s),
            )
        }
        "lightplane" => {
            let e = parse_with_vars("x2", &["x1", "x2"])?;
            let s = GraphSurface::minkowski(2, e)?;
            let o = Oracle {
                b: parse_with_vars("0", &["x1", "x2"])?,
                a: parse_with_vars("0", &["x1", "x2"])?,
            };
            self_check(id, &s, &o)?;
            (
                "light-like hyperplane x0 = x2; entirely light-like",
                EntryKind::Surface(s),
            )
        }
        "perturbed-metric" => {
            let chart = metric::perturbed_metric(3, 0.1);
            // signature self-check at three deterministic random points
            let mut rng = ChaCha8Rng::seed_from_u64(0x1c57a106);
            for _ in 0..3 {
                let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
                chart.metric_at(&p).map_err(SurfaceError::from)?;
            }
            (
                "Minkowski plus 0.1*x1^2 dx1 dx2 quadratic perturbation",
                EntryKind::Chart(chart),
            )
        }
        other => return Err(CatalogError::UnknownId(other.into())),
    };
    Ok(CatalogEntry { id, description, kind })
}

/// Build the full catalog, running every self-check. Entries build in
/// parallel (capped by CAUSAL_LOCUS_THREADS via the global pool); order is
/// preserved.
pub fn catalog() -> Result<Vec<CatalogEntry>, CatalogError> {
    use rayon::prelude::*;
    IDS.par_iter().map(|id| entry(id)).collect()
}

/// Look up one entry by id (self-checked on construction).
pub fn get(id: &str) -> Result<CatalogEntry, CatalogError> {
    let canonical = IDS
        .iter()
        .find(|k| k.eq_ignore_ascii_case(id))
        .ok_or_else(|| CatalogError::UnknownId(id.into()))?;
    entry(canonical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::CausalClass;

    #[test]
    fn catalog_has_exactly_the_documented_entries() {
        let cat = catalog().unwrap();
        let ids: Vec<&str> = cat.iter().map(|e| e.id).collect();
        assert_eq!(ids, IDS);
    }

    #[test]
    fn unknown_id_rejected() {
        assert!(matches!(get("F4"), Err(CatalogError::UnknownId(_))));
    }

    #[test]
    fn classifications_at_origin() {
        assert_eq!(
            get("F1").unwrap().surface().unwrap().point_report_default(&[0.0, 0.0]).unwrap().cls,
            CausalClass::LightlikeDegenerate
        );
        assert_eq!(
            get("kobayashi").unwrap().surface().unwrap().point_report_default(&[0.0, 0.0]).unwrap().cls,
            CausalClass::LightlikeNondegenerate
        );
    }

    #[test]
    fn corrupted_oracle_fails_self_check() {
        let s = surface_xy("y + x^2 + x^3 + y*x^4").unwrap();
        let o = oracle_xy("1 + x", "0").unwrap();
        assert!(matches!(
            self_check("F1", &s, &o),
            Err(CatalogError::SelfCheck { .. })
        ));
    }
}
