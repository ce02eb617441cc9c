//! Changes of variables `f <-> rho <-> h <-> xi`.
//!
//! `rho = f / feq`, `h = D log rho`, `xi = h - h0`. The way back goes through
//! `rho = exp(h / D)`, so any finite `h` yields a strictly positive density.

use log::warn;
use serde::Serialize;

use crate::coefficients::EquilibriumState;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    DensityF,
    ScaledRho,
    LogH,
    DeviationXi,
}

impl FieldKind {
    pub fn is_density(self) -> bool {
        matches!(self, FieldKind::DensityF | FieldKind::ScaledRho)
    }
}

/// Nodal values of one unknown at one time level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field<T> {
    pub kind: FieldKind,
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Real> Field<T> {
    pub fn new(kind: FieldKind, values: Vec<T>, time: T) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                "values",
                format!("non-finite entry at node {i}"),
            ));
        }
        if kind.is_density() {
            check_positive(&values, kind_name(kind))?;
        }
        Ok(Self { kind, values, time })
    }

    fn expect_kind(&self, kind: FieldKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::validation(
                "kind",
                format!("expected {:?}, got {:?}", kind, self.kind),
            ));
        }
        Ok(())
    }
}

fn kind_name(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::DensityF => "f",
        FieldKind::ScaledRho => "rho",
        FieldKind::LogH => "h",
        FieldKind::DeviationXi => "xi",
    }
}

pub(crate) fn check_positive<T: Real>(values: &[T], what: &str) -> Result<()> {
    match values.iter().position(|&v| !(v > T::zero())) {
        Some(i) => Err(Error::Domain {
            what: what.to_string(),
            node: i,
            value: values[i].as_f64(),
        }),
        None => Ok(()),
    }
}

fn check_shape<T>(a: &[T], b: &[T], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::validation(
            what,
            format!("length {} does not match {}", b.len(), a.len()),
        ));
    }
    Ok(())
}

pub fn rho_from_f<T: Real>(f: &Field<T>, eq: &EquilibriumState<T>) -> Result<Field<T>> {
    f.expect_kind(FieldKind::DensityF)?;
    check_shape(&f.values, &eq.feq, "feq")?;
    check_positive(&f.values, "f")?;
    let values = f.values.iter().zip(&eq.feq).map(|(&f, &e)| f / e).collect();
    Ok(Field {
        kind: FieldKind::ScaledRho,
        values,
        time: f.time,
    })
}

pub fn f_from_rho<T: Real>(rho: &Field<T>, eq: &EquilibriumState<T>) -> Result<Field<T>> {
    rho.expect_kind(FieldKind::ScaledRho)?;
    check_shape(&rho.values, &eq.feq, "feq")?;
    check_positive(&rho.values, "rho")?;
    let values = rho
        .values
        .iter()
        .zip(&eq.feq)
        .map(|(&r, &e)| r * e)
        .collect();
    Ok(Field {
        kind: FieldKind::DensityF,
        values,
        time: rho.time,
    })
}

/// `h = D log rho` on raw arrays.
pub fn h_values<T: Real>(rho: &[T], d: &[T]) -> Result<Vec<T>> {
    check_shape(rho, d, "d")?;
    check_positive(rho, "rho")?;
    Ok(rho.iter().zip(d).map(|(&r, &d)| d * r.ln()).collect())
}

/// `rho = exp(h / D)` on raw arrays, with exponents clamped to
/// `[Real::log_floor, -Real::log_floor]` so the result is always a positive
/// normal number.
pub fn rho_values<T: Real>(h: &[T], d: &[T]) -> Vec<T> {
    let floor = T::log_floor();
    let ceiling = -floor;
    let mut clamped = 0usize;
    let out = h
        .iter()
        .zip(d)
        .map(|(&h, &d)| {
            let e = h / d;
            if e < floor || e > ceiling {
                clamped += 1;
            }
            e.max(floor).min(ceiling).exp()
        })
        .collect();
    if clamped > 0 {
        warn!("{clamped} node(s) with |h/D| beyond {ceiling}; exponent clamped");
    }
    out
}

pub fn h_from_rho<T: Real>(rho: &Field<T>, d: &[T]) -> Result<Field<T>> {
    rho.expect_kind(FieldKind::ScaledRho)?;
    Ok(Field {
        kind: FieldKind::LogH,
        values: h_values(&rho.values, d)?,
        time: rho.time,
    })
}

pub fn rho_from_h<T: Real>(h: &Field<T>, d: &[T]) -> Result<Field<T>> {
    h.expect_kind(FieldKind::LogH)?;
    check_shape(&h.values, d, "d")?;
    Ok(Field {
        kind: FieldKind::ScaledRho,
        values: rho_values(&h.values, d),
        time: h.time,
    })
}

pub fn xi_from_h<T: Real>(h: &Field<T>, h0: &[T]) -> Result<Field<T>> {
    h.expect_kind(FieldKind::LogH)?;
    check_shape(&h.values, h0, "h0")?;
    let values = h.values.iter().zip(h0).map(|(&h, &h0)| h - h0).collect();
    Ok(Field {
        kind: FieldKind::DeviationXi,
        values,
        time: h.time,
    })
}

pub fn h_from_xi<T: Real>(xi: &Field<T>, h0: &[T]) -> Result<Field<T>> {
    xi.expect_kind(FieldKind::DeviationXi)?;
    check_shape(&xi.values, h0, "h0")?;
    let values = xi.values.iter().zip(h0).map(|(&x, &h0)| x + h0).collect();
    Ok(Field {
        kind: FieldKind::LogH,
        values,
        time: xi.time,
    })
}

/// `f = feq * exp((xi + h0) / D)`, the full reconstruction used by the
/// fixed-point path.
pub fn f_from_xi_values<T: Real>(xi: &[T], h0: &[T], d: &[T], feq: &[T]) -> Vec<T> {
    let h: Vec<T> = xi.iter().zip(h0).map(|(&x, &h)| x + h).collect();
    rho_values(&h, d)
        .into_iter()
        .zip(feq)
        .map(|(r, &e)| r * e)
        .collect()
}
