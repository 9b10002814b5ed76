//! Density experiments over sieved families, verification suites and reports.

mod cache;
mod density;
mod family;
mod output;
mod predict;
mod verify;

pub use cache::{Cache, CACHE_SCHEMA};
pub use density::{
    run_family, Config, DensityRow, FamilyRun, FieldRecord, MethodChoice, TableKind, METHOD_VERSION,
};
pub use family::{Family, FamilyTag, Measure};
pub use output::{fields_csv, render, sig4, table_csv, table_md, Format, FIELDS_CSV_HEADER, TABLE_CSV_HEADER};
pub use predict::{aut_order, eta, predicted_density_conjecture, predicted_density_rk4, Conjecture};
pub use verify::{verify_suite, VerifyReport, SUITES};

use crate::error::{Result, TmodError};
use crate::quadclass::{fundamental_unit, QuadField};
use crate::rayclass::tp_structure_run;
use crate::tmod::{coates_with_unit_prec, rk2_T2, rk4_T2, Method, TpReport};

/// Everything the chosen method determines about `𝒯_p(Q(√m))`.
///
/// `auto` runs every applicable method and checks that they agree.
pub fn compute_report(m: i64, p: u64, choice: MethodChoice, cfg: &Config) -> Result<TpReport> {
    if !crate::arith::is_prime(p) {
        return Err(TmodError::Invalid(format!("p = {p} is not prime")));
    }
    let field = QuadField::new(m)?;
    let mut rep = TpReport::new(m, p);
    let auto = choice == MethodChoice::Auto;
    if p == 2 {
        rep.set_rk2(rk2_T2(&field), Method::Formula)?;
    }
    if p == 2 && field.is_imaginary() && (auto || choice == MethodChoice::Redei) {
        rep.set_rk4(rk4_T2(&field)?, Method::Redei)?;
    }
    if !field.is_imaginary() && (auto || choice == MethodChoice::Coates) {
        let eps = fundamental_unit(m)?;
        rep.set_order_val(coates_with_unit_prec(&field, p, &eps, None, cfg.padic_digits(p))?, Method::Coates)?;
    }
    if auto || choice == MethodChoice::RayClass {
        match tp_structure_run(&field, p, cfg.nmax, 1) {
            Ok(s) => rep.set_structure(s.torsion, Method::RayClass)?,
            Err(TmodError::Unsupported(_)) if auto => {}
            Err(e) => return Err(e),
        }
    }
    if choice == MethodChoice::Redei && !field.is_imaginary() {
        return Err(TmodError::Unsupported("the Rédei route covers imaginary fields".into()));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports() {
        let cfg = Config::default();
        let r = compute_report(-41, 2, MethodChoice::Auto, &cfg).unwrap();
        assert_eq!(r.structure.unwrap().value.to_string(), "Z/4");
        assert_eq!(r.rk4.unwrap().methods, vec![Method::Redei, Method::RayClass]);
        let r = compute_report(223, 2, MethodChoice::Auto, &cfg).unwrap();
        assert_eq!(r.order_val.unwrap().methods, vec![Method::Coates, Method::RayClass]);
        let r = compute_report(10, 2, MethodChoice::Auto, &cfg).unwrap();
        assert!(r.structure.is_none() && r.order_val.is_some());
        assert!(compute_report(10, 2, MethodChoice::RayClass, &cfg).is_err());
        assert!(compute_report(7, 2, MethodChoice::Redei, &cfg).is_err());
        assert!(compute_report(7, 4, MethodChoice::Auto, &cfg).is_err());
    }
}
