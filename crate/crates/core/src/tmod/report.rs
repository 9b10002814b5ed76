use crate::error::{Result, TmodError};
use crate::linalg::AbGroup;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Formula,
    Redei,
    Coates,
    RayClass,
    Classifier,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Formula => "formula",
            Method::Redei => "redei",
            Method::Coates => "coates",
            Method::RayClass => "rayclass",
            Method::Classifier => "classifier",
        })
    }
}

/// A value with the methods that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tagged<T> {
    pub value: T,
    pub methods: Vec<Method>,
}

impl<T: fmt::Display> Tagged<T> {
    fn methods_str(&self) -> String {
        self.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("+")
    }
}

fn fill<T: PartialEq + fmt::Debug>(slot: &mut Option<Tagged<T>>, value: T, method: Method, what: &str) -> Result<()> {
    match slot {
        None => {
            *slot = Some(Tagged { value, methods: vec![method] });
            Ok(())
        }
        Some(t) if t.value == value => {
            if !t.methods.contains(&method) {
                t.methods.push(method);
            }
            Ok(())
        }
        Some(t) => Err(TmodError::Internal(format!(
            "{what}: {method} gives {value:?} but {:?} gives {:?}",
            t.methods, t.value
        ))),
    }
}

/// Invariants of `𝒯_p(Q(√m))` gathered from several methods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TpReport {
    pub m: i64,
    pub p: u64,
    pub rk2: Option<Tagged<usize>>,
    pub rk4: Option<Tagged<usize>>,
    /// `ν_p(t_p)`.
    pub order_val: Option<Tagged<i64>>,
    pub structure: Option<Tagged<AbGroup>>,
}

pub const TP_REPORT_HEADER: &str = "m,p,rk2,rk2_methods,rk4,rk4_methods,order_val,order_methods,structure,structure_methods";

impl TpReport {
    pub fn new(m: i64, p: u64) -> Self {
        TpReport { m, p, rk2: None, rk4: None, order_val: None, structure: None }
    }

    pub fn set_rk2(&mut self, v: usize, method: Method) -> Result<()> {
        fill(&mut self.rk2, v, method, "rk2")
    }

    pub fn set_rk4(&mut self, v: usize, method: Method) -> Result<()> {
        fill(&mut self.rk4, v, method, "rk4")
    }

    pub fn set_order_val(&mut self, v: i64, method: Method) -> Result<()> {
        fill(&mut self.order_val, v, method, "order")
    }

    /// Records a full structure and the ranks and order it determines.
    pub fn set_structure(&mut self, g: AbGroup, method: Method) -> Result<()> {
        let p = self.p;
        self.set_rk2_p(g.rank_divisible(p), method)?;
        if p == 2 {
            self.set_rk4(g.rank_divisible(4), method)?;
        }
        let order = g.order();
        let mut v = 0i64;
        let mut n = order;
        while n.is_multiple_of(p as u128) {
            n /= p as u128;
            v += 1;
        }
        self.set_order_val(v, method)?;
        fill(&mut self.structure, g, method, "structure")
    }

    fn set_rk2_p(&mut self, v: usize, method: Method) -> Result<()> {
        if self.p == 2 {
            self.set_rk2(v, method)
        } else {
            Ok(())
        }
    }

    pub fn csv_row(&self) -> String {
        fn cell<T: fmt::Display>(t: &Option<Tagged<T>>) -> (String, String) {
            match t {
                Some(t) => (t.value.to_string(), t.methods_str()),
                None => (String::new(), String::new()),
            }
        }
        let (a, am) = cell(&self.rk2);
        let (b, bm) = cell(&self.rk4);
        let (c, cm) = cell(&self.order_val);
        let (d, dm) = cell(&self.structure);
        format!("{},{},{a},{am},{b},{bm},{c},{cm},{d},{dm}", self.m, self.p)
    }

    pub fn text_block(&self) -> String {
        let mut s = format!("T_{}(Q(sqrt({})))\n", self.p, self.m);
        let mut line = |name: &str, v: Option<(String, String)>| {
            if let Some((val, meth)) = v {
                s.push_str(&format!("  {name:<10} {val}  [{meth}]\n"));
            }
        };
        line("rk2", self.rk2.as_ref().map(|t| (t.value.to_string(), t.methods_str())));
        line("rk4", self.rk4.as_ref().map(|t| (t.value.to_string(), t.methods_str())));
        line("log_p t_p", self.order_val.as_ref().map(|t| (t.value.to_string(), t.methods_str())));
        line("structure", self.structure.as_ref().map(|t| (t.value.to_string(), t.methods_str())));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agreement_enforced() {
        let mut r = TpReport::new(-41, 2);
        r.set_rk2(1, Method::Formula).unwrap();
        r.set_structure(AbGroup::from_cyclic_orders(&[4]), Method::RayClass).unwrap();
        assert_eq!(r.rk2.as_ref().unwrap().methods, vec![Method::Formula, Method::RayClass]);
        assert_eq!(r.order_val.as_ref().unwrap().value, 2);
        assert!(r.set_rk4(0, Method::Redei).is_err());
        assert_eq!(r.csv_row().split(',').count(), TP_REPORT_HEADER.split(',').count());
    }
}
