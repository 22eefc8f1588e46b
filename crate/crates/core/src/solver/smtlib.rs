use std::fmt::Write as _;

use crate::encoder::{ConstraintModel, Expr, VarId};

fn int(out: &mut String, v: i64) {
    if v < 0 {
        let _ = write!(out, "(- {})", v.unsigned_abs());
    } else {
        let _ = write!(out, "{v}");
    }
}

struct Emitter<'a> {
    model: &'a ConstraintModel,
    names: Vec<String>,
}

impl Emitter<'_> {
    fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    fn sum(&self, out: &mut String, terms: &[(i64, VarId)], boolean: bool) {
        if terms.is_empty() {
            out.push('0');
            return;
        }
        if terms.len() > 1 {
            out.push_str("(+");
        }
        for (i, &(c, v)) in terms.iter().enumerate() {
            if terms.len() > 1 || i > 0 {
                out.push(' ');
            }
            let name = self.name(v);
            if boolean {
                out.push_str("(ite ");
                out.push_str(name);
                out.push(' ');
                int(out, c);
                out.push_str(" 0)");
            } else if c == 1 {
                out.push_str(name);
            } else if c == -1 {
                let _ = write!(out, "(- {name})");
            } else {
                out.push_str("(* ");
                int(out, c);
                let _ = write!(out, " {name})");
            }
        }
        if terms.len() > 1 {
            out.push(')');
        }
    }

    fn expr(&self, out: &mut String, e: &Expr) {
        match e {
            Expr::Const(b) => out.push_str(if *b { "true" } else { "false" }),
            Expr::Lit(v, true) => out.push_str(self.name(*v)),
            Expr::Lit(v, false) => {
                let _ = write!(out, "(not {})", self.name(*v));
            }
            Expr::And(xs) | Expr::Or(xs) => {
                let (op, empty) = if matches!(e, Expr::And(_)) { ("and", "true") } else { ("or", "false") };
                match xs.len() {
                    0 => out.push_str(empty),
                    1 => self.expr(out, &xs[0]),
                    _ => {
                        out.push('(');
                        out.push_str(op);
                        for x in xs {
                            out.push(' ');
                            self.expr(out, x);
                        }
                        out.push(')');
                    }
                }
            }
            Expr::Implies(p, q) => {
                out.push_str("(=> ");
                self.expr(out, p);
                out.push(' ');
                self.expr(out, q);
                out.push(')');
            }
            Expr::Linear { terms, cmp, rhs } | Expr::Pseudo { terms, cmp, rhs } => {
                let _ = write!(out, "({} ", cmp.smt());
                self.sum(out, terms, matches!(e, Expr::Pseudo { .. }));
                out.push(' ');
                int(out, *rhs);
                out.push(')');
            }
        }
    }
}

/// Renders the model as a QF_LIA script ending in `(check-sat)` and
/// `(get-model)`. Output depends only on the model.
pub fn to_smtlib(model: &ConstraintModel) -> String {
    let names: Vec<String> = model.vars().iter().map(|k| k.to_string()).collect();
    let em = Emitter { model, names };
    let mut out = String::with_capacity(64 * model.assertions.len() + 40 * model.n_vars());
    out.push_str("(set-logic QF_LIA)\n(set-option :produce-models true)\n");
    let s = &model.shape;
    let _ = writeln!(
        out,
        "; uavs {} points {} horizon {} tc {} tr {} k {}",
        s.n_uavs, s.n_points, s.horizon, s.tc, s.tr, s.k
    );
    for (key, name) in em.model.vars().iter().zip(&em.names) {
        let sort = if key.family.is_int() { "Int" } else { "Bool" };
        let _ = writeln!(out, "(declare-const {name} {sort})");
    }
    let mut group = None;
    for a in &em.model.assertions {
        if group != Some(a.group) {
            group = Some(a.group);
            let _ = writeln!(out, "; {}", a.group.label());
        }
        out.push_str("(assert ");
        em.expr(&mut out, &a.expr);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
