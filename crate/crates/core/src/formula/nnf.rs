use thiserror::Error;

use super::{format_formula, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnfError {
    /// A `box`/`dia`/`diaMQ` node sits where a negation would have to be
    /// pushed through it. Atomize first.
    #[error("negation cannot be pushed through modal operator in {}", format_formula(.0))]
    ModalUnderNegation(Formula),
}

/// Negation normal form: only `&` and `|` over literals.
///
/// `B(..)` and `K(..)` nodes are treated as opaque atoms, as are unnegated
/// `box`/`dia`/`diaMQ` nodes. Their contents are left untouched.
pub fn to_nnf(f: &Formula) -> Result<Formula, NnfError> {
    nnf(f, false)
}

fn nnf(f: &Formula, negated: bool) -> Result<Formula, NnfError> {
    use Formula::*;
    let lit = |f: &Formula| if negated { Formula::not(f.clone()) } else { f.clone() };
    Ok(match f {
        Atom(_) | Believes(..) | Knows(..) => lit(f),
        Nec(_) | Poss(_) | PossMq(_) => {
            if negated {
                return Err(NnfError::ModalUnderNegation(f.clone()));
            }
            f.clone()
        }
        Not(inner) => nnf(inner, !negated)?,
        And(a, b) if negated => Formula::or(nnf(a, true)?, nnf(b, true)?),
        And(a, b) => Formula::and(nnf(a, false)?, nnf(b, false)?),
        Or(a, b) if negated => Formula::and(nnf(a, true)?, nnf(b, true)?),
        Or(a, b) => Formula::or(nnf(a, false)?, nnf(b, false)?),
        Implies(a, b) if negated => Formula::and(nnf(a, false)?, nnf(b, true)?),
        Implies(a, b) => Formula::or(nnf(a, true)?, nnf(b, false)?),
        Iff(a, b) if negated => {
            Formula::or(Formula::and(nnf(a, false)?, nnf(b, true)?), Formula::and(nnf(a, true)?, nnf(b, false)?))
        }
        Iff(a, b) => {
            Formula::or(Formula::and(nnf(a, false)?, nnf(b, false)?), Formula::and(nnf(a, true)?, nnf(b, true)?))
        }
    })
}

/// True when `f` is already in negation normal form.
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::And(a, b) | Formula::Or(a, b) => is_nnf(a) && is_nnf(b),
        other => other.is_literal(),
    }
}
