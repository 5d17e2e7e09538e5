//! Operator semantics. Integers wrap on overflow; floats follow IEEE 754;
//! string `+` truncates at [`STRING_CAP`](super::value::STRING_CAP).
//!
//! The typed helpers at the bottom are what generated programs call, so both
//! execution modes share one definition of every operation that can differ
//! from plain Rust arithmetic.

use super::value::{truncate, Value};
use super::Fault;
use crate::semantics::ValueType;
use crate::syntax::ast::{BinOp, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpError {
    TypeMismatch,
    DivisionByZero,
}

impl From<OpError> for Fault {
    fn from(e: OpError) -> Self {
        match e {
            OpError::DivisionByZero => Fault::DivisionByZero,
            OpError::TypeMismatch => Fault::TypeMismatch,
        }
    }
}

/// Result type of `a op b`, or `None` when the operand types do not admit
/// the operator. Operand types must match exactly: there is no implicit
/// casting.
pub fn binary_result_type(op: BinOp, a: ValueType, b: ValueType) -> Option<ValueType> {
    use ValueType::*;
    if a != b {
        return None;
    }
    match (op, a) {
        (BinOp::Add, Int | Float | String) => Some(a),
        (BinOp::Sub | BinOp::Mul | BinOp::Div, Int | Float) => Some(a),
        (BinOp::Rem, Int) => Some(Int),
        (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge, Int | Float | String) => Some(Bool),
        (BinOp::Eq | BinOp::Ne, Int | Float | String | Bool) => Some(Bool),
        (BinOp::BitAnd | BinOp::BitOr | BinOp::BitXor, Int | Bool) => Some(a),
        (BinOp::And | BinOp::Or, Bool) => Some(Bool),
        _ => None,
    }
}

pub fn unary_result_type(op: UnOp, a: ValueType) -> Option<ValueType> {
    use ValueType::*;
    match (op, a) {
        (UnOp::Not, Bool) => Some(Bool),
        (UnOp::Neg | UnOp::Plus, Int | Float) => Some(a),
        (UnOp::BitNot, Int) => Some(Int),
        _ => None,
    }
}

/// Apply a binary operator. `&&` and `||` evaluate both operands here; the
/// evaluators short-circuit before calling this.
pub fn binary(op: BinOp, a: &Value, b: &Value) -> Result<Value, OpError> {
    use Value::*;
    Ok(match (a, b) {
        (Int(x), Int(y)) => {
            let (x, y) = (*x, *y);
            match op {
                BinOp::Add => Int(x.wrapping_add(y)),
                BinOp::Sub => Int(x.wrapping_sub(y)),
                BinOp::Mul => Int(x.wrapping_mul(y)),
                BinOp::Div => Int(int_div(x, y)?),
                BinOp::Rem => Int(int_rem(x, y)?),
                BinOp::Lt => Bool(x < y),
                BinOp::Le => Bool(x <= y),
                BinOp::Gt => Bool(x > y),
                BinOp::Ge => Bool(x >= y),
                BinOp::Eq => Bool(x == y),
                BinOp::Ne => Bool(x != y),
                BinOp::BitAnd => Int(x & y),
                BinOp::BitOr => Int(x | y),
                BinOp::BitXor => Int(x ^ y),
                BinOp::And | BinOp::Or => return Err(OpError::TypeMismatch),
            }
        }
        (Float(x), Float(y)) => {
            let (x, y) = (*x, *y);
            match op {
                BinOp::Add => Float(x + y),
                BinOp::Sub => Float(x - y),
                BinOp::Mul => Float(x * y),
                BinOp::Div => Float(x / y),
                BinOp::Lt => Bool(x < y),
                BinOp::Le => Bool(x <= y),
                BinOp::Gt => Bool(x > y),
                BinOp::Ge => Bool(x >= y),
                BinOp::Eq => Bool(x == y),
                BinOp::Ne => Bool(x != y),
                _ => return Err(OpError::TypeMismatch),
            }
        }
        (Str(x), Str(y)) => match op {
            BinOp::Add => Str(concat(x.clone(), y)),
            BinOp::Lt => Bool(x < y),
            BinOp::Le => Bool(x <= y),
            BinOp::Gt => Bool(x > y),
            BinOp::Ge => Bool(x >= y),
            BinOp::Eq => Bool(x == y),
            BinOp::Ne => Bool(x != y),
            _ => return Err(OpError::TypeMismatch),
        },
        (Bool(x), Bool(y)) => {
            let (x, y) = (*x, *y);
            match op {
                BinOp::Eq => Bool(x == y),
                BinOp::Ne => Bool(x != y),
                BinOp::BitAnd | BinOp::And => Bool(x & y),
                BinOp::BitOr | BinOp::Or => Bool(x | y),
                BinOp::BitXor => Bool(x ^ y),
                _ => return Err(OpError::TypeMismatch),
            }
        }
        _ => return Err(OpError::TypeMismatch),
    })
}

pub fn unary(op: UnOp, a: &Value) -> Result<Value, OpError> {
    Ok(match (op, a) {
        (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
        (UnOp::Neg, Value::Int(v)) => Value::Int(v.wrapping_neg()),
        (UnOp::Neg, Value::Float(v)) => Value::Float(-v),
        (UnOp::Plus, v @ (Value::Int(_) | Value::Float(_))) => v.clone(),
        (UnOp::BitNot, Value::Int(v)) => Value::Int(!v),
        _ => return Err(OpError::TypeMismatch),
    })
}

#[inline]
pub fn int_div(a: i64, b: i64) -> Result<i64, OpError> {
    if b == 0 {
        Err(OpError::DivisionByZero)
    } else {
        Ok(a.wrapping_div(b))
    }
}

#[inline]
pub fn int_rem(a: i64, b: i64) -> Result<i64, OpError> {
    if b == 0 {
        Err(OpError::DivisionByZero)
    } else {
        Ok(a.wrapping_rem(b))
    }
}

/// String concatenation with truncation.
#[inline]
pub fn concat(mut a: String, b: &str) -> String {
    a.push_str(b);
    truncate(a)
}
