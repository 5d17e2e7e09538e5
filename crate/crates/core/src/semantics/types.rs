use std::fmt;

use crate::syntax::ast::{DeclType, SectionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    String,
    Int,
    Bool,
    Float,
    Universal,
    Undefined,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::String => "string",
            ValueType::Int => "int",
            ValueType::Bool => "bool",
            ValueType::Float => "float",
            ValueType::Universal => "Universal",
            ValueType::Undefined => "Undefined",
        }
    }

    pub fn is_concrete(self) -> bool {
        !matches!(self, ValueType::Universal | ValueType::Undefined)
    }
}

impl From<DeclType> for ValueType {
    fn from(t: DeclType) -> Self {
        match t {
            DeclType::Int => ValueType::Int,
            DeclType::Float => ValueType::Float,
            DeclType::Bool => ValueType::Bool,
            DeclType::String => ValueType::String,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which rule sections an expression may appear in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExprType {
    Graph,
    Msg,
    External,
    Universal,
    Undefined,
}

impl ExprType {
    pub fn as_str(self) -> &'static str {
        match self {
            ExprType::Graph => "Graph",
            ExprType::Msg => "Msg",
            ExprType::External => "External",
            ExprType::Universal => "Universal",
            ExprType::Undefined => "Undefined",
        }
    }

    /// Component combination: equal kinds stay, `Universal` yields to the
    /// other side, anything else collapses to `Undefined`.
    pub fn combine(self, other: ExprType) -> ExprType {
        match (self, other) {
            (a, b) if a == b => a,
            (ExprType::Universal, b) => b,
            (a, ExprType::Universal) => a,
            _ => ExprType::Undefined,
        }
    }
}

impl From<SectionKind> for ExprType {
    fn from(k: SectionKind) -> Self {
        match k {
            SectionKind::Graph => ExprType::Graph,
            SectionKind::Msg => ExprType::Msg,
            SectionKind::External => ExprType::External,
        }
    }
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The `(ValueType, ExprType)` pair attached to every expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TypeTuple {
    pub value: ValueType,
    pub expr: ExprType,
}

impl TypeTuple {
    pub const fn new(value: ValueType, expr: ExprType) -> Self {
        Self { value, expr }
    }

    pub const fn universal(value: ValueType) -> Self {
        Self::new(value, ExprType::Universal)
    }

    /// Each component must be equal, or one side of it `Universal` or
    /// `Undefined`.
    pub fn compatible(self, other: TypeTuple) -> bool {
        fn vt(a: ValueType, b: ValueType) -> bool {
            a == b || !a.is_concrete() || !b.is_concrete()
        }
        fn et(a: ExprType, b: ExprType) -> bool {
            a == b
                || matches!(a, ExprType::Universal | ExprType::Undefined)
                || matches!(b, ExprType::Universal | ExprType::Undefined)
        }
        vt(self.value, other.value) && et(self.expr, other.expr)
    }

    /// True when neither component is `Undefined`.
    pub fn is_defined(self) -> bool {
        self.value != ValueType::Undefined && self.expr != ExprType::Undefined
    }
}

impl fmt::Display for TypeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.value, self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatibility() {
        let int_u = TypeTuple::universal(ValueType::Int);
        let int_msg = TypeTuple::new(ValueType::Int, ExprType::Msg);
        let int_graph = TypeTuple::new(ValueType::Int, ExprType::Graph);
        let str_u = TypeTuple::universal(ValueType::String);
        assert!(int_u.compatible(int_msg));
        assert!(!int_msg.compatible(int_graph));
        assert!(!int_u.compatible(str_u));
        let undef = TypeTuple::new(ValueType::Undefined, ExprType::Undefined);
        assert!(undef.compatible(int_graph) && undef.compatible(str_u));
        assert!(!undef.is_defined());
    }

    #[test]
    fn combination() {
        assert_eq!(ExprType::Universal.combine(ExprType::Msg), ExprType::Msg);
        assert_eq!(ExprType::Msg.combine(ExprType::Msg), ExprType::Msg);
        assert_eq!(ExprType::Msg.combine(ExprType::Graph), ExprType::Undefined);
    }
}
