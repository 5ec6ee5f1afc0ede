//! Textual IR printer.
//!
//! Output is deterministic: value numbering is assigned in definition order
//! per function (`%0, %1, ...`), attributes print in sorted key order, and
//! printing the same module twice yields byte-identical text. Dangling value
//! references (possible on unverified modules) print as `<<invalid>>`.

use std::collections::HashMap;
use std::fmt::Write;

use super::{Attribute, Block, Function, Module, Op, Region, Type, ValueId};

pub fn print_module(module: &Module) -> String {
    let mut out = String::new();
    out.push_str("module");
    if !module.attrs.is_empty() {
        out.push(' ');
        print_attrs(&mut out, &module.attrs);
    }
    if module.functions.is_empty() {
        out.push_str(" {\n}\n");
        return out;
    }
    out.push_str(" {\n");
    for func in &module.functions {
        print_function(&mut out, func);
    }
    out.push_str("}\n");
    out
}

struct Numbering {
    values: HashMap<ValueId, (usize, Type)>,
    next_value: usize,
    next_block: usize,
}

impl Numbering {
    fn new() -> Numbering {
        Numbering { values: HashMap::new(), next_value: 0, next_block: 0 }
    }

    fn define(&mut self, id: ValueId, ty: &Type) -> usize {
        let n = self.next_value;
        self.next_value += 1;
        self.values.insert(id, (n, ty.clone()));
        n
    }

    fn number_of(&self, id: ValueId) -> Option<usize> {
        self.values.get(&id).map(|(n, _)| *n)
    }

    fn type_of(&self, id: ValueId) -> Option<&Type> {
        self.values.get(&id).map(|(_, ty)| ty)
    }

    fn block_label(&mut self) -> usize {
        let n = self.next_block;
        self.next_block += 1;
        n
    }
}

fn print_function(out: &mut String, func: &Function) {
    let mut num = Numbering::new();
    write!(out, "  func @{}(", func.name).unwrap();
    let entry = func.entry_block();
    for (i, arg) in entry.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let n = num.define(arg.id, &arg.ty);
        write!(out, "%{}: {}", n, arg.ty).unwrap();
    }
    out.push(')');
    if let Some(result) = func.results.first() {
        write!(out, " -> {}", result).unwrap();
    }
    if !func.attrs.is_empty() {
        out.push(' ');
        print_attrs(out, &func.attrs);
    }
    out.push_str(" {\n");
    for (i, block) in func.region.blocks.iter().enumerate() {
        // The entry block's args already printed in the signature.
        print_block(out, block, i > 0, &mut num, 2);
    }
    out.push_str("  }\n");
}

fn print_block(out: &mut String, block: &Block, with_label: bool, num: &mut Numbering, depth: usize) {
    let indent = "  ".repeat(depth);
    if with_label {
        let label = num.block_label();
        write!(out, "{}^bb{}(", indent, label).unwrap();
        for (i, arg) in block.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let n = num.define(arg.id, &arg.ty);
            write!(out, "%{}: {}", n, arg.ty).unwrap();
        }
        out.push_str("):\n");
    }
    let op_depth = if with_label { depth + 1 } else { depth };
    for op in &block.ops {
        print_op(out, op, num, op_depth);
    }
}

fn print_op(out: &mut String, op: &Op, num: &mut Numbering, depth: usize) {
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    if !op.results.is_empty() {
        for (i, result) in op.results.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let n = num.define(result.id, &result.ty);
            write!(out, "%{}", n).unwrap();
        }
        out.push_str(" = ");
    }
    write!(out, "{}.{}(", op.dialect, op.name).unwrap();
    for (i, operand) in op.operands.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match num.number_of(*operand) {
            Some(n) => write!(out, "%{}", n).unwrap(),
            None => out.push_str("<<invalid>>"),
        }
    }
    out.push(')');
    if !op.attrs.is_empty() {
        out.push(' ');
        print_attrs(out, &op.attrs);
    }
    for region in &op.regions {
        out.push_str(" {\n");
        print_region(out, region, num, depth + 1);
        write!(out, "{}}}", indent).unwrap();
    }
    out.push_str(" : (");
    for (i, operand) in op.operands.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match num.type_of(*operand) {
            Some(ty) => write!(out, "{}", ty).unwrap(),
            None => out.push_str("none"),
        }
    }
    out.push_str(") -> (");
    for (i, result) in op.results.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{}", result.ty).unwrap();
    }
    out.push_str(")\n");
}

fn print_region(out: &mut String, region: &Region, num: &mut Numbering, depth: usize) {
    for (i, block) in region.blocks.iter().enumerate() {
        let with_label = i > 0 || !block.args.is_empty();
        print_block(out, block, with_label, num, depth);
    }
}

fn print_attrs(out: &mut String, attrs: &super::AttrMap) {
    out.push('{');
    for (i, (key, value)) in attrs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{} = ", key).unwrap();
        print_attr(out, value);
    }
    out.push('}');
}

fn print_attr(out: &mut String, attr: &Attribute) {
    match attr {
        Attribute::Int(v) => write!(out, "{}", v).unwrap(),
        Attribute::Float(v) => print_float(out, *v),
        Attribute::Str(s) => print_string(out, s),
        Attribute::Sym(s) => write!(out, "@{}", s).unwrap(),
        Attribute::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_attr(out, item);
            }
            out.push(']');
        }
        Attribute::Map(entries) => {
            out.push('{');
            for (i, (key, value)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{} = ", key).unwrap();
                print_attr(out, value);
            }
            out.push('}');
        }
    }
}

fn print_float(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("nan");
    } else if v == f64::INFINITY {
        out.push_str("inf");
    } else if v == f64::NEG_INFINITY {
        out.push_str("-inf");
    } else {
        // `{:?}` is the shortest representation that round-trips, and always
        // contains '.' or 'e' so the lexer can tell it apart from an integer.
        write!(out, "{:?}", v).unwrap();
    }
}

fn print_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
}
