//! Core IR data model: modules, functions, regions, blocks, operations.
//!
//! Every dialect and pass in the crate builds on this substrate. The shape is
//! a cut-down region-based SSA IR: a [`Module`] holds functions, a function
//! holds a region of blocks, blocks hold operations, and operations may carry
//! nested regions. Values are function-local SSA ids; the printer renumbers
//! them densely so textual output is stable regardless of how a module was
//! produced.

mod equality;
mod parse;
mod print;
mod rewrite;
pub mod verify;

pub use equality::structurally_equal;
pub use parse::parse_module;
pub use print::print_module;
pub use rewrite::{walk_replace, OpRewrite, ValueGen};

use std::collections::BTreeMap;
use std::fmt;

/// Scalar element kinds usable inside aggregate types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    F32,
    I32,
    I1,
    Index,
}

impl ScalarKind {
    pub fn as_type(self) -> Type {
        match self {
            ScalarKind::F32 => Type::F32,
            ScalarKind::I32 => Type::I32,
            ScalarKind::I1 => Type::I1,
            ScalarKind::Index => Type::Index,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ScalarKind::F32 => "f32",
            ScalarKind::I32 => "i32",
            ScalarKind::I1 => "i1",
            ScalarKind::Index => "index",
        }
    }
}

/// One dimension of a memref shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Fixed(u64),
    Dynamic,
}

/// The type of an SSA value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    F32,
    I32,
    I1,
    Index,
    Memref { shape: Vec<Dim>, elem: ScalarKind },
    Tile(ScalarKind),
    None,
}

impl Type {
    /// Dynamically sized rank-1 memref, the shape arrays lower to.
    pub fn dyn_memref(elem: ScalarKind) -> Type {
        Type::Memref { shape: vec![Dim::Dynamic], elem: elem }
    }

    pub fn tile_f32() -> Type {
        Type::Tile(ScalarKind::F32)
    }

    pub fn is_memref(&self) -> bool {
        matches!(self, Type::Memref { .. })
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::F32 => write!(f, "f32"),
            Type::I32 => write!(f, "i32"),
            Type::I1 => write!(f, "i1"),
            Type::Index => write!(f, "index"),
            Type::Memref { shape, elem } => {
                write!(f, "memref<")?;
                for d in shape {
                    match d {
                        Dim::Fixed(n) => write!(f, "{}x", n)?,
                        Dim::Dynamic => write!(f, "?x")?,
                    }
                }
                write!(f, "{}>", elem.name())
            }
            Type::Tile(elem) => write!(f, "tile<{}>", elem.name()),
            Type::None => write!(f, "none"),
        }
    }
}

/// Attribute values attachable to operations, functions and modules.
///
/// Floats compare by bit pattern so that structural equality stays an
/// equivalence relation even for weird values.
#[derive(Debug, Clone)]
pub enum Attribute {
    Int(i64),
    Float(f64),
    Str(String),
    Sym(String),
    Array(Vec<Attribute>),
    Map(BTreeMap<String, Attribute>),
}

impl PartialEq for Attribute {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Attribute::Int(a), Attribute::Int(b)) => a == b,
            (Attribute::Float(a), Attribute::Float(b)) => a.to_bits() == b.to_bits(),
            (Attribute::Str(a), Attribute::Str(b)) => a == b,
            (Attribute::Sym(a), Attribute::Sym(b)) => a == b,
            (Attribute::Array(a), Attribute::Array(b)) => a == b,
            (Attribute::Map(a), Attribute::Map(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Attribute {}

impl Attribute {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Attribute::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Attribute::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Attribute::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Attribute::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Attribute]> {
        match self {
            Attribute::Array(v) => Some(v),
            _ => None,
        }
    }
}

pub type AttrMap = BTreeMap<String, Attribute>;

/// Function-local SSA value id. Ids are never reused within a function; the
/// printer maps them to dense `%0, %1, ...` numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(pub u32);

/// An SSA value definition: id plus type.
#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    pub id: ValueId,
    pub ty: Type,
}

/// A single operation: `(dialect, name)` resolved against the registry at
/// verification time, plus operands, results, attributes and nested regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    pub dialect: String,
    pub name: String,
    pub operands: Vec<ValueId>,
    pub results: Vec<Value>,
    pub attrs: AttrMap,
    pub regions: Vec<Region>,
}

impl Op {
    pub fn new(dialect: &str, name: &str) -> Op {
        Op {
            dialect: dialect.to_string(),
            name: name.to_string(),
            operands: Vec::new(),
            results: Vec::new(),
            attrs: BTreeMap::new(),
            regions: Vec::new(),
        }
    }

    pub fn with_operands(mut self, operands: Vec<ValueId>) -> Op {
        self.operands = operands;
        self
    }

    pub fn with_results(mut self, results: Vec<Value>) -> Op {
        self.results = results;
        self
    }

    pub fn with_attr(mut self, key: &str, value: Attribute) -> Op {
        self.attrs.insert(key.to_string(), value);
        self
    }

    pub fn with_region(mut self, region: Region) -> Op {
        self.regions.push(region);
        self
    }

    /// `"dialect.name"`, the spelling used in diagnostics.
    pub fn full_name(&self) -> String {
        format!("{}.{}", self.dialect, self.name)
    }

    pub fn is(&self, dialect: &str, name: &str) -> bool {
        self.dialect == dialect && self.name == name
    }

    pub fn result(&self, idx: usize) -> ValueId {
        self.results[idx].id
    }

    pub fn attr(&self, key: &str) -> Option<&Attribute> {
        self.attrs.get(key)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub blocks: Vec<Block>,
}

impl Region {
    pub fn single(block: Block) -> Region {
        Region { blocks: vec![block] }
    }

    pub fn entry(&self) -> &Block {
        &self.blocks[0]
    }

    pub fn entry_mut(&mut self) -> &mut Block {
        &mut self.blocks[0]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub args: Vec<Value>,
    pub ops: Vec<Op>,
}

impl Block {
    pub fn with_args(args: Vec<Value>) -> Block {
        Block { args, ops: Vec::new() }
    }

    pub fn push(&mut self, op: Op) {
        self.ops.push(op);
    }
}

/// A function. The entry block's arguments are the function parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub results: Vec<Type>,
    pub attrs: AttrMap,
    pub region: Region,
    next_value: u32,
}

impl Function {
    pub fn new(name: &str) -> Function {
        Function {
            name: name.to_string(),
            results: Vec::new(),
            attrs: BTreeMap::new(),
            region: Region::single(Block::default()),
            next_value: 0,
        }
    }

    /// Allocate a fresh SSA value of the given type.
    pub fn fresh(&mut self, ty: Type) -> Value {
        let id = ValueId(self.next_value);
        self.next_value += 1;
        Value { id, ty }
    }

    /// Append a parameter to the signature (the entry block's arg list).
    pub fn add_param(&mut self, ty: Type) -> Value {
        let v = self.fresh(ty);
        self.region.entry_mut().args.push(v.clone());
        v
    }

    pub fn params(&self) -> &[Value] {
        &self.region.entry().args
    }

    pub fn entry_block(&self) -> &Block {
        self.region.entry()
    }

    pub fn entry_block_mut(&mut self) -> &mut Block {
        self.region.entry_mut()
    }

    pub fn is_kernel(&self) -> bool {
        self.attrs.contains_key("tt.kernel_kind")
    }

    pub fn kernel_kind(&self) -> Option<&str> {
        self.attrs.get("tt.kernel_kind").and_then(|a| a.as_str())
    }

    /// Parameter names recorded by the frontend in the `args` attribute.
    pub fn param_names(&self) -> Vec<String> {
        match self.attrs.get("args") {
            Some(Attribute::Array(items)) => items
                .iter()
                .map(|a| a.as_str().unwrap_or("").to_string())
                .collect(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn next_value_counter(&self) -> u32 {
        self.next_value
    }

    pub(crate) fn set_next_value_counter(&mut self, n: u32) {
        self.next_value = n;
    }
}

/// Top-level container: an ordered list of functions plus module attributes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Module {
    pub attrs: AttrMap,
    pub functions: Vec<Function>,
}

impl Module {
    pub fn new() -> Module {
        Module::default()
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_mut(&mut self, name: &str) -> Option<&mut Function> {
        self.functions.iter_mut().find(|f| f.name == name)
    }

    /// Dialect names appearing in the module, for census assertions.
    pub fn dialect_census(&self) -> BTreeMap<String, usize> {
        let mut census = BTreeMap::new();
        for func in &self.functions {
            for block in &func.region.blocks {
                census_block(block, &mut census);
            }
        }
        census
    }
}

fn census_block(block: &Block, census: &mut BTreeMap<String, usize>) {
    for op in &block.ops {
        *census.entry(op.dialect.clone()).or_insert(0) += 1;
        for region in &op.regions {
            for b in &region.blocks {
                census_block(b, census);
            }
        }
    }
}

/// Diagnostic severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// Where a diagnostic points: raw source text, an IR position, or the module
/// as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagLoc {
    Module,
    Source { line: u32, col: u32 },
    Ir { func: String, block: usize, op: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub loc: DiagLoc,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, loc: DiagLoc) -> Diagnostic {
        Diagnostic { severity: Severity::Error, message: message.into(), loc }
    }

    pub fn error_at(message: impl Into<String>, line: u32, col: u32) -> Diagnostic {
        Diagnostic::error(message, DiagLoc::Source { line, col })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.loc {
            DiagLoc::Module => write!(f, "{}: {}", sev, self.message),
            DiagLoc::Source { line, col } => {
                write!(f, "{}: line {}, col {}: {}", sev, line, col, self.message)
            }
            DiagLoc::Ir { func, block, op } => {
                write!(f, "{}: @{} block {} op {}: {}", sev, func, block, op, self.message)
            }
        }
    }
}

/// Render a diagnostic list one per line, the form the CLI prints to stderr.
pub fn render_diagnostics(diags: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diags {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}
