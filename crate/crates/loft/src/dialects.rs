//! Dialect registry: declarative schemas and verifier rules for every
//! operation the pipeline can produce.
//!
//! Namespaces:
//! - `ftn`: surface dialect for the Fortran subset
//! - `func`/`arith`/`scf`/`memref`: standard-dialect subset
//! - `offload`: target-offload construct carrying clause attributes
//! - `tt_host`: host-side runtime vocabulary (buffers, CBs, kernels, launch)
//! - `tt_dm` / `tt_cb` / `tt_compute`: device-side engines — data movement,
//!   circular buffers between engines, and tile compute

use std::collections::HashMap;

use crate::ir::{
    Attribute, DiagLoc, Diagnostic, Function, Module, Op, ScalarKind, Type, ValueId,
};

/// Where an op may appear: host functions, kernel functions, or anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpContext {
    Host,
    Device,
    Any,
}

/// Loose type requirement for one operand or result slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypePattern {
    F32,
    I32,
    I1,
    Index,
    /// i32 or index.
    AnyInt,
    /// Any scalar: f32, i32, i1 or index.
    AnyScalar,
    AnyMemref,
    Tile,
    Any,
}

impl TypePattern {
    pub fn matches(&self, ty: &Type) -> bool {
        match self {
            TypePattern::F32 => *ty == Type::F32,
            TypePattern::I32 => *ty == Type::I32,
            TypePattern::I1 => *ty == Type::I1,
            TypePattern::Index => *ty == Type::Index,
            TypePattern::AnyInt => matches!(ty, Type::I32 | Type::Index),
            TypePattern::AnyScalar => {
                matches!(ty, Type::F32 | Type::I32 | Type::I1 | Type::Index)
            }
            TypePattern::AnyMemref => ty.is_memref(),
            TypePattern::Tile => matches!(ty, Type::Tile(_)),
            TypePattern::Any => true,
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            TypePattern::F32 => "f32",
            TypePattern::I32 => "i32",
            TypePattern::I1 => "i1",
            TypePattern::Index => "index",
            TypePattern::AnyInt => "i32 or index",
            TypePattern::AnyScalar => "scalar",
            TypePattern::AnyMemref => "memref",
            TypePattern::Tile => "tile",
            TypePattern::Any => "any",
        }
    }
}

#[derive(Debug, Clone)]
pub enum OperandSpec {
    Fixed(Vec<TypePattern>),
    /// Arity checked by the op's extra rule instead.
    Variadic,
}

#[derive(Debug, Clone)]
pub enum ResultSpec {
    Fixed(Vec<TypePattern>),
    Variadic,
}

/// Expected kind for a required attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Int,
    Float,
    Str,
    Sym,
    Array,
    Any,
}

impl AttrKind {
    fn matches(&self, attr: &Attribute) -> bool {
        match self {
            AttrKind::Int => matches!(attr, Attribute::Int(_)),
            AttrKind::Float => matches!(attr, Attribute::Float(_)),
            AttrKind::Str => matches!(attr, Attribute::Str(_)),
            AttrKind::Sym => matches!(attr, Attribute::Sym(_)),
            AttrKind::Array => matches!(attr, Attribute::Array(_)),
            AttrKind::Any => true,
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            AttrKind::Int => "integer",
            AttrKind::Float => "float",
            AttrKind::Str => "string",
            AttrKind::Sym => "symbol",
            AttrKind::Array => "array",
            AttrKind::Any => "any",
        }
    }
}

/// Extra verifier rule identifiers, dispatched in [`verify_op`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    SubroutineBody,
    DoLoopBody,
    FtnAccess,
    FtnEndPlacement,
    ReturnSignature,
    CallSignature,
    ConstantValue,
    SameIntTypes,
    CmpPredicate,
    IndexCast,
    ForBody,
    YieldPlacement,
    AllocShape,
    MemrefAccess,
    OffloadTarget,
    CreateCb,
    CreateKernel,
    SetRuntimeArgs,
    CbCount,
}

/// Schema for one operation.
#[derive(Debug, Clone)]
pub struct OpSpec {
    pub dialect: &'static str,
    pub name: &'static str,
    pub operands: OperandSpec,
    pub results: ResultSpec,
    /// (name, kind, required)
    pub attrs: Vec<(&'static str, AttrKind, bool)>,
    pub regions: usize,
    pub context: OpContext,
    pub rule: Option<Rule>,
}

impl OpSpec {
    fn new(dialect: &'static str, name: &'static str) -> OpSpec {
        OpSpec {
            dialect,
            name,
            operands: OperandSpec::Fixed(Vec::new()),
            results: ResultSpec::Fixed(Vec::new()),
            attrs: Vec::new(),
            regions: 0,
            context: OpContext::Any,
            rule: None,
        }
    }

    fn operands(mut self, patterns: &[TypePattern]) -> OpSpec {
        self.operands = OperandSpec::Fixed(patterns.to_vec());
        self
    }

    fn variadic_operands(mut self) -> OpSpec {
        self.operands = OperandSpec::Variadic;
        self
    }

    fn results(mut self, patterns: &[TypePattern]) -> OpSpec {
        self.results = ResultSpec::Fixed(patterns.to_vec());
        self
    }

    fn variadic_results(mut self) -> OpSpec {
        self.results = ResultSpec::Variadic;
        self
    }

    fn attr(mut self, name: &'static str, kind: AttrKind) -> OpSpec {
        self.attrs.push((name, kind, true));
        self
    }

    fn opt_attr(mut self, name: &'static str, kind: AttrKind) -> OpSpec {
        self.attrs.push((name, kind, false));
        self
    }

    fn regions(mut self, n: usize) -> OpSpec {
        self.regions = n;
        self
    }

    fn context(mut self, ctx: OpContext) -> OpSpec {
        self.context = ctx;
        self
    }

    fn rule(mut self, rule: Rule) -> OpSpec {
        self.rule = Some(rule);
        self
    }
}

/// All registered dialect namespaces, in registration order.
pub const DIALECT_NAMES: [&str; 10] = [
    "ftn", "func", "arith", "scf", "memref", "offload", "tt_host", "tt_dm", "tt_cb",
    "tt_compute",
];

/// Immutable op schema registry; safe for concurrent lookup.
pub struct DialectRegistry {
    specs: HashMap<(&'static str, &'static str), OpSpec>,
}

impl DialectRegistry {
    pub fn lookup(&self, dialect: &str, name: &str) -> Option<&OpSpec> {
        self.specs.get(&(dialect, name))
    }

    pub fn all_specs(&self) -> impl Iterator<Item = &OpSpec> {
        self.specs.values()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

/// Build the registry holding every builtin dialect.
pub fn register_builtin_dialects() -> DialectRegistry {
    use AttrKind as K;
    use OpContext::{Device, Host};
    use TypePattern::*;

    let mut specs = Vec::new();

    // ftn: surface dialect
    specs.push(
        OpSpec::new("ftn", "subroutine")
            .attr("name", K::Str)
            .regions(1)
            .rule(Rule::SubroutineBody),
    );
    specs.push(
        OpSpec::new("ftn", "do_loop")
            .operands(&[Index, Index, Index])
            .regions(1)
            .rule(Rule::DoLoopBody),
    );
    specs.push(
        OpSpec::new("ftn", "load")
            .operands(&[AnyMemref, Index])
            .results(&[F32])
            .rule(Rule::FtnAccess),
    );
    specs.push(
        OpSpec::new("ftn", "store")
            .operands(&[F32, AnyMemref, Index])
            .rule(Rule::FtnAccess),
    );
    specs.push(OpSpec::new("ftn", "end").rule(Rule::FtnEndPlacement));

    // func
    specs.push(OpSpec::new("func", "return").variadic_operands().rule(Rule::ReturnSignature));
    specs.push(
        OpSpec::new("func", "call")
            .variadic_operands()
            .variadic_results()
            .attr("callee", K::Sym)
            .rule(Rule::CallSignature),
    );

    // arith
    specs.push(
        OpSpec::new("arith", "constant")
            .results(&[AnyScalar])
            .attr("value", K::Any)
            .rule(Rule::ConstantValue),
    );
    for name in ["addf", "subf", "mulf", "divf"] {
        specs.push(OpSpec::new("arith", name).operands(&[F32, F32]).results(&[F32]));
    }
    for name in ["addi", "muli"] {
        specs.push(
            OpSpec::new("arith", name)
                .operands(&[AnyInt, AnyInt])
                .results(&[AnyInt])
                .rule(Rule::SameIntTypes),
        );
    }
    specs.push(
        OpSpec::new("arith", "cmpi")
            .operands(&[AnyInt, AnyInt])
            .results(&[I1])
            .attr("predicate", K::Str)
            .rule(Rule::CmpPredicate),
    );
    specs.push(
        OpSpec::new("arith", "index_cast")
            .operands(&[AnyInt])
            .results(&[AnyInt])
            .rule(Rule::IndexCast),
    );

    // scf
    specs.push(
        OpSpec::new("scf", "for")
            .operands(&[Index, Index, Index])
            .regions(1)
            .rule(Rule::ForBody),
    );
    specs.push(OpSpec::new("scf", "yield").rule(Rule::YieldPlacement));

    // memref
    specs.push(
        OpSpec::new("memref", "alloc")
            .variadic_operands()
            .results(&[AnyMemref])
            .rule(Rule::AllocShape),
    );
    specs.push(
        OpSpec::new("memref", "load")
            .variadic_operands()
            .results(&[AnyScalar])
            .rule(Rule::MemrefAccess),
    );
    specs.push(OpSpec::new("memref", "store").variadic_operands().rule(Rule::MemrefAccess));
    specs.push(OpSpec::new("memref", "dim").operands(&[AnyMemref, Index]).results(&[Index]));

    // offload
    specs.push(
        OpSpec::new("offload", "target")
            .variadic_operands()
            .regions(1)
            .attr("num_teams", K::Int)
            .attr("map_to", K::Array)
            .attr("map_from", K::Array)
            .attr("map_tofrom", K::Array)
            .opt_attr("num_threads", K::Int)
            .opt_attr("simdlen", K::Int)
            .rule(Rule::OffloadTarget),
    );

    // tt_host
    specs.push(OpSpec::new("tt_host", "open_device").results(&[I32]).context(Host));
    specs.push(
        OpSpec::new("tt_host", "create_buffer").operands(&[I32]).results(&[I32]).context(Host),
    );
    specs.push(
        OpSpec::new("tt_host", "write_buffer")
            .operands(&[I32])
            .attr("array", K::Str)
            .context(Host),
    );
    specs.push(
        OpSpec::new("tt_host", "read_buffer")
            .operands(&[I32])
            .attr("array", K::Str)
            .context(Host),
    );
    specs.push(
        OpSpec::new("tt_host", "create_cb")
            .attr("cores", K::Array)
            .attr("cb_id", K::Int)
            .attr("capacity", K::Int)
            .context(Host)
            .rule(Rule::CreateCb),
    );
    specs.push(
        OpSpec::new("tt_host", "create_kernel")
            .attr("cores", K::Array)
            .attr("kind", K::Str)
            .attr("sym", K::Sym)
            .context(Host)
            .rule(Rule::CreateKernel),
    );
    specs.push(
        OpSpec::new("tt_host", "set_runtime_args")
            .variadic_operands()
            .attr("core", K::Int)
            .attr("sym", K::Sym)
            .attr("layout", K::Array)
            .opt_attr("count_operand", K::Int)
            .opt_attr("active_cores", K::Int)
            .context(Host)
            .rule(Rule::SetRuntimeArgs),
    );
    specs.push(OpSpec::new("tt_host", "launch").context(Host));
    specs.push(OpSpec::new("tt_host", "wait").context(Host));
    specs.push(OpSpec::new("tt_host", "close_device").context(Host));

    // tt_dm
    specs.push(
        OpSpec::new("tt_dm", "read_tile")
            .operands(&[I32, I32])
            .attr("cb", K::Int)
            .attr("pad", K::Float)
            .context(Device),
    );
    specs.push(
        OpSpec::new("tt_dm", "write_tile")
            .operands(&[I32, I32])
            .attr("cb", K::Int)
            .context(Device),
    );
    specs.push(OpSpec::new("tt_dm", "barrier").context(Device));

    // tt_cb
    for name in ["reserve", "push", "wait", "pop"] {
        specs.push(
            OpSpec::new("tt_cb", name)
                .attr("cb", K::Int)
                .attr("n", K::Int)
                .context(Device)
                .rule(Rule::CbCount),
        );
    }
    specs.push(
        OpSpec::new("tt_cb", "write_slot").results(&[Tile]).attr("cb", K::Int).context(Device),
    );
    specs.push(
        OpSpec::new("tt_cb", "read_slot").results(&[Tile]).attr("cb", K::Int).context(Device),
    );

    // tt_compute
    specs.push(OpSpec::new("tt_compute", "init").context(Device));
    specs.push(
        OpSpec::new("tt_compute", "copy_in").results(&[Tile]).attr("cb", K::Int).context(Device),
    );
    for name in ["add_tiles", "mul_tiles", "sub_tiles", "div_tiles"] {
        specs.push(
            OpSpec::new("tt_compute", name)
                .operands(&[Tile, Tile])
                .results(&[Tile])
                .context(Device),
        );
    }
    for name in [
        "mul_scalar",
        "add_scalar",
        "sub_scalar",
        "div_scalar",
        "rsub_scalar",
        "rdiv_scalar",
    ] {
        specs.push(
            OpSpec::new("tt_compute", name)
                .operands(&[Tile, F32])
                .results(&[Tile])
                .context(Device),
        );
    }
    specs.push(OpSpec::new("tt_compute", "splat").operands(&[F32]).results(&[Tile]).context(Device));
    specs.push(
        OpSpec::new("tt_compute", "pack_out")
            .operands(&[Tile])
            .attr("cb", K::Int)
            .context(Device),
    );

    let mut map = HashMap::new();
    for spec in specs {
        let key = (spec.dialect, spec.name);
        let prev = map.insert(key, spec);
        assert!(prev.is_none(), "duplicate op registration {:?}", key);
    }
    DialectRegistry { specs: map }
}

/// IR-level shapes of the runtime ABI calls produced by host lowering.
/// (name, fixed operand patterns or None for variadic, result patterns)
pub const RUNTIME_ABI: [(&str, Option<&[TypePattern]>, &[TypePattern]); 10] = [
    ("tt_rt_open_device", Some(&[]), &[TypePattern::I32]),
    ("tt_rt_create_buffer", Some(&[TypePattern::I32]), &[TypePattern::I32]),
    ("tt_rt_write_buffer", Some(&[TypePattern::I32]), &[]),
    ("tt_rt_read_buffer", Some(&[TypePattern::I32]), &[]),
    ("tt_rt_create_cb", Some(&[]), &[]),
    ("tt_rt_create_kernel", Some(&[]), &[]),
    ("tt_rt_set_runtime_args", None, &[]),
    ("tt_rt_launch", Some(&[]), &[]),
    ("tt_rt_wait", Some(&[]), &[]),
    ("tt_rt_close_device", Some(&[]), &[]),
];

pub fn runtime_abi(name: &str) -> Option<&'static (&'static str, Option<&'static [TypePattern]>, &'static [TypePattern])> {
    RUNTIME_ABI.iter().find(|(n, _, _)| *n == name)
}

/// Kernel kinds in scheduling order.
pub const KERNEL_KINDS: [&str; 3] = ["reader", "compute", "writer"];

/// Context handed to [`verify_op`]: everything a rule can need about the
/// op's surroundings.
pub struct VerifyCtx<'a> {
    pub module: &'a Module,
    pub func: &'a Function,
    /// Set when the enclosing function carries `tt.kernel_kind`.
    pub kernel_kind: Option<&'a str>,
    /// Enclosing op (dialect, name), if the op sits inside a region.
    pub parent: Option<(&'a str, &'a str)>,
    /// True when the op is the last of its block.
    pub is_last_in_block: bool,
    pub types: &'a HashMap<ValueId, Type>,
    pub loc: DiagLoc,
}

impl<'a> VerifyCtx<'a> {
    fn error(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic::error(message, self.loc.clone())
    }

    fn operand_type(&self, op: &Op, idx: usize) -> Option<&Type> {
        op.operands.get(idx).and_then(|id| self.types.get(id))
    }
}

/// Check one op against its schema: arity, type patterns, required
/// attributes, region count, context rule, then the op's extra rule.
pub fn verify_op(op: &Op, spec: &OpSpec, ctx: &VerifyCtx) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if let OperandSpec::Fixed(patterns) = &spec.operands {
        if op.operands.len() != patterns.len() {
            diags.push(ctx.error(format!(
                "operand count mismatch for '{}': expected {}, got {}",
                op.full_name(),
                patterns.len(),
                op.operands.len()
            )));
        } else {
            for (i, pattern) in patterns.iter().enumerate() {
                if let Some(ty) = ctx.operand_type(op, i) {
                    if !pattern.matches(ty) {
                        diags.push(ctx.error(format!(
                            "operand {} of '{}' has type {}, expected {}",
                            i,
                            op.full_name(),
                            ty,
                            pattern.describe()
                        )));
                    }
                }
            }
        }
    }
    if let ResultSpec::Fixed(patterns) = &spec.results {
        if op.results.len() != patterns.len() {
            diags.push(ctx.error(format!(
                "result count mismatch for '{}': expected {}, got {}",
                op.full_name(),
                patterns.len(),
                op.results.len()
            )));
        } else {
            for (i, pattern) in patterns.iter().enumerate() {
                if !pattern.matches(&op.results[i].ty) {
                    diags.push(ctx.error(format!(
                        "result {} of '{}' has type {}, expected {}",
                        i,
                        op.full_name(),
                        op.results[i].ty,
                        pattern.describe()
                    )));
                }
            }
        }
    }

    for (name, kind, required) in &spec.attrs {
        match op.attrs.get(*name) {
            Some(attr) => {
                if !kind.matches(attr) {
                    diags.push(ctx.error(format!(
                        "attribute '{}' of '{}' must be {}",
                        name,
                        op.full_name(),
                        kind.describe()
                    )));
                }
            }
            None if *required => {
                diags.push(ctx.error(format!(
                    "missing attribute '{}' on '{}'",
                    name,
                    op.full_name()
                )));
            }
            None => {}
        }
    }

    if op.regions.len() != spec.regions {
        diags.push(ctx.error(format!(
            "region count mismatch for '{}': expected {}, got {}",
            op.full_name(),
            spec.regions,
            op.regions.len()
        )));
    }

    match spec.context {
        OpContext::Device if ctx.kernel_kind.is_none() => {
            diags.push(ctx.error(format!(
                "op not allowed in host context: '{}'",
                op.full_name()
            )));
        }
        OpContext::Host if ctx.kernel_kind.is_some() => {
            diags.push(ctx.error(format!(
                "op not allowed in device context: '{}'",
                op.full_name()
            )));
        }
        _ => {}
    }

    if let Some(rule) = spec.rule {
        // Structural prerequisites already reported? Run rules anyway; they
        // guard their own indexing.
        diags.extend(check_rule(rule, op, ctx));
    }
    diags
}

fn check_rule(rule: Rule, op: &Op, ctx: &VerifyCtx) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    match rule {
        Rule::SubroutineBody => {
            if let Some(region) = op.regions.first() {
                if region.blocks.len() != 1 {
                    diags.push(ctx.error("ftn.subroutine region must have one block"));
                } else if !matches!(region.entry().ops.last(), Some(last) if last.is("ftn", "end"))
                {
                    diags.push(ctx.error("ftn.subroutine body must end with ftn.end"));
                }
            }
        }
        Rule::DoLoopBody => {
            if let Some(region) = op.regions.first() {
                let block = match region.blocks.as_slice() {
                    [block] => block,
                    _ => {
                        diags.push(ctx.error("ftn.do_loop region must have one block"));
                        return diags;
                    }
                };
                if block.args.len() != 1 || block.args[0].ty != Type::Index {
                    diags.push(ctx.error("ftn.do_loop block must take one index argument"));
                }
                if !matches!(block.ops.last(), Some(last) if last.is("ftn", "end")) {
                    diags.push(ctx.error("ftn.do_loop body must end with ftn.end"));
                }
            }
        }
        Rule::FtnAccess => {
            let memref_idx = if op.name == "load" { 0 } else { 1 };
            if let Some(Type::Memref { shape, elem }) = ctx.operand_type(op, memref_idx) {
                if shape.len() != 1 {
                    diags.push(ctx.error(format!("'{}' requires a rank-1 memref", op.full_name())));
                }
                if *elem != ScalarKind::F32 {
                    diags.push(ctx.error(format!(
                        "'{}' requires an f32 memref, got element kind {}",
                        op.full_name(),
                        elem.as_type()
                    )));
                }
            }
        }
        Rule::FtnEndPlacement => {
            let ok = matches!(ctx.parent, Some(("ftn", "do_loop")) | Some(("ftn", "subroutine")))
                && ctx.is_last_in_block;
            if !ok {
                diags.push(ctx.error(
                    "ftn.end must terminate an ftn.do_loop or ftn.subroutine region",
                ));
            }
        }
        Rule::ReturnSignature => {
            if ctx.parent.is_some() {
                diags.push(ctx.error("func.return must appear at function top level"));
            }
            let expected = &ctx.func.results;
            if op.operands.len() != expected.len() {
                diags.push(ctx.error(format!(
                    "func.return returns {} values but function declares {}",
                    op.operands.len(),
                    expected.len()
                )));
            } else {
                for (i, ty) in expected.iter().enumerate() {
                    if let Some(actual) = ctx.operand_type(op, i) {
                        if actual != ty {
                            diags.push(ctx.error(format!(
                                "func.return operand {} has type {}, function declares {}",
                                i, actual, ty
                            )));
                        }
                    }
                }
            }
        }
        Rule::CallSignature => {
            let callee = match op.attr("callee").and_then(|a| a.as_sym()) {
                Some(sym) => sym,
                None => return diags,
            };
            if let Some((_, operands, results)) = runtime_abi(callee) {
                if let Some(patterns) = operands {
                    if op.operands.len() != patterns.len() {
                        diags.push(ctx.error(format!(
                            "call to @{} takes {} operands, got {}",
                            callee,
                            patterns.len(),
                            op.operands.len()
                        )));
                    }
                } else {
                    // Variadic runtime args: i32s then f32s.
                    let mut seen_float = false;
                    for (i, id) in op.operands.iter().enumerate() {
                        match ctx.types.get(id) {
                            Some(Type::F32) => seen_float = true,
                            Some(Type::I32) => {
                                if seen_float {
                                    diags.push(ctx.error(format!(
                                        "call to @{}: i32 operand {} after f32 operands",
                                        callee, i
                                    )));
                                }
                            }
                            Some(other) => diags.push(ctx.error(format!(
                                "call to @{}: operand {} has type {}, expected i32 or f32",
                                callee, i, other
                            ))),
                            None => {}
                        }
                    }
                }
                if op.results.len() != results.len() {
                    diags.push(ctx.error(format!(
                        "call to @{} produces {} results, got {}",
                        callee,
                        results.len(),
                        op.results.len()
                    )));
                }
            } else if let Some(target) = ctx.module.function(callee) {
                let params = target.params();
                if op.operands.len() != params.len() {
                    diags.push(ctx.error(format!(
                        "call to @{} takes {} operands, got {}",
                        callee,
                        params.len(),
                        op.operands.len()
                    )));
                } else {
                    for (i, param) in params.iter().enumerate() {
                        if let Some(actual) = ctx.operand_type(op, i) {
                            if *actual != param.ty {
                                diags.push(ctx.error(format!(
                                    "call to @{}: operand {} has type {}, expected {}",
                                    callee, i, actual, param.ty
                                )));
                            }
                        }
                    }
                }
                if op.results.len() != target.results.len() {
                    diags.push(ctx.error(format!(
                        "call to @{} produces {} results, got {}",
                        callee,
                        target.results.len(),
                        op.results.len()
                    )));
                }
            } else {
                diags.push(ctx.error(format!("unknown callee @{}", callee)));
            }
        }
        Rule::ConstantValue => {
            let (attr, result_ty) = match (op.attr("value"), op.results.first()) {
                (Some(a), Some(r)) => (a, &r.ty),
                _ => return diags,
            };
            let ok = match result_ty {
                Type::F32 => matches!(attr, Attribute::Float(_)),
                Type::I32 | Type::Index => matches!(attr, Attribute::Int(_)),
                Type::I1 => matches!(attr, Attribute::Int(0) | Attribute::Int(1)),
                _ => false,
            };
            if !ok {
                diags.push(ctx.error(format!(
                    "arith.constant value attribute does not fit result type {}",
                    result_ty
                )));
            }
        }
        Rule::SameIntTypes => {
            let tys: Vec<Option<&Type>> =
                (0..op.operands.len()).map(|i| ctx.operand_type(op, i)).collect();
            if let (Some(Some(a)), Some(Some(b)), Some(r)) =
                (tys.first(), tys.get(1), op.results.first())
            {
                if a != b || *a != &r.ty {
                    diags.push(ctx.error(format!(
                        "'{}' requires matching integer operand and result types",
                        op.full_name()
                    )));
                }
            }
        }
        Rule::CmpPredicate => {
            if let Some(pred) = op.attr("predicate").and_then(|a| a.as_str()) {
                const PREDS: [&str; 6] = ["eq", "ne", "slt", "sle", "sgt", "sge"];
                if !PREDS.contains(&pred) {
                    diags.push(ctx.error(format!("unknown cmpi predicate '{}'", pred)));
                }
            }
            if let (Some(a), Some(b)) = (ctx.operand_type(op, 0), ctx.operand_type(op, 1)) {
                if a != b {
                    diags.push(ctx.error("arith.cmpi operands must have the same type"));
                }
            }
        }
        Rule::IndexCast => {
            if let (Some(src), Some(dst)) = (ctx.operand_type(op, 0), op.results.first()) {
                let ok = matches!(
                    (src, &dst.ty),
                    (Type::I32, Type::Index) | (Type::Index, Type::I32)
                );
                if !ok {
                    diags.push(
                        ctx.error("arith.index_cast converts between i32 and index only"),
                    );
                }
            }
        }
        Rule::ForBody => {
            if let Some(region) = op.regions.first() {
                let block = match region.blocks.as_slice() {
                    [block] => block,
                    _ => {
                        diags.push(ctx.error("scf.for region must have one block"));
                        return diags;
                    }
                };
                if block.args.len() != 1 || block.args[0].ty != Type::Index {
                    diags.push(ctx.error("scf.for block must take one index argument"));
                }
                if !matches!(block.ops.last(), Some(last) if last.is("scf", "yield")) {
                    diags.push(ctx.error("scf.for body must end with scf.yield"));
                }
            }
        }
        Rule::YieldPlacement => {
            let ok = matches!(ctx.parent, Some(("scf", "for"))) && ctx.is_last_in_block;
            if !ok {
                diags.push(ctx.error("scf.yield must terminate an scf.for region"));
            }
        }
        Rule::AllocShape => {
            if let Some(Valueimpl @ Type::Memref { shape, .. }) = op.results.first().map(|r| &r.ty)
            {
                let _ = Valueimpl;
                let dynamic = shape
                    .iter()
                    .filter(|d| matches!(d, crate::ir::Dim::Dynamic))
                    .count();
                if op.operands.len() != dynamic {
                    diags.push(ctx.error(format!(
                        "memref.alloc takes one index per dynamic dimension ({}), got {}",
                        dynamic,
                        op.operands.len()
                    )));
                }
                for (i, id) in op.operands.iter().enumerate() {
                    if let Some(ty) = ctx.types.get(id) {
                        if *ty != Type::Index {
                            diags.push(ctx.error(format!(
                                "memref.alloc operand {} must be index, got {}",
                                i, ty
                            )));
                        }
                    }
                }
            }
        }
        Rule::MemrefAccess => {
            // load: (memref, idx...) -> elem ; store: (value, memref, idx...)
            let memref_idx = if op.name == "load" { 0 } else { 1 };
            let ty = match ctx.operand_type(op, memref_idx) {
                Some(t) => t.clone(),
                None => {
                    diags.push(ctx.error(format!(
                        "'{}' requires a memref operand",
                        op.full_name()
                    )));
                    return diags;
                }
            };
            let (shape, elem) = match ty {
                Type::Memref { shape, elem } => (shape, elem),
                other => {
                    diags.push(ctx.error(format!(
                        "'{}' operand {} must be a memref, got {}",
                        op.full_name(),
                        memref_idx,
                        other
                    )));
                    return diags;
                }
            };
            let expected_operands = memref_idx + 1 + shape.len();
            if op.operands.len() != expected_operands {
                diags.push(ctx.error(format!(
                    "'{}' on rank-{} memref takes {} operands, got {}",
                    op.full_name(),
                    shape.len(),
                    expected_operands,
                    op.operands.len()
                )));
                return diags;
            }
            for i in (memref_idx + 1)..op.operands.len() {
                if let Some(ty) = ctx.operand_type(op, i) {
                    if *ty != Type::Index {
                        diags.push(ctx.error(format!(
                            "'{}' index operand {} must be index, got {}",
                            op.full_name(),
                            i,
                            ty
                        )));
                    }
                }
            }
            let elem_ty = elem.as_type();
            if op.name == "load" {
                if let Some(result) = op.results.first() {
                    if result.ty != elem_ty {
                        diags.push(ctx.error(format!(
                            "memref.load result type {} does not match element type {}",
                            result.ty, elem_ty
                        )));
                    }
                }
            } else if let Some(value_ty) = ctx.operand_type(op, 0) {
                if *value_ty != elem_ty {
                    diags.push(ctx.error(format!(
                        "memref.store value type {} does not match element type {}",
                        value_ty, elem_ty
                    )));
                }
            }
        }
        Rule::OffloadTarget => {
            if let Some(n) = op.attr("num_teams").and_then(|a| a.as_int()) {
                if n < 1 {
                    diags.push(ctx.error("offload.target num_teams must be positive"));
                }
            }
            let mut seen: Vec<i64> = Vec::new();
            for key in ["map_to", "map_from", "map_tofrom"] {
                let items = match op.attr(key).and_then(|a| a.as_array()) {
                    Some(items) => items,
                    None => continue,
                };
                for item in items {
                    let idx = match item.as_int() {
                        Some(i) => i,
                        None => {
                            diags.push(ctx.error(format!(
                                "offload.target {} entries must be operand indices",
                                key
                            )));
                            continue;
                        }
                    };
                    if idx < 0 || idx as usize >= op.operands.len() {
                        diags.push(ctx.error(format!(
                            "offload.target {} index {} out of operand range",
                            key, idx
                        )));
                        continue;
                    }
                    if seen.contains(&idx) {
                        diags.push(ctx.error(format!(
                            "offload.target operand {} appears in more than one map list",
                            idx
                        )));
                    }
                    seen.push(idx);
                    if let Some(ty) = ctx.operand_type(op, idx as usize) {
                        if !ty.is_memref() {
                            diags.push(ctx.error(format!(
                                "offload.target {} index {} must name a memref operand",
                                key, idx
                            )));
                        }
                    }
                }
            }
            // Every memref operand must be mapped exactly once.
            for (i, id) in op.operands.iter().enumerate() {
                if let Some(ty) = ctx.types.get(id) {
                    if ty.is_memref() && !seen.contains(&(i as i64)) {
                        diags.push(ctx.error(format!(
                            "offload.target memref operand {} missing from map lists",
                            i
                        )));
                    }
                }
            }
            if let Some(region) = op.regions.first() {
                if region.blocks.len() != 1 {
                    diags.push(ctx.error("offload.target region must have one block"));
                } else {
                    let block = region.entry();
                    if block.args.len() != op.operands.len() {
                        diags.push(ctx.error(
                            "offload.target block arguments must match operands",
                        ));
                    } else {
                        for (i, arg) in block.args.iter().enumerate() {
                            if let Some(ty) = ctx.operand_type(op, i) {
                                if arg.ty != *ty {
                                    diags.push(ctx.error(format!(
                                        "offload.target block argument {} type mismatch",
                                        i
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Rule::CreateCb => {
            diags.extend(check_core_range(op, ctx));
            if let Some(cap) = op.attr("capacity").and_then(|a| a.as_int()) {
                if cap < 1 {
                    diags.push(ctx.error("create_cb capacity must be at least 1 tile"));
                }
            }
            if let Some(id) = op.attr("cb_id").and_then(|a| a.as_int()) {
                if id < 0 {
                    diags.push(ctx.error("create_cb cb_id must be non-negative"));
                }
            }
        }
        Rule::CreateKernel => {
            diags.extend(check_core_range(op, ctx));
            if let Some(kind) = op.attr("kind").and_then(|a| a.as_str()) {
                if !KERNEL_KINDS.contains(&kind) {
                    diags.push(ctx.error(format!("unknown kernel kind '{}'", kind)));
                }
            }
            if let Some(sym) = op.attr("sym").and_then(|a| a.as_sym()) {
                match ctx.module.function(sym) {
                    Some(f) if f.is_kernel() => {}
                    Some(_) => diags.push(ctx.error(format!(
                        "create_kernel target @{} is not a kernel function",
                        sym
                    ))),
                    None => diags.push(ctx.error(format!(
                        "create_kernel target @{} does not exist",
                        sym
                    ))),
                }
            }
        }
        Rule::SetRuntimeArgs => {
            if let Some(core) = op.attr("core").and_then(|a| a.as_int()) {
                if core < 0 {
                    diags.push(ctx.error("set_runtime_args core must be non-negative"));
                }
            }
            for (i, id) in op.operands.iter().enumerate() {
                if let Some(ty) = ctx.types.get(id) {
                    if !matches!(ty, Type::I32 | Type::F32) {
                        diags.push(ctx.error(format!(
                            "set_runtime_args operand {} must be i32 or f32, got {}",
                            i, ty
                        )));
                    }
                }
            }
            if let Some(items) = op.attr("layout").and_then(|a| a.as_array()) {
                for item in items {
                    match item.as_str() {
                        Some(entry) => {
                            let ok = matches!(entry, "start_tile" | "num_tiles" | "tail_len")
                                || entry
                                    .strip_prefix('o')
                                    .and_then(|rest| rest.parse::<usize>().ok())
                                    .map(|idx| idx < op.operands.len())
                                    .unwrap_or(false);
                            if !ok {
                                diags.push(ctx.error(format!(
                                    "set_runtime_args layout entry '{}' is invalid",
                                    entry
                                )));
                            }
                        }
                        None => diags.push(
                            ctx.error("set_runtime_args layout entries must be strings"),
                        ),
                    }
                }
            }
            if let Some(idx) = op.attr("count_operand").and_then(|a| a.as_int()) {
                let valid = idx >= 0
                    && (idx as usize) < op.operands.len()
                    && ctx.operand_type(op, idx as usize) == Some(&Type::I32);
                if !valid {
                    diags.push(
                        ctx.error("set_runtime_args count_operand must name an i32 operand"),
                    );
                }
            }
        }
        Rule::CbCount => {
            if let Some(n) = op.attr("n").and_then(|a| a.as_int()) {
                if n < 1 {
                    diags.push(ctx.error(format!("'{}' count must be at least 1", op.full_name())));
                }
            }
        }
    }
    diags
}

fn check_core_range(op: &Op, ctx: &VerifyCtx) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if let Some(items) = op.attr("cores").and_then(|a| a.as_array()) {
        let ints: Vec<Option<i64>> = items.iter().map(|a| a.as_int()).collect();
        match ints.as_slice() {
            [Some(lo), Some(hi)] if *lo >= 0 && hi >= lo => {}
            _ => diags.push(ctx.error(format!(
                "'{}' cores attribute must be [lo, hi] with 0 <= lo <= hi",
                op.full_name()
            ))),
        }
    }
    diags
}
