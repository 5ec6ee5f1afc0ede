//! Pattern-driven op replacement.
//!
//! [`walk_replace`] visits every op in post-order (nested regions before the
//! op itself), replaces each match with the rewriter's output, and validates
//! reference consistency afterwards. Rewrites are all-or-nothing: on any
//! failure the original module is left untouched and an error diagnostic is
//! returned.

use std::collections::HashSet;

use super::{Block, DiagLoc, Diagnostic, Function, Module, Op, Type, Value, ValueId};

/// Fresh-value allocator handed to rewriters so new ops can define results.
pub struct ValueGen {
    next: u32,
}

impl ValueGen {
    pub fn fresh(&mut self, ty: Type) -> Value {
        let id = ValueId(self.next);
        self.next += 1;
        Value { id, ty }
    }
}

/// Replacement for one matched op.
pub struct OpRewrite {
    /// Ops spliced in place of the matched op.
    pub ops: Vec<Op>,
    /// For each result of the matched op, the value that now provides it.
    /// Leave empty when the new ops re-define the original result ids.
    pub remap: Vec<ValueId>,
}

impl OpRewrite {
    pub fn replace_with(ops: Vec<Op>) -> OpRewrite {
        OpRewrite { ops, remap: Vec::new() }
    }

    pub fn erase() -> OpRewrite {
        OpRewrite { ops: Vec::new(), remap: Vec::new() }
    }
}

/// Apply `rewriter` to every op matched by `matcher`, post-order.
pub fn walk_replace<M, R>(
    module: &Module,
    mut matcher: M,
    mut rewriter: R,
) -> Result<Module, Diagnostic>
where
    M: FnMut(&Op) -> bool,
    R: FnMut(&Op, &mut ValueGen) -> Result<OpRewrite, Diagnostic>,
{
    let mut out = module.clone();
    for func in &mut out.functions {
        let mut gen = ValueGen { next: func.next_value_counter() };
        let mut remaps: Vec<(ValueId, ValueId)> = Vec::new();
        for block in &mut func.region.blocks {
            rewrite_block(block, &mut matcher, &mut rewriter, &mut gen, &mut remaps)?;
        }
        func.set_next_value_counter(gen.next);
        if !remaps.is_empty() {
            for block in &mut func.region.blocks {
                apply_remaps(block, &remaps);
            }
        }
        if let Some(diag) = check_refs(func) {
            return Err(diag);
        }
    }
    Ok(out)
}

fn rewrite_block<M, R>(
    block: &mut Block,
    matcher: &mut M,
    rewriter: &mut R,
    gen: &mut ValueGen,
    remaps: &mut Vec<(ValueId, ValueId)>,
) -> Result<(), Diagnostic>
where
    M: FnMut(&Op) -> bool,
    R: FnMut(&Op, &mut ValueGen) -> Result<OpRewrite, Diagnostic>,
{
    let mut idx = 0;
    while idx < block.ops.len() {
        for region in &mut block.ops[idx].regions {
            for b in &mut region.blocks {
                rewrite_block(b, matcher, rewriter, gen, remaps)?;
            }
        }
        if matcher(&block.ops[idx]) {
            let old = block.ops[idx].clone();
            let rewrite = rewriter(&old, gen)?;
            if !rewrite.remap.is_empty() {
                if rewrite.remap.len() != old.results.len() {
                    return Err(Diagnostic::error(
                        format!(
                            "rewrite of '{}' remaps {} results but op has {}",
                            old.full_name(),
                            rewrite.remap.len(),
                            old.results.len()
                        ),
                        DiagLoc::Module,
                    ));
                }
                for (old_res, new_id) in old.results.iter().zip(&rewrite.remap) {
                    remaps.push((old_res.id, *new_id));
                }
            }
            let count = rewrite.ops.len();
            block.ops.splice(idx..=idx, rewrite.ops);
            idx += count;
        } else {
            idx += 1;
        }
    }
    Ok(())
}

fn apply_remaps(block: &mut Block, remaps: &[(ValueId, ValueId)]) {
    for op in &mut block.ops {
        for operand in &mut op.operands {
            if let Some((_, to)) = remaps.iter().find(|(from, _)| from == operand) {
                *operand = *to;
            }
        }
        for region in &mut op.regions {
            for b in &mut region.blocks {
                apply_remaps(b, remaps);
            }
        }
    }
}

/// Every operand must be defined by a dominating definition; returns the
/// first dangling use as a diagnostic.
fn check_refs(func: &Function) -> Option<Diagnostic> {
    let mut defined: HashSet<ValueId> = HashSet::new();
    check_blocks(&func.region.blocks, &mut defined, func)
}

fn check_blocks(
    blocks: &[Block],
    defined: &mut HashSet<ValueId>,
    func: &Function,
) -> Option<Diagnostic> {
    for (bi, block) in blocks.iter().enumerate() {
        let added: Vec<ValueId> = block.args.iter().map(|a| a.id).collect();
        for id in &added {
            defined.insert(*id);
        }
        for (oi, op) in block.ops.iter().enumerate() {
            for operand in &op.operands {
                if !defined.contains(operand) {
                    return Some(Diagnostic::error(
                        format!("rewrite produced dangling value use in '{}'", op.full_name()),
                        DiagLoc::Ir { func: func.name.clone(), block: bi, op: oi },
                    ));
                }
            }
            for region in &op.regions {
                let mut inner = defined.clone();
                if let Some(d) = check_blocks(&region.blocks, &mut inner, func) {
                    return Some(d);
                }
            }
            for result in &op.results {
                defined.insert(result.id);
            }
        }
    }
    None
}
