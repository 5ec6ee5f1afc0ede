//! Structural equality: compares graph shape, types and attributes while
//! ignoring how values are spelled or numbered. This is what makes the
//! parse/print round-trip testable.

use std::collections::HashMap;

use super::{Block, Module, Region, ValueId};

pub fn structurally_equal(a: &Module, b: &Module) -> bool {
    if a.attrs != b.attrs || a.functions.len() != b.functions.len() {
        return false;
    }
    for (fa, fb) in a.functions.iter().zip(&b.functions) {
        if fa.name != fb.name || fa.results != fb.results || fa.attrs != fb.attrs {
            return false;
        }
        let mut map: HashMap<ValueId, ValueId> = HashMap::new();
        if !regions_equal(&fa.region, &fb.region, &mut map) {
            return false;
        }
    }
    true
}

fn regions_equal(a: &Region, b: &Region, map: &mut HashMap<ValueId, ValueId>) -> bool {
    if a.blocks.len() != b.blocks.len() {
        return false;
    }
    a.blocks.iter().zip(&b.blocks).all(|(ba, bb)| blocks_equal(ba, bb, map))
}

fn blocks_equal(a: &Block, b: &Block, map: &mut HashMap<ValueId, ValueId>) -> bool {
    if a.args.len() != b.args.len() || a.ops.len() != b.ops.len() {
        return false;
    }
    for (va, vb) in a.args.iter().zip(&b.args) {
        if va.ty != vb.ty {
            return false;
        }
        map.insert(va.id, vb.id);
    }
    for (oa, ob) in a.ops.iter().zip(&b.ops) {
        if oa.dialect != ob.dialect
            || oa.name != ob.name
            || oa.attrs != ob.attrs
            || oa.operands.len() != ob.operands.len()
            || oa.results.len() != ob.results.len()
            || oa.regions.len() != ob.regions.len()
        {
            return false;
        }
        for (ua, ub) in oa.operands.iter().zip(&ob.operands) {
            match map.get(ua) {
                Some(mapped) if mapped == ub => {}
                _ => return false,
            }
        }
        // Regions execute with outer defs visible, so map results first? No:
        // results of the op are defined *after* its regions complete, but
        // region bodies cannot reference them, so order is irrelevant.
        for (ra, rb) in oa.regions.iter().zip(&ob.regions) {
            if !regions_equal(ra, rb, map) {
                return false;
            }
        }
        for (va, vb) in oa.results.iter().zip(&ob.results) {
            if va.ty != vb.ty {
                return false;
            }
            map.insert(va.id, vb.id);
        }
    }
    true
}
