//! Embedded incremental CDCL SAT solver: watched literals, first-UIP
//! clause learning, VSIDS branching with an optional priority tier,
//! phase saving, and Luby restarts.
//!
//! Clauses are permanent once added; everything retractable travels as
//! solve-time assumptions. Polarity hints and branch priorities are
//! heuristics only and never change the sat/unsat verdict.

use std::fmt;
use std::io::{self, Write};

/// A propositional variable. Ids are dense and start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn id(self) -> u32 {
        self.0
    }

    fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    fn from_index(i: usize) -> Var {
        Var(i as u32 + 1)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable with a polarity. `code = 2 * index + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(v: Var, positive: bool) -> Lit {
        Lit(v.index() as u32 * 2 + (!positive) as u32)
    }

    pub fn positive(v: Var) -> Lit {
        Lit::new(v, true)
    }

    pub fn negative(v: Var) -> Lit {
        Lit::new(v, false)
    }

    pub fn var(self) -> Var {
        Var::from_index((self.0 / 2) as usize)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_positive() { "" } else { "-" }, self.var())
    }
}

/// A total assignment, reported only for satisfiable queries.
#[derive(Debug, Clone)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit_is_true(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }
}

#[derive(Debug, Clone)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

type CRef = usize;

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Indexed max-heap over variable activities (the VSIDS order).
#[derive(Default)]
struct ActivityHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl ActivityHeap {
    fn grow(&mut self, n: usize) {
        while self.pos.len() < n {
            self.pos.push(-1);
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] >= 0
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = self.heap.len() as i32;
        self.heap.push(v as u32);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop_max(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()? as usize;
        let last = self.heap.pop().unwrap();
        self.pos[top] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn update(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v] as usize;
            self.sift_up(i, act);
            self.sift_down(self.pos[v] as usize, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[i] as usize] <= act[self.heap[parent] as usize] {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && act[self.heap[l] as usize] > act[self.heap[best] as usize] {
                best = l;
            }
            if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[best] as usize] {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = i as i32;
        self.pos[self.heap[j] as usize] = j as i32;
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<CRef>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: ActivityHeap,
    saved_phase: Vec<bool>,
    priority: Vec<Var>,
    seen: Vec<bool>,
    clause_inc: f64,
    learnt_count: usize,
    max_learnts: f64,
    ok: bool,
    stats: SolverStats,
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 100;

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: ActivityHeap::default(),
            saved_phase: Vec::new(),
            priority: Vec::new(),
            seen: Vec::new(),
            clause_inc: 1.0,
            learnt_count: 0,
            max_learnts: 4000.0,
            ok: true,
            stats: SolverStats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let i = self.assigns.len();
        self.assigns.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.saved_phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.grow(i + 1);
        self.heap.insert(i, &self.activity);
        Var::from_index(i)
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn solve_calls(&self) -> u64 {
        self.stats.solves
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Next decision on `v` tries `phase` first (unless propagation or a
    /// later saved phase overrides it). Purely heuristic.
    pub fn set_polarity_hint(&mut self, v: Var, phase: bool) {
        self.saved_phase[v.index()] = phase;
    }

    /// Listed variables are branched on before all others, in list order.
    /// Purely heuristic; pass an empty slice to restore the default.
    pub fn set_branch_priority(&mut self, vars: &[Var]) {
        self.priority = vars.to_vec();
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.assigns[l.var().index()].map(|b| b == l.is_positive())
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Asserts a clause permanently. Tautologies are dropped; duplicate
    /// literals are merged; the empty clause makes the instance
    /// permanently unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        for w in c.windows(2) {
            if w[0].var() == w[1].var() {
                return; // tautology
            }
        }
        // simplify against the top-level assignment
        let mut simplified = Vec::with_capacity(c.len());
        for l in c {
            match self.lit_value(l) {
                Some(true) => return, // already satisfied forever
                Some(false) => {}
                None => simplified.push(l),
            }
        }
        match simplified.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(simplified[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(simplified, false);
            }
        }
    }

    // watches[l] holds the clauses currently watching literal l; the list
    // is visited when l becomes false.
    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        let cref = self.clauses.len();
        self.watches[lits[0].code()].push(cref);
        self.watches[lits[1].code()].push(cref);
        if learnt {
            self.learnt_count += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        debug_assert!(self.lit_value(l).is_none());
        let v = l.var().index();
        self.assigns[v] = Some(l.is_positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<CRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut keep = 0;
            let mut conflict = None;
            'clauses: for i in 0..ws.len() {
                let cref = ws[i];
                if self.clauses[cref].deleted {
                    continue;
                }
                // make sure the false literal sits at slot 1
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if self.lit_value(first) == Some(true) {
                    ws[keep] = cref;
                    keep += 1;
                    continue;
                }
                // look for a replacement watch
                for k in 2..self.clauses[cref].lits.len() {
                    let cand = self.clauses[cref].lits[k];
                    if self.lit_value(cand) != Some(false) {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[cand.code()].push(cref);
                        continue 'clauses;
                    }
                }
                // unit or conflicting
                ws[keep] = cref;
                keep += 1;
                if self.lit_value(first) == Some(false) {
                    // copy the rest back before bailing out
                    for j in i + 1..ws.len() {
                        let w = ws[j];
                        ws[keep] = w;
                        keep += 1;
                    }
                    self.qhead = self.trail.len();
                    conflict = Some(cref);
                    break;
                }
                self.enqueue(first, Some(cref));
            }
            ws.truncate(keep);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target];
        for i in (bound..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.saved_phase[v] = l.is_positive();
            self.assigns[v] = None;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target);
        self.qhead = bound;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.update(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        self.clauses[cref].activity += self.clause_inc;
        if self.clauses[cref].activity > 1e20 {
            for cl in &mut self.clauses {
                cl.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the backjump level and the
    /// learnt clause, with the asserting literal at slot 0.
    fn analyze(&mut self, mut confl: CRef) -> (usize, Vec<Lit>) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut path = 0u32;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            if self.clauses[confl].learnt {
                self.bump_clause(confl);
            }
            let start = if p.is_none() { 0 } else { 1 };
            for k in start..self.clauses[confl].lits.len() {
                let q = self.clauses[confl].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] as usize >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().index()] = false;
            path -= 1;
            if path == 0 {
                learnt[0] = !lit;
                break;
            }
            confl = self.reason[lit.var().index()].expect("non-decision on conflict path");
            p = Some(lit);
        }
        // backjump to the second-highest decision level in the clause
        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        for l in &learnt {
            self.seen[l.var().index()] = false;
        }
        (bt, learnt)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<CRef> = (0..self.clauses.len())
            .filter(|&c| {
                let cl = &self.clauses[c];
                cl.learnt && !cl.deleted && cl.lits.len() > 2 && !self.is_reason(c)
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
        });
        for &c in cands.iter().take(cands.len() / 2) {
            self.detach(c);
        }
    }

    fn is_reason(&self, cref: CRef) -> bool {
        let l = self.clauses[cref].lits[0];
        self.assigns[l.var().index()] == Some(l.is_positive())
            && self.reason[l.var().index()] == Some(cref)
    }

    fn detach(&mut self, cref: CRef) {
        let (w0, w1) = {
            let c = &self.clauses[cref];
            (c.lits[0].code(), c.lits[1].code())
        };
        self.watches[w0].retain(|&r| r != cref);
        self.watches[w1].retain(|&r| r != cref);
        self.clauses[cref].deleted = true;
        self.learnt_count -= 1;
    }

    fn pick_branch_var(&mut self) -> Option<Var> {
        for i in 0..self.priority.len() {
            let v = self.priority[i];
            if self.assigns[v.index()].is_none() {
                return Some(v);
            }
        }
        while let Some(v) = self.heap.pop_max(&self.activity) {
            if self.assigns[v].is_none() {
                return Some(Var::from_index(v));
            }
        }
        None
    }

    /// Decides satisfiability of the clause database conjoined with the
    /// assumptions. The solver remains usable afterwards.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SatResult {
        self.stats.solves += 1;
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        let mut conflicts_left = luby(self.stats.restarts) * RESTART_BASE;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatResult::Unsat;
                }
                let (bt, learnt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    let first = self.clauses[cref].lits[0];
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;
                if conflicts_left == 0 {
                    self.stats.restarts += 1;
                    conflicts_left = luby(self.stats.restarts) * RESTART_BASE;
                    self.cancel_until(0);
                }
                conflicts_left = conflicts_left.saturating_sub(1);
                if self.learnt_count as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.5;
                }
            } else if self.decision_level() < assumptions.len() {
                let p = assumptions[self.decision_level()];
                match self.lit_value(p) {
                    Some(true) => self.trail_lim.push(self.trail.len()),
                    Some(false) => {
                        self.cancel_until(0);
                        return SatResult::Unsat;
                    }
                    None => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(p, None);
                    }
                }
            } else if let Some(v) = self.pick_branch_var() {
                self.stats.decisions += 1;
                self.trail_lim.push(self.trail.len());
                self.enqueue(Lit::new(v, self.saved_phase[v.index()]), None);
            } else {
                let model = Model {
                    values: self.assigns.iter().map(|a| a.unwrap()).collect(),
                };
                self.cancel_until(0);
                return SatResult::Sat(model);
            }
        }
    }

    /// Writes the problem clauses (and top-level units) in DIMACS form.
    pub fn dump_dimacs(&self, out: &mut impl Write) -> io::Result<()> {
        let units = self.trail_lim.first().map_or(self.trail.len(), |&l| l);
        let n_clauses = self
            .clauses
            .iter()
            .filter(|c| !c.learnt && !c.deleted)
            .count()
            + units
            + usize::from(!self.ok);
        writeln!(out, "p cnf {} {}", self.num_vars(), n_clauses)?;
        let dimacs = |l: Lit| -> i64 {
            let v = l.var().id() as i64;
            if l.is_positive() {
                v
            } else {
                -v
            }
        };
        for l in &self.trail[..units] {
            writeln!(out, "{} 0", dimacs(*l))?;
        }
        for c in self.clauses.iter().filter(|c| !c.learnt && !c.deleted) {
            let line: Vec<String> = c.lits.iter().map(|&l| dimacs(l).to_string()).collect();
            writeln!(out, "{} 0", line.join(" "))?;
        }
        if !self.ok {
            writeln!(out, "0")?;
        }
        Ok(())
    }
}

fn luby(i: u64) -> u64 {
    // the i-th element (0-based) of 1,1,2,1,1,2,4,...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 2 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = i;
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        if x >= size {
            x -= size;
        }
    }
    1u64 << seq
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn vars(s: &mut Solver, n: usize) -> Vec<Var> {
        (0..n).map(|_| s.new_var()).collect()
    }

    #[test]
    fn unit_and_contradiction() {
        let mut s = Solver::new();
        let x1 = s.new_var();
        s.add_clause(&[Lit::positive(x1)]);
        match s.solve(&[]) {
            SatResult::Sat(m) => assert!(m.value(x1)),
            SatResult::Unsat => panic!("expected sat"),
        }
        s.add_clause(&[Lit::negative(x1)]);
        assert!(!s.solve(&[]).is_sat());
        // instance stays dead
        assert!(!s.solve(&[]).is_sat());
    }

    #[test]
    fn assumptions_steer_without_erasing() {
        let mut s = Solver::new();
        let v = vars(&mut s, 2);
        s.add_clause(&[Lit::positive(v[0]), Lit::positive(v[1])]);
        match s.solve(&[Lit::negative(v[0])]) {
            SatResult::Sat(m) => {
                assert!(!m.value(v[0]));
                assert!(m.value(v[1]));
            }
            SatResult::Unsat => panic!("expected sat"),
        }
        s.add_clause(&[Lit::negative(v[0]), Lit::positive(v[1])]);
        assert!(!s.solve(&[Lit::negative(v[1])]).is_sat());
        // without assumptions the instance is still satisfiable
        assert!(s.solve(&[]).is_sat());
        assert_eq!(s.solve_calls(), 3);
    }

    #[test]
    fn fresh_instance_is_sat() {
        let mut s = Solver::new();
        assert!(s.solve(&[]).is_sat());
        let v = s.new_var();
        assert!(s.solve(&[Lit::positive(v)]).is_sat());
        assert!(!s.solve(&[Lit::positive(v), Lit::negative(v)]).is_sat());
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        let mut s = Solver::new();
        // p[i][h]: pigeon i sits in hole h
        let p: Vec<Vec<Var>> = (0..3).map(|_| vars(&mut s, 2)).collect();
        for row in &p {
            s.add_clause(&[Lit::positive(row[0]), Lit::positive(row[1])]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    s.add_clause(&[Lit::negative(p[i][h]), Lit::negative(p[j][h])]);
                }
            }
        }
        assert!(!s.solve(&[]).is_sat());
    }

    #[test]
    fn polarity_hints_are_followed_but_non_binding() {
        let mut s = Solver::new();
        let x1 = s.new_var();
        s.set_polarity_hint(x1, true);
        match s.solve(&[]) {
            SatResult::Sat(m) => assert!(m.value(x1)),
            _ => panic!(),
        }
        s.set_polarity_hint(x1, false);
        match s.solve(&[]) {
            SatResult::Sat(m) => assert!(!m.value(x1)),
            _ => panic!(),
        }
        let mut s2 = Solver::new();
        let y = s2.new_var();
        s2.add_clause(&[Lit::negative(y)]);
        s2.set_polarity_hint(y, true);
        match s2.solve(&[]) {
            SatResult::Sat(m) => assert!(!m.value(y)),
            _ => panic!(),
        }
    }

    #[test]
    fn branch_priority_decides_listed_vars_first() {
        let mut s = Solver::new();
        let v = vars(&mut s, 2);
        s.set_branch_priority(&[v[1]]);
        s.set_polarity_hint(v[1], true);
        // two free variables; the first decision must hit v[1]=true, and
        // with nothing else to do v[0] follows its default phase (false).
        match s.solve(&[]) {
            SatResult::Sat(m) => {
                assert!(m.value(v[1]));
                assert!(!m.value(v[0]));
            }
            _ => panic!(),
        }
    }

    fn random_cnf(
        rng: &mut StdRng,
        n_vars: usize,
        n_clauses: usize,
        width: usize,
    ) -> Vec<Vec<i32>> {
        (0..n_clauses)
            .map(|_| {
                (0..width)
                    .map(|_| {
                        let v = rng.random_range(1..=n_vars as i32);
                        if rng.random_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn load(s: &mut Solver, vs: &[Var], cnf: &[Vec<i32>]) {
        for c in cnf {
            let lits: Vec<Lit> = c
                .iter()
                .map(|&l| Lit::new(vs[(l.unsigned_abs() - 1) as usize], l > 0))
                .collect();
            s.add_clause(&lits);
        }
    }

    fn truth_table_sat(n_vars: usize, cnf: &[Vec<i32>]) -> bool {
        (0u32..(1 << n_vars)).any(|m| {
            cnf.iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = m & (1 << (l.unsigned_abs() - 1)) != 0;
                    bit == (l > 0)
                })
            })
        })
    }

    fn model_satisfies(m: &Model, vs: &[Var], cnf: &[Vec<i32>]) -> bool {
        cnf.iter().all(|c| {
            c.iter()
                .any(|&l| m.value(vs[(l.unsigned_abs() - 1) as usize]) == (l > 0))
        })
    }

    #[test]
    fn agrees_with_truth_tables_on_small_instances() {
        let mut rng = StdRng::seed_from_u64(0xbead);
        for _ in 0..600 {
            let n = rng.random_range(1..=4usize);
            let n_clauses = rng.random_range(1..=12);
            let width = rng.random_range(1..=3);
            let cnf = random_cnf(&mut rng, n, n_clauses, width);
            let mut s = Solver::new();
            let vs = vars(&mut s, n);
            load(&mut s, &vs, &cnf);
            let expected = truth_table_sat(n, &cnf);
            match s.solve(&[]) {
                SatResult::Sat(m) => {
                    assert!(expected, "solver sat, table unsat: {cnf:?}");
                    assert!(model_satisfies(&m, &vs, &cnf));
                }
                SatResult::Unsat => assert!(!expected, "solver unsat, table sat: {cnf:?}"),
            }
        }
    }

    /// A deliberately naive DPLL used as an independent reference.
    fn dpll(mut cnf: Vec<Vec<i32>>) -> bool {
        loop {
            let mut unit = None;
            for c in &cnf {
                if c.is_empty() {
                    return false;
                }
                if c.len() == 1 {
                    unit = Some(c[0]);
                    break;
                }
            }
            match unit {
                Some(l) => {
                    cnf.retain(|c| !c.contains(&l));
                    for c in &mut cnf {
                        c.retain(|&x| x != -l);
                    }
                }
                None => break,
            }
        }
        if cnf.is_empty() {
            return true;
        }
        let pick = cnf[0][0];
        let mut pos = cnf.clone();
        pos.push(vec![pick]);
        if dpll(pos) {
            return true;
        }
        let mut neg = cnf;
        neg.push(vec![-pick]);
        dpll(neg)
    }

    #[test]
    fn agrees_with_reference_dpll_on_random_3cnf() {
        let mut rng = StdRng::seed_from_u64(0xcafe);
        for round in 0..1000 {
            let n = rng.random_range(5..=30usize);
            let m = rng.random_range(n..=n * 5);
            let cnf = random_cnf(&mut rng, n, m, 3);
            let mut s = Solver::new();
            let vs = vars(&mut s, n);
            load(&mut s, &vs, &cnf);
            let expected = dpll(cnf.clone());
            match s.solve(&[]) {
                SatResult::Sat(model) => {
                    assert!(expected, "round {round}");
                    assert!(model_satisfies(&model, &vs, &cnf), "round {round}");
                }
                SatResult::Unsat => assert!(!expected, "round {round}"),
            }
        }
    }

    #[test]
    fn hints_and_priorities_never_change_the_verdict() {
        let mut rng = StdRng::seed_from_u64(0xfeed);
        for _ in 0..200 {
            let n = rng.random_range(3..=15usize);
            let m = rng.random_range(2..=n * 4);
            let cnf = random_cnf(&mut rng, n, m, 3);

            let mut plain = Solver::new();
            let vs = vars(&mut plain, n);
            load(&mut plain, &vs, &cnf);
            let baseline = plain.solve(&[]).is_sat();

            let mut tweaked = Solver::new();
            let vs2 = vars(&mut tweaked, n);
            load(&mut tweaked, &vs2, &cnf);
            for &v in &vs2 {
                tweaked.set_polarity_hint(v, rng.random_bool(0.5));
            }
            let mut order = vs2.clone();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            order.truncate(rng.random_range(0..=order.len()));
            tweaked.set_branch_priority(&order);
            assert_eq!(tweaked.solve(&[]).is_sat(), baseline);
        }
    }

    #[test]
    fn assumption_semantics_match_conjoined_clauses() {
        let mut rng = StdRng::seed_from_u64(0xabcd);
        for _ in 0..300 {
            let n = rng.random_range(2..=10usize);
            let m = rng.random_range(1..=n * 3);
            let cnf = random_cnf(&mut rng, n, m, 3);
            let k = rng.random_range(0..=n.min(4));
            let assumed: Vec<i32> = (1..=k as i32)
                .map(|v| if rng.random_bool(0.5) { v } else { -v })
                .collect();

            let mut s = Solver::new();
            let vs = vars(&mut s, n);
            load(&mut s, &vs, &cnf);
            let lits: Vec<Lit> = assumed
                .iter()
                .map(|&l| Lit::new(vs[(l.unsigned_abs() - 1) as usize], l > 0))
                .collect();
            let under_assumptions = s.solve(&lits).is_sat();

            let mut conjoined = cnf.clone();
            for &l in &assumed {
                conjoined.push(vec![l]);
            }
            assert_eq!(under_assumptions, truth_table_sat(n, &conjoined));
            // and the solver is still consistent with the plain instance
            assert_eq!(s.solve(&[]).is_sat(), truth_table_sat(n, &cnf));
        }
    }

    #[test]
    fn dimacs_dump_lists_problem_clauses() {
        let mut s = Solver::new();
        let v = vars(&mut s, 3);
        s.add_clause(&[Lit::positive(v[0])]);
        s.add_clause(&[Lit::negative(v[1]), Lit::positive(v[2])]);
        let mut out = Vec::new();
        s.dump_dimacs(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("p cnf 3 2"));
        assert!(text.contains("1 0"));
        assert!(text.contains("-2 3 0"));
    }

    #[test]
    fn luby_sequence_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }
}
