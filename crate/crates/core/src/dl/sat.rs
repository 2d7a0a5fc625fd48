//! Small CDCL solver used by the bounded model finder.
//!
//! Two-watched-literal propagation, first-UIP learning, activity-ordered
//! decisions with phase saving, Luby restarts. Learnt clauses are kept; the
//! groundings produced here are small enough that deletion does not pay off.

use std::ops::Not;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Self {
        Lit(var << 1 | (!positive) as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Vec<bool>),
    Unsat,
    /// Conflict budget exhausted.
    Unknown,
}

#[derive(Debug, Default)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Value>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    heap: VarHeap,
    unsat: bool,
    pub conflicts: u64,
}

impl Solver {
    pub fn new() -> Self {
        Solver { var_inc: 1.0, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn new_var(&mut self) -> u32 {
        let v = self.assigns.len() as u32;
        self.assigns.push(Value::Unset);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v, &self.activity);
        v
    }

    fn lit_value(&self, l: Lit) -> Value {
        match self.assigns[l.var() as usize] {
            Value::Unset => Value::Unset,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    /// Adds a clause; only valid before `solve` or between calls at level 0.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.unsat {
            return;
        }
        debug_assert!(self.trail_lim.is_empty());
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return;
            }
        }
        c.retain(|&l| self.lit_value(l) != Value::False);
        if c.iter().any(|&l| self.lit_value(l) == Value::True) {
            return;
        }
        match c.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                let id = self.clauses.len();
                self.watches[c[0].index()].push(id);
                self.watches[c[1].index()].push(id);
                self.clauses.push(c);
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var() as usize;
        self.assigns[v] = if l.is_positive() { Value::True } else { Value::False };
        self.level[v] = self.trail_lim.len();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cr = ws[i];
                i += 1;
                {
                    let c = &mut self.clauses[cr];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cr][0];
                if self.lit_value(first) == Value::True {
                    ws[j] = cr;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cr].len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cr][k];
                    if self.lit_value(lk) != Value::False {
                        self.clauses[cr].swap(1, k);
                        self.watches[lk.index()].push(cr);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cr;
                j += 1;
                if self.lit_value(first) == Value::False {
                    conflict = Some(cr);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cr));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let current = self.trail_lim.len();
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = if p.is_some() { 1 } else { 0 };
            let clause_len = self.clauses[confl].len();
            for k in start..clause_len {
                let q = self.clauses[confl][k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(q.var());
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var() as usize] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var() as usize].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var() as usize];
        }
        (learnt, bt)
    }

    fn backtrack(&mut self, to: usize) {
        if self.trail_lim.len() <= to {
            return;
        }
        let start = self.trail_lim[to];
        for k in (start..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var() as usize;
            self.phase[v] = l.is_positive();
            self.assigns[v] = Value::Unset;
            self.reason[v] = None;
            self.heap.insert(l.var(), &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(to);
        self.qhead = start;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == Value::Unset {
                return Some(Lit::new(v, self.phase[v as usize]));
            }
        }
        None
    }

    /// Solves; `max_conflicts` of zero means unlimited.
    pub fn solve(&mut self, max_conflicts: u64) -> SolveResult {
        if self.unsat {
            return SolveResult::Unsat;
        }
        if self.propagate().is_some() {
            self.unsat = true;
            return SolveResult::Unsat;
        }
        let mut restart_idx = 0u64;
        let mut budget = 100 * luby(restart_idx);
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.trail_lim.is_empty() {
                    self.unsat = true;
                    return SolveResult::Unsat;
                }
                if max_conflicts > 0 && self.conflicts >= max_conflicts {
                    self.backtrack(0);
                    return SolveResult::Unknown;
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let id = self.clauses.len();
                    self.watches[learnt[0].index()].push(id);
                    self.watches[learnt[1].index()].push(id);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(first, Some(id));
                }
                self.var_inc *= 1.0 / 0.95;
            } else {
                if since_restart >= budget {
                    since_restart = 0;
                    restart_idx += 1;
                    budget = 100 * luby(restart_idx);
                    self.backtrack(0);
                    continue;
                }
                match self.pick_branch() {
                    None => {
                        let model = self.assigns.iter().map(|v| *v == Value::True).collect();
                        self.backtrack(0);
                        return SolveResult::Sat(model);
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }
}

fn luby(mut i: u64) -> u64 {
    // 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

/// Max-heap of variables keyed by activity.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.pos.len() <= v as usize {
            self.pos.resize(v as usize + 1, None);
        }
        if self.pos[v as usize].is_some() {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.up(i, act);
    }

    fn increased(&mut self, v: u32, act: &[f64]) {
        if let Some(Some(i)) = self.pos.get(v as usize) {
            self.up(*i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if act[pv as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] { r } else { l };
            let cv = self.heap[c];
            if act[cv as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}
