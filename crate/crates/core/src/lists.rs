//! Stimulus lists and groups: the switch-over machinery.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{DrawMode, ListDecl};

/// Index sequence shared by a standalone list or by all members of a group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cursor {
    pub mode: DrawMode,
    len: usize,
    /// Indices not yet drawn (no-returns mode).
    pool: Vec<usize>,
    pub index: Option<usize>,
    pub exhausted: bool,
}

enum Advance {
    Fresh(usize),
    NowExhausted,
    AlreadyExhausted,
}

impl Cursor {
    pub fn new(mode: DrawMode, len: usize) -> Cursor {
        Cursor { mode, len, pool: (0..len).collect(), index: None, exhausted: len == 0 }
    }

    fn advance(&mut self, rng: &mut ChaCha8Rng) -> Advance {
        if self.exhausted {
            return Advance::AlreadyExhausted;
        }
        let next = match self.mode {
            DrawMode::Sequentially => {
                let n = self.index.map_or(0, |i| i + 1);
                (n < self.len).then_some(n)
            }
            DrawMode::NoReturns => {
                if self.pool.is_empty() {
                    None
                } else {
                    let k = rng.random_range(0..self.pool.len());
                    Some(self.pool.remove(k))
                }
            }
            DrawMode::WithReturns => Some(rng.random_range(0..self.len)),
        };
        match next {
            Some(i) => {
                self.index = Some(i);
                Advance::Fresh(i)
            }
            None => {
                self.exhausted = true;
                Advance::NowExhausted
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ListEvent {
    SwitchedOver { list: String, index: usize, value: String },
    Exhausted { list: String },
    /// A switch-over reached a list that was already exhausted.
    StillExhausted { list: String },
}

#[derive(Debug, Clone)]
pub struct ListState {
    pub decl: ListDecl,
    /// Index into `ListBank::cursors`.
    cursor: usize,
}

#[derive(Debug, Clone)]
pub struct GroupState {
    pub label: String,
    pub members: Vec<usize>,
    cursor: usize,
}

/// All lists of a document with their cursors and generator.
#[derive(Debug, Clone)]
pub struct ListBank {
    lists: Vec<ListState>,
    groups: Vec<GroupState>,
    cursors: Vec<Cursor>,
    by_name: HashMap<String, usize>,
    rng: ChaCha8Rng,
}

/// Derives the list generator from the run seed so attribute draws and list
/// draws do not share a stream.
pub fn list_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x6c69_7374_5f64_7261)
}

impl ListBank {
    pub fn new(decls: &[ListDecl], seed: u64) -> ListBank {
        let mut lists = Vec::new();
        let mut groups: Vec<GroupState> = Vec::new();
        let mut cursors = Vec::new();
        let mut by_name = HashMap::new();
        for (i, decl) in decls.iter().enumerate() {
            let cursor = match &decl.group {
                Some(label) => match groups.iter_mut().find(|g| &g.label == label) {
                    Some(g) => {
                        g.members.push(i);
                        g.cursor
                    }
                    None => {
                        // The first member's mode governs the group.
                        cursors.push(Cursor::new(decl.drawing, decl.values.len()));
                        groups.push(GroupState { label: label.clone(), members: vec![i], cursor: cursors.len() - 1 });
                        cursors.len() - 1
                    }
                },
                None => {
                    cursors.push(Cursor::new(decl.drawing, decl.values.len()));
                    cursors.len() - 1
                }
            };
            by_name.entry(decl.name.clone()).or_insert(i);
            lists.push(ListState { decl: decl.clone(), cursor });
        }
        for g in &groups {
            let len = g.members.iter().map(|&m| lists[m].decl.values.len()).min().unwrap_or(0);
            let mode = cursors[g.cursor].mode;
            cursors[g.cursor] = Cursor::new(mode, len);
        }
        ListBank { lists, groups, cursors, by_name, rng: list_rng(seed) }
    }

    pub fn lists(&self) -> &[ListState] {
        &self.lists
    }

    pub fn groups(&self) -> &[GroupState] {
        &self.groups
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    fn state(&self, name: &str) -> Option<&ListState> {
        self.by_name.get(name).map(|&i| &self.lists[i])
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.state(name).and_then(|s| self.cursors[s.cursor].index)
    }

    pub fn is_exhausted(&self, name: &str) -> bool {
        self.state(name).is_some_and(|s| self.cursors[s.cursor].exhausted)
    }

    /// The list's current value; its first value before any switch-over.
    pub fn current_value(&self, name: &str) -> Option<String> {
        let s = self.state(name)?;
        let i = self.cursors[s.cursor].index.unwrap_or(0);
        s.decl.values.get(i).cloned()
    }

    /// Advances the named lists. Each list or group advances at most once per
    /// call, however many of its members are named.
    pub fn switch_over(&mut self, names: &[String]) -> Vec<ListEvent> {
        let mut events = Vec::new();
        let mut advanced: Vec<usize> = Vec::new();
        for name in names {
            let Some(&li) = self.by_name.get(name.as_str()) else { continue };
            let cursor = self.lists[li].cursor;
            if advanced.contains(&cursor) {
                continue;
            }
            advanced.push(cursor);
            let members: Vec<usize> = match self.groups.iter().find(|g| g.cursor == cursor) {
                Some(g) => g.members.clone(),
                None => vec![li],
            };
            let outcome = self.cursors[cursor].advance(&mut self.rng);
            for m in members {
                let list = self.lists[m].decl.name.clone();
                events.push(match outcome {
                    Advance::Fresh(index) => {
                        ListEvent::SwitchedOver { value: self.lists[m].decl.values[index].clone(), list, index }
                    }
                    Advance::NowExhausted => ListEvent::Exhausted { list },
                    Advance::AlreadyExhausted => ListEvent::StillExhausted { list },
                });
            }
        }
        events
    }

    /// Restores every cursor to its initial state (the generator continues).
    pub fn reset(&mut self) {
        for c in &mut self.cursors {
            *c = Cursor::new(c.mode, c.len);
        }
    }
}
