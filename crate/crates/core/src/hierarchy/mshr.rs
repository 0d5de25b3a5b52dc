use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MshrOutcome {
    /// A miss for the key is already outstanding; the waiter was attached.
    Coalesced,
    /// A new outstanding miss was recorded; the caller must forward it.
    Allocated,
    /// No free entry; retry later.
    Full,
}

/// Miss status holding registers: at most one outstanding miss per key.
#[derive(Debug, Clone)]
pub struct MshrTable<K, W> {
    pending: HashMap<K, Vec<W>>,
    capacity: usize,
}

impl<K: Hash + Eq, W: PartialEq> MshrTable<K, W> {
    pub fn new(capacity: usize) -> Self {
        Self {
            pending: HashMap::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn contains(&self, key: &K) -> bool {
        self.pending.contains_key(key)
    }

    /// Attach `waiter` to the outstanding miss for `key`, or open one.
    /// A waiter already attached is not added twice.
    pub fn attach(&mut self, key: K, waiter: W) -> MshrOutcome {
        if let Some(ws) = self.pending.get_mut(&key) {
            if !ws.contains(&waiter) {
                ws.push(waiter);
            }
            return MshrOutcome::Coalesced;
        }
        if self.pending.len() >= self.capacity {
            return MshrOutcome::Full;
        }
        self.pending.insert(key, vec![waiter]);
        MshrOutcome::Allocated
    }

    /// Close the outstanding miss for `key`, returning its waiters in arrival order.
    pub fn release(&mut self, key: &K) -> Vec<W> {
        self.pending.remove(key).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalesces_same_key() {
        let mut m: MshrTable<u64, u32> = MshrTable::new(2);
        assert_eq!(m.attach(7, 1), MshrOutcome::Allocated);
        assert_eq!(m.attach(7, 2), MshrOutcome::Coalesced);
        assert_eq!(m.attach(7, 2), MshrOutcome::Coalesced);
        assert_eq!(m.release(&7), vec![1, 2]);
        assert!(m.is_empty());
    }

    #[test]
    fn full_table_rejects_new_keys_only() {
        let mut m: MshrTable<u64, u32> = MshrTable::new(1);
        assert_eq!(m.attach(1, 1), MshrOutcome::Allocated);
        assert_eq!(m.attach(2, 2), MshrOutcome::Full);
        assert_eq!(m.attach(1, 3), MshrOutcome::Coalesced);
    }
}
