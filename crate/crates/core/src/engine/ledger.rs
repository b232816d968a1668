use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{PlayerId, RequestId};

/// EP balances and per-request escrow.
///
/// Invariant: `Σ balances + Σ escrow = mint_total`, in exact integer
/// arithmetic. Only [`Ledger::mint`] changes the total.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Ledger {
    balances: BTreeMap<PlayerId, u64>,
    escrow: BTreeMap<RequestId, u64>,
    mint_total: u64,
    allocated: BTreeSet<PlayerId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LedgerDelta {
    pub player_id: PlayerId,
    pub balance_before: u64,
    pub balance_after: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LedgerFault {
    AlreadyAllocated,
    Insufficient { balance: u64 },
    NoEscrow,
}

impl Ledger {
    pub fn balance(&self, player: PlayerId) -> u64 {
        self.balances.get(&player).copied().unwrap_or(0)
    }

    pub fn escrow(&self, request: RequestId) -> u64 {
        self.escrow.get(&request).copied().unwrap_or(0)
    }

    pub fn escrow_entries(&self) -> &BTreeMap<RequestId, u64> {
        &self.escrow
    }

    pub fn balances(&self) -> &BTreeMap<PlayerId, u64> {
        &self.balances
    }

    pub fn mint_total(&self) -> u64 {
        self.mint_total
    }

    pub fn is_allocated(&self, player: PlayerId) -> bool {
        self.allocated.contains(&player)
    }

    pub fn total_balances(&self) -> u64 {
        self.balances.values().sum()
    }

    pub fn total_escrow(&self) -> u64 {
        self.escrow.values().sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.total_balances() + self.total_escrow() == self.mint_total
    }

    pub(crate) fn open_account(&mut self, player: PlayerId) {
        self.balances.entry(player).or_insert(0);
    }

    /// One-time initial allocation for a player.
    pub(crate) fn mint(&mut self, player: PlayerId, amount: u64) -> Result<LedgerDelta, LedgerFault> {
        if !self.allocated.insert(player) {
            return Err(LedgerFault::AlreadyAllocated);
        }
        let balance = self.balances.entry(player).or_insert(0);
        let before = *balance;
        *balance += amount;
        self.mint_total += amount;
        Ok(LedgerDelta {
            player_id: player,
            balance_before: before,
            balance_after: *balance,
        })
    }

    /// Move `amount` from the player's balance into escrow for `request`.
    pub(crate) fn lock(
        &mut self,
        player: PlayerId,
        request: RequestId,
        amount: u64,
    ) -> Result<LedgerDelta, LedgerFault> {
        let balance = self.balances.entry(player).or_insert(0);
        if *balance < amount {
            return Err(LedgerFault::Insufficient { balance: *balance });
        }
        let before = *balance;
        *balance -= amount;
        *self.escrow.entry(request).or_insert(0) += amount;
        Ok(LedgerDelta {
            player_id: player,
            balance_before: before,
            balance_after: *balance,
        })
    }

    /// Empty the escrow of `request` into `player`'s balance.
    pub(crate) fn release(&mut self, request: RequestId, player: PlayerId) -> Result<LedgerDelta, LedgerFault> {
        let amount = self.escrow.remove(&request).ok_or(LedgerFault::NoEscrow)?;
        let balance = self.balances.entry(player).or_insert(0);
        let before = *balance;
        *balance += amount;
        Ok(LedgerDelta {
            player_id: player,
            balance_before: before,
            balance_after: *balance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_is_once_per_player() {
        let mut l = Ledger::default();
        assert_eq!(l.mint(PlayerId(1), 100).unwrap().balance_after, 100);
        assert_eq!(l.mint(PlayerId(1), 100), Err(LedgerFault::AlreadyAllocated));
        l.mint(PlayerId(2), 100).unwrap();
        assert_eq!(l.mint_total(), 200);
        assert!(l.is_conserved());
    }

    #[test]
    fn lock_and_release() {
        let mut l = Ledger::default();
        l.mint(PlayerId(1), 100).unwrap();
        let d = l.lock(PlayerId(1), RequestId(7), 20).unwrap();
        assert_eq!((d.balance_before, d.balance_after), (100, 80));
        assert_eq!(l.escrow(RequestId(7)), 20);
        assert!(l.is_conserved());
        assert_eq!(l.lock(PlayerId(1), RequestId(8), 81), Err(LedgerFault::Insufficient { balance: 80 }));
        l.release(RequestId(7), PlayerId(2)).unwrap();
        assert_eq!(l.balance(PlayerId(2)), 20);
        assert_eq!(l.escrow(RequestId(7)), 0);
        assert_eq!(l.release(RequestId(7), PlayerId(2)), Err(LedgerFault::NoEscrow));
        assert!(l.is_conserved());
    }
}
