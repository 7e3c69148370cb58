//! Brute-force reference for leak detection. Deliberately naive: every
//! (reply offset, solution offset) pair is walked forward token by token and
//! maximality is checked directly, with no hashing or seeding.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// `(reply_start, solution_start, len)` for every maximal common contiguous
/// run with `len >= min_run` whose token sequence does not also occur
/// contiguously in `statement`.
pub fn brute_force_runs(
    reply: &[&str],
    solution: &[&str],
    statement: &[&str],
    min_run: usize,
) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..reply.len() {
        for j in 0..solution.len() {
            let max_len = (reply.len() - i).min(solution.len() - j);
            for len in 1..=max_len {
                if reply[i + len - 1] != solution[j + len - 1] {
                    break;
                }
                let left_closed = i == 0 || j == 0 || reply[i - 1] != solution[j - 1];
                let right_closed = i + len == reply.len()
                    || j + len == solution.len()
                    || reply[i + len] != solution[j + len];
                if left_closed && right_closed && len >= min_run {
                    let run = &reply[i..i + len];
                    let in_statement =
                        statement.len() >= len && statement.windows(len).any(|w| w == run);
                    if !in_statement {
                        out.insert((i, j, len));
                    }
                }
            }
        }
    }
    out
}

/// Longest common contiguous run, ignoring exclusions.
pub fn longest_common_run(a: &[&str], b: &[&str]) -> usize {
    brute_force_runs(a, b, &[], 1)
        .into_iter()
        .map(|(_, _, len)| len)
        .max()
        .unwrap_or(0)
}
