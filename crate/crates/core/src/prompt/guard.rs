//! Mechanical solution-leak guard.
//!
//! A reply leaks when it shares a contiguous run of at least `guard_min_run`
//! normalized tokens with the instructor solution. Runs that also occur
//! verbatim in the problem statement are ignored, since the student already
//! sees that text.
//!
//! Tokenization:
//! - Prose is split on whitespace; each word is lowercased and stripped of
//!   every non-alphanumeric character. Words that become empty are dropped.
//! - Code (fenced blocks and inline backtick spans) is split on whitespace
//!   and kept verbatim, case and punctuation included. Fence lines and
//!   backticks are delimiters, not tokens.
//! - The redaction marker and the redaction notice are single barrier tokens
//!   that never match anything, so redacted output cannot form new runs
//!   through them.

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{GuardPolicy, TutorConfig};
use crate::domain::{GuardAction, Homework};

/// Replaces each redacted span.
pub const WITHHELD_MARKER: &str = "[guidance withheld]";

/// Appended on its own line after a redaction.
pub const REDACTION_NOTICE: &str =
    "(Part of this reply was withheld because it repeated the instructor's solution. Keep reasoning: what would your next step be?)";

const BARRIERS: [&str; 2] = [WITHHELD_MARKER, REDACTION_NOTICE];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Normalized text (verbatim for code tokens).
    pub text: String,
    /// Byte range in the source text.
    pub span: Range<usize>,
    /// Index of the prose or code region the token sits in.
    pub region: usize,
    pub code: bool,
    pub barrier: bool,
}

/// One maximal common run. Offsets and length count tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LeakRun {
    pub start_offset_in_reply: usize,
    pub length_tokens: usize,
    pub matched_solution_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardReport {
    pub leaked: bool,
    pub runs: Vec<LeakRun>,
    pub action_taken: GuardAction,
}

impl GuardReport {
    fn new(runs: Vec<LeakRun>, action_taken: GuardAction) -> Self {
        Self {
            leaked: !runs.is_empty(),
            runs,
            action_taken,
        }
    }
}

#[derive(Debug, Clone)]
struct Region {
    range: Range<usize>,
    code: bool,
}

fn backtick_run(bytes: &[u8], at: usize) -> usize {
    bytes[at..].iter().take_while(|&&b| b == b'`').count()
}

/// Splits a prose stretch into prose and inline-code regions. A run of N
/// backticks opens a span closed by the next run of exactly N backticks;
/// unmatched runs are plain text.
fn split_inline(text: &str, range: Range<usize>, out: &mut Vec<Region>) {
    let bytes = text.as_bytes();
    let mut prose_start = range.start;
    let mut i = range.start;
    while i < range.end {
        if bytes[i] != b'`' {
            i += 1;
            continue;
        }
        let open = backtick_run(&bytes[..range.end], i);
        let mut j = i + open;
        let mut close = None;
        while j < range.end {
            if bytes[j] == b'`' {
                let n = backtick_run(&bytes[..range.end], j);
                if n == open {
                    close = Some(j);
                    break;
                }
                j += n;
            } else {
                j += 1;
            }
        }
        match close {
            Some(c) => {
                if prose_start < i {
                    out.push(Region {
                        range: prose_start..i,
                        code: false,
                    });
                }
                out.push(Region {
                    range: i + open..c,
                    code: true,
                });
                i = c + open;
                prose_start = i;
            }
            None => i += open,
        }
    }
    if prose_start < range.end {
        out.push(Region {
            range: prose_start..range.end,
            code: false,
        });
    }
}

fn regions(text: &str) -> Vec<Region> {
    let mut out = Vec::new();
    let mut in_fence = false;
    let mut prose_start = 0;
    let mut code_start = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let line_start = offset;
        offset += line.len();
        if line.trim_start().starts_with("```") {
            if in_fence {
                out.push(Region {
                    range: code_start..line_start,
                    code: true,
                });
                prose_start = offset;
            } else {
                split_inline(text, prose_start..line_start, &mut out);
                code_start = offset;
            }
            in_fence = !in_fence;
        }
    }
    if in_fence {
        out.push(Region {
            range: code_start..text.len(),
            code: true,
        });
    } else {
        split_inline(text, prose_start..text.len(), &mut out);
    }
    out
}

fn push_words(text: &str, range: Range<usize>, region: usize, code: bool, out: &mut Vec<Token>) {
    let slice = &text[range.clone()];
    let mut word_start = None;
    let emit = |start: usize, end: usize, out: &mut Vec<Token>| {
        let raw = &slice[start..end];
        let normalized: String = if code {
            raw.to_owned()
        } else {
            raw.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect()
        };
        if !normalized.is_empty() {
            out.push(Token {
                text: normalized,
                span: range.start + start..range.start + end,
                region,
                code,
                barrier: false,
            });
        }
    };
    for (i, c) in slice.char_indices() {
        if c.is_whitespace() {
            if let Some(start) = word_start.take() {
                emit(start, i, out);
            }
        } else if word_start.is_none() {
            word_start = Some(i);
        }
    }
    if let Some(start) = word_start {
        emit(start, slice.len(), out);
    }
}

fn next_barrier(text: &str, from: usize, end: usize) -> Option<(usize, usize)> {
    BARRIERS
        .iter()
        .filter_map(|b| {
            text[from..end]
                .find(b)
                .map(|pos| (from + pos, from + pos + b.len()))
        })
        .min()
}

/// Tokenizes `text` with the normalization rules described at module level.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (index, region) in regions(text).into_iter().enumerate() {
        let mut cursor = region.range.start;
        while let Some((start, end)) = next_barrier(text, cursor, region.range.end) {
            push_words(text, cursor..start, index, region.code, &mut tokens);
            tokens.push(Token {
                text: text[start..end].to_owned(),
                span: start..end,
                region: index,
                code: region.code,
                barrier: true,
            });
            cursor = end;
        }
        push_words(
            text,
            cursor..region.range.end,
            index,
            region.code,
            &mut tokens,
        );
    }
    tokens
}

/// Maps tokens to integer symbols. Equal non-barrier texts share a symbol;
/// every barrier gets a fresh one.
struct Interner<'a> {
    ids: HashMap<&'a str, u32>,
    next_barrier: u32,
}

impl<'a> Interner<'a> {
    fn new() -> Self {
        Self {
            ids: HashMap::new(),
            next_barrier: u32::MAX,
        }
    }

    fn symbols(&mut self, tokens: &'a [Token]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| {
                if t.barrier {
                    self.next_barrier -= 1;
                    self.next_barrier
                } else {
                    let next = self.ids.len() as u32;
                    *self.ids.entry(t.text.as_str()).or_insert(next)
                }
            })
            .collect()
    }
}

fn contains_run(haystack: &[u32], needle: &[u32]) -> bool {
    haystack.len() >= needle.len() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Every maximal common run of length `>= min_run` between two symbol
/// strings. Seeds come from a hash index of the solution's `min_run`-grams;
/// a seed is expanded only when it cannot be extended to the left, so each
/// maximal run is reported exactly once.
fn maximal_runs(reply: &[u32], solution: &[u32], min_run: usize) -> Vec<LeakRun> {
    let k = min_run.max(1);
    if reply.len() < k || solution.len() < k {
        return Vec::new();
    }
    let mut index: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (j, gram) in solution.windows(k).enumerate() {
        index.entry(gram).or_default().push(j);
    }
    let mut runs = Vec::new();
    for (i, gram) in reply.windows(k).enumerate() {
        let Some(starts) = index.get(gram) else {
            continue;
        };
        for &j in starts {
            if i > 0 && j > 0 && reply[i - 1] == solution[j - 1] {
                continue;
            }
            let mut len = k;
            while i + len < reply.len()
                && j + len < solution.len()
                && reply[i + len] == solution[j + len]
            {
                len += 1;
            }
            runs.push(LeakRun {
                start_offset_in_reply: i,
                length_tokens: len,
                matched_solution_offset: j,
            });
        }
    }
    runs
}

fn detect(
    reply_tokens: &[Token],
    solution: &str,
    problem_statement: &str,
    min_run: usize,
) -> Vec<LeakRun> {
    let solution_tokens = tokenize(solution);
    let statement_tokens = tokenize(problem_statement);
    let mut interner = Interner::new();
    let reply_syms = interner.symbols(reply_tokens);
    let solution_syms = interner.symbols(&solution_tokens);
    let statement_syms = interner.symbols(&statement_tokens);

    let mut runs: Vec<LeakRun> = maximal_runs(&reply_syms, &solution_syms, min_run)
        .into_iter()
        .filter(|run| {
            let start = run.start_offset_in_reply;
            !contains_run(
                &statement_syms,
                &reply_syms[start..start + run.length_tokens],
            )
        })
        .collect();
    runs.sort();
    runs
}

/// Leak runs of `reply` against a homework's solution, without acting on them.
pub fn scan_reply(reply: &str, homework: &Homework, min_run: usize) -> Vec<LeakRun> {
    detect(
        &tokenize(reply),
        &homework.solution,
        &homework.problem_statement,
        min_run,
    )
}

/// Replaces every token interval covered by `runs` with [`WITHHELD_MARKER`]
/// (one marker per contiguous stretch within a prose or code region, so
/// fences stay intact) and appends [`REDACTION_NOTICE`].
fn redact(reply: &str, tokens: &[Token], runs: &[LeakRun]) -> String {
    let mut covered = vec![false; tokens.len()];
    for run in runs {
        for flag in
            &mut covered[run.start_offset_in_reply..run.start_offset_in_reply + run.length_tokens]
        {
            *flag = true;
        }
    }

    let mut spans: Vec<Range<usize>> = Vec::new();
    let mut current: Option<(Range<usize>, usize)> = None;
    for (token, &hit) in tokens.iter().zip(&covered) {
        match (&mut current, hit) {
            (Some((span, region)), true) if *region == token.region => span.end = token.span.end,
            (_, true) => {
                if let Some((span, _)) = current.take() {
                    spans.push(span);
                }
                current = Some((token.span.clone(), token.region));
            }
            (_, false) => {
                if let Some((span, _)) = current.take() {
                    spans.push(span);
                }
            }
        }
    }
    if let Some((span, _)) = current {
        spans.push(span);
    }

    let mut out = String::with_capacity(reply.len());
    let mut cursor = 0;
    for span in spans {
        out.push_str(&reply[cursor..span.start]);
        out.push_str(WITHHELD_MARKER);
        cursor = span.end;
    }
    out.push_str(&reply[cursor..]);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push('\n');
    out.push_str(REDACTION_NOTICE);
    out
}

/// First-pass guard on a tutor reply.
///
/// - No leak: the reply comes back unchanged with action `None`.
/// - `RedactOnly`: the redacted reply, action `Redacted`.
/// - `RegenerateThenRedact`: action `Regenerated`, which tells the caller to
///   request one fresh reply and pass it to [`guard_retry`]. The returned
///   text is the redacted fallback for when regeneration is impossible.
pub fn guard_reply(
    reply: &str,
    homework: &Homework,
    config: &TutorConfig,
) -> (String, GuardReport) {
    let tokens = tokenize(reply);
    let runs = detect(
        &tokens,
        &homework.solution,
        &homework.problem_statement,
        config.guard_min_run as usize,
    );
    if runs.is_empty() {
        return (reply.to_owned(), GuardReport::new(runs, GuardAction::None));
    }
    let redacted = redact(reply, &tokens, &runs);
    let action = match config.guard_policy {
        GuardPolicy::RedactOnly => GuardAction::Redacted,
        GuardPolicy::RegenerateThenRedact => GuardAction::Regenerated,
    };
    (redacted, GuardReport::new(runs, action))
}

/// Guard for the single regenerated reply: clean output is kept (action
/// `Regenerated`), a second leak is redacted (action `Redacted`).
pub fn guard_retry(
    reply: &str,
    homework: &Homework,
    config: &TutorConfig,
) -> (String, GuardReport) {
    let tokens = tokenize(reply);
    let runs = detect(
        &tokens,
        &homework.solution,
        &homework.problem_statement,
        config.guard_min_run as usize,
    );
    if runs.is_empty() {
        return (
            reply.to_owned(),
            GuardReport::new(runs, GuardAction::Regenerated),
        );
    }
    let redacted = redact(reply, &tokens, &runs);
    (redacted, GuardReport::new(runs, GuardAction::Redacted))
}
