"""Legacy Devanagari font decoding, script filtering and fragmentation.

Main responsibilities
---------------------
- Load tab-separated legacy→Unicode mapping tables (KrutiDev-style fonts)
- Decode legacy-encoded text with greedy longest-match-first replacement
- Reposition glyphs whose visual order differs from Unicode logical order
  (the short-i matra written before its consonant, the reph written after
  its syllable)
- Remove every codepoint outside the Devanagari allow-list
- Split normalized text into sentence-level fragments for alignment

Legacy fonts store Devanagari glyph codes in ASCII positions, so any
embedded Latin text decodes to Devanagari noise; downstream filtering
cannot recover it. Keep non-Devanagari material out of the transcripts
where possible.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MappingTableError

RULE_CLASSES = ("plain", "prefix-matra", "halant-form")

HALANT = "्"
NUKTA = "़"
REPH = "र" + HALANT  # र् rendered after its syllable in legacy fonts

# Devanagari block plus the few punctuation marks fragmentation needs.
_ALLOWED_EXTRA = frozenset(" ?!,")
_TERMINATORS = "।॥?!"  # । ॥ ? !

_SIGN_RANGES = (
    ("ा", "ौ"),  # dependent vowel signs
    ("ऀ", "ः"),  # inverted candrabindu, candrabindu, anusvara, visarga
    ("॑", "ॗ"),  # stress marks and extra vowel signs
    ("ॢ", "ॣ"),  # vocalic l signs
)


def _is_consonant(ch: str) -> bool:
    return "क" <= ch <= "ह" or "क़" <= ch <= "य़"


def _is_sign(ch: str) -> bool:
    return any(lo <= ch <= hi for lo, hi in _SIGN_RANGES)


@dataclass(frozen=True)
class MappingRule:
    legacy: str
    replacement: str
    rule_class: str


@dataclass(frozen=True)
class MappingTable:
    """Ordered legacy→Unicode rules with a longest-match lookup index."""

    rules: tuple[MappingRule, ...]
    source_name: str

    def __post_init__(self):
        if not self.rules:
            raise MappingTableError(f"{self.source_name}: mapping table has no rules")
        index: dict[str, MappingRule] = {}
        for rule in self.rules:
            if rule.legacy in index:
                raise MappingTableError(
                    f"{self.source_name}: duplicate legacy sequence {rule.legacy!r}"
                )
            index[rule.legacy] = rule
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_max_len", max(len(r.legacy) for r in self.rules))

    @property
    def index(self) -> dict[str, MappingRule]:
        return self._index

    @property
    def max_len(self) -> int:
        return self._max_len


@dataclass(frozen=True)
class TextFragment:
    """One alignable unit of transcript with a stable per-source index."""

    index: int
    raw: str
    text: str
    source_id: str


def load_mapping(path: str | Path) -> MappingTable:
    """Parse a `legacy<TAB>replacement<TAB>class` table; `#` starts a comment line.

    Rules keep file order. Duplicate legacy sequences, unknown rule classes
    and lines without exactly three tab-separated fields are rejected with
    the offending line number.
    """
    path = Path(path)
    rules: list[MappingRule] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MappingTableError(
                f"{path}: line {lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        legacy, replacement, rule_class = fields
        if not legacy:
            raise MappingTableError(f"{path}: line {lineno}: empty legacy sequence")
        if rule_class not in RULE_CLASSES:
            raise MappingTableError(
                f"{path}: line {lineno}: unknown rule class {rule_class!r}"
            )
        if legacy in seen:
            raise MappingTableError(
                f"{path}: line {lineno}: duplicate rule for {legacy!r} "
                f"(first defined on line {seen[legacy]})"
            )
        seen[legacy] = lineno
        rules.append(MappingRule(legacy, replacement, rule_class))
    if not rules:
        raise MappingTableError(f"{path}: mapping table has no rules")
    return MappingTable(rules=tuple(rules), source_name=path.name)


def default_mapping() -> MappingTable:
    """The packaged KrutiDev-010 table."""
    ref = resources.files("ttsalign").joinpath("data/krutidev010.tsv")
    with resources.as_file(ref) as path:
        return load_mapping(path)


def decode_legacy_ex(text: str, table: MappingTable) -> tuple[str, int]:
    """Decode and also return the count of unmatched non-whitespace characters."""
    pieces, unmatched = _match_rules(text, table)
    chars, kinds = _flatten(pieces)
    _reorder_prefix_matras(chars, kinds)
    _reorder_rephs(chars, kinds)
    return unicodedata.normalize("NFC", "".join(chars)), unmatched


def decode_legacy(text: str, table: MappingTable) -> str:
    """Greedy longest-match-first decoding of legacy font text to Unicode.

    Unmatched characters pass through unchanged. After replacement, the
    short-i matra is moved behind the consonant cluster it preceded, the
    reph (र्) is moved in front of the cluster it followed, and the result
    is canonically composed (NFC).
    """
    return decode_legacy_ex(text, table)[0]


_KIND_PLAIN = 0
_KIND_PREFIX = 1
_KIND_REPH = 2


def _match_rules(text: str, table: MappingTable) -> tuple[list[tuple[str, int]], int]:
    index = table.index
    max_len = table.max_len
    pieces: list[tuple[str, int]] = []
    unmatched = 0
    i = 0
    n = len(text)
    while i < n:
        rule = None
        for length in range(min(max_len, n - i), 0, -1):
            rule = index.get(text[i:i + length])
            if rule is not None:
                break
        if rule is None:
            ch = text[i]
            pieces.append((ch, _KIND_PLAIN))
            if not ch.isspace():
                unmatched += 1
            i += 1
            continue
        if rule.rule_class == "prefix-matra":
            kind = _KIND_PREFIX
        elif rule.rule_class == "halant-form" and rule.replacement == REPH:
            kind = _KIND_REPH
        else:
            kind = _KIND_PLAIN
        pieces.append((rule.replacement, kind))
        i += len(rule.legacy)
    return pieces, unmatched


def _flatten(pieces: list[tuple[str, int]]) -> tuple[list[str], list[int]]:
    chars: list[str] = []
    kinds: list[int] = []
    for piece, kind in pieces:
        for k, ch in enumerate(piece):
            chars.append(ch)
            # Only the first char of a reph piece is the move marker.
            kinds.append(kind if (kind != _KIND_REPH or k == 0) else _KIND_PLAIN)
    return chars, kinds


def _cluster_end(chars: list[str], start: int) -> int:
    """End index (exclusive) of the consonant cluster starting at `start`."""
    n = len(chars)
    if start >= n or not _is_consonant(chars[start]):
        return start
    k = start + 1
    if k < n and chars[k] == NUKTA:
        k += 1
    while k + 1 < n and chars[k] == HALANT and _is_consonant(chars[k + 1]):
        k += 2
        if k < n and chars[k] == NUKTA:
            k += 1
    return k


def _cluster_start(chars: list[str], end: int) -> int:
    """Start index of the consonant cluster whose last consonant is at `end`."""
    s = end
    while s >= 2 and chars[s - 1] == HALANT:
        t = s - 2
        if t >= 0 and chars[t] == NUKTA:
            t -= 1
        if t >= 0 and _is_consonant(chars[t]):
            s = t
        else:
            break
    return s


def _reorder_prefix_matras(chars: list[str], kinds: list[int]) -> None:
    i = 0
    while i < len(chars):
        if kinds[i] == _KIND_PREFIX:
            end = _cluster_end(chars, i + 1)
            if end > i + 1:
                ch = chars.pop(i)
                kinds.pop(i)
                chars.insert(end - 1, ch)
                kinds.insert(end - 1, _KIND_PLAIN)
                continue  # re-scan from the same index
            kinds[i] = _KIND_PLAIN
        i += 1


def _reorder_rephs(chars: list[str], kinds: list[int]) -> None:
    i = 0
    while i < len(chars):
        if kinds[i] == _KIND_REPH:
            kinds[i] = _KIND_PLAIN
            # Skip vowel signs and modifiers hanging off the preceding cluster.
            p = i - 1
            while p >= 0 and _is_sign(chars[p]):
                p -= 1
            if p >= 0 and _is_consonant(chars[p]):
                dest = _cluster_start(chars, p)
                halant = chars.pop(i + 1)
                reph = chars.pop(i)
                kinds.pop(i + 1)
                kinds.pop(i)
                chars.insert(dest, halant)
                chars.insert(dest, reph)
                kinds.insert(dest, _KIND_PLAIN)
                kinds.insert(dest, _KIND_PLAIN)
        i += 1


def filter_script(text: str) -> str:
    """Keep Devanagari block codepoints plus space, ?, ! and comma.

    All whitespace becomes a single space separator; runs are collapsed and
    the ends trimmed. Idempotent by construction.
    """
    kept = []
    for ch in text:
        if ch.isspace():
            kept.append(" ")
        elif "ऀ" <= ch <= "ॿ" or ch in _ALLOWED_EXTRA:
            kept.append(ch)
    return " ".join("".join(kept).split())


def fragmentize(text: str, source_id: str) -> list[TextFragment]:
    """Split filtered text into fragments on ।, ॥, ? and !.

    The terminator stays with its fragment; whitespace-only pieces are
    dropped; surviving fragments are indexed consecutively from 0.
    """
    pieces: list[str] = []
    buf: list[str] = []
    for ch in text:
        buf.append(ch)
        if ch in _TERMINATORS:
            pieces.append("".join(buf))
            buf = []
    if buf:
        pieces.append("".join(buf))

    fragments: list[TextFragment] = []
    for piece in pieces:
        cleaned = piece.strip()
        if not cleaned:
            continue
        fragments.append(
            TextFragment(index=len(fragments), raw=piece, text=cleaned, source_id=source_id)
        )
    return fragments
