"""Decoding KrutiDev-encoded transcript text to Unicode Devanagari.

Legacy Devanagari fonts store glyph codes in ASCII positions, so a
transcript that *displays* as Hindi is byte-wise gibberish like
"Hkkjr ljdkj". This walkthrough decodes single words, shows the glyph
reordering rules in action, and runs a whole bulletin line through the
decode -> filter -> fragmentize chain.

Run:  python demos/01_decode_legacy_text.py
"""

from ttsalign import decode_legacy, default_mapping, filter_script, fragmentize
from ttsalign.textnorm import decode_legacy_ex

table = default_mapping()
print(f"packaged mapping table: {table.source_name}, {len(table.rules)} rules\n")

print("simple words (greedy longest-match replacement):")
for legacy in ["Hkkjr", "ljdkj", "lekpkj", ",d"]:
    print(f"  {legacy!r:12} -> {decode_legacy(legacy, table)}")

print("\nthe short-i matra is written BEFORE its consonant in the font,")
print("but AFTER it in Unicode; the decoder moves it:")
for legacy in ["fganh", "f'k{kk", "ft+yk"]:
    print(f"  {legacy!r:12} -> {decode_legacy(legacy, table)}")

print("\nthe reph (र्) is written AFTER its syllable in the font,")
print("but BEFORE the following cluster in Unicode:")
for legacy in ["/keZ", "deZ", "fo|kFkhZ"]:
    print(f"  {legacy!r:12} -> {decode_legacy(legacy, table)}")

print("\nunknown characters pass through and are counted:")
decoded, unmatched = decode_legacy_ex("Hkkjr *** ljdkj", table)
print(f"  decoded: {decoded}")
print(f"  unmatched non-whitespace characters: {unmatched}")

print("\nfull chain on one bulletin line:")
line = "vkdk'kok.kh lekpkjA Hkkjr ljdkj us ?kks\"k.kk dhA (Delhi, 2021)"
decoded = decode_legacy(line, table)
filtered = filter_script(decoded)
print(f"  raw bytes : {line}")
print(f"  decoded   : {decoded}")
print(f"  filtered  : {filtered}")
for frag in fragmentize(filtered, "demo"):
    print(f"  fragment {frag.index}: {frag.text}")
