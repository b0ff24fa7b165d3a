#!/usr/bin/env python3
"""Regenerate the packed grapheme-break property table and the segmentation
golden files from the `regex` module's Unicode data.

Usage: python3 tools/gen_unicode_tables.py  (run from the repo root)

Outputs:
  src/unicode_tables.cpp        packed property ranges
  tests/data/grapheme_golden.tsv       Devanagari conformance cases
  tests/data/segmentation_mixed.tsv    mixed-script / edge-rule cases
"""

import sys
import regex

MAX_CP = 0x110000

GCB_CLASSES = [
    ("Other", 0),
    ("CR", 1),
    ("LF", 2),
    ("Control", 3),
    ("Extend", 4),
    ("ZWJ", 5),
    ("Regional_Indicator", 6),
    ("Prepend", 7),
    ("SpacingMark", 8),
    ("L", 9),
    ("V", 10),
    ("T", 11),
    ("LV", 12),
    ("LVT", 13),
]

FLAG_INCB_EXTEND = 0x10
FLAG_EXT_PICT = 0x20
FLAG_INCB_LINKER = 0x40
FLAG_INCB_CONSONANT = 0x80


def class_ranges(pattern, cps, text):
    """Yield (lo, hi) codepoint ranges (inclusive) matching `pattern`."""
    out = []
    for m in regex.finditer(pattern + "+", text):
        a, b = m.span()
        run_lo = cps[a]
        prev = cps[a]
        for i in range(a + 1, b):
            c = cps[i]
            if c != prev + 1:
                out.append((run_lo, prev))
                run_lo = c
            prev = c
        out.append((run_lo, prev))
    return out


def main():
    cps = [c for c in range(MAX_CP) if not (0xD800 <= c <= 0xDFFF)]
    text = "".join(map(chr, cps))

    values = bytearray(MAX_CP)
    # Surrogates cannot occur in decoded scalar input; class them Control.
    for c in range(0xD800, 0xE000):
        values[c] = 3

    for name, code in GCB_CLASSES:
        if name == "Other":
            continue
        for lo, hi in class_ranges(rf"\p{{gcb={name}}}", cps, text):
            for c in range(lo, hi + 1):
                values[c] |= code

    for pat, flag in [
        (r"\p{InCB=Extend}", FLAG_INCB_EXTEND),
        (r"\p{Extended_Pictographic}", FLAG_EXT_PICT),
        (r"\p{InCB=Linker}", FLAG_INCB_LINKER),
        (r"\p{InCB=Consonant}", FLAG_INCB_CONSONANT),
    ]:
        for lo, hi in class_ranges(pat, cps, text):
            for c in range(lo, hi + 1):
                values[c] |= flag

    # Emit maximal ranges of equal nonzero value.
    ranges = []
    c = 0
    while c < MAX_CP:
        v = values[c]
        d = c
        while d + 1 < MAX_CP and values[d + 1] == v:
            d += 1
        if v != 0:
            ranges.append((c, d, v))
        c = d + 1

    with open("src/unicode_tables.cpp", "w", encoding="utf-8") as f:
        f.write(
            "// Generated by tools/gen_unicode_tables.py -- do not edit by hand.\n"
            f"// Property data source: Python regex module {regex.__version__}.\n"
            "\n"
            '#include "devseq/unicode.hpp"\n'
            "\n"
            "namespace devseq::uni {\n"
            "\n"
            "const GbRange kGbRanges[] = {\n"
        )
        for lo, hi, v in ranges:
            f.write(f"    {{0x{lo:X}, 0x{hi:X}, 0x{v:02X}}},\n")
        f.write(
            "};\n"
            "\n"
            f"const std::size_t kGbRangeCount = {len(ranges)};\n"
            "\n"
            "}  // namespace devseq::uni\n"
        )
    print(f"wrote src/unicode_tables.cpp ({len(ranges)} ranges)")

    write_goldens()


def esc(s):
    out = []
    for ch in s:
        c = ord(ch)
        cat = regex.fullmatch(r"[\p{Cc}\p{Cf}\p{Cn}\p{Co}\p{Zl}\p{Zp}]", ch)
        if ch == "\\":
            out.append("\\\\")
        elif ch == "\t" or c < 0x20 or (0x7F <= c <= 0x9F) or cat or c in (
            0x200C,
            0x200D,
            0xFE0F,
            0xFEFF,
        ):
            out.append(f"\\u{{{c:X}}}")
        else:
            out.append(ch)
    return "".join(out)


def clusters(s):
    return [m.group() for m in regex.finditer(r"\X", s)]


def write_goldens():
    dev = [
        "नेपाल",
        "क",
        "का", "कि", "की", "कु", "कू", "कृ", "के", "कै", "को", "कौ",
        "कं", "कः", "कँ", "कॅ",
        "कां", "कें", "कौं",
        "क़", "क़",          # ka+nukta, precomposed qa
        "क़ी",                    # ka+nukta+ii
        "क्",                     # word-final virama
        "क्क", "क्ष", "त्र", "ज्ञ", "द्ध", "श्र", "द्व", "ह्म",
        "क्रि", "स्त्री", "द्ध्र्य",
        "क्‍क",              # virama + ZWJ + ka (joins)
        "क्‌क",              # virama + ZWNJ + ka (breaks)
        "नमस्ते", "हिन्दी", "काठमाडौं", "सँग", "देखि", "माथि", "भन्ने",
        "श्रीमान्",
        "अ", "आऋ", "ॐ", "।", "०१२",
        "ा", "्", "ं",
        "रुपैयाँ",
        "कabcख",
        "क\r\nख",
        "क\tख",
    ]
    with open("tests/data/grapheme_golden.tsv", "w", encoding="utf-8") as f:
        f.write("# input<TAB>cluster1<TAB>cluster2...  (\\u{XXXX} escapes)\n")
        for s in dev:
            cl = clusters(s)
            assert "".join(cl) == s
            f.write(esc(s) + "\t" + "\t".join(esc(c) for c in cl) + "\n")
    print(f"wrote tests/data/grapheme_golden.tsv ({len(dev)} cases)")

    import random

    rnd = random.Random(20250809)
    pools = [
        [chr(c) for c in range(0x20, 0x7F)],                       # ASCII
        [chr(c) for c in range(0x0900, 0x0980)],                   # Devanagari
        [chr(c) for c in range(0x0980, 0x0A00)],                   # Bengali
        [chr(c) for c in range(0x0B80, 0x0C00)],                   # Tamil
        [chr(c) for c in range(0x1100, 0x1160)]
        + [chr(c) for c in range(0xAC00, 0xAC60)]
        + [chr(c) for c in range(0x11A8, 0x11C3)],                 # Hangul L/LV/T
        [chr(c) for c in range(0x0300, 0x0370)],                   # combining
        ["\U0001F1F3", "\U0001F1F5", "\U0001F1EF", "\U0001F1F4"],  # RI
        ["\U0001F468", "\U0001F469", "\U0001F467", "‍", "️", "❤"],
        ["\r", "\n", "\t", chr(0), chr(0x200C), chr(0x200D), chr(0x0600)],
    ]
    cases = []
    for _ in range(160):
        n = rnd.randint(1, 12)
        s = "".join(rnd.choice(rnd.choice(pools)) for _ in range(n))

        cases.append(s)
    zwj, ri_np = chr(0x200D), chr(0x1F1F3) + chr(0x1F1F5)
    cases += [
        "\r\n",
        "\n\r",
        ri_np * 2,
        ri_np * 3,
        chr(0x1F468) + zwj + chr(0x1F469) + zwj + chr(0x1F467),
        "a" + chr(0x300) + chr(0x316) + "b",
        chr(0x0600) + "12",
    ]
    with open("tests/data/segmentation_mixed.tsv", "w", encoding="utf-8") as f:
        f.write("# input<TAB>cluster1<TAB>cluster2...  (\\u{XXXX} escapes)\n")
        for s in cases:
            cl = clusters(s)
            assert "".join(cl) == s
            f.write(esc(s) + "\t" + "\t".join(esc(c) for c in cl) + "\n")
    print(f"wrote tests/data/segmentation_mixed.tsv ({len(cases)} cases)")


if __name__ == "__main__":
    sys.exit(main())
