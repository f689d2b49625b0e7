#!/usr/bin/env python3
"""Regenerate the bundled fixture database and corpus under crates/core/data/fixture/.

Source data: the `hanzi` npm package (MIT), which ships the cjk-decomp
decomposition table, the Junda character frequency list and CC-CEDICT.

    npm pack hanzi && tar xzf hanzi-*.tgz
    python3 tools/gen_fixture.py package/lib/data crates/core/data/fixture

The decomposition is expanded until it reaches Kangxi radicals (the ideograph
inventory). Components that have no codepoint of their own and cannot be
expanded further become "unclear" symbols, rendered as circled numbers.
Stroke sequences are derived by expanding each inventory member down to the
CJK Strokes block, with a hand-written table for base components whose
cjk-decomp entry does not reduce cleanly. They follow component order and
only approximate calligraphic stroke order.
"""
import random
import re
import sys
from collections import Counter
from pathlib import Path

SRC = Path(sys.argv[1])
OUT = Path(sys.argv[2])
N_CHARS = 1200
N_LINES = 1200
MAX_UNCLEAR = 19


def js(name):
    t = (SRC / name).read_text(encoding="utf8")
    return t[t.index("`") + 1 : t.rindex("`")]


dec = {}
for line in js("cjk-decomp.txt.js").splitlines():
    m = re.match(r"^([^:]+):([^(]*)\(([^)]*)\)$", line)
    if m:
        dec[m[1]] = (m[2], [a for a in m[3].split(",") if a])

radicals = set(re.findall(r'"(.)"', (SRC / "radicalList.js").read_text(encoding="utf8")))
freq = [l.split("\t")[1] for l in js("frequencyjunda.txt.js").splitlines() if "\t" in l]

STROKES = "".join(chr(c) for c in range(0x31C0, 0x31E4))
assert len(STROKES) == 36
BASIC = {"一": "㇐", "丨": "㇑", "丿": "㇒", "丶": "㇔", "乙": "㇠", "亅": "㇚", "乚": "㇟", "𠃌": "㇆"}
OVERRIDE = {
    "冂": "㇑㇆", "口": "㇑㇕㇐", "囗": "㇑㇕㇐", "コ": "㇕㇐", "冖": "㇔㇖", "艹": "㇐㇑㇑",
    "凵": "㇗㇑", "八": "㇒㇏", "人": "㇒㇏", "入": "㇒㇏", "厂": "㇐㇒", "丆": "㇐㇒",
    "尸": "㇕㇐㇒", "亠": "㇔㇐", "丷": "㇔㇒", "彐": "㇕㇐㇐", "⺕": "㇕㇐㇐", "己": "㇕㇐㇟",
    "巳": "㇕㇐㇟", "已": "㇕㇐㇟", "爫": "㇒㇔㇔㇒", "耂": "㇐㇑㇐㇒", "甘": "㇐㇑㇑㇐㇐",
    "廿": "㇐㇑㇑㇐", "廾": "㇐㇒㇑", "用": "㇒㇆㇐㇐㇑", "日": "㇑㇕㇐㇐", "曰": "㇑㇕㇐㇐",
    "月": "㇒㇆㇐㇐", "目": "㇑㇕㇐㇐㇐", "田": "㇑㇕㇐㇑㇐", "白": "㇒㇑㇕㇐㇐",
    "宀": "㇔㇔㇖", "巾": "㇑㇆㇑", "山": "㇑㇗㇑", "贝": "㇑㇆㇒㇔", "见": "㇑㇆㇒㇟",
    "页": "㇐㇒㇑㇆㇒㇔", "石": "㇐㇒㇑㇕㇐", "弓": "㇕㇐㇉", "虫": "㇑㇕㇐㇑㇐㇀",
    "皿": "㇑㇕㇑㇑㇐", "罒": "㇑㇕㇑㇑㇐", "穴": "㇔㇔㇖㇒㇏", "⻊": "㇑㇕㇐㇑㇐㇀",
    "雨": "㇐㇑㇆㇑㇔㇔㇔㇔", "里": "㇑㇕㇐㇐㇑㇐㇐", "酉": "㇐㇑㇕㇒㇟㇐㇐",
    "自": "㇒㇑㇕㇐㇐㇐", "而": "㇐㇒㇑㇆㇑㇑", "豆": "㇐㇑㇕㇐㇔㇒㇐", "舌": "㇒㇐㇑㇑㇕㇐",
    "青": "㇐㇐㇑㇐㇑㇆㇐㇐", "⺺": "㇕㇐㇐㇑", "覀": "㇐㇑㇕㇑㇑㇐", "言": "㇔㇐㇐㇐㇑㇕㇐",
    "音": "㇔㇐㇔㇒㇐㇑㇕㇐㇐", "谷": "㇒㇔㇒㇏㇑㇕㇐", "舟": "㇒㇒㇆㇔㇐㇔",
    "缶": "㇒㇐㇐㇑㇗㇑", "鱼": "㇇㇑㇕㇐㇑㇐㇐", "虍": "㇑㇐㇕㇒㇐㇟", "鬼": "㇒㇑㇕㇐㇐㇒㇟㇛㇔",
    "屮": "㇑㇗㇑㇑", "禸": "㇑㇆㇛㇔", "角": "㇒㇇㇑㇆㇐㇐㇑", "聿": "㇕㇐㇐㇐㇐㇑",
    "黑": "㇑㇕㇔㇒㇐㇑㇐㇐㇔㇔㇔㇔", "革": "㇐㇑㇑㇐㇑㇕㇐㇐㇑", "出": "㇗㇑㇑㇗㇑",
}


def strokes(c, seen=()):
    if c in STROKES:
        return c
    if c in BASIC:
        return BASIC[c]
    if c in OVERRIDE:
        return OVERRIDE[c]
    if c not in dec or c in seen:
        return None
    t, args = dec[c]
    if t in ("me", "mc", "ml", "mt", "mtl", "msp") and args and args[0] != c:
        return strokes(args[0], seen + (c,))
    if not args or t in ("me", "c"):
        return None
    mult = {"ra": 2, "rd": 2, "r3tr": 3, "r3a": 3, "r3d": 3, "r4sq": 4}.get(t, 1)
    out = ""
    for a in args:
        s = strokes(a, seen + (c,))
        if s is None:
            return None
        out += s * mult
    return out


BIN = {"a": "⿰", "a/t": "⿰", "a/m": "⿰", "a/s": "⿰", "d": "⿱", "d/t": "⿱", "d/m": "⿱",
       "d/s": "⿱", "d/o": "⿱", "stl": "⿸", "str": "⿹", "sbl": "⿺", "st": "⿵", "sb": "⿶",
       "sl": "⿷", "s": "⿴", "w": "⿻", "wt": "⿻", "wb": "⿻", "wtl": "⿻", "wtr": "⿻",
       "wl": "⿻", "wr": "⿻", "wbl": "⿻", "wbr": "⿻", "lock": "⿻"}
TER = {"⿰": "⿲", "⿱": "⿳"}
REPEAT = {"ra": lambda s: "⿰" + s + s, "rd": lambda s: "⿱" + s + s,
          "r3tr": lambda s: "⿱" + s + "⿰" + s + s, "r3a": lambda s: "⿲" + s * 3,
          "r3d": lambda s: "⿳" + s * 3, "r4sq": lambda s: "⿱⿰" + s + s + "⿰" + s + s}
IDC = set("⿰⿱⿲⿳⿴⿵⿶⿷⿸⿹⿺⿻")
unclear = {}


def leaf(c):
    """Atomic component: a real codepoint, or a codepoint-less component mapped to an unclear symbol."""
    if not c.isdigit():
        return c
    if c in unclear:
        return unclear[c]
    if len(unclear) >= MAX_UNCLEAR or strokes(c) is None:
        return None
    unclear[c] = chr(0x2460 + len(unclear))
    return unclear[c]


def ids(c, top=False):
    if c in radicals and not top:
        return c
    if c in radicals:
        return c
    if c not in dec:
        return leaf(c)
    t, args = dec[c]
    if t in BIN or t in REPEAT:
        subs = [ids(a) for a in args]
        if all(s is not None for s in subs):
            if t in BIN:
                op = BIN[t]
                if len(subs) == 2:
                    return op + "".join(subs)
                if len(subs) == 3 and op in TER:
                    return TER[op] + "".join(subs)
            elif len(subs) == 1:
                return REPEAT[t](subs[0])
    return leaf(c)


chars = [c for c in freq if "一" <= c <= "鿿"]
table = {}
for c in chars:
    if len(table) >= N_CHARS:
        break
    saved = dict(unclear)
    s = ids(c, top=True)
    if s is None:
        continue
    leaves = [x for x in s if x not in IDC]
    if all(strokes_of := [(OVERRIDE.get(x) or strokes(x) or strokes(next((k for k, v in unclear.items() if v == x), "")) if x in unclear.values() else strokes(x)) for x in leaves]):
        table[c] = s
    else:
        unclear.clear()
        unclear.update(saved)

inv = sorted({x for s in table.values() for x in s if x not in IDC})
unclear_rev = {v: k for k, v in unclear.items()}
unclear_used = [u for u in inv if u in unclear_rev]
ideographs = [x for x in inv if x not in unclear_rev]
stroke_rows = {x: strokes(unclear_rev.get(x, x)) for x in inv}
assert all(stroke_rows.values())

OUT.mkdir(parents=True, exist_ok=True)
with open(OUT / "ids.txt", "w", encoding="utf8") as f:
    f.write("# textprep decomposition database\n")
    f.write("# marker: \U0002010E\n")
    f.write("# strokes: " + STROKES + "\n")
    f.write("# unclear: " + "".join(unclear_used) + "\n")
    f.write("# derived from cjk-decomp via tools/gen_fixture.py\n")
    for x in ideographs:
        if x not in table:
            f.write(f"{x} {x}\n")
    for c in sorted(table):
        f.write(f"{c} {table[c]}\n")
with open(OUT / "strokes.txt", "w", encoding="utf8") as f:
    f.write("# stroke sequences for every inventory member\n")
    for x in inv:
        f.write(f"{x} {stroke_rows[x]}\n")

# Corpus: seeded lines of CC-CEDICT words whose characters are all covered,
# mixed with kana, Latin, digits and punctuation that pass through untouched.
covered = set(table) | set(ideographs)
words = []
for line in js("cedict_ts.u8.js").splitlines():
    if line.startswith("#"):
        continue
    parts = line.split(" ")
    if len(parts) < 2:
        continue
    simp = parts[1]
    if 1 <= len(simp) <= 4 and all(ch in covered for ch in simp):
        words.append(simp)
words = sorted(set(words))
other = ["の", "を", "に", "は", "が", "した", "する", "です", "示す", "について", "ABC", "UNMT",
         "BLEU", "2", "3", "10", "2018", "、", "。", "，", "「", "」", "(", ")", "%", "x1"]
kana_suffix = ["す", "した", "する", "って", "める", "い"]
rng = random.Random(20190601)
lines = []
for _ in range(N_LINES):
    n = rng.randint(3, 18)
    toks = []
    for _ in range(n):
        u = rng.random()
        if u < 0.70:
            toks.append(rng.choice(words))
        elif u < 0.80:
            toks.append(rng.choice(words)[:1] + rng.choice(kana_suffix))
        else:
            toks.append(rng.choice(other))
    lines.append(" ".join(toks))
(OUT / "corpus.txt").write_text("\n".join(lines) + "\n", encoding="utf8")
print(f"chars={len(table)} ideographs={len(ideographs)} unclear={len(unclear_used)} words={len(words)} lines={len(lines)}")
