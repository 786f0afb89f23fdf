"""Regenerate src/xlstr/data/translit/ethiopic.tsv from Unicode character names.

Run once after editing the consonant map below; the TSV is committed.
"""

import sys
import unicodedata
from pathlib import Path

CONSONANTS = {
    "H": "h", "L": "l", "HH": "h", "M": "m", "SZ": "s", "R": "r", "S": "s",
    "SH": "sh", "Q": "q", "QH": "q", "B": "b", "V": "v", "T": "t", "C": "ch",
    "X": "h", "N": "n", "NY": "ny", "GLOTTAL": "", "K": "k", "KX": "kh",
    "W": "w", "PHARYNGEAL": "'", "Z": "z", "ZH": "zh", "Y": "y", "D": "d",
    "DD": "d", "J": "j", "G": "g", "GG": "ng", "TH": "t'", "CH": "ch'",
    "PH": "p'", "TS": "ts'", "TZ": "ts'", "F": "f", "P": "p",
}
PLAIN_ORDERS = ["e", "u", "i", "a", "ie", "", "o"]
LABIAL_ORDERS = {0: "we", 2: "wi", 3: "wa", 4: "wie", 5: "w"}


def name(cp):
    try:
        return unicodedata.name(chr(cp))
    except ValueError:
        return None


def rows():
    out = []
    for base in range(0x1200, 0x1358, 8):
        sixth = name(base + 5)
        first = name(base)
        if first is None:
            continue
        syl = first.replace("ETHIOPIC SYLLABLE ", "")
        labial = name(base + 1) is None
        if labial:
            cons = CONSONANTS[syl[:-2]]  # strip "WA"
            for pos, vowel in LABIAL_ORDERS.items():
                if name(base + pos):
                    out.append((chr(base + pos), cons + vowel))
            continue
        key = sixth.replace("ETHIOPIC SYLLABLE ", "")
        key = key.split(" ")[0] if " " in key else key[:-1]
        cons = CONSONANTS[key]
        for pos, vowel in enumerate(PLAIN_ORDERS):
            text = cons + vowel
            if pos == 5 and not text:
                text = "e"
            out.append((chr(base + pos), text))
        last = name(base + 7)
        if last:
            out.append((chr(base + 7), cons + ("oa" if last.endswith("OA") else "wa")))
    out += [("ፘ", "mya"), ("ፙ", "rya"), ("ፚ", "fya")]
    out += [(chr(c), "") for c in (0x135D, 0x135E, 0x135F, 0x1360, 0x1368)]
    out += [("፡", " "), ("።", "."), ("፣", ","), ("፤", ";"), ("፥", ":"), ("፦", ":"), ("፧", "?")]
    out += [(chr(0x1369 + i), str(i + 1)) for i in range(9)]
    out += [(chr(0x1372 + i), str(10 * (i + 1))) for i in range(9)]
    out += [("፻", "100"), ("፼", "10000")]
    return out


def main(dest):
    lines = ["# Ethiopic syllabary -> Latin (consonant + vowel order).",
             "# Sixth-order forms are bare consonants; generated by scripts/gen_ethiopic_table.py",
             "#!script=Ethiopic"]
    for src, dst in rows():
        lines.append(f"{src}\t{dst}")
    Path(dest).write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/xlstr/data/translit/ethiopic.tsv")
