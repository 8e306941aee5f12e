"""Builds the entity-type fixture: a mentions TSV and a lexicon whose
per-language name coverage reproduces the published per-type counts.

Entity j of a type has a name in language L iff j < count[type][L].
Every tenth entity is mentioned twice to exercise de-duplication.
"""
import json
from pathlib import Path

LANGS = ["ar", "de", "es", "fr", "it", "ja", "ko", "th", "tr", "zh"]
# type: all, then one count per language in LANGS order
COUNTS = {
    "PERSON": [1507, 908, 1083, 1081, 1114, 1069, 1021, 941, 673, 933, 1014],
    "ORG": [1082, 648, 785, 788, 788, 767, 745, 680, 470, 660, 734],
    "GPE": [522, 291, 360, 363, 369, 351, 333, 307, 201, 292, 330],
    "DATE": [379, 221, 264, 269, 268, 263, 246, 229, 160, 231, 248],
    "WORK_OF_ART": [282, 171, 209, 205, 214, 207, 194, 175, 122, 178, 193],
    "EVENT": [187, 105, 135, 137, 138, 134, 121, 105, 73, 108, 120],
    "LOC": [183, 102, 127, 128, 128, 125, 118, 101, 69, 105, 121],
    "NORP": [169, 103, 124, 124, 125, 122, 116, 105, 67, 98, 116],
    "FAC": [135, 78, 94, 95, 96, 94, 88, 80, 43, 80, 87],
    "PRODUCT": [51, 37, 42, 43, 43, 42, 40, 37, 28, 37, 39],
    "LAW": [31, 21, 23, 24, 23, 23, 22, 21, 16, 22, 22],
    "QUANTITY": [28, 14, 19, 19, 20, 20, 18, 14, 10, 13, 18],
    "MONEY": [15, 5, 8, 8, 8, 8, 6, 5, 5, 6, 7],
    "TIME": [10, 5, 7, 7, 7, 7, 7, 4, 3, 5, 6],
    "PERCENT": [4, 1, 2, 3, 3, 2, 3, 2, 1, 1, 2],
    "LANGUAGE": [2, 1, 2, 2, 2, 2, 1, 1, 1, 1, 1],
}
FETCHED_AT = 1718000000


def main():
    here = Path(__file__).parent
    mentions = ["qid\ttype"]
    entries = []
    next_id = 100001
    for etype, (total, *per_lang) in COUNTS.items():
        for j in range(total):
            qid = f"Q{next_id}"
            next_id += 1
            mentions.append(f"{qid}\t{etype}")
            if j % 10 == 0:
                mentions.append(f"{qid}\t{etype}")
            names = {"en": {"label": f"{etype.lower()} {j}"}}
            for lang, count in zip(LANGS, per_lang):
                if j < count:
                    names[lang] = {"label": f"{etype.lower()} {j} {lang}"}
            entries.append({"qid": qid, "source": "file", "fetched_at": FETCHED_AT, "names": names})
    entries.sort(key=lambda e: int(e["qid"][1:]))
    header = {"format": "eamt-lexicon", "version": 1, "entries": len(entries)}
    lines = [json.dumps(header, separators=(",", ":"))]
    lines += [json.dumps(e, ensure_ascii=False, separators=(",", ":")) for e in entries]
    (here / "lexicon.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (here / "mentions.tsv").write_text("\n".join(mentions) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
