"""Regenerate lexicon.txt and vocabulary.txt from the wordfreq English list.

Usage: python build_wordlists.py path/to/wordfreq/data/large_en.msgpack.gz

Requires `msgpack`. The wordfreq data is CC-BY-SA 4.0 (see NOTICE.md).
"""
import gzip
import re
import sys
from pathlib import Path

import msgpack

LEXICON_SIZE = 60_000
VOCAB_SOURCE_SIZE = 40_000
COMMON_RANK = 3_000
HERE = Path(__file__).parent


def main(path):
    buckets = msgpack.unpackb(gzip.open(path).read(), raw=False)[1:]
    words = [w for bucket in buckets for w in bucket if re.fullmatch("[a-z]+", w)]

    lexicon = [w for w in words if len(w) > 1 or w in ("a", "i")][:LEXICON_SIZE]
    (HERE / "lexicon.txt").write_text("\n".join(lexicon) + "\n")

    keys, abbrevs = set(), set()
    for name in ("lookup.tsv", "acronyms.tsv"):
        for line in (HERE / name).read_text().splitlines():
            key, values = line.split("\t")
            keys.add(key)
            abbrevs.update(v for v in values.split("|") if v.isalpha())

    rank = {w: i for i, w in enumerate(words)}
    vocab = []
    for w in words[:VOCAB_SOURCE_SIZE]:
        if len(w) < 3 or not re.search("[aeiouy]", w):
            continue
        if w in abbrevs and w not in keys and rank[w] >= COMMON_RANK:
            continue
        vocab.append(w)
    (HERE / "vocabulary.txt").write_text("\n".join(sorted(vocab)) + "\n")
    print(f"lexicon={len(lexicon)} vocabulary={len(vocab)}")


if __name__ == "__main__":
    main(sys.argv[1])
