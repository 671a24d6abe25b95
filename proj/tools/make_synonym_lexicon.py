#!/usr/bin/env python3
"""Build the synonym lexicon (term<TAB>syn1,syn2,...) from a WordNet 3.0 database directory.

Usage: make_synonym_lexicon.py <wordnet-dict-dir> <out.tsv> [--all]

For each surface form, synonyms are the union of lemma names over every synset of
every base form of the word (exception lists plus detachment rules, all parts of
speech). Without --all only lemmas with at least one sense-tagged occurrence are
kept as keys, which keeps the shipped file small.
"""
import os
import sys
from collections import defaultdict

POS = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}
RULES = {
    "n": [("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"),
          ("shes", "sh"), ("men", "man"), ("ies", "y")],
    "v": [("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", "e"),
          ("ed", ""), ("ing", "e"), ("ing", "")],
    "a": [("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
    "r": [],
}


def read_index(root, pos):
    index = {}
    tagged = set()
    with open(os.path.join(root, "index." + POS[pos]), encoding="latin-1") as f:
        for line in f:
            if line.startswith(" "):
                continue
            parts = line.split()
            lemma, n_synsets, n_ptrs = parts[0], int(parts[2]), int(parts[3])
            rest = parts[4 + n_ptrs:]
            tag_count = int(rest[1])
            index[lemma] = rest[2:2 + n_synsets]
            if tag_count > 0:
                tagged.add(lemma)
    return index, tagged


def read_synset_words(root, pos, offsets):
    # Offsets assume LF line endings; some redistributions ship CRLF.
    with open(os.path.join(root, "data." + POS[pos]), "rb") as f:
        data = f.read().replace(b"\r\n", b"\n")
    words = {}
    for off in sorted(set(offsets)):
        start = int(off)
        parts = data[start:data.index(b"\n", start)].decode("latin-1").split()
        count = int(parts[3], 16)
        names = []
        for i in range(count):
            w = parts[4 + 2 * i].lower()
            if "(" in w:
                w = w[: w.index("(")]
            names.append(w)
        words[off] = names
    return words


def read_exceptions(root, pos):
    exc = defaultdict(list)
    with open(os.path.join(root, POS[pos] + ".exc"), encoding="latin-1") as f:
        for line in f:
            parts = line.split()
            exc[parts[0]].extend(parts[1:])
    return exc


def base_forms(word, pos, index, exc):
    forms = set()
    if word in index:
        forms.add(word)
    for base in exc.get(word, []):
        if base in index:
            forms.add(base)
    for suffix, repl in RULES[pos]:
        if word.endswith(suffix) and len(word) > len(suffix):
            cand = word[: len(word) - len(suffix)] + repl
            if cand in index:
                forms.add(cand)
    return forms


def main():
    if len(sys.argv) < 3:
        sys.exit(__doc__)
    root, out = sys.argv[1], sys.argv[2]
    keep_all = "--all" in sys.argv[3:]
    indexes, excs, synset_words = {}, {}, {}
    keys = set()
    for pos in POS:
        index, tagged = read_index(root, pos)
        indexes[pos] = index
        excs[pos] = read_exceptions(root, pos)
        synset_words[pos] = read_synset_words(
            root, pos, [o for offs in index.values() for o in offs])
        keys |= set(index) if keep_all else tagged
        for form, bases in excs[pos].items():
            if any(b in keys for b in bases):
                keys.add(form)
    keys = {k for k in keys if "_" not in k and k.isalpha()}

    with open(out, "w", encoding="utf-8") as f:
        f.write("# Synonym lexicon derived from WordNet 3.0 (see data/WORDNET_LICENSE).\n")
        f.write("# term<TAB>syn1,syn2,...\n")
        for word in sorted(keys):
            syns = set()
            for pos in POS:
                for base in base_forms(word, pos, indexes[pos], excs[pos]):
                    for off in indexes[pos][base]:
                        syns.update(synset_words[pos][off])
            syns.discard(word)
            f.write(word + "\t" + ",".join(sorted(syns)) + "\n")


if __name__ == "__main__":
    main()
