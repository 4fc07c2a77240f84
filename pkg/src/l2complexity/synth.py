"""Synthetic transcripts and resources for tests and demos.

Real corpora and the licensed frequency/n-gram resources cannot be shipped, so
this module generates parsed, tagged learner-like speech from a small grammar,
plus matching resource tables. Everything is driven by a seeded RNG and is
reproducible.

    python -m l2complexity.synth resources DIR
    python -m l2complexity.synth fixtures DIR
"""

from __future__ import annotations

import argparse
import hashlib
import random
from pathlib import Path

from .alignment import DEFAULT_HESITATIONS, WordClassifier, write_transcripts
from .transcript_io import Document, Sentence, Token, dump_corpus
from .treebank import TreeNode, to_string

T = TreeNode
pre = TreeNode.pre

# (singular, plural, rank)
NOUNS = [
    ("system", "systems", 310), ("government", "governments", 180), ("country", "countries", 150),
    ("people", "people", 90), ("school", "schools", 240), ("student", "students", 420),
    ("teacher", "teachers", 610), ("problem", "problems", 200), ("election", "elections", 1300),
    ("parliament", "parliaments", 2600), ("minister", "ministers", 1900), ("party", "parties", 520),
    ("vote", "votes", 880), ("law", "laws", 460), ("relation", "relations", 1500),
    ("monarchy", "monarchies", 7400), ("referendum", "referendums", 9800), ("treaty", "treaties", 4100),
    ("sovereignty", "sovereignties", 12500), ("coalition", "coalitions", 5200), ("idea", "ideas", 380),
    ("talk", "talks", 700), ("question", "questions", 290), ("example", "examples", 330),
    ("citizen", "citizens", 2300), ("constitution", "constitutions", 3900), ("economy", "economies", 1100),
    ("tradition", "traditions", 2700), ("influence", "influences", 1600), ("dog", "dogs", 1400),
]
ADJECTIVES = [
    ("important", 300), ("political", 640), ("big", 160), ("new", 60), ("good", 70),
    ("british", 1200), ("european", 1700), ("difficult", 900), ("interesting", 1250),
    ("parliamentary", 8800), ("constitutional", 7900), ("unprecedented", 14200), ("small", 230),
    ("controversial", 6100), ("democratic", 3300),
]
ADVERBS = [
    ("really", 250), ("very", 80), ("also", 65), ("actually", 700), ("probably", 900),
    ("nowadays", 6400), ("consequently", 9100), ("often", 420),
]
# lemma, VBD, VBZ, VBP, VB, rank, transitive
VERBS = [
    ("think", "thought", "thinks", "think", "think", 110, False),
    ("know", "knew", "knows", "know", "know", 95, False),
    ("say", "said", "says", "say", "say", 40, False),
    ("vote", "voted", "votes", "vote", "vote", 1300, False),
    ("leave", "left", "leaves", "leave", "leave", 210, True),
    ("change", "changed", "changes", "change", "change", 330, True),
    ("support", "supported", "supports", "support", "support", 520, True),
    ("elect", "elected", "elects", "elect", "elect", 2900, True),
    ("govern", "governed", "governs", "govern", "govern", 4300, True),
    ("influence", "influenced", "influences", "influence", "influence", 1800, True),
    ("discuss", "discussed", "discusses", "discuss", "discuss", 1600, True),
    ("abolish", "abolished", "abolishes", "abolish", "abolish", 8700, True),
    ("negotiate", "negotiated", "negotiates", "negotiate", "negotiate", 5100, True),
    ("like", "liked", "likes", "like", "like", 150, True),
]
COMPLEMENT_VERBS = [v for v in VERBS if v[0] in ("think", "know", "say")]
PRONOUNS = [("I", "i", "1s"), ("we", "we", "1p"), ("they", "they", "3p"), ("he", "he", "3s"), ("she", "she", "3s")]
PREPOSITIONS = ["of", "in", "about", "with", "for"]
SUBORDINATORS = ["because", "although", "when", "if"]
REGISTERS = ("spoken", "magazine", "fiction", "news", "academic")

FUNCTION_LEMMAS = {"is": "be", "are": "be", "was": "be", "were": "be", "has": "have", "had": "have",
                   "does": "do", "did": "do"}


class Generator:
    """Random sentence generator; ``level`` in [0, 1] raises syntactic and lexical complexity."""

    def __init__(self, seed: int, level: float = 0.5, bias: str | None = None):
        self.rng = random.Random(seed)
        self.level = level
        self.bias = bias

    def chance(self, p: float) -> bool:
        return self.rng.random() < p

    def _pick_ranked(self, items, rank_of):
        # higher level shifts the draw toward rarer entries
        weights = []
        for it in items:
            rare = rank_of(it) > 2000
            w = (0.4 + 1.6 * self.level) if rare else 1.0
            if self.bias == "academic" and rare:
                w *= 2.0
            if self.bias == "spoken" and not rare:
                w *= 2.0
            weights.append(w)
        return self.rng.choices(items, weights)[0]

    def noun(self):
        return self._pick_ranked(NOUNS, lambda n: n[2])

    def adjective(self):
        return self._pick_ranked(ADJECTIVES, lambda a: a[1])[0]

    def adverb(self):
        return self._pick_ranked(ADVERBS, lambda a: a[1])[0]

    def verb(self, transitive=None):
        pool = VERBS if transitive is None else [v for v in VERBS if v[6] == transitive]
        return self._pick_ranked(pool, lambda v: v[5])

    # -- phrases --

    def simple_np(self, depth=0):
        """Returns (tree, person) where person is used for agreement."""
        r = self.rng.random()
        if r < 0.25 and depth == 0:
            form, _, person = self.rng.choice(PRONOUNS)
            return T("NP", (pre("PRP", form),)), person
        sing, plural, _ = self.noun()
        is_plural = self.chance(0.35)
        head = pre("NNS", plural) if is_plural else pre("NN", sing)
        det = pre("DT", self.rng.choice(["the", "a"]) if not is_plural else "the")
        kids = [det]
        if self.chance(0.25 + 0.35 * self.level):
            kids.append(pre("JJ", self.adjective()))
        if self.chance(0.1 + 0.15 * self.level):
            kids.append(pre("NN", self.noun()[0]))
        kids.append(head)
        return T("NP", tuple(kids)), "3p" if is_plural else "3s"

    def np(self, depth=0):
        base, person = self.simple_np(depth)
        if base.children[0].label == "PRP" or depth > 1:
            return base, person
        r = self.rng.random()
        p_pp = 0.12 + 0.2 * self.level
        p_rel = 0.05 + 0.15 * self.level
        p_coord = 0.06
        if r < p_pp:
            inner, _ = self.simple_np(depth + 1)
            pp = T("PP", (pre("IN", self.rng.choice(PREPOSITIONS)), inner))
            return T("NP", (base, pp)), person
        if r < p_pp + p_rel:
            rel = T("SBAR", (T("WHNP", (pre("WDT", "that"),)), T("S", (self.vp(person, depth + 2),))))
            return T("NP", (base, rel)), person
        if r < p_pp + p_rel + p_coord:
            other, _ = self.simple_np(depth + 1)
            return T("NP", (base, pre("CC", "and"), other)), "3p"
        return base, person

    def finite(self, verb, person, tense):
        lemma, vbd, vbz, vbp, _, _, _ = verb
        if tense == "past":
            return pre("VBD", vbd)
        if person == "3s":
            return pre("VBZ", vbz)
        return pre("VBP", vbp)

    def vp(self, person, depth=0, tense=None):
        tense = tense or ("past" if self.chance(0.5) else "present")
        r = self.rng.random()
        if depth < 2 and r < 0.12 + 0.2 * self.level:
            verb = self.rng.choice(COMPLEMENT_VERBS)
            comp = [pre("IN", "that")] if self.chance(0.6) else []
            sbar = T("SBAR", (*comp, self.clause(depth + 1)))
            return T("VP", (self.finite(verb, person, tense), sbar))
        if depth < 2 and r < 0.2 + 0.25 * self.level:
            verb = self.verb(True)
            inf = T("S", (T("VP", (pre("TO", "to"), T("VP", (pre("VB", verb[4]), self.np(depth + 1)[0])))),))
            want = ("want", "wanted", "wants", "want", "want", 120, False)
            return T("VP", (self.finite(want, person, tense), inf))
        if r < 0.3 + 0.2 * self.level:
            verb = self.verb(True)
            inner = T("VP", (pre("VB", verb[4]), self.np(depth + 1)[0]))
            return T("VP", (pre("MD", self.rng.choice(["can", "should", "will"])), inner))
        verb = self.verb()
        kids = [self.finite(verb, person, tense)]
        if verb[6]:
            kids.append(self.np(depth + 1)[0])
        if self.chance(0.2):
            kids.append(T("ADVP", (pre("RB", self.adverb()),)))
        if depth < 2 and self.chance(0.05 + 0.15 * self.level):
            kids.append(T("SBAR", (pre("IN", self.rng.choice(SUBORDINATORS)), self.clause(depth + 1))))
        vp = T("VP", tuple(kids))
        if depth < 2 and self.chance(0.08):
            other = self.verb(True)
            vp2 = T("VP", (self.finite(other, person, tense), self.np(depth + 1)[0]))
            vp = T("VP", (vp, pre("CC", "and"), vp2))
        return vp

    def clause(self, depth=0):
        subj, person = self.np(depth)
        return T("S", (subj, self.vp(person, depth)))

    def sentence(self) -> TreeNode:
        r = self.rng.random()
        if r < 0.08:
            body = T("FRAG", (self.np()[0], pre(".", ".")))
        elif r < 0.16:
            body = T("S", (self.clause(), pre("CC", self.rng.choice(["and", "but"])), self.clause(), pre(".", ".")))
        else:
            s = self.clause()
            kids = list(s.children)
            if self.chance(0.2 - 0.1 * self.level):
                kids.insert(0, T("INTJ", (pre("UH", self.rng.choice(["uh", "uhm"])),)))
            body = T("S", (*kids, pre(".", ".")))
        return T("ROOT", (body,))


_LEMMAS = {}
for _sing, _pl, _ in NOUNS:
    _LEMMAS[_pl] = _sing
for _v in VERBS + [("want", "wanted", "wants", "want", "want", 120, False)]:
    for _f in _v[1:5]:
        _LEMMAS[_f] = _v[0]
_LEMMAS.update(FUNCTION_LEMMAS)


def sentence_from_tree(tree: TreeNode) -> Sentence:
    tokens = []
    for p in tree.preterminals():
        form = p.children[0].leaf_text
        tokens.append(Token(form, _LEMMAS.get(form.lower(), form.lower()), p.label))
    return Sentence(tuple(tokens), to_string(tree), tree)


def make_document(doc_id, speaker_id, subgroup, n_sentences, seed, level) -> Document:
    gen = Generator(seed, level)
    sents = tuple(sentence_from_tree(gen.sentence()) for _ in range(n_sentences))
    return Document(doc_id, speaker_id, subgroup, sents)


def make_corpus(n_docs: int = 24, seed: int = 7, min_sents: int = 8, max_sents: int = 16):
    """Documents alternating school/university; returns (docs, grade labels for school docs)."""
    rng = random.Random(seed)
    docs, grades = [], {}
    for k in range(n_docs):
        school = k % 2 == 0
        grade = 10 + (k // 2) % 3
        level = (grade - 10) / 2 * 0.7 + rng.random() * 0.3 if school else 0.4 + rng.random() * 0.6
        doc_id = f"{'sch' if school else 'uni'}{k:03d}"
        n = rng.randint(min_sents, max_sents)
        docs.append(make_document(doc_id, f"spk{k:03d}", "school" if school else "university",
                                  n, rng.randrange(1 << 30), level))
        grades[doc_id] = grade if school else 10 + rng.randrange(3)
    return docs, grades


# --- corruption ---------------------------------------------------------------


def _prune(tree: TreeNode, drop: set[int], counter: list[int]) -> TreeNode | None:
    if tree.is_leaf:
        k = counter[0]
        counter[0] += 1
        return None if k in drop else tree
    kids = [c for c in (_prune(c, drop, counter) for c in tree.children) if c is not None]
    return T(tree.label, tuple(kids)) if kids else None


def delete_tokens(sentence: Sentence, drop: set[int]) -> Sentence | None:
    """The sentence without the tokens at ``drop``, with emptied constituents removed."""
    if not drop:
        return sentence
    tree = _prune(sentence.tree, drop, [0])
    if tree is None:
        return None
    tokens = tuple(t for k, t in enumerate(sentence.tokens) if k not in drop)
    return Sentence(tokens, to_string(tree), tree)


def corrupt_function_words(docs, fraction: float = 0.1, seed: int = 0, classifier=None):
    """Copy of ``docs`` with ``fraction`` of function-word tokens deleted at random."""
    classifier = classifier or WordClassifier()
    rng = random.Random(seed)
    out = []
    for doc in docs:
        positions = [
            (si, ti)
            for si, s in enumerate(doc.sentences)
            for ti, t in enumerate(s.tokens)
            if classifier(t.form) == "function"
        ]
        n_drop = round(fraction * len(positions))
        chosen = set(rng.sample(positions, n_drop)) if n_drop else set()
        sents = []
        for si, s in enumerate(doc.sentences):
            kept = delete_tokens(s, {ti for (sj, ti) in chosen if sj == si})
            if kept is not None:
                sents.append(kept)
        out.append(Document(doc.id, doc.speaker_id, doc.subgroup, tuple(sents or doc.sentences[:1])))
    return out


def asr_hypothesis(words, rng: random.Random, error_rate: float = 0.18):
    """Simulated recognizer output: drops hesitations and short function words most."""
    classifier = WordClassifier()
    vocab = [n[0] for n in NOUNS] + [a[0] for a in ADJECTIVES]
    hyp = []
    for w in words:
        cls = classifier(w)
        p = error_rate * (2.2 if cls == "hesitation" else 1.2 if cls == "function" else 0.6)
        r = rng.random()
        if r < p * 0.45:
            continue
        if r < p * 0.85:
            hyp.append(rng.choice(vocab))
            continue
        hyp.append(w)
        if r < p:
            hyp.append(rng.choice(["the", "a", "uh", "and"]))
    return hyp


# --- resources ----------------------------------------------------------------


def _unit(key: str) -> float:
    return int(hashlib.sha256(key.encode()).hexdigest()[:12], 16) / float(1 << 48)


def vocabulary() -> dict[str, int]:
    """Every generated word with a base frequency rank."""
    vocab = {}
    for sing, plural, rank in NOUNS:
        vocab[sing] = rank
        vocab.setdefault(plural, rank + 40)
    for word, rank in ADJECTIVES + ADVERBS:
        vocab[word] = rank
    for v in VERBS + [("want", "wanted", "wants", "want", "want", 120, False)]:
        for k, form in enumerate(v[1:5]):
            vocab.setdefault(form, v[5] + 10 * k)
    words = sorted(WordClassifier().function_words | DEFAULT_HESITATIONS | {"uh", "uhm"})
    for k, w in enumerate(words):
        vocab.setdefault(w, k + 1)
    for w in PREPOSITIONS + SUBORDINATORS + ["to", "can", "should", "will"]:
        vocab.setdefault(w, 20)
    return vocab


def write_resources(directory: str | Path, seed: int = 11) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    vocab = vocabulary()
    manifest = []

    for name, jitter, limit in (("ANC", 0.25, None), ("BNC", 0.6, None), ("NGSL", 0.15, 2800)):
        rows = []
        for w, base in vocab.items():
            rank = max(1, int(base * (1 + jitter * (2 * _unit(name + w) - 1))))
            if limit is None or rank <= limit:
                rows.append((w, rank))
        rows.sort(key=lambda r: (r[1], r[0]))
        fname = f"freq_{name.lower()}.tsv"
        (d / fname).write_text("".join(f"{w}\t{r}\n" for w, r in rows), encoding="utf-8")
        manifest.append(f"{name}\tfrequency\t{fname}\tcutoff=2000")

    for name, mean, spread, cover in (
        ("Prevalence.UKWF", 12.6, 1.5, 0.95),
        ("Prevalence.Crowd", 2.2, 0.3, 0.9),
        ("Prevalence.FemaleSDAP", 4.0, 0.45, 0.85),
    ):
        rows = []
        for w, base in sorted(vocab.items()):
            if _unit("cov" + name + w) > cover:
                continue
            familiarity = 1.0 - min(base, 15000) / 15000
            score = mean + spread * (1.6 * familiarity - 0.8 + 0.6 * (_unit(name + w) - 0.5))
            rows.append(f"{w}\t{score:.4f}\n")
        fname = f"prev_{name.split('.')[1].lower()}.tsv"
        (d / fname).write_text("".join(rows), encoding="utf-8")
        manifest.append(f"{name}\tprevalence\t{fname}")

    tables = (("academic", 3), ("academic", 4), ("fiction", 3), ("fiction", 4),
              ("magazine", 4), ("spoken", 5))
    for k, (register, n) in enumerate(tables):
        gen = Generator(seed * 100 + k, level=0.8 if register == "academic" else 0.4,
                        bias=register if register in ("academic", "spoken") else None)
        counts: dict[str, int] = {}
        for _ in range(600):
            s = sentence_from_tree(gen.sentence())
            forms = [t.form.lower() for t in s.tokens if t.pos not in (".", ",")]
            for i in range(len(forms) - n + 1):
                g = " ".join(forms[i : i + n])
                counts[g] = counts.get(g, 0) + 1
        keep = sorted(g for g in counts if _unit(register + str(n) + g) < 0.7)
        fname = f"ngram_{register}_{n}.tsv"
        (d / fname).write_text("".join(f"{g}\t{counts[g]}\n" for g in keep), encoding="utf-8")
        manifest.append(f"{register}.{n}gram\tngram\t{fname}\tregister={register}\tn={n}")

    (d / "syllables.tsv").write_text(
        "".join(f"{w}\t{c}\n" for w, c in
                (("people", 2), ("table", 2), ("little", 2), ("simple", 2), ("every", 2), ("european", 4))),
        encoding="utf-8",
    )
    manifest.append("syllables\tsyllables\tsyllables.tsv")
    header = "# Synthetic resources generated by l2complexity.synth; not real corpus data.\n"
    (d / "manifest.tsv").write_text(header + "\n".join(manifest) + "\n", encoding="utf-8")


def write_fixtures(directory: str | Path, n_docs: int = 24, seed: int = 7) -> None:
    """Corpus, a function-word-corrupted copy, grade labels and ref/hyp transcripts."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    docs, grades = make_corpus(n_docs, seed)
    dump_corpus(docs, d / "corpus.jsonl")
    dump_corpus(corrupt_function_words(docs, 0.1, seed), d / "corpus_asr.jsonl")
    with open(d / "labels.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("doc_id,label\n")
        for doc in docs:
            if doc.subgroup == "school":
                fh.write(f"{doc.id},{grades[doc.id]}\n")
    rng = random.Random(seed + 1)
    ref = {doc.id: [t.form for t in doc.tokens if t.pos not in (".", ",")] for doc in docs}
    hyp = {k: asr_hypothesis(v, rng) for k, v in ref.items()}
    write_transcripts(ref, d / "ref.txt")
    write_transcripts(hyp, d / "hyp.txt")
    with open(d / "speakers.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(f"{doc.id}\t{doc.speaker_id}\t{doc.subgroup}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m l2complexity.synth")
    ap.add_argument("what", choices=["resources", "fixtures"])
    ap.add_argument("directory")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--docs", type=int, default=24)
    args = ap.parse_args(argv)
    if args.what == "resources":
        write_resources(args.directory, seed=11 if args.seed is None else args.seed)
    else:
        write_fixtures(args.directory, n_docs=args.docs, seed=7 if args.seed is None else args.seed)


if __name__ == "__main__":
    main()
