"""Synthetic parallel corpora with a known word-to-word lexicon."""
import random

from amrdiv.align import align


def bijective_corpus(seed=0, vocab=50, pairs=1000):
    rng = random.Random(seed)
    src = [f"s{k}" for k in range(vocab)]
    lexicon = dict(zip(src, rng.sample([f"t{k}" for k in range(vocab)], vocab)))
    corpus, gold = [], []
    for _ in range(pairs):
        sent = [rng.choice(src) for _ in range(rng.randint(3, 8))]
        order = list(range(len(sent)))
        rng.shuffle(order)
        corpus.append((sent, [lexicon[sent[i]] for i in order]))
        gold.append(order)
    return corpus, gold, lexicon


def accuracy(model, corpus, gold):
    right = total = 0
    for (src, tgt), order in zip(corpus, gold):
        links = dict((j, i) for i, j in align(model, src, tgt).links)
        for j, i in enumerate(order):
            total += 1
            # a repeated source word makes either copy correct
            right += j in links and src[links[j]] == src[i]
    return right / total
