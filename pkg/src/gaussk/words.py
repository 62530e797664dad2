"""Gate words: ordered products of labelled gates with inversion flags."""

from dataclasses import dataclass, field

import numpy as np

from .symplectic import omega


@dataclass
class GateWord:
    """Ordered tokens ``(label, inverted)``; the product is taken left to right.

    ``label`` is either a net index (int) or a generator name (str).
    ``alphabet`` optionally maps labels to matrices so the word can resolve
    itself without an external net.
    """

    tokens: list = field(default_factory=list)
    alphabet: dict = None
    info: dict = None

    def __len__(self):
        return len(self.tokens)

    def __add__(self, other):
        alphabet = None
        if self.alphabet or other.alphabet:
            alphabet = {**(self.alphabet or {}), **(other.alphabet or {})}
        return GateWord(list(self.tokens) + list(other.tokens), alphabet)

    def inverse(self):
        return GateWord([(lab, not inv) for lab, inv in reversed(self.tokens)], self.alphabet)

    def resolve(self, source=None):
        """Multiply the word out.

        ``source`` is a net (anything with ``elements_at``) or a mapping from
        labels to matrices; defaults to the word's own alphabet.
        """
        source = self.alphabet if source is None else source
        if source is None:
            raise ValueError("no alphabet or net to resolve against")
        if not self.tokens:
            raise ValueError("cannot resolve an empty word without a dimension")
        labels = [lab for lab, _ in self.tokens]
        flags = np.array([inv for _, inv in self.tokens], dtype=bool)
        if hasattr(source, "elements_at"):
            mats = source.elements_at(np.asarray(labels, dtype=np.int64))
        else:
            mats = np.stack([np.asarray(source[lab], dtype=float) for lab in labels])
        return ordered_product(invert_batch(mats, flags))

    def to_json(self):
        return [[lab if isinstance(lab, str) else int(lab), bool(inv)] for lab, inv in self.tokens]

    @classmethod
    def from_json(cls, obj):
        return cls([(lab, bool(inv)) for lab, inv in obj])


def invert_batch(mats, flags=None):
    """Symplectic inverses of a stack, optionally only where ``flags`` is set."""
    mats = np.array(mats, dtype=float)
    W = omega(mats.shape[-1] // 2)
    if flags is None:
        flags = np.ones(len(mats), dtype=bool)
    if np.any(flags):
        sel = mats[flags]
        mats[flags] = W.T @ np.swapaxes(sel, -1, -2) @ W
    return mats


def ordered_product(mats):
    """``mats[0] @ mats[1] @ ...`` by pairwise tree reduction."""
    mats = np.asarray(mats, dtype=float)
    while len(mats) > 1:
        if len(mats) % 2:
            tail = mats[-1:]
            mats = np.concatenate([mats[:-1:2] @ mats[1::2], tail])
        else:
            mats = mats[0::2] @ mats[1::2]
    return mats[0]
