"""Truncated tensor algebra over R^d.

Elements live in T^D(R^d) = sum of tensor levels 0..D. A level-n component is
indexed by words (i_1, ..., i_n) with letters in {1, ..., d}; coefficients are
stored flat in canonical order: by word length first, then lexicographically
within a length. With that order, level n occupies a contiguous block and its
internal layout coincides with the row-major flattening of the n-fold tensor
power, which is what lets products reduce to Kronecker products per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cache

import numpy as np

from .errors import ShapeError

Word = tuple[int, ...]


def dimension(d: int, depth: int) -> int:
    """Number of words of length <= depth over an alphabet of size d."""
    if d < 1 or depth < 0:
        raise ShapeError(f"need d >= 1 and depth >= 0, got d={d}, depth={depth}")
    if d == 1:
        return depth + 1
    return (d ** (depth + 1) - 1) // (d - 1)


def level_offset(d: int, level: int) -> int:
    """Flat index where the given level starts."""
    return dimension(d, level - 1) if level > 0 else 0


def word_index(word: Word, d: int) -> int:
    """Flat canonical index of a word."""
    k = 0
    for letter in word:
        if not 1 <= letter <= d:
            raise ShapeError(f"letter {letter} outside alphabet of size {d}")
        k = k * d + (letter - 1)
    return level_offset(d, len(word)) + k


def all_words(d: int, depth: int) -> list[Word]:
    """Every word of length <= depth, in canonical (length, then lex) order."""
    words: list[Word] = [()]
    current: list[Word] = [()]
    for _ in range(depth):
        current = [w + (a,) for w in current for a in range(1, d + 1)]
        words.extend(current)
    return words


@dataclass(frozen=True)
class TruncatedTensor:
    """Element of T^D(R^d) with flat coefficients in canonical word order."""

    d: int
    depth: int
    coeffs: np.ndarray

    def __post_init__(self):
        expected = dimension(self.d, self.depth)
        if self.coeffs.shape != (expected,):
            raise ShapeError(
                f"coefficient vector has shape {self.coeffs.shape}, "
                f"expected ({expected},) for d={self.d}, depth={self.depth}"
            )

    def level(self, n: int) -> np.ndarray:
        """View of the level-n block (length d**n)."""
        lo = level_offset(self.d, n)
        return self.coeffs[lo : lo + self.d**n]

    def coefficient(self, word: Word) -> float:
        if len(word) > self.depth:
            raise ShapeError(f"word {word} longer than depth {self.depth}")
        return float(self.coeffs[word_index(word, self.d)])


def zero(d: int, depth: int) -> TruncatedTensor:
    return TruncatedTensor(d, depth, np.zeros(dimension(d, depth)))


def unit(d: int, depth: int) -> TruncatedTensor:
    """Multiplicative unit: coefficient 1 on the empty word."""
    coeffs = np.zeros(dimension(d, depth))
    coeffs[0] = 1.0
    return TruncatedTensor(d, depth, coeffs)


def word_tensor(word: Word, d: int, depth: int, coeff: float = 1.0) -> TruncatedTensor:
    """Basis element e_word scaled by coeff."""
    coeffs = np.zeros(dimension(d, depth))
    coeffs[word_index(word, d)] = coeff
    return TruncatedTensor(d, depth, coeffs)


def _check_compatible(a: TruncatedTensor, b: TruncatedTensor) -> None:
    if a.d != b.d or a.depth != b.depth:
        raise ShapeError(
            f"incompatible operands: (d={a.d}, depth={a.depth}) "
            f"vs (d={b.d}, depth={b.depth})"
        )


def concat_product(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Concatenation (tensor) product, truncated beyond the common depth.

    Coefficient of word w is sum over splittings w = uv of a_u * b_v. Levels
    beyond depth are dropped, which is the algebra projection; droppped terms
    never feed back into retained ones, so the truncated product is exactly
    associative.
    """
    _check_compatible(a, b)
    d, depth = a.d, a.depth
    out = zero(d, depth)
    for n in range(depth + 1):
        acc = out.level(n)
        for i in range(n + 1):
            acc += np.kron(a.level(i), b.level(n - i))
    return out


def inner_product(a: TruncatedTensor, b: TruncatedTensor) -> float:
    """Euclidean pairing of coefficient vectors."""
    _check_compatible(a, b)
    return float(np.dot(a.coeffs, b.coeffs))


@cache
def shuffle_product(u: Word, v: Word) -> dict[Word, int]:
    """Shuffle product of basis words as an integer combination of words.

    Recursion: u ⧢ () = u, () ⧢ v = v, and for nonempty words
    u ⧢ v = (u' ⧢ v)·u_last + (u ⧢ v')·v_last, where priming drops the last
    letter and the trailing letter is concatenated onto every term.
    """
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out: dict[Word, int] = {}
    for w, c in shuffle_product(u[:-1], v).items():
        key = w + (u[-1],)
        out[key] = out.get(key, 0) + c
    for w, c in shuffle_product(u, v[:-1]).items():
        key = w + (v[-1],)
        out[key] = out.get(key, 0) + c
    return out


def shuffle_word_count(u: Word, v: Word) -> int:
    """Total multiplicity of u ⧢ v, which is binomial(|u|+|v|, |u|)."""
    return math.comb(len(u) + len(v), len(u))


def exp_level1(v: np.ndarray, depth: int) -> TruncatedTensor:
    """Tensor exponential of a level-1 element v in R^d.

    Level k is v^{⊗k} / k!; the coefficient of word (i_1, ..., i_k) is
    prod_j v_{i_j} / k!.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ShapeError(f"level-1 element must be a nonempty vector, got shape {v.shape}")
    d = v.size
    out = zero(d, depth)
    out.level(0)[...] = 1.0
    power = np.ones(1)
    for k in range(1, depth + 1):
        power = np.kron(power, v) / k
        out.level(k)[...] = power
    return out
