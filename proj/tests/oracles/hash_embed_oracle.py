"""Brute-force hash embedding: tokenize, FNV-1a 64, count, l2-normalize."""
import math
import sys

MASK = (1 << 64) - 1


def fnv1a(token, salt):
    h = 0xCBF29CE484222325 ^ salt
    for b in token.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & MASK
    return h


def embed(text, dim, salt=0):
    v = [0.0] * dim
    for tok in text.lower().split():
        v[fnv1a(tok, salt) % dim] += 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v] if n > 0 else v


if __name__ == "__main__":
    text = sys.argv[1] if len(sys.argv) > 1 else "the cat"
    dim = int(sys.argv[2]) if len(sys.argv) > 2 else 8
    for tok in text.lower().split():
        print(tok, fnv1a(tok, 0) % dim)
    print(repr(embed(text, dim)))
