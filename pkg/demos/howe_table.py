"""Tally of Howe factorization shapes over all characters of a small torus."""
from collections import Counter

from artifact import chars
from artifact.parahoric import GroupParams

P = GroupParams.from_q(2, 2, 0, 3)
M = chars.model_for(P)
tally = Counter()
for th in M.characters():
    hd = chars.howe_factorize(th)
    tally[(tuple(hd.m_seq), tuple(hd.h_seq))] += 1
for (m, h), k in sorted(tally.items()):
    print(f"m={m} h={h}: {k}")
print("total", sum(tally.values()), "=", M.order)
