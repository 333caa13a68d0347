"""
The symmetric contrastive objective
===================================

Matched pairs live on the diagonal of a similarity matrix. The loss is
cross-entropy against that diagonal, averaged over rows and columns, with
a learned temperature controlling how sharp the softmax is.
"""

import numpy as np

from vqcontrast import clip_logits, clip_loss, topk_accuracy

np.set_printoptions(precision=3, suppress=True)
rng = np.random.default_rng(0)


def unit_rows(a):
    return a / np.linalg.norm(a, axis=1, keepdims=True)


# With orthonormal embeddings the similarity matrix is the identity.
b = 4
eeg = np.eye(b)
image = np.eye(b)
for log_tau in (0.0, 1.0, 2.0, 3.0):
    loss = clip_loss(clip_logits(eeg, image, log_tau))
    print(f"perfect alignment, log-temperature {log_tau:.0f}: loss = {loss:.5f}")
print("sharper temperature -> steeper softmax -> smaller loss\n")

# Indifferent embeddings (every pair equally similar) give exactly ln B:
# the model cannot do better than a uniform guess over B candidates.
uniform = np.full((b, b), 0.37)
print(f"uniform logits, B={b}: loss = {clip_loss(uniform):.12f}  ln B = {np.log(b):.12f}")

# Random unit embeddings land between the two extremes.
e, v = unit_rows(rng.standard_normal((b, 8))), unit_rows(rng.standard_normal((b, 8)))
logits = clip_logits(e, v, np.log(1 / 0.07))
print(f"random embeddings: loss = {clip_loss(logits):.4f} (ln B = {np.log(b):.4f})")

# The objective is symmetric across modalities by construction.
print("loss(L) == loss(L^T):", clip_loss(logits) == clip_loss(logits.T))

# Retrieval metric: rank class scores per query, ties go to the lowest
# class index so evaluation is deterministic.
scores = np.array([
    [0.9, 0.1, 0.0, 0.0],   # query 0: class 0 ranked first
    [0.2, 0.8, 0.7, 0.1],   # query 1: class 1 first, class 2 second
    [0.5, 0.5, 0.5, 0.5],   # query 2: all tied, class 0 wins the tie
])
labels = np.array([0, 2, 3])
print("\nscores:")
print(scores)
print("true classes:", labels)
for k in (1, 2, 4):
    print(f"top-{k} accuracy: {topk_accuracy(scores, labels, k):.3f}")
