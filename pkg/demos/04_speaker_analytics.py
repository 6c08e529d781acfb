"""Dataset analytics over voice embeddings: gender hours and speaker count.

Embeddings come from an external speaker-verification network as 256-float
vectors per segment; this demo fabricates three synthetic "speakers" (two
female, one male), trains the RBF-kernel SVM on half the data, and runs
greedy cosine clustering to recover the speaker count.

Run:  python demos/04_speaker_analytics.py
"""

import numpy as np

from ttsalign.analytics import (
    Embedding,
    estimate_speakers,
    gender_hours,
    predict,
    train_svm,
)
from ttsalign.segmenter import Segment

rng = np.random.default_rng(7)

SPEAKERS = {  # axis: a crude stand-in for voice characteristics
    "anchor_f1": ("female", 0),
    "anchor_f2": ("female", 60),
    "anchor_m1": ("male", 130),
}

embeddings, labels, segments = [], [], []
for speaker, (gender, axis) in SPEAKERS.items():
    for i in range(30):
        vector = rng.normal(size=256) * 0.3
        vector[axis] += 12.0
        embeddings.append(Embedding(vector, source_id=speaker, index=i))
        labels.append(gender)
        start = i * 6.0
        segments.append(
            Segment(
                fragment_index=i, source_id=speaker,
                start_s=start, end_s=start + rng.uniform(3, 9), text="क",
            )
        )

order = rng.permutation(len(embeddings))
half = len(embeddings) // 2
train_idx, test_idx = order[:half], order[half:]
model = train_svm(
    [embeddings[i] for i in train_idx], [labels[i] for i in train_idx],
    gamma=0.01, C=100.0,
)
print(f"SVM: {len(model.alphas)} support vectors, "
      f"{len(model.objective_history)} SMO passes")

held_out = [(embeddings[i], labels[i]) for i in test_idx]
accuracy = np.mean([predict(model, e) == label for e, label in held_out])
print(f"held-out gender accuracy: {accuracy:.1%}")

predictions = {(e.source_id, e.index): predict(model, e) for e in embeddings}
male_h, female_h = gender_hours(segments, predictions)
print(f"gender distribution: male {male_h:.2f}h, female {female_h:.2f}h")

count, assignments = estimate_speakers(embeddings, cos_threshold=0.75)
print(f"\nestimated speakers: {count}")
for speaker in SPEAKERS:
    clusters = {
        c for e, c in zip(embeddings, assignments) if e.source_id == speaker
    }
    print(f"  {speaker}: cluster(s) {sorted(clusters)}")
