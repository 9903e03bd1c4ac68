"""The nine-way place-of-articulation class set.

Classes are plain strings. The alphabetical order below is the canonical
order everywhere in the toolkit: class indices, posterior vector layout,
argmax tie-breaking, and report row order all derive from it, so that
results are stable across runs and processes.
"""

CLASSES = (
    "alveolar",
    "dental",
    "labial",
    "labiovelar",
    "lateral",
    "palatal",
    "postalveolar",
    "rhotic",
    "velar",
)

NUM_CLASSES = len(CLASSES)

CLASS_INDEX = {name: i for i, name in enumerate(CLASSES)}

# Sentinel used in class maps for phone labels that are excluded from the
# class set (silences, vowels).
DISCARD = "DISCARD"


def require_class(name):
    """Return ``name`` if it is a valid articulation class, else raise ValueError."""
    if name not in CLASS_INDEX:
        raise ValueError(f"unknown articulation class: {name!r} (expected one of {', '.join(CLASSES)})")
    return name
