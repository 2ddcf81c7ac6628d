"""synthforge: deterministic synthetic-image dataset forge.

Renders seeded domain-randomized scenes from triangle meshes with
pixel-precise auto-labels, provides a chroma-key cutout pipeline and
training-time augmentation, and evaluates classifier prediction logs.
"""

__version__ = "0.1.0"
