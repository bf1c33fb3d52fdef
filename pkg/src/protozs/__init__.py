"""Zero-shot relation classification with analogy augmentation, knowledge-graph
virtual labels and prototypical networks."""

__version__ = "0.1.0"
