"""Dependent models: Curie-Weiss, edge-triangle graphs, subset sampling, coupled chains."""
