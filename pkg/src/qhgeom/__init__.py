"""Quasihyperbolic and distance-ratio metrics: distances, geodesics, metric balls."""
