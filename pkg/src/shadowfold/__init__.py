"""Geometry of Euclidean cones over metric graphs."""
