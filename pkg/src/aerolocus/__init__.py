"""Aerial geolocalization from road maps: map decoding, regression fallback,
translation-only ICP refinement, descriptor matching, and a synthetic-city
evaluation harness."""

__version__ = "0.1.0"
