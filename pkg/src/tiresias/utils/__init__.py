"""Utility helpers shared across Tiresias stages."""
