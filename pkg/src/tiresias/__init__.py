"""
Tiresias - Heat-Kernel Inverse Problem Laboratory

Named after the blind seer of Thebes, Tiresias recovers what it cannot see:
the interior of a metric-measure space from heat observed on a small window.
"""

__version__ = "0.1.0"
