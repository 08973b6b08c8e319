"""Weighted fundamental classes of twisted k-differential loci and Pixton's formula."""

__version__ = "0.1.0"
